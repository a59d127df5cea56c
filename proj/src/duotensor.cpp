#include "duo/duotensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "duo/error.hpp"

namespace duo {

namespace {

std::size_t product(const std::vector<IndexMeta>& idx) {
  std::size_t n = 1;
  for (const auto& i : idx) n *= static_cast<std::size_t>(i.dim);
  return n;
}

std::vector<std::size_t> strides_of(const std::vector<IndexMeta>& idx) {
  std::vector<std::size_t> s(idx.size(), 1);
  for (std::size_t i = idx.size(); i-- > 1;) s[i - 1] = s[i] * static_cast<std::size_t>(idx[i].dim);
  return s;
}

/// new[o, i, r] = sum_j m(i, j) old[o, j, r] along `axis`.
std::vector<double> apply_on_axis(const std::vector<double>& values, const std::vector<IndexMeta>& idx,
                                  std::size_t axis, const Eigen::MatrixXd& m) {
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= static_cast<std::size_t>(idx[i].dim);
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < idx.size(); ++i) inner *= static_cast<std::size_t>(idx[i].dim);
  const auto d = static_cast<std::size_t>(idx[axis].dim);
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t base = o * d * inner;
    for (std::size_t i = 0; i < d; ++i) {
      double* dst = out.data() + base + i * inner;
      for (std::size_t j = 0; j < d; ++j) {
        const double c = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (c == 0.0) continue;
        const double* src = values.data() + base + j * inner;
        for (std::size_t r = 0; r < inner; ++r) dst[r] += c * src[r];
      }
    }
  }
  return out;
}

/// Values reordered so that new index p is old index perm[p].
std::vector<double> permute(const std::vector<double>& values, const std::vector<IndexMeta>& idx,
                            const std::vector<std::size_t>& perm) {
  const std::size_t rank = idx.size();
  bool trivial = true;
  for (std::size_t p = 0; p < rank; ++p) trivial = trivial && perm[p] == p;
  if (trivial) return values;
  const auto old_strides = strides_of(idx);
  std::vector<std::size_t> dims(rank), src_stride(rank);
  for (std::size_t p = 0; p < rank; ++p) {
    dims[p] = static_cast<std::size_t>(idx[perm[p]].dim);
    src_stride[p] = old_strides[perm[p]];
  }
  std::vector<double> out(values.size());
  std::vector<std::size_t> counter(rank, 0);
  std::size_t src = 0;
  for (std::size_t dst = 0; dst < out.size(); ++dst) {
    out[dst] = values[src];
    for (std::size_t p = rank; p-- > 0;) {
      if (++counter[p] < dims[p]) {
        src += src_stride[p];
        break;
      }
      src -= src_stride[p] * (dims[p] - 1);
      counter[p] = 0;
    }
  }
  return out;
}

const HoppingMetric& metric_for(const std::map<std::string, HoppingMetric>& metrics, const std::string& type) {
  auto it = metrics.find(type);
  if (it == metrics.end()) throw Error(ErrorKind::MissingMetric, "no hopping metric for type '" + type + "'");
  return it->second;
}

void require_same_indices(const Duotensor& a, const Duotensor& b, std::string_view what) {
  if (a.indices() != b.indices()) {
    throw Error(ErrorKind::IndexMismatch, std::string(what) + ": index lists differ");
  }
}

}  // namespace

std::string_view to_string(Direction d) { return d == Direction::Input ? "input" : "output"; }
std::string_view to_string(Color c) { return c == Color::Black ? "black" : "white"; }

std::string_view to_string(ProportionalityResult::Kind kind) {
  switch (kind) {
    case ProportionalityResult::Kind::Proportional: return "Proportional";
    case ProportionalityResult::Kind::NotProportional: return "NotProportional";
    case ProportionalityResult::Kind::ZeroDenominator: return "ZeroDenominator";
    case ProportionalityResult::Kind::BothZero: return "BothZero";
  }
  return "?";
}

Duotensor Duotensor::scalar(double value) { return Duotensor({}, {value}); }

Duotensor::Duotensor(std::vector<IndexMeta> indices, std::vector<double> values)
    : indices_(std::move(indices)), values_(std::move(values)) {
  std::set<std::string> seen;
  for (const auto& i : indices_) {
    if (!seen.insert(i.label).second) throw Error(ErrorKind::DuplicatePort, "duplicate index label '" + i.label + "'");
    if (i.dim < 1) throw Error(ErrorKind::IndexMismatch, "index '" + i.label + "' has non-positive dimension");
  }
  if (values_.size() != product(indices_)) {
    throw Error(ErrorKind::IndexMismatch, "value count " + std::to_string(values_.size()) +
                                              " does not match index dimensions");
  }
}

double Duotensor::scalar_value() const {
  if (!is_scalar()) throw Error(ErrorKind::IndexMismatch, "duotensor is not a scalar");
  return values_.front();
}

std::optional<std::size_t> Duotensor::position(const std::string& label) const {
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i].label == label) return i;
  }
  return std::nullopt;
}

const IndexMeta& Duotensor::index(const std::string& label) const {
  auto p = position(label);
  if (!p) throw Error(ErrorKind::NoSuchPort, "no index labelled '" + label + "'");
  return indices_[*p];
}

double Duotensor::at(std::span<const int> multi_index) const {
  if (multi_index.size() != indices_.size()) throw Error(ErrorKind::IndexMismatch, "wrong number of indices");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (multi_index[i] < 0 || multi_index[i] >= indices_[i].dim) {
      throw Error(ErrorKind::IndexMismatch, "index value out of range");
    }
    flat = flat * static_cast<std::size_t>(indices_[i].dim) + static_cast<std::size_t>(multi_index[i]);
  }
  return values_[flat];
}

Duotensor recolor(const Duotensor& t, const std::string& label, Color target, const HoppingMetric& metric) {
  const auto pos = t.position(label);
  if (!pos) throw Error(ErrorKind::NoSuchPort, "no index labelled '" + label + "'");
  const IndexMeta& meta = t.indices()[*pos];
  if (meta.type_name != metric.type_name || meta.dim != metric.g_bb.rows()) {
    throw Error(ErrorKind::TypeMismatch,
                "metric of type '" + metric.type_name + "' applied to index of type '" + meta.type_name + "'");
  }
  if (meta.color == target) return t;
  // Outputs: black = g_bb * white. Inputs: black = g_bb^T * white.
  const bool to_black = target == Color::Black;
  Eigen::MatrixXd m = to_black ? metric.g_bb : metric.g_ww;
  if (meta.direction == Direction::Input) m.transposeInPlace();
  auto indices = t.indices();
  indices[*pos].color = target;
  return Duotensor(std::move(indices), apply_on_axis(t.values(), t.indices(), *pos, m));
}

Duotensor contract(const Duotensor& a, const Duotensor& b,
                   std::span<const std::pair<std::string, std::string>> links) {
  std::vector<std::size_t> linked_a, linked_b;
  std::set<std::string> used_a, used_b;
  for (const auto& [la, lb] : links) {
    if (!used_a.insert(la).second || !used_b.insert(lb).second) {
      throw Error(ErrorKind::DuplicatePort, "port used in two links ('" + la + "', '" + lb + "')");
    }
    const auto pa = a.position(la);
    const auto pb = b.position(lb);
    if (!pa) throw Error(ErrorKind::NoSuchPort, "no index labelled '" + la + "'");
    if (!pb) throw Error(ErrorKind::NoSuchPort, "no index labelled '" + lb + "'");
    const IndexMeta& ia = a.indices()[*pa];
    const IndexMeta& ib = b.indices()[*pb];
    if (ia.direction == ib.direction) {
      throw Error(ErrorKind::DirectionMismatch, "link '" + la + "'-'" + lb + "' joins two " +
                                                    std::string(to_string(ia.direction)) + "s");
    }
    if (ia.type_name != ib.type_name || ia.dim != ib.dim) {
      throw Error(ErrorKind::TypeMismatch, "link '" + la + "'-'" + lb + "' joins types '" + ia.type_name +
                                               "' and '" + ib.type_name + "'");
    }
    if (ia.color == ib.color) {
      throw Error(ErrorKind::ColorClash, "link '" + la + "'-'" + lb + "' joins two " +
                                             std::string(to_string(ia.color)) + " dots");
    }
    linked_a.push_back(*pa);
    linked_b.push_back(*pb);
  }

  std::vector<std::size_t> free_a, free_b;
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (std::find(linked_a.begin(), linked_a.end(), i) == linked_a.end()) free_a.push_back(i);
  }
  for (std::size_t i = 0; i < b.rank(); ++i) {
    if (std::find(linked_b.begin(), linked_b.end(), i) == linked_b.end()) free_b.push_back(i);
  }

  std::vector<IndexMeta> result;
  for (auto i : free_a) result.push_back(a.indices()[i]);
  for (auto i : free_b) result.push_back(b.indices()[i]);
  {
    std::set<std::string> seen;
    for (const auto& r : result) {
      if (!seen.insert(r.label).second) {
        throw Error(ErrorKind::DuplicatePort, "contraction result repeats label '" + r.label + "'");
      }
    }
  }

  // a -> [free_a | linked], b -> [linked | free_b], then a matrix product.
  std::vector<std::size_t> perm_a = free_a;
  perm_a.insert(perm_a.end(), linked_a.begin(), linked_a.end());
  std::vector<std::size_t> perm_b = linked_b;
  perm_b.insert(perm_b.end(), free_b.begin(), free_b.end());
  const auto va = permute(a.values(), a.indices(), perm_a);
  const auto vb = permute(b.values(), b.indices(), perm_b);

  std::size_t rows = 1, inner = 1, cols = 1;
  for (auto i : free_a) rows *= static_cast<std::size_t>(a.indices()[i].dim);
  for (auto i : linked_a) inner *= static_cast<std::size_t>(a.indices()[i].dim);
  for (auto i : free_b) cols *= static_cast<std::size_t>(b.indices()[i].dim);

  std::vector<double> out(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double* dst = out.data() + r * cols;
    for (std::size_t l = 0; l < inner; ++l) {
      const double c = va[r * inner + l];
      if (c == 0.0) continue;
      const double* src = vb.data() + l * cols;
      for (std::size_t q = 0; q < cols; ++q) dst[q] += c * src[q];
    }
  }
  return Duotensor(std::move(result), std::move(out));
}

Duotensor outer(const Duotensor& a, const Duotensor& b) { return contract(a, b, {}); }

Duotensor linear_combine(std::span<const std::pair<double, Duotensor>> terms) {
  if (terms.empty()) throw Error(ErrorKind::IndexMismatch, "linear_combine needs at least one term");
  const Duotensor& first = terms.front().second;
  std::vector<double> out(first.size(), 0.0);
  for (const auto& [c, t] : terms) {
    require_same_indices(first, t, "linear_combine");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * t.values()[i];
  }
  return Duotensor(first.indices(), std::move(out));
}

Duotensor with_colors(const Duotensor& t, std::span<const Color> colors,
                      const std::map<std::string, HoppingMetric>& metrics) {
  if (colors.size() != t.rank()) throw Error(ErrorKind::IndexMismatch, "color list length differs from rank");
  Duotensor out = t;
  for (std::size_t i = 0; i < t.rank(); ++i) {
    const IndexMeta& meta = t.indices()[i];
    if (meta.color == colors[i]) continue;
    out = recolor(out, meta.label, colors[i], metric_for(metrics, meta.type_name));
  }
  return out;
}

Duotensor to_standard_form(const Duotensor& t, const std::map<std::string, HoppingMetric>& metrics) {
  std::vector<Color> colors;
  for (const auto& i : t.indices()) colors.push_back(i.direction == Direction::Input ? Color::Black : Color::White);
  return with_colors(t, colors, metrics);
}

Duotensor to_all_black(const Duotensor& t, const std::map<std::string, HoppingMetric>& metrics) {
  std::vector<Color> colors(t.rank(), Color::Black);
  return with_colors(t, colors, metrics);
}

Duotensor to_evolution_form(const Duotensor& t, const std::map<std::string, HoppingMetric>& metrics) {
  std::vector<Color> colors;
  for (const auto& i : t.indices()) colors.push_back(i.direction == Direction::Input ? Color::White : Color::Black);
  return with_colors(t, colors, metrics);
}

Duotensor relabel(const Duotensor& t, const std::map<std::string, std::string>& renames) {
  auto indices = t.indices();
  for (auto& i : indices) {
    if (auto it = renames.find(i.label); it != renames.end()) i.label = it->second;
  }
  return Duotensor(std::move(indices), t.values());
}

Duotensor reorder(const Duotensor& t, std::span<const std::string> labels) {
  if (labels.size() != t.rank()) throw Error(ErrorKind::IndexMismatch, "reorder needs every label exactly once");
  std::vector<std::size_t> perm;
  std::vector<IndexMeta> indices;
  for (const auto& l : labels) {
    const auto p = t.position(l);
    if (!p) throw Error(ErrorKind::NoSuchPort, "no index labelled '" + l + "'");
    perm.push_back(*p);
    indices.push_back(t.indices()[*p]);
  }
  return Duotensor(std::move(indices), permute(t.values(), t.indices(), perm));
}

Duotensor identity_delta(const std::string& type_name, int k, const std::string& input_label,
                         const std::string& output_label, Color input_color) {
  const Color output_color = input_color == Color::White ? Color::Black : Color::White;
  std::vector<IndexMeta> idx{{input_label, Direction::Input, type_name, input_color, k},
                             {output_label, Direction::Output, type_name, output_color, k}};
  std::vector<double> v(static_cast<std::size_t>(k * k), 0.0);
  for (int i = 0; i < k; ++i) v[static_cast<std::size_t>(i * k + i)] = 1.0;
  return Duotensor(std::move(idx), std::move(v));
}

ProportionalityResult proportionality(const Duotensor& a, const Duotensor& b, double rel_tol) {
  require_same_indices(a, b, "proportionality");
  double ab = 0.0, bb = 0.0, a_inf = 0.0, b_inf = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a.values()[i], y = b.values()[i];
    ab += x * y;
    bb += y * y;
    a_inf = std::max(a_inf, std::abs(x));
    b_inf = std::max(b_inf, std::abs(y));
  }
  using Kind = ProportionalityResult::Kind;
  if (b_inf <= kZeroFloor) return {a_inf <= kZeroFloor ? Kind::BothZero : Kind::ZeroDenominator, 0.0};
  const double k = ab / bb;
  const double scale = std::max(a_inf, std::abs(k) * b_inf);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a.values()[i] - k * b.values()[i]) > rel_tol * scale + kZeroFloor) return {Kind::NotProportional, k};
  }
  return {Kind::Proportional, k};
}

Duotensor transform_duotensor(const Duotensor& t, const std::map<std::string, FiducialTransform>& transforms) {
  std::vector<double> values = t.values();
  for (std::size_t axis = 0; axis < t.rank(); ++axis) {
    const IndexMeta& meta = t.indices()[axis];
    auto it = transforms.find(meta.type_name);
    if (it == transforms.end()) continue;
    const FiducialTransform& f = it->second;
    Eigen::MatrixXd m;
    if (meta.direction == Direction::Input) {
      m = meta.color == Color::Black ? f.prep_inverse : Eigen::MatrixXd(f.effect_matrix.transpose());
    } else {
      m = meta.color == Color::Black ? f.effect_inverse : Eigen::MatrixXd(f.prep_matrix.transpose());
    }
    if (m.rows() != meta.dim) throw Error(ErrorKind::TypeMismatch, "transform size differs from index dimension");
    values = apply_on_axis(values, t.indices(), axis, m);
  }
  return Duotensor(t.indices(), std::move(values));
}

double max_abs_difference(const Duotensor& a, const Duotensor& b) {
  require_same_indices(a, b, "max_abs_difference");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

}  // namespace duo
