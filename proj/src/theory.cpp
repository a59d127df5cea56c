#include "duo/theory.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "duo/backends.hpp"
#include "duo/error.hpp"
#include "duo/linalg.hpp"

namespace duo {

namespace {

constexpr std::string_view kClosePrepPrefix = "~prep.";
constexpr std::string_view kCloseEffectPrefix = "~effect.";

[[noreturn]] void unphysical(std::string_view role, std::size_t index, std::string_view constraint) {
  std::ostringstream os;
  os << role << " " << index << " violates constraint '" << constraint << "'";
  throw Error(ErrorKind::UnphysicalFiducial, os.str());
}

void check_classical(int n, const ClassicalFiducials& f) {
  for (std::size_t i = 0; i < f.preparations.size(); ++i) {
    const auto& p = f.preparations[i];
    if (p.size() != n) unphysical("preparation", i, "dimension");
    if (p.minCoeff() < linalg::kPositivityFloor) unphysical("preparation", i, "nonnegative");
    if (p.sum() > 1.0 + 1e-10) unphysical("preparation", i, "sum<=1");
  }
  for (std::size_t i = 0; i < f.effects.size(); ++i) {
    const auto& r = f.effects[i];
    if (r.size() != n) unphysical("effect", i, "dimension");
    if (r.minCoeff() < linalg::kPositivityFloor) unphysical("effect", i, "nonnegative");
    if (r.maxCoeff() > 1.0 + 1e-10) unphysical("effect", i, "entries<=1");
  }
}

void check_quantum(int n, const QuantumFiducials& f) {
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  for (std::size_t i = 0; i < f.preparations.size(); ++i) {
    const auto& p = f.preparations[i];
    if (p.rows() != n || p.cols() != n) unphysical("preparation", i, "dimension");
    if (!linalg::is_hermitian(p)) unphysical("preparation", i, "hermitian");
    if (linalg::min_eigenvalue(p) < linalg::kPositivityFloor) unphysical("preparation", i, "positive");
    if (p.trace().real() > 1.0 + 1e-10) unphysical("preparation", i, "trace<=1");
  }
  for (std::size_t i = 0; i < f.effects.size(); ++i) {
    const auto& e = f.effects[i];
    if (e.rows() != n || e.cols() != n) unphysical("effect", i, "dimension");
    if (!linalg::is_hermitian(e)) unphysical("effect", i, "hermitian");
    if (linalg::min_eigenvalue(e) < linalg::kPositivityFloor) unphysical("effect", i, "positive");
    if (linalg::min_eigenvalue(id - e) < linalg::kPositivityFloor) unphysical("effect", i, "I-P positive");
  }
}

template <class Coords>
void check_independent(std::string_view role, std::size_t k, std::size_t count, Coords coords) {
  if (count != k) {
    std::ostringstream os;
    os << "expected " << k << " fiducial " << role << "s, got " << count;
    throw Error(ErrorKind::DependentFiducials, os.str());
  }
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) rows.row(static_cast<Eigen::Index>(i)) = coords(i).transpose();
  const double rel = linalg::relative_min_singular_value(rows);
  if (!(rel > kMinRelativeSingularValue)) {
    std::ostringstream os;
    os << "fiducial " << role << "s are linearly dependent (relative sigma_min " << rel << ")";
    throw Error(ErrorKind::DependentFiducials, os.str());
  }
}

Eigen::MatrixXd coordinate_rows(const std::vector<Eigen::VectorXd>& v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), v.empty() ? 0 : v.front().size());
  for (std::size_t i = 0; i < v.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = v[i].transpose();
  return m;
}

Eigen::MatrixXd coordinate_rows(const std::vector<Eigen::MatrixXcd>& v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()),
                    v.empty() ? 0 : v.front().rows() * v.front().rows());
  for (std::size_t i = 0; i < v.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = linalg::hermitian_coordinates(v[i]).transpose();
  }
  return m;
}

template <class T>
std::vector<T> recombine(const Eigen::MatrixXd& coeffs, const std::vector<T>& old) {
  std::vector<T> out;
  out.reserve(old.size());
  for (Eigen::Index i = 0; i < coeffs.rows(); ++i) {
    T acc = T::Zero(old.front().rows(), old.front().cols());
    for (Eigen::Index j = 0; j < coeffs.cols(); ++j) acc += coeffs(i, j) * old[static_cast<std::size_t>(j)];
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace

std::string_view to_string(Backend backend) {
  return backend == Backend::Classical ? "classical" : "quantum";
}

CompositeType CompositeType::operator*(const CompositeType& other) const {
  CompositeType out = *this;
  out.factors.insert(out.factors.end(), other.factors.begin(), other.factors.end());
  return out;
}

long CompositeType::k(const Theory& theory) const {
  long out = 1;
  for (const auto& f : factors) out *= theory.type(f).k;
  return out;
}

long CompositeType::backend_dim(const Theory& theory) const {
  long out = 1;
  for (const auto& f : factors) out *= theory.type(f).backend_dim;
  return out;
}

std::size_t FiducialSet::size() const {
  return std::visit([](const auto& e) { return e.preparations.size(); }, elements);
}

FiducialTransform FiducialTransform::make(std::string type_name, Eigen::MatrixXd effect_matrix,
                                          Eigen::MatrixXd prep_matrix) {
  FiducialTransform t;
  t.type_name = std::move(type_name);
  auto invert = [&](const Eigen::MatrixXd& m, std::string_view which) {
    if (m.rows() != m.cols() || m.rows() == 0) {
      throw Error(ErrorKind::SingularTransform, std::string(which) + " matrix is not square");
    }
    double cond = 0.0;
    Eigen::MatrixXd inv = linalg::inverse(m, &cond);
    const long n = m.rows();
    const double err = std::max((m * inv - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(),
                                (inv * m - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
    if (!(cond < kMaxMetricCondition) || !(err <= 1e-10)) {
      std::ostringstream os;
      os << which << " matrix is singular (condition " << cond << ")";
      throw Error(ErrorKind::SingularTransform, os.str());
    }
    return inv;
  };
  t.effect_inverse = invert(effect_matrix, "effect");
  t.prep_inverse = invert(prep_matrix, "preparation");
  if (effect_matrix.rows() != prep_matrix.rows()) {
    throw Error(ErrorKind::SingularTransform, "effect and preparation matrices differ in size");
  }
  t.effect_matrix = std::move(effect_matrix);
  t.prep_matrix = std::move(prep_matrix);
  return t;
}

FiducialTransform FiducialTransform::identity(std::string type_name, int k) {
  return make(std::move(type_name), Eigen::MatrixXd::Identity(k, k), Eigen::MatrixXd::Identity(k, k));
}

const std::vector<std::string>& input_types(const BackendOperation& op) {
  return std::visit([](const auto& o) -> const std::vector<std::string>& { return o.input_types; }, op);
}

const std::vector<std::string>& output_types(const BackendOperation& op) {
  return std::visit([](const auto& o) -> const std::vector<std::string>& { return o.output_types; }, op);
}

std::string closing_preparation_id(const std::string& type_name) {
  return std::string(kClosePrepPrefix) + type_name;
}

std::string closing_effect_id(const std::string& type_name) {
  return std::string(kCloseEffectPrefix) + type_name;
}

bool is_closing_apparatus(const std::string& apparatus_id) {
  return apparatus_id.rfind(kClosePrepPrefix, 0) == 0 || apparatus_id.rfind(kCloseEffectPrefix, 0) == 0;
}

FiducialElements default_fiducials(Backend backend, int n) {
  if (backend == Backend::Classical) {
    ClassicalFiducials f;
    for (int i = 0; i < n; ++i) {
      f.preparations.push_back(Eigen::VectorXd::Unit(n, i));
      f.effects.push_back(Eigen::VectorXd::Unit(n, i));
    }
    return f;
  }
  using C = std::complex<double>;
  std::vector<Eigen::MatrixXcd> ops;
  auto projector = [&](const Eigen::VectorXcd& v) -> Eigen::MatrixXcd { return v * v.adjoint(); };
  for (int j = 0; j < n; ++j) ops.push_back(projector(Eigen::VectorXcd::Unit(n, j)));
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      Eigen::VectorXcd v = (Eigen::VectorXcd::Unit(n, j) + Eigen::VectorXcd::Unit(n, k)) / std::sqrt(2.0);
      ops.push_back(projector(v));
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      Eigen::VectorXcd v =
          (Eigen::VectorXcd::Unit(n, j) + C(0.0, 1.0) * Eigen::VectorXcd::Unit(n, k)) / std::sqrt(2.0);
      ops.push_back(projector(v));
    }
  }
  return QuantumFiducials{ops, ops};
}

void validate_fiducials(Backend backend, int n, const FiducialElements& elements) {
  if (backend == Backend::Classical) {
    const auto* f = std::get_if<ClassicalFiducials>(&elements);
    if (f == nullptr) throw Error(ErrorKind::UnphysicalFiducial, "quantum fiducials given for a classical type");
    const std::size_t k = static_cast<std::size_t>(n);
    check_independent("preparation", k, f->preparations.size(), [&](std::size_t i) { return f->preparations[i]; });
    check_independent("effect", k, f->effects.size(), [&](std::size_t i) { return f->effects[i]; });
    check_classical(n, *f);
    return;
  }
  const auto* f = std::get_if<QuantumFiducials>(&elements);
  if (f == nullptr) throw Error(ErrorKind::UnphysicalFiducial, "classical fiducials given for a quantum type");
  const std::size_t k = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  // Shape and hermiticity come first so the coordinate map is meaningful.
  check_quantum(n, *f);
  check_independent("preparation", k, f->preparations.size(),
                    [&](std::size_t i) { return linalg::hermitian_coordinates(f->preparations[i]); });
  check_independent("effect", k, f->effects.size(),
                    [&](std::size_t i) { return linalg::hermitian_coordinates(f->effects[i]); });
}

HoppingMetric compute_hopping_metric(const FiducialSet& fiducials) {
  HoppingMetric m;
  m.type_name = fiducials.type_name;
  const auto k = static_cast<Eigen::Index>(fiducials.size());
  m.g_bb.resize(k, k);
  if (const auto* c = std::get_if<ClassicalFiducials>(&fiducials.elements)) {
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) m.g_bb(i, j) = c->effects[i].dot(c->preparations[j]);
    }
  } else {
    const auto& q = std::get<QuantumFiducials>(fiducials.elements);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) m.g_bb(i, j) = (q.effects[i] * q.preparations[j]).trace().real();
    }
  }
  m.g_ww = linalg::inverse(m.g_bb, &m.condition_estimate);
  if (!(m.condition_estimate <= kMaxMetricCondition)) {
    std::ostringstream os;
    os << "hopping metric for type '" << m.type_name << "' is singular (condition estimate "
       << m.condition_estimate << ")";
    throw Error(ErrorKind::SingularMetric, os.str());
  }
  return m;
}

HoppingMetric compute_hopping_metric(const Theory& theory, const std::string& type_name) {
  return compute_hopping_metric(theory.fiducials(type_name));
}

void Theory::install_type(const std::string& name, int backend_dim, FiducialElements elements) {
  SystemType t{name, backend_ == Backend::Quantum ? backend_dim * backend_dim : backend_dim, backend_dim};
  FiducialSet fs{name, std::move(elements)};
  HoppingMetric metric = compute_hopping_metric(fs);
  types_[name] = t;
  fiducials_[name] = std::move(fs);
  metrics_[name] = std::move(metric);
}

const SystemType& Theory::register_type(const std::string& name, int backend_dim,
                                        std::optional<FiducialElements> fiducials) {
  if (types_.count(name) != 0) throw Error(ErrorKind::DuplicateType, "type '" + name + "' already registered");
  if (name.empty()) throw Error(ErrorKind::UnknownType, "type name must not be empty");
  if (backend_dim < 1) throw Error(ErrorKind::UnphysicalFiducial, "backend dimension must be >= 1");
  FiducialElements elements = fiducials ? std::move(*fiducials) : default_fiducials(backend_, backend_dim);
  validate_fiducials(backend_, backend_dim, elements);
  install_type(name, backend_dim, std::move(elements));

  const long n = backend_dim;
  if (backend_ == Backend::Classical) {
    ClassicalOperation prep{{}, {name}, Eigen::MatrixXd::Constant(n, 1, 1.0 / static_cast<double>(n))};
    ClassicalOperation effect{{name}, {}, Eigen::MatrixXd::Ones(1, n)};
    closures_.insert_or_assign(name, std::make_pair(BackendOperation(prep), BackendOperation(effect)));
  } else {
    QuantumOperation prep{{}, {name}, {}};
    QuantumOperation effect{{name}, {}, {}};
    for (long j = 0; j < n; ++j) {
      Eigen::MatrixXcd ket = Eigen::MatrixXcd::Zero(n, 1);
      ket(j, 0) = 1.0 / std::sqrt(static_cast<double>(n));
      Eigen::MatrixXcd bra = Eigen::MatrixXcd::Zero(1, n);
      bra(0, j) = 1.0;
      prep.kraus.push_back(std::move(ket));
      effect.kraus.push_back(std::move(bra));
    }
    closures_.insert_or_assign(name, std::make_pair(BackendOperation(prep), BackendOperation(effect)));
  }
  return types_.at(name);
}

const SystemType& Theory::type(const std::string& name) const {
  auto it = types_.find(name);
  if (it == types_.end()) throw Error(ErrorKind::UnknownType, "unknown type '" + name + "'");
  return it->second;
}

const FiducialSet& Theory::fiducials(const std::string& name) const {
  auto it = fiducials_.find(name);
  if (it == fiducials_.end()) throw Error(ErrorKind::UnknownType, "unknown type '" + name + "'");
  return it->second;
}

const HoppingMetric& Theory::metric(const std::string& name) const {
  auto it = metrics_.find(name);
  if (it == metrics_.end()) throw Error(ErrorKind::MissingMetric, "no hopping metric for type '" + name + "'");
  return it->second;
}

void Theory::declare_operation(OperationDecl decl) {
  if (decl.apparatus_id.empty() || is_closing_apparatus(decl.apparatus_id)) {
    throw Error(ErrorKind::MissingOperation, "invalid apparatus id '" + decl.apparatus_id + "'");
  }
  for (const auto& t : decl.input_types) type(t);
  for (const auto& t : decl.output_types) type(t);
  for (const auto& [label, op] : decl.outcomes) {
    if (input_types(op) != decl.input_types || output_types(op) != decl.output_types) {
      throw Error(ErrorKind::ShapeMismatch,
                  "outcome '" + label + "' of '" + decl.apparatus_id + "' has mismatched port types");
    }
    validate_operation(*this, op);
  }
  operations_.insert_or_assign(decl.apparatus_id, std::move(decl));
}

const OperationDecl* Theory::find_operation(const std::string& apparatus_id) const {
  auto it = operations_.find(apparatus_id);
  return it == operations_.end() ? nullptr : &it->second;
}

void Theory::set_standard_closure(const std::string& type_name, BackendOperation preparation,
                                  BackendOperation effect) {
  type(type_name);
  if (!input_types(preparation).empty() || output_types(preparation) != std::vector<std::string>{type_name} ||
      input_types(effect) != std::vector<std::string>{type_name} || !output_types(effect).empty()) {
    throw Error(ErrorKind::ShapeMismatch, "closure devices must be a preparation and an effect of '" +
                                              type_name + "'");
  }
  validate_operation(*this, preparation);
  validate_operation(*this, effect);
  closures_.insert_or_assign(type_name, std::make_pair(std::move(preparation), std::move(effect)));
}

BackendOperation Theory::total_outcome(const std::string& apparatus_id) const {
  const OperationDecl* decl = find_operation(apparatus_id);
  if (decl == nullptr) throw Error(ErrorKind::MissingOperation, "unknown apparatus '" + apparatus_id + "'");
  if (auto it = decl->outcomes.find(std::string(kTotalOutcome)); it != decl->outcomes.end()) return it->second;
  if (decl->outcomes.empty()) throw Error(ErrorKind::MissingOperation, "apparatus '" + apparatus_id + "' has no outcomes");
  if (backend_ == Backend::Classical) {
    ClassicalOperation total{decl->input_types, decl->output_types, {}};
    for (const auto& [label, op] : decl->outcomes) {
      const auto& z = std::get<ClassicalOperation>(op).z;
      if (total.z.size() == 0) total.z = z;
      else total.z += z;
    }
    return total;
  }
  QuantumOperation total{decl->input_types, decl->output_types, {}};
  for (const auto& [label, op] : decl->outcomes) {
    const auto& ks = std::get<QuantumOperation>(op).kraus;
    total.kraus.insert(total.kraus.end(), ks.begin(), ks.end());
  }
  return total;
}

BackendOperation Theory::resolve(const std::string& apparatus_id, const std::string& outcome_label) const {
  if (apparatus_id.rfind(kClosePrepPrefix, 0) == 0 || apparatus_id.rfind(kCloseEffectPrefix, 0) == 0) {
    const bool prep = apparatus_id.rfind(kClosePrepPrefix, 0) == 0;
    const std::string type_name =
        apparatus_id.substr(prep ? kClosePrepPrefix.size() : kCloseEffectPrefix.size());
    auto it = closures_.find(type_name);
    if (it == closures_.end()) throw Error(ErrorKind::MissingOperation, "no closure for type '" + type_name + "'");
    return prep ? it->second.first : it->second.second;
  }
  const OperationDecl* decl = find_operation(apparatus_id);
  if (decl == nullptr) throw Error(ErrorKind::MissingOperation, "unknown apparatus '" + apparatus_id + "'");
  if (outcome_label.empty()) {
    if (decl->outcomes.size() == 1) return decl->outcomes.begin()->second;
    return total_outcome(apparatus_id);
  }
  if (auto it = decl->outcomes.find(outcome_label); it != decl->outcomes.end()) return it->second;
  if (outcome_label == kTotalOutcome) return total_outcome(apparatus_id);
  throw Error(ErrorKind::MissingOperation,
              "apparatus '" + apparatus_id + "' has no outcome '" + outcome_label + "'");
}

bool Theory::is_complete_family(const std::string& apparatus_id, double tol) const {
  const BackendOperation total = total_outcome(apparatus_id);
  if (const auto* c = std::get_if<ClassicalOperation>(&total)) {
    if (c->z.size() == 0 || c->z.minCoeff() < -tol) return false;
    return (c->z.colwise().sum().array() - 1.0).abs().maxCoeff() <= tol;
  }
  const auto& q = std::get<QuantumOperation>(total);
  if (q.kraus.empty()) return false;
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(q.kraus.front().cols(), q.kraus.front().cols());
  for (const auto& k : q.kraus) s += k.adjoint() * k;
  return (s - Eigen::MatrixXcd::Identity(s.rows(), s.cols())).cwiseAbs().maxCoeff() <= tol;
}

Theory change_fiducials(const Theory& theory, const std::string& type_name, const FiducialTransform& transform) {
  const SystemType& t = theory.type(type_name);
  if (transform.effect_matrix.rows() != t.k || transform.prep_matrix.rows() != t.k) {
    throw Error(ErrorKind::SingularTransform, "transform size does not match k of '" + type_name + "'");
  }
  // old = M * new  =>  new = M^{-1} * old
  const FiducialSet& old = theory.fiducials(type_name);
  FiducialElements next = std::visit(
      [&](const auto& f) -> FiducialElements {
        using F = std::decay_t<decltype(f)>;
        return F{recombine(transform.prep_inverse, f.preparations), recombine(transform.effect_inverse, f.effects)};
      },
      old.elements);
  validate_fiducials(theory.backend(), t.backend_dim, next);
  Theory out = theory;
  out.install_type(type_name, t.backend_dim, std::move(next));
  return out;
}

FiducialTransform transform_between(const Theory& theory, const std::string& type_name,
                                    const FiducialElements& target) {
  const SystemType& t = theory.type(type_name);
  validate_fiducials(theory.backend(), t.backend_dim, target);
  const FiducialSet& old = theory.fiducials(type_name);
  auto rows = [](const FiducialElements& e, bool effects) {
    return std::visit([&](const auto& f) { return coordinate_rows(effects ? f.effects : f.preparations); }, e);
  };
  // old_rows = M * new_rows
  const Eigen::MatrixXd e = rows(old.elements, true) * linalg::inverse(rows(target, true));
  const Eigen::MatrixXd p = rows(old.elements, false) * linalg::inverse(rows(target, false));
  return FiducialTransform::make(type_name, e, p);
}

}  // namespace duo
