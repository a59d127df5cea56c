#include "duo/backends.hpp"

#include <sstream>

#include "duo/error.hpp"
#include "duo/linalg.hpp"

namespace duo {

namespace {

long space_dim(const Theory& theory, const std::vector<std::string>& types) {
  return CompositeType::of(types).backend_dim(theory);
}

std::vector<std::string> default_labels(std::string_view prefix, std::size_t n, const std::vector<std::string>& given) {
  if (!given.empty()) {
    if (given.size() != n) throw Error(ErrorKind::ShapeMismatch, "wrong number of port labels");
    return given;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::string(prefix) + std::to_string(i));
  return out;
}

std::vector<IndexMeta> black_indices(const Theory& theory, const std::vector<std::string>& in_types,
                                     const std::vector<std::string>& out_types, const std::vector<std::string>& in_labels,
                                     const std::vector<std::string>& out_labels) {
  std::vector<IndexMeta> idx;
  const auto il = default_labels("in", in_types.size(), in_labels);
  const auto ol = default_labels("out", out_types.size(), out_labels);
  for (std::size_t i = 0; i < in_types.size(); ++i) {
    idx.push_back({il[i], Direction::Input, in_types[i], Color::Black, theory.type(in_types[i]).k});
  }
  for (std::size_t i = 0; i < out_types.size(); ++i) {
    idx.push_back({ol[i], Direction::Output, out_types[i], Color::Black, theory.type(out_types[i]).k});
  }
  return idx;
}

/// Row-major odometer over fiducial choices for a list of types.
std::vector<std::vector<int>> combos(const Theory& theory, const std::vector<std::string>& types) {
  std::vector<std::vector<int>> out{{}};
  for (const auto& t : types) {
    std::vector<std::vector<int>> next;
    const int k = theory.type(t).k;
    for (const auto& c : out) {
      for (int i = 0; i < k; ++i) {
        auto d = c;
        d.push_back(i);
        next.push_back(std::move(d));
      }
    }
    out = std::move(next);
  }
  return out;
}

template <class Elem, class Pick>
std::vector<Elem> gather(const Theory& theory, const std::vector<std::string>& types, const std::vector<int>& choice,
                         Pick pick) {
  std::vector<Elem> f;
  for (std::size_t i = 0; i < types.size(); ++i) f.push_back(pick(theory.fiducials(types[i]))[choice[i]]);
  return f;
}

/// Maps each little-endian basis index of the permuted system back to the
/// original one. New factor q is old factor perm[q].
std::vector<long> subsystem_permutation(const std::vector<long>& dims, const std::vector<std::size_t>& perm) {
  const std::size_t n = dims.size();
  std::vector<long> old_stride(n, 1);
  for (std::size_t i = 1; i < n; ++i) old_stride[i] = old_stride[i - 1] * dims[i - 1];
  long total = 1;
  for (auto d : dims) total *= d;
  std::vector<long> map(static_cast<std::size_t>(total));
  std::vector<long> digit(n, 0);
  for (long idx = 0; idx < total; ++idx) {
    long old = 0;
    for (std::size_t q = 0; q < n; ++q) old += digit[q] * old_stride[perm[q]];
    map[static_cast<std::size_t>(idx)] = old;
    for (std::size_t q = 0; q < n; ++q) {
      if (++digit[q] < dims[perm[q]]) break;
      digit[q] = 0;
    }
  }
  return map;
}

double classical_oracle(const Fragment& c, const Theory& theory) {
  const std::size_t nw = c.wires.size();
  std::vector<long> dims(nw);
  double total = 1.0;
  for (std::size_t w = 0; w < nw; ++w) {
    dims[w] = theory.type(c.port_type({c.wires[w].from.instance, Direction::Output, c.wires[w].from.slot})).backend_dim;
    total *= static_cast<double>(dims[w]);
  }
  if (total > kOracleMaxAssignments) {
    std::ostringstream os;
    os << "classical oracle refuses " << total << " joint assignments";
    throw Error(ErrorKind::OracleTooLarge, os.str());
  }
  struct Factor {
    Eigen::MatrixXd z;
    std::vector<std::size_t> in_wires, out_wires;
    std::vector<long> in_dims, out_dims;
  };
  std::map<Endpoint, std::size_t> wire_at_input, wire_at_output;
  for (std::size_t w = 0; w < nw; ++w) {
    wire_at_output[c.wires[w].from] = w;
    wire_at_input[c.wires[w].to] = w;
  }
  std::vector<Factor> factors;
  for (const auto& [id, spec] : c.instances) {
    const auto op = std::get<ClassicalOperation>(theory.resolve(spec.apparatus_id, spec.outcome_label));
    Factor f{op.z, {}, {}, {}, {}};
    for (int s = 0; s < static_cast<int>(spec.input_types.size()); ++s) {
      const auto w = wire_at_input.at({id, s});
      f.in_wires.push_back(w);
      f.in_dims.push_back(dims[w]);
    }
    for (int s = 0; s < static_cast<int>(spec.output_types.size()); ++s) {
      const auto w = wire_at_output.at({id, s});
      f.out_wires.push_back(w);
      f.out_dims.push_back(dims[w]);
    }
    factors.push_back(std::move(f));
  }
  auto little_endian = [](const std::vector<std::size_t>& wires, const std::vector<long>& d,
                          const std::vector<long>& state) {
    long idx = 0, stride = 1;
    for (std::size_t i = 0; i < wires.size(); ++i) {
      idx += state[wires[i]] * stride;
      stride *= d[i];
    }
    return idx;
  };
  std::vector<long> state(nw, 0);
  double sum = 0.0;
  while (true) {
    double term = 1.0;
    for (const auto& f : factors) {
      term *= f.z(little_endian(f.out_wires, f.out_dims, state), little_endian(f.in_wires, f.in_dims, state));
      if (term == 0.0) break;
    }
    sum += term;
    std::size_t w = 0;
    for (; w < nw; ++w) {
      if (++state[w] < dims[w]) break;
      state[w] = 0;
    }
    if (w == nw) break;
  }
  return sum;
}

double quantum_oracle(const Fragment& c, const Theory& theory) {
  std::map<Endpoint, std::size_t> wire_at_input;
  std::map<Endpoint, std::size_t> wire_at_output;
  for (std::size_t w = 0; w < c.wires.size(); ++w) {
    wire_at_output[c.wires[w].from] = w;
    wire_at_input[c.wires[w].to] = w;
  }
  // Live wires in little-endian factor order, with the joint density matrix.
  std::vector<std::size_t> live;
  std::vector<long> live_dims;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Ones(1, 1);

  for (const auto& id : topological_order(c)) {
    const auto& spec = c.spec(id);
    const auto op = std::get<QuantumOperation>(theory.resolve(spec.apparatus_id, spec.outcome_label));
    std::vector<std::size_t> perm;
    std::vector<bool> consumed(live.size(), false);
    for (int s = 0; s < static_cast<int>(spec.input_types.size()); ++s) {
      const auto w = wire_at_input.at({id, s});
      const auto pos = static_cast<std::size_t>(std::find(live.begin(), live.end(), w) - live.begin());
      perm.push_back(pos);
      consumed[pos] = true;
    }
    long rest_dim = 1;
    std::vector<std::size_t> rest_wires;
    std::vector<long> rest_dims;
    for (std::size_t i = 0; i < live.size(); ++i) {
      if (consumed[i]) continue;
      perm.push_back(i);
      rest_dim *= live_dims[i];
      rest_wires.push_back(live[i]);
      rest_dims.push_back(live_dims[i]);
    }
    const auto map = subsystem_permutation(live_dims, perm);
    Eigen::MatrixXcd permuted(rho.rows(), rho.cols());
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
      for (Eigen::Index j = 0; j < rho.cols(); ++j) permuted(i, j) = rho(map[i], map[j]);
    }
    const long out_dim = space_dim(theory, spec.output_types);
    Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(out_dim * rest_dim, out_dim * rest_dim);
    const Eigen::MatrixXcd id_rest = Eigen::MatrixXcd::Identity(rest_dim, rest_dim);
    for (const auto& k : op.kraus) {
      const Eigen::MatrixXcd full = linalg::kron(id_rest, k);  // op factors fastest
      next += full * permuted * full.adjoint();
    }
    rho = std::move(next);
    live.clear();
    live_dims.clear();
    for (int s = 0; s < static_cast<int>(spec.output_types.size()); ++s) {
      live.push_back(wire_at_output.at({id, s}));
      live_dims.push_back(theory.type(spec.output_types[static_cast<std::size_t>(s)]).backend_dim);
    }
    live.insert(live.end(), rest_wires.begin(), rest_wires.end());
    live_dims.insert(live_dims.end(), rest_dims.begin(), rest_dims.end());
  }
  return rho.trace().real();
}

}  // namespace

void validate_operation(const Theory& theory, const BackendOperation& op) {
  const long n_in = space_dim(theory, input_types(op));
  const long n_out = space_dim(theory, output_types(op));
  if (const auto* c = std::get_if<ClassicalOperation>(&op)) {
    if (theory.backend() != Backend::Classical) throw Error(ErrorKind::ShapeMismatch, "classical matrix in a quantum theory");
    if (c->z.rows() != n_out || c->z.cols() != n_in) {
      std::ostringstream os;
      os << "Z has shape " << c->z.rows() << "x" << c->z.cols() << ", expected " << n_out << "x" << n_in;
      throw Error(ErrorKind::ShapeMismatch, os.str());
    }
    if (c->z.size() > 0 && c->z.minCoeff() < 0.0) throw Error(ErrorKind::UnphysicalZ, "Z has a negative entry");
    if (c->z.size() > 0 && c->z.colwise().sum().maxCoeff() > 1.0 + 1e-10) {
      throw Error(ErrorKind::UnphysicalZ, "a column of Z sums to more than one");
    }
    return;
  }
  const auto& q = std::get<QuantumOperation>(op);
  if (theory.backend() != Backend::Quantum) throw Error(ErrorKind::ShapeMismatch, "Kraus operators in a classical theory");
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(n_in, n_in);
  for (const auto& k : q.kraus) {
    if (k.rows() != n_out || k.cols() != n_in) {
      std::ostringstream os;
      os << "Kraus operator has shape " << k.rows() << "x" << k.cols() << ", expected " << n_out << "x" << n_in;
      throw Error(ErrorKind::ShapeMismatch, os.str());
    }
    s += k.adjoint() * k;
  }
  if (!q.kraus.empty() && linalg::max_eigenvalue(s) > 1.0 + 1e-10) {
    throw Error(ErrorKind::TraceIncreasing, "sum of K^dagger K exceeds the identity");
  }
}

Duotensor classical_all_black(const ClassicalOperation& op, const Theory& theory,
                              const std::vector<std::string>& input_labels,
                              const std::vector<std::string>& output_labels) {
  validate_operation(theory, op);
  auto idx = black_indices(theory, op.input_types, op.output_types, input_labels, output_labels);
  auto pick_p = [](const FiducialSet& f) -> const std::vector<Eigen::VectorXd>& {
    return std::get<ClassicalFiducials>(f.elements).preparations;
  };
  auto pick_r = [](const FiducialSet& f) -> const std::vector<Eigen::VectorXd>& {
    return std::get<ClassicalFiducials>(f.elements).effects;
  };
  const auto out_combos = combos(theory, op.output_types);
  Eigen::MatrixXd effects(static_cast<Eigen::Index>(out_combos.size()), op.z.rows());
  for (std::size_t i = 0; i < out_combos.size(); ++i) {
    const auto r = gather<Eigen::VectorXd>(theory, op.output_types, out_combos[i], pick_r);
    effects.row(static_cast<Eigen::Index>(i)) = linalg::tensor(r).transpose();
  }
  std::vector<double> values;
  for (const auto& jc : combos(theory, op.input_types)) {
    const auto p = gather<Eigen::VectorXd>(theory, op.input_types, jc, pick_p);
    const Eigen::VectorXd probs = effects * (op.z * linalg::tensor(p));
    values.insert(values.end(), probs.data(), probs.data() + probs.size());
  }
  return Duotensor(std::move(idx), std::move(values));
}

Duotensor quantum_all_black(const QuantumOperation& op, const Theory& theory,
                            const std::vector<std::string>& input_labels,
                            const std::vector<std::string>& output_labels) {
  validate_operation(theory, op);
  auto idx = black_indices(theory, op.input_types, op.output_types, input_labels, output_labels);
  auto pick_p = [](const FiducialSet& f) -> const std::vector<Eigen::MatrixXcd>& {
    return std::get<QuantumFiducials>(f.elements).preparations;
  };
  auto pick_e = [](const FiducialSet& f) -> const std::vector<Eigen::MatrixXcd>& {
    return std::get<QuantumFiducials>(f.elements).effects;
  };
  const long d_out = space_dim(theory, op.output_types);
  const auto out_combos = combos(theory, op.output_types);
  // Tr(E sigma) = sum_ab E(a, b) sigma(b, a): rows hold E transposed, flattened.
  Eigen::MatrixXcd effects(static_cast<Eigen::Index>(out_combos.size()), d_out * d_out);
  for (std::size_t i = 0; i < out_combos.size(); ++i) {
    const auto e = gather<Eigen::MatrixXcd>(theory, op.output_types, out_combos[i], pick_e);
    const Eigen::MatrixXcd et = linalg::tensor(e).transpose();
    effects.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXcd>(et.data(), et.size());
  }
  std::vector<double> values;
  for (const auto& jc : combos(theory, op.input_types)) {
    const auto p = gather<Eigen::MatrixXcd>(theory, op.input_types, jc, pick_p);
    const Eigen::MatrixXcd rho = linalg::tensor(p);
    Eigen::MatrixXcd sigma = Eigen::MatrixXcd::Zero(d_out, d_out);
    for (const auto& k : op.kraus) sigma += k * rho * k.adjoint();
    const Eigen::VectorXcd probs = effects * Eigen::Map<const Eigen::VectorXcd>(sigma.data(), sigma.size());
    for (Eigen::Index i = 0; i < probs.size(); ++i) values.push_back(probs(i).real());
  }
  return Duotensor(std::move(idx), std::move(values));
}

Duotensor all_black(const BackendOperation& op, const Theory& theory, const std::vector<std::string>& input_labels,
                    const std::vector<std::string>& output_labels) {
  if (const auto* c = std::get_if<ClassicalOperation>(&op)) {
    return classical_all_black(*c, theory, input_labels, output_labels);
  }
  return quantum_all_black(std::get<QuantumOperation>(op), theory, input_labels, output_labels);
}

double oracle_probability(const Fragment& circuit, const Theory& theory) {
  require_valid(circuit, ErrorKind::InvalidCircuit);
  if (!circuit.is_circuit()) throw Error(ErrorKind::InvalidCircuit, "oracle needs a circuit without open ports");
  for (const auto& [id, spec] : circuit.instances) {
    const auto op = theory.resolve(spec.apparatus_id, spec.outcome_label);
    if (input_types(op) != spec.input_types || output_types(op) != spec.output_types) {
      throw Error(ErrorKind::TypeMismatch, "instance '" + id + "' port types differ from apparatus '" +
                                               spec.apparatus_id + "'");
    }
  }
  return theory.backend() == Backend::Classical ? classical_oracle(circuit, theory) : quantum_oracle(circuit, theory);
}

}  // namespace duo
