#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

namespace duo::testing {

namespace {

// Depth-first topological order, written independently of the library.
std::vector<std::string> dfs_order(const Fragment& f) {
  std::map<std::string, std::vector<std::string>> next;
  for (const auto& w : f.wires) next[w.from.instance].push_back(w.to.instance);
  std::map<std::string, int> state;
  std::vector<std::string> post;
  std::function<void(const std::string&)> visit = [&](const std::string& v) {
    if (state[v] == 2) return;
    if (state[v] == 1) throw std::logic_error("cycle in oracle input");
    state[v] = 1;
    for (const auto& u : next[v]) visit(u);
    state[v] = 2;
    post.push_back(v);
  };
  for (const auto& [id, _] : f.instances) visit(id);
  std::reverse(post.begin(), post.end());
  return post;
}

struct WireIndex {
  std::map<Endpoint, std::size_t> into, outof;
  std::vector<int> dims;
};

WireIndex index_wires(const Fragment& f, const Theory& theory) {
  WireIndex wi;
  for (std::size_t w = 0; w < f.wires.size(); ++w) {
    wi.outof[f.wires[w].from] = w;
    wi.into[f.wires[w].to] = w;
    const auto& spec = f.instances.at(f.wires[w].from.instance);
    wi.dims.push_back(theory.type(spec.output_types[static_cast<std::size_t>(f.wires[w].from.slot)]).backend_dim);
  }
  return wi;
}

/// Little-endian tensor product of vectors (first factor fastest).
Eigen::VectorXcd kron_le(const std::vector<Eigen::VectorXcd>& v) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Ones(1);
  for (const auto& f : v) {
    Eigen::VectorXcd next(out.size() * f.size());
    for (Eigen::Index j = 0; j < f.size(); ++j) {
      for (Eigen::Index i = 0; i < out.size(); ++i) next(i + out.size() * j) = out(i) * f(j);
    }
    out = next;
  }
  return out;
}

Eigen::MatrixXcd kron_le(const std::vector<Eigen::MatrixXcd>& m) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Ones(1, 1);
  for (const auto& f : m) {
    Eigen::MatrixXcd next(out.rows() * f.rows(), out.cols() * f.cols());
    for (Eigen::Index a = 0; a < f.rows(); ++a) {
      for (Eigen::Index b = 0; b < f.cols(); ++b) {
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
          for (Eigen::Index j = 0; j < out.cols(); ++j) {
            next(i + out.rows() * a, j + out.cols() * b) = out(i, j) * f(a, b);
          }
        }
      }
    }
    out = next;
  }
  return out;
}

}  // namespace

Eigen::MatrixXd gauss_jordan_inverse(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd a = m;
  Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    }
    if (std::abs(a(piv, c)) < 1e-300) throw std::runtime_error("singular");
    a.row(c).swap(a.row(piv));
    inv.row(c).swap(inv.row(piv));
    const double d = a(c, c);
    a.row(c) /= d;
    inv.row(c) /= d;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      a.row(r) -= f * a.row(c);
      inv.row(r) -= f * inv.row(c);
    }
  }
  return inv;
}

double trace_product(const Eigen::MatrixXcd& p, const Eigen::MatrixXcd& q) {
  std::complex<double> t = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) t += p(i, j) * q(j, i);
  }
  return t.real();
}

double enumerate_classical(const Fragment& circuit, const Theory& theory) {
  const auto order = dfs_order(circuit);
  const auto wi = index_wires(circuit, theory);
  std::vector<int> value(circuit.wires.size(), 0);
  std::vector<Eigen::MatrixXd> zs;
  for (const auto& id : order) {
    const auto& s = circuit.instances.at(id);
    zs.push_back(std::get<ClassicalOperation>(theory.resolve(s.apparatus_id, s.outcome_label)).z);
  }
  std::function<double(std::size_t)> rec = [&](std::size_t pos) -> double {
    if (pos == order.size()) return 1.0;
    const auto& id = order[pos];
    const auto& s = circuit.instances.at(id);
    long in = 0, stride = 1;
    for (int k = 0; k < static_cast<int>(s.input_types.size()); ++k) {
      const auto w = wi.into.at({id, k});
      in += value[w] * stride;
      stride *= wi.dims[w];
    }
    const Eigen::MatrixXd& z = zs[pos];
    double sum = 0;
    for (Eigen::Index o = 0; o < z.rows(); ++o) {
      const double p = z(o, in);
      if (p == 0.0) continue;
      long rest = o;
      for (int k = 0; k < static_cast<int>(s.output_types.size()); ++k) {
        const auto w = wi.outof.at({id, k});
        value[w] = static_cast<int>(rest % wi.dims[w]);
        rest /= wi.dims[w];
      }
      sum += p * rec(pos + 1);
    }
    return sum;
  };
  return rec(0);
}

double kraus_branches(const Fragment& circuit, const Theory& theory) {
  const auto order = dfs_order(circuit);
  const auto wi = index_wires(circuit, theory);
  std::vector<std::vector<Eigen::MatrixXcd>> kraus;
  for (const auto& id : order) {
    const auto& s = circuit.instances.at(id);
    kraus.push_back(std::get<QuantumOperation>(theory.resolve(s.apparatus_id, s.outcome_label)).kraus);
  }
  std::function<double(std::size_t, const std::vector<std::size_t>&, const Eigen::VectorXcd&)> rec =
      [&](std::size_t pos, const std::vector<std::size_t>& live, const Eigen::VectorXcd& psi) -> double {
    if (pos == order.size()) return psi.squaredNorm();
    const auto& id = order[pos];
    const auto& s = circuit.instances.at(id);
    std::vector<std::size_t> in_pos;
    for (int k = 0; k < static_cast<int>(s.input_types.size()); ++k) {
      const auto w = wi.into.at({id, k});
      in_pos.push_back(static_cast<std::size_t>(std::find(live.begin(), live.end(), w) - live.begin()));
    }
    std::vector<std::size_t> rest_pos;
    for (std::size_t p = 0; p < live.size(); ++p) {
      if (std::find(in_pos.begin(), in_pos.end(), p) == in_pos.end()) rest_pos.push_back(p);
    }
    std::vector<std::size_t> next_live;
    long d_out = 1;
    for (int k = 0; k < static_cast<int>(s.output_types.size()); ++k) {
      const auto w = wi.outof.at({id, k});
      next_live.push_back(w);
      d_out *= wi.dims[w];
    }
    long d_rest = 1;
    for (auto p : rest_pos) {
      next_live.push_back(live[p]);
      d_rest *= wi.dims[live[p]];
    }
    double total = 0;
    for (const auto& k : kraus[pos]) {
      Eigen::VectorXcd out = Eigen::VectorXcd::Zero(d_out * d_rest);
      std::vector<int> dig(live.size(), 0);
      for (Eigen::Index idx = 0; idx < psi.size(); ++idx) {
        long i = 0, si = 1;
        for (auto p : in_pos) {
          i += dig[p] * si;
          si *= wi.dims[live[p]];
        }
        long r = 0, sr = 1;
        for (auto p : rest_pos) {
          r += dig[p] * sr;
          sr *= wi.dims[live[p]];
        }
        if (psi(idx) != std::complex<double>(0)) {
          for (long o = 0; o < d_out; ++o) out(o + d_out * r) += k(o, i) * psi(idx);
        }
        for (std::size_t q = 0; q < live.size(); ++q) {
          if (++dig[q] < wi.dims[live[q]]) break;
          dig[q] = 0;
        }
      }
      total += rec(pos + 1, next_live, out);
    }
    return total;
  };
  return rec(0, {}, Eigen::VectorXcd::Ones(1));
}

double reference_probability(const Fragment& circuit, const Theory& theory) {
  return theory.backend() == Backend::Classical ? enumerate_classical(circuit, theory)
                                                : kraus_branches(circuit, theory);
}

Duotensor loop_contract(const Duotensor& a, const Duotensor& b,
                        const std::vector<std::pair<std::string, std::string>>& links) {
  std::vector<std::size_t> la, lb, fa, fb;
  for (const auto& [x, y] : links) {
    la.push_back(*a.position(x));
    lb.push_back(*b.position(y));
  }
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (std::find(la.begin(), la.end(), i) == la.end()) fa.push_back(i);
  }
  for (std::size_t i = 0; i < b.rank(); ++i) {
    if (std::find(lb.begin(), lb.end(), i) == lb.end()) fb.push_back(i);
  }
  std::vector<IndexMeta> idx;
  std::vector<int> rdims, ldims;
  for (auto i : fa) idx.push_back(a.indices()[i]);
  for (auto i : fb) idx.push_back(b.indices()[i]);
  for (const auto& m : idx) rdims.push_back(m.dim);
  for (auto i : la) ldims.push_back(a.indices()[i].dim);

  auto odometer = [](std::vector<int>& d, const std::vector<int>& dims) {
    for (std::size_t q = dims.size(); q-- > 0;) {
      if (++d[q] < dims[q]) return true;
      d[q] = 0;
    }
    return false;
  };
  std::vector<double> values;
  std::vector<int> r(rdims.size(), 0);
  do {
    double sum = 0;
    std::vector<int> l(ldims.size(), 0);
    do {
      std::vector<int> ia(a.rank()), ib(b.rank());
      for (std::size_t q = 0; q < fa.size(); ++q) ia[fa[q]] = r[q];
      for (std::size_t q = 0; q < fb.size(); ++q) ib[fb[q]] = r[fa.size() + q];
      for (std::size_t q = 0; q < la.size(); ++q) {
        ia[la[q]] = l[q];
        ib[lb[q]] = l[q];
      }
      sum += a.at(ia) * b.at(ib);
    } while (odometer(l, ldims));
    values.push_back(sum);
  } while (odometer(r, rdims));
  return Duotensor(idx, values);
}

bool wire_reaches(const Fragment& f, std::size_t a, std::size_t b) {
  const auto& head = f.wires[a].to.instance;
  const auto& tail = f.wires[b].from.instance;
  std::set<std::string> seen{head};
  std::vector<std::string> stack{head};
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (v == tail) return true;
    for (const auto& w : f.wires) {
      if (w.from.instance == v && seen.insert(w.to.instance).second) stack.push_back(w.to.instance);
    }
  }
  return false;
}

namespace {

struct Completion {
  std::string prep, effect;  // apparatus ids, empty when absent
  bool ancilla = false;
};

Completion declare_completion(Rng& rng, Theory& t, int sample, const std::vector<std::string>& in_types,
                              const std::vector<std::string>& out_types) {
  const int mode = sample % 3;
  Completion c;
  c.ancilla = mode == 2;
  auto prep_types = in_types;
  auto eff_types = out_types;
  if (c.ancilla) {
    prep_types.push_back(t.types().begin()->first);
    eff_types.push_back(t.types().begin()->first);
  }
  auto dims = [&](const std::vector<std::string>& ts) {
    std::vector<int> d;
    for (const auto& x : ts) d.push_back(t.type(x).backend_dim);
    return d;
  };
  auto total = [](const std::vector<int>& d) {
    int n = 1;
    for (int x : d) n *= x;
    return n;
  };
  const auto pd = dims(prep_types);
  const auto ed = dims(eff_types);
  const bool product = mode == 0;
  if (!prep_types.empty()) {
    c.prep = "~zp" + std::to_string(sample);
    OperationDecl d{c.prep, "", {}, prep_types, {}};
    if (t.backend() == Backend::Classical) {
      Eigen::MatrixXd z;
      if (product) {
        std::vector<Eigen::VectorXcd> parts;
        for (int x : pd) parts.push_back(random_stochastic(rng, x, 1).col(0).cast<std::complex<double>>());
        z = kron_le(parts).real();
      } else {
        z = random_stochastic(rng, total(pd), 1);
      }
      d.outcomes["I"] = ClassicalOperation{{}, prep_types, z};
    } else {
      std::vector<Eigen::MatrixXcd> ks;
      if (product) {
        std::vector<Eigen::VectorXcd> parts;
        for (int x : pd) parts.push_back(random_isometry(rng, x, 1).col(0));
        ks.push_back(kron_le(parts));
      } else {
        const Eigen::MatrixXcd v = random_isometry(rng, 2 * total(pd), 1);
        ks.push_back(v.topRows(total(pd)));
        ks.push_back(v.bottomRows(total(pd)));
      }
      d.outcomes["I"] = QuantumOperation{{}, prep_types, ks};
    }
    t.declare_operation(d);
  }
  if (!eff_types.empty()) {
    c.effect = "~ze" + std::to_string(sample);
    OperationDecl d{c.effect, "", eff_types, {}, {}};
    if (t.backend() == Backend::Classical) {
      const int n = total(ed);
      Eigen::MatrixXd z(1, n);
      if (product) {
        std::vector<Eigen::VectorXcd> parts;
        for (int x : ed) {
          Eigen::VectorXcd r(x);
          for (int i = 0; i < x; ++i) r(i) = uniform(rng, 0.05, 1.0);
          parts.push_back(r);
        }
        z = kron_le(parts).real().transpose();
      } else {
        for (int i = 0; i < n; ++i) z(0, i) = uniform(rng, 0.05, 1.0);
      }
      d.outcomes["I"] = ClassicalOperation{eff_types, {}, z};
    } else {
      Eigen::MatrixXcd e;
      if (product) {
        std::vector<Eigen::MatrixXcd> parts;
        for (int x : ed) parts.push_back(random_effect(rng, x));
        e = kron_le(parts);
      } else {
        e = random_effect(rng, total(ed));
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(e);
      std::vector<Eigen::MatrixXcd> ks;
      for (Eigen::Index i = 0; i < e.rows(); ++i) {
        const double lam = std::max(0.0, es.eigenvalues()(i));
        ks.push_back(std::sqrt(lam) * es.eigenvectors().col(i).adjoint());
      }
      d.outcomes["I"] = QuantumOperation{eff_types, {}, ks};
    }
    t.declare_operation(d);
  }
  return c;
}

Fragment complete(const Fragment& e, const Completion& c, const std::vector<PortRef>& ins,
                  const std::vector<PortRef>& outs, const Theory& t) {
  Fragment g = e;
  if (!c.prep.empty()) {
    const auto* d = t.find_operation(c.prep);
    g.add("~prep", {c.prep, "", "I", {}, d->output_types});
    for (int k = 0; k < static_cast<int>(ins.size()); ++k) g.connect({"~prep", k}, {ins[static_cast<std::size_t>(k)].instance, ins[static_cast<std::size_t>(k)].slot});
  }
  if (!c.effect.empty()) {
    const auto* d = t.find_operation(c.effect);
    g.add("~effect", {c.effect, "", "I", d->input_types, {}});
    for (int k = 0; k < static_cast<int>(outs.size()); ++k) g.connect({outs[static_cast<std::size_t>(k)].instance, outs[static_cast<std::size_t>(k)].slot}, {"~effect", k});
  }
  if (c.ancilla) g.connect({"~prep", static_cast<int>(ins.size())}, {"~effect", static_cast<int>(outs.size())});
  return g;
}

}  // namespace

CompletionResult completion_oracle(Rng& rng, const Fragment& e_i, const Fragment& e_j, const Theory& theory, int n) {
  Theory t = theory;
  const auto ins = e_i.open_inputs();
  const auto outs = e_i.open_outputs();
  std::vector<std::string> in_types, out_types;
  for (const auto& p : ins) in_types.push_back(e_i.port_type(p));
  for (const auto& p : outs) out_types.push_back(e_i.port_type(p));

  CompletionResult r;
  double lo = 0, hi = 0;
  for (int s = 0; s < n; ++s) {
    const auto c = declare_completion(rng, t, s, in_types, out_types);
    const double pi = reference_probability(complete(e_i, c, ins, outs, t), t);
    const double pj = reference_probability(complete(e_j, c, ins, outs, t), t);
    if (pj < 1e-12) continue;
    const double q = pi / pj;
    if (r.samples == 0) {
      lo = hi = q;
    } else {
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    ++r.samples;
  }
  if (r.samples == 0) return r;
  r.ratio = 0.5 * (lo + hi);
  r.spread = (hi - lo) / std::max(std::abs(hi), 1e-300);
  r.well_conditioned = r.spread < 1e-6;
  return r;
}

}  // namespace duo::testing
