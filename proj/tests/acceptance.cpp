// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Reference values come from the brute-force oracles in support/.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "duo/backends.hpp"
#include "duo/dsl.hpp"
#include "duo/engine.hpp"
#include "support/models.hpp"
#include "support/oracles.hpp"

using namespace duo;
using namespace duo::testing;

namespace {

// Collects the first few failure details of a criterion.
struct Log {
  int failures = 0;
  std::ostringstream detail;

  void fail(const std::string& what) {
    if (failures++ < 3) detail << "\n    " << what;
  }
  void expect(bool ok, const std::string& what) {
    if (!ok) fail(what);
  }
};

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

Fragment disjoint_union(const Fragment& a, const Fragment& b) {
  Fragment u = a;
  for (const auto& [id, s] : b.instances) u.add(id, s);
  u.wires.insert(u.wires.end(), b.wires.begin(), b.wires.end());
  return u;
}

bool in_unit_range(const Duotensor& t, const Theory& theory) {
  const auto black = to_all_black(t, theory.metrics());
  for (const double v : black.values()) {
    if (v < -1e-9 || v > 1 + 1e-9) return false;
  }
  return true;
}

void metrics(Log& log) {
  for (const int n : {2, 3, 4, 6}) {
    Theory t(Backend::Classical);
    t.register_type("a", n);
    const auto& g = t.metric("a");
    log.expect(g.g_bb == Eigen::MatrixXd::Identity(n, n), "classical g_bb is not exactly I for N=" + std::to_string(n));
    log.expect((g.g_bb * g.g_ww - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10,
               "classical g_bb g_ww != I for N=" + std::to_string(n));
  }
  for (const int n : {2, 3}) {
    Theory t(Backend::Quantum);
    t.register_type("q", n);
    const auto& g = t.metric("q");
    const auto& fid = std::get<QuantumFiducials>(t.fiducials("q").elements);
    const int k = n * n;
    // Metric entries against explicit traces, inverse against Gauss-Jordan.
    double worst = 0;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) worst = std::max(worst, std::abs(g.g_bb(i, j) - trace_product(fid.effects[i], fid.preparations[j])));
    }
    log.expect(worst < 1e-12, "quantum g_bb differs from Tr(e_i p_j) for N=" + std::to_string(n));
    log.expect((g.g_bb * g.g_ww - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-10,
               "quantum g_bb g_ww != I for N=" + std::to_string(n));
    log.expect((g.g_ww - gauss_jordan_inverse(g.g_bb)).cwiseAbs().maxCoeff() < 1e-10,
               "g_ww differs from the Gauss-Jordan inverse for N=" + std::to_string(n));
    if (n == 2) log.expect(g.g_ww.minCoeff() < 0, "qubit g_ww has no negative entry");
  }
}

void random_classical(Log& log) {
  Rng rng(1001);
  for (int trial = 0; trial < 200; ++trial) {
    Theory t = random_theory(rng, Backend::Classical, uniform_int(rng, 1, 3), 2, 3, trial % 2 == 1);
    CircuitOptions opts;
    opts.max_ops = 6;
    const Fragment f = random_circuit(rng, t, opts);
    const double p = circuit_probability(f, t);
    const double r = enumerate_classical(f, t);
    log.expect(std::abs(p - r) <= 1e-9, "classical trial " + std::to_string(trial) + ": " + num(p) + " vs " + num(r));
  }
}

void random_quantum(Log& log) {
  Rng rng(1002);
  for (int trial = 0; trial < 100; ++trial) {
    Theory t = random_theory(rng, Backend::Quantum, uniform_int(rng, 1, 2), 2, 3, trial % 2 == 1);
    CircuitOptions opts;
    opts.max_ops = 5;
    opts.max_live = 2;
    const Fragment f = random_circuit(rng, t, opts);
    const double p = circuit_probability(f, t);
    const double r = kraus_branches(f, t);
    log.expect(std::abs(p - r) <= 1e-8, "quantum trial " + std::to_string(trial) + ": " + num(p) + " vs " + num(r));
  }
}

void product_rule(Log& log) {
  Rng rng(1003);
  for (int trial = 0; trial < 50; ++trial) {
    Theory t = random_theory(rng, trial % 2 ? Backend::Quantum : Backend::Classical, 2, 2, 2, true);
    const Fragment a = random_circuit(rng, t, {}, "A");
    const Fragment b = random_circuit(rng, t, {}, "B");
    const double pab = circuit_probability(disjoint_union(a, b), t);
    const double pa = circuit_probability(a, t), pb = circuit_probability(b, t);
    log.expect(std::abs(pab - pa * pb) <= 1e-10, "pair " + std::to_string(trial) + ": " + num(pab) + " vs " + num(pa * pb));
    log.expect(std::abs(pab - reference_probability(disjoint_union(a, b), t)) <= 1e-9, "pair disagrees with oracle");
  }
}

// Shared by criteria 5 and 6: every compiled fragment of the decompositions.
void decompositions(Log& log, const std::function<void(const CompiledFragment&, const Theory&)>& visit) {
  Rng rng(1005);
  for (const auto backend : {Backend::Classical, Backend::Quantum}) {
    Theory t(backend);
    const Fragment f = dsl::parse(kBigCircuit);
    declare_for(rng, t, f, 2);
    const std::set<std::string> s1{"A#1", "D#1", "F#1"}, s2{"C#1", "E#1"}, s3{"B#1", "G#1"};
    std::set<std::string> s12 = s1;
    s12.insert(s2.begin(), s2.end());
    const auto c1 = compile_fragment(restrict(f, s1), t);
    const auto c2 = compile_fragment(restrict(f, s2), t);
    const auto c3 = compile_fragment(restrict(f, s3), t);
    const auto c12 = join(c1, c2, crossing_wires(f, s1, s2));
    const auto whole = join(c12, c3, crossing_wires(f, s12, s3));
    for (const auto* c : {&c1, &c2, &c3, &c12, &whole}) visit(*c, t);
    const double p = circuit_probability(f, t);
    log.expect(std::abs(whole.duotensor.scalar_value() - p) <= 1e-9, "big circuit split: " + num(whole.duotensor.scalar_value()) + " vs " + num(p));
    log.expect(max_abs_difference(c12.duotensor, compile_fragment(restrict(f, s12), t).duotensor) <= 1e-9,
               "big circuit partial join differs");
  }
  for (int trial = 0; trial < 50; ++trial) {
    Theory t = random_theory(rng, trial % 2 ? Backend::Quantum : Backend::Classical, 2, 2, 2, true);
    CircuitOptions opts;
    opts.min_ops = 3;
    opts.max_ops = 7;
    const Fragment f = trial % 3 == 0 ? random_circuit(rng, t, opts) : random_open_fragment(rng, t, opts);
    if (f.instances.size() < 2) continue;
    const auto parts = random_partition(rng, f, 2);
    const auto a = compile_fragment(restrict(f, parts[0]), t);
    const auto b = compile_fragment(restrict(f, parts[1]), t);
    const auto joined = join(a, b, crossing_wires(f, parts[0], parts[1]));
    const auto whole = compile_fragment(f, t);
    visit(a, t);
    visit(b, t);
    visit(whole, t);
    const bool same_shape = joined.duotensor.indices() == whole.duotensor.indices();
    log.expect(same_shape && max_abs_difference(joined.duotensor, whole.duotensor) <= 1e-9,
               "2-cut decomposition " + std::to_string(trial) + " differs");
  }
}

void compositionality(Log& log) {
  decompositions(log, [](const CompiledFragment&, const Theory&) {});
}

void positivity(Log& log) {
  Log ignored;
  int seen = 0;
  decompositions(ignored, [&](const CompiledFragment& c, const Theory& t) {
    ++seen;
    log.expect(in_unit_range(c.duotensor, t), "all-black entry out of [0, 1]");
  });
  Rng rng(1006);
  for (int trial = 0; trial < 100; ++trial) {
    const bool quantum = trial % 2 == 1;
    Theory t = random_theory(rng, quantum ? Backend::Quantum : Backend::Classical, 2, 2, quantum ? 2 : 3, true);
    const Fragment f = random_open_fragment(rng, t, {});
    log.expect(in_unit_range(compile_fragment(f, t).duotensor, t), "all-black entry out of [0, 1]");
    ++seen;
  }
  log.expect(seen >= 200, "too few fragments checked: " + std::to_string(seen));
}

bool foliation_oracles(const Fragment& f, const Foliation& fol) {
  std::set<std::size_t> seen;
  for (const auto& h : fol.hypersurfaces) {
    seen.insert(h.begin(), h.end());
    for (const auto a : h) {
      for (const auto b : h) {
        if (a != b && wire_reaches(f, a, b)) return false;
      }
    }
  }
  return seen.size() == f.wires.size();
}

void foliations(Log& log) {
  Rng rng(1007);
  {
    Theory t(Backend::Quantum);
    const Fragment f = dsl::parse(kMediumCircuit);
    declare_for(rng, t, f, 2);
    const Foliation fol = foliate(f);
    const auto r = evolve_foliation(f, fol, t);
    log.expect(r.padding_count == 2, "medium circuit padding " + std::to_string(r.padding_count));
    log.expect(std::abs(r.probability - circuit_probability(f, t)) <= 1e-9, "medium circuit evolution differs");
    log.expect(foliation_oracles(f, fol), "medium circuit foliation fails the oracles");
  }
  for (int trial = 0; trial < 50; ++trial) {
    Theory t = random_theory(rng, trial % 2 ? Backend::Quantum : Backend::Classical, 2, 2, 2, true);
    CircuitOptions opts;
    opts.max_ops = 10;
    const Fragment f = random_circuit(rng, t, opts);
    const Foliation fol = foliate(f);
    log.expect(foliation_oracles(f, fol), "foliation " + std::to_string(trial) + " fails the oracles");
    const double e = evolve_foliation(f, fol, t).probability;
    const double p = circuit_probability(f, t);
    log.expect(std::abs(e - p) <= 1e-9, "foliation " + std::to_string(trial) + ": " + num(e) + " vs " + num(p));
  }
}

void triptych(Log& log) {
  Rng rng(1008);
  const Theory t = spin_theory(std::numbers::pi / 3);
  struct Case {
    const char* ei;
    const char* ej;
    RatioVerdict::Kind expected;
  };
  const Case cases[3] = {
      {"A^{q1} B[+]_{q1}^{q2} C[+]_{q2}^{q3}", "A^{q1} B[+]_{q1}^{q2} C[I]_{q2}^{q3}",
       RatioVerdict::Kind::NotWellConditioned},
      {"A^{q1} B[+]_{q1}^{!q2}", "A^{q1} B[I]_{q1}^{!q2}", RatioVerdict::Kind::WellConditioned},
      {"A^{q1} B[+]_{q1}^{q2} C[+]_{q2}^{!q3}", "A^{q1} B[I]_{q1}^{q2} C[+]_{q2}^{!q3}",
       RatioVerdict::Kind::WellConditioned},
  };
  for (int i = 0; i < 3; ++i) {
    const Fragment ei = dsl::parse(cases[i].ei), ej = dsl::parse(cases[i].ej);
    const auto v = ratio_check(ei, ej, t);
    const auto o = completion_oracle(rng, ei, ej, t, 25);
    const std::string which = "example " + std::to_string(i + 1);
    log.expect(v.kind == cases[i].expected, which + " verdict " + std::string(to_string(v.kind)));
    log.expect(o.samples == 25, which + " oracle used " + std::to_string(o.samples) + " completions");
    log.expect(o.well_conditioned == (v.kind == RatioVerdict::Kind::WellConditioned), which + " disagrees with oracle");
    if (v.kind == RatioVerdict::Kind::WellConditioned) {
      log.expect(std::abs(v.k - o.ratio) <= 1e-9 * std::max(1.0, o.ratio), which + " k " + num(v.k) + " vs " + num(o.ratio));
    }
  }
}

void covariance(Log& log) {
  Rng rng(1009);
  for (const auto backend : {Backend::Classical, Backend::Quantum}) {
    Theory t(backend);
    t.register_type("a", 2);
    for (int trial = 0; trial < 20; ++trial) {
      Theory base = t;
      const Fragment c = random_circuit(rng, base, {}, "C" + std::to_string(trial));
      const Fragment f = random_open_fragment(rng, base, {}, "F" + std::to_string(trial));
      const FiducialElements target = backend == Backend::Classical
                                          ? FiducialElements{random_classical_fiducials(rng, 2)}
                                          : FiducialElements{random_quantum_fiducials(rng, 2)};
      const auto tr = transform_between(base, "a", target);
      const Theory moved = change_fiducials(base, "a", tr);
      const double p0 = circuit_probability(c, base), p1 = circuit_probability(c, moved);
      log.expect(std::abs(p0 - p1) <= 1e-9, "probability moved: " + num(p0) + " vs " + num(p1));
      const auto before = compile_fragment(f, base).duotensor;
      const auto after = compile_fragment(f, moved).duotensor;
      log.expect(max_abs_difference(transform_duotensor(before, {{"a", tr}}), after) <= 1e-9,
                 "duotensor does not follow the transformation law");
    }
  }
}

void coarse_graining(Log& log) {
  Rng rng(1010);
  for (int trial = 0; trial < 40; ++trial) {
    const auto backend = trial % 2 ? Backend::Quantum : Backend::Classical;
    Theory t = random_theory(rng, backend, 2, 2, 3, true);
    std::vector<std::string> ins, outs;
    for (int i = uniform_int(rng, 0, 2); i > 0; --i) ins.push_back(uniform(rng) < 0.5 ? "a" : "b");
    for (int i = uniform_int(rng, 0, 2); i > 0; --i) outs.push_back(uniform(rng) < 0.5 ? "a" : "b");
    const int n = uniform_int(rng, 2, 4);
    declare_random_apparatus(rng, t, "X", ins, outs, n);
    std::vector<std::pair<double, Duotensor>> terms;
    for (int i = 0; i < n; ++i) terms.push_back({1.0, to_standard_form(all_black(t.resolve("X", std::to_string(i)), t), t.metrics())});
    const auto total = to_standard_form(all_black(t.resolve("X", "I"), t), t.metrics());
    log.expect(max_abs_difference(linear_combine(terms), total) <= 1e-10, "outcome sum differs from the total");
    if (backend == Backend::Classical) {
      const Eigen::MatrixXd z = std::get<ClassicalOperation>(t.total_outcome("X")).z;
      const Eigen::RowVectorXd sums = z.colwise().sum();
      log.expect(z.minCoeff() >= 0 && (sums.array() - 1.0).abs().maxCoeff() <= 1e-12, "classical total Z is not stochastic");
      log.expect(t.is_complete_family("X"), "family not reported complete");
    }
  }
}

void dsl_round_trip(Log& log) {
  Rng rng(1011);
  for (int trial = 0; trial < 100; ++trial) {
    Theory t = random_theory(rng, Backend::Classical, 3, 2, 2, false);
    CircuitOptions opts;
    opts.max_ops = 8;
    Fragment f = random_open_fragment(rng, t, opts);
    std::vector<Closure> closures;
    for (const auto& p : f.open_ports()) {
      if (uniform(rng) < 0.3) closures.push_back({p, "", ""});
    }
    f = close_ports(f, closures);
    const std::string text = dsl::format(f);
    const Fragment g = dsl::parse(text);
    log.expect(equivalent(f, g) && dsl::format(g) == text, "round trip changed: " + text);
  }
  for (const auto* src : {kFourOpCircuit, kSimpleCircuit}) {
    for (const auto backend : {Backend::Classical, Backend::Quantum}) {
      Theory t(backend);
      const Fragment f = dsl::parse(src);
      declare_for(rng, t, f, 2);
      const Fragment checked = dsl::parse(src, &t);
      const double p = circuit_probability(checked, t);
      log.expect(std::abs(p - reference_probability(f, t)) <= 1e-10, std::string("evaluation of ") + src);
    }
  }
  try {
    dsl::parse("X_{a2}^{a1} Y_{a1}^{a2}");
    log.fail("2-cycle accepted");
  } catch (const Error& e) {
    log.expect(e.kind() == ErrorKind::CycleError, "2-cycle gave " + std::string(to_string(e.kind())));
  }
  const std::string alphabet = "ABab01_^{}[]!# \n+$";
  int survived = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::string src;
    for (int i = uniform_int(rng, 0, 40); i > 0; --i) {
      src += alphabet[static_cast<std::size_t>(uniform_int(rng, 0, int(alphabet.size()) - 1))];
    }
    try {
      dsl::parse(src);
    } catch (const Error&) {
    } catch (const std::exception& e) {
      log.fail("fuzz input escaped with " + std::string(e.what()));
      continue;
    }
    ++survived;
  }
  log.expect(survived == 10000, "fuzz inputs failed");
}

struct Criterion {
  int id;
  const char* description;
  double limit_seconds;
  void (*run)(Log&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "hopping metric inverse pairs", 1.0, metrics},
      {2, "200 random classical circuits match enumeration", 30.0, random_classical},
      {3, "100 random quantum circuits match Kraus branches", 60.0, random_quantum},
      {4, "disjoint circuit probabilities factorise", 0.0, product_rule},
      {5, "fragment compilation composes", 0.0, compositionality},
      {6, "all-black entries lie in [0, 1]", 0.0, positivity},
      {7, "foliated evolution equals contraction", 0.0, foliations},
      {8, "spin triptych verdicts", 0.0, triptych},
      {9, "fiducial covariance", 0.0, covariance},
      {10, "coarse graining sums outcomes", 0.0, coarse_graining},
      {11, "DSL round trip and error catalog", 0.0, dsl_round_trip},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Log log;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(log);
    } catch (const std::exception& e) {
      log.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs > c.limit_seconds) log.fail("took " + num(secs) + " s");
    const bool ok = log.failures == 0;
    failed += ok ? 0 : 1;
    std::printf("criterion %d: %s %s (%.3f s)%s\n", c.id, ok ? "PASS" : "FAIL", c.description, secs,
                log.detail.str().c_str());
  }
  std::printf("%d of 11 criteria passed\n", 11 - failed);
  return failed == 0 ? 0 : 1;
}
