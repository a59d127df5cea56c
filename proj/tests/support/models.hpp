#pragma once

// Random theories, operations and circuits for property tests, plus a few
// fixed models (classical bits, the spin triptych, the textbook circuits).

#include <random>
#include <string>
#include <vector>

#include "duo/circuit.hpp"
#include "duo/theory.hpp"

namespace duo::testing {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo = 0.0, double hi = 1.0);
int uniform_int(Rng& rng, int lo, int hi);  // inclusive

Eigen::MatrixXd random_stochastic(Rng& rng, int rows, int cols);
/// Splits Z entrywise into `n` nonnegative parts summing to Z.
std::vector<Eigen::MatrixXd> split_entrywise(Rng& rng, const Eigen::MatrixXd& z, int n);
/// Columns form an isometry (rows >= cols).
Eigen::MatrixXcd random_isometry(Rng& rng, int rows, int cols);
/// A complete Kraus family from d_in to d_out split into `n` outcomes.
std::vector<std::vector<Eigen::MatrixXcd>> random_kraus_family(Rng& rng, int d_out, int d_in, int n);
Eigen::MatrixXcd random_density(Rng& rng, int n);
Eigen::MatrixXcd random_effect(Rng& rng, int n);

ClassicalFiducials random_classical_fiducials(Rng& rng, int n);
QuantumFiducials random_quantum_fiducials(Rng& rng, int n);

/// Types named a, b, c, ... with dims drawn from [min_dim, max_dim].
Theory random_theory(Rng& rng, Backend backend, int n_types, int min_dim, int max_dim, bool random_fiducials);

/// Declares `apparatus` with the given ports and a random complete family
/// of `n_outcomes` outcomes labelled "0", "1", ...
void declare_random_apparatus(Rng& rng, Theory& theory, const std::string& apparatus,
                              const std::vector<std::string>& inputs, const std::vector<std::string>& outputs,
                              int n_outcomes = 2);

/// Registers every type used by `f` (with `dim`) when missing and declares a
/// random apparatus for each apparatus id that is not yet declared.
void declare_for(Rng& rng, Theory& theory, const Fragment& f, int dim = 2);

struct CircuitOptions {
  int min_ops = 2;
  int max_ops = 6;
  int max_in = 2;
  int max_out = 2;
  int max_live = 3;  // open outputs allowed at any point of the construction
};

/// A random closed circuit over the theory's types. Apparatus ids are
/// `prefix` plus two digits and are declared in `theory`; outcome labels
/// are drawn from "0", "1" and "I".
Fragment random_circuit(Rng& rng, Theory& theory, const CircuitOptions& opts, const std::string& prefix = "G");

/// A random circuit with a random nonempty proper subset of its instances
/// removed, so ports are left open. Falls back to the whole circuit when it
/// has a single instance.
Fragment random_open_fragment(Rng& rng, Theory& theory, const CircuitOptions& opts, const std::string& prefix = "G");

/// Random subset partition of the instance ids into `parts` nonempty sets.
std::vector<std::set<std::string>> random_partition(Rng& rng, const Fragment& f, int parts);

/// Qubit theory: A prepares spin up along z, B measures spin along the axis
/// at angle `theta` from z in the x-z plane, C measures spin along x. B and
/// C have outcomes "+" and "-" and pass on the collapsed state.
Theory spin_theory(double theta);

/// Textbook circuits in DSL form.
inline constexpr const char* kFourOpCircuit = "A^{a1 c2 a3} B_{a1 a4}^{b6} C_{c2 a3}^{a4 d5} D_{b6 d5}";
inline constexpr const char* kSimpleCircuit = "A^{a1} B_{a1}";
inline constexpr const char* kBigCircuit =
    "A^{a1 a2} D_{a1}^{c3 a4} C_{a2 b5}^{b6} E_{a4 b6}^{b7 c8} F_{c3 b7} B^{b5 c9} G_{c8 c9}";
inline constexpr const char* kMediumCircuit =
    "A^{a1 b2} B^{c3 d4} C_{b2 c3}^{e5} D_{a1}^{f6} E_{e5 d4}^{g7} F_{f6 g7}";

}  // namespace duo::testing
