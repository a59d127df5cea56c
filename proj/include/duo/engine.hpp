#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "duo/circuit.hpp"
#include "duo/duotensor.hpp"
#include "duo/theory.hpp"

namespace duo {

/// One pairwise contraction. `left` and `right` index the working list
/// before the step (left < right); the merged item replaces `left` and
/// `right` is erased. The working list starts as the instances in id order.
struct ContractionStep {
  std::size_t left = 0;
  std::size_t right = 0;
  std::vector<std::string> left_instances;
  std::vector<std::string> right_instances;
  double result_size = 1;  // entries of the intermediate duotensor
};

struct ContractionPlan {
  std::vector<std::string> instances;
  std::vector<ContractionStep> steps;
  /// Sum of intermediate sizes.
  double cost() const;
};

enum class PlanStrategy { Greedy, LeftToRight, Random };

/// Greedy: repeatedly merge the connected pair whose result is smallest,
/// ties broken by the pair's smallest instance ids. Disconnected pieces are
/// joined last with the same rule. If the left-to-right fold is cheaper it
/// is returned instead, so the plan never costs more than that baseline.
ContractionPlan plan_contraction(const Fragment& f, const Theory& theory);
ContractionPlan plan_contraction(const Fragment& f, const Theory& theory, PlanStrategy strategy,
                                 std::uint64_t seed = 0);

struct CompiledFragment {
  Duotensor duotensor;                     // standard form: inputs Black, outputs White
  std::map<PortRef, std::string> port_map;  // open port -> index label
  ContractionPlan provenance;
};

/// Duotensor of one instance in standard form, indices labelled by port.
Duotensor instance_duotensor(const std::string& instance_id, const OperationSpec& spec, const Theory& theory);

/// Contracts the instances' duotensors over every internal wire. The index
/// order of the result follows f.open_ports(). Errors: ValidationFailed,
/// MissingOperation, TypeMismatch.
CompiledFragment compile_fragment(const Fragment& f, const Theory& theory);
CompiledFragment compile_fragment(const Fragment& f, const Theory& theory, const ContractionPlan& plan);

/// Contracts two compiled, instance-disjoint fragments over `wires` (wires
/// of the enclosing fragment that run between them).
CompiledFragment join(const CompiledFragment& a, const CompiledFragment& b, const std::vector<Wire>& wires);

/// Unclamped probability of a circuit. Errors: as compile_fragment, plus
/// InvalidCircuit for open ports.
double circuit_probability(const Fragment& circuit, const Theory& theory);

/// Clamps to [0, 1] for reporting.
double clamp_probability(double p);

struct RatioVerdict {
  enum class Kind { WellConditioned, NotWellConditioned, Undefined };
  Kind kind = Kind::Undefined;
  double k = 0.0;
  std::string reason;
};

std::string_view to_string(RatioVerdict::Kind kind);

/// True when the fragments differ at most in outcome labels.
bool same_experiment(const Fragment& a, const Fragment& b);

/// Well-conditioned test for Prob(e_i) / Prob(e_j): proportional fragment
/// duotensors give WellConditioned(k). Errors: NotSameExperiment.
RatioVerdict ratio_check(const Fragment& e_i, const Fragment& e_j, const Theory& theory, double rel_tol = 1e-8);

struct FoliationResult {
  double probability = 0.0;
  int padding_count = 0;
};

/// Evaluates a circuit as a state evolving across the hypersurfaces of
/// `fol`, inserting an identity for each wire that stays on consecutive
/// hypersurfaces. Errors: IncompatibleFoliation.
FoliationResult evolve_foliation(const Fragment& circuit, const Foliation& fol, const Theory& theory);

/// Sum of the fragment duotensors obtained by giving `instance_id` each of
/// the listed outcome labels.
Duotensor coarse_grain(const Fragment& f, const std::string& instance_id, const std::vector<std::string>& outcomes,
                       const Theory& theory);

}  // namespace duo
