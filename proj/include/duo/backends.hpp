#pragma once

#include <string>
#include <vector>

#include "duo/circuit.hpp"
#include "duo/duotensor.hpp"
#include "duo/theory.hpp"

namespace duo {

/// Shape and physicality checks for backend operation data: ShapeMismatch,
/// UnphysicalZ (negative entry or column sum above one) and
/// TraceIncreasing (sum K^dagger K not below the identity).
void validate_operation(const Theory& theory, const BackendOperation& op);

/// All-black duotensor of a classical operation: entry (inputs j.., outputs
/// i..) = (r_i ⊗ ..) · Z · (p_j ⊗ ..). Index order: inputs, then outputs.
/// Labels default to in0.., out0...
Duotensor classical_all_black(const ClassicalOperation& op, const Theory& theory,
                              const std::vector<std::string>& input_labels = {},
                              const std::vector<std::string>& output_labels = {});

/// All-black duotensor of a quantum operation: entry = Tr[(⊗ effects)
/// sum_k K (⊗ preparations) K^dagger].
Duotensor quantum_all_black(const QuantumOperation& op, const Theory& theory,
                            const std::vector<std::string>& input_labels = {},
                            const std::vector<std::string>& output_labels = {});

Duotensor all_black(const BackendOperation& op, const Theory& theory,
                    const std::vector<std::string>& input_labels = {},
                    const std::vector<std::string>& output_labels = {});

/// Circuit probability computed without duotensors: exact enumeration of
/// underlying states for classical theories, superoperator composition in
/// topological order for quantum ones. Errors: InvalidCircuit,
/// MissingOperation, OracleTooLarge (more than 1e6 classical assignments).
double oracle_probability(const Fragment& circuit, const Theory& theory);

inline constexpr double kOracleMaxAssignments = 1e6;

}  // namespace duo
