#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "duo/duotensor.hpp"
#include "duo/error.hpp"

namespace duo {

/// One use of an apparatus with a setting and an outcome set.
struct OperationSpec {
  std::string apparatus_id;
  std::string setting;
  std::string outcome_label;
  std::vector<std::string> input_types;
  std::vector<std::string> output_types;

  friend bool operator==(const OperationSpec&, const OperationSpec&) = default;
};

struct Endpoint {
  std::string instance;
  int slot = 0;

  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

/// A port of an instance, used for open ports and closures.
struct PortRef {
  std::string instance;
  Direction direction = Direction::Input;
  int slot = 0;

  friend auto operator<=>(const PortRef&, const PortRef&) = default;
};

std::string to_string(const PortRef& p);

/// Directed wire from an output slot to an input slot.
struct Wire {
  Endpoint from;
  Endpoint to;

  friend auto operator<=>(const Wire&, const Wire&) = default;
};

/// Operation instances wired together; open ports are derived.
struct Fragment {
  std::map<std::string, OperationSpec> instances;
  std::vector<Wire> wires;

  /// Adds an instance numbered apparatus_id#n and returns its id.
  std::string add(OperationSpec spec);
  void add(const std::string& instance_id, OperationSpec spec);
  void connect(Endpoint from, Endpoint to) { wires.push_back({std::move(from), std::move(to)}); }

  std::vector<PortRef> open_inputs() const;
  std::vector<PortRef> open_outputs() const;
  /// Open inputs then open outputs, each sorted.
  std::vector<PortRef> open_ports() const;
  bool is_circuit() const { return open_inputs().empty() && open_outputs().empty(); }

  const OperationSpec& spec(const std::string& instance_id) const;
  /// Type of a port. Errors: NoSuchPort.
  const std::string& port_type(const PortRef& port) const;
};

/// Label of a port inside compiled duotensors, e.g. "B#1.in0".
std::string port_label(const PortRef& port);
std::string port_label(const std::string& instance, Direction direction, int slot);

enum class WiringRule { OneWire, TypeMatching, NoClosedLoops, DanglingPort };

std::string_view to_string(WiringRule rule);

struct Violation {
  WiringRule rule;
  std::string message;
  std::vector<PortRef> ports;
  std::vector<std::string> cycle;  // instance ids, first repeated at the end
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks the three wiring rules plus well-formed port references.
ValidationReport validate(const Fragment& f);

/// Throws ValidationFailed (or `kind`) with the first violation.
void require_valid(const Fragment& f, ErrorKind kind = ErrorKind::ValidationFailed);

/// Merges two instance-disjoint fragments and wires `links` (each from an
/// output of one to an input of the other). Errors: CycleCreated,
/// TypeMismatch, PortTaken.
Fragment compose(const Fragment& f, const Fragment& g, const std::vector<Wire>& links);

/// How to close one open port. An empty apparatus id selects the theory's
/// standard closing device for the port's type.
struct Closure {
  PortRef port;
  std::string apparatus_id;
  std::string outcome_label;
};

/// Attaches a preparation to each closed input and an effect to each
/// closed output. Errors: PortNotOpen.
Fragment close_ports(const Fragment& f, const std::vector<Closure>& closures);

/// Closes every open port with the standard devices.
Fragment close_all(const Fragment& f);

/// Kahn order; ties broken by lexicographic instance id.
std::vector<std::string> topological_order(const Fragment& f);

/// Instances grouped by longest-path depth from the sources (wave layers).
std::vector<std::vector<std::string>> topological_layers(const Fragment& f);

/// The induced sub-fragment on `instance_ids`; wires leaving it become open ports.
Fragment restrict(const Fragment& f, const std::set<std::string>& instance_ids);

/// Wires of `f` joining an instance in `a` to one in `b` (either direction).
std::vector<Wire> crossing_wires(const Fragment& f, const std::set<std::string>& a, const std::set<std::string>& b);

/// Graph equality up to renaming of instances.
bool equivalent(const Fragment& f, const Fragment& g);

/// Ordered cover of a circuit's wires by synchronous sets. Entries index
/// into the circuit's wire list.
struct Foliation {
  std::vector<std::vector<std::size_t>> hypersurfaces;
};

/// Complete foliation from wave layering: hypersurface n holds the wires
/// crossing the cut after the first n layers. Errors: InvalidCircuit.
Foliation foliate(const Fragment& circuit);

struct FoliationReport {
  bool complete = true;
  bool synchronous = true;
  bool ordered = true;
  std::vector<std::string> problems;
  bool ok() const { return complete && synchronous && ordered; }
};

/// Checks completeness, synchronicity and that an ordering of the
/// operations between consecutive hypersurfaces exists.
FoliationReport check_foliation(const Fragment& circuit, const Foliation& fol);

/// Slab of every instance: 0 before the first hypersurface, n between
/// hypersurfaces n and n+1. Errors: IncompatibleFoliation.
std::map<std::string, std::size_t> foliation_slabs(const Fragment& circuit, const Foliation& fol);

}  // namespace duo
