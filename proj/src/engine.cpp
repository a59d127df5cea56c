#include "duo/engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "duo/backends.hpp"
#include "duo/error.hpp"

namespace duo {

namespace {

struct PortInfo {
  std::string instance;
  int k = 1;
  std::optional<std::string> partner;  // other end of the wire, if wired
};

// Every port of every instance, with its fiducial count and wiring partner.
std::vector<PortInfo> port_table(const Fragment& f, const Theory& theory) {
  std::map<Endpoint, std::string> in_partner, out_partner;
  for (const auto& w : f.wires) {
    out_partner[w.from] = w.to.instance;
    in_partner[w.to] = w.from.instance;
  }
  std::vector<PortInfo> ports;
  for (const auto& [id, spec] : f.instances) {
    for (int s = 0; s < static_cast<int>(spec.input_types.size()); ++s) {
      PortInfo p{id, theory.type(spec.input_types[static_cast<std::size_t>(s)]).k, std::nullopt};
      if (auto it = in_partner.find({id, s}); it != in_partner.end()) p.partner = it->second;
      ports.push_back(std::move(p));
    }
    for (int s = 0; s < static_cast<int>(spec.output_types.size()); ++s) {
      PortInfo p{id, theory.type(spec.output_types[static_cast<std::size_t>(s)]).k, std::nullopt};
      if (auto it = out_partner.find({id, s}); it != out_partner.end()) p.partner = it->second;
      ports.push_back(std::move(p));
    }
  }
  return ports;
}

using Group = std::vector<std::string>;  // sorted instance ids

Group merged(const Group& a, const Group& b) {
  Group out;
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool contains(const Group& g, const std::string& id) { return std::binary_search(g.begin(), g.end(), id); }

double group_size(const Group& g, const std::vector<PortInfo>& ports) {
  double size = 1;
  for (const auto& p : ports) {
    if (!contains(g, p.instance)) continue;
    if (!p.partner || !contains(g, *p.partner)) size *= p.k;
  }
  return size;
}

bool connected(const Group& a, const Group& b, const std::vector<PortInfo>& ports) {
  for (const auto& p : ports) {
    if (p.partner && contains(a, p.instance) && contains(b, *p.partner)) return true;
  }
  return false;
}

class PlanBuilder {
 public:
  PlanBuilder(const Fragment& f, const Theory& theory) : ports_(port_table(f, theory)) {
    for (const auto& [id, _] : f.instances) {
      plan_.instances.push_back(id);
      groups_.push_back({id});
    }
  }
  std::size_t size() const { return groups_.size(); }
  const Group& group(std::size_t i) const { return groups_[i]; }
  double merged_size(std::size_t i, std::size_t j) const { return group_size(merged(groups_[i], groups_[j]), ports_); }
  bool linked(std::size_t i, std::size_t j) const { return connected(groups_[i], groups_[j], ports_); }

  void merge(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    ContractionStep step{i, j, groups_[i], groups_[j], merged_size(i, j)};
    groups_[i] = merged(groups_[i], groups_[j]);
    groups_.erase(groups_.begin() + static_cast<std::ptrdiff_t>(j));
    plan_.steps.push_back(std::move(step));
  }
  ContractionPlan take() { return std::move(plan_); }

 private:
  std::vector<PortInfo> ports_;
  std::vector<Group> groups_;
  ContractionPlan plan_;
};

ContractionPlan greedy_plan(const Fragment& f, const Theory& theory) {
  PlanBuilder b(f, theory);
  while (b.size() > 1) {
    bool any_linked = false;
    for (std::size_t i = 0; i < b.size() && !any_linked; ++i) {
      for (std::size_t j = i + 1; j < b.size(); ++j) {
        if (b.linked(i, j)) {
          any_linked = true;
          break;
        }
      }
    }
    std::optional<std::pair<std::size_t, std::size_t>> best;
    double best_cost = 0;
    std::pair<std::string, std::string> best_key;
    for (std::size_t i = 0; i < b.size(); ++i) {
      for (std::size_t j = i + 1; j < b.size(); ++j) {
        if (any_linked && !b.linked(i, j)) continue;
        const double cost = b.merged_size(i, j);
        auto key = std::minmax(b.group(i).front(), b.group(j).front());
        std::pair<std::string, std::string> k{key.first, key.second};
        if (!best || cost < best_cost || (cost == best_cost && k < best_key)) {
          best = {i, j};
          best_cost = cost;
          best_key = std::move(k);
        }
      }
    }
    b.merge(best->first, best->second);
  }
  return b.take();
}

ContractionPlan left_to_right_plan(const Fragment& f, const Theory& theory) {
  PlanBuilder b(f, theory);
  while (b.size() > 1) b.merge(0, 1);
  return b.take();
}

ContractionPlan random_plan(const Fragment& f, const Theory& theory, std::uint64_t seed) {
  PlanBuilder b(f, theory);
  std::mt19937_64 rng(seed);
  while (b.size() > 1) {
    std::uniform_int_distribution<std::size_t> pick(0, b.size() - 1);
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    while (j == i) j = pick(rng);
    b.merge(i, j);
  }
  return b.take();
}

struct LabelledPorts {
  std::vector<std::string> labels;
  std::map<PortRef, std::string> port_map;
};

LabelledPorts open_labels(const Fragment& f) {
  LabelledPorts out;
  for (const auto& p : f.open_ports()) {
    out.labels.push_back(port_label(p));
    out.port_map[p] = out.labels.back();
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> links_between(const std::vector<Wire>& wires, const Group& left,
                                                               const Group& right) {
  std::vector<std::pair<std::string, std::string>> links;
  for (const auto& w : wires) {
    const auto out = port_label(w.from.instance, Direction::Output, w.from.slot);
    const auto in = port_label(w.to.instance, Direction::Input, w.to.slot);
    if (contains(left, w.from.instance) && contains(right, w.to.instance)) links.emplace_back(out, in);
    if (contains(left, w.to.instance) && contains(right, w.from.instance)) links.emplace_back(in, out);
  }
  return links;
}

BackendOperation checked_operation(const std::string& instance_id, const OperationSpec& spec, const Theory& theory) {
  auto op = theory.resolve(spec.apparatus_id, spec.outcome_label);
  if (input_types(op) != spec.input_types || output_types(op) != spec.output_types) {
    throw Error(ErrorKind::TypeMismatch, "instance '" + instance_id + "' port types differ from apparatus '" +
                                             spec.apparatus_id + "'");
  }
  return op;
}

Duotensor instance_duotensor(const std::string& instance_id, const OperationSpec& spec, const Theory& theory,
                             const std::map<std::string, HoppingMetric>& metrics) {
  const auto op = checked_operation(instance_id, spec, theory);
  std::vector<std::string> in_labels, out_labels;
  for (int s = 0; s < static_cast<int>(spec.input_types.size()); ++s) {
    in_labels.push_back(port_label(instance_id, Direction::Input, s));
  }
  for (int s = 0; s < static_cast<int>(spec.output_types.size()); ++s) {
    out_labels.push_back(port_label(instance_id, Direction::Output, s));
  }
  return to_standard_form(all_black(op, theory, in_labels, out_labels), metrics);
}

}  // namespace

double ContractionPlan::cost() const {
  double c = 0;
  for (const auto& s : steps) c += s.result_size;
  return c;
}

ContractionPlan plan_contraction(const Fragment& f, const Theory& theory) {
  auto greedy = greedy_plan(f, theory);
  auto naive = left_to_right_plan(f, theory);
  return naive.cost() < greedy.cost() ? naive : greedy;
}

ContractionPlan plan_contraction(const Fragment& f, const Theory& theory, PlanStrategy strategy,
                                 std::uint64_t seed) {
  switch (strategy) {
    case PlanStrategy::Greedy: return plan_contraction(f, theory);
    case PlanStrategy::LeftToRight: return left_to_right_plan(f, theory);
    case PlanStrategy::Random: return random_plan(f, theory, seed);
  }
  return plan_contraction(f, theory);
}

Duotensor instance_duotensor(const std::string& instance_id, const OperationSpec& spec, const Theory& theory) {
  return instance_duotensor(instance_id, spec, theory, theory.metrics());
}

CompiledFragment compile_fragment(const Fragment& f, const Theory& theory) {
  require_valid(f, ErrorKind::ValidationFailed);
  // Surface missing operations and type mismatches before planning needs the dims.
  for (const auto& [id, spec] : f.instances) checked_operation(id, spec, theory);
  return compile_fragment(f, theory, plan_contraction(f, theory));
}

CompiledFragment compile_fragment(const Fragment& f, const Theory& theory, const ContractionPlan& plan) {
  require_valid(f, ErrorKind::ValidationFailed);
  std::vector<std::string> ids;
  for (const auto& [id, _] : f.instances) ids.push_back(id);
  if (plan.instances != ids) throw Error(ErrorKind::ValidationFailed, "contraction plan belongs to another fragment");

  const auto metrics = theory.metrics();
  std::vector<Duotensor> items;
  std::vector<Group> groups;
  for (const auto& [id, spec] : f.instances) {
    items.push_back(instance_duotensor(id, spec, theory, metrics));
    groups.push_back({id});
  }
  for (const auto& step : plan.steps) {
    const auto links = links_between(f.wires, groups[step.left], groups[step.right]);
    items[step.left] = contract(items[step.left], items[step.right], links);
    groups[step.left] = merged(groups[step.left], groups[step.right]);
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(step.right));
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(step.right));
  }
  auto ports = open_labels(f);
  CompiledFragment out;
  out.duotensor = items.empty() ? Duotensor::scalar(1.0) : reorder(items.front(), ports.labels);
  out.port_map = std::move(ports.port_map);
  out.provenance = plan;
  return out;
}

CompiledFragment join(const CompiledFragment& a, const CompiledFragment& b, const std::vector<Wire>& wires) {
  std::vector<std::pair<std::string, std::string>> links;
  CompiledFragment out;
  out.port_map = a.port_map;
  out.port_map.insert(b.port_map.begin(), b.port_map.end());
  auto side_of = [&](const PortRef& p) -> int {
    if (a.port_map.count(p)) return 0;
    if (b.port_map.count(p)) return 1;
    throw Error(ErrorKind::NoSuchPort, "port " + to_string(p) + " is not open in either fragment");
  };
  for (const auto& w : wires) {
    const PortRef from{w.from.instance, Direction::Output, w.from.slot};
    const PortRef to{w.to.instance, Direction::Input, w.to.slot};
    const int sf = side_of(from), st = side_of(to);
    if (sf == st) throw Error(ErrorKind::PortTaken, "wire does not cross between the fragments");
    if (sf == 0) {
      links.emplace_back(a.port_map.at(from), b.port_map.at(to));
    } else {
      links.emplace_back(a.port_map.at(to), b.port_map.at(from));
    }
    out.port_map.erase(from);
    out.port_map.erase(to);
  }
  out.duotensor = contract(a.duotensor, b.duotensor, links);
  // Canonical order: open inputs then open outputs, each sorted.
  std::vector<std::pair<PortRef, std::string>> entries(out.port_map.begin(), out.port_map.end());
  std::stable_sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
    return x.first.direction == Direction::Input && y.first.direction == Direction::Output;
  });
  std::vector<std::string> labels;
  for (const auto& [_, l] : entries) labels.push_back(l);
  out.duotensor = reorder(out.duotensor, labels);
  out.provenance.instances = a.provenance.instances;
  out.provenance.instances.insert(out.provenance.instances.end(), b.provenance.instances.begin(),
                                  b.provenance.instances.end());
  out.provenance.steps = a.provenance.steps;
  out.provenance.steps.insert(out.provenance.steps.end(), b.provenance.steps.begin(), b.provenance.steps.end());
  out.provenance.steps.push_back({0, 1, a.provenance.instances, b.provenance.instances,
                                  static_cast<double>(out.duotensor.size())});
  return out;
}

double circuit_probability(const Fragment& circuit, const Theory& theory) {
  if (!circuit.is_circuit()) throw Error(ErrorKind::InvalidCircuit, "fragment has open ports");
  return compile_fragment(circuit, theory).duotensor.scalar_value();
}

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

std::string_view to_string(RatioVerdict::Kind kind) {
  switch (kind) {
    case RatioVerdict::Kind::WellConditioned: return "WellConditioned";
    case RatioVerdict::Kind::NotWellConditioned: return "NotWellConditioned";
    case RatioVerdict::Kind::Undefined: return "Undefined";
  }
  return "Undefined";
}

bool same_experiment(const Fragment& a, const Fragment& b) {
  if (a.instances.size() != b.instances.size()) return false;
  for (const auto& [id, sa] : a.instances) {
    auto it = b.instances.find(id);
    if (it == b.instances.end()) return false;
    const auto& sb = it->second;
    if (sa.apparatus_id != sb.apparatus_id || sa.setting != sb.setting || sa.input_types != sb.input_types ||
        sa.output_types != sb.output_types) {
      return false;
    }
  }
  auto wa = a.wires, wb = b.wires;
  std::sort(wa.begin(), wa.end());
  std::sort(wb.begin(), wb.end());
  return wa == wb;
}

RatioVerdict ratio_check(const Fragment& e_i, const Fragment& e_j, const Theory& theory, double rel_tol) {
  if (!same_experiment(e_i, e_j)) {
    throw Error(ErrorKind::NotSameExperiment, "fragments differ in more than outcome labels");
  }
  const auto a = compile_fragment(e_i, theory).duotensor;
  const auto b = compile_fragment(e_j, theory).duotensor;
  const auto r = proportionality(a, b, rel_tol);
  switch (r.kind) {
    case ProportionalityResult::Kind::Proportional: return {RatioVerdict::Kind::WellConditioned, r.k, {}};
    case ProportionalityResult::Kind::NotProportional: return {RatioVerdict::Kind::NotWellConditioned, 0.0, {}};
    case ProportionalityResult::Kind::ZeroDenominator:
      return {RatioVerdict::Kind::Undefined, 0.0, "zero denominator"};
    case ProportionalityResult::Kind::BothZero: return {RatioVerdict::Kind::Undefined, 0.0, "both zero"};
  }
  return {};
}

FoliationResult evolve_foliation(const Fragment& circuit, const Foliation& fol, const Theory& theory) {
  require_valid(circuit, ErrorKind::InvalidCircuit);
  if (!circuit.is_circuit()) throw Error(ErrorKind::InvalidCircuit, "fragment has open ports");
  const auto report = check_foliation(circuit, fol);
  if (!report.complete || !report.synchronous) {
    throw Error(ErrorKind::IncompatibleFoliation, report.problems.empty() ? "invalid foliation" : report.problems[0]);
  }
  const auto slab = foliation_slabs(circuit, fol);
  const std::size_t m = fol.hypersurfaces.size();

  std::vector<std::size_t> lo(circuit.wires.size(), m + 1), hi(circuit.wires.size(), 0);
  for (std::size_t n = 0; n < m; ++n) {
    for (auto w : fol.hypersurfaces[n]) {
      lo[w] = std::min(lo[w], n + 1);
      hi[w] = std::max(hi[w], n + 1);
    }
  }
  std::map<Endpoint, std::size_t> wire_of_input, wire_of_output;
  for (std::size_t w = 0; w < circuit.wires.size(); ++w) {
    wire_of_output[circuit.wires[w].from] = w;
    wire_of_input[circuit.wires[w].to] = w;
  }
  auto surface_label = [](std::size_t w, std::size_t n) {
    return "w" + std::to_string(w) + "@" + std::to_string(n);
  };

  const auto metrics = theory.metrics();
  FoliationResult result;
  Duotensor state = Duotensor::scalar(1.0);
  auto absorb = [&](const Duotensor& factor) {
    std::vector<std::pair<std::string, std::string>> links;
    for (const auto& idx : factor.indices()) {
      if (idx.direction == Direction::Input) links.emplace_back(idx.label, idx.label);
    }
    state = contract(state, factor, links);
  };

  for (std::size_t s = 0; s <= m; ++s) {
    for (const auto& [id, spec] : circuit.instances) {
      if (slab.at(id) != s) continue;
      std::map<std::string, std::string> renames;
      for (int k = 0; k < static_cast<int>(spec.input_types.size()); ++k) {
        renames[port_label(id, Direction::Input, k)] = surface_label(wire_of_input.at({id, k}), s);
      }
      for (int k = 0; k < static_cast<int>(spec.output_types.size()); ++k) {
        renames[port_label(id, Direction::Output, k)] = surface_label(wire_of_output.at({id, k}), s + 1);
      }
      absorb(to_evolution_form(relabel(instance_duotensor(id, spec, theory, metrics), renames), metrics));
    }
    for (std::size_t w = 0; w < circuit.wires.size(); ++w) {
      if (lo[w] <= s && s + 1 <= hi[w]) {
        const auto& type = circuit.spec(circuit.wires[w].from.instance)
                               .output_types[static_cast<std::size_t>(circuit.wires[w].from.slot)];
        absorb(identity_delta(type, theory.type(type).k, surface_label(w, s), surface_label(w, s + 1)));
        ++result.padding_count;
      }
    }
  }
  result.probability = state.scalar_value();
  return result;
}

Duotensor coarse_grain(const Fragment& f, const std::string& instance_id, const std::vector<std::string>& outcomes,
                       const Theory& theory) {
  if (!f.instances.count(instance_id)) throw Error(ErrorKind::NoSuchPort, "no instance '" + instance_id + "'");
  std::vector<std::pair<double, Duotensor>> terms;
  for (const auto& label : outcomes) {
    Fragment g = f;
    g.instances[instance_id].outcome_label = label;
    terms.emplace_back(1.0, compile_fragment(g, theory).duotensor);
  }
  return linear_combine(terms);
}

}  // namespace duo
