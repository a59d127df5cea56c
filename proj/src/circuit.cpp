#include "duo/circuit.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <sstream>

#include "duo/error.hpp"

namespace duo {

namespace {

using Adjacency = std::map<std::string, std::set<std::string>>;

Adjacency successors(const Fragment& f) {
  Adjacency adj;
  for (const auto& [id, spec] : f.instances) adj[id];
  for (const auto& w : f.wires) {
    if (f.instances.count(w.from.instance) && f.instances.count(w.to.instance)) {
      adj[w.from.instance].insert(w.to.instance);
    }
  }
  return adj;
}

/// A directed cycle (closed with its first vertex) or empty.
std::vector<std::string> find_cycle(const Adjacency& adj) {
  std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
  std::vector<std::string> stack;
  std::vector<std::string> cycle;
  std::function<bool(const std::string&)> dfs = [&](const std::string& v) {
    state[v] = 1;
    stack.push_back(v);
    for (const auto& u : adj.at(v)) {
      if (state[u] == 1) {
        auto it = std::find(stack.begin(), stack.end(), u);
        cycle.assign(it, stack.end());
        cycle.push_back(u);
        return true;
      }
      if (state[u] == 0 && dfs(u)) return true;
    }
    stack.pop_back();
    state[v] = 2;
    return false;
  };
  for (const auto& [v, _] : adj) {
    if (state[v] == 0 && dfs(v)) return cycle;
  }
  return {};
}

std::map<std::string, std::set<std::string>> reachability(const Fragment& f) {
  const Adjacency adj = successors(f);
  std::map<std::string, std::set<std::string>> reach;
  for (const auto& [v, _] : adj) {
    std::vector<std::string> todo(adj.at(v).begin(), adj.at(v).end());
    auto& r = reach[v];
    while (!todo.empty()) {
      auto u = todo.back();
      todo.pop_back();
      if (!r.insert(u).second) continue;
      for (const auto& x : adj.at(u)) todo.push_back(x);
    }
  }
  return reach;
}

bool slot_exists(const Fragment& f, const std::string& instance, Direction d, int slot) {
  auto it = f.instances.find(instance);
  if (it == f.instances.end() || slot < 0) return false;
  const auto& types = d == Direction::Input ? it->second.input_types : it->second.output_types;
  return static_cast<std::size_t>(slot) < types.size();
}

}  // namespace

std::string to_string(const PortRef& p) {
  return p.instance + (p.direction == Direction::Input ? ".in" : ".out") + std::to_string(p.slot);
}

std::string port_label(const PortRef& port) { return to_string(port); }

std::string port_label(const std::string& instance, Direction direction, int slot) {
  return to_string(PortRef{instance, direction, slot});
}

std::string_view to_string(WiringRule rule) {
  switch (rule) {
    case WiringRule::OneWire: return "one-wire";
    case WiringRule::TypeMatching: return "type-matching";
    case WiringRule::NoClosedLoops: return "no-closed-loops";
    case WiringRule::DanglingPort: return "dangling-port";
  }
  return "?";
}

std::string Fragment::add(OperationSpec spec) {
  int n = 1;
  std::string id;
  do {
    id = spec.apparatus_id + "#" + std::to_string(n++);
  } while (instances.count(id) != 0);
  instances.emplace(id, std::move(spec));
  return id;
}

void Fragment::add(const std::string& instance_id, OperationSpec spec) {
  if (!instances.emplace(instance_id, std::move(spec)).second) {
    throw Error(ErrorKind::DuplicatePort, "instance '" + instance_id + "' already present");
  }
}

std::vector<PortRef> Fragment::open_inputs() const {
  std::set<Endpoint> used;
  for (const auto& w : wires) used.insert(w.to);
  std::vector<PortRef> out;
  for (const auto& [id, spec] : instances) {
    for (int s = 0; s < static_cast<int>(spec.input_types.size()); ++s) {
      if (!used.count({id, s})) out.push_back({id, Direction::Input, s});
    }
  }
  return out;
}

std::vector<PortRef> Fragment::open_outputs() const {
  std::set<Endpoint> used;
  for (const auto& w : wires) used.insert(w.from);
  std::vector<PortRef> out;
  for (const auto& [id, spec] : instances) {
    for (int s = 0; s < static_cast<int>(spec.output_types.size()); ++s) {
      if (!used.count({id, s})) out.push_back({id, Direction::Output, s});
    }
  }
  return out;
}

std::vector<PortRef> Fragment::open_ports() const {
  auto out = open_inputs();
  auto o = open_outputs();
  out.insert(out.end(), o.begin(), o.end());
  return out;
}

const OperationSpec& Fragment::spec(const std::string& instance_id) const {
  auto it = instances.find(instance_id);
  if (it == instances.end()) throw Error(ErrorKind::NoSuchPort, "no instance '" + instance_id + "'");
  return it->second;
}

const std::string& Fragment::port_type(const PortRef& port) const {
  if (!slot_exists(*this, port.instance, port.direction, port.slot)) {
    throw Error(ErrorKind::NoSuchPort, "no port " + to_string(port));
  }
  const auto& s = instances.at(port.instance);
  return (port.direction == Direction::Input ? s.input_types : s.output_types)[static_cast<std::size_t>(port.slot)];
}

ValidationReport validate(const Fragment& f) {
  ValidationReport report;
  std::map<Endpoint, int> out_use, in_use;
  for (const auto& w : f.wires) {
    const PortRef from{w.from.instance, Direction::Output, w.from.slot};
    const PortRef to{w.to.instance, Direction::Input, w.to.slot};
    const bool from_ok = slot_exists(f, from.instance, from.direction, from.slot);
    const bool to_ok = slot_exists(f, to.instance, to.direction, to.slot);
    if (!from_ok || !to_ok) {
      report.violations.push_back({WiringRule::DanglingPort,
                                   "wire " + to_string(from) + " -> " + to_string(to) + " references a missing port",
                                   {from, to}, {}});
      continue;
    }
    if (++out_use[w.from] == 2) {
      report.violations.push_back({WiringRule::OneWire, "output " + to_string(from) + " has more than one wire",
                                   {from}, {}});
    }
    if (++in_use[w.to] == 2) {
      report.violations.push_back({WiringRule::OneWire, "input " + to_string(to) + " has more than one wire",
                                   {to}, {}});
    }
    const auto& tf = f.port_type(from);
    const auto& tt = f.port_type(to);
    if (tf != tt) {
      report.violations.push_back({WiringRule::TypeMatching,
                                   "wire " + to_string(from) + " -> " + to_string(to) + " joins type '" + tf +
                                       "' to type '" + tt + "'",
                                   {from, to}, {}});
    }
  }
  if (auto cycle = find_cycle(successors(f)); !cycle.empty()) {
    std::string msg = "closed loop:";
    for (const auto& c : cycle) msg += " " + c;
    report.violations.push_back({WiringRule::NoClosedLoops, msg, {}, cycle});
  }
  return report;
}

void require_valid(const Fragment& f, ErrorKind kind) {
  const auto report = validate(f);
  if (!report.ok()) throw Error(kind, report.violations.front().message);
}

Fragment compose(const Fragment& f, const Fragment& g, const std::vector<Wire>& links) {
  Fragment out = f;
  for (const auto& [id, spec] : g.instances) {
    if (out.instances.count(id)) throw Error(ErrorKind::DuplicatePort, "instance '" + id + "' present in both fragments");
    out.instances.emplace(id, spec);
  }
  out.wires.insert(out.wires.end(), g.wires.begin(), g.wires.end());

  std::set<Endpoint> used_out, used_in;
  for (const auto& w : out.wires) {
    used_out.insert(w.from);
    used_in.insert(w.to);
  }
  for (const auto& link : links) {
    const PortRef from{link.from.instance, Direction::Output, link.from.slot};
    const PortRef to{link.to.instance, Direction::Input, link.to.slot};
    if (!slot_exists(out, from.instance, from.direction, from.slot)) throw Error(ErrorKind::NoSuchPort, "no port " + to_string(from));
    if (!slot_exists(out, to.instance, to.direction, to.slot)) throw Error(ErrorKind::NoSuchPort, "no port " + to_string(to));
    const bool from_f = f.instances.count(from.instance) != 0;
    const bool to_f = f.instances.count(to.instance) != 0;
    if (from_f == to_f) {
      throw Error(ErrorKind::PortTaken, "link " + to_string(from) + " -> " + to_string(to) + " does not join f and g");
    }
    if (!used_out.insert(link.from).second) throw Error(ErrorKind::PortTaken, "port " + to_string(from) + " already wired");
    if (!used_in.insert(link.to).second) throw Error(ErrorKind::PortTaken, "port " + to_string(to) + " already wired");
    if (out.port_type(from) != out.port_type(to)) {
      throw Error(ErrorKind::TypeMismatch, "link " + to_string(from) + " -> " + to_string(to) + " joins different types");
    }
    out.wires.push_back(link);
  }
  if (auto cycle = find_cycle(successors(out)); !cycle.empty()) {
    std::string msg = "composition creates a closed loop:";
    for (const auto& c : cycle) msg += " " + c;
    throw Error(ErrorKind::CycleCreated, msg);
  }
  return out;
}

Fragment close_ports(const Fragment& f, const std::vector<Closure>& closures) {
  Fragment out = f;
  std::set<PortRef> open;
  for (const auto& p : f.open_ports()) open.insert(p);
  for (const auto& c : closures) {
    if (open.erase(c.port) == 0) throw Error(ErrorKind::PortNotOpen, "port " + to_string(c.port) + " is not open");
    const std::string type = f.port_type(c.port);
    OperationSpec spec;
    spec.outcome_label = c.outcome_label;
    if (c.port.direction == Direction::Input) {
      spec.apparatus_id = c.apparatus_id.empty() ? closing_preparation_id(type) : c.apparatus_id;
      spec.output_types = {type};
      const auto id = out.add(spec);
      out.connect({id, 0}, {c.port.instance, c.port.slot});
    } else {
      spec.apparatus_id = c.apparatus_id.empty() ? closing_effect_id(type) : c.apparatus_id;
      spec.input_types = {type};
      const auto id = out.add(spec);
      out.connect({c.port.instance, c.port.slot}, {id, 0});
    }
  }
  return out;
}

Fragment close_all(const Fragment& f) {
  std::vector<Closure> closures;
  for (const auto& p : f.open_ports()) closures.push_back({p, {}, {}});
  return close_ports(f, closures);
}

std::vector<std::string> topological_order(const Fragment& f) {
  const Adjacency adj = successors(f);
  std::map<std::string, int> indegree;
  for (const auto& [v, _] : adj) indegree[v];
  for (const auto& [v, next] : adj) {
    for (const auto& u : next) ++indegree[u];
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [v, d] : indegree) {
    if (d == 0) ready.push(v);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    auto v = ready.top();
    ready.pop();
    order.push_back(v);
    for (const auto& u : adj.at(v)) {
      if (--indegree[u] == 0) ready.push(u);
    }
  }
  if (order.size() != adj.size()) throw Error(ErrorKind::InvalidCircuit, "fragment has a closed loop");
  return order;
}

std::vector<std::vector<std::string>> topological_layers(const Fragment& f) {
  const auto order = topological_order(f);
  std::map<std::string, std::size_t> depth;
  for (const auto& v : order) depth[v] = 0;
  const Adjacency adj = successors(f);
  for (const auto& v : order) {
    for (const auto& u : adj.at(v)) depth[u] = std::max(depth[u], depth[v] + 1);
  }
  std::vector<std::vector<std::string>> layers;
  for (const auto& v : order) {
    if (depth[v] >= layers.size()) layers.resize(depth[v] + 1);
    layers[depth[v]].push_back(v);
  }
  for (auto& l : layers) std::sort(l.begin(), l.end());
  return layers;
}

Fragment restrict(const Fragment& f, const std::set<std::string>& instance_ids) {
  Fragment out;
  for (const auto& id : instance_ids) out.instances.emplace(id, f.spec(id));
  for (const auto& w : f.wires) {
    if (instance_ids.count(w.from.instance) && instance_ids.count(w.to.instance)) out.wires.push_back(w);
  }
  return out;
}

std::vector<Wire> crossing_wires(const Fragment& f, const std::set<std::string>& a, const std::set<std::string>& b) {
  std::vector<Wire> out;
  for (const auto& w : f.wires) {
    const bool ab = a.count(w.from.instance) && b.count(w.to.instance);
    const bool ba = b.count(w.from.instance) && a.count(w.to.instance);
    if (ab || ba) out.push_back(w);
  }
  return out;
}

bool equivalent(const Fragment& f, const Fragment& g) {
  if (f.instances.size() != g.instances.size() || f.wires.size() != g.wires.size()) return false;
  std::vector<std::string> fi, gi;
  for (const auto& [id, _] : f.instances) fi.push_back(id);
  for (const auto& [id, _] : g.instances) gi.push_back(id);

  std::set<Wire> g_wires(g.wires.begin(), g.wires.end());
  if (g_wires.size() != g.wires.size()) return false;
  std::set<Wire> f_wires(f.wires.begin(), f.wires.end());
  if (f_wires.size() != f.wires.size()) return false;

  std::map<std::string, std::string> map;
  std::set<std::string> taken;
  auto consistent = [&](const std::string& v) {
    // Every f-wire between mapped instances touching v must exist in g.
    for (const auto& w : f.wires) {
      if (w.from.instance != v && w.to.instance != v) continue;
      auto a = map.find(w.from.instance);
      auto b = map.find(w.to.instance);
      if (a == map.end() || b == map.end()) continue;
      if (!g_wires.count({{a->second, w.from.slot}, {b->second, w.to.slot}})) return false;
    }
    return true;
  };
  std::function<bool(std::size_t)> search = [&](std::size_t n) {
    if (n == fi.size()) return true;
    const auto& v = fi[n];
    for (const auto& u : gi) {
      if (taken.count(u) || !(f.spec(v) == g.spec(u))) continue;
      map[v] = u;
      taken.insert(u);
      if (consistent(v) && search(n + 1)) return true;
      map.erase(v);
      taken.erase(u);
    }
    return false;
  };
  return search(0);
}

Foliation foliate(const Fragment& circuit) {
  require_valid(circuit, ErrorKind::InvalidCircuit);
  if (!circuit.is_circuit()) throw Error(ErrorKind::InvalidCircuit, "fragment has open ports");
  const auto layers = topological_layers(circuit);
  std::map<std::string, std::size_t> depth;
  for (std::size_t d = 0; d < layers.size(); ++d) {
    for (const auto& v : layers[d]) depth[v] = d;
  }
  Foliation fol;
  for (std::size_t n = 1; n < layers.size(); ++n) {
    std::vector<std::size_t> cut;
    for (std::size_t w = 0; w < circuit.wires.size(); ++w) {
      const auto& wire = circuit.wires[w];
      if (depth[wire.from.instance] < n && n <= depth[wire.to.instance]) cut.push_back(w);
    }
    fol.hypersurfaces.push_back(std::move(cut));
  }
  return fol;
}

std::map<std::string, std::size_t> foliation_slabs(const Fragment& circuit, const Foliation& fol) {
  const std::size_t m = fol.hypersurfaces.size();
  std::vector<std::vector<std::size_t>> member(circuit.wires.size());
  for (std::size_t n = 0; n < m; ++n) {
    for (auto w : fol.hypersurfaces[n]) {
      if (w >= circuit.wires.size()) {
        throw Error(ErrorKind::IncompatibleFoliation, "hypersurface " + std::to_string(n + 1) + " names wire " +
                                                          std::to_string(w) + " which does not exist");
      }
      member[w].push_back(n + 1);
    }
  }
  std::map<std::string, std::size_t> slab;
  auto assign = [&](const std::string& inst, std::size_t s) {
    auto [it, fresh] = slab.emplace(inst, s);
    if (!fresh && it->second != s) {
      throw Error(ErrorKind::IncompatibleFoliation, "instance '" + inst + "' sits between different hypersurfaces");
    }
  };
  for (std::size_t w = 0; w < circuit.wires.size(); ++w) {
    auto& hs = member[w];
    std::sort(hs.begin(), hs.end());
    hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
    if (hs.empty()) throw Error(ErrorKind::IncompatibleFoliation, "wire " + std::to_string(w) + " is in no hypersurface");
    if (hs.back() - hs.front() + 1 != hs.size()) {
      throw Error(ErrorKind::IncompatibleFoliation, "wire " + std::to_string(w) + " skips a hypersurface");
    }
    assign(circuit.wires[w].from.instance, hs.front() - 1);
    assign(circuit.wires[w].to.instance, hs.back());
  }
  for (const auto& [id, _] : circuit.instances) slab.emplace(id, 0);
  return slab;
}

FoliationReport check_foliation(const Fragment& circuit, const Foliation& fol) {
  FoliationReport r;
  std::vector<bool> covered(circuit.wires.size(), false);
  for (const auto& h : fol.hypersurfaces) {
    for (auto w : h) {
      if (w < covered.size()) covered[w] = true;
    }
  }
  for (std::size_t w = 0; w < covered.size(); ++w) {
    if (!covered[w]) {
      r.complete = false;
      r.problems.push_back("wire " + std::to_string(w) + " is in no hypersurface");
    }
  }
  const auto reach = reachability(circuit);
  for (std::size_t n = 0; n < fol.hypersurfaces.size(); ++n) {
    const auto& h = fol.hypersurfaces[n];
    for (auto a : h) {
      for (auto b : h) {
        if (a == b || a >= circuit.wires.size() || b >= circuit.wires.size()) continue;
        const auto& head = circuit.wires[a].to.instance;
        const auto& tail = circuit.wires[b].from.instance;
        if (head == tail || reach.at(head).count(tail)) {
          r.synchronous = false;
          r.problems.push_back("hypersurface " + std::to_string(n + 1) + ": wire " + std::to_string(b) +
                               " is reachable from wire " + std::to_string(a));
        }
      }
    }
  }
  try {
    const auto slabs = foliation_slabs(circuit, fol);
    std::vector<int> count(fol.hypersurfaces.size() + 1, 0);
    for (const auto& [id, s] : slabs) ++count[s];
    for (std::size_t n = 1; n < fol.hypersurfaces.size(); ++n) {
      if (count[n] == 0) {
        r.ordered = false;
        r.problems.push_back("no operation between hypersurfaces " + std::to_string(n) + " and " +
                             std::to_string(n + 1));
      }
    }
  } catch (const Error& e) {
    r.ordered = false;
    r.problems.push_back(e.what());
  }
  return r;
}

}  // namespace duo
