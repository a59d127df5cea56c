#include "duo/io.hpp"

#include <fstream>
#include <sstream>

#include "duo/error.hpp"

namespace duo::io {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::FormatError, msg); }

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where + ": missing \"" + key + "\"");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where + ": expected a number");
  return j.get<double>();
}

std::complex<double> complex_entry(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {number(j[0], where), number(j[1], where)};
  bad(where + ": expected a number or [re, im]");
}

Eigen::MatrixXd real_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) bad(where + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad(where + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(row[static_cast<std::size_t>(c)], where);
  }
  return m;
}

Eigen::MatrixXcd complex_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) bad(where + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) bad(where + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_entry(row[static_cast<std::size_t>(c)], where);
  }
  return m;
}

Eigen::VectorXd real_vector(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], where);
  return v;
}

json complex_matrix_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

json real_matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> names(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where + ": expected an array of type names");
  std::vector<std::string> out;
  for (const auto& x : j) {
    if (!x.is_string()) bad(where + ": expected a type name");
    out.push_back(x.get<std::string>());
  }
  return out;
}

Backend backend_named(const json& j, const std::string& where) {
  if (j == "classical") return Backend::Classical;
  if (j == "quantum") return Backend::Quantum;
  bad(where + ": backend must be \"classical\" or \"quantum\"");
}

Endpoint endpoint(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_number_integer()) {
    bad(where + ": endpoint must be [instance, slot]");
  }
  return {j[0].get<std::string>(), j[1].get<int>()};
}

}  // namespace

Theory theory_from_json(const json& j) {
  const auto& types = field(j, "types", "theory");
  if (!types.is_object() || types.empty()) bad("theory: \"types\" must be a non-empty object");
  std::optional<Backend> backend;
  for (const auto& [name, t] : types.items()) {
    const auto b = backend_named(field(t, "backend", "type " + name), "type " + name);
    if (backend && *backend != b) bad("theory: types mix classical and quantum backends");
    backend = b;
  }
  Theory theory(*backend);
  for (const auto& [name, t] : types.items()) {
    const std::string where = "type " + name;
    const auto& dim = field(t, "dim", where);
    if (!dim.is_number_integer() || dim.get<int>() < 1) bad(where + ": dim must be a positive integer");
    std::optional<FiducialElements> fid;
    if (t.contains("fiducials") && t.at("fiducials") != "default") {
      const auto& f = t.at("fiducials");
      const auto& preps = field(f, "preparations", where);
      const auto& effects = field(f, "effects", where);
      if (!preps.is_array() || !effects.is_array()) bad(where + ": fiducial lists must be arrays");
      if (*backend == Backend::Classical) {
        ClassicalFiducials c;
        for (const auto& p : preps) c.preparations.push_back(real_vector(p, where));
        for (const auto& e : effects) c.effects.push_back(real_vector(e, where));
        fid = c;
      } else {
        QuantumFiducials q;
        for (const auto& p : preps) q.preparations.push_back(complex_matrix(p, where));
        for (const auto& e : effects) q.effects.push_back(complex_matrix(e, where));
        fid = q;
      }
    }
    theory.register_type(name, dim.get<int>(), fid);
  }
  if (j.contains("operations")) {
    const auto& ops = j.at("operations");
    if (!ops.is_object()) bad("theory: \"operations\" must be an object");
    for (const auto& [id, o] : ops.items()) {
      const std::string where = "operation " + id;
      OperationDecl d;
      d.apparatus_id = id;
      if (o.contains("setting")) d.setting = o.at("setting").get<std::string>();
      d.input_types = o.contains("inputs") ? names(o.at("inputs"), where) : std::vector<std::string>{};
      d.output_types = o.contains("outputs") ? names(o.at("outputs"), where) : std::vector<std::string>{};
      const auto& outcomes = field(o, "outcomes", where);
      if (!outcomes.is_object() || outcomes.empty()) bad(where + ": \"outcomes\" must be a non-empty object");
      for (const auto& [label, data] : outcomes.items()) {
        const std::string w = where + " outcome " + label;
        if (data.contains("classical_matrix")) {
          d.outcomes[label] = ClassicalOperation{d.input_types, d.output_types, real_matrix(data.at("classical_matrix"), w)};
        } else if (data.contains("kraus")) {
          QuantumOperation q{d.input_types, d.output_types, {}};
          if (!data.at("kraus").is_array()) bad(w + ": \"kraus\" must be an array of matrices");
          for (const auto& k : data.at("kraus")) q.kraus.push_back(complex_matrix(k, w));
          d.outcomes[label] = std::move(q);
        } else {
          bad(w + ": needs \"classical_matrix\" or \"kraus\"");
        }
      }
      theory.declare_operation(std::move(d));
    }
  }
  return theory;
}

json theory_to_json(const Theory& theory) {
  json types = json::object();
  for (const auto& [name, t] : theory.types()) {
    json f = json::object();
    const auto& elements = theory.fiducials(name).elements;
    if (const auto* c = std::get_if<ClassicalFiducials>(&elements)) {
      f["preparations"] = json::array();
      f["effects"] = json::array();
      for (const auto& p : c->preparations) f["preparations"].push_back(std::vector<double>(p.data(), p.data() + p.size()));
      for (const auto& e : c->effects) f["effects"].push_back(std::vector<double>(e.data(), e.data() + e.size()));
    } else {
      const auto& q = std::get<QuantumFiducials>(elements);
      f["preparations"] = json::array();
      f["effects"] = json::array();
      for (const auto& p : q.preparations) f["preparations"].push_back(complex_matrix_json(p));
      for (const auto& e : q.effects) f["effects"].push_back(complex_matrix_json(e));
    }
    types[name] = {{"backend", std::string(to_string(theory.backend()))}, {"dim", t.backend_dim}, {"fiducials", f}};
  }
  json ops = json::object();
  for (const auto& [id, d] : theory.operations()) {
    json outcomes = json::object();
    for (const auto& [label, op] : d.outcomes) {
      if (const auto* c = std::get_if<ClassicalOperation>(&op)) {
        outcomes[label] = {{"classical_matrix", real_matrix_json(c->z)}};
      } else {
        json ks = json::array();
        for (const auto& k : std::get<QuantumOperation>(op).kraus) ks.push_back(complex_matrix_json(k));
        outcomes[label] = {{"kraus", ks}};
      }
    }
    json o = {{"inputs", d.input_types}, {"outputs", d.output_types}, {"outcomes", outcomes}};
    if (!d.setting.empty()) o["setting"] = d.setting;
    ops[id] = std::move(o);
  }
  return {{"types", types}, {"operations", ops}};
}

Fragment fragment_from_json(const json& j) {
  Fragment f;
  const auto& inst = field(j, "instances", "fragment");
  if (!inst.is_object()) bad("fragment: \"instances\" must be an object");
  for (const auto& [id, s] : inst.items()) {
    const std::string where = "instance " + id;
    OperationSpec spec;
    const auto& app = field(s, "apparatus", where);
    if (!app.is_string()) bad(where + ": apparatus must be a string");
    spec.apparatus_id = app.get<std::string>();
    if (s.contains("outcome")) spec.outcome_label = s.at("outcome").get<std::string>();
    if (s.contains("setting")) spec.setting = s.at("setting").get<std::string>();
    if (s.contains("inputs")) spec.input_types = names(s.at("inputs"), where);
    if (s.contains("outputs")) spec.output_types = names(s.at("outputs"), where);
    f.add(id, std::move(spec));
  }
  if (j.contains("wires")) {
    if (!j.at("wires").is_array()) bad("fragment: \"wires\" must be an array");
    for (const auto& w : j.at("wires")) f.connect(endpoint(field(w, "from", "wire"), "wire"), endpoint(field(w, "to", "wire"), "wire"));
  }
  return f;
}

json fragment_to_json(const Fragment& f) {
  json inst = json::object();
  for (const auto& [id, s] : f.instances) {
    inst[id] = {{"apparatus", s.apparatus_id}, {"outcome", s.outcome_label}, {"setting", s.setting},
                {"inputs", s.input_types},     {"outputs", s.output_types}};
  }
  json wires = json::array();
  for (const auto& w : f.wires) {
    wires.push_back({{"from", {w.from.instance, w.from.slot}}, {"to", {w.to.instance, w.to.slot}}});
  }
  return {{"instances", inst}, {"wires", wires}};
}

Duotensor duotensor_from_json(const json& j) {
  std::vector<IndexMeta> idx;
  const auto& indices = field(j, "indices", "duotensor");
  if (!indices.is_array()) bad("duotensor: \"indices\" must be an array");
  for (const auto& i : indices) {
    IndexMeta m;
    m.label = field(i, "label", "index").get<std::string>();
    const auto dir = field(i, "direction", "index");
    if (dir == "input") {
      m.direction = Direction::Input;
    } else if (dir == "output") {
      m.direction = Direction::Output;
    } else {
      bad("index " + m.label + ": direction must be \"input\" or \"output\"");
    }
    m.type_name = field(i, "type", "index").get<std::string>();
    const auto color = field(i, "color", "index");
    if (color == "black") {
      m.color = Color::Black;
    } else if (color == "white") {
      m.color = Color::White;
    } else {
      bad("index " + m.label + ": color must be \"black\" or \"white\"");
    }
    const auto& dim = field(i, "dim", "index");
    if (!dim.is_number_integer() || dim.get<int>() < 1) bad("index " + m.label + ": dim must be a positive integer");
    m.dim = dim.get<int>();
    idx.push_back(std::move(m));
  }
  const auto& values = field(j, "values", "duotensor");
  if (!values.is_array()) bad("duotensor: \"values\" must be an array");
  std::vector<double> v;
  for (const auto& x : values) v.push_back(number(x, "duotensor values"));
  return Duotensor(std::move(idx), std::move(v));
}

json duotensor_to_json(const Duotensor& t) {
  json idx = json::array();
  for (const auto& i : t.indices()) {
    idx.push_back({{"label", i.label},
                   {"direction", i.direction == Direction::Input ? "input" : "output"},
                   {"type", i.type_name},
                   {"color", i.color == Color::Black ? "black" : "white"},
                   {"dim", i.dim}});
  }
  return {{"indices", idx}, {"values", t.values()}};
}

json foliation_to_json(const Fragment& circuit, const Foliation& fol) {
  json hs = json::array();
  for (const auto& h : fol.hypersurfaces) {
    json wires = json::array();
    for (auto w : h) {
      const auto& wire = circuit.wires.at(w);
      wires.push_back({{"index", w},
                       {"from", port_label(wire.from.instance, Direction::Output, wire.from.slot)},
                       {"to", port_label(wire.to.instance, Direction::Input, wire.to.slot)}});
    }
    hs.push_back(std::move(wires));
  }
  return {{"hypersurfaces", hs}};
}

Foliation foliation_from_json(const json& j) {
  Foliation fol;
  const auto& hs = field(j, "hypersurfaces", "foliation");
  if (!hs.is_array()) bad("foliation: \"hypersurfaces\" must be an array");
  for (const auto& h : hs) {
    if (!h.is_array()) bad("foliation: each hypersurface must be an array");
    std::vector<std::size_t> wires;
    for (const auto& w : h) {
      if (w.is_number_unsigned() || w.is_number_integer()) {
        if (w.get<long>() < 0) bad("foliation: negative wire index");
        wires.push_back(w.get<std::size_t>());
      } else if (w.is_object() && w.contains("index")) {
        wires.push_back(w.at("index").get<std::size_t>());
      } else {
        bad("foliation: wires are given by index");
      }
    }
    fol.hypersurfaces.push_back(std::move(wires));
  }
  return fol;
}

json plan_to_json(const ContractionPlan& plan) {
  json steps = json::array();
  for (const auto& s : plan.steps) {
    steps.push_back({{"left", s.left_instances}, {"right", s.right_instances}, {"size", s.result_size}});
  }
  return {{"instances", plan.instances}, {"steps", steps}, {"cost", plan.cost()}};
}

json report(std::optional<double> probability, const ContractionPlan& plan, std::optional<int> padding_count,
            const RatioVerdict* verdict) {
  json r = json::object();
  r["probability"] = probability ? json(clamp_probability(*probability)) : json(nullptr);
  r["plan"] = plan_to_json(plan);
  if (padding_count) r["padding_count"] = *padding_count;
  if (verdict) {
    r["verdict"] = std::string(to_string(verdict->kind));
    if (verdict->kind == RatioVerdict::Kind::WellConditioned) r["k"] = verdict->k;
    if (!verdict->reason.empty()) r["reason"] = verdict->reason;
  }
  return r;
}

json error_to_json(const Error& e) {
  json j = {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
  if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
    j["line"] = p->line();
    j["column"] = p->column();
  }
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Theory load_theory(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    bad("theory file '" + path + "': " + e.what());
  }
  try {
    return theory_from_json(j);
  } catch (const json::exception& e) {
    bad("theory file '" + path + "': " + e.what());
  }
}

}  // namespace duo::io
