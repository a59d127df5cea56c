// duo: command-line front end for theory files and circuit DSL files.
//
//   duo validate --theory T.json circuit.dsl
//   duo prob     --theory T.json circuit.dsl [--foliate]
//   duo fragment --theory T.json frag.dsl [--colors bbww]
//   duo ratio    --theory T.json frag_i.dsl frag_j.dsl [--rel-tol 1e-8]
//   duo foliate  --theory T.json circuit.dsl
//   duo dot      --theory T.json frag.dsl [--foliate]
//
// Fragment files ending in .json are read as fragment JSON, anything else
// as DSL text. Exit status: 0 success, 1 domain error (JSON object on
// stderr), 2 usage.

#include <CLI11.hpp>
#include <iostream>

#include "duo/backends.hpp"
#include "duo/dsl.hpp"
#include "duo/engine.hpp"
#include "duo/error.hpp"
#include "duo/io.hpp"

namespace {

using duo::io::json;

duo::Fragment load_fragment(const std::string& path, const duo::Theory& theory) {
  const auto text = duo::io::read_file(path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    try {
      return duo::io::fragment_from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw duo::Error(duo::ErrorKind::FormatError, "fragment file '" + path + "': " + e.what());
    }
  }
  return duo::dsl::parse(text, &theory);
}

std::vector<duo::Color> parse_colors(const std::string& spec, std::size_t n) {
  if (spec.size() != n) {
    throw duo::Error(duo::ErrorKind::IndexMismatch, "--colors needs " + std::to_string(n) + " letters, got '" + spec + "'");
  }
  std::vector<duo::Color> out;
  for (char c : spec) {
    if (c == 'b' || c == 'B') {
      out.push_back(duo::Color::Black);
    } else if (c == 'w' || c == 'W') {
      out.push_back(duo::Color::White);
    } else {
      throw duo::Error(duo::ErrorKind::IndexMismatch, std::string("color letter '") + c + "' is not b or w");
    }
  }
  return out;
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"duotensor circuit calculator"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string theory_path;
  app.add_option("--theory", theory_path, "theory JSON file")->required();

  std::string file_a, file_b, colors;
  bool use_foliation = false;
  double rel_tol = 1e-8;

  auto* validate_cmd = app.add_subcommand("validate", "check wiring rules");
  validate_cmd->add_option("fragment", file_a)->required();
  auto* prob_cmd = app.add_subcommand("prob", "probability of a circuit");
  prob_cmd->add_option("circuit", file_a)->required();
  prob_cmd->add_flag("--foliate", use_foliation, "evaluate by state evolution across a foliation");
  auto* frag_cmd = app.add_subcommand("fragment", "compiled duotensor of a fragment");
  frag_cmd->add_option("fragment", file_a)->required();
  frag_cmd->add_option("--colors", colors, "one of b/w per open port, inputs first");
  auto* ratio_cmd = app.add_subcommand("ratio", "well-conditioned ratio test");
  ratio_cmd->add_option("numerator", file_a)->required();
  ratio_cmd->add_option("denominator", file_b)->required();
  ratio_cmd->add_option("--rel-tol", rel_tol, "proportionality tolerance");
  auto* foliate_cmd = app.add_subcommand("foliate", "wave-layer foliation and evolution");
  foliate_cmd->add_option("circuit", file_a)->required();
  auto* dot_cmd = app.add_subcommand("dot", "Graphviz output");
  dot_cmd->add_option("fragment", file_a)->required();
  dot_cmd->add_flag("--foliate", use_foliation, "group instances by foliation slab");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const duo::Theory theory = duo::io::load_theory(theory_path);
    const duo::Fragment f = load_fragment(file_a, theory);

    if (*validate_cmd) {
      const auto rep = duo::validate(f);
      json violations = json::array();
      for (const auto& v : rep.violations) {
        violations.push_back({{"rule", std::string(duo::to_string(v.rule))}, {"message", v.message}});
      }
      print({{"valid", rep.ok()}, {"violations", violations}, {"open_ports", f.open_ports().size()}});
      if (!rep.ok()) duo::require_valid(f);
    } else if (*prob_cmd) {
      const auto compiled = duo::compile_fragment(f, theory);
      if (!f.is_circuit()) throw duo::Error(duo::ErrorKind::InvalidCircuit, "fragment has open ports");
      if (use_foliation) {
        const auto r = duo::evolve_foliation(f, duo::foliate(f), theory);
        print(duo::io::report(r.probability, compiled.provenance, r.padding_count));
      } else {
        print(duo::io::report(compiled.duotensor.scalar_value(), compiled.provenance));
      }
    } else if (*frag_cmd) {
      const auto compiled = duo::compile_fragment(f, theory);
      auto t = compiled.duotensor;
      if (!colors.empty()) t = duo::with_colors(t, parse_colors(colors, t.rank()), theory.metrics());
      json ports = json::object();
      for (const auto& [p, label] : compiled.port_map) ports[duo::to_string(p)] = label;
      print({{"duotensor", duo::io::duotensor_to_json(t)}, {"ports", ports},
             {"plan", duo::io::plan_to_json(compiled.provenance)}});
    } else if (*ratio_cmd) {
      const auto g = load_fragment(file_b, theory);
      const auto verdict = duo::ratio_check(f, g, theory, rel_tol);
      const auto plan = duo::plan_contraction(f, theory);
      std::optional<double> p;
      if (verdict.kind == duo::RatioVerdict::Kind::WellConditioned) p = verdict.k;
      print(duo::io::report(p, plan, std::nullopt, &verdict));
    } else if (*foliate_cmd) {
      const auto fol = duo::foliate(f);
      const auto r = duo::evolve_foliation(f, fol, theory);
      auto j = duo::io::foliation_to_json(f, fol);
      j["padding_count"] = r.padding_count;
      j["probability"] = duo::clamp_probability(r.probability);
      print(j);
    } else if (*dot_cmd) {
      if (use_foliation) {
        const auto fol = duo::foliate(f);
        std::cout << duo::dsl::export_dot(f, &fol);
      } else {
        std::cout << duo::dsl::export_dot(f);
      }
    }
  } catch (const duo::Error& e) {
    std::cerr << duo::io::error_to_json(e).dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "IoError"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
