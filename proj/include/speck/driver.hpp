#pragma once

// Command drivers shared by the command-line tool and the test suites.
// Exit codes: 0 ok, 1 counterexample, 2 user error, 3 resource/internal.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "speck/check.hpp"
#include "speck/consequences.hpp"
#include "speck/elaborate.hpp"
#include "speck/format.hpp"
#include "speck/model_bridge.hpp"
#include "speck/parser.hpp"

namespace speck {

struct RunConfig {
  std::vector<std::string> inputs;
  std::string module;
  std::map<std::string, int> depths;
  std::map<std::string, int> carriers;
  long fuel = 10000;
  bool json = false;
};

namespace driver_detail {

inline std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<std::string> here;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.path().extension() == ".spec") here.push_back(entry.path().string());
      }
      std::sort(here.begin(), here.end());
      files.insert(files.end(), here.begin(), here.end());
    } else {
      files.push_back(in);
    }
  }
  return files;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("io-error", "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct LoadedFiles {
  std::vector<std::pair<std::string, RawSpecFile>> files;
};

inline LoadedFiles load(const std::vector<std::string>& inputs) {
  LoadedFiles out;
  for (const auto& path : expand_inputs(inputs)) {
    out.files.push_back({path, parse_source(read_file(path))});
  }
  return out;
}

}  // namespace driver_detail

inline int cmd_parse(const std::vector<std::string>& inputs, std::ostream& out,
                     std::ostream& err) {
  try {
    auto loaded = driver_detail::load(inputs);
    int defs = 0;
    for (const auto& [path, file] : loaded.files) defs += static_cast<int>(file.defs.size());
    out << "parsed " << loaded.files.size() << " file(s), " << defs << " definition(s)\n";
    return 0;
  } catch (const SpecError& e) {
    err << e.diag.render() << "\n";
    return e.diag.code == "io-error" ? 3 : 2;
  }
}

inline int cmd_elab(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    auto loaded = driver_detail::load(config.inputs);
    Elaborator elab;
    for (const auto& [path, file] : loaded.files) elab.add_file(file);
    FlatSpec flat = elab.resolve(config.module);
    out << flat.dump();
    return 0;
  } catch (const SpecError& e) {
    err << e.diag.render() << "\n";
    return e.diag.code == "io-error" ? 3 : 2;
  }
}

inline CarrierConfig make_carrier_config(const RunConfig& config) {
  CarrierConfig cc;
  cc.fuel = config.fuel;
  cc.bounds = config.depths;
  cc.carriers = config.carriers;
  // Son-list universes grow as trees^length; keep their default a notch
  // below the plain sequence bound.
  if (!cc.bounds.count("treeseq")) cc.bounds["treeseq"] = 3;
  return cc;
}

inline void print_report(const CheckReport& r, bool json, std::ostream& out) {
  if (json) {
    nlohmann::json j;
    j["axiom_id"] = r.axiom_id;
    j["module"] = r.module;
    j["verdict"] = verdict_name(r.verdict);
    j["depth"] = r.depth;
    j["enumerated"] = r.enumerated;
    if (!r.bindings.empty()) {
      nlohmann::json b = nlohmann::json::object();
      for (const auto& [var, val] : r.bindings) b[var] = val;
      j["bindings"] = b;
    }
    if (!r.detail.empty()) j["detail"] = r.detail;
    out << j.dump() << "\n";
    return;
  }
  out << "[" << verdict_name(r.verdict) << "] " << r.axiom_id << " depth=" << r.depth
      << " enumerated=" << r.enumerated;
  if (!r.bindings.empty()) {
    out << " where";
    for (const auto& [var, val] : r.bindings) out << " " << var << "=" << val;
  }
  if (!r.detail.empty()) out << " (" << r.detail << ")";
  out << "\n";
}

inline int exit_code_for(const CheckRun& run) {
  if (run.has(Verdict::Counterexample)) return 1;
  if (run.has(Verdict::FuelExhausted)) return 3;
  return 0;
}

// Builds the event-handler model population for specs that contain the
// runtime-tree sort. The population bound defaults to 2 handlers and follows
// --depth EHSystem=N.
inline std::vector<eh::EHTree> default_population(const RunConfig& config) {
  PopulationOptions pop;
  auto it = config.depths.find("EHSystem");
  pop.max_handlers = it != config.depths.end() ? it->second : 2;
  auto id = config.carriers.find("Id");
  pop.id_count = id != config.carriers.end() ? id->second : 3;
  pop.injective_ids = true;
  return generate_population(pop);
}

inline int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    auto loaded = driver_detail::load(config.inputs);
    Elaborator elab;
    for (const auto& [path, file] : loaded.files) elab.add_file(file);
    FlatSpec flat = elab.resolve(config.module);
    RuleSet rules = orient(flat);
    CarrierConfig cc = make_carrier_config(config);
    ValueStore store;

    std::optional<EhBinding> model;
    if (flat.sig.has_sort("EHSystem")) {
      model.emplace(bind_model(flat, store, default_population(config), cc));
    }
    auto consequences = consequences_for(flat);
    CheckRun run = check_spec(flat, rules, cc, store, model ? &model->binding : nullptr,
                              consequences);
    for (const auto& r : run.reports) print_report(r, config.json, out);
    return exit_code_for(run);
  } catch (const OverlappingRules& e) {
    err << "overlapping-rules: " << e.message << "\n";
    return 3;
  } catch (const SpecError& e) {
    err << e.diag.render() << "\n";
    return e.diag.code == "io-error" ? 3 : 2;
  }
}

inline int cmd_demo(const std::string& scenario, bool json, std::ostream& out, std::ostream& err) {
  if (scenario != "fig2-quit") {
    err << "unknown scenario '" << scenario << "' (available: fig2-quit)\n";
    return 2;
  }
  eh::EHTree tree = eh::fig2();
  eh::Point pt{7, 3};  // inside the second button
  eh::Path window{1, 1};
  eh::Path down = eh::dispatch_event(tree, window, pt);
  std::vector<eh::Handler> up = eh::route_command(tree, down, "Application");
  if (json) {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["tree"] = eh::print_tree(tree);
    j["event_at"] = {pt.x, pt.y};
    j["downward_path"] = down;
    nlohmann::json chain = nlohmann::json::array();
    for (const auto& h : up) chain.push_back(h.cls);
    j["upward_chain"] = chain;
    j["valid"] = eh::valid_app_ehs(tree, eh::point_grid(4));
    out << j.dump() << "\n";
  } else {
    out << "tree: " << eh::print_tree(tree) << "\n";
    out << "event at (" << pt.x << "," << pt.y << "): downward path " << eh::print_path(down)
        << "\n";
    out << "upward chain:";
    for (const auto& h : up) out << " " << h.cls << "(" << h.id << ")";
    out << "\n";
  }
  return 0;
}

}  // namespace speck
