// speck: parse, elaborate, and exhaustively check algebraic specifications,
// and run the event-handling demo scenarios.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "speck/driver.hpp"

namespace {

bool parse_assignments(const std::vector<std::string>& raw, std::map<std::string, int>& out,
                       const std::string& flag) {
  for (const auto& item : raw) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << flag << " expects SORT=N, got '" << item << "'\n";
      return false;
    }
    try {
      out[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
    } catch (...) {
      std::cerr << flag << " expects SORT=N, got '" << item << "'\n";
      return false;
    }
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"algebraic specification checker"};
  app.require_subcommand(1);

  std::vector<std::string> inputs;
  std::string module;
  std::vector<std::string> depth_args, carrier_args;
  long fuel = 10000;
  std::string format = "text";
  std::string scenario;

  CLI::App* parse = app.add_subcommand("parse", "tokenize and parse specification files");
  parse->add_option("files", inputs, "files or directories")->required();

  CLI::App* elab = app.add_subcommand("elab", "flatten a specification module");
  elab->add_option("files", inputs, "files or directories")->required();
  elab->add_option("--module", module, "module to elaborate")->required();

  CLI::App* check = app.add_subcommand("check", "check all axioms at bounded depth");
  check->add_option("files", inputs, "files or directories")->required();
  check->add_option("--module", module, "module to check")->required();
  check->add_option("--depth", depth_args, "per-sort generation bound, SORT=N (repeatable)");
  check->add_option("--carrier", carrier_args, "per-opaque-sort atom count, SORT=N (repeatable)");
  check->add_option("--fuel", fuel, "rewrite step budget per obligation");
  check->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

  CLI::App* demo = app.add_subcommand("demo", "run a built-in event-handling scenario");
  demo->add_option("scenario", scenario, "scenario name")->required();
  demo->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

  CLI11_PARSE(app, argc, argv);

  if (parse->parsed()) return speck::cmd_parse(inputs, std::cout, std::cerr);

  speck::RunConfig config;
  config.inputs = inputs;
  config.module = module;
  config.fuel = fuel;
  config.json = format == "json";
  if (!parse_assignments(depth_args, config.depths, "--depth")) return 2;
  if (!parse_assignments(carrier_args, config.carriers, "--carrier")) return 2;

  if (elab->parsed()) return speck::cmd_elab(config, std::cout, std::cerr);
  if (check->parsed()) return speck::cmd_check(config, std::cout, std::cerr);
  if (demo->parsed()) return speck::cmd_demo(scenario, config.json, std::cout, std::cerr);
  return 2;
}
