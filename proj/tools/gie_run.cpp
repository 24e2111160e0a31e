// Runs one experiment suite from a JSON config and writes its report.
//
//   gie-run --config run.json --output reports [--seed N] [--force-overwrite]
//   gie-run solid-angle --output reports
//
// Config: {"command": ..., "parameters": {...}, "seed": N, "output_path": dir}.
// Exit codes: 0 all checks pass, 1 a check failed, 2 invalid config.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "suites.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gie::ConfigInvalid("cannot read config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw gie::ConfigInvalid(std::string("config is not valid JSON: ") + e.what());
  }
}

void write_file(const fs::path& p, const std::string& text) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gie-run: experiment runner"};
  std::string command, config_path, output;
  std::optional<long long> seed_flag;
  bool force = false, list = false;
  app.add_option("command", command, "suite to run; must match the config if both are given");
  app.add_option("--config", config_path, "JSON run config");
  app.add_option("--output", output, "report directory");
  app.add_option("--seed", seed_flag, "random seed");
  app.add_flag("--force-overwrite", force, "replace existing reports");
  app.add_flag("--list", list, "list commands and their default parameters");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (list) {
    for (const auto& s : gie::suite_names())
      if (gie::is_cli_command(s)) std::cout << s << ' ' << gie::resolve_parameters(s, nullptr).dump() << '\n';
    return 0;
  }

  json resolved;
  fs::path json_path;
  std::vector<fs::path> table_paths;
  unsigned seed = 0;
  try {
    json cfg = config_path.empty() ? json::object() : read_config(config_path);
    if (!cfg.is_object()) throw gie::ConfigInvalid("config must be a JSON object");
    for (const auto& [key, _] : cfg.items())
      if (key != "command" && key != "parameters" && key != "seed" && key != "output_path")
        throw gie::ConfigInvalid("unknown config key: " + key);
    if (cfg.contains("command")) {
      if (!cfg["command"].is_string()) throw gie::ConfigInvalid("command must be a string");
      if (!command.empty() && command != cfg["command"].get<std::string>())
        throw gie::ConfigInvalid("command on the command line differs from the config");
      command = cfg["command"].get<std::string>();
    }
    if (command.empty()) throw gie::ConfigInvalid("no command given");
    if (!gie::is_cli_command(command)) throw gie::ConfigInvalid("unknown command: " + command);

    long long s = 1;
    if (cfg.contains("seed")) {
      if (!cfg["seed"].is_number_integer()) throw gie::ConfigInvalid("seed must be an integer");
      s = cfg["seed"].get<long long>();
    }
    if (seed_flag) s = *seed_flag;
    if (s < 0 || s > 0xffffffffLL) throw gie::ConfigInvalid("seed must fit in 32 bits");
    seed = static_cast<unsigned>(s);

    if (output.empty() && cfg.contains("output_path")) {
      if (!cfg["output_path"].is_string()) throw gie::ConfigInvalid("output_path must be a string");
      output = cfg["output_path"].get<std::string>();
    }
    if (output.empty()) output = ".";

    json params = cfg.contains("parameters") ? cfg["parameters"] : json(nullptr);
    resolved = {{"command", command},
                {"parameters", gie::resolve_parameters(command, params)},
                {"seed", seed},
                {"output_path", output}};

    const std::string stem = command + "-seed" + std::to_string(seed);
    json_path = fs::path(output) / (stem + ".json");
    if (command == "convergence")
      for (const char* suffix : {"history.csv", "table.csv"}) table_paths.push_back(fs::path(output) / (stem + "." + suffix));
    if (!force) {
      if (fs::exists(json_path)) throw gie::ConfigInvalid(json_path.string() + " exists; pass --force-overwrite");
      for (const auto& p : table_paths)
        if (fs::exists(p)) throw gie::ConfigInvalid(p.string() + " exists; pass --force-overwrite");
    }
  } catch (const gie::ConfigInvalid& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  }

  json report = {{"command", command}, {"seed", seed}, {"config", resolved}};
  gie::SuiteReport r;
  try {
    r = gie::run_suite(command, resolved["parameters"], seed);
  } catch (const gie::ConfigInvalid& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    r.pass = false;
    report["error"] = e.what();
  }
  report["results"] = r.results;
  report["checks"] = r.checks;
  report["pass"] = r.pass;

  try {
    fs::create_directories(output);
    std::vector<std::string> names;
    for (const auto& [suffix, text] : r.tables) {
      fs::path p = json_path;
      p.replace_extension(suffix);
      write_file(p, text);
      names.push_back(p.filename().string());
    }
    if (!names.empty()) report["tables"] = names;
    write_file(json_path, report.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "cannot write report: " << e.what() << '\n';
    return 1;
  }

  for (const auto& c : r.checks)
    std::cout << (c["pass"].get<bool>() ? "pass  " : "FAIL  ") << c["name"].get<std::string>()
              << (c.contains("value") ? "  " + c["value"].dump() : "") << '\n';
  if (report.contains("error")) std::cout << "error: " << report["error"].get<std::string>() << '\n';
  std::cout << (r.pass ? "PASS" : "FAIL") << "  " << json_path.string() << '\n';
  return r.pass ? 0 : 1;
}
