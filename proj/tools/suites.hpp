#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gie/errors.hpp"

namespace gie {

struct ConfigInvalid : Error {
  using Error::Error;
};

struct SuiteReport {
  nlohmann::json results = nlohmann::json::object();
  nlohmann::json checks = nlohmann::json::array();
  bool pass = true;
  // extra tables keyed by file suffix, e.g. "history.csv"
  std::vector<std::pair<std::string, std::string>> tables;

  // value must satisfy value <= limit (or >= when `at_least`)
  void check(const std::string& name, double value, double limit, bool at_least = false);
  void check_bool(const std::string& name, bool ok);
};

// the CLI commands plus "mollifier", which only the acceptance run uses
const std::vector<std::string>& suite_names();
bool is_cli_command(const std::string& name);

// merge params over the suite defaults; unknown keys or wrong types throw ConfigInvalid
nlohmann::json resolve_parameters(const std::string& suite, const nlohmann::json& params);

SuiteReport run_suite(const std::string& suite, const nlohmann::json& resolved, unsigned seed);

}  // namespace gie
