// Command-line front end: subcommand dispatch, config-file parsing with flag
// overrides, validation, and result serialization.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sgflow::cli {

/// Flat key/value config with sections mirroring the module names:
/// [mp_asymptotics], [weak_features], [experiments], [cli]. Unknown sections
/// or keys are rejected with the offending name. Returned keys are
/// "section.key".
std::map<std::string, std::string> parse_config_file(const std::string& path);
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Inverse of parse_config_text: parse(serialize(kv)) == kv for valid keys.
std::string serialize_config(const std::map<std::string, std::string>& kv);

struct GridSpec {
  std::vector<double> values;
  bool is_infinite = false;  // the literal "inf" selects closed-form limits
  bool log_spaced = true;
};

/// Grid syntax: "min:max:points[:log|:lin]" (log default) or "inf".
GridSpec parse_grid(const std::string& spec);

/// Environment variable naming the default output directory.
constexpr const char* kOutputDirEnv = "SGFLOW_OUT";

/// Runs one subcommand. Returns 0 on success, 1 on validation/usage errors,
/// 2 on numerical divergence.
int dispatch(int argc, const char* const* argv);
int dispatch(const std::vector<std::string>& args);

}  // namespace sgflow::cli
