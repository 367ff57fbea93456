#pragma once

// Flat `key = value` run configuration shared by the fbmlab subcommands.
//
// Grammar: one `key = value` per line; `#` starts a comment; blank lines are
// ignored; keys are [A-Za-z0-9_]+; values are trimmed and may not be empty.
// Lists are comma separated. CLI flags override file values.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fbmlab/bound_lab.h"
#include "fbmlab/mc_harness.h"
#include "fbmlab/path_integrals.h"

namespace fbmlab::cli {

using KeyValues = std::map<std::string, std::string>;

/// Throws PlanError naming the offending line.
KeyValues parse_config_text(std::string_view text);
KeyValues read_config_file(const std::filesystem::path& path);
/// Sorted `key = value` lines; parse_config_text(format_config(kv)) == kv.
std::string format_config(const KeyValues& kv);

/// Throws PlanError listing every key not in `allowed`.
void check_known_keys(const KeyValues& kv, const std::set<std::string>& allowed, std::string_view subcommand);

struct RunConfig {
  std::string subcommand;
  std::optional<std::string> config_path;
  KeyValues values;  // file values with overrides applied
  std::string output_dir;
  std::uint64_t master_seed = 1;
};

/// Allowed keys per subcommand. Throws PlanError for an unknown subcommand.
const std::set<std::string>& allowed_keys(std::string_view subcommand);

/// Reads the file (if any), applies overrides, validates keys, resolves the seed.
RunConfig make_run_config(const std::string& subcommand, const std::optional<std::string>& config_path,
                          const KeyValues& overrides, const std::string& output_dir);

/// Re-parses a manifest's config text into an equivalent RunConfig.
RunConfig run_config_from_manifest_text(const std::string& subcommand, std::string_view config_text,
                                        const std::string& output_dir);

// Typed access; each throws PlanError on malformed values.
double get_double(const KeyValues& kv, const std::string& key, double fallback);
std::int64_t get_int(const KeyValues& kv, const std::string& key, std::int64_t fallback);
bool get_bool(const KeyValues& kv, const std::string& key, bool fallback);
std::string get_string(const KeyValues& kv, const std::string& key, const std::string& fallback);
std::vector<double> get_doubles(const KeyValues& kv, const std::string& key, const std::vector<double>& fallback);
std::vector<std::int64_t> get_ints(const KeyValues& kv, const std::string& key,
                                   const std::vector<std::int64_t>& fallback);

/// `zero`, `indicator:a`, or `atoms:loc@mass,loc@mass,...` (base constant from integrand_base).
SignedMeasure parse_integrand(const std::string& spec, double base);

/// "11", "12", "21" or "22".
ComponentPair parse_pair(const std::string& spec);

/// Plan for the `rate` subcommand.
ExperimentPlan plan_from_config(const RunConfig& cfg, unsigned threads);

}  // namespace fbmlab::cli
