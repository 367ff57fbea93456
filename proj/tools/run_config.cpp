#include "run_config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fbmlab/errors.h"

namespace fbmlab::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_key(std::string_view k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.emplace_back(trim(item));
  return out;
}

double to_double(const std::string& key, std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw PlanError("key '" + key + "': '" + std::string(text) + "' is not a number");
  return v;
}

std::int64_t to_int(const std::string& key, std::string_view text) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw PlanError("key '" + key + "': '" + std::string(text) + "' is not an integer");
  return v;
}

}  // namespace

KeyValues parse_config_text(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw PlanError(where + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw PlanError(where + ": invalid key '" + std::string(key) + "'");
    if (value.empty()) throw PlanError(where + ": empty value for '" + std::string(key) + "'");
    if (!kv.emplace(std::string(key), std::string(value)).second)
      throw PlanError(where + ": duplicate key '" + std::string(key) + "'");
  }
  return kv;
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PlanError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string format_config(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

void check_known_keys(const KeyValues& kv, const std::set<std::string>& allowed, std::string_view subcommand) {
  std::string unknown;
  for (const auto& [k, v] : kv)
    if (!allowed.contains(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  if (!unknown.empty()) throw PlanError("unknown keys for '" + std::string(subcommand) + "': " + unknown);
}

const std::set<std::string>& allowed_keys(std::string_view subcommand) {
  static const std::map<std::string, std::set<std::string>, std::less<>> keys{
      {"simulate", {"H", "n", "T", "t", "components", "seed", "method"}},
      {"localtime", {"H", "n", "T", "t", "levels", "estimator", "eps", "seed", "paths"}},
      {"rate",
       {"experiment", "hurst", "ns", "t", "integrand", "integrand_base", "pair", "replicates", "max_replicates",
        "auto_scale", "fine_factor", "reference", "level", "budget", "seed"}},
      {"verify-bounds",
       {"suite", "H", "h_grid", "samples", "trials", "configs", "seed", "functional", "a", "a3_ns", "thetas"}},
      {"oracle", {"lemma", "theta", "H", "t", "a", "p"}},
  };
  const auto it = keys.find(subcommand);
  if (it == keys.end()) throw PlanError("unknown subcommand '" + std::string(subcommand) + "'");
  return it->second;
}

RunConfig make_run_config(const std::string& subcommand, const std::optional<std::string>& config_path,
                          const KeyValues& overrides, const std::string& output_dir) {
  RunConfig cfg;
  cfg.subcommand = subcommand;
  cfg.config_path = config_path;
  cfg.output_dir = output_dir;
  if (config_path) cfg.values = read_config_file(*config_path);
  for (const auto& [k, v] : overrides) cfg.values[k] = v;
  check_known_keys(cfg.values, allowed_keys(subcommand), subcommand);
  const std::int64_t seed = get_int(cfg.values, "seed", 1);
  if (seed < 0) throw PlanError("seed must be non-negative");
  cfg.master_seed = static_cast<std::uint64_t>(seed);
  return cfg;
}

RunConfig run_config_from_manifest_text(const std::string& subcommand, std::string_view config_text,
                                        const std::string& output_dir) {
  return make_run_config(subcommand, std::nullopt, parse_config_text(config_text), output_dir);
}

double get_double(const KeyValues& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : to_double(key, it->second);
}

std::int64_t get_int(const KeyValues& kv, const std::string& key, std::int64_t fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : to_int(key, it->second);
}

bool get_bool(const KeyValues& kv, const std::string& key, bool fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw PlanError("key '" + key + "': expected true or false");
}

std::string get_string(const KeyValues& kv, const std::string& key, const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

std::vector<double> get_doubles(const KeyValues& kv, const std::string& key, const std::vector<double>& fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::vector<double> out;
  for (const auto& s : split(it->second, ',')) out.push_back(to_double(key, s));
  return out;
}

std::vector<std::int64_t> get_ints(const KeyValues& kv, const std::string& key,
                                   const std::vector<std::int64_t>& fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::vector<std::int64_t> out;
  for (const auto& s : split(it->second, ',')) out.push_back(to_int(key, s));
  return out;
}

SignedMeasure parse_integrand(const std::string& spec, double base) {
  if (spec == "zero") return SignedMeasure({}, 0.0);
  if (spec.starts_with("indicator:")) return SignedMeasure::indicator_above(to_double("integrand", spec.substr(10)));
  if (spec.starts_with("atoms:")) {
    std::vector<Atom> atoms;
    for (const auto& item : split(spec.substr(6), ',')) {
      const auto at = item.find('@');
      if (at == std::string::npos) throw PlanError("integrand atom '" + item + "' must be loc@mass");
      atoms.push_back({to_double("integrand", item.substr(0, at)), to_double("integrand", item.substr(at + 1))});
    }
    return SignedMeasure(std::move(atoms), base);
  }
  throw PlanError("integrand must be zero, indicator:a or atoms:loc@mass,...");
}

ComponentPair parse_pair(const std::string& spec) {
  if (spec.size() != 2 || (spec[0] != '1' && spec[0] != '2') || (spec[1] != '1' && spec[1] != '2'))
    throw PlanError("pair must be one of 11, 12, 21, 22");
  return {spec[0] - '0', spec[1] - '0'};
}

ExperimentPlan plan_from_config(const RunConfig& cfg, unsigned threads) {
  const auto& kv = cfg.values;
  ExperimentPlan plan;
  plan.hurst = get_doubles(kv, "hurst", plan.hurst);
  plan.ns = get_ints(kv, "ns", plan.ns);
  plan.t = get_double(kv, "t", plan.t);
  plan.integrand = parse_integrand(get_string(kv, "integrand", "indicator:0"), get_double(kv, "integrand_base", 0.5));
  plan.pair = parse_pair(get_string(kv, "pair", "11"));
  const auto reps = get_int(kv, "replicates", static_cast<std::int64_t>(plan.replicates));
  const auto max_reps = get_int(kv, "max_replicates", static_cast<std::int64_t>(plan.max_replicates));
  if (reps < 0 || max_reps < 0) throw PlanError("replicate counts must be non-negative");
  plan.replicates = static_cast<std::size_t>(reps);
  plan.max_replicates = static_cast<std::size_t>(max_reps);
  plan.auto_scale = get_bool(kv, "auto_scale", plan.auto_scale);
  plan.fine_factor = get_int(kv, "fine_factor", plan.fine_factor);
  plan.reference = reference_kind_from_string(get_string(kv, "reference", to_string(plan.reference)));
  plan.level = get_double(kv, "level", plan.level);
  plan.budget = get_double(kv, "budget", plan.budget);
  plan.master_seed = cfg.master_seed;
  plan.threads = threads;
  plan.validate();
  return plan;
}

}  // namespace fbmlab::cli
