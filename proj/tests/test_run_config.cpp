#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "fbmlab/errors.h"
#include "run_config.h"

using namespace fbmlab;
using namespace fbmlab::cli;

TEST_CASE("config grammar", "[config]") {
  const auto kv = parse_config_text("# plan\nhurst = 0.6, 0.75\n\n  ns=64,128,256   # dyadic\nseed = 42\n");
  CHECK(kv.size() == 3);
  CHECK(kv.at("hurst") == "0.6, 0.75");
  CHECK(kv.at("ns") == "64,128,256");
  CHECK(get_doubles(kv, "hurst", {}) == std::vector<double>{0.6, 0.75});
  CHECK(get_ints(kv, "ns", {}) == std::vector<std::int64_t>{64, 128, 256});
  CHECK(get_int(kv, "seed", 1) == 42);
  CHECK(get_int(kv, "missing", 7) == 7);

  CHECK_THROWS_AS(parse_config_text("a = 1\na = 2\n"), PlanError);
  CHECK_THROWS_AS(parse_config_text("a\n"), PlanError);
  CHECK_THROWS_AS(parse_config_text("a b = 1\n"), PlanError);
  CHECK_THROWS_AS(parse_config_text("a =\n"), PlanError);
  CHECK_THROWS_WITH(parse_config_text("ok = 1\nbad\n"), Catch::Matchers::ContainsSubstring("line 2"));
  CHECK_THROWS_AS(get_double({{"x", "1.5q"}}, "x", 0), PlanError);
  CHECK_THROWS_AS(get_bool({{"x", "maybe"}}, "x", false), PlanError);
}

TEST_CASE("config round trip", "[config]") {
  const KeyValues kv{{"hurst", "0.75"}, {"ns", "64,128,256"}, {"pair", "12"}, {"seed", "9"}};
  CHECK(parse_config_text(format_config(kv)) == kv);
  const auto cfg = make_run_config("rate", std::nullopt, kv, "out");
  const auto again = run_config_from_manifest_text("rate", format_config(cfg.values), "out");
  CHECK(again.values == cfg.values);
  CHECK(again.master_seed == 9);
  CHECK(plan_from_config(again, 1).ns == plan_from_config(cfg, 1).ns);
}

TEST_CASE("unknown keys are listed", "[config]") {
  CHECK_THROWS_WITH(make_run_config("rate", std::nullopt, {{"foo", "1"}, {"bar", "2"}, {"ns", "1"}}, ""),
                    Catch::Matchers::ContainsSubstring("bar, foo"));
  CHECK_THROWS_AS(allowed_keys("plot"), PlanError);
}

TEST_CASE("overrides win over the file", "[config]") {
  const auto path = std::filesystem::temp_directory_path() / "fbmlab_test_plan.cfg";
  std::ofstream(path) << "seed = 3\nreplicates = 10\n";
  const auto cfg = make_run_config("rate", path.string(), {{"seed", "5"}}, "");
  CHECK(cfg.master_seed == 5);
  CHECK(cfg.values.at("replicates") == "10");
  std::filesystem::remove(path);
  CHECK_THROWS_AS(make_run_config("rate", path.string(), {}, ""), PlanError);
}

TEST_CASE("integrand and pair parsing", "[config]") {
  const auto ind = parse_integrand("indicator:0.5", 0.0);
  REQUIRE(ind.atoms().size() == 1);
  CHECK(ind.atoms()[0].location == 0.5);
  CHECK(parse_integrand("zero", 0.0).empty());
  const auto atoms = parse_integrand("atoms:-1@0.5,1@0.25", 0.1);
  CHECK(atoms.atoms().size() == 2);
  CHECK(atoms.base_constant() == 0.1);
  CHECK_THROWS_AS(parse_integrand("atoms:1", 0), PlanError);
  CHECK_THROWS_AS(parse_integrand("smooth", 0), PlanError);
  CHECK(parse_pair("21").i == 2);
  CHECK(parse_pair("21").j == 1);
  CHECK_THROWS_AS(parse_pair("13"), PlanError);
}
