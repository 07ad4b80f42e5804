#include "delaychain/config.hpp"

#include <sstream>

#include "delaychain/csv.hpp"
#include "delaychain/errors.hpp"
#include "doctest.h"

using namespace delaychain;

TEST_CASE("key-value parsing") {
  std::istringstream in(
      "# delaychain simulate\n"
      "# system = mackey-glass\n"
      "T = 17.5\n"
      "N = 500\n"
      "\n"
      "t,x0,xN\n"
      "0.5,0.9,0.9\n");
  const auto cfg = KeyValueConfig::parse(in);
  CHECK(cfg.get_string("system") == "mackey-glass");
  CHECK(cfg.get_double("T") == 17.5);
  CHECK(cfg.get_int("N") == 500);
  CHECK_FALSE(cfg.has("t"));
}

TEST_CASE("unknown keys are rejected") {
  KeyValueConfig cfg;
  cfg.set("system", "linear");
  cfg.set("bogus", "1");
  CHECK_THROWS_AS(cfg.require_known({"system"}), ConfigError);
  CHECK_NOTHROW(cfg.require_known({"system", "bogus"}));
}

TEST_CASE("defaults do not override explicit values") {
  KeyValueConfig cfg;
  cfg.set("dt", "0.005");
  cfg.set_default("dt", "0.01");
  cfg.set_default("seed", "1");
  CHECK(cfg.get_double("dt") == 0.005);
  CHECK(cfg.get_int("seed") == 1);
}

TEST_CASE("number parsing rejects trailing garbage") {
  CHECK_THROWS_AS(parse_double("1.5x", "k"), ConfigError);
  CHECK_THROWS_AS(parse_int("7.2", "k"), ConfigError);
  CHECK(parse_double(" 2.25 ", "k") == 2.25);
}

TEST_CASE("system resolution from configuration") {
  SUBCASE("mackey-glass with a chain order") {
    KeyValueConfig cfg;
    cfg.set("system", "mackey-glass");
    cfg.set("T", "17.5");
    cfg.set("N", "500");
    const auto sc = system_from_config(cfg);
    CHECK_FALSE(sc.use_dde);
    CHECK(sc.orders == std::vector<int>{500});
    CHECK(sc.system.delays.size() == 1);
    CHECK(sc.system.delays[0].delay == 17.5);
    CHECK(sc.system.params.at("gamma") == 10.0);
  }
  SUBCASE("sharp-delay mode") {
    KeyValueConfig cfg;
    cfg.set("T", "14");
    cfg.set("N", "dde");
    const auto sc = system_from_config(cfg);
    CHECK(sc.use_dde);
  }
  SUBCASE("linear with explicit coefficients") {
    KeyValueConfig cfg;
    cfg.set("system", "linear");
    cfg.set("a", "0.4");
    cfg.set("b", "0.1");
    cfg.set("T", "5");
    cfg.set("N", "10");
    const auto sc = system_from_config(cfg);
    CHECK(sc.system.params.at("a") == 0.4);
  }
  SUBCASE("multi-delay with weights and per-delay orders") {
    KeyValueConfig cfg;
    cfg.set("system", "linear");
    cfg.set("a", "0.4");
    cfg.set("b", "0.1");
    cfg.set("delays", "10, 20");
    cfg.set("weights", "0.5, 0.5");
    cfg.set("N", "40, 60");
    const auto sc = system_from_config(cfg);
    CHECK(sc.orders == std::vector<int>({40, 60}));
    CHECK(sc.system.delays[1].weight == 0.5);
  }
  SUBCASE("weight count mismatch") {
    KeyValueConfig cfg;
    cfg.set("system", "linear");
    cfg.set("a", "0.4");
    cfg.set("b", "0.1");
    cfg.set("delays", "10, 20");
    cfg.set("weights", "1");
    CHECK_THROWS_AS(system_from_config(cfg), ConfigError);
  }
  SUBCASE("unknown system") {
    KeyValueConfig cfg;
    cfg.set("system", "lorenz");
    cfg.set("T", "1");
    CHECK_THROWS_AS(system_from_config(cfg), ConfigError);
  }
}

TEST_CASE("shortest round-trip double formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(17.5) == "17.5");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  const double v = 4.708196289360753;
  CHECK(parse_double(format_double(v), "roundtrip") == v);
}
