#include "laycon/config.hpp"

#include <fstream>
#include <string>

#include <gtest/gtest.h>

namespace laycon::config {
namespace {

std::string where_of(const std::string& text, const std::string& scenario = "") {
  try {
    parse_config(text, "cfg.json", scenario);
  } catch (const ConfigError& e) {
    return e.where();
  }
  return "no error";
}

TEST(Config, EmptyDocumentIsScenarioB) {
  const RunConfig cfg = parse_config("{}", "cfg.json");
  EXPECT_EQ(cfg.base, "b");
  EXPECT_DOUBLE_EQ(cfg.layered.plant.k1, 35.0);
  EXPECT_TRUE(cfg.layered.sim.mpc_enabled);
  EXPECT_EQ(cfg.layered.constraint_set, hess::ErgMode::kScenarioBInputOnly);
}

TEST(Config, OverlayKeepsUntouchedKeys) {
  const RunConfig cfg = parse_config(R"({"base": "a", "plant": {"k1": 30.0}, "sim": {"seed": 9}})", "cfg.json");
  EXPECT_DOUBLE_EQ(cfg.layered.plant.k1, 30.0);
  EXPECT_DOUBLE_EQ(cfg.layered.plant.k2, 11.0);
  EXPECT_EQ(cfg.layered.sim.seed, 9u);
  EXPECT_FALSE(cfg.layered.sim.erg_enabled);
}

TEST(Config, ShippedFilesMatchPresets) {
  for (const std::string name : {"a", "b"}) {
    const RunConfig file = load_config(std::string(LAYCON_CONFIG_DIR) + "/scenario_" + name + ".json");
    EXPECT_EQ(file.base, name);
    EXPECT_EQ(preset(name).dump(), preset(file.base).dump());
    EXPECT_DOUBLE_EQ(file.layered.plant.u_s_max, scenario_config(name).layered.plant.u_s_max);
  }
}

TEST(Config, DerivedFields) {
  const RunConfig cfg = scenario_config("b");
  EXPECT_DOUBLE_EQ(cfg.layered.planner.t_s, cfg.layered.sim.t_s);
  const auto bb = hess::battery_interface_bounds(cfg.layered.plant, cfg.layered.sim.t_s);
  EXPECT_DOUBLE_EQ(cfg.layered.planner.slew_bound, bb.r_bar_b);
  EXPECT_DOUBLE_EQ(cfg.layered.spec.x_safe.hi(0), 420.0);
  EXPECT_DOUBLE_EQ(cfg.layered.spec.y_goal, 5.0);
}

TEST(Config, SyntaxErrorIsLocated) {
  EXPECT_EQ(where_of("{\n  \"plant\": {\n    \"k1\": 3,,\n  }\n}").substr(0, 11), "cfg.json:3:");
}

TEST(Config, CommentsRejected) {
  EXPECT_EQ(where_of("{\n  // note\n  \"base\": \"a\"\n}").substr(0, 11), "cfg.json:2:");
}

TEST(Config, UnknownKeyIsLocated) {
  const std::string w = where_of("{\n  \"plant\": {\n    \"k1\": 30.0,\n    \"k3\": 1.0\n  }\n}");
  EXPECT_EQ(w, "cfg.json:4:5: /plant/k3");
}

// Value errors point at the member's key.
TEST(Config, TypeMismatchIsLocated) {
  EXPECT_EQ(where_of("{\n  \"sim\": {\"seed\": \"zero\"}\n}"), "cfg.json:2:11: /sim/seed");
  EXPECT_EQ(where_of("{\"planner\": {\"horizon\": 20.5}}"), "cfg.json:1:14: /planner/horizon");
}

TEST(Config, DuplicateKey) {
  EXPECT_EQ(where_of("{\n  \"base\": \"a\",\n  \"base\": \"b\"\n}"), "cfg.json:3:3: /base");
}

TEST(Config, ValidationErrorIsLocated) {
  EXPECT_EQ(where_of("{\n  \"plant\": {\"C_bus\": -1.0}\n}"), "cfg.json:2:13: /plant/C_bus");
  EXPECT_EQ(where_of("{\"sim\": {\"disturbance\": \"gaussian\"}}"), "cfg.json:1:10: /sim/disturbance");
}

TEST(Config, SamplingPeriodIsWholeSteps) {
  EXPECT_EQ(where_of(R"({"sim": {"T_s": 0.1005}})"), "cfg.json:1:10: /sim/T_s");
  EXPECT_EQ(where_of(R"({"sim": {"T_s": 0.0005}})"), "cfg.json:1:10: /sim/T_s");
  EXPECT_NO_THROW(parse_config(R"({"sim": {"T_s": 0.3}})", "cfg.json"));
}

TEST(Config, BaseAndScenarioMustAgree) {
  EXPECT_NO_THROW(parse_config(R"({"base": "a"})", "cfg.json", "a"));
  EXPECT_EQ(where_of(R"({"base": "a"})", "b"), "cfg.json:1:2: /base");
  EXPECT_THROW(scenario_config("c"), ConfigError);
}

TEST(Config, TopLevelMustBeObject) {
  EXPECT_THROW(parse_config("[1, 2]", "cfg.json"), ConfigError);
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/laycon.json"), ConfigError);
}

}  // namespace
}  // namespace laycon::config
