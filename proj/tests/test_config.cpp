#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mergesim/config.hpp"

using namespace mergesim;

namespace {

const std::string kMerge17 = std::string(MERGESIM_SOURCE_DIR) + "/scenarios/merge17.yaml";

const char* kMinimal = R"(
scenario: {dt: 0.05, duration: 10, seed: 9}
actors:
  - {id: ma, lane: -1, s: 150, v: 20}
  - {id: lag, lane: 0, s: 140, v: 24, model: mobil, preset: mobil-ks}
  - {id: fast, lane: 1, s: 100, v: 30, model: mbrgt, params: [1, 2, 3, 4, 5, 6, 7, 8]}
)";

std::string error_path(const std::string& yaml) {
  try {
    parse_scenario_config(YAML::Load(yaml));
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, LoadsMerge17) {
  const auto cfg = load_scenario_config(kMerge17);
  EXPECT_EQ(cfg.actors.size(), 17u);
  EXPECT_DOUBLE_EQ(cfg.dt, 0.02);
  EXPECT_EQ(cfg.step_count(), 3000);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_DOUBLE_EQ(cfg.topology.road_length, 3000.0);
  EXPECT_EQ(cfg.actors[0].initial.lane, -1);
  int mbrgt = 0;
  for (const auto& a : cfg.actors) mbrgt += a.model == ModelBinding::Mbrgt;
  EXPECT_EQ(mbrgt, 9);
}

TEST(Config, MinimalDocument) {
  const auto cfg = parse_scenario_config(YAML::Load(kMinimal));
  EXPECT_DOUBLE_EQ(cfg.dt, 0.05);
  EXPECT_EQ(cfg.step_count(), 200);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.actors[1].model, ModelBinding::Mobil);
  EXPECT_EQ(cfg.actors[1].preset, "mobil-ks");
  ASSERT_TRUE(cfg.actors[2].params);
  EXPECT_EQ(cfg.actors[2].params->size(), 8u);
  EXPECT_EQ(cfg.actors[0].model, ModelBinding::None);
  EXPECT_DOUBLE_EQ(cfg.idm.v0, 33.33);
}

TEST(Config, FieldPathErrors) {
  EXPECT_EQ(error_path("actors: [{id: a, lane: 0, s: x}]"), "actors[0].s");
  EXPECT_EQ(error_path("actors: [{id: a, lane: 0, s: 1}, {id: a, lane: 1, s: 2}]"), "actors[1].id");
  EXPECT_EQ(error_path("actors: [{lane: 0, s: 1}]"), "actors[0].id");
  EXPECT_EQ(error_path("actors: [{id: a, lane: 0, s: 1, model: idm}]"), "actors[0].model");
  EXPECT_EQ(error_path("actors: [{id: a, lane: 0, s: 1, model: mobil, preset: nope}]"), "actors[0].preset");
  EXPECT_EQ(error_path("actors: [{id: a, lane: 0, s: 1, model: mobil, params: [1, 2]}]"), "actors[0].params");
  EXPECT_EQ(error_path("actors: [{id: a, lane: 0, s: 1, colour: red}]"), "actors[0].colour");
  EXPECT_EQ(error_path("idm: {T: fast}\nactors: [{id: a, lane: 0, s: 1}]"), "idm.T");
  EXPECT_EQ(error_path("idm: {T: -1}\nactors: [{id: a, lane: 0, s: 1}]"), "idm");
  EXPECT_EQ(error_path("idm: {TT: 1}\nactors: [{id: a, lane: 0, s: 1}]"), "idm.TT");
  EXPECT_EQ(error_path("mbrgt: {m: [1, 2]}\nactors: [{id: a, lane: 0, s: 1}]"), "mbrgt.m");
  EXPECT_EQ(error_path("mbrgt: {mode: fuzzy}\nactors: [{id: a, lane: 0, s: 1}]"), "mbrgt.mode");
  EXPECT_EQ(error_path("scenario: {seed: -3}\nactors: [{id: a, lane: 0, s: 1}]"), "scenario.seed");
  EXPECT_EQ(error_path("scenario: {dt: 0}\nactors: [{id: a, lane: 0, s: 1}]"), "scenario.dt");
  EXPECT_EQ(error_path("mixture: {keep_straight: 0.5, lane_change: 0.2}\nactors: [{id: a, lane: 0, s: 1}]"),
            "mixture");
  EXPECT_EQ(error_path("actors: [{id: a, lane: -1, s: 500}]"), "actors[0].s");
  EXPECT_EQ(error_path("topology: {lanes: [0, 1]}\nactors: [{id: a, lane: 0, s: 1}]"), "topology");
  EXPECT_EQ(error_path("bogus: 1\nactors: [{id: a, lane: 0, s: 1}]"), "bogus");
  EXPECT_EQ(error_path("scenario: {dt: 0.1}"), "actors");
  EXPECT_EQ(error_path("- 1\n- 2"), "");
}

TEST(Config, Overrides) {
  const auto cfg = load_scenario_config(kMerge17, {"scenario.seed=7", "idm.T=1.2", "actors.0.v=18.5",
                                                   "mbrgt.m=[0.5, 0, 0, 0, 0]"});
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_DOUBLE_EQ(cfg.idm.T, 1.2);
  EXPECT_DOUBLE_EQ(cfg.actors[0].initial.v, 18.5);
  EXPECT_DOUBLE_EQ(cfg.mbrgt.m[0], 0.5);
}

TEST(Config, BadOverrides) {
  EXPECT_THROW(load_scenario_config(kMerge17, {"scenario.seed"}), ConfigError);
  EXPECT_THROW(load_scenario_config(kMerge17, {"actors.99.v=1"}), ConfigError);
  EXPECT_THROW(load_scenario_config(kMerge17, {"scenario..seed=1"}), ConfigError);
  EXPECT_THROW(load_scenario_config(kMerge17, {"idm.T=abc"}), ConfigError);
}

TEST(Config, MissingFileAndSyntaxErrors) {
  EXPECT_THROW(load_scenario_config("/nonexistent/scenario.yaml"), ConfigError);
  const auto tmp = std::filesystem::temp_directory_path() / "mergesim_bad.yaml";
  {
    std::ofstream os(tmp);
    os << "actors: [ {id: a\n";
  }
  EXPECT_THROW(load_scenario_config(tmp.string()), ConfigError);
  std::filesystem::remove(tmp);
}

TEST(Config, DecimalsAreExact) {
  const auto cfg = parse_scenario_config(YAML::Load(
      "idm: {a_max: 0.73}\nactors: [{id: a, lane: 0, s: 0.1, v: 1e1}]"));
  EXPECT_EQ(cfg.idm.a_max, 0.73);
  EXPECT_EQ(cfg.actors[0].initial.s, 0.1);
  EXPECT_EQ(cfg.actors[0].initial.v, 10.0);
}
