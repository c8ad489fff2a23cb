#pragma once

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mergesim/engine.hpp"
#include "mergesim/presets.hpp"

namespace mergesim {

/// Reads scalars from a YAML tree with path-qualified diagnostics. Numbers
/// are parsed from the literal text so decimals round-trip bit-exactly.
class YamlReader {
 public:
  static double number(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(path, "expected a number");
    try {
      return parse_decimal(n.Scalar());
    } catch (const std::invalid_argument&) {
      throw ConfigError(path, "expected a number, got '" + n.Scalar() + "'");
    }
  }

  static std::int64_t integer(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(path, "expected an integer");
    const std::string& s = n.Scalar();
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ConfigError(path, "expected an integer, got '" + s + "'");
    return v;
  }

  static std::uint64_t unsigned_integer(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(path, "expected a non-negative integer");
    const std::string& s = n.Scalar();
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ConfigError(path, "expected a non-negative integer, got '" + s + "'");
    return v;
  }

  static std::string text(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(path, "expected a string");
    return n.Scalar();
  }

  static std::vector<double> numbers(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence()) throw ConfigError(path, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i)
      out.push_back(number(n[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  /// Rejects keys outside `allowed`, catching typos in configs.
  static void keys(const YAML::Node& n, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!n) return;
    if (!n.IsMap()) throw ConfigError(path, "expected a mapping");
    for (const auto& kv : n) {
      const std::string key = kv.first.Scalar();
      bool ok = false;
      for (auto a : allowed) ok = ok || a == key;
      if (!ok) throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
    }
  }

  static void set(double& dst, const YAML::Node& parent, const char* key, const std::string& path) {
    if (parent[key]) dst = number(parent[key], join(path, key));
  }

  static std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
  }
};

/// Applies "a.b.c=value" overrides in place. Numeric segments index
/// sequences. The value is parsed as YAML, so lists are accepted.
inline void apply_override(YAML::Node root, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError(std::string(assignment), "override must have the form key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    parts.push_back(key.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (const auto& p : parts)
    if (p.empty()) throw ConfigError(key, "empty path segment in override");

  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError(key, std::string("unparseable override value: ") + e.what());
  }
  // yaml-cpp nodes are handles; each copy below refers into `root`.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node cur = chain.back();
    const std::string& seg = parts[i];
    if (cur.IsSequence()) {
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(seg.data(), seg.data() + seg.size(), idx);
      if (ec != std::errc() || ptr != seg.data() + seg.size() || idx >= cur.size())
        throw ConfigError(key, "bad sequence index '" + seg + "'");
      chain.push_back(cur[idx]);
    } else {
      chain.push_back(cur[seg]);
    }
  }
  YAML::Node last = chain.back();
  const std::string& leaf = parts.back();
  if (last.IsSequence()) {
    std::size_t idx = 0;
    auto [ptr, ec] = std::from_chars(leaf.data(), leaf.data() + leaf.size(), idx);
    if (ec != std::errc() || ptr != leaf.data() + leaf.size() || idx >= last.size())
      throw ConfigError(key, "bad sequence index '" + leaf + "'");
    last[idx] = parsed;
  } else {
    last[leaf] = parsed;
  }
}

inline IdmParams parse_idm(const YAML::Node& n, const std::string& path, IdmParams p = {}) {
  if (!n) return p;
  YamlReader::keys(n, path, {"s0", "T", "a_max", "b_comf", "v0", "delta", "zeta"});
  YamlReader::set(p.s0, n, "s0", path);
  YamlReader::set(p.T, n, "T", path);
  YamlReader::set(p.a_max, n, "a_max", path);
  YamlReader::set(p.b_comf, n, "b_comf", path);
  YamlReader::set(p.v0, n, "v0", path);
  YamlReader::set(p.delta, n, "delta", path);
  YamlReader::set(p.zeta, n, "zeta", path);
  return p;
}

/// Rationality settings of the game model (payoff weights come from presets).
inline MbrgtParams parse_mbrgt_settings(const YAML::Node& n, const std::string& path, MbrgtParams p = {}) {
  if (!n) return p;
  YamlReader::keys(n, path, {"beta_min", "delta_r", "m", "mode"});
  YamlReader::set(p.beta_min, n, "beta_min", path);
  YamlReader::set(p.delta_r, n, "delta_r", path);
  if (n["m"]) {
    const auto m = YamlReader::numbers(n["m"], path + ".m");
    if (m.size() != p.m.size()) throw ConfigError(path + ".m", "expected 5 coefficients");
    std::copy(m.begin(), m.end(), p.m.begin());
  }
  if (n["mode"]) {
    const std::string mode = YamlReader::text(n["mode"], path + ".mode");
    if (mode == "deterministic") p.mode = DecisionMode::Deterministic;
    else if (mode == "stochastic") p.mode = DecisionMode::Stochastic;
    else throw ConfigError(path + ".mode", "expected deterministic or stochastic");
  }
  return p;
}

inline ScenarioConfig parse_scenario_config(const YAML::Node& root) {
  if (!root || !root.IsMap()) throw ConfigError("", "config must be a mapping");
  YamlReader::keys(root, "", {"scenario", "topology", "idm", "mbrgt", "projection", "merge", "mixture",
                              "lane_change", "actors"});
  ScenarioConfig cfg;
  if (const YAML::Node s = root["scenario"]) {
    YamlReader::keys(s, "scenario", {"dt", "duration", "seed"});
    YamlReader::set(cfg.dt, s, "dt", "scenario");
    YamlReader::set(cfg.duration, s, "duration", "scenario");
    if (s["seed"]) cfg.seed = YamlReader::unsigned_integer(s["seed"], "scenario.seed");
  }
  if (const YAML::Node t = root["topology"]) {
    YamlReader::keys(t, "topology", {"lanes", "lane_width", "ramp_end_s", "road_length"});
    if (t["lanes"]) {
      cfg.topology.lanes.clear();
      const YAML::Node l = t["lanes"];
      if (!l.IsSequence()) throw ConfigError("topology.lanes", "expected a list of lane ids");
      for (std::size_t i = 0; i < l.size(); ++i)
        cfg.topology.lanes.push_back(
            static_cast<int>(YamlReader::integer(l[i], "topology.lanes[" + std::to_string(i) + "]")));
    }
    YamlReader::set(cfg.topology.lane_width, t, "lane_width", "topology");
    YamlReader::set(cfg.topology.ramp_end_s, t, "ramp_end_s", "topology");
    YamlReader::set(cfg.topology.road_length, t, "road_length", "topology");
  }
  cfg.idm = parse_idm(root["idm"], "idm");
  cfg.mbrgt = parse_mbrgt_settings(root["mbrgt"], "mbrgt");
  if (const YAML::Node p = root["projection"]) {
    YamlReader::keys(p, "projection", {"horizon_s"});
    YamlReader::set(cfg.projection.horizon_s, p, "horizon_s", "projection");
  }
  if (const YAML::Node m = root["merge"]) {
    YamlReader::keys(m, "merge", {"zone_length", "gap_front", "gap_rear", "duration"});
    YamlReader::set(cfg.merge.zone_length_m, m, "zone_length", "merge");
    YamlReader::set(cfg.merge.gap_front_m, m, "gap_front", "merge");
    YamlReader::set(cfg.merge.gap_rear_m, m, "gap_rear", "merge");
    YamlReader::set(cfg.merge.duration_s, m, "duration", "merge");
  }
  if (const YAML::Node m = root["mixture"]) {
    YamlReader::keys(m, "mixture", {"keep_straight", "lane_change"});
    YamlReader::set(cfg.weight_keep_straight, m, "keep_straight", "mixture");
    YamlReader::set(cfg.weight_lane_change, m, "lane_change", "mixture");
  }
  if (const YAML::Node l = root["lane_change"]) {
    YamlReader::keys(l, "lane_change", {"mu_ln", "sigma_ln"});
    YamlReader::set(cfg.mu_ln, l, "mu_ln", "lane_change");
    YamlReader::set(cfg.sigma_ln, l, "sigma_ln", "lane_change");
  }
  const YAML::Node actors = root["actors"];
  if (!actors || !actors.IsSequence()) throw ConfigError("actors", "expected a list of actors");
  for (std::size_t i = 0; i < actors.size(); ++i) {
    const std::string path = "actors[" + std::to_string(i) + "]";
    const YAML::Node a = actors[i];
    YamlReader::keys(a, path, {"id", "lane", "s", "d", "v", "length", "width", "model", "preset", "params"});
    ActorSpec spec;
    if (!a["id"]) throw ConfigError(path + ".id", "required");
    spec.initial.id = YamlReader::text(a["id"], path + ".id");
    if (!a["lane"]) throw ConfigError(path + ".lane", "required");
    spec.initial.lane = static_cast<int>(YamlReader::integer(a["lane"], path + ".lane"));
    if (!a["s"]) throw ConfigError(path + ".s", "required");
    YamlReader::set(spec.initial.s, a, "s", path);
    YamlReader::set(spec.initial.d, a, "d", path);
    YamlReader::set(spec.initial.v, a, "v", path);
    YamlReader::set(spec.initial.length, a, "length", path);
    YamlReader::set(spec.initial.width, a, "width", path);
    if (a["model"]) {
      const std::string m = YamlReader::text(a["model"], path + ".model");
      if (m == "mobil") spec.model = ModelBinding::Mobil;
      else if (m == "mbrgt") spec.model = ModelBinding::Mbrgt;
      else if (m == "none") spec.model = ModelBinding::None;
      else throw ConfigError(path + ".model", "expected mobil, mbrgt or none");
    }
    if (a["preset"]) spec.preset = YamlReader::text(a["preset"], path + ".preset");
    if (a["params"]) {
      if (a["preset"]) throw ConfigError(path, "give either preset or params, not both");
      spec.params = YamlReader::numbers(a["params"], path + ".params");
      spec.preset.clear();
    }
    cfg.actors.push_back(std::move(spec));
  }
  cfg.validate();
  return cfg;
}

/// Loads a scenario file, applies overrides, and validates.
inline ScenarioConfig load_scenario_config(const std::string& path,
                                           const std::vector<std::string>& overrides = {}) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError(path, "cannot read file");
  } catch (const YAML::Exception& e) {
    throw ConfigError(path, std::string("YAML syntax error: ") + e.what());
  }
  for (const auto& o : overrides) apply_override(root, o);
  return parse_scenario_config(root);
}

/// Preset as YAML text; values are written with their registered decimals.
inline std::string preset_to_yaml(const Preset& p) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "id" << YAML::Value << std::string(p.id);
  out << YAML::Key << "model" << YAML::Value << std::string(to_string(p.model));
  out << YAML::Key << "provenance" << YAML::Value << std::string(p.provenance);
  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  const auto& names = parameter_names(p.model);
  for (std::size_t i = 0; i < names.size(); ++i)
    out << YAML::Key << names[i] << YAML::Value << std::string(p.decimals[i]);
  out << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

/// Inverse of preset_to_yaml: model and parameter vector.
inline std::pair<ModelKind, std::vector<double>> parse_preset_yaml(const std::string& text) {
  const YAML::Node n = YAML::Load(text);
  if (!n["model"]) throw ConfigError("model", "required");
  const ModelKind kind = parse_model(YamlReader::text(n["model"], "model"));
  const YAML::Node params = n["params"];
  if (!params || !params.IsMap()) throw ConfigError("params", "expected a mapping");
  std::vector<double> v;
  for (const auto& name : parameter_names(kind)) {
    if (!params[name]) throw ConfigError("params." + name, "required");
    v.push_back(YamlReader::number(params[name], "params." + name));
  }
  return {kind, v};
}

}  // namespace mergesim
