#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <cstdio>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mergesim/config.hpp"
#include "mergesim/decision.hpp"
#include "mergesim/extraction.hpp"
#include "mergesim/game.hpp"
#include "mergesim/longitudinal.hpp"
#include "mergesim/mobil.hpp"
#include "mergesim/optimizer.hpp"
#include "mergesim/presets.hpp"

namespace mergesim {

enum class CostVariant { Overall, KeepStraight, LaneChange };

inline std::string_view to_string(CostVariant c) noexcept {
  switch (c) {
    case CostVariant::KeepStraight: return "ks";
    case CostVariant::LaneChange: return "lc";
    default: return "overall";
  }
}

inline CostVariant parse_cost(std::string_view s) {
  if (s == "overall") return CostVariant::Overall;
  if (s == "ks") return CostVariant::KeepStraight;
  if (s == "lc") return CostVariant::LaneChange;
  throw std::invalid_argument("unknown cost '" + std::string(s) + "' (expected overall, ks or lc)");
}

/// Prediction success percentages plus the counts they derive from. A class
/// with no events scores 100 (nothing was missed).
struct SuccessRates {
  double r_ks = 100.0;
  double r_lc = 100.0;
  double r_overall = 100.0;
  std::size_t n_ks = 0, hit_ks = 0;
  std::size_t n_lc = 0, hit_lc = 0;

  static SuccessRates from_counts(std::size_t hit_ks, std::size_t n_ks, std::size_t hit_lc, std::size_t n_lc) {
    if (hit_ks > n_ks || hit_lc > n_lc) throw std::invalid_argument("success rates: hits exceed counts");
    SuccessRates r;
    r.n_ks = n_ks;
    r.hit_ks = hit_ks;
    r.n_lc = n_lc;
    r.hit_lc = hit_lc;
    auto pct = [](std::size_t h, std::size_t n) { return n ? 100.0 * static_cast<double>(h) / static_cast<double>(n) : 100.0; };
    r.r_ks = pct(hit_ks, n_ks);
    r.r_lc = pct(hit_lc, n_lc);
    r.r_overall = pct(hit_ks + hit_lc, n_ks + n_lc);
    return r;
  }
};

inline double overall_cost(const SuccessRates& r) noexcept {
  return 0.4 * (100.0 - r.r_lc) + 0.3 * (100.0 - r.r_ks) + 0.3 * (100.0 - r.r_overall);
}

inline double behavior_cost(const SuccessRates& r, Action target) noexcept {
  return target == Action::KeepStraight ? 100.0 - r.r_ks : 100.0 - r.r_lc;
}

inline double cost_of(const SuccessRates& r, CostVariant c) noexcept {
  switch (c) {
    case CostVariant::KeepStraight: return behavior_cost(r, Action::KeepStraight);
    case CostVariant::LaneChange: return behavior_cost(r, Action::ChangeLanes);
    default: return overall_cost(r);
  }
}

/// Fixed model inputs shared by all candidate parameter sets.
struct ScoringContext {
  IdmParams idm;
  MbrgtParams settings;  // rationality settings; weights are overwritten
  ProjectionOptions projection;
};

/// Parameter-independent per-frame inputs, precomputed once per event.
struct CachedFrame {
  AccelProjection projection;
  MobilInputs mobil;
  double t = 1.0;        // negotiation time for the rationality schedule
  double density = 0.0;  // passing-lane density seen through the roles
};

struct CachedEvent {
  Action label = Action::KeepStraight;
  std::vector<CachedFrame> frames;  // frames before the decision point only
};

/// Passing-lane density estimated from the event's passing-lane roles.
inline double role_density(const RoleStates& r) {
  std::vector<ActorState> scene;
  if (r.lag1) scene.push_back(*r.lag1);
  if (r.lead1) scene.push_back(*r.lead1);
  return passing_lane_density(scene, r.lag0);
}

inline CachedEvent cache_event(const MergeEvent& ev, const ScoringContext& ctx = {}) {
  CachedEvent out;
  out.label = ev.label;
  const std::size_t end = ev.decision_point();
  out.frames.reserve(end);
  const double t0 = ev.frames.empty() ? 0.0 : ev.frames.front().time_s;
  for (std::size_t i = 0; i < end; ++i) {
    const RoleStates& r = ev.frames[i].roles;
    CachedFrame f;
    f.projection = project_accelerations(r, ctx.idm, ctx.projection);
    f.mobil = MobilInputs::from(f.projection, follower_accelerations(r, ctx.idm));
    f.t = 1.0 + (ev.frames[i].time_s - t0);
    f.density = role_density(r);
    out.frames.push_back(f);
  }
  return out;
}

inline std::vector<CachedEvent> cache_events(std::span<const MergeEvent> events, const ScoringContext& ctx = {}) {
  std::vector<CachedEvent> out;
  out.reserve(events.size());
  for (const MergeEvent& e : events) out.push_back(cache_event(e, ctx));
  return out;
}

/// ChangeLanes iff the model, in deterministic mode, chooses to change at any
/// frame before the observed decision point.
inline Action predict_cached(ModelKind model, std::span<const double> params, const CachedEvent& ev,
                             const MbrgtParams& settings = {}) {
  if (model == ModelKind::Mobil) {
    const MobilParams p = mobil_from_vector(params);
    for (const CachedFrame& f : ev.frames)
      if (mobil_decide(f.mobil, p) == Action::ChangeLanes) return Action::ChangeLanes;
    return Action::KeepStraight;
  }
  MbrgtParams p = mbrgt_from_vector(params, settings);
  p.mode = DecisionMode::Deterministic;
  for (const CachedFrame& f : ev.frames)
    if (mbrgt_decide(f.projection, p, f.t, f.density).action == Action::ChangeLanes) return Action::ChangeLanes;
  return Action::KeepStraight;
}

inline Action predict_event(ModelKind model, std::span<const double> params, const MergeEvent& ev,
                            const ScoringContext& ctx = {}) {
  return predict_cached(model, params, cache_event(ev, ctx), ctx.settings);
}

inline SuccessRates success_rates(ModelKind model, std::span<const double> params,
                                  std::span<const CachedEvent> events, const MbrgtParams& settings = {}) {
  if (events.empty()) throw std::invalid_argument("success_rates: empty event list");
  std::size_t n_ks = 0, hit_ks = 0, n_lc = 0, hit_lc = 0;
  for (const CachedEvent& e : events) {
    const bool hit = predict_cached(model, params, e, settings) == e.label;
    if (e.label == Action::KeepStraight) {
      ++n_ks;
      hit_ks += hit;
    } else {
      ++n_lc;
      hit_lc += hit;
    }
  }
  return SuccessRates::from_counts(hit_ks, n_ks, hit_lc, n_lc);
}

inline SuccessRates success_rates(ModelKind model, std::span<const double> params,
                                  std::span<const MergeEvent> events, const ScoringContext& ctx = {}) {
  if (events.empty()) throw std::invalid_argument("success_rates: empty event list");
  return success_rates(model, params, cache_events(events, ctx), ctx.settings);
}

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stratified split: floor(ratio * n) events of each class go to training.
template <typename Urbg>
std::pair<std::vector<MergeEvent>, std::vector<MergeEvent>> split_dataset(const std::vector<MergeEvent>& events,
                                                                          double ratio, Urbg& rng) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split_dataset: ratio must lie in (0, 1)");
  std::vector<std::size_t> ks, lc;
  for (std::size_t i = 0; i < events.size(); ++i)
    (events[i].label == Action::KeepStraight ? ks : lc).push_back(i);
  if (ks.size() < 2 || lc.size() < 2)
    throw InsufficientDataError("split_dataset: need at least 2 events per class (have " +
                                std::to_string(ks.size()) + " KS, " + std::to_string(lc.size()) + " LC)");
  std::pair<std::vector<MergeEvent>, std::vector<MergeEvent>> out;
  for (auto* cls : {&ks, &lc}) {
    // Fisher-Yates with an explicit draw so the permutation only depends on the engine.
    for (std::size_t i = cls->size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap((*cls)[i - 1], (*cls)[j]);
    }
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(cls->size())));
    for (std::size_t k = 0; k < cls->size(); ++k)
      (k < n_train ? out.first : out.second).push_back(events[(*cls)[k]]);
  }
  return out;
}

/// Bounds columns of the optimization tables.
inline Bounds default_bounds(ModelKind model, CostVariant cost) {
  if (model == ModelKind::Mobil) return Bounds{{0.0, 0.0, -3.0}, {4.0, 4.0, 3.0}};
  if (cost == CostVariant::LaneChange) return Bounds{std::vector<double>(8, 0.0), std::vector<double>(8, 10.0)};
  return Bounds{std::vector<double>(8, 0.0), {1e3, 1e4, 1e4, 1e4, 1e4, 1e3, 1e4, 1e4}};
}

struct OptimizationSpec {
  ModelKind model = ModelKind::Mobil;
  CostVariant cost = CostVariant::Overall;
  Bounds bounds = default_bounds(ModelKind::Mobil, CostVariant::Overall);
  std::size_t starts = 20;
  std::uint64_t seed = kDefaultSeed;
  NelderMeadOptions tolerances;
  double split_ratio = 0.7;
  unsigned threads = 1;
  ScoringContext context;

  void validate() const {
    try {
      bounds.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("bounds", e.what());
    }
    if (bounds.size() != parameter_names(model).size())
      throw ConfigError("bounds", "expected " + std::to_string(parameter_names(model).size()) + " entries");
    if (starts < 1) throw ConfigError("starts", "must be >= 1");
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("split_ratio", "must lie in (0, 1)");
    if (tolerances.max_evals < 1) throw ConfigError("tolerances.max_evals", "must be >= 1");
    if (tolerances.restarts < 0) throw ConfigError("tolerances.restarts", "must be >= 0");
    if (!(tolerances.initial_step > 0.0 && tolerances.initial_step <= 1.0))
      throw ConfigError("tolerances.initial_step", "must lie in (0, 1]");
    try {
      context.idm.validate();
      context.settings.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("context", e.what());
    }
  }
};

/// Reads a calibration spec. Bounds default to the model/cost table; a
/// `bounds` map may override individual parameters by name.
inline OptimizationSpec parse_optimization_spec(const YAML::Node& root) {
  if (!root || !root.IsMap()) throw ConfigError("", "spec must be a mapping");
  YamlReader::keys(root, "", {"model", "cost", "starts", "seed", "split_ratio", "threads", "bounds", "tolerances",
                              "idm", "mbrgt", "projection"});
  OptimizationSpec s;
  if (root["model"]) {
    try {
      s.model = parse_model(YamlReader::text(root["model"], "model"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("model", e.what());
    }
  }
  if (root["cost"]) {
    try {
      s.cost = parse_cost(YamlReader::text(root["cost"], "cost"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("cost", e.what());
    }
  }
  s.bounds = default_bounds(s.model, s.cost);
  if (root["starts"]) s.starts = static_cast<std::size_t>(YamlReader::unsigned_integer(root["starts"], "starts"));
  if (root["seed"]) s.seed = YamlReader::unsigned_integer(root["seed"], "seed");
  YamlReader::set(s.split_ratio, root, "split_ratio", "");
  if (root["threads"]) s.threads = static_cast<unsigned>(YamlReader::unsigned_integer(root["threads"], "threads"));
  if (const YAML::Node b = root["bounds"]) {
    if (!b.IsMap()) throw ConfigError("bounds", "expected a mapping of parameter -> [lo, hi]");
    const auto& names = parameter_names(s.model);
    for (const auto& kv : b) {
      const std::string key = kv.first.Scalar();
      const auto it = std::find(names.begin(), names.end(), key);
      if (it == names.end()) throw ConfigError("bounds." + key, "unknown parameter");
      const auto lohi = YamlReader::numbers(kv.second, "bounds." + key);
      if (lohi.size() != 2) throw ConfigError("bounds." + key, "expected [lo, hi]");
      const auto i = static_cast<std::size_t>(it - names.begin());
      s.bounds.lo[i] = lohi[0];
      s.bounds.hi[i] = lohi[1];
    }
  }
  if (const YAML::Node t = root["tolerances"]) {
    YamlReader::keys(t, "tolerances", {"ftol", "xtol", "max_evals", "restarts", "initial_step"});
    YamlReader::set(s.tolerances.ftol, t, "ftol", "tolerances");
    YamlReader::set(s.tolerances.xtol, t, "xtol", "tolerances");
    if (t["max_evals"]) s.tolerances.max_evals = static_cast<int>(YamlReader::integer(t["max_evals"], "tolerances.max_evals"));
    if (t["restarts"]) s.tolerances.restarts = static_cast<int>(YamlReader::integer(t["restarts"], "tolerances.restarts"));
    YamlReader::set(s.tolerances.initial_step, t, "initial_step", "tolerances");
  }
  s.context.idm = parse_idm(root["idm"], "idm");
  s.context.settings = parse_mbrgt_settings(root["mbrgt"], "mbrgt");
  if (const YAML::Node p = root["projection"]) {
    YamlReader::keys(p, "projection", {"horizon_s"});
    YamlReader::set(s.context.projection.horizon_s, p, "horizon_s", "projection");
  }
  s.validate();
  return s;
}

inline OptimizationSpec load_optimization_spec(const std::string& path,
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
  return parse_optimization_spec(root);
}

/// Multistart search over `train` events under the spec's cost.
inline MultistartResult multistart_optimize(const OptimizationSpec& spec, std::span<const CachedEvent> train) {
  spec.validate();
  if (train.empty()) throw InsufficientDataError("multistart_optimize: no training events");
  auto f = [&](const std::vector<double>& x) {
    return cost_of(success_rates(spec.model, x, train, spec.context.settings), spec.cost);
  };
  return multistart(f, spec.bounds, spec.starts, spec.seed, spec.tolerances, spec.threads);
}

inline MultistartResult multistart_optimize(const OptimizationSpec& spec, const std::vector<MergeEvent>& train) {
  const auto cached = cache_events(train, spec.context);
  return multistart_optimize(spec, std::span<const CachedEvent>(cached));
}

struct CalibrationResult {
  MultistartResult search;
  SuccessRates train;
  SuccessRates validation;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
};

/// Split, optimize on the training share, score both shares.
inline CalibrationResult calibrate(const OptimizationSpec& spec, const std::vector<MergeEvent>& events) {
  spec.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32), 0x5b1u};
  std::mt19937_64 rng(seq);
  auto [train, validation] = split_dataset(events, spec.split_ratio, rng);
  const auto train_c = cache_events(train, spec.context);
  const auto val_c = cache_events(validation, spec.context);
  CalibrationResult out;
  out.search = multistart_optimize(spec, std::span<const CachedEvent>(train_c));
  out.train = success_rates(spec.model, out.search.best_x, train_c, spec.context.settings);
  out.validation = success_rates(spec.model, out.search.best_x, val_c, spec.context.settings);
  out.n_train = train.size();
  out.n_validation = validation.size();
  return out;
}

namespace report_detail {

inline std::string num(double x) {
  char buf[64];
  if (x == 0.0) x = 0.0;
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline void emit_rates(YAML::Emitter& out, const SuccessRates& r) {
  out << YAML::BeginMap;
  out << YAML::Key << "r_ks" << YAML::Value << num(r.r_ks);
  out << YAML::Key << "r_lc" << YAML::Value << num(r.r_lc);
  out << YAML::Key << "r_overall" << YAML::Value << num(r.r_overall);
  out << YAML::Key << "n_ks" << YAML::Value << r.n_ks;
  out << YAML::Key << "n_lc" << YAML::Value << r.n_lc;
  out << YAML::EndMap;
}

inline void emit_vector(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << num(x);
  out << YAML::EndSeq;
}

}  // namespace report_detail

/// Structured calibration report (YAML). Contains no timing, so repeated runs
/// with the same inputs produce identical bytes.
inline std::string format_calibration_report(const OptimizationSpec& spec, const CalibrationResult& res) {
  using report_detail::num;
  const auto& names = parameter_names(spec.model);
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "spec" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "model" << YAML::Value << std::string(to_string(spec.model));
  out << YAML::Key << "cost" << YAML::Value << std::string(to_string(spec.cost));
  out << YAML::Key << "starts" << YAML::Value << spec.starts;
  out << YAML::Key << "seed" << YAML::Value << spec.seed;
  out << YAML::Key << "split_ratio" << YAML::Value << num(spec.split_ratio);
  out << YAML::Key << "bounds" << YAML::Value << YAML::BeginMap;
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << YAML::Key << names[i] << YAML::Value;
    report_detail::emit_vector(out, {spec.bounds.lo[i], spec.bounds.hi[i]});
  }
  out << YAML::EndMap;
  out << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "ftol" << YAML::Value << num(spec.tolerances.ftol);
  out << YAML::Key << "xtol" << YAML::Value << num(spec.tolerances.xtol);
  out << YAML::Key << "max_evals" << YAML::Value << spec.tolerances.max_evals;
  out << YAML::Key << "restarts" << YAML::Value << spec.tolerances.restarts;
  out << YAML::Key << "initial_step" << YAML::Value << num(spec.tolerances.initial_step);
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "events" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "train" << YAML::Value << res.n_train;
  out << YAML::Key << "validation" << YAML::Value << res.n_validation;
  out << YAML::EndMap;

  out << YAML::Key << "best" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "start" << YAML::Value << res.search.best_index;
  out << YAML::Key << "cost" << YAML::Value << num(res.search.best_f);
  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  for (std::size_t i = 0; i < names.size() && i < res.search.best_x.size(); ++i)
    out << YAML::Key << names[i] << YAML::Value << num(res.search.best_x[i]);
  out << YAML::EndMap << YAML::EndMap;

  out << YAML::Key << "train_rates" << YAML::Value;
  report_detail::emit_rates(out, res.train);
  out << YAML::Key << "validation_rates" << YAML::Value;
  report_detail::emit_rates(out, res.validation);

  out << YAML::Key << "trace" << YAML::Value << YAML::BeginSeq;
  for (const StartRecord& r : res.search.trace) {
    out << YAML::BeginMap;
    out << YAML::Key << "start" << YAML::Value << r.index;
    out << YAML::Key << "initial_cost" << YAML::Value << num(r.f0);
    out << YAML::Key << "final_cost" << YAML::Value << num(r.f);
    out << YAML::Key << "evals" << YAML::Value << r.evals;
    out << YAML::Key << "initial" << YAML::Value;
    report_detail::emit_vector(out, r.x0);
    out << YAML::Key << "final" << YAML::Value;
    report_detail::emit_vector(out, r.x);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

/// One row per start: index, costs, evaluation count, initial and final parameters.
inline std::string format_trace_csv(ModelKind model, const MultistartResult& res) {
  using report_detail::num;
  const auto& names = parameter_names(model);
  std::string out = "start,initial_cost,final_cost,evals";
  for (const auto& n : names) out += ",x0_" + n;
  for (const auto& n : names) out += ",x_" + n;
  out += '\n';
  for (const StartRecord& r : res.trace) {
    out += std::to_string(r.index) + "," + num(r.f0) + "," + num(r.f) + "," + std::to_string(r.evals);
    for (double x : r.x0) out += "," + num(x);
    for (double x : r.x) out += "," + num(x);
    out += '\n';
  }
  return out;
}

}  // namespace mergesim
