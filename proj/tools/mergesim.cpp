// mergesim command-line driver: simulate, extract, calibrate, bench, presets,
// synthesize.

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <unistd.h>
#include <vector>

#include "mergesim/mergesim.hpp"

namespace fs = std::filesystem;
using namespace mergesim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

// Outputs are written to a hidden staging directory inside the out dir and
// moved into place only once the whole command succeeded.
class Staging {
 public:
  explicit Staging(const fs::path& out) : out_(out), existed_(fs::exists(out)) {
    fs::create_directories(out_);
    dir_ = out_ / (".staging-" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;
  ~Staging() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
    if (!committed_ && !existed_ && fs::is_empty(out_, ec)) fs::remove(out_, ec);
  }

  fs::path file(const std::string& name) const { return dir_ / name; }
  const fs::path& dir() const noexcept { return dir_; }

  void commit() {
    for (const auto& entry : fs::directory_iterator(dir_)) {
      const fs::path target = out_ / entry.path().filename();
      if (fs::is_directory(target) && !fs::is_directory(entry.path())) fs::remove_all(target);
      if (fs::is_directory(entry.path())) fs::remove_all(target);
      fs::rename(entry.path(), target);
    }
    committed_ = true;
  }

 private:
  fs::path out_;
  fs::path dir_;
  bool existed_;
  bool committed_ = false;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::string fixed(double x, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, x);
  return buf;
}

std::string metrics_yaml(const ScenarioConfig& cfg, const ScenarioResult& res) {
  const RunMetrics& m = res.metrics;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "dt" << YAML::Value << fixed(cfg.dt, 6);
  out << YAML::Key << "steps" << YAML::Value << m.steps;
  out << YAML::Key << "frames_logged" << YAML::Value << res.log.size();
  out << YAML::Key << "simulated_s" << YAML::Value << fixed(m.simulated_s, 6);
  out << YAML::Key << "wall_s" << YAML::Value << fixed(m.wall_s, 6);
  out << YAML::Key << "model_s" << YAML::Value << fixed(m.model_s, 6);
  out << YAML::Key << "real_time_factor" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "overall" << YAML::Value << fixed(m.rtf_overall(), 2);
  out << YAML::Key << "model_only" << YAML::Value << fixed(m.rtf_model(), 2);
  out << YAML::EndMap;
  out << YAML::Key << "decisions" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "keep_straight" << YAML::Value << m.decisions_keep;
  out << YAML::Key << "change_lanes" << YAML::Value << m.decisions_change;
  out << YAML::EndMap;
  out << YAML::Key << "lane_changes" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "started" << YAML::Value << m.lane_changes_started;
  out << YAML::Key << "completed" << YAML::Value << m.lane_changes_completed;
  out << YAML::EndMap;
  out << YAML::Key << "merges_started" << YAML::Value << m.merges_started;
  out << YAML::Key << "solver_fallbacks" << YAML::Value << m.solver_fallbacks;
  out << YAML::Key << "bindings" << YAML::Value << YAML::BeginMap;
  for (const auto& [id, preset] : res.bindings) out << YAML::Key << id << YAML::Value << preset;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

struct CommonOptions {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string preset;
  bool plots = false;
};

ScenarioConfig scenario_from(const CommonOptions& o) {
  ScenarioConfig cfg = load_scenario_config(o.config, o.overrides);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.preset.empty()) {
    const Preset& p = PresetRegistry::instance().get(o.preset);
    for (ActorSpec& a : cfg.actors) {
      if (a.model == ModelBinding::None) continue;
      a.model = p.model == ModelKind::Mobil ? ModelBinding::Mobil : ModelBinding::Mbrgt;
      a.preset = std::string(p.id);
      a.params.reset();
    }
    cfg.validate();
  }
  return cfg;
}

int cmd_simulate(const CommonOptions& o) {
  const ScenarioConfig cfg = scenario_from(o);
  Staging stage(o.out);
  const ScenarioResult res = run_scenario(cfg);
  write_trajectory_log(stage.file("trajectory.csv").string(), res.log);
  write_text(stage.file("metrics.yaml"), metrics_yaml(cfg, res));
  if (o.plots) write_svg(stage.file("lane_occupancy.svg").string(), lane_occupancy_svg(res.log));
  stage.commit();
  std::cout << "frames " << res.log.size() << ", rows " << row_count(res.log) << "\n"
            << "decisions KS " << res.metrics.decisions_keep << ", LC " << res.metrics.decisions_change << "\n"
            << "real-time factor overall " << fixed(res.metrics.rtf_overall(), 1) << "x, model-only "
            << fixed(res.metrics.rtf_model(), 1) << "x\n"
            << "wrote " << (fs::path(o.out) / "trajectory.csv").string() << "\n";
  return kExitOk;
}

int cmd_extract(const std::string& input, const CommonOptions& o, const std::string& site) {
  const std::vector<Frame> frames = load_trajectory_log(input);
  LaneTopology topo;
  if (!o.config.empty()) topo = load_scenario_config(o.config, o.overrides).topology;
  ExtractionOptions opt;
  opt.site = site;
  const auto events = extract_lag0_events(frames, topo, opt);
  Staging stage(o.out);
  write_events(stage.file("events"), events);
  if (o.plots) {
    const std::string preset = o.preset.empty() ? "mbrgt-ks" : o.preset;
    const Preset& p = PresetRegistry::instance().get(preset);
    const auto values = p.values();
    fs::create_directories(stage.file("plots"));
    for (const MergeEvent& ev : events)
      write_svg((stage.file("plots") / (ev.id + ".svg")).string(), decision_timeline_svg(ev, p.model, values));
  }
  stage.commit();
  std::size_t lc = 0;
  for (const auto& e : events) lc += e.label == Action::ChangeLanes;
  std::cout << "events " << events.size() << " (KS " << events.size() - lc << ", LC " << lc << ")\n"
            << "wrote " << (fs::path(o.out) / "events").string() << "\n";
  return kExitOk;
}

int cmd_calibrate(const std::string& events_dir, const CommonOptions& o, std::optional<std::size_t> starts,
                  const std::string& cost) {
  std::vector<std::string> overrides = o.overrides;
  if (starts) overrides.push_back("starts=" + std::to_string(*starts));
  if (!cost.empty()) overrides.push_back("cost=" + cost);
  if (o.seed) overrides.push_back("seed=" + std::to_string(*o.seed));
  OptimizationSpec spec;
  if (!o.config.empty()) {
    spec = load_optimization_spec(o.config, overrides);
  } else {
    YAML::Node root(YAML::NodeType::Map);
    for (const auto& ov : overrides) apply_override(root, ov);
    spec = parse_optimization_spec(root);
  }
  const auto events = load_events(events_dir);
  const CalibrationResult res = calibrate(spec, events);
  Staging stage(o.out);
  write_text(stage.file("calibration_report.yaml"), format_calibration_report(spec, res));
  write_text(stage.file("calibration_trace.csv"), format_trace_csv(spec.model, res.search));
  stage.commit();
  std::cout << "best cost " << fixed(res.search.best_f, 4) << " (start " << res.search.best_index << ")\n";
  const auto& names = parameter_names(spec.model);
  for (std::size_t i = 0; i < names.size(); ++i)
    std::cout << "  " << names[i] << " = " << fixed(res.search.best_x[i], 4) << "\n";
  std::cout << "train      r_ks " << fixed(res.train.r_ks, 1) << "  r_lc " << fixed(res.train.r_lc, 1)
            << "  r_overall " << fixed(res.train.r_overall, 1) << "\n"
            << "validation r_ks " << fixed(res.validation.r_ks, 1) << "  r_lc " << fixed(res.validation.r_lc, 1)
            << "  r_overall " << fixed(res.validation.r_overall, 1) << "\n";
  return kExitOk;
}

int cmd_bench(const CommonOptions& o, int reps) {
  if (reps < 1) throw ConfigError("--reps", "must be >= 1");
  const ScenarioConfig cfg = scenario_from(o);
  std::vector<double> overall, model;
  std::cout << "rep,actors,steps,rtf_overall,rtf_model\n";
  for (int r = 0; r < reps; ++r) {
    const ScenarioResult res = run_scenario(cfg, false);
    overall.push_back(res.metrics.rtf_overall());
    model.push_back(res.metrics.rtf_model());
    std::cout << r << "," << cfg.actors.size() << "," << res.metrics.steps << "," << fixed(overall.back(), 2) << ","
              << fixed(model.back(), 2) << "\n";
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  std::cout << "median,," << "," << fixed(median(overall), 2) << "," << fixed(median(model), 2) << "\n";
  return kExitOk;
}

int cmd_presets(const std::string& id) {
  const auto& reg = PresetRegistry::instance();
  if (!id.empty()) {
    std::cout << preset_to_yaml(reg.get(id));
    return kExitOk;
  }
  for (const Preset& p : reg.all()) {
    std::cout << p.id << " (" << to_string(p.model) << "):";
    const auto& names = parameter_names(p.model);
    for (std::size_t i = 0; i < names.size(); ++i) std::cout << " " << names[i] << "=" << p.decimals[i];
    std::cout << "\n";
  }
  return kExitOk;
}

struct SynthOptions {
  std::string preset = "mobil-ks";
  std::string mix_preset;
  double mix_share = 0.5;
  std::size_t events = 500;
};

int cmd_synthesize(const CommonOptions& o, const SynthOptions& s) {
  const Preset& a = PresetRegistry::instance().get(s.preset);
  SyntheticOptions opt;
  opt.events = s.events;
  if (o.seed) opt.seed = *o.seed;
  std::vector<MergeEvent> events;
  if (s.mix_preset.empty()) {
    events = generate_events(a.model, a.values(), opt);
  } else {
    const Preset& b = PresetRegistry::instance().get(s.mix_preset);
    if (b.model != a.model) throw ConfigError("--mix-preset", "must belong to the same model as --preset");
    events = generate_mixed_events(a.model, a.values(), b.values(), s.mix_share, opt);
  }
  Staging stage(o.out);
  write_events(stage.file("events"), events);
  stage.commit();
  std::size_t lc = 0;
  for (const auto& e : events) lc += e.label == Action::ChangeLanes;
  std::cout << "events " << events.size() << " (KS " << events.size() - lc << ", LC " << lc << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Highway merge negotiation simulator and calibration toolkit"};
  app.require_subcommand(1);

  CommonOptions common;
  std::uint64_t seed_value = kDefaultSeed;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", common.config, "Scenario or calibration spec (YAML)");
    if (config_required) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed_value, "Random seed (default " + std::to_string(kDefaultSeed) + ")");
    sub->add_option("--set", common.overrides, "Override a config value: dotted.key=value")->take_all();
  };

  auto* sim = app.add_subcommand("simulate", "Run a scenario and write the trajectory log and metrics");
  add_common(sim, true);
  sim->add_option("--preset", common.preset, "Bind every model-driven actor to this preset");
  sim->add_flag("--plots", common.plots, "Write a lane-occupancy chart (SVG)");

  std::string input, site = "sim";
  auto* ext = app.add_subcommand("extract", "Extract labeled Lag0 events from a trajectory log");
  add_common(ext, false);
  ext->add_option("--input", input, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  ext->add_option("--site", site, "Site label stored with each event");
  ext->add_option("--preset", common.preset, "Model used for decision timelines with --plots");
  ext->add_flag("--plots", common.plots, "Write per-event decision timelines (SVG)");

  std::string events_dir, cost;
  std::optional<std::size_t> starts;
  auto* cal = app.add_subcommand("calibrate", "Optimize model parameters against labeled events");
  add_common(cal, false);
  cal->add_option("--events", events_dir, "Event directory (manifest.csv)")->required()->check(CLI::ExistingDirectory);
  cal->add_option("--starts", starts, "Number of multistart points");
  cal->add_option("--cost", cost, "Cost variant")->check(CLI::IsMember({"overall", "ks", "lc"}));

  int reps = 3;
  auto* bench = app.add_subcommand("bench", "Measure real-time factors");
  add_common(bench, true);
  bench->add_option("--reps", reps, "Repetitions")->capture_default_str();
  bench->add_option("--preset", common.preset, "Bind every model-driven actor to this preset");

  std::string preset_id;
  auto* pre = app.add_subcommand("presets", "List presets or print one as YAML");
  pre->add_option("--preset", preset_id, "Preset id");

  SynthOptions synth;
  auto* syn = app.add_subcommand("synthesize", "Generate synthetic labeled events from hidden presets");
  add_common(syn, false);
  syn->add_option("--preset", synth.preset, "Labeling preset")->capture_default_str();
  syn->add_option("--mix-preset", synth.mix_preset, "Second labeling preset for a mixed set");
  syn->add_option("--mix-share", synth.mix_share, "Share of events labeled by --mix-preset")
      ->check(CLI::Range(0.0, 1.0));
  syn->add_option("--events", synth.events, "Number of events")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    for (CLI::App* sub : {sim, ext, cal, bench, syn})
      if (sub->parsed() && sub->count("--seed")) common.seed = seed_value;
    if (sim->parsed()) return cmd_simulate(common);
    if (ext->parsed()) return cmd_extract(input, common, site);
    if (cal->parsed()) return cmd_calibrate(events_dir, common, starts, cost);
    if (bench->parsed()) return cmd_bench(common, reps);
    if (pre->parsed()) return cmd_presets(preset_id);
    if (syn->parsed()) return cmd_synthesize(common, synth);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const LogFormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const InsufficientDataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
