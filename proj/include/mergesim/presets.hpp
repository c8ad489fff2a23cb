#pragma once

#include <array>
#include <charconv>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mergesim/game.hpp"
#include "mergesim/mobil.hpp"

namespace mergesim {

enum class ModelKind { Mobil, Mbrgt };

inline std::string_view to_string(ModelKind m) noexcept {
  return m == ModelKind::Mobil ? "mobil" : "mbrgt";
}

inline ModelKind parse_model(std::string_view s) {
  if (s == "mobil") return ModelKind::Mobil;
  if (s == "mbrgt") return ModelKind::Mbrgt;
  throw std::invalid_argument("unknown model '" + std::string(s) + "' (expected mobil or mbrgt)");
}

/// Parameter order used by parameter vectors, presets and calibration.
inline const std::vector<std::string>& parameter_names(ModelKind m) {
  static const std::vector<std::string> mobil{"b_safe", "da_th", "p"};
  static const std::vector<std::string> mbrgt{"w1", "w2", "w3", "w4", "w5", "u1", "u2", "u3"};
  return m == ModelKind::Mobil ? mobil : mbrgt;
}

/// Exact decimal parse; throws on trailing garbage.
inline double parse_decimal(std::string_view s) {
  double out = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  return out;
}

struct Preset {
  std::string_view id;
  ModelKind model;
  std::vector<std::string_view> decimals;  // in parameter_names() order
  std::string_view provenance;

  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(decimals.size());
    for (auto d : decimals) v.push_back(parse_decimal(d));
    return v;
  }
};

/// Optimized parameter sets for the keep-straight and lane-change behaviors.
class PresetRegistry {
 public:
  static const PresetRegistry& instance() {
    static const PresetRegistry reg;
    return reg;
  }

  const std::vector<Preset>& all() const noexcept { return presets_; }

  const Preset& get(std::string_view id) const {
    for (const Preset& p : presets_)
      if (p.id == id) return p;
    std::string msg = "unknown preset '" + std::string(id) + "'; available:";
    for (const Preset& p : presets_) msg += " " + std::string(p.id);
    throw std::invalid_argument(msg);
  }

  bool contains(std::string_view id) const noexcept {
    for (const Preset& p : presets_)
      if (p.id == id) return true;
    return false;
  }

 private:
  PresetRegistry()
      : presets_{
            {"mobil-ks", ModelKind::Mobil, {"0.22", "3.72", "0.46"},
             "MOBIL, keep-straight behavior optimization"},
            {"mobil-lc", ModelKind::Mobil, {"3.36", "0.24", "-2.18"},
             "MOBIL, lane-change behavior optimization"},
            {"mbrgt-ks", ModelKind::Mbrgt,
             {"11.90", "5107.72", "9786.81", "225.13", "4852.29", "662.01", "1362.93", "9391.42"},
             "mBRGT-D, keep-straight behavior optimization"},
            {"mbrgt-lc", ModelKind::Mbrgt,
             {"5.06", "3.90", "0.38", "1.71", "0.62", "4.71", "4.24", "6.95"},
             "mBRGT-D, lane-change behavior optimization"},
        } {
    for (const Preset& p : presets_) {
      if (p.decimals.size() != parameter_names(p.model).size())
        throw std::logic_error("preset arity mismatch: " + std::string(p.id));
    }
  }

  std::vector<Preset> presets_;
};

inline std::vector<double> load_preset(std::string_view id) {
  return PresetRegistry::instance().get(id).values();
}

inline MobilParams mobil_from_vector(std::span<const double> v) {
  if (v.size() != 3) throw std::invalid_argument("mobil parameter vector needs 3 entries");
  return MobilParams{v[0], v[1], v[2]};
}

inline std::vector<double> to_vector(const MobilParams& p) { return {p.b_safe, p.da_th, p.p}; }

/// Payoff weights from a vector; the rationality settings come from `base`.
inline MbrgtParams mbrgt_from_vector(std::span<const double> v, MbrgtParams base = {}) {
  if (v.size() != 8) throw std::invalid_argument("mbrgt parameter vector needs 8 entries");
  for (int i = 0; i < 5; ++i) base.w[i] = v[i];
  for (int i = 0; i < 3; ++i) base.u[i] = v[5 + i];
  return base;
}

inline std::vector<double> to_vector(const MbrgtParams& p) {
  return {p.w[0], p.w[1], p.w[2], p.w[3], p.w[4], p.u[0], p.u[1], p.u[2]};
}

inline std::string_view keep_straight_preset(ModelKind m) noexcept {
  return m == ModelKind::Mobil ? "mobil-ks" : "mbrgt-ks";
}
inline std::string_view lane_change_preset(ModelKind m) noexcept {
  return m == ModelKind::Mobil ? "mobil-lc" : "mbrgt-lc";
}

/// Share of lag vehicles observed to change lanes, used as the default
/// lane-change preset weight.
inline constexpr double kDefaultLaneChangeShare = 0.033;

/// Bernoulli choice between the keep-straight and lane-change presets.
template <typename Urbg>
std::string_view sample_behavior(Urbg& rng, ModelKind model, double p_lc = kDefaultLaneChangeShare) {
  if (!(p_lc >= 0.0 && p_lc <= 1.0)) throw std::invalid_argument("sample_behavior: p_lc outside [0, 1]");
  std::bernoulli_distribution draw(p_lc);
  return draw(rng) ? lane_change_preset(model) : keep_straight_preset(model);
}

}  // namespace mergesim
