#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

namespace mergesim {

struct Bounds {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t size() const noexcept { return lo.size(); }

  void validate() const {
    if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("bounds: size mismatch or empty");
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]))
        throw std::invalid_argument("bounds[" + std::to_string(i) + "]: must be finite");
      if (!(lo[i] < hi[i]))
        throw std::invalid_argument("bounds[" + std::to_string(i) + "]: lower must be < upper");
    }
  }

  std::vector<double> clamp(std::vector<double> x) const {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
  }
};

struct NelderMeadOptions {
  double ftol = 1e-9;          // spread of simplex values
  double xtol = 1e-4;          // simplex diameter, in unit-box coordinates
  int max_evals = 400;         // per local search, restarts included
  int restarts = 2;            // fresh simplices around the incumbent
  double initial_step = 0.15;  // unit-box edge of the initial simplex
};

struct LocalResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  int evals = 0;
};

namespace nm_detail {

struct Vertex {
  std::vector<double> u;  // unit-box coordinates
  double f;
};

inline std::vector<double> to_unit(const std::vector<double>& x, const Bounds& b) {
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = std::clamp((x[i] - b.lo[i]) / (b.hi[i] - b.lo[i]), 0.0, 1.0);
  return u;
}

inline std::vector<double> from_unit(const std::vector<double>& u, const Bounds& b) {
  std::vector<double> x(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) x[i] = b.lo[i] + std::clamp(u[i], 0.0, 1.0) * (b.hi[i] - b.lo[i]);
  return x;
}

}  // namespace nm_detail

/// Nelder-Mead simplex descent inside a box. Trial points are projected onto
/// the box, so every evaluated point is feasible. The returned value never
/// exceeds f(x0).
template <typename F>
LocalResult bounded_nelder_mead(F&& f, const std::vector<double>& x0, const Bounds& b,
                                const NelderMeadOptions& opt = {}) {
  using nm_detail::Vertex;
  b.validate();
  if (x0.size() != b.size()) throw std::invalid_argument("bounded_nelder_mead: x0 dimension mismatch");
  const std::size_t n = b.size();
  int evals = 0;
  auto eval = [&](std::vector<double> u) {
    for (double& c : u) c = std::clamp(c, 0.0, 1.0);
    ++evals;
    const double v = f(nm_detail::from_unit(u, b));
    return Vertex{std::move(u), std::isnan(v) ? std::numeric_limits<double>::infinity() : v};
  };

  Vertex best = eval(nm_detail::to_unit(x0, b));
  for (int round = 0; round <= opt.restarts && evals < opt.max_evals; ++round) {
    std::vector<Vertex> s{best};
    for (std::size_t i = 0; i < n && evals < opt.max_evals; ++i) {
      std::vector<double> u = best.u;
      // Step inwards when the incumbent sits near the upper face.
      u[i] += u[i] + opt.initial_step <= 1.0 ? opt.initial_step : -opt.initial_step;
      s.push_back(eval(std::move(u)));
    }
    if (s.size() < n + 1) break;
    const double start_f = best.f;

    while (evals < opt.max_evals) {
      std::stable_sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& c) { return a.f < c.f; });
      double diam = 0.0;
      for (std::size_t k = 1; k <= n; ++k)
        for (std::size_t i = 0; i < n; ++i) diam = std::max(diam, std::abs(s[k].u[i] - s[0].u[i]));
      if (s[n].f - s[0].f <= opt.ftol && diam <= opt.xtol) break;
      if (diam <= opt.xtol * 1e-3) break;

      std::vector<double> c(n, 0.0);
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) c[i] += s[k].u[i] / static_cast<double>(n);
      auto along = [&](double t) {
        std::vector<double> u(n);
        for (std::size_t i = 0; i < n; ++i) u[i] = c[i] + t * (s[n].u[i] - c[i]);
        return u;
      };

      Vertex r = eval(along(-1.0));
      if (evals >= opt.max_evals) {  // budget spent: keep the reflection only if it helps
        if (r.f < s[n].f) s[n] = std::move(r);
        break;
      }
      if (r.f < s[0].f) {
        Vertex e = eval(along(-2.0));
        s[n] = e.f < r.f ? std::move(e) : std::move(r);
      } else if (r.f < s[n - 1].f) {
        s[n] = std::move(r);
      } else {
        Vertex k = r.f < s[n].f ? eval(along(-0.5)) : eval(along(0.5));
        if (k.f < std::min(r.f, s[n].f)) {
          s[n] = std::move(k);
        } else {
          for (std::size_t v = 1; v <= n && evals < opt.max_evals; ++v) {
            std::vector<double> u(n);
            for (std::size_t i = 0; i < n; ++i) u[i] = s[0].u[i] + 0.5 * (s[v].u[i] - s[0].u[i]);
            s[v] = eval(std::move(u));
          }
        }
      }
    }
    std::stable_sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& c) { return a.f < c.f; });
    if (s[0].f < best.f) best = s[0];
    if (!(best.f < start_f) && round > 0) break;
  }
  return LocalResult{nm_detail::from_unit(best.u, b), best.f, evals};
}

struct StartRecord {
  std::size_t index = 0;
  std::vector<double> x0;
  double f0 = 0.0;
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
};

struct MultistartResult {
  std::vector<double> best_x;
  double best_f = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  std::vector<StartRecord> trace;
};

/// Uniform start point `i` of a multistart run; each start has its own stream.
inline std::vector<double> start_point(const Bounds& b, std::uint64_t seed, std::size_t i) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<double> x(b.size());
  for (std::size_t d = 0; d < b.size(); ++d) x[d] = std::uniform_real_distribution<double>(b.lo[d], b.hi[d])(rng);
  return x;
}

/// Local searches from `starts` uniform points; the lowest final value wins
/// with ties going to the lowest start index. `f` must be safe to call
/// concurrently when threads > 1.
template <typename F>
MultistartResult multistart(F&& f, const Bounds& b, std::size_t starts, std::uint64_t seed,
                            const NelderMeadOptions& opt = {}, unsigned threads = 1) {
  b.validate();
  if (starts < 1) throw std::invalid_argument("multistart: starts must be >= 1");
  MultistartResult out;
  out.trace.resize(starts);
  auto run = [&](std::size_t i) {
    StartRecord& rec = out.trace[i];
    rec.index = i;
    rec.x0 = start_point(b, seed, i);
    rec.f0 = f(rec.x0);
    LocalResult lr = bounded_nelder_mead(f, rec.x0, b, opt);
    rec.x = std::move(lr.x);
    rec.f = lr.f;
    rec.evals = lr.evals;
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(starts)));
  if (threads == 1) {
    for (std::size_t i = 0; i < starts; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < starts; i = next++) run(i);
      });
    for (auto& th : pool) th.join();
  }
  for (const StartRecord& r : out.trace) {
    if (r.f < out.best_f) {
      out.best_f = r.f;
      out.best_x = r.x;
      out.best_index = r.index;
    }
  }
  if (out.best_x.empty()) {  // every start returned +inf
    out.best_x = out.trace.front().x;
    out.best_f = out.trace.front().f;
  }
  return out;
}

}  // namespace mergesim
