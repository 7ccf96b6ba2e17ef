#pragma once

// Discrete Hardy-Littlewood maximal functions, the sharp function and BMO
// seminorms over an explicit finite family of cubes.
//
// A cube of side l centred at a grid point c holds w = round(l / dx) points
// per axis: offsets -(w/2) .. -(w/2) + w - 1 from c. Every grid point is a
// centre, so the supremum over cubes containing x ranges over all centres
// whose window covers x (the uncentred maximal function). Averages are
// point averages, i.e. (1/|Q|) int_Q with the point measure dx^n.

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "psido/grid.hpp"
#include "psido/util.hpp"

namespace psido {

enum class BoundaryPolicy { clip, periodic };

struct CubeFamily {
  GridSpec grid;
  std::vector<double> side_lengths;
  BoundaryPolicy boundary_policy = BoundaryPolicy::clip;

  /// Points per axis of the cubes of each side length.
  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w;
    const double dx = grid.spacing();
    for (double l : side_lengths) {
      const long k = std::lround(l / dx);
      w.push_back(static_cast<std::size_t>(std::clamp<long>(k, 1, static_cast<long>(grid.points))));
    }
    return w;
  }
};

/// Side lengths 2L * 2^{-k}, k = 0..levels (levels < 0: down to one cell).
inline CubeFamily make_dyadic_family(const GridSpec& g, int levels = -1,
                                     BoundaryPolicy policy = BoundaryPolicy::clip) {
  if (levels < 0) levels = log2_exact(g.points);
  CubeFamily f{g, {}, policy};
  for (int k = 0; k <= levels; ++k) f.side_lengths.push_back(std::ldexp(2.0 * g.half_period, -k));
  return f;
}

/// Ladder with `per_octave` side lengths per factor of two (distinct widths only).
inline CubeFamily make_dense_family(const GridSpec& g, int per_octave = 3,
                                    BoundaryPolicy policy = BoundaryPolicy::clip) {
  CubeFamily f{g, {}, policy};
  const int steps = per_octave * log2_exact(g.points);
  long last = -1;
  for (int k = 0; k <= steps; ++k) {
    const double l = 2.0 * g.half_period * std::exp2(-static_cast<double>(k) / per_octave);
    const long w = std::lround(l / g.spacing());
    if (w == last || w < 1) continue;
    last = w;
    f.side_lengths.push_back(static_cast<double>(w) * g.spacing());
  }
  return f;
}

struct CubeId {
  std::size_t center = 0;  // flat grid index
  std::size_t level = 0;   // index into side_lengths
};

enum class MaximalKind { maximal, sharp };

struct MaximalResult {
  std::vector<double> values;
  CubeFamily family;
  MaximalKind kind = MaximalKind::maximal;
  double exponent = 1.0;  // p for M_p
};

namespace detail {

inline long window_lo(std::size_t w) { return -static_cast<long>(w / 2); }
inline long window_hi(std::size_t w) { return window_lo(w) + static_cast<long>(w) - 1; }

// Index range [first, last] (possibly wrapping) of the window at centre c.
struct AxisWindow {
  long first, last;  // in unwrapped coordinates
};

inline AxisWindow axis_window(long c, std::size_t w, long N, BoundaryPolicy pol) {
  long a = c + window_lo(w), b = c + window_hi(w);
  if (pol == BoundaryPolicy::clip) {
    a = std::max(a, 0L);
    b = std::min(b, N - 1);
  }
  return {a, b};
}

inline long wrap(long i, long N) { return ((i % N) + N) % N; }

// Window sums along one axis for all centres; also returns the window counts.
inline void window_sums_1d(const long double* v, std::size_t stride, long N, std::size_t w, BoundaryPolicy pol,
                           std::vector<long double>& out, std::vector<long>& count) {
  std::vector<long double> prefix(static_cast<std::size_t>(2 * N + 1), 0.0L);
  for (long i = 0; i < 2 * N; ++i) prefix[i + 1] = prefix[i] + v[static_cast<std::size_t>(wrap(i, N)) * stride];
  out.assign(static_cast<std::size_t>(N), 0.0L);
  count.assign(static_cast<std::size_t>(N), 0);
  for (long c = 0; c < N; ++c) {
    AxisWindow win = axis_window(c, w, N, pol);
    long a = win.first, b = win.last;
    if (a < 0) {  // periodic: shift into [0, 2N)
      a += N;
      b += N;
    }
    out[c] = prefix[b + 1] - prefix[a];
    count[c] = b - a + 1;
  }
}

// out[x] = max over centres c whose window contains x of v[c] (one axis).
inline void covering_max_1d(const double* v, std::size_t stride, long N, std::size_t w, BoundaryPolicy pol,
                            double* out, std::size_t out_stride) {
  // c ranges over [x - hi, x - lo]
  const long a = -window_hi(w), b = -window_lo(w);
  std::deque<long> dq;  // indices (unwrapped) with decreasing values
  auto value = [&](long t) { return v[static_cast<std::size_t>(wrap(t, N)) * stride]; };
  long next = 0;
  long lo_limit = pol == BoundaryPolicy::clip ? 0 : a;
  long hi_limit = pol == BoundaryPolicy::clip ? N - 1 : N - 1 + b;
  next = lo_limit;
  for (long x = 0; x < N; ++x) {
    const long first = std::max(x + a, lo_limit);
    const long last = std::min(x + b, hi_limit);
    while (next <= last) {
      while (!dq.empty() && value(dq.back()) <= value(next)) dq.pop_back();
      dq.push_back(next);
      ++next;
    }
    while (!dq.empty() && dq.front() < first) dq.pop_front();
    out[static_cast<std::size_t>(x) * out_stride] = value(dq.front());
  }
}

// Max over covering centres in every axis.
inline std::vector<double> covering_max(const std::vector<double>& per_center, const GridSpec& g, std::size_t w,
                                        BoundaryPolicy pol) {
  const long N = static_cast<long>(g.points);
  std::vector<double> out(per_center.size());
  if (g.dim == 1) {
    covering_max_1d(per_center.data(), 1, N, w, pol, out.data(), 1);
    return out;
  }
  std::vector<double> tmp(per_center.size());
  for (long r = 0; r < N; ++r)
    covering_max_1d(per_center.data() + r * N, 1, N, w, pol, tmp.data() + r * N, 1);
  for (long c = 0; c < N; ++c) covering_max_1d(tmp.data() + c, static_cast<std::size_t>(N), N, w, pol,
                                               out.data() + c, static_cast<std::size_t>(N));
  return out;
}

// Averages of v over the cube of width w at every centre.
inline std::vector<double> box_averages(const std::vector<double>& v, const GridSpec& g, std::size_t w,
                                        BoundaryPolicy pol) {
  const long N = static_cast<long>(g.points);
  std::vector<long double> lv(v.begin(), v.end());
  std::vector<long double> sums;
  std::vector<long> count;
  std::vector<double> out(v.size());
  if (g.dim == 1) {
    window_sums_1d(lv.data(), 1, N, w, pol, sums, count);
    for (long c = 0; c < N; ++c) out[c] = static_cast<double>(sums[c] / count[c]);
    return out;
  }
  std::vector<long double> rows(v.size());
  std::vector<long> rcount(static_cast<std::size_t>(N));
  for (long r = 0; r < N; ++r) {
    window_sums_1d(lv.data() + r * N, 1, N, w, pol, sums, count);
    for (long c = 0; c < N; ++c) rows[r * N + c] = sums[c];
    rcount = count;  // identical for every row
  }
  for (long c = 0; c < N; ++c) {
    window_sums_1d(rows.data() + c, static_cast<std::size_t>(N), N, w, pol, sums, count);
    for (long r = 0; r < N; ++r) out[r * N + c] = static_cast<double>(sums[r] / (count[r] * rcount[c]));
  }
  return out;
}

// Flat indices of the points of the cube of width w at centre `flat`.
inline void cube_points(const GridSpec& g, std::size_t flat, std::size_t w, BoundaryPolicy pol,
                        std::vector<std::size_t>& out) {
  out.clear();
  const long N = static_cast<long>(g.points);
  const auto [i0, i1] = g.unflatten(flat);
  const AxisWindow w0 = axis_window(static_cast<long>(i0), w, N, pol);
  if (g.dim == 1) {
    for (long a = w0.first; a <= w0.last; ++a) out.push_back(static_cast<std::size_t>(wrap(a, N)));
    return;
  }
  const AxisWindow w1 = axis_window(static_cast<long>(i1), w, N, pol);
  for (long a = w0.first; a <= w0.last; ++a)
    for (long b = w1.first; b <= w1.last; ++b)
      out.push_back(g.flatten(static_cast<std::size_t>(wrap(a, N)), static_cast<std::size_t>(wrap(b, N))));
}

inline bool all_real(const SampledField& u) {
  for (const auto& v : u.values())
    if (v.imag() != 0.0) return false;
  return true;
}

inline double lower_median(std::vector<double>& v) {
  const std::size_t k = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(k), v.end());
  return v[k];
}

}  // namespace detail

inline void check_family(const SampledField& u, const CubeFamily& family) {
  if (family.side_lengths.empty()) throw Error("cube family is empty");
  if (!(u.grid() == family.grid)) throw Error("cube family grid does not match the field");
  if (u.side() != Side::physical) throw Error("maximal operators need a physical-side field");
}

/// M_p u(x) = sup over family cubes Q containing x of (avg_Q |u|^p)^{1/p}.
inline MaximalResult hl_maximal(const SampledField& u, const CubeFamily& family, double p = 1.0) {
  check_family(u, family);
  if (!(p >= 1.0)) throw Error("hl_maximal: p must be >= 1");
  std::vector<double> pw(u.size());
  for (std::size_t i = 0; i < pw.size(); ++i) pw[i] = p == 1.0 ? std::abs(u[i]) : std::pow(std::abs(u[i]), p);
  std::vector<double> best(u.size(), 0.0);
  for (std::size_t w : family.widths()) {
    const auto avg = detail::box_averages(pw, family.grid, w, family.boundary_policy);
    const auto cover = detail::covering_max(avg, family.grid, w, family.boundary_policy);
    for (std::size_t i = 0; i < best.size(); ++i) best[i] = std::max(best[i], cover[i]);
  }
  if (p != 1.0)
    for (auto& b : best) b = std::pow(b, 1.0 / p);
  return {std::move(best), family, MaximalKind::maximal, p};
}

/// Mean oscillation about the optimal constant for every centre at width w.
/// Real input: the lower median is an exact minimiser of c -> avg|u - c|.
/// Complex input: componentwise lower medians (a surrogate, not the exact inf).
inline std::vector<double> cube_oscillations(const SampledField& u, const CubeFamily& family, std::size_t w) {
  const GridSpec& g = family.grid;
  std::vector<double> osc(u.size());
  const bool real = detail::all_real(u);
  parallel_for(u.size(), [&](std::size_t c) {
    std::vector<std::size_t> pts;
    detail::cube_points(g, c, w, family.boundary_policy, pts);
    std::vector<double> re(pts.size()), im(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      re[k] = u[pts[k]].real();
      im[k] = u[pts[k]].imag();
    }
    const cd med(detail::lower_median(re), real ? 0.0 : detail::lower_median(im));
    double s = 0.0;
    for (std::size_t k : pts) s += std::abs(u[k] - med);
    osc[c] = s / static_cast<double>(pts.size());
  }, 8);
  return osc;
}

/// Mean oscillation about the cube average for every centre at width w.
inline std::vector<double> cube_mean_oscillations(const SampledField& u, const CubeFamily& family, std::size_t w) {
  const GridSpec& g = family.grid;
  std::vector<double> osc(u.size());
  parallel_for(u.size(), [&](std::size_t c) {
    std::vector<std::size_t> pts;
    detail::cube_points(g, c, w, family.boundary_policy, pts);
    cd mean = 0.0;
    for (std::size_t k : pts) mean += u[k];
    mean /= static_cast<double>(pts.size());
    double s = 0.0;
    for (std::size_t k : pts) s += std::abs(u[k] - mean);
    osc[c] = s / static_cast<double>(pts.size());
  }, 8);
  return osc;
}

/// u^#(x) = sup over family cubes Q containing x of inf_c avg_Q |u - c|.
inline MaximalResult sharp_function(const SampledField& u, const CubeFamily& family) {
  check_family(u, family);
  std::vector<double> best(u.size(), 0.0);
  for (std::size_t w : family.widths()) {
    const auto osc = cube_oscillations(u, family, w);
    const auto cover = detail::covering_max(osc, family.grid, w, family.boundary_policy);
    for (std::size_t i = 0; i < best.size(); ++i) best[i] = std::max(best[i], cover[i]);
  }
  return {std::move(best), family, MaximalKind::sharp, 1.0};
}

struct BmoSeminorms {
  double median_variant = 0.0;  // sup_Q inf_c avg_Q |u - c|
  double mean_variant = 0.0;    // sup_Q avg_Q |u - avg_Q u|
};

inline BmoSeminorms bmo_seminorms(const SampledField& u, const CubeFamily& family) {
  check_family(u, family);
  BmoSeminorms r;
  for (std::size_t w : family.widths()) {
    for (double v : cube_oscillations(u, family, w)) r.median_variant = std::max(r.median_variant, v);
    for (double v : cube_mean_oscillations(u, family, w)) r.mean_variant = std::max(r.mean_variant, v);
  }
  return r;
}

/// sup of the sharp function, i.e. the median-variant BMO seminorm.
inline double bmo_norm(const SampledField& u, const CubeFamily& family) {
  check_family(u, family);
  double r = 0.0;
  for (std::size_t w : family.widths())
    for (double v : cube_oscillations(u, family, w)) r = std::max(r, v);
  return r;
}

}  // namespace psido
