#pragma once

// Periodic grids on [-L, L)^n, sampled fields, the discrete Fourier transform
// contract, test-function generators and the dilations u -> u(2^{j rho} .).
//
// Transform convention (the single source of every normalization here):
//
//   forward   u^(xi_k) = dx^n  sum_x u(x) e^{-i <xi_k, x>}
//   inverse   u(x)     = (2 pi)^{-n} dxi^n  sum_k e^{i <x, xi_k>} u^(xi_k)
//
// with x_i = -L + i dx, dx = 2L/N, xi_k = k pi / L for -N/2 <= k < N/2 and
// dxi = pi / L. Both are Riemann sums of the continuous transforms, so the
// operator T_a u(x) = (2 pi)^{-n} int e^{i<x,xi>} a(x,xi) u^(xi) dxi becomes
// the plain inverse sum with a(x, xi_k) inserted. Parseval reads
//   dx^n sum |u|^2 = (2 pi)^{-n} dxi^n sum |u^|^2.
// Frequency-side values are stored in FFT order (index q <-> k = q or q - N).

#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "psido/util.hpp"

namespace psido {

/// Descriptor of the periodic grid [-L, L)^n with N points per axis.
struct GridSpec {
  int dim = 1;
  std::size_t points = 64;
  double half_period = pi;

  double spacing() const { return 2.0 * half_period / static_cast<double>(points); }
  double frequency_spacing() const { return pi / half_period; }
  std::size_t size() const { return dim == 1 ? points : points * points; }
  double cell_volume() const { return std::pow(spacing(), dim); }
  double frequency_cell_volume() const { return std::pow(frequency_spacing(), dim); }

  double coordinate(std::size_t i) const { return -half_period + static_cast<double>(i) * spacing(); }

  /// Signed wavenumber k of FFT-ordered index q.
  long wavenumber(std::size_t q) const {
    return q < points / 2 ? static_cast<long>(q) : static_cast<long>(q) - static_cast<long>(points);
  }
  double frequency_coordinate(std::size_t q) const {
    return static_cast<double>(wavenumber(q)) * frequency_spacing();
  }

  std::array<std::size_t, 2> unflatten(std::size_t flat) const {
    if (dim == 1) return {flat, 0};
    return {flat / points, flat % points};
  }
  std::size_t flatten(std::size_t i0, std::size_t i1) const { return dim == 1 ? i0 : i0 * points + i1; }

  Point point(std::size_t flat) const {
    const auto [i0, i1] = unflatten(flat);
    return {coordinate(i0), dim == 2 ? coordinate(i1) : 0.0};
  }
  Point frequency(std::size_t flat) const {
    const auto [q0, q1] = unflatten(flat);
    return {frequency_coordinate(q0), dim == 2 ? frequency_coordinate(q1) : 0.0};
  }

  /// Largest |xi| on the frequency lattice.
  double max_frequency() const {
    const double k = static_cast<double>(points / 2) * frequency_spacing();
    return dim == 1 ? k : k * std::sqrt(2.0);
  }

  bool operator==(const GridSpec& o) const {
    return dim == o.dim && points == o.points && half_period == o.half_period;
  }
};

inline GridSpec make_grid(int dim, std::size_t points_per_axis, double half_period) {
  if (dim != 1 && dim != 2) throw Error("make_grid: dim must be 1 or 2");
  if (points_per_axis < 8) throw Error("make_grid: need at least 8 points per axis");
  if (!is_power_of_two(points_per_axis)) throw Error("make_grid: points per axis must be a power of two");
  if (!(half_period > 0.0) || !std::isfinite(half_period)) throw Error("make_grid: half period must be positive");
  return GridSpec{dim, points_per_axis, half_period};
}

enum class Side { physical, frequency };

/// Complex samples on a grid, on one side of the transform. Immutable.
class SampledField {
 public:
  SampledField(GridSpec grid, Side side, std::vector<cd> values)
      : grid_(grid), side_(side), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw Error("SampledField: value count does not match grid");
  }

  const GridSpec& grid() const { return grid_; }
  Side side() const { return side_; }
  const std::vector<cd>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const cd& operator[](std::size_t i) const { return values_[i]; }

 private:
  GridSpec grid_;
  Side side_;
  std::vector<cd> values_;
};

namespace detail {

class FftPlans {
 public:
  static FftPlans& instance() {
    static FftPlans plans;
    return plans;
  }

  // sign = FFTW_FORWARD or FFTW_BACKWARD; unnormalized.
  void execute(int dim, std::size_t n, int sign, const std::vector<cd>& in, std::vector<cd>& out) {
    fftw_plan plan = get(dim, n, sign);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<cd*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
  }

 private:
  fftw_plan get(int dim, std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const std::size_t total = dim == 1 ? n : n * n;
    std::vector<cd> a(total), b(total);
    auto* pa = reinterpret_cast<fftw_complex*>(a.data());
    auto* pb = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = dim == 1 ? fftw_plan_dft_1d(static_cast<int>(n), pa, pb, sign, flags)
                              : fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), pa, pb, sign, flags);
    if (plan == nullptr) throw Error("fft: planner failed");
    plans_.emplace(key, plan);
    return plan;
  }

  std::mutex mutex_;
  std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans_;
};

// (-1)^{k_0 + k_1}: phase from the grid starting at -L instead of 0.
inline double shift_sign(const GridSpec& g, std::size_t flat) {
  const auto [q0, q1] = g.unflatten(flat);
  return ((q0 + q1) % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace detail

inline SampledField fft_forward(const SampledField& field) {
  if (field.side() != Side::physical) throw Error("fft_forward: field is not on the physical side");
  const GridSpec& g = field.grid();
  std::vector<cd> out(g.size());
  detail::FftPlans::instance().execute(g.dim, g.points, FFTW_FORWARD, field.values(), out);
  const double scale = g.cell_volume();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= scale * detail::shift_sign(g, i);
  return SampledField(g, Side::frequency, std::move(out));
}

inline SampledField fft_inverse(const SampledField& field) {
  if (field.side() != Side::frequency) throw Error("fft_inverse: field is not on the frequency side");
  const GridSpec& g = field.grid();
  std::vector<cd> in(field.values());
  for (std::size_t i = 0; i < in.size(); ++i) in[i] *= detail::shift_sign(g, i);
  std::vector<cd> out(g.size());
  detail::FftPlans::instance().execute(g.dim, g.points, FFTW_BACKWARD, in, out);
  // (2 pi)^{-n} dxi^n = (2L)^{-n}
  const double scale = std::pow(1.0 / (2.0 * g.half_period), g.dim);
  for (auto& v : out) v *= scale;
  return SampledField(g, Side::physical, std::move(out));
}

inline SampledField to_physical(const SampledField& f) {
  return f.side() == Side::physical ? f : fft_inverse(f);
}
inline SampledField to_frequency(const SampledField& f) {
  return f.side() == Side::frequency ? f : fft_forward(f);
}

/// Discrete L^2 norm under the transform convention (equal on both sides).
inline double l2_norm(const SampledField& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  const GridSpec& g = f.grid();
  const double w = f.side() == Side::physical ? g.cell_volume()
                                              : g.frequency_cell_volume() / std::pow(2.0 * pi, g.dim);
  return std::sqrt(s * w);
}

inline double max_abs(const SampledField& f) {
  double m = 0.0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

/// (dx^n sum |u|^p)^{1/p} on the physical side; p = infinity gives the max.
inline double lp_norm(const SampledField& f, double p) {
  if (f.side() != Side::physical) throw Error("lp_norm: field is not on the physical side");
  if (std::isinf(p)) return max_abs(f);
  if (!(p >= 1.0)) throw Error("lp_norm: p must be >= 1");
  double s = 0.0;
  for (const auto& v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

inline SampledField linear_combination(cd a, const SampledField& u, cd b, const SampledField& v) {
  if (!(u.grid() == v.grid()) || u.side() != v.side()) throw Error("linear_combination: field mismatch");
  std::vector<cd> out(u.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * u[i] + b * v[i];
  return SampledField(u.grid(), u.side(), std::move(out));
}

/// Samples f(x) at every grid point.
template <typename Fn>
SampledField sample(const GridSpec& g, Fn&& f) {
  std::vector<cd> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g.point(i));
  return SampledField(g, Side::physical, std::move(v));
}

// ---------------------------------------------------------------------------
// Test functions

enum class TestFunctionKind { gaussian, modulated_gaussian, bump, random_bandlimited };

struct TestFunctionParams {
  Point center{0.0, 0.0};
  double width = 0.5;
  Point modulation{0.0, 0.0};
  std::uint64_t seed = 1;
  long band_limit = 8;
};

inline constexpr double boundary_decay = 1e-10;

/// Physical-side test function. Gaussians and bumps must be negligible
/// (< 1e-10) at the boundary of [-L, L)^n; random band-limited fields are
/// real trigonometric polynomials with max(|k_0|, |k_1|) <= band_limit whose
/// coefficients depend only on the seed, so the same function is sampled at
/// every resolution.
inline SampledField make_test_function(TestFunctionKind kind, const TestFunctionParams& prm, const GridSpec& g) {
  const double L = g.half_period;
  double edge = L;  // distance from center to the nearest boundary face
  for (int a = 0; a < g.dim; ++a) edge = std::min(edge, L - std::abs(prm.center[a]));

  switch (kind) {
    case TestFunctionKind::gaussian:
    case TestFunctionKind::modulated_gaussian: {
      if (!(prm.width > 0.0)) throw Error("make_test_function: width must be positive");
      if (edge <= 0.0 || std::exp(-(edge * edge) / (prm.width * prm.width)) >= boundary_decay)
        throw Error("make_test_function: gaussian width too large for negligible boundary values");
      const bool modulated = kind == TestFunctionKind::modulated_gaussian;
      return sample(g, [&](const Point& x) {
        const double d0 = x[0] - prm.center[0], d1 = g.dim == 2 ? x[1] - prm.center[1] : 0.0;
        const double r2 = d0 * d0 + d1 * d1;
        cd v = std::exp(-r2 / (prm.width * prm.width));
        if (modulated) v *= std::polar(1.0, prm.modulation[0] * x[0] + prm.modulation[1] * x[1]);
        return v;
      });
    }
    case TestFunctionKind::bump: {
      if (!(prm.width > 0.0)) throw Error("make_test_function: width must be positive");
      if (prm.width >= edge) throw Error("make_test_function: bump support reaches the boundary");
      return sample(g, [&](const Point& x) {
        const double d0 = x[0] - prm.center[0], d1 = g.dim == 2 ? x[1] - prm.center[1] : 0.0;
        const double t = (d0 * d0 + d1 * d1) / (prm.width * prm.width);
        return t < 1.0 ? cd(std::exp(1.0 - 1.0 / (1.0 - t))) : cd(0.0);
      });
    }
    case TestFunctionKind::random_bandlimited: {
      const long B = prm.band_limit;
      if (B < 0) throw Error("make_test_function: negative band limit");
      if (B >= static_cast<long>(g.points / 2)) throw Error("make_test_function: band limit exceeds N/2");
      // Coefficients for a half-lattice of wavevectors, drawn in a fixed order.
      struct Mode {
        long k0, k1;
        double c, s;
      };
      std::vector<Mode> modes;
      Rng rng(prm.seed);
      double energy = 0.0;
      const long k1max = g.dim == 2 ? B : 0;
      for (long k0 = 0; k0 <= B; ++k0) {
        for (long k1 = -k1max; k1 <= k1max; ++k1) {
          if (k0 == 0 && k1 < 0) continue;
          Mode md{k0, k1, rng.normal(), rng.normal()};
          if (k0 == 0 && k1 == 0) md.s = 0.0;
          energy += md.c * md.c + md.s * md.s;
          modes.push_back(md);
        }
      }
      const double norm = energy > 0.0 ? 1.0 / std::sqrt(energy) : 1.0;
      const double w = pi / L;
      return sample(g, [&](const Point& x) {
        double v = 0.0;
        for (const auto& md : modes) {
          const double ph = w * (static_cast<double>(md.k0) * x[0] + static_cast<double>(md.k1) * x[1]);
          v += md.c * std::cos(ph) + md.s * std::sin(ph);
        }
        return cd(v * norm);
      });
    }
  }
  throw Error("make_test_function: unknown kind");
}

/// Largest max(|k_0|,|k_1|) whose coefficient exceeds rel * max coefficient.
inline long effective_band(const SampledField& f, double rel = 1e-12) {
  const SampledField h = to_frequency(f);
  const double top = max_abs(h);
  long band = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (std::abs(h[i]) <= rel * top) continue;
    const auto [q0, q1] = h.grid().unflatten(i);
    long k = std::labs(h.grid().wavenumber(q0));
    if (h.grid().dim == 2) k = std::max(k, std::labs(h.grid().wavenumber(q1)));
    band = std::max(band, k);
  }
  return band;
}

// ---------------------------------------------------------------------------
// Dilations

/// tau_j u(x) = u(2^{j rho} x).
struct Dilation {
  int scale_exponent = 0;
  double rho = 0.0;
  double factor() const { return std::exp2(static_cast<double>(scale_exponent) * rho); }
  Dilation inverse() const { return {-scale_exponent, rho}; }
};

enum class DilationMode {
  /// Output lives on [-L/s, L/s)^n with the same N; samples coincide, so the
  /// dilation is exact for every s.
  regrid,
  /// Output on the input grid, by evaluating the periodic trigonometric
  /// interpolant at s x. Exact for band-limited fields when s is a
  /// power-of-two ratio; otherwise accurate for fields that decay at the
  /// boundary.
  resample,
};

namespace detail {

// Trigonometric interpolant along one axis of the 1-D samples `c` (DFT
// coefficients, unnormalized), evaluated at arbitrary coordinates y.
inline cd eval_trig(const std::vector<cd>& dft, const GridSpec& g, double y) {
  const std::size_t N = g.points;
  const double t = (y + g.half_period) / g.spacing();  // fractional index
  cd s = 0.0;
  for (std::size_t q = 0; q < N; ++q) {
    const long k = g.wavenumber(q);
    const double ph = 2.0 * pi * static_cast<double>(k) * t / static_cast<double>(N);
    if (k == -static_cast<long>(N / 2)) {
      s += dft[q] * std::cos(ph);
    } else {
      s += dft[q] * std::polar(1.0, ph);
    }
  }
  return s / static_cast<double>(N);
}

inline std::vector<cd> resample_line(const std::vector<cd>& line, const GridSpec& g, double s) {
  const std::size_t N = g.points;
  GridSpec g1{1, N, g.half_period};
  std::vector<cd> dft(N);
  FftPlans::instance().execute(1, N, FFTW_FORWARD, line, dft);
  std::vector<cd> out(N);
  for (std::size_t i = 0; i < N; ++i) out[i] = eval_trig(dft, g1, s * g1.coordinate(i));
  return out;
}

}  // namespace detail

inline SampledField dilate(const SampledField& field, const Dilation& d, DilationMode mode = DilationMode::regrid) {
  if (field.side() != Side::physical) throw Error("dilate: field is not on the physical side");
  const double s = d.factor();
  const GridSpec& g = field.grid();
  if (d.scale_exponent == 0 || s == 1.0) return field;
  if (mode == DilationMode::regrid) {
    return SampledField(make_grid(g.dim, g.points, g.half_period / s), Side::physical, field.values());
  }
  if (s > 1.0 && static_cast<double>(effective_band(field)) * s > static_cast<double>(g.points / 2))
    throw Error("dilate: dilated field would alias (band limit * scale > N/2)");
  const std::size_t N = g.points;
  std::vector<cd> v = field.values();
  if (g.dim == 1) {
    v = detail::resample_line(v, g, s);
  } else {
    std::vector<cd> line(N);
    for (std::size_t i0 = 0; i0 < N; ++i0) {  // along axis 1
      for (std::size_t i1 = 0; i1 < N; ++i1) line[i1] = v[i0 * N + i1];
      line = detail::resample_line(line, g, s);
      for (std::size_t i1 = 0; i1 < N; ++i1) v[i0 * N + i1] = line[i1];
    }
    for (std::size_t i1 = 0; i1 < N; ++i1) {  // along axis 0
      for (std::size_t i0 = 0; i0 < N; ++i0) line[i0] = v[i0 * N + i1];
      line = detail::resample_line(line, g, s);
      for (std::size_t i0 = 0; i0 < N; ++i0) v[i0 * N + i1] = line[i0];
    }
  }
  return SampledField(g, Side::physical, std::move(v));
}

}  // namespace psido
