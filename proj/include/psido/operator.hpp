#pragma once

// Pseudo-differential operators T_a u(x) = (2 pi)^{-n} int e^{i<x,xi>} a(x,xi) u^(xi) dxi
// on a grid, their Littlewood-Paley pieces T_j, frozen pieces T_{j,i}, the
// rescaled pieces T~_j with T_j = tau_j T~_j tau_{-j}, and the kernels
//   K_j(x, w) = (2 pi)^{-n} int e^{i<w,xi>} a(x,xi) psi_j(xi) dxi
// (with the same normalization as the inverse transform, so that
// T_j u(x) = int K_j(x, x - y) u(y) dy).
//
// The frequency lattice is treated as all of R^n: inputs are band-limited by
// construction and symbol values off the lattice never enter.

#include <atomic>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "psido/grid.hpp"
#include "psido/maximal.hpp"
#include "psido/partition.hpp"
#include "psido/symbol.hpp"
#include "psido/util.hpp"
#include "psido/weights.hpp"

namespace psido {

enum class ApplyPath { direct_quadrature, multiplier_fast_path };

struct OperatorHandle {
  SymbolSpec symbol;
  GridSpec grid;
  LPPartition partition = make_partition();
  ApplyPath path = ApplyPath::direct_quadrature;
};

/// Defaults to the fast path for x-independent symbols.
inline OperatorHandle make_operator(SymbolSpec symbol, const GridSpec& grid, LPPartition partition = make_partition(),
                                    std::optional<ApplyPath> path = std::nullopt) {
  const ApplyPath p =
      path.value_or(symbol.x_independent ? ApplyPath::multiplier_fast_path : ApplyPath::direct_quadrature);
  if (p == ApplyPath::multiplier_fast_path && !symbol.x_independent)
    throw Error("make_operator: the multiplier fast path needs an x-independent symbol");
  return {std::move(symbol), grid, partition, p};
}

namespace detail {

inline void check_input(const SampledField& u, const GridSpec& g) {
  if (!(u.grid() == g)) throw Error("apply: field grid does not match the operator grid");
  if (u.side() != Side::physical) throw Error("apply: field must be on the physical side");
}

inline cd finite_or_throw(cd v) {
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw Error("apply: symbol returned a non-finite value");
  return v;
}

// Fourier multiplier m(xi) applied to u.
template <typename Mult>
SampledField apply_multiplier(const GridSpec& g, Mult&& m, const SampledField& u) {
  const SampledField h = fft_forward(u);
  std::vector<cd> v(h.values());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= finite_or_throw(m(g.frequency(i)));
  return fft_inverse(SampledField(g, Side::frequency, std::move(v)));
}

// Direct quadrature (2L)^{-n} sum_xi e^{i<x,xi>} a(x,xi) u^(xi) at every grid x.
template <typename Sym>
SampledField apply_quadrature(const GridSpec& g, Sym&& a, const SampledField& u) {
  const SampledField h = fft_forward(u);
  const std::size_t N = g.points, total = g.size();
  // e^{i xi_k x_i} = (-1)^k e^{2 pi i k i / N}
  std::vector<cd> roots(N);
  for (std::size_t m = 0; m < N; ++m) roots[m] = std::polar(1.0, 2.0 * pi * static_cast<double>(m) / static_cast<double>(N));
  auto phase = [&](std::size_t i, std::size_t q) {
    const long k = g.wavenumber(q);
    const std::size_t m = static_cast<std::size_t>((((k * static_cast<long>(i)) % static_cast<long>(N)) + static_cast<long>(N)) % static_cast<long>(N));
    return (k % 2 == 0) ? roots[m] : -roots[m];
  };
  std::vector<cd> table(N * N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t q = 0; q < N; ++q) table[i * N + q] = phase(i, q);
  std::vector<Point> xis(total);
  for (std::size_t k = 0; k < total; ++k) xis[k] = g.frequency(k);
  const double scale = std::pow(1.0 / (2.0 * g.half_period), g.dim);
  std::vector<cd> out(total);
  std::atomic<bool> bad{false};
  parallel_for(total, [&](std::size_t xf) {
    const Point x = g.point(xf);
    const auto [i0, i1] = g.unflatten(xf);
    cd acc = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
      const cd av = a(x, xis[k]);
      if (!std::isfinite(av.real()) || !std::isfinite(av.imag())) {
        bad = true;
        continue;
      }
      if (av == 0.0) continue;
      const auto [q0, q1] = g.unflatten(k);
      cd e = table[i0 * N + q0];
      if (g.dim == 2) e *= table[i1 * N + q1];
      acc += e * av * h[k];
    }
    out[xf] = acc * scale;
  }, 4);
  if (bad) throw Error("apply: symbol returned a non-finite value");
  return SampledField(g, Side::physical, std::move(out));
}

template <typename Sym>
SampledField apply_symbol(const GridSpec& g, ApplyPath path, Sym&& a, const SampledField& u) {
  if (path == ApplyPath::multiplier_fast_path)
    return apply_multiplier(g, [&](const Point& xi) { return a(Point{0.0, 0.0}, xi); }, u);
  return apply_quadrature(g, a, u);
}

}  // namespace detail

inline SampledField apply(const OperatorHandle& op, const SampledField& u) {
  detail::check_input(u, op.grid);
  return detail::apply_symbol(op.grid, op.path, op.symbol, u);
}

/// T_j u: symbol a(x, xi) psi_j(xi).
inline SampledField apply_dyadic(const OperatorHandle& op, const SampledField& u, int j) {
  detail::check_input(u, op.grid);
  op.partition.check_shell(j, op.grid);
  const LPPartition& part = op.partition;
  const SymbolSpec& a = op.symbol;
  return detail::apply_symbol(op.grid, op.path,
                              [&](const Point& x, const Point& xi) {
                                const double s = part.shell(j, xi);
                                return s == 0.0 ? cd(0.0) : a(x, xi) * s;
                              },
                              u);
}

/// Index of the grid point at `x`, or an error if `x` is not one.
inline std::size_t grid_index(const GridSpec& g, const Point& x) {
  std::array<std::size_t, 2> idx{0, 0};
  for (int a = 0; a < g.dim; ++a) {
    const double t = (x[a] + g.half_period) / g.spacing();
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-9 || r < 0.0 || r >= static_cast<double>(g.points))
      throw Error("point is not on the grid");
    idx[a] = static_cast<std::size_t>(r);
  }
  if (g.dim == 1 && x[1] != 0.0) throw Error("point is not on the grid");
  return g.flatten(idx[0], idx[1]);
}

/// T_{j,i} u: multiplier a(x_i, xi) psi_j(xi).
inline SampledField apply_frozen(const OperatorHandle& op, const SampledField& u, int j, const Point& x_i) {
  detail::check_input(u, op.grid);
  op.partition.check_shell(j, op.grid);
  const Point xf = op.grid.point(grid_index(op.grid, x_i));
  return detail::apply_multiplier(
      op.grid,
      [&](const Point& xi) {
        const double s = op.partition.shell(j, xi);
        return s == 0.0 ? cd(0.0) : op.symbol(xf, xi) * s;
      },
      u);
}

// ---------------------------------------------------------------------------
// Kernels

struct DyadicKernel {
  int j = 1;
  GridSpec grid;
  std::vector<Point> x_points;
  std::vector<std::vector<cd>> values;  // values[x][w], w over the grid points
};

/// All grid points for n = 1; a 4 x 4 sub-lattice (16 points) for n = 2.
inline std::vector<Point> kernel_sample_points(const GridSpec& g) {
  std::vector<Point> out;
  if (g.dim == 1) {
    for (std::size_t i = 0; i < g.points; ++i) out.push_back(g.point(i));
    return out;
  }
  const std::size_t step = g.points / 4;
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) out.push_back(g.point(g.flatten(a * step + step / 2, b * step + step / 2)));
  return out;
}

inline DyadicKernel kernel(const OperatorHandle& op, int j, const std::vector<Point>& x_points) {
  if (x_points.empty()) throw Error("kernel: no x points");
  op.partition.check_shell(j, op.grid);
  const GridSpec& g = op.grid;
  DyadicKernel k{j, g, {}, {}};
  for (const auto& x : x_points) k.x_points.push_back(g.point(grid_index(g, x)));
  k.values.resize(k.x_points.size());
  parallel_for(k.x_points.size(), [&](std::size_t s) {
    std::vector<cd> v(g.size());
    for (std::size_t q = 0; q < v.size(); ++q) {
      const Point xi = g.frequency(q);
      const double w = op.partition.shell(j, xi);
      v[q] = w == 0.0 ? cd(0.0) : detail::finite_or_throw(op.symbol(k.x_points[s], xi) * w);
    }
    k.values[s] = fft_inverse(SampledField(g, Side::frequency, std::move(v))).values();
  }, 1);
  return k;
}

/// K_j(x, w) by direct summation over the lattice, for arbitrary (x, w).
inline cd kernel_value_direct(const OperatorHandle& op, int j, const Point& x, const Point& w) {
  const GridSpec& g = op.grid;
  cd acc = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) {
    const Point xi = g.frequency(q);
    const double s = op.partition.shell(j, xi);
    if (s == 0.0) continue;
    acc += std::polar(1.0, w[0] * xi[0] + w[1] * xi[1]) * op.symbol(x, xi) * s;
  }
  return acc * std::pow(g.frequency_spacing() / (2.0 * pi), g.dim);
}

struct KernelDecayOptions {
  std::vector<int> shells{2, 3, 4, 5, 6};
  int moment_order = 2;
  Point x_point{0.0, 0.0};
  /// Largest xi-derivative order the caller vouches for; < 0 runs the certifier.
  int certified_order = -1;
  double certify_tolerance = 0.1;
  double base_tolerance = 0.3;  // on the N = 0 slope
  double step_tolerance = 0.4;  // on each N -> N + 1 slope change
};

struct KernelDecayProfile {
  std::vector<int> shells;
  std::vector<std::vector<double>> moments;  // [N][shell]
  std::vector<double> slopes;                // fitted log2 growth per shell, per N
  std::vector<double> predicted;             // 2m + n - 2 rho N
  double base_tolerance = 0.3;
  double step_tolerance = 0.4;
  std::string certification;
};

/// Moments sum_w |w|^{2N} |K_j(x, w)|^2 dw^n over the shells, with log2 slopes.
inline KernelDecayProfile kernel_decay_profile(const OperatorHandle& op, const KernelDecayOptions& opt = {}) {
  if (opt.moment_order < 0) throw Error("kernel_decay_profile: negative moment order");
  if (opt.shells.size() < 2) throw Error("kernel_decay_profile: need at least two shells");
  KernelDecayProfile out;
  out.shells = opt.shells;
  out.base_tolerance = opt.base_tolerance;
  out.step_tolerance = opt.step_tolerance;
  const int need = 2 * opt.moment_order;
  int certified = opt.certified_order;
  if (certified < 0) {
    if (need > 4) throw Error("kernel_decay_profile: insufficient certified smoothness (certifier stops at order 4)");
    const ClassCertificate c =
        certify_class(op.symbol, need, default_sample_spec(op.grid.dim), opt.certify_tolerance, op.grid.dim);
    if (!c.pass) {
      std::string why = "kernel_decay_profile: insufficient certified smoothness";
      if (!c.diagnostics.empty()) why += " (" + c.diagnostics.front() + ")";
      throw Error(why);
    }
    certified = need;
    out.certification = "certified to order " + std::to_string(need) + " on " + c.sample_set_description;
  } else {
    out.certification = "order " + std::to_string(certified) + " supplied by caller";
  }
  if (need > certified) throw Error("kernel_decay_profile: insufficient certified smoothness");

  const GridSpec& g = op.grid;
  out.moments.assign(static_cast<std::size_t>(opt.moment_order + 1), std::vector<double>(opt.shells.size()));
  for (std::size_t s = 0; s < opt.shells.size(); ++s) {
    const DyadicKernel k = kernel(op, opt.shells[s], {opt.x_point});
    for (int N = 0; N <= opt.moment_order; ++N) {
      double m = 0.0;
      for (std::size_t w = 0; w < g.size(); ++w)
        m += std::pow(norm2(g.point(w)), 2 * N) * std::norm(k.values[0][w]);
      out.moments[N][s] = m * g.cell_volume();
    }
  }
  std::vector<double> js(opt.shells.begin(), opt.shells.end());
  for (int N = 0; N <= opt.moment_order; ++N) {
    std::vector<double> ly;
    for (double m : out.moments[N]) ly.push_back(std::log2(m));
    out.slopes.push_back(fit_slope(js, ly));
    out.predicted.push_back(2.0 * op.symbol.order + g.dim - 2.0 * op.symbol.rho * N);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rescaled pieces

/// T~_j with symbol a_j(x, xi) = a(2^{-j rho} x, 2^{j rho} xi) psi(2^{-j(1-rho)} xi),
/// acting on the grid of half period L 2^{j rho}. tau_{-j} carries the samples
/// of u unchanged onto that grid, and tau_j carries them back.
struct RescaledPiece {
  int j = 1;
  double rho = 0.0;
  double scale = 1.0;  // 2^{j rho}
  SymbolSpec rescaled_symbol;
  GridSpec outer_grid;
  GridSpec inner_grid;
  ApplyPath path = ApplyPath::direct_quadrature;

  /// T~_j v for v on the inner grid.
  SampledField apply_inner(const SampledField& v) const {
    detail::check_input(v, inner_grid);
    return detail::apply_symbol(inner_grid, path, rescaled_symbol, v);
  }

  /// tau_j T~_j tau_{-j} u for u on the outer grid.
  SampledField apply(const SampledField& u) const {
    detail::check_input(u, outer_grid);
    const SampledField v(inner_grid, Side::physical, u.values());
    const SampledField w = apply_inner(v);
    return SampledField(outer_grid, Side::physical, w.values());
  }
};

inline RescaledPiece rescaled_piece(const OperatorHandle& op, int j) {
  if (j < 1) throw Error("rescaled_piece: shell index must be >= 1");
  op.partition.check_shell(j, op.grid);
  RescaledPiece r;
  r.j = j;
  r.rho = op.symbol.rho;
  r.scale = std::exp2(j * r.rho);
  r.outer_grid = op.grid;
  r.inner_grid = make_grid(op.grid.dim, op.grid.points, op.grid.half_period * r.scale);
  r.path = op.path;
  const double s = r.scale, down = std::exp2(-j * (1.0 - r.rho));
  const Evaluator a = op.symbol.evaluator;
  const LPPartition part = op.partition;
  r.rescaled_symbol = op.symbol;
  r.rescaled_symbol.evaluator = [a, part, s, down](const Point& x, const Point& xi) {
    const double w = part.psi({down * xi[0], down * xi[1]});
    if (w == 0.0) return cd(0.0);
    return a({x[0] / s, x[1] / s}, {s * xi[0], s * xi[1]}) * w;
  };
  std::ostringstream d;
  d << "rescaled piece j=" << j << " of " << op.symbol.description;
  r.rescaled_symbol.description = d.str();
  return r;
}

// ---------------------------------------------------------------------------
// Norm ratios

enum class NormKind { l2, lp, weighted_lp, linf_to_bmo };

struct NormSpace {
  NormKind kind = NormKind::l2;
  double p = 2.0;
  std::optional<Weight> weight;       // weighted_lp
  std::optional<CubeFamily> family;   // linf_to_bmo (defaults to the dyadic family)
};

/// ||T_a u||_out / ||u||_in for each battery member.
inline std::vector<double> operator_norm_ratios(const OperatorHandle& op, const NormSpace& space,
                                                const std::vector<SampledField>& battery) {
  if (battery.empty()) throw Error("estimate_operator_norm: empty battery");
  if (space.kind == NormKind::weighted_lp && !space.weight) throw Error("estimate_operator_norm: weight missing");
  std::vector<double> out;
  for (const auto& u : battery) {
    if (max_abs(u) == 0.0) throw Error("estimate_operator_norm: battery contains a zero field");
    const SampledField t = apply(op, u);
    double num = 0.0, den = 1.0;
    switch (space.kind) {
      case NormKind::l2:
        num = l2_norm(t);
        den = l2_norm(u);
        break;
      case NormKind::lp:
        num = lp_norm(t, space.p);
        den = lp_norm(u, space.p);
        break;
      case NormKind::weighted_lp:
        num = weighted_norm(t, *space.weight, space.p);
        den = weighted_norm(u, *space.weight, space.p);
        break;
      case NormKind::linf_to_bmo: {
        const CubeFamily f = space.family.value_or(make_dyadic_family(op.grid));
        num = bmo_norm(t, f);
        den = max_abs(u);
        break;
      }
    }
    out.push_back(num / den);
  }
  return out;
}

/// Largest ratio over the battery: a lower bound for the operator norm.
inline double estimate_operator_norm(const OperatorHandle& op, const NormSpace& space,
                                     const std::vector<SampledField>& battery) {
  const auto r = operator_norm_ratios(op, space, battery);
  return *std::max_element(r.begin(), r.end());
}

}  // namespace psido
