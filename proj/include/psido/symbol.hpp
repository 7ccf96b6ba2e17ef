#pragma once

// Symbols a(x, xi) with claimed Hoermander class parameters (m, rho, delta),
// the built-in families, and a sampling certifier for the class bounds
//   |d_x^beta d_xi^alpha a(x, xi)| <= C_{alpha,beta} <xi>^{m - rho|alpha| + delta|beta|}.
//
// The certifier is a falsifier: it estimates the constants by central finite
// differences on a finite sample set and reports violations it can see
// (unstable estimates, growth across octaves). Passing is evidence, not proof.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "psido/util.hpp"

namespace psido {

using Evaluator = std::function<cd(const Point& x, const Point& xi)>;

struct SymbolSpec {
  Evaluator evaluator;
  double order = 0.0;  // m
  double rho = 1.0;
  double delta = 0.0;
  bool x_independent = true;
  std::string description;

  cd operator()(const Point& x, const Point& xi) const { return evaluator(x, xi); }
};

/// Same evaluator, different claimed class.
inline SymbolSpec with_claim(SymbolSpec s, double m, double rho, double delta) {
  s.order = m;
  s.rho = rho;
  s.delta = delta;
  return s;
}

inline SymbolSpec make_constant_symbol(cd value = 1.0) {
  std::ostringstream d;
  d << "constant " << value.real();
  if (value.imag() != 0.0) d << (value.imag() > 0 ? "+" : "") << value.imag() << "i";
  return {[value](const Point&, const Point&) { return value; }, 0.0, 1.0, 0.0, true, d.str()};
}

/// <xi>^m; exact order m in S^m_{1,0}.
inline SymbolSpec make_bessel_symbol(double m) {
  return {[m](const Point&, const Point& xi) { return cd(std::pow(bracket(xi), m)); },
          m,
          1.0,
          0.0,
          true,
          "bessel <xi>^" + std::to_string(m)};
}

/// Cutoff used by the oscillatory family: 0 for |xi| <= R, 1 for |xi| >= 2R.
inline double miyachi_cutoff(double r, double radius) { return smooth_step((r - radius) / radius); }

/// phi(xi) |xi|^m exp(i |xi|^{1 - rho}), in S^m_{rho,0}.
inline SymbolSpec make_miyachi_symbol(double m, double rho, double cutoff_radius = 1.0) {
  if (!(rho >= 0.0 && rho < 1.0)) throw Error("make_miyachi_symbol: rho must lie in [0, 1)");
  if (!(cutoff_radius > 0.0)) throw Error("make_miyachi_symbol: cutoff radius must be positive");
  const double R = cutoff_radius;
  std::ostringstream d;
  d << "miyachi m=" << m << " rho=" << rho << " R=" << R;
  return {[m, rho, R](const Point&, const Point& xi) {
            const double r = norm2(xi);
            if (r <= R) return cd(0.0);
            return miyachi_cutoff(r, R) * std::pow(r, m) * std::polar(1.0, std::pow(r, 1.0 - rho));
          },
          m,
          rho,
          0.0,
          true,
          d.str()};
}

struct XModulation {
  double epsilon = 0.5;
  double delta = 0.5;
};

/// b(x, xi) (1 + eps sum_j w_j(xi) sin(2^{j delta} (x_0 + x_1))) where w_j is a
/// smooth dyadic partition in xi (shell j around |xi| ~ 2^j). The factor lies
/// in S^0_{1,delta}, so x-derivatives of order k grow like <xi>^{delta k}
/// while xi-derivatives keep the base symbol's decay.
inline SymbolSpec make_x_dependent_symbol(const SymbolSpec& base, const XModulation& mod) {
  if (!(mod.epsilon >= 0.0 && mod.epsilon < 1.0)) throw Error("make_x_dependent_symbol: epsilon must lie in [0, 1)");
  if (!(mod.delta >= 0.0 && mod.delta < 1.0)) throw Error("make_x_dependent_symbol: delta must lie in [0, 1)");
  if (mod.epsilon == 0.0) return base;
  const double eps = mod.epsilon, dl = mod.delta;
  auto chi = [](double r) { return 1.0 - smooth_step(r - 1.0); };  // 1 on [0,1], 0 on [2,inf)
  Evaluator b = base.evaluator;
  SymbolSpec out;
  out.evaluator = [b, eps, dl, chi](const Point& x, const Point& xi) {
    const double r = norm2(xi);
    const double theta = x[0] + x[1];
    double sum = chi(r) * std::sin(theta);  // low-frequency block
    if (r > 1.0) {
      const int jc = static_cast<int>(std::floor(std::log2(r)));
      for (int j = std::max(1, jc - 1); j <= jc + 1; ++j) {
        const double w = chi(std::ldexp(r, -j)) - chi(std::ldexp(r, -j + 1));
        if (w != 0.0) sum += w * std::sin(std::exp2(j * dl) * theta);
      }
    }
    return b(x, xi) * (1.0 + eps * sum);
  };
  out.order = base.order;
  out.rho = base.rho;
  out.delta = std::max(base.delta, dl);
  out.x_independent = false;
  std::ostringstream d;
  d << base.description << " x-modulated eps=" << eps << " delta=" << dl;
  out.description = d.str();
  return out;
}

// ---------------------------------------------------------------------------
// Certification

/// alpha acts on xi, beta on x; components beyond the dimension stay zero.
struct DerivativeIndex {
  std::array<int, 2> alpha{0, 0};
  std::array<int, 2> beta{0, 0};

  int xi_order() const { return alpha[0] + alpha[1]; }
  int x_order() const { return beta[0] + beta[1]; }
  auto operator<=>(const DerivativeIndex&) const = default;

  std::string label() const {
    std::ostringstream s;
    s << "a(" << alpha[0] << "," << alpha[1] << ")b(" << beta[0] << "," << beta[1] << ")";
    return s.str();
  }
};

inline std::vector<DerivativeIndex> derivative_indices(int dim, int max_order) {
  std::vector<DerivativeIndex> out;
  const int hi1 = dim == 2 ? max_order : 0;
  for (int a0 = 0; a0 <= max_order; ++a0)
    for (int a1 = 0; a1 <= hi1; ++a1)
      for (int b0 = 0; b0 <= max_order; ++b0)
        for (int b1 = 0; b1 <= hi1; ++b1)
          if (a0 + a1 + b0 + b1 <= max_order) out.push_back({{a0, a1}, {b0, b1}});
  return out;
}

/// Central finite-difference estimate of d_x^beta d_xi^alpha a at (x, xi).
inline cd finite_difference(const SymbolSpec& a, const Point& x, const Point& xi, const DerivativeIndex& idx,
                            double x_step, double xi_step) {
  // coordinates: 0,1 -> x ; 2,3 -> xi
  const std::array<int, 4> order{idx.beta[0], idx.beta[1], idx.alpha[0], idx.alpha[1]};
  const std::array<double, 4> step{x_step, x_step, xi_step, xi_step};
  struct Node {
    std::array<double, 4> offset{};
    double weight = 1.0;
  };
  std::vector<Node> nodes{Node{}};
  double denom = 1.0;
  for (int c = 0; c < 4; ++c) {
    const int k = order[c];
    if (k == 0) continue;
    std::vector<Node> next;
    double binom = 1.0;
    for (int i = 0; i <= k; ++i) {
      if (i > 0) binom = binom * (k - i + 1) / i;
      const double w = (i % 2 == 0 ? 1.0 : -1.0) * binom;
      const double off = (0.5 * k - i) * step[c];
      for (const auto& n : nodes) {
        Node m = n;
        m.offset[c] += off;
        m.weight *= w;
        next.push_back(m);
      }
    }
    nodes = std::move(next);
    denom *= std::pow(step[c], k);
  }
  cd acc = 0.0;
  for (const auto& n : nodes) {
    const Point xs{x[0] + n.offset[0], x[1] + n.offset[1]};
    const Point ks{xi[0] + n.offset[2], xi[1] + n.offset[3]};
    acc += n.weight * a(xs, ks);
  }
  return acc / denom;
}

struct SampleSpec {
  std::vector<Point> x_points;
  std::vector<double> xi_magnitudes;  // dyadic, increasing
  std::vector<Point> xi_directions;   // unit vectors
  double x_step = 1e-2;
  double xi_step_factor = 0.05;  // xi-step = factor * <xi>^rho
  double growth_slope_tolerance = 0.15;  // allowed log2-growth per octave in the upper octaves

  std::string describe() const {
    std::ostringstream s;
    s << x_points.size() << " x-points, " << xi_directions.size() << " directions, |xi| in [" << xi_magnitudes.front()
      << ", " << xi_magnitudes.back() << "] (" << xi_magnitudes.size() << " dyadic magnitudes), x-step " << x_step
      << ", xi-step " << xi_step_factor << "*<xi>^rho";
    return s.str();
  }
};

/// |xi| = 2^lo, ..., 2^hi with a handful of x-points and directions. The
/// default starts at |xi| = 4, past the low-frequency cutoffs of the built-in
/// families (compactly supported pieces lie in every class).
inline SampleSpec default_sample_spec(int dim, int lo_octave = 2, int hi_octave = 10) {
  SampleSpec s;
  if (dim == 1) {
    s.x_points = {{0.0, 0.0}, {0.37, 0.0}, {-1.1, 0.0}};
    s.xi_directions = {{1.0, 0.0}, {-1.0, 0.0}};
  } else {
    s.x_points = {{0.0, 0.0}, {0.37, -0.21}, {-1.1, 0.6}};
    const double c = std::sqrt(0.5);
    s.xi_directions = {{1.0, 0.0}, {0.0, -1.0}, {c, c}, {-0.6, 0.8}};
  }
  for (int k = lo_octave; k <= hi_octave; ++k) s.xi_magnitudes.push_back(std::exp2(k));
  return s;
}

struct ClassCertificate {
  int max_multiindex_order = 0;
  std::map<DerivativeIndex, double> constants;  // estimated C_{alpha,beta}
  std::map<DerivativeIndex, std::vector<double>> per_magnitude;  // sup per |xi| sample
  std::string sample_set_description;
  bool pass = false;
  double tolerance = 0.0;
  std::vector<std::string> diagnostics;
};

inline ClassCertificate certify_class(const SymbolSpec& a, int max_order, const SampleSpec& spec, double tolerance,
                                      int dim = 1) {
  if (max_order < 0 || max_order > 4) throw Error("certify_class: max order must lie in [0, 4]");
  if (spec.xi_magnitudes.size() < 2 || spec.xi_magnitudes.back() < 16.0 * spec.xi_magnitudes.front())
    throw Error("certify_class: sample set must span at least 4 octaves");
  if (spec.x_points.empty() || spec.xi_directions.empty()) throw Error("certify_class: empty sample set");

  ClassCertificate cert;
  cert.max_multiindex_order = max_order;
  cert.tolerance = tolerance;
  cert.sample_set_description = spec.describe();

  const std::size_t nm = spec.xi_magnitudes.size();
  const std::size_t nd = spec.xi_directions.size();
  const std::size_t nx = spec.x_points.size();
  const std::size_t total = nm * nd * nx;

  // Normalized ratios |D a| / <xi>^{m - rho|alpha| + delta|beta|}, step h and h/2.
  auto estimate = [&](const DerivativeIndex& idx, double scale, std::vector<double>& out) {
    out.assign(total, 0.0);
    parallel_for(total, [&](std::size_t s) {
      const std::size_t im = s / (nd * nx), id = (s / nx) % nd, ix = s % nx;
      const Point dir = spec.xi_directions[id];
      const Point xi{spec.xi_magnitudes[im] * dir[0], spec.xi_magnitudes[im] * dir[1]};
      const double br = bracket(xi);
      const double hxi = scale * spec.xi_step_factor * std::pow(br, a.rho);
      const double hx = scale * spec.x_step;
      const cd d = finite_difference(a, spec.x_points[ix], xi, idx, hx, hxi);
      const double weight = std::pow(br, a.order - a.rho * idx.xi_order() + a.delta * idx.x_order());
      out[s] = std::abs(d) / weight;
    }, 4);
  };

  bool pass = true;
  double c00 = 0.0;
  std::vector<double> coarse, fine;
  for (const auto& idx : derivative_indices(dim, max_order)) {
    estimate(idx, 1.0, coarse);
    estimate(idx, 0.5, fine);
    double ch = 0.0, cf = 0.0;
    bool finite = true;
    std::vector<double> per(nm, 0.0);
    for (std::size_t s = 0; s < total; ++s) {
      if (!std::isfinite(coarse[s]) || !std::isfinite(fine[s])) finite = false;
      ch = std::max(ch, coarse[s]);
      cf = std::max(cf, fine[s]);
      per[s / (nd * nx)] = std::max(per[s / (nd * nx)], fine[s]);
    }
    if (idx.xi_order() == 0 && idx.x_order() == 0) c00 = cf;
    cert.constants[idx] = cf;
    cert.per_magnitude[idx] = per;
    if (!finite) {
      pass = false;
      cert.diagnostics.push_back(idx.label() + ": non-finite estimate");
      continue;
    }
    const double floor = 1e-6 * std::max(1.0, c00);
    if (std::abs(ch - cf) > tolerance * std::max(ch, cf) && std::max(ch, cf) > floor) {
      pass = false;
      std::ostringstream d;
      d << idx.label() << ": unstable under step halving (" << ch << " vs " << cf << ")";
      cert.diagnostics.push_back(d.str());
    }
    // growth across the upper octaves
    const std::size_t first = nm / 2;
    if (nm - first >= 2 && *std::max_element(per.begin() + first, per.end()) > floor) {
      std::vector<double> lx, ly;
      for (std::size_t k = first; k < nm; ++k) {
        lx.push_back(std::log2(spec.xi_magnitudes[k]));
        ly.push_back(std::log2(std::max(per[k], floor)));
      }
      const double slope = fit_slope(lx, ly);
      if (slope > spec.growth_slope_tolerance) {
        pass = false;
        std::ostringstream d;
        d << idx.label() << ": normalized bound grows across octaves (log2 slope " << slope << ")";
        cert.diagnostics.push_back(d.str());
      }
    }
  }
  cert.pass = pass;
  return cert;
}

/// sup over the given (x, xi) pairs of |d_x^beta d_xi^alpha a|, unnormalized.
inline double sup_derivative(const SymbolSpec& a, const DerivativeIndex& idx, const std::vector<Point>& xs,
                             const std::vector<Point>& xis, double x_step, double xi_step) {
  double sup = 0.0;
  for (const auto& x : xs)
    for (const auto& xi : xis) sup = std::max(sup, std::abs(finite_difference(a, x, xi, idx, x_step, xi_step)));
  return sup;
}

}  // namespace psido
