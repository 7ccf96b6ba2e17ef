#pragma once

// Muckenhoupt weights on the grid: power weights, discrete A_p constants over
// a cube family, the A_1 ratio sup M w / w, and weighted L^p norms.

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "psido/grid.hpp"
#include "psido/maximal.hpp"
#include "psido/util.hpp"

namespace psido {

struct Weight {
  std::vector<double> values;
  GridSpec grid;
  std::string description;
  std::string regularization;  // how singular points were treated, if at all
};

inline Weight make_weight(std::vector<double> values, const GridSpec& g, std::string description) {
  if (values.size() != g.size()) throw Error("make_weight: value count does not match grid");
  for (double v : values)
    if (!(v > 0.0) || !std::isfinite(v)) throw Error("make_weight: weights must be positive and finite");
  return {std::move(values), g, std::move(description), "none"};
}

/// max(|x|, dx/2)^a.
inline Weight make_power_weight(double a, const GridSpec& g) {
  if (!(a > -static_cast<double>(g.dim))) throw Error("make_power_weight: exponent must exceed -n");
  const double floor = 0.5 * g.spacing();
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a == 0.0 ? 1.0 : std::pow(std::max(norm2(g.point(i)), floor), a);
  std::ostringstream d, r;
  d << "|x|^" << a;
  r << "|x| replaced by max(|x|, " << floor << ")";
  Weight w = make_weight(std::move(v), g, d.str());
  w.regularization = r.str();
  return w;
}

struct ApEstimate {
  double p = 2.0;
  double constant = 1.0;
  CubeId argmax_cube;
  CubeFamily family;
  std::string regularization;
  std::string diagnostic;
};

/// max over family cubes of avg_Q(w) * avg_Q(w^{1/(1-p)})^{p-1}.
inline ApEstimate estimate_ap_constant(const Weight& w, double p, const CubeFamily& family) {
  if (!(p > 1.0)) throw Error("estimate_ap_constant: p must exceed 1");
  if (family.side_lengths.empty()) throw Error("cube family is empty");
  if (!(w.grid == family.grid)) throw Error("cube family grid does not match the weight");
  // The product is invariant under w -> c w; normalizing keeps the dual power in range.
  double top = 0.0;
  for (double v : w.values) top = std::max(top, v);
  const double e = 1.0 / (1.0 - p);
  std::vector<double> base(w.values.size()), dual(w.values.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    base[i] = w.values[i] / top;
    dual[i] = std::pow(base[i], e);
  }
  ApEstimate out;
  out.p = p;
  out.family = family;
  out.regularization = w.regularization;
  out.constant = 0.0;
  const auto widths = family.widths();
  for (std::size_t level = 0; level < widths.size(); ++level) {
    const auto aw = detail::box_averages(base, family.grid, widths[level], family.boundary_policy);
    const auto ad = detail::box_averages(dual, family.grid, widths[level], family.boundary_policy);
    for (std::size_t c = 0; c < aw.size(); ++c) {
      double prod = aw[c] * std::pow(ad[c], p - 1.0);
      if (!std::isfinite(prod)) prod = std::numeric_limits<double>::infinity();
      if (prod > out.constant) {
        out.constant = prod;
        out.argmax_cube = {c, level};
      }
    }
  }
  if (std::isinf(out.constant)) out.diagnostic = "overflow: dual weight average is not representable";
  return out;
}

/// sup over the grid of M w(x) / w(x).
inline double check_a1(const Weight& w, const CubeFamily& family) {
  if (!(w.grid == family.grid)) throw Error("cube family grid does not match the weight");
  std::vector<cd> v(w.values.begin(), w.values.end());
  const MaximalResult m = hl_maximal(SampledField(w.grid, Side::physical, std::move(v)), family, 1.0);
  double r = 0.0;
  for (std::size_t i = 0; i < m.values.size(); ++i) r = std::max(r, m.values[i] / w.values[i]);
  return r;
}

/// (dx^n sum |u|^p w)^{1/p}.
inline double weighted_norm(const SampledField& u, const Weight& w, double p) {
  if (u.side() != Side::physical) throw Error("weighted_norm: field is not on the physical side");
  if (!(u.grid() == w.grid)) throw Error("weighted_norm: grid mismatch");
  if (!(p >= 1.0) || std::isinf(p)) throw Error("weighted_norm: p must lie in [1, infinity)");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i]), p) * w.values[i];
  return std::pow(s * u.grid().cell_volume(), 1.0 / p);
}

}  // namespace psido
