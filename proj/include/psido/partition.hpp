#pragma once

// Littlewood-Paley partition of unity.
//
// chi is radial, 1 on |xi| <= t0 and 0 on |xi| >= t1, with t0 = 2/C and
// t1 = min(2C, 2 t0). Then
//   psi_{-1}(xi) = chi(xi),   psi(xi) = chi(xi) - chi(2 xi)
// and the sum psi_{-1} + sum_{j=1}^{J} psi(2^{-j} xi) telescopes to
// chi(2^{-J} xi), which is 1 for |xi| <= 2^J t0. psi vanishes for
// |xi| <= t0/2 = 1/C and for |xi| >= t1, so supp psi lies in
// {1/C <= |xi| <= 2C}; t1 <= 2 t0 keeps at most two consecutive shells
// nonzero at any xi.

#include <cmath>
#include <vector>

#include "psido/grid.hpp"
#include "psido/util.hpp"

namespace psido {

class LPPartition {
 public:
  explicit LPPartition(double shell_constant) : c_(shell_constant) {
    if (!(shell_constant > 1.0) || !std::isfinite(shell_constant))
      throw Error("make_partition: shell constant must exceed 1");
    t0_ = 2.0 / c_;
    t1_ = std::min(2.0 * c_, 2.0 * t0_);
  }

  double shell_constant() const { return c_; }
  double inner_radius() const { return t0_; }
  double outer_radius() const { return t1_; }

  double chi(double r) const { return 1.0 - smooth_step((r - t0_) / (t1_ - t0_)); }

  double psi_minus1(const Point& xi) const { return chi(norm2(xi)); }
  double psi(const Point& xi) const {
    const double r = norm2(xi);
    return chi(r) - chi(2.0 * r);
  }

  /// Multiplier of shell j: psi_{-1}(xi) for j = -1, psi(2^{-j} xi) for j >= 1.
  double shell(int j, const Point& xi) const {
    const double r = norm2(xi);
    if (j == -1) return chi(r);
    return chi(std::ldexp(r, -j)) - chi(std::ldexp(r, -j + 1));
  }

  /// Smallest J >= 1 such that shells -1, 1..J sum to one on the whole lattice.
  int max_shell(const GridSpec& g) const {
    const double top = g.max_frequency();
    int J = 1;
    while (std::ldexp(t0_, J) < top) ++J;
    return J;
  }

  /// Shell indices meeting the lattice: -1, 1, ..., J_max.
  std::vector<int> active_shells(const GridSpec& g) const {
    std::vector<int> out{-1};
    for (int j = 1; j <= max_shell(g); ++j) out.push_back(j);
    return out;
  }

  void check_shell(int j, const GridSpec& g) const {
    if (j != -1 && (j < 1 || j > max_shell(g))) throw Error("shell index outside the active range");
  }

 private:
  double c_;
  double t0_;
  double t1_;
};

inline LPPartition make_partition(double shell_constant = 2.0) { return LPPartition(shell_constant); }

/// Applies the shell multiplier; the result is on the same side as the input.
inline SampledField shell_project(const SampledField& field, const LPPartition& part, int j) {
  const GridSpec& g = field.grid();
  part.check_shell(j, g);
  const SampledField h = to_frequency(field);
  std::vector<cd> v(h.values());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= part.shell(j, g.frequency(i));
  SampledField out(g, Side::frequency, std::move(v));
  return field.side() == Side::physical ? fft_inverse(out) : out;
}

}  // namespace psido
