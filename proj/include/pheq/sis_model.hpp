#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pheq/manifold.hpp"
#include "pheq/matrix_analysis.hpp"
#include "pheq/types.hpp"

namespace pheq {

// Per-node feedback gain u = h(x): bounded, smooth on (0,1], nondecreasing,
// h(0) = 0. The Jacobian only ever needs h'(x)*x, which stays finite at 0
// for every admissible kind (including Power with p < 1).
class ControlFunction {
 public:
  enum class Kind { Zero, Linear, Power, Saturating };

  ControlFunction() = default;

  [[nodiscard]] static ControlFunction zero();
  [[nodiscard]] static ControlFunction linear(double k);       // k*x, k >= 0
  [[nodiscard]] static ControlFunction power(double c, double p);  // c*x^p
  [[nodiscard]] static ControlFunction saturating(double c, double kappa);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double param_c() const { return c_; }
  [[nodiscard]] double param_p() const { return p_; }
  [[nodiscard]] double param_kappa() const { return kappa_; }

  [[nodiscard]] double value(double x) const;             // h(x)
  [[nodiscard]] double derivative(double x) const;        // h'(x), may be inf at 0
  [[nodiscard]] double derivative_times_x(double x) const;  // h'(x)*x, finite
  [[nodiscard]] bool is_zero() const;

 private:
  Kind kind_ = Kind::Zero;
  double c_ = 0.0;      // gain (k for Linear)
  double p_ = 1.0;      // Power exponent, p in (0, 2]
  double kappa_ = 1.0;  // Saturating half-saturation, > 0
};

using ControlSpec = std::vector<ControlFunction>;

[[nodiscard]] ControlSpec no_control(int n);
[[nodiscard]] bool all_zero(const ControlSpec& ctrl);

// Contact network: recovery rates d_i > 0, infection matrix b >= 0 whose
// digraph is strongly connected. Validated on construction.
class SISNetwork {
 public:
  SISNetwork(Vector d, Matrix b);

  [[nodiscard]] int size() const { return static_cast<int>(d_.size()); }
  [[nodiscard]] const Vector& recovery() const { return d_; }
  [[nodiscard]] const Matrix& infection() const { return b_; }

 private:
  Vector d_;
  Matrix b_;
};

// x_i' = -(d_i + h_i(x_i)) x_i + (1 - x_i) sum_j b_ij x_j.
// x must lie in [0,1]^n within 1e-9 slack.
[[nodiscard]] Vector sis_drift(const SISNetwork& net, const ControlSpec& ctrl,
                               const Vector& x);

// d(drift)/dx = -D - H(x) + B - XB - diag((Bx)_i) - diag(h_i'(x_i) x_i).
[[nodiscard]] Matrix sis_jacobian(const SISNetwork& net,
                                  const ControlSpec& ctrl, const Vector& x);

// Spectral abscissa of -D + B; the epidemic dies out iff <= 0.
[[nodiscard]] double epidemic_threshold(const SISNetwork& net);

// Unique positive equilibrium when the threshold is positive, else nullopt.
// Fixed-point iteration x_i <- S_i / (d_i + h_i(x_i) + S_i), S = Bx, started
// from half the Perron vector, then Newton polish. Guarantees
// ||drift||_inf < tol at the returned point or throws std::runtime_error.
[[nodiscard]] std::optional<Vector> solve_endemic(const SISNetwork& net,
                                                  const ControlSpec& ctrl,
                                                  double tol = 1e-12,
                                                  int max_iter = 10000);

struct InvariantBox {
  ManifoldBox box;
  double epsilon = 0.0;  // box lower bound is epsilon * perron
  Vector perron;         // max-normalized Perron vector of -D + B
};

// Shrinks epsilon by halving from 0.5 until every face of [eps*y, 1] passes
// the inward-flow check. Requires a positive threshold; throws
// std::runtime_error if no epsilon above 1e-8 works.
[[nodiscard]] InvariantBox build_invariant_box(const SISNetwork& net,
                                               const ControlSpec& ctrl,
                                               int samples_per_face = 64);

// Inward-flow verification on the given box's faces (lower faces need
// x_i' > 0, upper faces x_i' < 0). Sampling as in check_inward_on_faces.
[[nodiscard]] FaceReport verify_inward_pointing(const SISNetwork& net,
                                                const ControlSpec& ctrl,
                                                const ManifoldBox& box,
                                                int samples_per_face);

// True iff all Jacobian off-diagonals are >= -1e-12 at `samples` deterministic
// interior points of the box (cooperativity in the positive orthant order).
[[nodiscard]] bool kamke_muller_check(const SISNetwork& net,
                                      const ControlSpec& ctrl,
                                      const ManifoldBox& box, int samples);

struct ControlComparison {
  Vector x_star;      // uncontrolled equilibrium
  Vector x_bar_star;  // controlled equilibrium
  bool strictly_less = false;  // x_bar_star < x_star componentwise
};

// Solves both equilibria; strictly_less holds when every component drops by
// more than 1e-9. All-zero controls yield the degenerate equal report.
[[nodiscard]] ControlComparison control_comparison(const SISNetwork& net,
                                                   const ControlSpec& ctrl,
                                                   double tol = 1e-12);

// Equilibria of x' = (-D - alpha*Hbar + (I - X)B) x for alpha on an evenly
// spaced [0,1] grid, Hbar frozen at the controlled equilibrium. Verifies the
// family is componentwise strictly decreasing in alpha (constant when the
// control vanishes at the equilibrium) and that the endpoints reproduce the
// uncontrolled/controlled equilibria. Violations throw std::runtime_error.
[[nodiscard]] std::vector<std::pair<double, Vector>> continuation_alpha(
    const SISNetwork& net, const ControlSpec& ctrl, int grid_size,
    double tol = 1e-12);

}  // namespace pheq
