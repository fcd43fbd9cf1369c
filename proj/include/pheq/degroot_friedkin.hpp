#pragma once

#include "pheq/types.hpp"

namespace pheq {

// Self-confidence evolution over a sequence of issues: the state lives on the
// open probability simplex and updates by x <- normalize(gamma_i / (1 - x_i)).
class DFModel {
 public:
  // Requires n >= 3, gamma_i in (0, 0.5) strictly, sum gamma = 1 (1e-12).
  explicit DFModel(Vector gamma);

  [[nodiscard]] int size() const { return static_cast<int>(gamma_.size()); }
  [[nodiscard]] const Vector& gamma() const { return gamma_; }

 private:
  Vector gamma_;
};

// Membership in the truncated simplex: sum = 1 within tol and
// delta <= x_i <= 1 - delta.
[[nodiscard]] bool in_simplex(const Vector& x, double delta = 1e-6,
                              double sum_tol = 1e-12);

// One update step. Throws std::domain_error when any x_i is within 1e-9 of
// the pole at 1 or the input leaves the simplex.
[[nodiscard]] Vector df_map(const DFModel& model, const Vector& x);

// Iterates df_map until the step size drops below tol. Throws
// std::runtime_error with the last residual when max_iter is exhausted.
[[nodiscard]] Vector df_fixed_point(const DFModel& model, const Vector& x0,
                                    double tol = 1e-12, int max_iter = 100000);

// Jacobian of the map in the drop-last-coordinate chart
// (x_1..x_{n-1} free, x_n = 1 - sum): an (n-1)x(n-1) matrix. Eigenvalues at a
// fixed point are chart-independent.
[[nodiscard]] Matrix df_chart_jacobian(const DFModel& model, const Vector& x);

// Largest eigenvalue magnitude of the chart Jacobian at x.
[[nodiscard]] double df_contraction_factor(const DFModel& model,
                                           const Vector& x);

// True iff every chart-Jacobian eigenvalue magnitude is < 1 - 1e-9 at the
// fixed point. Throws std::invalid_argument when x_star is not a fixed point
// (map residual >= 1e-8).
[[nodiscard]] bool certify_contraction(const DFModel& model,
                                       const Vector& x_star);

}  // namespace pheq
