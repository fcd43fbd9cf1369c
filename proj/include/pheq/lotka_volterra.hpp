#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pheq/manifold.hpp"
#include "pheq/types.hpp"

namespace pheq {

// x_i' = F_i(x) x_i with F_i(x) = d_i + sum_j a_ij x_j - q_i x_i^2.
// The quadratic self-limitation q_i >= 0 is the built-in smooth perturbation
// family; q = 0 recovers the affine growth law.
class GLVModel {
 public:
  GLVModel(Vector d, Matrix a);
  GLVModel(Vector d, Matrix a, Vector quadratic);

  [[nodiscard]] int size() const { return static_cast<int>(d_.size()); }
  [[nodiscard]] const Vector& rates() const { return d_; }
  [[nodiscard]] const Matrix& interactions() const { return a_; }
  [[nodiscard]] const Vector& quadratic() const { return quad_; }

  [[nodiscard]] Vector growth(const Vector& x) const;           // F(x)
  [[nodiscard]] Matrix growth_jacobian(const Vector& x) const;  // dF/dx

 private:
  Vector d_;
  Matrix a_;
  Vector quad_;
};

[[nodiscard]] Vector lv_drift(const GLVModel& model, const Vector& x);

// diag(x) dF/dx + diag(F(x)).
[[nodiscard]] Matrix lv_jacobian(const GLVModel& model, const Vector& x);

// W = {x : ||x|| <= radius, x_i >= floor}. Certificates run on the inscribed
// axis box [floor, radius/sqrt(n)]^n.
struct LVRegion {
  double radius = 0.0;
  double floor = 0.0;

  LVRegion(double radius, double floor);
  [[nodiscard]] ManifoldBox inscribed_box(int n) const;
};

// Candidate sector bound matrix. Stored as-is; row signs are judged in
// check_goh so invalid bounds surface as report failures, not throws.
struct SectorBound {
  Matrix a_bound;

  explicit SectorBound(Matrix a);
  // diag < 0 strictly and off-diagonals >= 0.
  [[nodiscard]] bool valid(std::string* why = nullptr) const;
};

struct FeasibleResult {
  std::optional<Vector> root;  // in int(W), growth residual < tol
  double best_residual = 0.0;
  int seeds_total = 0;
  int seeds_converged = 0;
};

// Multi-start Newton on F(x) = 0 over the inscribed box (positive roots of
// the drift have F = 0). Deterministic; returns the lexicographically
// smallest root when several coexist in the region.
[[nodiscard]] FeasibleResult solve_feasible(const GLVModel& model,
                                            const LVRegion& region,
                                            double tol = 1e-12);

struct GohReport {
  bool pass = false;
  bool bound_valid = false;  // sign pattern of the bound matrix
  bool minors_ok = false;    // leading minors of -A_bound all positive
  double worst_diag_margin = 0.0;     // min_i (a_ii - dF_i/dx_i) over points
  double worst_offdiag_margin = 0.0;  // min_{i!=j} (a_ij - |dF_i/dx_j|)
  std::string detail;
};

// Sector verification at the given points: dF_i/dx_i <= a_ii < 0 and
// |dF_i/dx_j| <= a_ij, plus positive leading minors of -A_bound.
// Margins carry a -1e-12 numerical slack.
[[nodiscard]] GohReport check_goh(const GLVModel& model,
                                  const SectorBound& bound,
                                  const std::vector<Vector>& points);

struct EnvelopeReport {
  bool holds = false;          // y(t) <= z(t) + 1e-6 at every output time
  bool bound_hurwitz = false;  // is_hurwitz(A_bound)
  double worst_violation = 0.0;  // max_i,t (y_i - z_i); <= 0 when dominated
  double envelope_final = 0.0;   // ||z(T)||_inf
  double deviation_final = 0.0;  // ||y(T)||_inf
};

// Co-integrates the model from x0 and the linear envelope z' = eps*A_bound*z
// from z(0) = |x0 - x_star|, then checks componentwise domination
// y(t) = |x(t) - x_star| <= z(t). Domination is guaranteed only while
// A_bound * y stays nonpositive; the report records violations rather than
// throwing, so callers can flag bad bounds or skewed starts.
[[nodiscard]] EnvelopeReport comparison_envelope(const GLVModel& model,
                                                 const SectorBound& bound,
                                                 const Vector& x_star,
                                                 const Vector& x0,
                                                 double epsilon, double T);

}  // namespace pheq
