#pragma once

#include <string>
#include <vector>

#include "pheq/manifold.hpp"
#include "pheq/matrix_analysis.hpp"
#include "pheq/types.hpp"

namespace pheq {

enum class RootIndex { Plus, Minus, Degenerate };

[[nodiscard]] const char* to_string(RootIndex idx);

// Sign of det(-jac): Plus/Minus when |det| > 1e-10 * scale with scale the
// Hadamard bound of -jac (product of row norms); Degenerate otherwise.
[[nodiscard]] RootIndex index_of(const Matrix& jac_at_root);

struct EquilibriumRecord {
  Vector location;
  double residual = 0.0;        // ||drift||_inf at location
  RootIndex index = RootIndex::Degenerate;
  Stability hurwitz = Stability::Indeterminate;
  double det_neg_jacobian = 0.0;
  double hurwitz_abscissa = 0.0;

  [[nodiscard]] int index_value() const;  // +1 / -1 / 0
};

struct EnumerationResult {
  std::vector<EquilibriumRecord> records;  // deduplicated, sorted
  int seeds_total = 0;
  int seeds_converged = 0;
};

// Multi-start Newton from a seeds_per_dim^n interior grid (n <= 6; a fixed
// Halton budget beyond). Diverging seeds are dropped; converged roots are
// validated to lie in the box (1e-9 slack) and deduplicated at distance 1e-6.
// Deterministic regardless of PH_EQ_THREADS.
[[nodiscard]] EnumerationResult enumerate_equilibria(const DriftFn& drift,
                                                     const JacobianFn& jacobian,
                                                     const ManifoldBox& box,
                                                     int seeds_per_dim,
                                                     double tol);

// Brute-force oracle: local minima of ||drift||_inf over a points_per_dim^n
// lattice spanning the box, kept when the minimum is small against the local
// slope times the cell diagonal. Independent of the Newton path.
[[nodiscard]] std::vector<Vector> grid_root_scan(const DriftFn& drift,
                                                 const ManifoldBox& box,
                                                 int points_per_dim);

enum class Verdict { Certified, Refuted, Inconclusive };

[[nodiscard]] const char* to_string(Verdict v);

struct CertificateConfig {
  int seeds_per_dim = 4;
  double tol = 1e-10;
  int samples_per_face = 64;
  bool grid_cross_check = true;  // applied when n <= 3 and verdict Certified
  int grid_points_per_dim = 200;
};

struct CertificateReport {
  std::vector<EquilibriumRecord> equilibria;
  int index_sum = 0;
  int euler_characteristic = 1;  // boxes are contractible
  bool boundary_ok = false;
  Verdict unique_verdict = Verdict::Inconclusive;
  FaceReport boundary;
  int seeds_total = 0;
  int seeds_converged = 0;
  bool grid_checked = false;
  std::vector<std::string> notes;
};

// Uniqueness certificate on a box: inward boundary flow + exactly one
// equilibrium, index +1, index sum 1, Hurwitz there => Certified (with a
// 200^n grid-oracle cross check for n <= 3). Two verified roots or a
// verified unstable root => Refuted. Anything else => Inconclusive with
// reasons in notes.
[[nodiscard]] CertificateReport certify_uniqueness(
    const DriftFn& drift, const JacobianFn& jacobian, const ManifoldBox& box,
    const CertificateConfig& config = {});

}  // namespace pheq
