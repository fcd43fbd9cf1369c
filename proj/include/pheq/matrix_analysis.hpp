#pragma once

#include <optional>
#include <vector>

#include "pheq/types.hpp"

namespace pheq {

// Entries with |a_ij| <= this are treated as structural zeros of the digraph.
inline constexpr double kZeroEntryTol = 1e-12;
// Spectral abscissa within +-this of 0 is neither Hurwitz nor not-Hurwitz.
inline constexpr double kHurwitzTol = 1e-9;

// Directed graph of a matrix: edge (i, j) present iff a_ji != 0.
struct Digraph {
  int n = 0;
  std::vector<std::vector<int>> out;  // out[i] = successors of i

  [[nodiscard]] static Digraph from_matrix(const Matrix& m,
                                           double zero_tol = kZeroEntryTol);
  [[nodiscard]] bool strongly_connected() const;
};

[[nodiscard]] bool is_irreducible(const Matrix& m,
                                  double zero_tol = kZeroEntryTol);

// Largest real part over the spectrum.
[[nodiscard]] double spectral_abscissa(const Matrix& m);

// Largest eigenvalue magnitude.
[[nodiscard]] double spectral_radius(const Matrix& m);

// Dominant eigenpair of an irreducible Metzler matrix.
// vector > 0 componentwise, normalized so its max entry is 1.
struct PerronPair {
  double value = 0.0;   // equals the spectral abscissa
  Vector vector;        // strictly positive, max entry 1
  double residual = 0.0;  // ||M v - value v||_inf at return
};

// Power iteration on M + cI with c > max_i |m_ii|; Collatz-Wielandt bounds
// drive the stopping rule. Throws std::invalid_argument unless M is Metzler
// and irreducible.
[[nodiscard]] PerronPair perron_pair(const Matrix& m, double tol = 1e-12,
                                     int max_iter = 200000);

enum class Stability { Hurwitz, NotHurwitz, Indeterminate };

struct HurwitzResult {
  Stability verdict = Stability::Indeterminate;
  double abscissa = 0.0;
  double margin = 0.0;  // -abscissa; positive for stable matrices

  [[nodiscard]] bool ok() const { return verdict == Stability::Hurwitz; }
};

// Tri-state test: |s(M)| <= tol is reported Indeterminate, never silently
// collapsed to a boolean.
[[nodiscard]] HurwitzResult is_hurwitz(const Matrix& m,
                                       double tol = kHurwitzTol);

enum class MMatrixClass { NonsingularM, SingularM, NotM, NotZMatrix };

[[nodiscard]] const char* to_string(MMatrixClass c);
[[nodiscard]] const char* to_string(Stability s);

// NotZMatrix if any off-diagonal entry is positive; otherwise classified by
// the sign of the smallest eigenvalue real part.
[[nodiscard]] MMatrixClass classify_z_matrix(const Matrix& r,
                                             double tol = kHurwitzTol);

// True iff every leading principal minor is strictly positive.
[[nodiscard]] bool check_leading_minors(const Matrix& a);

// For a Z-matrix A with positive diagonal: if A is a nonsingular M-matrix,
// returns d = A^{-1} 1 > 0, which makes A diag(d) strictly row dominant
// (the inequalities are re-verified numerically before returning).
// Returns nullopt when A is singular or the verification fails.
// Throws std::invalid_argument when the sign-pattern precondition fails.
[[nodiscard]] std::optional<Vector> find_diagonal_scaling(const Matrix& a);

}  // namespace pheq
