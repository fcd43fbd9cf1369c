#include "pheq/matrix_analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <stdexcept>
#include <string>

namespace pheq {

namespace {

void require_square_finite(const Matrix& m, const char* who) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw std::invalid_argument(std::string(who) + ": matrix must be square, n >= 1");
  }
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(who) + ": matrix has non-finite entries");
  }
}

}  // namespace

Digraph Digraph::from_matrix(const Matrix& m, double zero_tol) {
  require_square_finite(m, "Digraph::from_matrix");
  const int n = static_cast<int>(m.rows());
  Digraph g;
  g.n = n;
  g.out.assign(n, {});
  // Edge (i, j) iff m(j, i) != 0: influence flows from i into row j.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && std::abs(m(j, i)) > zero_tol) g.out[i].push_back(j);
    }
  }
  return g;
}

bool Digraph::strongly_connected() const {
  if (n <= 1) return true;
  // Reachability from node 0 along edges and along reversed edges.
  auto reach = [&](bool reversed) {
    std::vector<std::vector<int>> rev;
    const std::vector<std::vector<int>>* adj = &out;
    if (reversed) {
      rev.assign(n, {});
      for (int i = 0; i < n; ++i)
        for (int j : out[i]) rev[j].push_back(i);
      adj = &rev;
    }
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : (*adj)[v]) {
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == n;
  };
  return reach(false) && reach(true);
}

bool is_irreducible(const Matrix& m, double zero_tol) {
  return Digraph::from_matrix(m, zero_tol).strongly_connected();
}

double spectral_abscissa(const Matrix& m) {
  require_square_finite(m, "spectral_abscissa");
  if (m.rows() == 1) return m(0, 0);
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("spectral_abscissa: eigensolver did not converge");
  }
  return es.eigenvalues().real().maxCoeff();
}

double spectral_radius(const Matrix& m) {
  require_square_finite(m, "spectral_radius");
  if (m.rows() == 1) return std::abs(m(0, 0));
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("spectral_radius: eigensolver did not converge");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

PerronPair perron_pair(const Matrix& m, double tol, int max_iter) {
  require_square_finite(m, "perron_pair");
  const int n = static_cast<int>(m.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && m(i, j) < -kZeroEntryTol) {
        throw std::invalid_argument("perron_pair: matrix is not Metzler");
      }
    }
  }
  if (!is_irreducible(m)) {
    throw std::invalid_argument("perron_pair: matrix is reducible");
  }

  if (n == 1) return {m(0, 0), Vector::Ones(1), 0.0};

  // Shift into a nonnegative matrix with positive diagonal: primitive because
  // the digraph is strongly connected, so plain power iteration converges and
  // the Collatz-Wielandt quotients bracket the dominant eigenvalue.
  const double c = m.diagonal().cwiseAbs().maxCoeff() + 1.0;
  Matrix a = m + c * Matrix::Identity(n, n);
  Vector v = Vector::Ones(n);
  double lo = 0.0, hi = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = a * v;
    lo = (w.array() / v.array()).minCoeff();
    hi = (w.array() / v.array()).maxCoeff();
    v = w / w.maxCoeff();
    if (hi - lo <= tol * std::max(1.0, std::abs(hi))) {
      const double value = 0.5 * (lo + hi) - c;
      const double residual = (m * v - value * v).cwiseAbs().maxCoeff();
      return {value, v, residual};
    }
  }
  throw std::runtime_error("perron_pair: no convergence after " +
                           std::to_string(max_iter) + " iterations, bracket " +
                           std::to_string(hi - lo));
}

HurwitzResult is_hurwitz(const Matrix& m, double tol) {
  const double s = spectral_abscissa(m);
  HurwitzResult r;
  r.abscissa = s;
  r.margin = -s;
  if (s < -tol) {
    r.verdict = Stability::Hurwitz;
  } else if (s > tol) {
    r.verdict = Stability::NotHurwitz;
  } else {
    r.verdict = Stability::Indeterminate;
  }
  return r;
}

const char* to_string(MMatrixClass c) {
  switch (c) {
    case MMatrixClass::NonsingularM: return "NonsingularM";
    case MMatrixClass::SingularM: return "SingularM";
    case MMatrixClass::NotM: return "NotM";
    case MMatrixClass::NotZMatrix: return "NotZMatrix";
  }
  return "?";
}

const char* to_string(Stability s) {
  switch (s) {
    case Stability::Hurwitz: return "true";
    case Stability::NotHurwitz: return "false";
    case Stability::Indeterminate: return "indeterminate";
  }
  return "?";
}

MMatrixClass classify_z_matrix(const Matrix& r, double tol) {
  require_square_finite(r, "classify_z_matrix");
  const int n = static_cast<int>(r.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && r(i, j) > 0.0) return MMatrixClass::NotZMatrix;
    }
  }
  double min_re;
  if (n == 1) {
    min_re = r(0, 0);
  } else {
    Eigen::EigenSolver<Matrix> es(r, false);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("classify_z_matrix: eigensolver did not converge");
    }
    min_re = es.eigenvalues().real().minCoeff();
  }
  if (min_re > tol) return MMatrixClass::NonsingularM;
  if (min_re >= -tol) return MMatrixClass::SingularM;
  return MMatrixClass::NotM;
}

bool check_leading_minors(const Matrix& a) {
  require_square_finite(a, "check_leading_minors");
  const int n = static_cast<int>(a.rows());
  for (int k = 1; k <= n; ++k) {
    if (a.topLeftCorner(k, k).determinant() <= 0.0) return false;
  }
  return true;
}

std::optional<Vector> find_diagonal_scaling(const Matrix& a) {
  require_square_finite(a, "find_diagonal_scaling");
  const int n = static_cast<int>(a.rows());
  for (int i = 0; i < n; ++i) {
    if (a(i, i) <= 0.0) {
      throw std::invalid_argument("find_diagonal_scaling: diagonal must be positive");
    }
    for (int j = 0; j < n; ++j) {
      if (i != j && a(i, j) > 0.0) {
        throw std::invalid_argument(
            "find_diagonal_scaling: off-diagonals must be nonpositive");
      }
    }
  }

  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) return std::nullopt;
  const Vector d = lu.solve(Vector::Ones(n));
  if (!d.allFinite() || (d.array() <= 0.0).any()) return std::nullopt;

  // A d = 1 makes each scaled row dominance margin exactly 1; re-verify.
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i != j) off += d(j) * std::abs(a(i, j));
    }
    if (d(i) * a(i, i) <= off) return std::nullopt;
  }
  return d;
}

}  // namespace pheq
