#include "pheq/degroot_friedkin.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace pheq {

namespace {

constexpr double kPoleTol = 1e-9;

void require_simplex(const DFModel& model, const Vector& x, const char* who) {
  if (x.size() != model.size()) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  }
  if (std::abs(x.sum() - 1.0) > 1e-9) {
    throw std::domain_error(std::string(who) + ": coordinates do not sum to 1");
  }
  for (int i = 0; i < x.size(); ++i) {
    if (x(i) < -1e-12) {
      throw std::domain_error(std::string(who) + ": negative coordinate");
    }
    if (x(i) >= 1.0 - kPoleTol) {
      throw std::domain_error(std::string(who) + ": coordinate " +
                              std::to_string(i + 1) + " at the pole x=1");
    }
  }
}

}  // namespace

DFModel::DFModel(Vector gamma) : gamma_(std::move(gamma)) {
  const int n = static_cast<int>(gamma_.size());
  if (n < 3) throw std::invalid_argument("DFModel: needs n >= 3 individuals");
  if (!gamma_.allFinite()) {
    throw std::invalid_argument("DFModel: non-finite gamma");
  }
  for (int i = 0; i < n; ++i) {
    if (!(gamma_(i) > 0.0) || !(gamma_(i) < 0.5)) {
      throw std::invalid_argument(
          "DFModel: every gamma_i must lie strictly inside (0, 0.5)");
    }
  }
  if (std::abs(gamma_.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("DFModel: gamma must sum to 1");
  }
}

bool in_simplex(const Vector& x, double delta, double sum_tol) {
  if (std::abs(x.sum() - 1.0) > sum_tol) return false;
  return (x.array() >= delta).all() && (x.array() <= 1.0 - delta).all();
}

Vector df_map(const DFModel& model, const Vector& x) {
  require_simplex(model, x, "df_map");
  const Vector w = model.gamma().array() / (1.0 - x.array());
  return w / w.sum();
}

Vector df_fixed_point(const DFModel& model, const Vector& x0, double tol,
                      int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("df_fixed_point: tol must be > 0");
  Vector x = x0;
  double step = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vector next = df_map(model, x);
    step = (next - x).cwiseAbs().maxCoeff();
    x = next;
    if (step < tol) return x;
  }
  throw std::runtime_error("df_fixed_point: no convergence after " +
                           std::to_string(max_iter) +
                           " iterations, last step " + std::to_string(step));
}

Matrix df_chart_jacobian(const DFModel& model, const Vector& x) {
  require_simplex(model, x, "df_chart_jacobian");
  const int n = model.size();
  const Vector w = model.gamma().array() / (1.0 - x.array());
  const double total = w.sum();
  const Vector g = w / total;

  // Full differential of the normalized map:
  // dG_i/dx_j = delta_ij g_i/(1-x_i) - g_i g_j/(1-x_j).
  // Chart x_n = 1 - sum(others) folds column n back with a minus sign.
  Matrix chart(n - 1, n - 1);
  for (int i = 0; i < n - 1; ++i) {
    const double gi = g(i);
    const double m_in = -gi * g(n - 1) / (1.0 - x(n - 1));
    for (int j = 0; j < n - 1; ++j) {
      double m_ij = -gi * g(j) / (1.0 - x(j));
      if (i == j) m_ij += gi / (1.0 - x(i));
      chart(i, j) = m_ij - m_in;
    }
  }
  return chart;
}

double df_contraction_factor(const DFModel& model, const Vector& x) {
  const Matrix j = df_chart_jacobian(model, x);
  if (j.rows() == 1) return std::abs(j(0, 0));
  Eigen::EigenSolver<Matrix> es(j, false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("df_contraction_factor: eigensolver failed");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool certify_contraction(const DFModel& model, const Vector& x_star) {
  const double residual =
      (df_map(model, x_star) - x_star).cwiseAbs().maxCoeff();
  if (residual >= 1e-8) {
    throw std::invalid_argument(
        "certify_contraction: not a fixed point, map residual " +
        std::to_string(residual));
  }
  return df_contraction_factor(model, x_star) < 1.0 - 1e-9;
}

}  // namespace pheq
