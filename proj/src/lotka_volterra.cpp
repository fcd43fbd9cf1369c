#include "pheq/lotka_volterra.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pheq/dynamics.hpp"
#include "pheq/matrix_analysis.hpp"

namespace pheq {

namespace {

constexpr double kDomainSlack = 1e-9;

void require_nonnegative(const GLVModel& model, const Vector& x,
                         const char* who) {
  if (x.size() != model.size()) {
    throw std::invalid_argument(std::string(who) + ": state dimension mismatch");
  }
  for (int i = 0; i < x.size(); ++i) {
    if (!(x(i) >= -kDomainSlack)) {
      throw std::domain_error(std::string(who) + ": state component " +
                              std::to_string(i + 1) + " negative");
    }
  }
}

}  // namespace

GLVModel::GLVModel(Vector d, Matrix a)
    : GLVModel(std::move(d), std::move(a), Vector()) {}

GLVModel::GLVModel(Vector d, Matrix a, Vector quadratic)
    : d_(std::move(d)), a_(std::move(a)), quad_(std::move(quadratic)) {
  const int n = static_cast<int>(d_.size());
  if (n < 1) throw std::invalid_argument("GLVModel: needs n >= 1 species");
  if (a_.rows() != n || a_.cols() != n) {
    throw std::invalid_argument("GLVModel: interaction matrix must be n x n");
  }
  if (quad_.size() == 0) quad_ = Vector::Zero(n);
  if (quad_.size() != n) {
    throw std::invalid_argument("GLVModel: quadratic term length mismatch");
  }
  if (!d_.allFinite() || !a_.allFinite() || !quad_.allFinite()) {
    throw std::invalid_argument("GLVModel: non-finite parameters");
  }
  if ((quad_.array() < 0.0).any()) {
    throw std::invalid_argument("GLVModel: quadratic self-limitation must be >= 0");
  }
}

Vector GLVModel::growth(const Vector& x) const {
  return d_ + a_ * x - quad_.cwiseProduct(x.cwiseProduct(x));
}

Matrix GLVModel::growth_jacobian(const Vector& x) const {
  Matrix j = a_;
  j.diagonal() -= 2.0 * quad_.cwiseProduct(x);
  return j;
}

Vector lv_drift(const GLVModel& model, const Vector& x) {
  require_nonnegative(model, x, "lv_drift");
  return model.growth(x).cwiseProduct(x);
}

Matrix lv_jacobian(const GLVModel& model, const Vector& x) {
  require_nonnegative(model, x, "lv_jacobian");
  Matrix j = x.asDiagonal() * model.growth_jacobian(x);
  j.diagonal() += model.growth(x);
  return j;
}

LVRegion::LVRegion(double radius, double floor) : radius(radius), floor(floor) {
  if (!(radius > 0.0) || !(floor > 0.0) || !std::isfinite(radius) ||
      !std::isfinite(floor)) {
    throw std::invalid_argument("LVRegion: radius and floor must be positive");
  }
}

ManifoldBox LVRegion::inscribed_box(int n) const {
  const double top = radius / std::sqrt(static_cast<double>(n));
  if (!(floor < top)) {
    throw std::invalid_argument(
        "LVRegion: floor must be below radius/sqrt(n), region degenerate");
  }
  return ManifoldBox(Vector::Constant(n, floor), Vector::Constant(n, top));
}

SectorBound::SectorBound(Matrix a) : a_bound(std::move(a)) {
  if (a_bound.rows() != a_bound.cols() || a_bound.rows() < 1 ||
      !a_bound.allFinite()) {
    throw std::invalid_argument("SectorBound: needs a finite square matrix");
  }
}

bool SectorBound::valid(std::string* why) const {
  const int n = static_cast<int>(a_bound.rows());
  for (int i = 0; i < n; ++i) {
    if (!(a_bound(i, i) < 0.0)) {
      if (why) *why = "diagonal entry " + std::to_string(i + 1) + " not < 0";
      return false;
    }
    for (int j = 0; j < n; ++j) {
      if (i != j && a_bound(i, j) < 0.0) {
        if (why) {
          *why = "off-diagonal (" + std::to_string(i + 1) + "," +
                 std::to_string(j + 1) + ") negative";
        }
        return false;
      }
    }
  }
  return true;
}

FeasibleResult solve_feasible(const GLVModel& model, const LVRegion& region,
                              double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_feasible: tol must be > 0");
  const int n = model.size();
  const ManifoldBox box = region.inscribed_box(n);

  // Roots with strictly positive components satisfy F(x) = 0; Newton on the
  // growth law is better conditioned than on the drift (no x_i factor).
  std::vector<Vector> seeds;
  if (n <= 4) {
    const int per_dim = 4;
    std::vector<int> idx(n, 0);
    while (true) {
      Vector s(n);
      for (int i = 0; i < n; ++i) {
        s(i) = box.lower(i) + (idx[i] + 0.5) / per_dim *
                                  (box.upper(i) - box.lower(i));
      }
      seeds.push_back(std::move(s));
      int i = 0;
      for (; i < n; ++i) {
        if (++idx[i] < per_dim) break;
        idx[i] = 0;
      }
      if (i == n) break;
    }
  } else {
    for (const Vector& u : halton_points(n, 256)) {
      Vector s(n);
      for (int i = 0; i < n; ++i) {
        s(i) = box.lower(i) + u(i) * (box.upper(i) - box.lower(i));
      }
      seeds.push_back(std::move(s));
    }
  }

  FeasibleResult result;
  result.seeds_total = static_cast<int>(seeds.size());
  result.best_residual = std::numeric_limits<double>::infinity();
  std::vector<Vector> roots;

  for (const Vector& seed : seeds) {
    Vector x = seed;
    bool lost = false;
    for (int it = 0; it < 80; ++it) {
      const Vector f = model.growth(x);
      const double r = f.cwiseAbs().maxCoeff();
      if (r < tol) break;
      const Vector dx = model.growth_jacobian(x).fullPivLu().solve(-f);
      if (!dx.allFinite()) {
        lost = true;
        break;
      }
      double alpha = 1.0;
      bool accepted = false;
      for (int bt = 0; bt < 30; ++bt) {
        Vector trial = x + alpha * dx;
        if (trial.allFinite() && trial.cwiseAbs().maxCoeff() < 1e6) {
          if (model.growth(trial).cwiseAbs().maxCoeff() < r) {
            x = trial;
            accepted = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        lost = true;
        break;
      }
    }
    if (lost) continue;
    const double r = model.growth(x).cwiseAbs().maxCoeff();
    result.best_residual = std::min(result.best_residual, r);
    if (r >= tol) continue;
    // Feasible means strictly inside W: above the floor and inside the ball.
    if ((x.array() < region.floor - 1e-12).any()) continue;
    if (x.norm() > region.radius + 1e-12) continue;
    if (lv_drift(model, x).cwiseAbs().maxCoeff() >= tol) continue;
    ++result.seeds_converged;
    bool duplicate = false;
    for (const Vector& seen : roots) {
      if ((seen - x).cwiseAbs().maxCoeff() < 1e-6) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) roots.push_back(x);
  }

  if (!roots.empty()) {
    std::sort(roots.begin(), roots.end(), [](const Vector& a, const Vector& b) {
      for (int i = 0; i < a.size(); ++i) {
        if (a(i) != b(i)) return a(i) < b(i);
      }
      return false;
    });
    result.root = roots.front();
  }
  return result;
}

GohReport check_goh(const GLVModel& model, const SectorBound& bound,
                    const std::vector<Vector>& points) {
  if (points.empty()) {
    throw std::invalid_argument("check_goh: needs at least one point");
  }
  if (bound.a_bound.rows() != model.size()) {
    throw std::invalid_argument("check_goh: bound dimension mismatch");
  }
  GohReport rep;
  std::string why;
  rep.bound_valid = bound.valid(&why);
  if (!rep.bound_valid) rep.detail = "bound invalid: " + why;

  const int n = model.size();
  rep.worst_diag_margin = std::numeric_limits<double>::infinity();
  rep.worst_offdiag_margin =
      n > 1 ? std::numeric_limits<double>::infinity() : 0.0;
  for (const Vector& p : points) {
    const Matrix jf = model.growth_jacobian(p);
    for (int i = 0; i < n; ++i) {
      rep.worst_diag_margin =
          std::min(rep.worst_diag_margin, bound.a_bound(i, i) - jf(i, i));
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        rep.worst_offdiag_margin = std::min(
            rep.worst_offdiag_margin, bound.a_bound(i, j) - std::abs(jf(i, j)));
      }
    }
  }
  rep.minors_ok = check_leading_minors(-bound.a_bound);
  if (rep.bound_valid && !rep.minors_ok) rep.detail = "leading minors of -A_bound not all positive";

  const double slack = -1e-12;
  rep.pass = rep.bound_valid && rep.minors_ok &&
             rep.worst_diag_margin >= slack &&
             rep.worst_offdiag_margin >= slack;
  return rep;
}

EnvelopeReport comparison_envelope(const GLVModel& model,
                                   const SectorBound& bound,
                                   const Vector& x_star, const Vector& x0,
                                   double epsilon, double T) {
  const int n = model.size();
  if (x_star.size() != n || x0.size() != n) {
    throw std::invalid_argument("comparison_envelope: dimension mismatch");
  }
  if (!(epsilon > 0.0) || !(T > 0.0)) {
    throw std::invalid_argument("comparison_envelope: epsilon and T must be > 0");
  }

  EnvelopeReport rep;
  rep.bound_hurwitz = is_hurwitz(bound.a_bound).ok();

  // One augmented system so both trajectories share every accepted step.
  const Matrix ea = epsilon * bound.a_bound;
  DriftFn combined = [&](const Vector& s) {
    Vector out(2 * n);
    const Vector x = s.head(n);
    out.head(n) = model.growth(x).cwiseProduct(x);
    out.tail(n) = ea * s.tail(n);
    return out;
  };

  Vector s0(2 * n);
  s0.head(n) = x0;
  s0.tail(n) = (x0 - x_star).cwiseAbs();

  IntegratorConfig cfg;
  cfg.method = IntegrationMethod::AdaptiveRK45;
  cfg.abs_tol = 1e-11;
  cfg.rel_tol = 1e-11;
  cfg.horizon = T;
  const Trajectory traj = integrate(combined, s0, cfg);

  rep.worst_violation = -std::numeric_limits<double>::infinity();
  for (const Vector& s : traj.states) {
    const Vector y = (s.head(n) - x_star).cwiseAbs();
    const Vector z = s.tail(n);
    rep.worst_violation = std::max(rep.worst_violation, (y - z).maxCoeff());
  }
  const Vector& last = traj.states.back();
  rep.deviation_final = (last.head(n) - x_star).cwiseAbs().maxCoeff();
  rep.envelope_final = last.tail(n).cwiseAbs().maxCoeff();
  rep.holds = rep.worst_violation <= 1e-6;
  return rep;
}

}  // namespace pheq
