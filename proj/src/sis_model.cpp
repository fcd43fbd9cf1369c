#include "pheq/sis_model.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pheq {

namespace {

constexpr double kDomainSlack = 1e-9;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void require_state(const SISNetwork& net, const Vector& x, const char* who) {
  if (x.size() != net.size()) {
    throw std::invalid_argument(std::string(who) + ": state dimension mismatch");
  }
  for (int i = 0; i < x.size(); ++i) {
    if (!(x(i) >= -kDomainSlack) || !(x(i) <= 1.0 + kDomainSlack)) {
      throw std::domain_error(std::string(who) + ": state component " +
                              std::to_string(i + 1) + " outside [0,1]");
    }
  }
}

void require_ctrl(const SISNetwork& net, const ControlSpec& ctrl,
                  const char* who) {
  if (static_cast<int>(ctrl.size()) != net.size()) {
    throw std::invalid_argument(std::string(who) + ": control list length mismatch");
  }
}

}  // namespace

ControlFunction ControlFunction::zero() { return {}; }

ControlFunction ControlFunction::linear(double k) {
  if (!(k >= 0.0) || !std::isfinite(k)) {
    throw std::invalid_argument("ControlFunction::linear: k must be >= 0");
  }
  ControlFunction h;
  h.kind_ = Kind::Linear;
  h.c_ = k;
  return h;
}

ControlFunction ControlFunction::power(double c, double p) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("ControlFunction::power: c must be >= 0");
  }
  if (!(p > 0.0) || !(p <= 2.0)) {
    throw std::invalid_argument("ControlFunction::power: p must be in (0, 2]");
  }
  ControlFunction h;
  h.kind_ = Kind::Power;
  h.c_ = c;
  h.p_ = p;
  return h;
}

ControlFunction ControlFunction::saturating(double c, double kappa) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("ControlFunction::saturating: c must be >= 0");
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("ControlFunction::saturating: kappa must be > 0");
  }
  ControlFunction h;
  h.kind_ = Kind::Saturating;
  h.c_ = c;
  h.kappa_ = kappa;
  return h;
}

double ControlFunction::value(double x) const {
  x = clamp01(x);
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Linear: return c_ * x;
    case Kind::Power: return c_ * std::pow(x, p_);
    case Kind::Saturating: return c_ * x / (x + kappa_);
  }
  return 0.0;
}

double ControlFunction::derivative(double x) const {
  x = clamp01(x);
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Linear: return c_;
    case Kind::Power:
      if (x == 0.0) {
        if (p_ < 1.0) return std::numeric_limits<double>::infinity();
        if (p_ == 1.0) return c_;
        return 0.0;
      }
      return c_ * p_ * std::pow(x, p_ - 1.0);
    case Kind::Saturating: {
      const double s = x + kappa_;
      return c_ * kappa_ / (s * s);
    }
  }
  return 0.0;
}

double ControlFunction::derivative_times_x(double x) const {
  x = clamp01(x);
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Linear: return c_ * x;
    // x * c p x^(p-1) = c p x^p: continuous through 0 for every p > 0.
    case Kind::Power: return c_ * p_ * std::pow(x, p_);
    case Kind::Saturating: {
      const double s = x + kappa_;
      return c_ * kappa_ * x / (s * s);
    }
  }
  return 0.0;
}

bool ControlFunction::is_zero() const {
  return kind_ == Kind::Zero || c_ == 0.0;
}

ControlSpec no_control(int n) {
  return ControlSpec(static_cast<size_t>(n), ControlFunction::zero());
}

bool all_zero(const ControlSpec& ctrl) {
  return std::all_of(ctrl.begin(), ctrl.end(),
                     [](const ControlFunction& h) { return h.is_zero(); });
}

SISNetwork::SISNetwork(Vector d, Matrix b) : d_(std::move(d)), b_(std::move(b)) {
  const int n = static_cast<int>(d_.size());
  if (n < 2) throw std::invalid_argument("SISNetwork: needs n >= 2 nodes");
  if (b_.rows() != n || b_.cols() != n) {
    throw std::invalid_argument("SISNetwork: infection matrix must be n x n");
  }
  if (!d_.allFinite() || !b_.allFinite()) {
    throw std::invalid_argument("SISNetwork: non-finite parameters");
  }
  for (int i = 0; i < n; ++i) {
    if (!(d_(i) > 0.0)) {
      throw std::invalid_argument("SISNetwork: recovery rates must be > 0");
    }
    for (int j = 0; j < n; ++j) {
      if (b_(i, j) < 0.0) {
        throw std::invalid_argument("SISNetwork: infection rates must be >= 0");
      }
    }
  }
  if (!is_irreducible(b_)) {
    throw std::invalid_argument("SISNetwork: contact graph must be strongly connected");
  }
}

Vector sis_drift(const SISNetwork& net, const ControlSpec& ctrl,
                 const Vector& x) {
  require_ctrl(net, ctrl, "sis_drift");
  require_state(net, x, "sis_drift");
  const int n = net.size();
  const Vector s = net.infection() * x;
  Vector f(n);
  for (int i = 0; i < n; ++i) {
    f(i) = -(net.recovery()(i) + ctrl[i].value(x(i))) * x(i) +
           (1.0 - x(i)) * s(i);
  }
  return f;
}

Matrix sis_jacobian(const SISNetwork& net, const ControlSpec& ctrl,
                    const Vector& x) {
  require_ctrl(net, ctrl, "sis_jacobian");
  require_state(net, x, "sis_jacobian");
  const int n = net.size();
  const Matrix& b = net.infection();
  const Vector s = b * x;
  Matrix j = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      j(i, k) = (1.0 - x(i)) * b(i, k);
    }
    j(i, i) += -net.recovery()(i) - ctrl[i].value(x(i)) -
               ctrl[i].derivative_times_x(x(i)) - s(i);
  }
  return j;
}

double epidemic_threshold(const SISNetwork& net) {
  Matrix m = net.infection();
  m.diagonal() -= net.recovery();
  return spectral_abscissa(m);
}

std::optional<Vector> solve_endemic(const SISNetwork& net,
                                    const ControlSpec& ctrl, double tol,
                                    int max_iter) {
  require_ctrl(net, ctrl, "solve_endemic");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_endemic: tol must be > 0");
  if (epidemic_threshold(net) <= 0.0) return std::nullopt;

  const int n = net.size();
  Matrix m = net.infection();
  m.diagonal() -= net.recovery();
  Vector x = 0.5 * perron_pair(m).vector;

  auto residual = [&](const Vector& v) {
    return sis_drift(net, ctrl, v).cwiseAbs().maxCoeff();
  };

  // Node-wise fixed point: solving each component equation for x_i gives
  // x_i = S_i / (d_i + h_i(x_i) + S_i), a monotone self-map of (0,1)^n.
  int fp_iters = 0;
  for (; fp_iters < max_iter; ++fp_iters) {
    const Vector s = net.infection() * x;
    Vector next(n);
    for (int i = 0; i < n; ++i) {
      next(i) = s(i) / (net.recovery()(i) + ctrl[i].value(x(i)) + s(i));
    }
    const double step = (next - x).cwiseAbs().maxCoeff();
    x = next;
    if (step < 1e-10) break;
  }

  // Newton polish with backtracking, iterates clamped to the open unit box.
  const Vector lo = Vector::Constant(n, 1e-14);
  const Vector hi = Vector::Constant(n, 1.0 - 1e-14);
  double r = residual(x);
  for (int it = 0; it < 100 && r >= tol; ++it) {
    const Vector f = sis_drift(net, ctrl, x);
    const Matrix j = sis_jacobian(net, ctrl, x);
    const Vector dx = j.fullPivLu().solve(-f);
    if (!dx.allFinite()) break;
    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      Vector trial = (x + alpha * dx).cwiseMax(lo).cwiseMin(hi);
      const double rt = residual(trial);
      if (rt < r) {
        x = trial;
        r = rt;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }

  if (r >= tol) {
    throw std::runtime_error(
        "solve_endemic: no convergence after " + std::to_string(fp_iters) +
        " fixed-point iterations, residual " + std::to_string(r));
  }
  return x;
}

FaceReport verify_inward_pointing(const SISNetwork& net,
                                  const ControlSpec& ctrl,
                                  const ManifoldBox& box,
                                  int samples_per_face) {
  require_ctrl(net, ctrl, "verify_inward_pointing");
  return check_inward_on_faces(
      [&](const Vector& x) { return sis_drift(net, ctrl, x); }, box,
      samples_per_face);
}

InvariantBox build_invariant_box(const SISNetwork& net, const ControlSpec& ctrl,
                                 int samples_per_face) {
  require_ctrl(net, ctrl, "build_invariant_box");
  if (epidemic_threshold(net) <= 0.0) {
    throw std::invalid_argument(
        "build_invariant_box: requires a positive epidemic threshold");
  }
  const int n = net.size();
  Matrix m = net.infection();
  m.diagonal() -= net.recovery();
  const Vector y = perron_pair(m).vector;

  for (double eps = 0.5; eps >= 1e-8; eps *= 0.5) {
    ManifoldBox box(eps * y, Vector::Ones(n));
    FaceReport rep = verify_inward_pointing(net, ctrl, box, samples_per_face);
    if (rep.pass) return {box, eps, y};
  }
  throw std::runtime_error(
      "build_invariant_box: no epsilon above 1e-8 yields inward flow");
}

bool kamke_muller_check(const SISNetwork& net, const ControlSpec& ctrl,
                        const ManifoldBox& box, int samples) {
  require_ctrl(net, ctrl, "kamke_muller_check");
  if (samples < 1) {
    throw std::invalid_argument("kamke_muller_check: samples >= 1");
  }
  const int n = net.size();
  std::vector<Vector> pts = halton_points(n, samples);
  pts.push_back(Vector::Constant(n, 0.5));
  for (const Vector& u : pts) {
    Vector x(n);
    for (int i = 0; i < n; ++i) {
      x(i) = box.lower(i) + u(i) * (box.upper(i) - box.lower(i));
    }
    const Matrix j = sis_jacobian(net, ctrl, x);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        if (i != k && j(i, k) < -1e-12) return false;
      }
    }
  }
  return true;
}

ControlComparison control_comparison(const SISNetwork& net,
                                     const ControlSpec& ctrl, double tol) {
  require_ctrl(net, ctrl, "control_comparison");
  const auto star = solve_endemic(net, no_control(net.size()), tol);
  if (!star) {
    throw std::runtime_error(
        "control_comparison: threshold not positive, no endemic equilibrium");
  }
  ControlComparison cmp;
  cmp.x_star = *star;
  if (all_zero(ctrl)) {
    cmp.x_bar_star = *star;  // degenerate equal report
    cmp.strictly_less = false;
    return cmp;
  }
  const auto bar = solve_endemic(net, ctrl, tol);
  if (!bar) {
    throw std::runtime_error("control_comparison: controlled solve failed");
  }
  cmp.x_bar_star = *bar;
  cmp.strictly_less = ((cmp.x_star - cmp.x_bar_star).array() > 1e-9).all();
  return cmp;
}

std::vector<std::pair<double, Vector>> continuation_alpha(
    const SISNetwork& net, const ControlSpec& ctrl, int grid_size, double tol) {
  require_ctrl(net, ctrl, "continuation_alpha");
  if (grid_size < 2) {
    throw std::invalid_argument("continuation_alpha: grid_size >= 2");
  }
  if (epidemic_threshold(net) <= 0.0) {
    throw std::invalid_argument(
        "continuation_alpha: requires a positive epidemic threshold");
  }
  const int n = net.size();
  const auto star = solve_endemic(net, no_control(n), tol);
  const auto bar = solve_endemic(net, ctrl, tol);
  if (!star || !bar) {
    throw std::runtime_error("continuation_alpha: endpoint solve failed");
  }

  // Control frozen at the controlled equilibrium: h_i(xbar_i) acts as a
  // constant extra recovery rate scaled by alpha.
  Vector hbar(n);
  for (int i = 0; i < n; ++i) hbar(i) = ctrl[i].value((*bar)(i));
  const bool control_active = hbar.maxCoeff() > 1e-15;

  std::vector<std::pair<double, Vector>> path;
  path.reserve(static_cast<size_t>(grid_size));
  for (int k = 0; k < grid_size; ++k) {
    const double alpha =
        static_cast<double>(k) / static_cast<double>(grid_size - 1);
    SISNetwork frozen(net.recovery() + alpha * hbar, net.infection());
    const auto xa = solve_endemic(frozen, no_control(n), tol);
    if (!xa) {
      throw std::runtime_error(
          "continuation_alpha: equilibrium lost at alpha=" +
          std::to_string(alpha));
    }
    path.emplace_back(alpha, *xa);
  }

  if ((path.front().second - *star).cwiseAbs().maxCoeff() > 1e-7 ||
      (path.back().second - *bar).cwiseAbs().maxCoeff() > 1e-7) {
    throw std::runtime_error("continuation_alpha: endpoints do not match the "
                             "uncontrolled/controlled equilibria");
  }

  for (size_t k = 1; k < path.size(); ++k) {
    const Vector diff = path[k - 1].second - path[k].second;
    if (control_active) {
      if (!((diff.array() > 1e-12).all())) {
        throw std::runtime_error(
            "continuation_alpha: family is not strictly decreasing at alpha=" +
            std::to_string(path[k].first));
      }
    } else if (diff.cwiseAbs().maxCoeff() > 1e-8) {
      throw std::runtime_error(
          "continuation_alpha: family should be constant for vanishing control");
    }
  }
  return path;
}

}  // namespace pheq
