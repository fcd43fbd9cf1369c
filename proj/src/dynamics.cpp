#include "pheq/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pheq {

namespace {

void validate(const Vector& x0, const IntegratorConfig& cfg) {
  if (!x0.allFinite()) throw std::invalid_argument("integrate: non-finite x0");
  if (!(cfg.horizon > 0.0)) throw std::invalid_argument("integrate: horizon must be > 0");
  if (cfg.method == IntegrationMethod::FixedRK4 && !(cfg.step > 0.0)) {
    throw std::invalid_argument("integrate: step must be > 0");
  }
  if (cfg.method == IntegrationMethod::AdaptiveRK45 &&
      (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0))) {
    throw std::invalid_argument("integrate: tolerances must be > 0");
  }
  if (cfg.output_stride < 1) {
    throw std::invalid_argument("integrate: output_stride must be >= 1");
  }
}

Trajectory run_rk4(const DriftFn& f, const Vector& x0,
                   const IntegratorConfig& cfg) {
  Trajectory traj;
  const long steps = std::max(1L, std::lround(std::ceil(cfg.horizon / cfg.step)));
  const double h = cfg.horizon / static_cast<double>(steps);
  Vector x = x0;
  double t = 0.0;
  traj.times.push_back(t);
  traj.states.push_back(x);
  for (long k = 0; k < steps; ++k) {
    const Vector k1 = f(x);
    const Vector k2 = f(x + 0.5 * h * k1);
    const Vector k3 = f(x + 0.5 * h * k2);
    const Vector k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t = (k + 1 == steps) ? cfg.horizon : (k + 1) * h;
    if (!x.allFinite()) throw std::runtime_error("integrate: state diverged");
    if ((k + 1) % cfg.output_stride == 0 || k + 1 == steps) {
      traj.times.push_back(t);
      traj.states.push_back(x);
    }
  }
  return traj;
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

Trajectory run_rk45(const DriftFn& f, const Vector& x0,
                    const IntegratorConfig& cfg) {
  Trajectory traj;
  Vector x = x0;
  double t = 0.0;
  traj.times.push_back(t);
  traj.states.push_back(x);

  Vector k1 = f(x);
  double h = std::min(cfg.horizon / 100.0, 0.1);
  const double hmin = cfg.horizon * 1e-14;
  long accepted = 0;

  while (t < cfg.horizon) {
    h = std::min(h, cfg.horizon - t);
    Vector xn, k7, err_vec;
    try {
      const Vector k2 = f(x + h * (a21 * k1));
      const Vector k3 = f(x + h * (a31 * k1 + a32 * k2));
      const Vector k4 = f(x + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const Vector k5 = f(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Vector k6 =
          f(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      xn = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      k7 = f(xn);  // FSAL
      err_vec =
          h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    } catch (const std::exception&) {
      // a trial state tripped the drift's domain guard; treat it like an
      // oversized step and retry shorter
      h *= 0.5;
      if (h < hmin) {
        throw std::runtime_error(
            "integrate: drift not evaluable near t=" + std::to_string(t));
      }
      continue;
    }

    double err = 0.0;
    for (int i = 0; i < x.size(); ++i) {
      const double sc =
          cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x(i)), std::abs(xn(i)));
      const double r = err_vec(i) / sc;
      err += r * r;
    }
    err = std::sqrt(err / static_cast<double>(x.size()));

    if (err <= 1.0) {
      t += h;
      x = xn;
      k1 = k7;
      if (!x.allFinite()) throw std::runtime_error("integrate: state diverged");
      ++accepted;
      if (accepted % cfg.output_stride == 0 || t >= cfg.horizon) {
        traj.times.push_back(t);
        traj.states.push_back(x);
      }
    }
    const double factor =
        (err <= 1e-30) ? 5.0
                       : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
    if (h < hmin && t < cfg.horizon) {
      throw std::runtime_error("integrate: adaptive step underflow at t=" +
                               std::to_string(t));
    }
  }
  return traj;
}

}  // namespace

Trajectory integrate(const DriftFn& drift, const Vector& x0,
                     const IntegratorConfig& config) {
  validate(x0, config);
  return config.method == IntegrationMethod::FixedRK4
             ? run_rk4(drift, x0, config)
             : run_rk45(drift, x0, config);
}

std::optional<Vector> detect_convergence(const Trajectory& traj,
                                         const DriftFn& drift, double tol) {
  if (traj.empty()) return std::nullopt;
  const Vector& final = traj.states.back();
  if (drift(final).cwiseAbs().maxCoeff() >= tol) return std::nullopt;

  const double t_end = traj.times.back();
  const double t_from = t_end - 0.1 * (t_end - traj.times.front());
  for (size_t k = 0; k < traj.times.size(); ++k) {
    if (traj.times[k] < t_from) continue;
    if ((traj.states[k] - final).cwiseAbs().maxCoeff() >= tol) {
      return std::nullopt;
    }
  }
  return final;
}

bool monitor_invariance(Trajectory& traj, const ManifoldBox& box,
                        double slack) {
  traj.in_box.assign(traj.states.size(), true);
  bool all_in = true;
  for (size_t k = 0; k < traj.states.size(); ++k) {
    const bool in = box.contains(traj.states[k], slack);
    traj.in_box[k] = in;
    all_in = all_in && in;
  }
  return all_in;
}

}  // namespace pheq
