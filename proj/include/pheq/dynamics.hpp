#pragma once

#include <optional>
#include <vector>

#include "pheq/manifold.hpp"
#include "pheq/types.hpp"

namespace pheq {

enum class IntegrationMethod { FixedRK4, AdaptiveRK45 };

struct IntegratorConfig {
  IntegrationMethod method = IntegrationMethod::AdaptiveRK45;
  double step = 1e-2;      // FixedRK4 only
  double abs_tol = 1e-9;   // AdaptiveRK45 only
  double rel_tol = 1e-9;   // AdaptiveRK45 only
  double horizon = 1.0;    // integrate over [0, horizon]
  int output_stride = 1;   // record every k-th accepted step (first/last always)
};

struct Trajectory {
  std::vector<double> times;   // strictly increasing, begins at 0
  std::vector<Vector> states;  // same length as times
  std::vector<bool> in_box;    // filled by monitor_invariance

  [[nodiscard]] bool empty() const { return times.empty(); }
  [[nodiscard]] const Vector& final_state() const { return states.back(); }
};

// Deterministic explicit integration of x' = drift(x) from x0 over
// [0, config.horizon]. Fixed classic RK4, or Dormand-Prince 5(4) with the
// standard mixed absolute/relative error control. Throws std::runtime_error
// on adaptive step underflow or non-finite states.
[[nodiscard]] Trajectory integrate(const DriftFn& drift, const Vector& x0,
                                   const IntegratorConfig& config);

// Final state iff the drift residual there is below tol AND the state
// variation over the last tenth of the time span is below tol.
[[nodiscard]] std::optional<Vector> detect_convergence(const Trajectory& traj,
                                                       const DriftFn& drift,
                                                       double tol);

// True iff every sample lies in the box inflated by slack. Also annotates
// traj.in_box per sample. Empty trajectory is vacuously true.
bool monitor_invariance(Trajectory& traj, const ManifoldBox& box,
                        double slack);

}  // namespace pheq
