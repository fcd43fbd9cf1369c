#pragma once

#include <string>
#include <vector>

#include "pheq/types.hpp"

namespace pheq {

// Axis-aligned compact box {x : lower <= x <= upper}. Convex, hence
// contractible; the only manifold the certificate machinery accepts.
struct ManifoldBox {
  Vector lower;
  Vector upper;

  ManifoldBox() = default;
  // Requires finite bounds with lower_i < upper_i for every i.
  ManifoldBox(Vector lo, Vector up);

  [[nodiscard]] int dim() const { return static_cast<int>(lower.size()); }
  [[nodiscard]] bool contains(const Vector& x, double slack = 0.0) const;
  [[nodiscard]] Vector center() const { return 0.5 * (lower + upper); }
  [[nodiscard]] Vector clamp(const Vector& x) const;

  // The unit box [0, 1]^n.
  [[nodiscard]] static ManifoldBox unit(int n);
};

// Deterministic low-discrepancy points in (0,1)^dim (Halton, prime bases).
[[nodiscard]] std::vector<Vector> halton_points(int dim, int count,
                                                int skip = 1);

// One boundary face of a box, checked for strict inward flow.
struct FaceCheck {
  std::string face;     // "P3" = lower face of coordinate 3, "Q3" = upper
  int coordinate = 0;   // 0-based
  bool lower_face = true;
  double worst_margin = 0.0;  // min over samples; > 0 means strictly inward
  Vector worst_point;
  bool pass = false;
};

struct FaceReport {
  std::vector<FaceCheck> faces;
  bool pass = false;
  double worst_margin = 0.0;
  int samples_per_face = 0;
};

// Samples each face of the box (all 2^(n-1) face corners when n <= 10, the
// face center, and samples_per_face Halton points) and requires the drift to
// point strictly into the box: drift_i > 0 on lower faces, drift_i < 0 on
// upper faces.
[[nodiscard]] FaceReport check_inward_on_faces(const DriftFn& drift,
                                               const ManifoldBox& box,
                                               int samples_per_face);

}  // namespace pheq
