#pragma once

#include <Eigen/Dense>
#include <functional>

namespace pheq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// State derivative of an autonomous system x' = f(x).
using DriftFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

[[nodiscard]] inline bool all_finite(const Vector& v) { return v.allFinite(); }
[[nodiscard]] inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace pheq
