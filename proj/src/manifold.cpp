#include "pheq/manifold.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pheq {

ManifoldBox::ManifoldBox(Vector lo, Vector up)
    : lower(std::move(lo)), upper(std::move(up)) {
  if (lower.size() != upper.size() || lower.size() < 1) {
    throw std::invalid_argument("ManifoldBox: bound dimensions mismatch");
  }
  if (!lower.allFinite() || !upper.allFinite()) {
    throw std::invalid_argument("ManifoldBox: non-finite bounds");
  }
  for (int i = 0; i < lower.size(); ++i) {
    if (!(lower(i) < upper(i))) {
      throw std::invalid_argument("ManifoldBox: requires lower < upper in every coordinate");
    }
  }
}

bool ManifoldBox::contains(const Vector& x, double slack) const {
  if (x.size() != lower.size()) return false;
  for (int i = 0; i < x.size(); ++i) {
    if (x(i) < lower(i) - slack || x(i) > upper(i) + slack) return false;
  }
  return true;
}

Vector ManifoldBox::clamp(const Vector& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

ManifoldBox ManifoldBox::unit(int n) {
  return ManifoldBox(Vector::Zero(n), Vector::Ones(n));
}

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                           37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79};

double radical_inverse(int base, int index) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * (index % base);
    index /= base;
    f /= base;
  }
  return result;
}

}  // namespace

std::vector<Vector> halton_points(int dim, int count, int skip) {
  if (dim < 0 || dim > static_cast<int>(std::size(kPrimes))) {
    throw std::invalid_argument("halton_points: unsupported dimension");
  }
  std::vector<Vector> pts;
  pts.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    Vector p(dim);
    for (int d = 0; d < dim; ++d) {
      p(d) = radical_inverse(kPrimes[d], k + skip);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

FaceReport check_inward_on_faces(const DriftFn& drift, const ManifoldBox& box,
                                 int samples_per_face) {
  if (samples_per_face < 1) {
    throw std::invalid_argument("check_inward_on_faces: samples_per_face >= 1");
  }
  const int n = box.dim();
  FaceReport report;
  report.samples_per_face = samples_per_face;
  report.pass = true;
  report.worst_margin = std::numeric_limits<double>::infinity();

  // Off-face coordinates for one face: corners (n <= 10), the center, and a
  // Halton fill. Each sample is embedded with the pinned coordinate.
  const auto face_fill = halton_points(std::max(n - 1, 0), samples_per_face);

  for (int i = 0; i < n; ++i) {
    for (int side = 0; side < 2; ++side) {
      const bool lower_face = (side == 0);
      FaceCheck check;
      check.coordinate = i;
      check.lower_face = lower_face;
      check.face = (lower_face ? "P" : "Q") + std::to_string(i + 1);
      check.worst_margin = std::numeric_limits<double>::infinity();

      auto consider = [&](const Vector& x) {
        const Vector f = drift(x);
        // Inward means increasing x_i on the lower face, decreasing on upper.
        const double margin = lower_face ? f(i) : -f(i);
        if (margin < check.worst_margin) {
          check.worst_margin = margin;
          check.worst_point = x;
        }
      };

      Vector x(n);
      x(i) = lower_face ? box.lower(i) : box.upper(i);

      if (n - 1 <= 10) {
        const int corners = 1 << (n - 1);
        for (int mask = 0; mask < corners; ++mask) {
          int bit = 0;
          for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            x(j) = ((mask >> bit) & 1) ? box.upper(j) : box.lower(j);
            ++bit;
          }
          consider(x);
        }
      }

      for (int j = 0; j < n; ++j) {
        if (j != i) x(j) = 0.5 * (box.lower(j) + box.upper(j));
      }
      consider(x);

      for (const Vector& u : face_fill) {
        int off = 0;
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          x(j) = box.lower(j) + u(off) * (box.upper(j) - box.lower(j));
          ++off;
        }
        consider(x);
      }

      check.pass = check.worst_margin > 0.0;
      report.pass = report.pass && check.pass;
      report.worst_margin = std::min(report.worst_margin, check.worst_margin);
      report.faces.push_back(std::move(check));
    }
  }
  return report;
}

}  // namespace pheq
