#include "pheq/ph_certificate.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "parallel.hpp"

namespace pheq {

namespace {

constexpr double kDedupDist = 1e-6;

bool lex_less(const Vector& a, const Vector& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) < b(i);
  }
  return false;
}

EquilibriumRecord make_record(const Vector& root, double residual,
                              const JacobianFn& jacobian) {
  EquilibriumRecord rec;
  rec.location = root;
  rec.residual = residual;
  const Matrix j = jacobian(root);
  rec.index = index_of(j);
  rec.det_neg_jacobian = Matrix(-j).determinant();
  const HurwitzResult h = is_hurwitz(j);
  rec.hurwitz = h.verdict;
  rec.hurwitz_abscissa = h.abscissa;
  return rec;
}

}  // namespace

const char* to_string(RootIndex idx) {
  switch (idx) {
    case RootIndex::Plus: return "+1";
    case RootIndex::Minus: return "-1";
    case RootIndex::Degenerate: return "degenerate";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "Certified";
    case Verdict::Refuted: return "Refuted";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

int EquilibriumRecord::index_value() const {
  switch (index) {
    case RootIndex::Plus: return 1;
    case RootIndex::Minus: return -1;
    case RootIndex::Degenerate: return 0;
  }
  return 0;
}

RootIndex index_of(const Matrix& jac_at_root) {
  if (jac_at_root.rows() != jac_at_root.cols() || jac_at_root.rows() < 1 ||
      !jac_at_root.allFinite()) {
    throw std::invalid_argument("index_of: needs a finite square matrix");
  }
  const Matrix neg = -jac_at_root;
  const double det = neg.determinant();
  // Hadamard bound of -jac as the comparison scale for near-singularity.
  double scale = 1.0;
  for (int i = 0; i < neg.rows(); ++i) scale *= neg.row(i).norm();
  if (std::abs(det) <= 1e-10 * scale) return RootIndex::Degenerate;
  return det > 0.0 ? RootIndex::Plus : RootIndex::Minus;
}

EnumerationResult enumerate_equilibria(const DriftFn& drift,
                                       const JacobianFn& jacobian,
                                       const ManifoldBox& box,
                                       int seeds_per_dim, double tol) {
  if (seeds_per_dim < 2) {
    throw std::invalid_argument("enumerate_equilibria: seeds_per_dim >= 2");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("enumerate_equilibria: tol must be > 0");
  }
  const int n = box.dim();
  const Vector width = box.upper - box.lower;

  std::vector<Vector> seeds;
  if (n <= 6) {
    long total = 1;
    for (int i = 0; i < n; ++i) total *= seeds_per_dim;
    seeds.reserve(static_cast<size_t>(total));
    std::vector<int> idx(n, 0);
    while (true) {
      Vector s(n);
      for (int i = 0; i < n; ++i) {
        s(i) = box.lower(i) +
               (idx[i] + 0.5) / seeds_per_dim * width(i);
      }
      seeds.push_back(std::move(s));
      int i = 0;
      for (; i < n; ++i) {
        if (++idx[i] < seeds_per_dim) break;
        idx[i] = 0;
      }
      if (i == n) break;
    }
  } else {
    // Fixed quasi-random budget past the grid guard.
    const int budget = 4096;
    for (const Vector& u : halton_points(n, budget)) {
      seeds.push_back(box.lower + u.cwiseProduct(width));
    }
  }

  // Escape margin: one box width beyond each side ends the Newton run.
  const Vector esc_lo = box.lower - width;
  const Vector esc_hi = box.upper + width;

  struct Hit {
    Vector root;
    double residual;
  };
  std::vector<std::vector<Hit>> hits(seeds.size());
  std::vector<char> converged(seeds.size(), 0);

  detail::parallel_chunks(static_cast<int>(seeds.size()), [&](int lo, int hi) {
    for (int k = lo; k < hi; ++k) {
      // A drift/jacobian evaluation that throws (domain guard outside the
      // model's region) just ends that seed's run.
      try {
        Vector x = seeds[static_cast<size_t>(k)];
        double r = drift(x).cwiseAbs().maxCoeff();
        bool lost = false;
        for (int it = 0; it < 60 && r >= tol; ++it) {
          const Vector f = drift(x);
          const Vector dx = jacobian(x).fullPivLu().solve(-f);
          if (!dx.allFinite()) {
            lost = true;
            break;
          }
          double alpha = 1.0;
          bool accepted = false;
          for (int bt = 0; bt < 40; ++bt) {
            const Vector trial = x + alpha * dx;
            if (trial.allFinite() &&
                (trial.array() >= esc_lo.array()).all() &&
                (trial.array() <= esc_hi.array()).all()) {
              double rt = std::numeric_limits<double>::infinity();
              try {
                rt = drift(trial).cwiseAbs().maxCoeff();
              } catch (const std::exception&) {
              }
              if (rt < r) {
                x = trial;
                r = rt;
                accepted = true;
                break;
              }
            }
            alpha *= 0.5;
          }
          if (!accepted) break;
        }
        if (lost || r >= tol) continue;
        if (!box.contains(x, 1e-9)) continue;
        Vector root = box.clamp(x);
        double residual = r;
        if ((root - x).cwiseAbs().maxCoeff() > 0.0) {
          residual = drift(root).cwiseAbs().maxCoeff();
          if (residual >= tol) continue;  // face-projected point is not a root
        }
        converged[static_cast<size_t>(k)] = 1;
        hits[static_cast<size_t>(k)].push_back({std::move(root), residual});
      } catch (const std::exception&) {
        continue;
      }
    }
  });

  EnumerationResult result;
  result.seeds_total = static_cast<int>(seeds.size());

  std::vector<Hit> flat;
  for (size_t k = 0; k < hits.size(); ++k) {
    result.seeds_converged += converged[k] ? 1 : 0;
    for (auto& h : hits[k]) flat.push_back(std::move(h));
  }
  std::sort(flat.begin(), flat.end(), [](const Hit& a, const Hit& b) {
    if (a.residual != b.residual) return a.residual < b.residual;
    return lex_less(a.root, b.root);
  });

  std::vector<Hit> unique;
  for (auto& h : flat) {
    bool dup = false;
    for (const auto& seen : unique) {
      if ((seen.root - h.root).cwiseAbs().maxCoeff() < kDedupDist) {
        dup = true;
        break;
      }
    }
    if (!dup) unique.push_back(std::move(h));
  }
  std::sort(unique.begin(), unique.end(),
            [](const Hit& a, const Hit& b) { return lex_less(a.root, b.root); });

  for (const auto& h : unique) {
    result.records.push_back(make_record(h.root, h.residual, jacobian));
  }
  return result;
}

std::vector<Vector> grid_root_scan(const DriftFn& drift, const ManifoldBox& box,
                                   int points_per_dim) {
  if (points_per_dim < 3) {
    throw std::invalid_argument("grid_root_scan: points_per_dim >= 3");
  }
  const int n = box.dim();
  if (n > 3) {
    throw std::invalid_argument("grid_root_scan: supported only for n <= 3");
  }
  const int p = points_per_dim;
  long cells = 1;
  for (int i = 0; i < n; ++i) cells *= p;

  Vector spacing(n);
  for (int i = 0; i < n; ++i) {
    spacing(i) = (box.upper(i) - box.lower(i)) / (p - 1);
  }
  const double cell_diag = spacing.norm();

  std::vector<double> g(static_cast<size_t>(cells));
  std::vector<long> stride(n);
  stride[0] = 1;
  for (int i = 1; i < n; ++i) stride[i] = stride[i - 1] * p;

  auto coord_of = [&](long flat) {
    Vector x(n);
    for (int i = 0; i < n; ++i) {
      const long q = (flat / stride[i]) % p;
      x(i) = box.lower(i) + q * spacing(i);
    }
    return x;
  };

  // Evaluate ||drift||_inf over the lattice, sliced along the last axis.
  const long slab = cells / p;
  detail::parallel_chunks(p, [&](int lo, int hi) {
    for (int s = lo; s < hi; ++s) {
      for (long r = 0; r < slab; ++r) {
        const long flat = s * slab + r;
        g[static_cast<size_t>(flat)] =
            drift(coord_of(flat)).cwiseAbs().maxCoeff();
      }
    }
  });

  struct Candidate {
    long flat;
    double value;
  };
  std::vector<Candidate> mins;
  for (long flat = 0; flat < cells; ++flat) {
    const double v = g[static_cast<size_t>(flat)];
    bool is_min = true;
    double slope = 0.0;
    for (int i = 0; i < n && is_min; ++i) {
      const long q = (flat / stride[i]) % p;
      if (q > 0) {
        const double nb = g[static_cast<size_t>(flat - stride[i])];
        if (nb < v) is_min = false;
        slope = std::max(slope, std::abs(nb - v) / spacing(i));
      }
      if (q + 1 < p) {
        const double nb = g[static_cast<size_t>(flat + stride[i])];
        if (nb < v) is_min = false;
        slope = std::max(slope, std::abs(nb - v) / spacing(i));
      }
    }
    if (!is_min) continue;
    // A sign-crossing zero shows a kink: the minimum value is comparable to
    // slope * cell size. Smooth positive minima fail this by orders.
    const bool near_zero = v <= 2.0 * slope * cell_diag + 1e-12;
    if (near_zero) mins.push_back({flat, v});
  }

  std::sort(mins.begin(), mins.end(), [](const Candidate& a, const Candidate& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.flat < b.flat;
  });

  // Merge plateau/adjacent candidates: keep the best within 2 cells.
  std::vector<Vector> coarse;
  for (const auto& c : mins) {
    const Vector x = coord_of(c.flat);
    bool dup = false;
    for (const Vector& seen : coarse) {
      bool close = true;
      for (int i = 0; i < n; ++i) {
        if (std::abs(seen(i) - x(i)) > 2.0 * spacing(i)) {
          close = false;
          break;
        }
      }
      if (close) {
        dup = true;
        break;
      }
    }
    if (!dup) coarse.push_back(x);
  }

  // Sharpen below lattice resolution with a derivative-free pattern search.
  // The search minimizes the smooth squared 2-norm: the max norm has kinked
  // valleys where a fixed stencil jams at noncritical points, while on a
  // smooth objective the 3^n - 1 stencil always finds descent. Zeros are the
  // only interior stationary points when the jacobian stays nonsingular.
  auto eval_inf = [&](const Vector& x) {
    return drift(x).cwiseAbs().maxCoeff();
  };
  auto eval = [&](const Vector& x) { return drift(x).squaredNorm(); };
  std::vector<Vector> dirs;
  {
    std::vector<int> d(n, -1);
    while (true) {
      Vector v(n);
      bool nonzero = false;
      for (int i = 0; i < n; ++i) {
        v(i) = d[i];
        nonzero = nonzero || d[i] != 0;
      }
      if (nonzero) dirs.push_back(v);
      int i = 0;
      for (; i < n; ++i) {
        if (++d[i] <= 1) break;
        d[i] = -1;
      }
      if (i == n) break;
    }
  }
  std::vector<Vector> roots;
  for (Vector x : coarse) {
    Vector h = spacing;
    double g0 = eval(x);
    for (int round = 0; round < 2000 && h.maxCoeff() > 1e-7; ++round) {
      bool improved = false;
      for (const Vector& dir : dirs) {
        Vector trial = x + dir.cwiseProduct(h);
        for (int i = 0; i < n; ++i) {
          trial(i) = std::clamp(trial(i), box.lower(i), box.upper(i));
        }
        const double gt = eval(trial);
        if (gt < g0) {
          x = trial;
          g0 = gt;
          improved = true;
        }
      }
      if (!improved) h *= 0.5;
    }
    // At a sign-crossing zero the refined max-norm value scales with the
    // local slope times the stall width; a constrained minimum on a face
    // keeps a value far above that. Probe the slope and drop candidates
    // that stalled high.
    const double g_inf = eval_inf(x);
    const double probe = 1e-6;
    double slope = 0.0;
    for (int i = 0; i < n; ++i) {
      for (const double sgn : {-1.0, 1.0}) {
        Vector pr = x;
        pr(i) = std::clamp(x(i) + sgn * probe, box.lower(i), box.upper(i));
        const double dist = std::abs(pr(i) - x(i));
        if (dist > 0.0) {
          slope = std::max(slope, std::abs(eval_inf(pr) - g_inf) / dist);
        }
      }
    }
    if (g_inf > 10.0 * slope * probe + 1e-12) continue;
    // the scan cannot separate zeros within one lattice cell, so that is
    // also the merge radius for refined candidates
    bool dup = false;
    for (const Vector& seen : roots) {
      bool close = true;
      for (int i = 0; i < n; ++i) {
        if (std::abs(seen(i) - x(i)) >= spacing(i)) {
          close = false;
          break;
        }
      }
      if (close) {
        dup = true;
        break;
      }
    }
    if (!dup) roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end(), lex_less);
  return roots;
}

CertificateReport certify_uniqueness(const DriftFn& drift,
                                     const JacobianFn& jacobian,
                                     const ManifoldBox& box,
                                     const CertificateConfig& config) {
  CertificateReport report;
  report.boundary = check_inward_on_faces(drift, box, config.samples_per_face);
  report.boundary_ok = report.boundary.pass;
  if (!report.boundary_ok) {
    report.notes.push_back("boundary flow not strictly inward on every face");
  }

  EnumerationResult en = enumerate_equilibria(drift, jacobian, box,
                                              config.seeds_per_dim, config.tol);
  report.equilibria = std::move(en.records);
  report.seeds_total = en.seeds_total;
  report.seeds_converged = en.seeds_converged;

  bool degenerate = false;
  bool all_plus = !report.equilibria.empty();
  bool all_hurwitz = !report.equilibria.empty();
  bool any_not_hurwitz = false;
  for (const auto& rec : report.equilibria) {
    report.index_sum += rec.index_value();
    degenerate = degenerate || rec.index == RootIndex::Degenerate;
    all_plus = all_plus && rec.index == RootIndex::Plus;
    all_hurwitz = all_hurwitz && rec.hurwitz == Stability::Hurwitz;
    any_not_hurwitz = any_not_hurwitz || rec.hurwitz == Stability::NotHurwitz;
  }

  if (report.equilibria.size() >= 2 || any_not_hurwitz) {
    report.unique_verdict = Verdict::Refuted;
    if (report.equilibria.size() >= 2) {
      report.notes.push_back("multiple verified zeros in the box");
    }
    if (any_not_hurwitz) {
      report.notes.push_back("verified zero with unstable linearization");
    }
    return report;
  }

  if (report.boundary_ok && report.equilibria.size() == 1 && all_plus &&
      report.index_sum == 1 && all_hurwitz) {
    report.unique_verdict = Verdict::Certified;
  } else {
    report.unique_verdict = Verdict::Inconclusive;
    if (report.equilibria.empty()) {
      report.notes.push_back("no zero found in the box");
    }
    if (degenerate) {
      report.notes.push_back("degenerate (near-singular) zero");
    }
    if (!report.equilibria.empty() && !all_hurwitz && !any_not_hurwitz) {
      report.notes.push_back("Hurwitz test indeterminate at a zero");
    }
    return report;
  }

  if (config.grid_cross_check && box.dim() <= 3) {
    report.grid_checked = true;
    const auto oracle =
        grid_root_scan(drift, box, config.grid_points_per_dim);
    const Vector& root = report.equilibria.front().location;
    bool matched = oracle.size() == 1 &&
                   (oracle.front() - root).cwiseAbs().maxCoeff() <= 1e-3;
    if (!matched) {
      report.unique_verdict = Verdict::Inconclusive;
      report.notes.push_back(
          "grid oracle disagrees: " + std::to_string(oracle.size()) +
          " candidate(s) in the scan");
    }
  }
  return report;
}

}  // namespace pheq
