#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <random>

#include "pheq/dynamics.hpp"
#include "pheq/lotka_volterra.hpp"
#include "pheq/ph_certificate.hpp"
#include "pheq/sis_model.hpp"
#include "test_util.hpp"

using namespace pheq;
using testutil::random_controls;
using testutil::random_in_box;
using testutil::random_sis_with_threshold;

namespace {

SISNetwork example_net() {
  Vector d(2);
  d << 0.3, 0.8;
  Matrix b(2, 2);
  b << 0.2, 0.5, 0.7, 0.1;
  return SISNetwork(d, b);
}

ControlSpec example_controls() {
  return {ControlFunction::power(0.5, 0.5), ControlFunction::linear(0.9)};
}

Vector scalar(double v) {
  Vector x(1);
  x << v;
  return x;
}

ManifoldBox interval(double lo, double hi) {
  return ManifoldBox(scalar(lo), scalar(hi));
}

DriftFn sis_drift_fn(const SISNetwork& net, const ControlSpec& ctrl) {
  return [&net, &ctrl](const Vector& x) { return sis_drift(net, ctrl, x); };
}

JacobianFn sis_jac_fn(const SISNetwork& net, const ControlSpec& ctrl) {
  return [&net, &ctrl](const Vector& x) { return sis_jacobian(net, ctrl, x); };
}

}  // namespace

TEST_CASE("index of a nondegenerate zero is the sign of det(-jacobian)") {
  CHECK(index_of(-Matrix::Identity(3, 3)) == RootIndex::Plus);
  Matrix saddle = Matrix::Zero(2, 2);
  saddle(0, 0) = -1.0;
  saddle(1, 1) = 1.0;
  CHECK(index_of(saddle) == RootIndex::Minus);
  Matrix flat = Matrix::Zero(2, 2);
  flat(0, 0) = -1.0;
  CHECK(index_of(flat) == RootIndex::Degenerate);
}

TEST_CASE("enumeration finds the endemic equilibrium and nothing else") {
  const auto net = example_net();
  const auto ctrl = no_control(2);
  const auto inv = build_invariant_box(net, ctrl);
  const auto result = enumerate_equilibria(sis_drift_fn(net, ctrl),
                                           sis_jac_fn(net, ctrl), inv.box, 4,
                                           1e-10);
  REQUIRE(result.records.size() == 1);
  Vector target(2);
  target << 0.4413, 0.2973;
  CHECK((result.records[0].location - target).cwiseAbs().maxCoeff() < 5e-4);
  CHECK(result.records[0].index == RootIndex::Plus);
  CHECK(result.records[0].hurwitz == Stability::Hurwitz);
  CHECK(result.seeds_converged > 0);
}

TEST_CASE("enumeration on the competitive two-species box") {
  const GLVModel model(Vector::Ones(2),
                       (Matrix(2, 2) << -2, 1, 1, -2).finished());
  const ManifoldBox box(Vector::Constant(2, 0.1), Vector::Constant(2, 3.0));
  const auto result = enumerate_equilibria(
      [&](const Vector& x) { return lv_drift(model, x); },
      [&](const Vector& x) { return lv_jacobian(model, x); }, box, 4, 1e-10);
  REQUIRE(result.records.size() == 1);
  CHECK((result.records[0].location - Vector::Ones(2)).cwiseAbs().maxCoeff() <
        1e-8);
  CHECK(result.records[0].index == RootIndex::Plus);
}

TEST_CASE("enumeration preconditions") {
  const auto drift = [](const Vector& x) { return Vector(-x); };
  const auto jac = [](const Vector& x) {
    return Matrix(-Matrix::Identity(x.size(), x.size()));
  };
  CHECK_THROWS_AS((void)enumerate_equilibria(drift, jac, interval(0, 1), 1,
                                             1e-10),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)enumerate_equilibria(drift, jac, interval(0, 1), 4,
                                             0.0),
                  std::invalid_argument);
}

TEST_CASE("uncontrolled epidemic certificate") {
  const auto net = example_net();
  const auto ctrl = no_control(2);
  const auto inv = build_invariant_box(net, ctrl);
  const auto report = certify_uniqueness(sis_drift_fn(net, ctrl),
                                         sis_jac_fn(net, ctrl), inv.box);
  CHECK(report.unique_verdict == Verdict::Certified);
  CHECK(report.boundary_ok);
  CHECK(report.index_sum == 1);
  CHECK(report.euler_characteristic == 1);
  CHECK(report.equilibria.size() == 1);
  CHECK(report.grid_checked);  // n = 2: the scan oracle must concur
  CHECK(report.notes.empty());
}

TEST_CASE("controlled epidemic certificate") {
  const auto net = example_net();
  const auto ctrl = example_controls();
  const auto inv = build_invariant_box(net, ctrl);
  const auto report = certify_uniqueness(sis_drift_fn(net, ctrl),
                                         sis_jac_fn(net, ctrl), inv.box);
  CHECK(report.unique_verdict == Verdict::Certified);
  Vector target(2);
  target << 0.15, 0.1142;
  CHECK((report.equilibria[0].location - target).cwiseAbs().maxCoeff() < 5e-4);
}

TEST_CASE("an unstable root refutes the certificate") {
  // x (1 - x)(x - 0.5) has one zero inside [0.1, 0.9]; its linearization is
  // +0.25, so index -1 and not Hurwitz
  const auto drift = [](const Vector& x) {
    return Vector(scalar(x(0) * (1.0 - x(0)) * (x(0) - 0.5)));
  };
  const auto jac = [](const Vector& x) {
    Matrix j(1, 1);
    const double v = x(0);
    j(0, 0) = (1.0 - 2.0 * v) * (v - 0.5) + v * (1.0 - v);
    return j;
  };
  const auto report = certify_uniqueness(drift, jac, interval(0.1, 0.9));
  CHECK(report.unique_verdict == Verdict::Refuted);
  REQUIRE(report.equilibria.size() == 1);
  CHECK(report.equilibria[0].location(0) == doctest::Approx(0.5));
  CHECK(report.equilibria[0].index == RootIndex::Minus);
  CHECK(report.equilibria[0].hurwitz == Stability::NotHurwitz);
}

TEST_CASE("two verified zeros refute the certificate") {
  // roots at 0.3 (unstable) and 0.7 (stable): indices cancel to 0
  const auto drift = [](const Vector& x) {
    const double v = x(0);
    return Vector(scalar(-v * (v - 0.3) * (v - 0.7)));
  };
  const auto jac = [](const Vector& x) {
    const double v = x(0);
    Matrix j(1, 1);
    j(0, 0) = -3.0 * v * v + 2.0 * v - 0.21;
    return j;
  };
  const auto report = certify_uniqueness(drift, jac, interval(0.1, 0.9));
  CHECK(report.unique_verdict == Verdict::Refuted);
  CHECK(report.equilibria.size() == 2);
  CHECK(report.index_sum == 0);
}

TEST_CASE("no zero in the box is inconclusive") {
  const auto drift = [](const Vector& x) { return Vector(-x); };
  const auto jac = [](const Vector&) {
    return Matrix(-Matrix::Identity(1, 1));
  };
  const auto report = certify_uniqueness(drift, jac, interval(0.5, 1.0));
  CHECK(report.unique_verdict == Verdict::Inconclusive);
  CHECK(report.equilibria.empty());
  bool noted = false;
  for (const auto& note : report.notes) {
    if (note.find("no zero") != std::string::npos) noted = true;
  }
  CHECK(noted);
}

TEST_CASE("a singular jacobian at a verified zero is inconclusive") {
  // root exactly on a seed point; the supplied jacobian degenerates there,
  // so the index is unclassifiable and the verdict must not guess
  const auto drift = [](const Vector& x) { return Vector(scalar(0.25 - x(0))); };
  const auto jac = [](const Vector&) { return Matrix(Matrix::Zero(1, 1)); };
  CertificateConfig config;
  config.seeds_per_dim = 2;  // seeds at 0.25 and 0.75
  config.grid_cross_check = false;
  const auto report = certify_uniqueness(drift, jac, interval(0.0, 1.0),
                                         config);
  CHECK(report.unique_verdict == Verdict::Inconclusive);
  REQUIRE(report.equilibria.size() == 1);
  CHECK(report.equilibria[0].index == RootIndex::Degenerate);
  bool noted = false;
  for (const auto& note : report.notes) {
    if (note.find("degenerate") != std::string::npos) noted = true;
  }
  CHECK(noted);
}

TEST_CASE("grid scan oracle agrees with the newton enumeration") {
  const auto net = example_net();
  const auto ctrl = no_control(2);
  const auto inv = build_invariant_box(net, ctrl);
  const auto newton = enumerate_equilibria(sis_drift_fn(net, ctrl),
                                           sis_jac_fn(net, ctrl), inv.box, 4,
                                           1e-10);
  const auto grid = grid_root_scan(sis_drift_fn(net, ctrl), inv.box, 200);
  REQUIRE(grid.size() == newton.records.size());
  for (size_t k = 0; k < grid.size(); ++k) {
    CHECK((grid[k] - newton.records[k].location).cwiseAbs().maxCoeff() < 1e-3);
  }

  // a box clear of any zero yields an empty scan
  const auto empty = grid_root_scan(
      [](const Vector& x) { return Vector(-x); }, interval(0.5, 1.0), 200);
  CHECK(empty.empty());
}

TEST_CASE("grid scan guards") {
  const auto drift = [](const Vector& x) { return Vector(-x); };
  CHECK_THROWS_AS((void)grid_root_scan(drift, ManifoldBox::unit(4), 50),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)grid_root_scan(drift, interval(0, 1), 2),
                  std::invalid_argument);
}

TEST_CASE("randomized epidemic instances satisfy the index sum identity") {
  std::mt19937 rng(90210);
  std::uniform_real_distribution<double> target(0.05, 0.5);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 2 + rep % 3;
    const auto net = random_sis_with_threshold(rng, n, target(rng));
    const auto ctrl = random_controls(rng, n, false);
    const auto inv = build_invariant_box(net, ctrl);
    const auto report = certify_uniqueness(sis_drift_fn(net, ctrl),
                                           sis_jac_fn(net, ctrl), inv.box);
    CHECK(report.boundary_ok);
    CHECK(report.index_sum == 1);
    CHECK(report.equilibria.size() == 1);
    CHECK(report.unique_verdict == Verdict::Certified);
  }
}

TEST_CASE("certified implies trajectories actually converge there") {
  const auto net = example_net();
  const auto ctrl = no_control(2);
  const auto inv = build_invariant_box(net, ctrl);
  const auto report = certify_uniqueness(sis_drift_fn(net, ctrl),
                                         sis_jac_fn(net, ctrl), inv.box);
  REQUIRE(report.unique_verdict == Verdict::Certified);
  const Vector root = report.equilibria[0].location;

  std::mt19937 rng(1123581321);
  IntegratorConfig config;
  config.horizon = 500.0;
  for (int rep = 0; rep < 20; ++rep) {
    const Vector x0 = random_in_box(rng, inv.box, 0.01);
    const auto traj = integrate(sis_drift_fn(net, ctrl), x0, config);
    CHECK((traj.final_state() - root).cwiseAbs().maxCoeff() < 1e-3);
  }
}

TEST_CASE("worker pool size does not change the report") {
  const auto net = example_net();
  const auto ctrl = example_controls();
  const auto inv = build_invariant_box(net, ctrl);

  setenv("PH_EQ_THREADS", "1", 1);
  const auto serial = certify_uniqueness(sis_drift_fn(net, ctrl),
                                         sis_jac_fn(net, ctrl), inv.box);
  setenv("PH_EQ_THREADS", "8", 1);
  const auto parallel = certify_uniqueness(sis_drift_fn(net, ctrl),
                                           sis_jac_fn(net, ctrl), inv.box);
  unsetenv("PH_EQ_THREADS");

  CHECK(serial.unique_verdict == parallel.unique_verdict);
  REQUIRE(serial.equilibria.size() == parallel.equilibria.size());
  for (size_t k = 0; k < serial.equilibria.size(); ++k) {
    CHECK((serial.equilibria[k].location.array() ==
           parallel.equilibria[k].location.array())
              .all());
  }
}
