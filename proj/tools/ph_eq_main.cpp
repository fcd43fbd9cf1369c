// ph-eq: equilibrium analysis and certification for the shipped model
// families (networked SIS, generalized Lotka-Volterra, reflected-appraisal
// opinion updates). Models come in as JSON, reports go out as JSON,
// trajectories and field grids as CSV.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pheq/degroot_friedkin.hpp"
#include "pheq/dynamics.hpp"
#include "pheq/lotka_volterra.hpp"
#include "pheq/manifold.hpp"
#include "pheq/model_io.hpp"
#include "pheq/ph_certificate.hpp"
#include "pheq/sis_model.hpp"
#include "pheq/version.hpp"

namespace {

using nlohmann::json;
using namespace pheq;

constexpr int kExitSchema = 2;
constexpr int kExitSolver = 3;
constexpr int kExitRefuted = 4;
constexpr int kExitInconclusive = 5;

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector parse_x0(const std::string& text, int n) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("--x0: cannot parse '" + tok + "'");
    }
    while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
    if (used != tok.size()) {
      throw std::invalid_argument("--x0: trailing junk in '" + tok + "'");
    }
    vals.push_back(v);
  }
  if (static_cast<int>(vals.size()) != n) {
    throw std::invalid_argument("--x0: expected " + std::to_string(n) +
                                " components, got " +
                                std::to_string(vals.size()));
  }
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = vals[i];
  return x;
}

// stdout unless --out was given.
class OutputSink {
 public:
  explicit OutputSink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void emit_report(const std::string& command, const std::string& path,
                 json results, const std::string& out_path) {
  json report = {{"command", command},
                 {"input", path},
                 {"input_hash", file_hash(path)},
                 {"version", kVersion},
                 {"schema_version", kReportSchemaVersion},
                 {"results", std::move(results)}};
  OutputSink sink(out_path);
  sink.stream() << report.dump(2) << '\n';
}

DriftFn model_drift(const ModelFile& m) {
  switch (m.kind) {
    case ModelKind::Sis:
      return [net = *m.sis, ctrl = m.controls](const Vector& x) {
        return sis_drift(net, ctrl, x);
      };
    case ModelKind::Glv:
      return [model = *m.glv](const Vector& x) { return lv_drift(model, x); };
    case ModelKind::Df:
      break;
  }
  throw std::invalid_argument("model has no continuous-time drift");
}

JacobianFn model_jacobian(const ModelFile& m) {
  switch (m.kind) {
    case ModelKind::Sis:
      return [net = *m.sis, ctrl = m.controls](const Vector& x) {
        return sis_jacobian(net, ctrl, x);
      };
    case ModelKind::Glv:
      return [model = *m.glv](const Vector& x) { return lv_jacobian(model, x); };
    case ModelKind::Df:
      break;
  }
  throw std::invalid_argument("model has no continuous-time drift");
}

int run_analyze(const std::string& command, const std::string& path,
                double tol_override, const std::string& out_path) {
  const ModelFile m = load_model(path);
  const double tol = tol_override > 0.0 ? tol_override : m.defaults.tol;
  json results;

  switch (m.kind) {
    case ModelKind::Sis: {
      const SISNetwork& net = *m.sis;
      const double threshold = epidemic_threshold(net);
      results["threshold"] = threshold;
      const auto endemic = solve_endemic(net, m.controls, tol);
      if (endemic) {
        results["endemic"] = {
            {"location", vector_json(*endemic)},
            {"residual",
             sis_drift(net, m.controls, *endemic).lpNorm<Eigen::Infinity>()}};
      } else {
        results["endemic"] = nullptr;
      }
      const bool active = !all_zero(m.controls);
      results["controls_active"] = active;
      if (active && threshold > 0.0) {
        const auto cmp = control_comparison(net, m.controls, tol);
        results["comparison"] = {{"x_star", vector_json(cmp.x_star)},
                                 {"x_bar_star", vector_json(cmp.x_bar_star)},
                                 {"strictly_less", cmp.strictly_less}};
      }
      break;
    }
    case ModelKind::Glv: {
      const GLVModel& model = *m.glv;
      const int n = model.size();
      const auto feasible = solve_feasible(model, *m.region, tol);
      results["feasible"] = feasible.root
                                ? json({{"location", vector_json(*feasible.root)},
                                        {"residual", feasible.best_residual}})
                                : json(nullptr);
      results["seeds_total"] = feasible.seeds_total;
      results["seeds_converged"] = feasible.seeds_converged;

      const ManifoldBox box = m.region->inscribed_box(n);
      std::vector<Vector> points;
      points.push_back(box.center());
      for (const Vector& u : halton_points(n, 256)) {
        Vector x(n);
        for (int i = 0; i < n; ++i) {
          x(i) = box.lower(i) + u(i) * (box.upper(i) - box.lower(i));
        }
        points.push_back(std::move(x));
      }
      results["goh"] = to_json(check_goh(model, *m.bound, points));
      break;
    }
    case ModelKind::Df: {
      const DFModel& model = *m.df;
      const int n = model.size();
      const Vector start = Vector::Constant(n, 1.0 / n);
      const Vector fixed = df_fixed_point(model, start, tol);
      results["fixed_point"] = vector_json(fixed);
      results["map_residual"] =
          (df_map(model, fixed) - fixed).lpNorm<Eigen::Infinity>();
      results["contraction_factor"] = df_contraction_factor(model, fixed);
      results["contraction_certified"] = certify_contraction(model, fixed);
      break;
    }
  }

  emit_report(command, path, std::move(results), out_path);
  return 0;
}

int run_certify(const std::string& command, const std::string& path, int seeds,
                double tol_override, const std::string& out_path) {
  const ModelFile m = load_model(path);
  if (m.kind == ModelKind::Df) {
    throw std::invalid_argument(
        "certify handles continuous-time models only (sis, glv)");
  }

  CertificateConfig config;
  config.seeds_per_dim = seeds;
  if (tol_override > 0.0) config.tol = tol_override;

  json results;
  ManifoldBox box = ManifoldBox::unit(m.dimension());
  if (m.kind == ModelKind::Sis) {
    const InvariantBox inv =
        build_invariant_box(*m.sis, m.controls, config.samples_per_face);
    box = inv.box;
    results["box_epsilon"] = inv.epsilon;
  } else {
    box = m.region->inscribed_box(m.dimension());
  }
  results["box_lower"] = vector_json(box.lower);
  results["box_upper"] = vector_json(box.upper);

  const CertificateReport report =
      certify_uniqueness(model_drift(m), model_jacobian(m), box, config);
  results["certificate"] = to_json(report);

  emit_report(command, path, std::move(results), out_path);
  switch (report.unique_verdict) {
    case Verdict::Certified: return 0;
    case Verdict::Refuted: return kExitRefuted;
    case Verdict::Inconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

void write_csv_row(std::ostream& out, double t, const Vector& x) {
  out << t;
  for (int i = 0; i < x.size(); ++i) out << ',' << x(i);
  out << '\n';
}

int run_simulate(const std::string& command, const std::string& path,
                 const std::string& x0_text, double horizon,
                 const std::string& out_path) {
  (void)command;
  const ModelFile m = load_model(path);
  const int n = m.dimension();
  const Vector x0 = parse_x0(x0_text, n);
  const double T = horizon > 0.0 ? horizon : m.defaults.horizon;

  OutputSink sink(out_path);
  std::ostream& out = sink.stream();
  out << std::setprecision(17);
  out << 't';
  for (int i = 1; i <= n; ++i) out << ",x_" << i;
  out << '\n';

  if (m.kind == ModelKind::Df) {
    if (!in_simplex(x0, 1e-12, 1e-9)) {
      throw std::domain_error(
          "--x0 must lie on the simplex (nonnegative, sum 1) away from the "
          "poles at 1");
    }
    const int steps = static_cast<int>(std::llround(T));
    Vector x = x0;
    write_csv_row(out, 0.0, x);
    for (int k = 1; k <= steps; ++k) {
      x = df_map(*m.df, x);
      write_csv_row(out, static_cast<double>(k), x);
    }
    return 0;
  }

  if (m.kind == ModelKind::Sis) {
    for (int i = 0; i < n; ++i) {
      if (!(x0(i) >= 0.0 && x0(i) <= 1.0)) {
        throw std::domain_error("--x0 must lie in [0,1]^n for sis models");
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      if (!(x0(i) >= 0.0)) {
        throw std::domain_error(
            "--x0 must lie in the nonnegative orthant for glv models");
      }
    }
  }

  IntegratorConfig config;
  config.method = IntegrationMethod::AdaptiveRK45;
  config.horizon = T;
  const Trajectory traj = integrate(model_drift(m), x0, config);
  for (size_t k = 0; k < traj.times.size(); ++k) {
    write_csv_row(out, traj.times[k], traj.states[k]);
  }
  return 0;
}

int run_vector_field(const std::string& command, const std::string& path,
                     int grid, const std::string& out_path) {
  (void)command;
  const ModelFile m = load_model(path);
  if (m.dimension() != 2) {
    throw std::domain_error("vector-field requires a 2-dimensional model");
  }
  if (grid < 1) throw std::invalid_argument("--grid must be >= 1");

  Vector lo(2), hi(2);
  if (m.kind == ModelKind::Sis) {
    lo << 0.0, 0.0;
    hi << 1.0, 1.0;
  } else {
    lo << 0.0, 0.0;
    const double side = m.region->radius / std::sqrt(2.0);
    hi << side, side;
  }

  const DriftFn drift = model_drift(m);
  OutputSink sink(out_path);
  std::ostream& out = sink.stream();
  out << std::setprecision(17);
  out << "x1,x2,dx1,dx2\n";
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      Vector x(2);
      if (grid == 1) {
        x = 0.5 * (lo + hi);
      } else {
        x(0) = lo(0) + (hi(0) - lo(0)) * i / (grid - 1);
        x(1) = lo(1) + (hi(1) - lo(1)) * j / (grid - 1);
      }
      const Vector f = drift(x);
      out << x(0) << ',' << x(1) << ',' << f(0) << ',' << f(1) << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ph-eq: numerical existence/uniqueness/stability certificates for "
      "network equilibria"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok/certified, 2 schema or domain violation, 3 solver "
      "failure,\n            4 certificate refuted, 5 inconclusive.\n"
      "PH_EQ_THREADS caps worker threads (default: hardware, at most 8).\n"
      "Shipped models: models/example_sis.json, models/example_sis_controlled.json,"
      "\n                models/competitive_glv.json, models/predator_prey.json,"
      "\n                models/uniform_df.json");

  std::string path;
  std::string out_path;
  std::string x0_text;
  double tol = 0.0;  // 0 means "use the model default"
  double horizon = 0.0;
  int seeds = 4;
  int grid = 25;

  CLI::App* analyze =
      app.add_subcommand("analyze", "threshold/equilibrium/contraction summary");
  analyze->add_option("model", path, "model JSON file")->required();
  analyze->add_option("--tol", tol, "solver tolerance (default: model setting)");
  analyze->add_option("--out", out_path, "write the JSON report here");

  CLI::App* certify = app.add_subcommand(
      "certify", "index-sum uniqueness and stability certificate");
  certify->add_option("model", path, "model JSON file")->required();
  certify->add_option("--seeds", seeds, "Newton seeds per dimension (>= 2)");
  certify->add_option("--tol", tol, "root acceptance tolerance");
  certify->add_option("--out", out_path, "write the JSON report here");

  CLI::App* simulate =
      app.add_subcommand("simulate", "integrate one trajectory, emit CSV");
  simulate->add_option("model", path, "model JSON file")->required();
  simulate->add_option("--x0", x0_text, "initial state, comma separated")
      ->required();
  simulate->add_option("--T", horizon,
                       "time horizon (steps for discrete maps; default: model "
                       "setting)");
  simulate->add_option("--out", out_path, "write the CSV here");

  CLI::App* field = app.add_subcommand(
      "vector-field", "sample the drift on a 2-d lattice, emit CSV");
  field->add_option("model", path, "model JSON file")->required();
  field->add_option("--grid", grid, "lattice points per axis");
  field->add_option("--out", out_path, "write the CSV here");

  CLI11_PARSE(app, argc, argv);

  const std::string command = join_args(argc, argv);
  try {
    if (app.got_subcommand(analyze)) {
      return run_analyze(command, path, tol, out_path);
    }
    if (app.got_subcommand(certify)) {
      return run_certify(command, path, seeds, tol, out_path);
    }
    if (app.got_subcommand(simulate)) {
      return run_simulate(command, path, x0_text, horizon, out_path);
    }
    if (app.got_subcommand(field)) {
      return run_vector_field(command, path, grid, out_path);
    }
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::logic_error& e) {
    // invalid_argument and domain_error: bad inputs, not solver trouble
    std::cerr << "error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::runtime_error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
  return 0;
}
