#include "pheq/model_io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "pheq/version.hpp"

namespace pheq {

using nlohmann::json;

namespace {

const json& require_field(const json& doc, const std::string& path,
                          const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw SchemaError(path + "/" + key, "missing required field");
  }
  return doc.at(key);
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  return v.get<double>();
}

Vector as_vector(const json& v, const std::string& path, int min_len = 1) {
  if (!v.is_array() || static_cast<int>(v.size()) < min_len) {
    throw SchemaError(path, "expected an array of at least " +
                                std::to_string(min_len) + " numbers");
  }
  Vector out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    out(static_cast<int>(i)) =
        as_number(v[i], path + "/" + std::to_string(i));
  }
  return out;
}

Matrix as_matrix(const json& v, const std::string& path, int n) {
  if (!v.is_array() || static_cast<int>(v.size()) != n) {
    throw SchemaError(path, "expected " + std::to_string(n) + " rows");
  }
  Matrix out(n, n);
  for (int i = 0; i < n; ++i) {
    const json& row = v[static_cast<size_t>(i)];
    const std::string row_path = path + "/" + std::to_string(i);
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw SchemaError(row_path, "expected " + std::to_string(n) + " numbers");
    }
    for (int j = 0; j < n; ++j) {
      out(i, j) = as_number(row[static_cast<size_t>(j)],
                            row_path + "/" + std::to_string(j));
    }
  }
  return out;
}

ControlFunction parse_control(const json& v, const std::string& path) {
  if (!v.is_object()) throw SchemaError(path, "expected an object");
  const std::string kind =
      require_field(v, path, "kind").is_string()
          ? v.at("kind").get<std::string>()
          : throw SchemaError(path + "/kind", "expected a string");
  try {
    if (kind == "zero") return ControlFunction::zero();
    if (kind == "linear") {
      return ControlFunction::linear(
          as_number(require_field(v, path, "k"), path + "/k"));
    }
    if (kind == "power") {
      return ControlFunction::power(
          as_number(require_field(v, path, "c"), path + "/c"),
          as_number(require_field(v, path, "p"), path + "/p"));
    }
    if (kind == "saturating") {
      return ControlFunction::saturating(
          as_number(require_field(v, path, "c"), path + "/c"),
          as_number(require_field(v, path, "kappa"), path + "/kappa"));
    }
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
  throw SchemaError(path + "/kind",
                    "unknown control kind '" + kind +
                        "' (zero|linear|power|saturating)");
}

json control_to_json(const ControlFunction& h) {
  switch (h.kind()) {
    case ControlFunction::Kind::Zero:
      return {{"kind", "zero"}};
    case ControlFunction::Kind::Linear:
      return {{"kind", "linear"}, {"k", h.param_c()}};
    case ControlFunction::Kind::Power:
      return {{"kind", "power"}, {"c", h.param_c()}, {"p", h.param_p()}};
    case ControlFunction::Kind::Saturating:
      return {{"kind", "saturating"},
              {"c", h.param_c()},
              {"kappa", h.param_kappa()}};
  }
  return {{"kind", "zero"}};
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Sis: return "sis";
    case ModelKind::Glv: return "glv";
    case ModelKind::Df: return "df";
  }
  return "?";
}

int ModelFile::dimension() const {
  switch (kind) {
    case ModelKind::Sis: return sis ? sis->size() : 0;
    case ModelKind::Glv: return glv ? glv->size() : 0;
    case ModelKind::Df: return df ? df->size() : 0;
  }
  return 0;
}

ModelFile parse_model(const json& doc) {
  if (!doc.is_object()) throw SchemaError("", "model document must be an object");
  const json& kind_field = require_field(doc, "", "kind");
  if (!kind_field.is_string()) throw SchemaError("/kind", "expected a string");
  const std::string kind = kind_field.get<std::string>();

  ModelFile m;
  if (doc.contains("defaults")) {
    const json& d = doc.at("defaults");
    if (!d.is_object()) throw SchemaError("/defaults", "expected an object");
    if (d.contains("tol")) {
      m.defaults.tol = as_number(d.at("tol"), "/defaults/tol");
      if (!(m.defaults.tol > 0.0)) {
        throw SchemaError("/defaults/tol", "must be > 0");
      }
    }
    if (d.contains("horizon")) {
      m.defaults.horizon = as_number(d.at("horizon"), "/defaults/horizon");
      if (!(m.defaults.horizon > 0.0)) {
        throw SchemaError("/defaults/horizon", "must be > 0");
      }
    }
  }

  if (kind == "sis") {
    m.kind = ModelKind::Sis;
    const Vector d = as_vector(require_field(doc, "", "d"), "/d", 2);
    const int n = static_cast<int>(d.size());
    if (!(d.array() > 0.0).all()) {
      throw SchemaError("/d", "recovery rates must be > 0");
    }
    const Matrix b = as_matrix(require_field(doc, "", "b"), "/b", n);
    try {
      m.sis.emplace(d, b);
    } catch (const std::invalid_argument& e) {
      throw SchemaError("/b", e.what());
    }
    if (doc.contains("controls")) {
      const json& ctrls = doc.at("controls");
      if (!ctrls.is_array() || static_cast<int>(ctrls.size()) != n) {
        throw SchemaError("/controls",
                          "expected " + std::to_string(n) + " entries");
      }
      for (size_t i = 0; i < ctrls.size(); ++i) {
        m.controls.push_back(
            parse_control(ctrls[i], "/controls/" + std::to_string(i)));
      }
    } else {
      m.controls = no_control(n);
    }
    return m;
  }

  if (kind == "glv") {
    m.kind = ModelKind::Glv;
    const Vector d = as_vector(require_field(doc, "", "d"), "/d");
    const int n = static_cast<int>(d.size());
    const Matrix a = as_matrix(require_field(doc, "", "a"), "/a", n);
    Vector quad = Vector::Zero(n);
    if (doc.contains("quadratic")) {
      quad = as_vector(doc.at("quadratic"), "/quadratic", n);
      if (static_cast<int>(quad.size()) != n) {
        throw SchemaError("/quadratic", "length mismatch");
      }
      if (!(quad.array() >= 0.0).all()) {
        throw SchemaError("/quadratic", "self-limitation weights must be >= 0");
      }
    }
    try {
      m.glv.emplace(d, a, quad);
    } catch (const std::invalid_argument& e) {
      throw SchemaError("/a", e.what());
    }
    const json& region = require_field(doc, "", "region");
    const double radius =
        as_number(require_field(region, "/region", "radius"), "/region/radius");
    const double floor =
        as_number(require_field(region, "/region", "floor"), "/region/floor");
    try {
      m.region.emplace(radius, floor);
      (void)m.region->inscribed_box(n);
    } catch (const std::invalid_argument& e) {
      throw SchemaError("/region", e.what());
    }
    try {
      m.bound.emplace(doc.contains("bound")
                          ? as_matrix(doc.at("bound"), "/bound", n)
                          : a);
    } catch (const std::invalid_argument& e) {
      throw SchemaError("/bound", e.what());
    }
    return m;
  }

  if (kind == "df") {
    m.kind = ModelKind::Df;
    const Vector gamma = as_vector(require_field(doc, "", "gamma"), "/gamma", 3);
    try {
      m.df.emplace(gamma);
    } catch (const std::invalid_argument& e) {
      throw SchemaError("/gamma", e.what());
    }
    return m;
  }

  throw SchemaError("/kind", "unknown model kind '" + kind + "' (sis|glv|df)");
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", "cannot open model file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("JSON parse error: ") + e.what());
  }
  return parse_model(doc);
}

json to_json(const ModelFile& m) {
  json doc;
  doc["kind"] = to_string(m.kind);
  doc["defaults"] = {{"tol", m.defaults.tol}, {"horizon", m.defaults.horizon}};
  switch (m.kind) {
    case ModelKind::Sis: {
      doc["d"] = vector_to_json(m.sis->recovery());
      doc["b"] = matrix_to_json(m.sis->infection());
      json ctrls = json::array();
      for (const auto& h : m.controls) ctrls.push_back(control_to_json(h));
      doc["controls"] = std::move(ctrls);
      break;
    }
    case ModelKind::Glv: {
      doc["d"] = vector_to_json(m.glv->rates());
      doc["a"] = matrix_to_json(m.glv->interactions());
      doc["quadratic"] = vector_to_json(m.glv->quadratic());
      doc["region"] = {{"radius", m.region->radius},
                       {"floor", m.region->floor}};
      doc["bound"] = matrix_to_json(m.bound->a_bound);
      break;
    }
    case ModelKind::Df: {
      doc["gamma"] = vector_to_json(m.df->gamma());
      break;
    }
  }
  return doc;
}

json to_json(const FaceReport& r) {
  json faces = json::array();
  for (const auto& f : r.faces) {
    faces.push_back({{"face", f.face},
                     {"pass", f.pass},
                     {"worst_margin", f.worst_margin},
                     {"worst_point", vector_to_json(f.worst_point)}});
  }
  return {{"pass", r.pass},
          {"worst_margin", r.worst_margin},
          {"samples_per_face", r.samples_per_face},
          {"faces", std::move(faces)}};
}

json to_json(const EquilibriumRecord& r) {
  return {{"location", vector_to_json(r.location)},
          {"residual", r.residual},
          {"index", to_string(r.index)},
          {"hurwitz", to_string(r.hurwitz)},
          {"hurwitz_abscissa", r.hurwitz_abscissa},
          {"det_neg_jacobian", r.det_neg_jacobian}};
}

json to_json(const CertificateReport& r) {
  json eq = json::array();
  for (const auto& rec : r.equilibria) eq.push_back(to_json(rec));
  return {{"verdict", to_string(r.unique_verdict)},
          {"equilibria", std::move(eq)},
          {"index_sum", r.index_sum},
          {"euler_characteristic", r.euler_characteristic},
          {"boundary_ok", r.boundary_ok},
          {"boundary", to_json(r.boundary)},
          {"seeds_total", r.seeds_total},
          {"seeds_converged", r.seeds_converged},
          {"grid_checked", r.grid_checked},
          {"notes", r.notes}};
}

json to_json(const GohReport& r) {
  return {{"pass", r.pass},
          {"bound_valid", r.bound_valid},
          {"minors_ok", r.minors_ok},
          {"worst_diag_margin", r.worst_diag_margin},
          {"worst_offdiag_margin", r.worst_offdiag_margin},
          {"detail", r.detail}};
}

json to_json(const EnvelopeReport& r) {
  return {{"holds", r.holds},
          {"bound_hurwitz", r.bound_hurwitz},
          {"worst_violation", r.worst_violation},
          {"envelope_final", r.envelope_final},
          {"deviation_final", r.deviation_final}};
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "0";
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64 offset basis
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace pheq
