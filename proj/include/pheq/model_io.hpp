#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pheq/degroot_friedkin.hpp"
#include "pheq/lotka_volterra.hpp"
#include "pheq/ph_certificate.hpp"
#include "pheq/sis_model.hpp"

namespace pheq {

// Validation failure with the JSON path of the offending field ("/d/1").
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string field_path, const std::string& message)
      : std::runtime_error(field_path + ": " + message),
        field_path_(std::move(field_path)) {}

  [[nodiscard]] const std::string& field_path() const { return field_path_; }

 private:
  std::string field_path_;
};

enum class ModelKind { Sis, Glv, Df };

[[nodiscard]] const char* to_string(ModelKind k);

struct ExperimentDefaults {
  double tol = 1e-12;
  double horizon = 200.0;
};

// One parsed model file. Exactly the member matching `kind` is engaged.
struct ModelFile {
  ModelKind kind = ModelKind::Sis;

  std::optional<SISNetwork> sis;
  ControlSpec controls;  // same length as the network when kind == Sis

  std::optional<GLVModel> glv;
  std::optional<LVRegion> region;    // required for glv
  std::optional<SectorBound> bound;  // defaults to the interaction matrix

  std::optional<DFModel> df;

  ExperimentDefaults defaults;

  [[nodiscard]] int dimension() const;
};

// Throws SchemaError on any malformed or invariant-violating field; module
// constructor failures are rethrown as SchemaError with the field path.
[[nodiscard]] ModelFile parse_model(const nlohmann::json& doc);
[[nodiscard]] ModelFile load_model(const std::string& path);

// Canonical serialization; parse_model(to_json(m)) is equivalent to m.
[[nodiscard]] nlohmann::json to_json(const ModelFile& m);

[[nodiscard]] nlohmann::json to_json(const FaceReport& r);
[[nodiscard]] nlohmann::json to_json(const EquilibriumRecord& r);
[[nodiscard]] nlohmann::json to_json(const CertificateReport& r);
[[nodiscard]] nlohmann::json to_json(const GohReport& r);
[[nodiscard]] nlohmann::json to_json(const EnvelopeReport& r);

// FNV-1a 64-bit over the raw file bytes, hex encoded; stamps reports.
[[nodiscard]] std::string file_hash(const std::string& path);

}  // namespace pheq
