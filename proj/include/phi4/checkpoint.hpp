#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "phi4/coupling_set.hpp"
#include "phi4/data.hpp"
#include "phi4/io.hpp"

namespace phi4 {

inline constexpr int kCheckpointFormatVersion = 1;

/// A trained model: couplings plus the labels and input transform needed to
/// apply it to return data.
struct Model {
  std::vector<std::string> tickers;
  CouplingSetd theta;
  std::optional<Standardizer> standardizer;  // present when trained on z-scored returns
  nlohmann::ordered_json training_metadata = nlohmann::ordered_json::object();
};

/// Checkpoint document:
/// {provenance, format_version, tickers[], V, w[] (upper triangle, row-major),
///  mu[], lambda[], a[], training_metadata{}}.
nlohmann::ordered_json checkpoint_to_json(const Model& model, const Provenance& meta);
Model checkpoint_from_json(const nlohmann::ordered_json& doc);

void save_checkpoint(const std::filesystem::path& path, const Model& model, const Provenance& meta);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace phi4
