#include "phi4/checkpoint.hpp"

#include <fstream>

#include "phi4/errors.hpp"

namespace phi4 {
namespace {

using json = nlohmann::ordered_json;

json to_array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd from_array(const json& a, Eigen::Index expected, const char* name) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != expected)
    throw InputError(std::string("checkpoint field '") + name + "' has the wrong length");
  Eigen::VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    if (!a[static_cast<std::size_t>(i)].is_number())
      throw InputError(std::string("checkpoint field '") + name + "' is not numeric");
    v(i) = a[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

}  // namespace

json checkpoint_to_json(const Model& model, const Provenance& meta) {
  const auto& theta = model.theta;
  const auto v = theta.volume();
  json doc;
  doc["provenance"] = meta.header_line();
  doc["format_version"] = kCheckpointFormatVersion;
  doc["tickers"] = model.tickers;
  doc["V"] = v;
  json w = json::array();
  for (Eigen::Index i = 0; i < v; ++i)
    for (Eigen::Index j = i + 1; j < v; ++j) w.push_back(theta.weight(i, j));
  doc["w"] = std::move(w);
  doc["mu"] = to_array(theta.mass_sq());
  doc["lambda"] = to_array(theta.quartic());
  doc["a"] = to_array(theta.bias());
  json md = model.training_metadata;
  if (model.standardizer) {
    md["standardization"] = {{"mean", to_array(model.standardizer->mean)},
                             {"scale", to_array(model.standardizer->scale)}};
  }
  doc["training_metadata"] = std::move(md);
  return doc;
}

Model checkpoint_from_json(const json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion)
      throw InputError("unsupported checkpoint format_version " + std::to_string(version));
    const auto v = doc.at("V").get<Eigen::Index>();
    if (v < 1) throw InputError("checkpoint volume must be >= 1");
    Model m;
    m.tickers = doc.at("tickers").get<std::vector<std::string>>();
    if (static_cast<Eigen::Index>(m.tickers.size()) != v)
      throw InputError("checkpoint tickers do not match V");
    auto p = ParameterBundled::zeros(v);
    const Eigen::VectorXd w = from_array(doc.at("w"), v * (v - 1) / 2, "w");
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < v; ++i)
      for (Eigen::Index j = i + 1; j < v; ++j) p.w(i, j) = w(k++);
    symmetrize_from_upper(p.w);
    p.mu = from_array(doc.at("mu"), v, "mu");
    p.lambda = from_array(doc.at("lambda"), v, "lambda");
    p.a = from_array(doc.at("a"), v, "a");
    m.theta = CouplingSetd(std::move(p));
    m.training_metadata = doc.value("training_metadata", json::object());
    if (m.training_metadata.contains("standardization")) {
      const auto& s = m.training_metadata["standardization"];
      m.standardizer = Standardizer{from_array(s.at("mean"), v, "standardization.mean"),
                                    from_array(s.at("scale"), v, "standardization.scale")};
      if ((m.standardizer->scale.array() <= 0).any())
        throw InputError("checkpoint standardization scale must be positive");
      m.training_metadata.erase("standardization");
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const Provenance& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << checkpoint_to_json(model, meta).dump(2) << '\n';
}

Model load_checkpoint(const std::filesystem::path& path) {
  try {
    return checkpoint_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace phi4
