#include "graphcal/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "graphcal/errors.hpp"

namespace graphcal {

using ordered_json = nlohmann::ordered_json;

std::string model_to_json(const GcnModel& model) {
  model.check_dims();
  ordered_json j;
  j["format"] = "graphcal-gcn";
  j["version"] = kCheckpointVersion;
  j["seed"] = model.seed;
  j["dims"] = {{"input", model.dims.input},
               {"hidden", std::vector<std::size_t>(model.dims.hidden.begin(), model.dims.hidden.end())}};
  auto layers = ordered_json::array();
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    const auto& w = model.weights[l];
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    const auto& b = model.biases[l];
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"weights", std::move(flat)},
                      {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  j["layers"] = std::move(layers);
  return j.dump();
}

GcnModel model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "graphcal-gcn") throw DataError("not a graphcal checkpoint");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw DataError("unsupported checkpoint version " + std::to_string(version));
    }
    GcnDims dims;
    dims.input = j.at("dims").at("input").get<std::size_t>();
    const auto hidden = j.at("dims").at("hidden").get<std::vector<std::size_t>>();
    if (hidden.size() != kGcnLayers) throw DataError("checkpoint must list 3 hidden dimensions");
    std::copy(hidden.begin(), hidden.end(), dims.hidden.begin());

    GcnModel model = GcnModel::zeros(dims);
    model.seed = j.at("seed").get<std::uint64_t>();
    const auto& layers = j.at("layers");
    if (layers.size() != model.weights.size()) throw DataError("checkpoint layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto rows = layers[l].at("rows").get<Eigen::Index>();
      const auto cols = layers[l].at("cols").get<Eigen::Index>();
      const auto flat = layers[l].at("weights").get<std::vector<double>>();
      const auto bias = layers[l].at("bias").get<std::vector<double>>();
      auto& w = model.weights[l];
      if (rows != w.rows() || cols != w.cols() || static_cast<Eigen::Index>(flat.size()) != rows * cols ||
          static_cast<Eigen::Index>(bias.size()) != model.biases[l].size()) {
        throw DataError("checkpoint layer " + std::to_string(l) + " has inconsistent shape");
      }
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
      model.biases[l] = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
    }
    model.check_dims();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_model(const GcnModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out << model_to_json(model) << '\n';
}

GcnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace graphcal
