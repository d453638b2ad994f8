#include "implantgen/denoiser_io.hpp"

#include <bit>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "model payloads are little-endian; big-endian hosts are unsupported");

namespace implantgen {

using nlohmann::json;

void save_denoiser(const DenoiserParams& params, const std::string& path, const json& extra) {
    if (params.theta.size() != denoiser_param_count())
        throw InternalError("save_denoiser: parameter vector does not match layout");

    json manifest;
    manifest["format"] = "denoiser-params-v1";
    manifest["dtype"] = "float64";
    manifest["param_count"] = denoiser_param_count();
    manifest["init_seed"] = params.init_seed;
    manifest["config"] = {{"sa1_radius", params.config.sa1_radius},
                          {"sa2_radius", params.config.sa2_radius},
                          {"sa1_max_neighbors", params.config.sa1_max_neighbors},
                          {"sa2_max_neighbors", params.config.sa2_max_neighbors},
                          {"center_fraction", params.config.center_fraction},
                          {"horizon", params.config.horizon}};
    json layers = json::array();
    for (const auto& t : denoiser_layout())
        layers.push_back(
            {{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}, {"offset", t.offset}});
    manifest["tensors"] = layers;
    if (!extra.empty()) manifest["metadata"] = extra;

    std::ofstream mout(path + ".json");
    if (!mout) throw UserError("cannot write model manifest: " + path + ".json");
    mout << manifest.dump(2) << "\n";
    if (!mout.flush()) throw UserError("cannot write model manifest: " + path + ".json");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write model payload: " + path);
    out.write(reinterpret_cast<const char*>(params.theta.data()),
              static_cast<std::streamsize>(sizeof(double) * params.theta.size()));
    if (!out.flush()) throw UserError("cannot write model payload: " + path);
}

DenoiserParams load_denoiser(const std::string& path, json* extra) {
    std::ifstream min(path + ".json");
    if (!min) throw UserError("model manifest not found: " + path + ".json");
    json manifest;
    try {
        min >> manifest;
    } catch (const json::exception& e) {
        throw UserError("malformed model manifest " + path + ".json: " + e.what());
    }

    DenoiserParams params;
    try {
        const auto& c = manifest.at("config");
        params.config.sa1_radius = c.at("sa1_radius").get<double>();
        params.config.sa2_radius = c.at("sa2_radius").get<double>();
        params.config.sa1_max_neighbors = c.at("sa1_max_neighbors").get<int>();
        params.config.sa2_max_neighbors = c.at("sa2_max_neighbors").get<int>();
        params.config.center_fraction = c.at("center_fraction").get<double>();
        params.config.horizon = c.at("horizon").get<int>();
        params.init_seed = manifest.at("init_seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw UserError("model manifest " + path + ".json missing fields: " + e.what());
    }

    const Eigen::Index expected = denoiser_param_count();
    if (manifest.value("param_count", Eigen::Index(-1)) != expected)
        throw UserError("model " + path + ": parameter count does not match this architecture");

    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("model payload not found: " + path);
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes != sizeof(double) * static_cast<std::size_t>(expected))
        throw UserError("model " + path + ": payload size mismatch");
    in.seekg(0);
    params.theta.resize(expected);
    in.read(reinterpret_cast<char*>(params.theta.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw UserError("model " + path + ": short read");
    if (!params.theta.allFinite()) throw UserError("model " + path + ": non-finite parameter");

    if (extra) *extra = manifest.value("metadata", json::object());
    return params;
}

}  // namespace implantgen
