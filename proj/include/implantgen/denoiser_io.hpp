#pragma once

#include <json.hpp>
#include <string>

#include "implantgen/denoiser.hpp"

namespace implantgen {

/// Model files are the raw little-endian float64 parameter payload at
/// `path` (flat layout order) plus a JSON manifest at `path + ".json"`
/// recording the layer shapes, architecture hyperparameters, seeds, and
/// any extra run metadata supplied by the caller.
void save_denoiser(const DenoiserParams& params, const std::string& path,
                   const nlohmann::json& extra = nlohmann::json::object());

DenoiserParams load_denoiser(const std::string& path, nlohmann::json* extra = nullptr);

}  // namespace implantgen
