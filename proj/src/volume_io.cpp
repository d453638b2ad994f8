#include "implantgen/volume_io.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "volume payloads are little-endian; big-endian hosts are unsupported");

namespace implantgen {

namespace {

using nlohmann::json;

json read_header(const std::string& path) {
    const std::string header_path = path + ".json";
    std::ifstream in(header_path);
    if (!in) throw UserError("volume header not found: " + header_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw UserError("malformed volume header " + header_path + ": " + e.what());
    }
    return j;
}

template <typename Scalar>
VoxelGrid<Scalar> load_payload(const std::string& path, const json& header) {
    Index3 dims;
    Vec3 spacing;
    std::string dtype;
    try {
        for (int a = 0; a < 3; ++a) {
            dims[a] = header.at("dims").at(a).get<int>();
            spacing[a] = header.at("spacing_mm").at(a).get<double>();
        }
        dtype = header.at("dtype").get<std::string>();
    } catch (const json::exception& e) {
        throw UserError("volume header " + path + ".json missing fields: " + e.what());
    }
    VoxelGrid<Scalar> grid(dims, spacing);

    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("volume payload not found: " + path);
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    const std::size_t expected = static_cast<std::size_t>(grid.size()) * sizeof(Scalar);
    if (bytes != expected)
        throw UserError("volume " + path + ": payload has " + std::to_string(bytes) +
                        " bytes, header implies " + std::to_string(expected));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(grid.values.data()), static_cast<std::streamsize>(expected));
    if (!in) throw UserError("volume " + path + ": short read");
    return grid;
}

template <typename Scalar>
void save_payload(const VoxelGrid<Scalar>& grid, const std::string& path, const char* dtype) {
    json header;
    header["dims"] = {grid.dims.x(), grid.dims.y(), grid.dims.z()};
    header["spacing_mm"] = {grid.spacing.x(), grid.spacing.y(), grid.spacing.z()};
    header["dtype"] = dtype;

    std::ofstream hout(path + ".json");
    if (!hout) throw UserError("cannot write volume header: " + path + ".json");
    hout << header.dump(2) << "\n";
    if (!hout.flush()) throw UserError("cannot write volume header: " + path + ".json");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw UserError("cannot write volume payload: " + path);
    out.write(reinterpret_cast<const char*>(grid.values.data()),
              static_cast<std::streamsize>(static_cast<std::size_t>(grid.size()) * sizeof(Scalar)));
    if (!out.flush()) throw UserError("cannot write volume payload: " + path);
}

}  // namespace

BinaryGrid load_volume(const std::string& path) {
    const json header = read_header(path);
    if (header.value("dtype", "") != "uint8")
        throw UserError("volume " + path + ": expected dtype uint8, got " +
                        header.value("dtype", "<missing>"));
    BinaryGrid grid = load_payload<std::uint8_t>(path, header);
    require_binary(grid, "load_volume(" + path + ")");
    return grid;
}

RealGrid load_real_volume(const std::string& path) {
    const json header = read_header(path);
    if (header.value("dtype", "") != "float32")
        throw UserError("volume " + path + ": expected dtype float32, got " +
                        header.value("dtype", "<missing>"));
    return load_payload<float>(path, header);
}

void save_volume(const BinaryGrid& grid, const std::string& path) {
    require_binary(grid, "save_volume(" + path + ")");
    save_payload(grid, path, "uint8");
}

void save_volume(const RealGrid& grid, const std::string& path) {
    save_payload(grid, path, "float32");
}

std::string volume_dtype(const std::string& path) {
    return read_header(path).value("dtype", "");
}

}  // namespace implantgen
