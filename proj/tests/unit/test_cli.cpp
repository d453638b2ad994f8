#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "implantgen/volume_io.hpp"
#include "test_helpers.hpp"

using nlohmann::json;
using testutil::TempDir;

namespace {

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"implantgen"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json slurp_json(const std::string& path) { return json::parse(slurp(path)); }

}  // namespace

TEST_CASE("cli end-to-end pipeline on a tiny problem") {
    TempDir dir("cli");

    REQUIRE(run({"synth", "--output", dir.file("data"), "--count", "3", "--seed", "11"}) == 0);
    const json manifest = slurp_json(dir.file("data/dataset.json"));
    CHECK(manifest["elements"].size() == 3);
    CHECK(implantgen::load_volume(dir.file("data/0000_sd.vol")).dims ==
          implantgen::Index3(64, 64, 64));

    REQUIRE(run({"train", "--input", dir.file("data"), "--model", dir.file("model/net"),
                 "--epochs", "2", "--batch", "2", "--timesteps", "10", "--beta-start", "1e-3",
                 "--beta-end", "0.2", "--points-n", "128", "--points-m", "16", "--seed",
                 "3"}) == 0);
    const json model_manifest = slurp_json(dir.file("model/net.json"));
    CHECK(model_manifest["metadata"]["epoch_loss"].size() == 2);
    CHECK(model_manifest["config"]["horizon"] == 10);

    REQUIRE(run({"complete", "--input", dir.file("data/0000_sd.vol"), "--model",
                 dir.file("model/net"), "--output", dir.file("comp"), "--ensemble", "2",
                 "--seed", "5"}) == 0);
    CHECK(implantgen::volume_dtype(dir.file("comp/sc_mean.vol")) == "float32");
    CHECK(implantgen::volume_dtype(dir.file("comp/member_000_sc.vol")) == "uint8");

    REQUIRE(run({"implant", "--input", dir.file("data/0000_sd.vol"), "--completions",
                 dir.file("comp"), "--output", dir.file("imp")}) == 0);
    CHECK(implantgen::volume_dtype(dir.file("imp/mean_implant.vol")) == "uint8");
    CHECK(implantgen::volume_dtype(dir.file("imp/implant_variance.vol")) == "float32");

    REQUIRE(run({"eval", "--input", dir.file("imp/mean_implant.vol"), "--gt",
                 dir.file("data/0000_implant.vol"), "--output", dir.file("report.json"),
                 "--tolerance-mm", "10"}) == 0);
    const json report = slurp_json(dir.file("report.json"));
    CHECK(report.contains("dsc"));
    CHECK(report.contains("bdsc"));
    CHECK(report.contains("hd95"));
    CHECK(report["tolerance_mm"] == 10.0);
}

TEST_CASE("cli eval of identical volumes gives perfect scores") {
    TempDir dir("cli_eval");
    REQUIRE(run({"synth", "--output", dir.file("d"), "--count", "1", "--seed", "2"}) == 0);
    REQUIRE(run({"eval", "--input", dir.file("d/0000_implant.vol"), "--gt",
                 dir.file("d/0000_implant.vol"), "--output", dir.file("r.json")}) == 0);
    const json r = slurp_json(dir.file("r.json"));
    CHECK(r["dsc"] == 1.0);
    CHECK(r["bdsc"] == 1.0);
    CHECK(r["hd95"] == 0.0);
}

TEST_CASE("cli reruns are byte identical") {
    TempDir dir("cli_det");
    const std::vector<std::string> synth_cmd{"synth",  "--output", dir.file("d"),
                                             "--count", "2",        "--seed",  "9"};
    REQUIRE(run(synth_cmd) == 0);
    const std::string manifest1 = slurp(dir.file("d/run_manifest.json"));
    const std::string dataset1 = slurp(dir.file("d/dataset.json"));
    const std::string vol1 = slurp(dir.file("d/0001_sc.vol"));
    REQUIRE(run(synth_cmd) == 0);
    CHECK(slurp(dir.file("d/run_manifest.json")) == manifest1);
    CHECK(slurp(dir.file("d/dataset.json")) == dataset1);
    CHECK(slurp(dir.file("d/0001_sc.vol")) == vol1);

    REQUIRE(run({"train", "--input", dir.file("d"), "--model", dir.file("m/net"), "--epochs",
                 "1", "--batch", "2", "--timesteps", "8", "--beta-start", "1e-3", "--beta-end",
                 "0.2", "--points-n", "96", "--points-m", "12", "--seed", "4"}) == 0);
    const std::vector<std::string> complete_cmd{
        "complete", "--input", dir.file("d/0000_sd.vol"), "--model", dir.file("m/net"),
        "--output", dir.file("c"), "--ensemble", "1", "--seed", "6"};
    REQUIRE(run(complete_cmd) == 0);
    const std::string comp_manifest1 = slurp(dir.file("c/run_manifest.json"));
    const std::string member1 = slurp(dir.file("c/member_000_sc.vol"));
    REQUIRE(run(complete_cmd) == 0);
    CHECK(slurp(dir.file("c/run_manifest.json")) == comp_manifest1);
    CHECK(slurp(dir.file("c/member_000_sc.vol")) == member1);
}

TEST_CASE("cli maps failure classes to exit code 1") {
    TempDir dir("cli_err");
    CHECK(run({"eval", "--input", dir.file("missing.vol"), "--gt", dir.file("missing.vol")}) ==
          1);
    CHECK(run({"frobnicate"}) == 1);
    CHECK(run({"synth"}) == 1);  // missing required flag
    CHECK(run({"synth", "--output", dir.file("x"), "--count", "1", "--seed", "1", "--radii",
               "40", "40", "40"}) == 1);  // shell does not fit

    // Shape mismatch between prediction and ground truth.
    REQUIRE(run({"synth", "--output", dir.file("a"), "--count", "1", "--seed", "1"}) == 0);
    REQUIRE(run({"synth", "--output", dir.file("b"), "--count", "1", "--seed", "1", "--dims",
                 "32", "--radii", "10", "12", "10", "--thickness", "5"}) == 0);
    CHECK(run({"eval", "--input", dir.file("a/0000_implant.vol"), "--gt",
               dir.file("b/0000_implant.vol")}) == 1);
}
