#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "implantgen/denoiser.hpp"
#include "implantgen/dpsr.hpp"
#include "implantgen/denoiser_io.hpp"
#include "implantgen/diffusion.hpp"
#include "implantgen/implant.hpp"
#include "implantgen/marching_cubes.hpp"
#include "implantgen/metrics.hpp"
#include "implantgen/normals.hpp"
#include "implantgen/ply_io.hpp"
#include "implantgen/sampling.hpp"
#include "implantgen/synthetic.hpp"
#include "implantgen/volume_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace implantgen;

namespace {

std::string fnv1a_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UserError("cannot hash missing file: " + path);
    std::uint64_t h = 0xCBF29CE484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001B3ull;
        }
        if (!in) break;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UserError("cannot write: " + path);
    out << j.dump(2) << "\n";
    if (!out.flush()) throw UserError("cannot write: " + path);
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UserError("file not found: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw UserError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

/// Flags + derived seeds + output hashes; byte-identical across reruns of
/// the same command (keys sorted, no timestamps).
void write_run_manifest(const std::string& dir, const std::string& command, const json& flags,
                        const std::vector<std::string>& artifacts) {
    json m;
    m["command"] = command;
    m["flags"] = flags;
    json files = json::object();
    for (const auto& a : artifacts) files[fs::path(a).filename().string()] = fnv1a_hex(a);
    m["artifacts"] = files;
    write_json(m, (fs::path(dir) / "run_manifest.json").string());
}

struct SynthOptions {
    std::string output;
    int count = 1;
    std::uint64_t seed = 0;
    int dims = 64;
    double spacing = 1.0;
    std::vector<double> radii{14.0, 17.0, 14.0};
    double thickness = 9.0;
    double cap_min_deg = 28.0;
    double cap_max_deg = 45.0;
    double jitter_radii = 0.10;
};

int cmd_synth(const SynthOptions& opt) {
    if (opt.radii.size() != 3) throw UserError("--radii needs three values");
    fs::create_directories(opt.output);

    PhantomSpec base;
    base.dims = Index3::Constant(opt.dims);
    base.spacing = Vec3::Constant(opt.spacing);
    base.radii = Vec3(opt.radii[0], opt.radii[1], opt.radii[2]);
    base.thickness = opt.thickness;
    DatasetJitter jitter;
    jitter.radii_fraction = opt.jitter_radii;
    jitter.angle_min_deg = opt.cap_min_deg;
    jitter.angle_max_deg = opt.cap_max_deg;

    const auto dataset = make_dataset(opt.count, base, jitter, opt.seed);

    json manifest;
    manifest["seed"] = opt.seed;
    manifest["elements"] = json::array();
    std::vector<std::string> artifacts;
    for (int i = 0; i < opt.count; ++i) {
        char prefix[16];
        std::snprintf(prefix, sizeof(prefix), "%04d", i);
        const std::string sc = (fs::path(opt.output) / (std::string(prefix) + "_sc.vol")).string();
        const std::string sd = (fs::path(opt.output) / (std::string(prefix) + "_sd.vol")).string();
        const std::string im =
            (fs::path(opt.output) / (std::string(prefix) + "_implant.vol")).string();
        save_volume(dataset[i].triple.complete_shape, sc);
        save_volume(dataset[i].triple.defective_shape, sd);
        save_volume(dataset[i].triple.implant, im);
        artifacts.insert(artifacts.end(), {sc, sd, im});

        const auto& spec = dataset[i].spec;
        manifest["elements"].push_back(
            {{"complete", fs::path(sc).filename().string()},
             {"defective", fs::path(sd).filename().string()},
             {"implant", fs::path(im).filename().string()},
             {"radii", {spec.radii.x(), spec.radii.y(), spec.radii.z()}},
             {"thickness", spec.thickness},
             {"defect_direction",
              {spec.defect_direction.x(), spec.defect_direction.y(), spec.defect_direction.z()}},
             {"defect_angle_deg", spec.defect_angle_deg}});
    }
    const std::string manifest_path = (fs::path(opt.output) / "dataset.json").string();
    write_json(manifest, manifest_path);
    artifacts.push_back(manifest_path);

    json flags{{"count", opt.count},   {"seed", opt.seed},
               {"dims", opt.dims},     {"spacing", opt.spacing},
               {"radii", opt.radii},   {"thickness", opt.thickness},
               {"cap_min_deg", opt.cap_min_deg}, {"cap_max_deg", opt.cap_max_deg},
               {"jitter_radii", opt.jitter_radii}};
    write_run_manifest(opt.output, "synth", flags, artifacts);
    std::cout << "synth: wrote " << opt.count << " triples to " << opt.output << "\n";
    return 0;
}

struct TrainOptions {
    std::string input;
    std::string model;
    int epochs = 200;
    double lr = 2e-4;
    int batch = 8;
    int timesteps = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    int points_n = 512;
    int points_m = 64;
    std::uint64_t seed = 0;
    double sa1_radius = 0.8;
    double sa2_radius = 1.6;
    int neighbors = 16;
    int threads = 0;
};

/// Sample the two training clouds of one phantom and normalize both with
/// the transform fitted on the condition cloud.
TrainExample make_example(const BinaryGrid& defective, const BinaryGrid& implant, int points_n,
                          int points_m, std::uint64_t cond_seed, std::uint64_t impl_seed) {
    const PointCloud c0 = poisson_disk_sample(marching_cubes(defective), points_n, cond_seed);
    const PointCloud x0 = poisson_disk_sample(marching_cubes(implant), points_m, impl_seed);
    const NormalizationTransform tf = fit_normalization(c0);
    TrainExample ex;
    ex.condition = apply_normalization(c0, tf).points;
    ex.free_points = apply_normalization(x0, tf).points;
    return ex;
}

int cmd_train(const TrainOptions& opt) {
    const json dataset_manifest = load_json((fs::path(opt.input) / "dataset.json").string());
    if (!dataset_manifest.contains("elements") || dataset_manifest["elements"].empty())
        throw UserError("dataset manifest lists no elements: " + opt.input);

    std::vector<TrainExample> examples;
    int index = 0;
    for (const auto& e : dataset_manifest["elements"]) {
        const std::string sd = (fs::path(opt.input) / e.at("defective").get<std::string>()).string();
        const std::string im = (fs::path(opt.input) / e.at("implant").get<std::string>()).string();
        examples.push_back(make_example(load_volume(sd), load_volume(im), opt.points_n,
                                        opt.points_m, mix_seed(opt.seed, 2, index),
                                        mix_seed(opt.seed, 3, index)));
        ++index;
    }

    DenoiserConfig config;
    config.sa1_radius = opt.sa1_radius;
    config.sa2_radius = opt.sa2_radius;
    config.sa1_max_neighbors = opt.neighbors;
    config.sa2_max_neighbors = opt.neighbors;
    config.horizon = opt.timesteps;

    const DiffusionSchedule sched = make_schedule(opt.timesteps, opt.beta_start, opt.beta_end);
    const DenoiserParams initial = init_denoiser(config, mix_seed(opt.seed, 1));

    TrainConfig train;
    train.epochs = opt.epochs;
    train.learning_rate = opt.lr;
    train.batch_size = opt.batch;
    train.threads = opt.threads;

    const FitResult result = fit(initial, examples, train, sched, mix_seed(opt.seed, 4));

    if (const fs::path parent = fs::path(opt.model).parent_path(); !parent.empty())
        fs::create_directories(parent);
    json metadata{{"timesteps", opt.timesteps},
                  {"beta_start", opt.beta_start},
                  {"beta_end", opt.beta_end},
                  {"points_n", opt.points_n},
                  {"points_m", opt.points_m},
                  {"train_seed", opt.seed},
                  {"epochs", opt.epochs},
                  {"batch", opt.batch},
                  {"learning_rate", opt.lr},
                  {"dataset_size", examples.size()},
                  {"epoch_loss", result.epoch_loss}};
    save_denoiser(result.params, opt.model, metadata);

    json flags{{"input", opt.input},       {"model", opt.model},
               {"epochs", opt.epochs},     {"lr", opt.lr},
               {"batch", opt.batch},       {"timesteps", opt.timesteps},
               {"beta_start", opt.beta_start}, {"beta_end", opt.beta_end},
               {"points_n", opt.points_n}, {"points_m", opt.points_m},
               {"seed", opt.seed},         {"sa1_radius", opt.sa1_radius},
               {"sa2_radius", opt.sa2_radius}, {"neighbors", opt.neighbors}};
    json m;
    m["command"] = "train";
    m["flags"] = flags;
    m["artifacts"] = {{fs::path(opt.model).filename().string(), fnv1a_hex(opt.model)},
                      {fs::path(opt.model).filename().string() + ".json",
                       fnv1a_hex(opt.model + ".json")}};
    write_json(m, opt.model + ".run.json");

    std::cout << "train: " << examples.size() << " examples, " << opt.epochs
              << " epochs, first/last loss " << (result.epoch_loss.empty() ? 0.0 : result.epoch_loss.front())
              << "/" << (result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back()) << "\n";
    return 0;
}

struct CompleteOptions {
    std::string input;
    std::string model;
    std::string output;
    int ensemble = 1;
    std::uint64_t seed = 0;
    int points_n = 0;   // 0: take from model metadata
    int points_m = 0;
    int timesteps = 0;
    double beta_start = 0.0;
    double beta_end = 0.0;
    int grid = 0;       // 0: input dims
    double sigma = 1.0;
    int normals_k = 12;
    double junction_mm = -1.0;  // <0: auto (1.5 voxels), 0: off
};

int cmd_complete(const CompleteOptions& opt) {
    if (opt.ensemble < 1) throw UserError("--ensemble must be at least 1");
    const BinaryGrid defective = load_volume(opt.input);

    json metadata;
    const DenoiserParams params = load_denoiser(opt.model, &metadata);
    const int points_n = opt.points_n > 0 ? opt.points_n : metadata.value("points_n", 512);
    const int points_m = opt.points_m > 0 ? opt.points_m : metadata.value("points_m", 64);
    const int timesteps =
        opt.timesteps > 0 ? opt.timesteps : metadata.value("timesteps", params.config.horizon);
    const double beta_start =
        opt.beta_start > 0.0 ? opt.beta_start : metadata.value("beta_start", 1e-4);
    const double beta_end = opt.beta_end > 0.0 ? opt.beta_end : metadata.value("beta_end", 0.02);
    if (timesteps != params.config.horizon)
        throw UserError("--timesteps does not match the model's time-embedding horizon");

    Index3 out_dims = defective.dims;
    Vec3 out_spacing = defective.spacing;
    if (opt.grid > 0) {
        out_dims = Index3::Constant(opt.grid);
        for (int a = 0; a < 3; ++a)
            out_spacing[a] = defective.spacing[a] * defective.dims[a] / static_cast<double>(opt.grid);
    }
    for (int a = 0; a < 3; ++a)
        if (out_dims[a] <= 0 || (out_dims[a] & (out_dims[a] - 1)) != 0)
            throw UserError("completion grid dims must be powers of two (use --grid)");

    fs::create_directories(opt.output);
    const DiffusionSchedule sched = make_schedule(timesteps, beta_start, beta_end);

    // One condition cloud, shared by every ensemble member.
    const PointCloud c0 = poisson_disk_sample(marching_cubes(defective), points_n,
                                              mix_seed(opt.seed, 10));
    const NormalizationTransform tf = fit_normalization(c0);
    const PointCloud c0n = apply_normalization(c0, tf);

    std::vector<std::string> artifacts;
    std::vector<BinaryGrid> members;
    json dropped = json::array();
    const DenoiserFn denoiser = make_denoiser_fn(params);
    for (int member = 0; member < opt.ensemble; ++member) {
        const PointCloud generated =
            complete(c0n.points, points_m, denoiser, sched, opt.seed + member);
        PointCloud world = apply_normalization(generated, tf, /*inverse=*/true);
        world.split = generated.split;

        // The volume cannot represent geometry outside itself: snap points
        // within half a voxel of the domain onto it, discard farther
        // strays (an undertrained sampler can scatter free points widely).
        PointCloud kept;
        kept.points.resize(world.count(), 3);
        Eigen::Index n_kept = 0, n_dropped = 0;
        for (Eigen::Index i = 0; i < world.count(); ++i) {
            Eigen::RowVector3d p = world.points.row(i);
            bool keep = true;
            for (int a = 0; a < 3 && keep; ++a) {
                const double lo = 0.0, hi = out_dims[a] * out_spacing[a];
                if (p[a] < lo - 0.5 * out_spacing[a] || p[a] > hi + 0.5 * out_spacing[a])
                    keep = false;
                else
                    p[a] = std::clamp(p[a], lo + 1e-9, hi - 1e-9);
            }
            if (!keep) {
                ++n_dropped;
                continue;
            }
            kept.points.row(n_kept++) = p;
            if (i < world.split) kept.split = n_kept;
        }
        kept.points.conservativeResize(n_kept, 3);
        dropped.push_back(n_dropped);
        if (n_kept <= opt.normals_k)
            throw UserError("completion left too few points inside the volume; train longer");

        // The seam where the generated block meets the known surface is
        // interior to the completed shape; keep it out of the solver input.
        const double junction_radius =
            opt.junction_mm < 0.0 ? 1.75 * out_spacing.maxCoeff() : opt.junction_mm;
        const PointCloud seamless =
            junction_radius > 0.0 ? remove_junction_points(kept, junction_radius) : kept;
        if (seamless.count() <= opt.normals_k)
            throw UserError("completion left too few points after seam removal");

        const PointCloud oriented = estimate_normals(seamless, opt.normals_k);
        PointCloud index_space = oriented;
        for (int a = 0; a < 3; ++a) index_space.points.col(a) /= out_spacing[a];
        const VectorField field = rasterize_oriented_points(index_space, out_dims);
        const BinaryGrid completed = voxelize(spectral_poisson_solve(field, opt.sigma), out_spacing);

        char prefix[32];
        std::snprintf(prefix, sizeof(prefix), "member_%03d", member);
        const std::string vol =
            (fs::path(opt.output) / (std::string(prefix) + "_sc.vol")).string();
        const std::string ply =
            (fs::path(opt.output) / (std::string(prefix) + "_cloud.ply")).string();
        save_volume(completed, vol);
        write_cloud_ply(oriented, ply);
        artifacts.insert(artifacts.end(), {vol, ply});
        members.push_back(std::move(completed));
    }

    const EnsembleStats stats = ensemble_stats(members);
    const std::string mean_path = (fs::path(opt.output) / "sc_mean.vol").string();
    const std::string var_path = (fs::path(opt.output) / "sc_variance.vol").string();
    save_volume(stats.mean, mean_path);
    save_volume(stats.variance, var_path);
    artifacts.insert(artifacts.end(), {mean_path, var_path});

    json flags{{"input", opt.input},     {"model", opt.model},   {"output", opt.output},
               {"ensemble", opt.ensemble}, {"seed", opt.seed},   {"points_n", points_n},
               {"points_m", points_m},   {"timesteps", timesteps}, {"beta_start", beta_start},
               {"beta_end", beta_end},   {"grid", opt.grid},     {"sigma", opt.sigma},
               {"normals_k", opt.normals_k}, {"junction_mm", opt.junction_mm},
               {"dropped_points", dropped}};
    write_run_manifest(opt.output, "complete", flags, artifacts);
    std::cout << "complete: " << opt.ensemble << " members written to " << opt.output << "\n";
    return 0;
}

struct ImplantOptions {
    std::string input;        // defective volume
    std::string completions;  // directory with member_*_sc.vol
    std::string output;
};

int cmd_implant(const ImplantOptions& opt) {
    const BinaryGrid defective = load_volume(opt.input);

    std::vector<std::string> member_files;
    if (fs::is_directory(opt.completions)) {
        for (const auto& entry : fs::directory_iterator(opt.completions)) {
            const std::string name = entry.path().filename().string();
            if (name.starts_with("member_") && name.ends_with("_sc.vol"))
                member_files.push_back(entry.path().string());
        }
        std::sort(member_files.begin(), member_files.end());
    } else {
        member_files.push_back(opt.completions);  // a single completed volume
    }
    if (member_files.empty())
        throw UserError("no member_*_sc.vol completions found in " + opt.completions);

    fs::create_directories(opt.output);
    std::vector<std::string> artifacts;
    std::vector<BinaryGrid> implants;
    for (std::size_t i = 0; i < member_files.size(); ++i) {
        const BinaryGrid completed = load_volume(member_files[i]);
        implants.push_back(generate_implant(completed, defective));
        char name[32];
        std::snprintf(name, sizeof(name), "implant_%03d.vol", static_cast<int>(i));
        const std::string path = (fs::path(opt.output) / name).string();
        save_volume(implants.back(), path);
        artifacts.push_back(path);
    }

    const EnsembleStats stats = ensemble_stats(implants);
    const std::string mean_path = (fs::path(opt.output) / "implant_mean.vol").string();
    const std::string var_path = (fs::path(opt.output) / "implant_variance.vol").string();
    const std::string mean_implant_path = (fs::path(opt.output) / "mean_implant.vol").string();
    save_volume(stats.mean, mean_path);
    save_volume(stats.variance, var_path);
    save_volume(stats.mean_implant, mean_implant_path);
    artifacts.insert(artifacts.end(), {mean_path, var_path, mean_implant_path});

    json flags{{"input", opt.input}, {"completions", opt.completions}, {"output", opt.output},
               {"members", member_files.size()}};
    write_run_manifest(opt.output, "implant", flags, artifacts);
    std::cout << "implant: " << member_files.size() << " implants written to " << opt.output
              << "\n";
    return 0;
}

struct EvalOptions {
    std::string input;  // prediction
    std::string gt;
    std::string output;
    double tolerance_mm = 10.0;
};

int cmd_eval(const EvalOptions& opt) {
    const BinaryGrid pred = load_volume(opt.input);
    const BinaryGrid truth = load_volume(opt.gt);
    const MetricReport r = evaluate(pred, truth, opt.tolerance_mm);

    json report{{"dsc", r.dsc},
                {"bdsc", r.bdsc},
                {"hd95", r.hd95},
                {"tolerance_mm", r.tolerance_mm},
                {"spacing_mm", {pred.spacing.x(), pred.spacing.y(), pred.spacing.z()}},
                {"run",
                 {{"command", "eval"},
                  {"input", opt.input},
                  {"gt", opt.gt},
                  {"input_hash", fnv1a_hex(opt.input)},
                  {"gt_hash", fnv1a_hex(opt.gt)}}}};
    if (!opt.output.empty()) write_json(report, opt.output);
    std::cout << report.dump() << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Shape completion and implant generation for 3D binary volumes"};
    app.require_subcommand(1);

    SynthOptions synth;
    auto* cs = app.add_subcommand("synth", "Generate synthetic defective-shell triples");
    cs->add_option("--output", synth.output, "Output directory")->required();
    cs->add_option("--count", synth.count, "Number of triples");
    cs->add_option("--seed", synth.seed, "Base seed");
    cs->add_option("--dims", synth.dims, "Cubic volume size (voxels)");
    cs->add_option("--spacing", synth.spacing, "Voxel spacing (mm)");
    cs->add_option("--radii", synth.radii, "Outer semi-axes (voxels)")->expected(3);
    cs->add_option("--thickness", synth.thickness, "Shell thickness (voxels)");
    cs->add_option("--cap-min-deg", synth.cap_min_deg, "Minimum defect angular radius");
    cs->add_option("--cap-max-deg", synth.cap_max_deg, "Maximum defect angular radius");
    cs->add_option("--jitter-radii", synth.jitter_radii, "Radii jitter fraction");

    TrainOptions train;
    auto* ct = app.add_subcommand("train", "Train the noise-prediction network");
    ct->add_option("--input", train.input, "Dataset directory (from synth)")->required();
    ct->add_option("--model", train.model, "Output model path")->required();
    ct->add_option("--epochs", train.epochs, "Training epochs");
    ct->add_option("--lr", train.lr, "Adam learning rate");
    ct->add_option("--batch", train.batch, "Batch size");
    ct->add_option("--timesteps", train.timesteps, "Diffusion steps T");
    ct->add_option("--beta-start", train.beta_start, "Schedule start");
    ct->add_option("--beta-end", train.beta_end, "Schedule end");
    ct->add_option("--points-n", train.points_n, "Condition points per shape");
    ct->add_option("--points-m", train.points_m, "Free points per shape");
    ct->add_option("--seed", train.seed, "Base seed");
    ct->add_option("--sa1-radius", train.sa1_radius, "SA level 1 grouping radius");
    ct->add_option("--sa2-radius", train.sa2_radius, "SA level 2 grouping radius");
    ct->add_option("--neighbors", train.neighbors, "Max neighbors per group");
    ct->add_option("--threads", train.threads, "Batch evaluation threads (0 = auto)");

    CompleteOptions comp;
    auto* cc = app.add_subcommand("complete", "Complete a defective volume");
    cc->add_option("--input", comp.input, "Defective volume")->required();
    cc->add_option("--model", comp.model, "Trained model path")->required();
    cc->add_option("--output", comp.output, "Output directory")->required();
    cc->add_option("--ensemble", comp.ensemble, "Number of stochastic completions");
    cc->add_option("--seed", comp.seed, "Base seed (member i uses seed + i)");
    cc->add_option("--points-n", comp.points_n, "Condition points (default: model)");
    cc->add_option("--points-m", comp.points_m, "Generated points (default: model)");
    cc->add_option("--timesteps", comp.timesteps, "Diffusion steps (default: model)");
    cc->add_option("--beta-start", comp.beta_start, "Schedule start (default: model)");
    cc->add_option("--beta-end", comp.beta_end, "Schedule end (default: model)");
    cc->add_option("--grid", comp.grid, "Voxelization grid (power of two; default: input dims)");
    cc->add_option("--sigma", comp.sigma, "Spectral smoothing (grid units)");
    cc->add_option("--normals-k", comp.normals_k, "k for normal estimation");
    cc->add_option("--junction-mm", comp.junction_mm,
                   "Seam removal radius, mm (<0 auto, 0 off)");

    ImplantOptions impl;
    auto* ci = app.add_subcommand("implant", "Subtract the defect and ensemble the implants");
    ci->add_option("--input", impl.input, "Defective volume")->required();
    ci->add_option("--completions", impl.completions, "Directory from `complete` (or one volume)")
        ->required();
    ci->add_option("--output", impl.output, "Output directory")->required();

    EvalOptions eval;
    auto* ce = app.add_subcommand("eval", "Score a prediction against ground truth");
    ce->add_option("--input", eval.input, "Predicted binary volume")->required();
    ce->add_option("--gt", eval.gt, "Ground-truth binary volume")->required();
    ce->add_option("--output", eval.output, "Report JSON path");
    ce->add_option("--tolerance-mm", eval.tolerance_mm, "Boundary DSC tolerance");

    try {
        app.parse(argc, argv);
        if (cs->parsed()) return cmd_synth(synth);
        if (ct->parsed()) return cmd_train(train);
        if (cc->parsed()) return cmd_complete(comp);
        if (ci->parsed()) return cmd_implant(impl);
        if (ce->parsed()) return cmd_eval(eval);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UserError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
