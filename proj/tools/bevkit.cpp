// bevkit command line: full pipeline, single stages, synthetic scenes.

#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bevkit/config.hpp"
#include "bevkit/io.hpp"
#include "bevkit/pipeline.hpp"
#include "bevkit/synthscene.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kStageFailure = 1;
constexpr int kUsage = 2;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string segmenter;
    std::string out;
    std::string input;
    std::vector<std::string> sets;
};

void add_common(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config, "pipeline config JSON");
    sub->add_option("--seed", f.seed, "RNG seed (pcc.seed)");
    sub->add_option("--segmenter", f.segmenter, "components | external:<command>");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--input", f.input, "frames directory");
    sub->add_option("--set", f.sets, "override a config key, e.g. --set tracker.max_age=20");
}

bevkit::PipelineConfig build_config(const CommonFlags& f) {
    nlohmann::json j = nlohmann::json::object();
    if (!f.config.empty()) {
        try {
            j = nlohmann::json::parse(bevkit::read_text_file(f.config));
        } catch (const nlohmann::json::parse_error& e) {
            throw bevkit::Error(bevkit::ErrorCode::InvalidConfig, f.config + ": " + e.what());
        }
    }
    for (const auto& s : f.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw bevkit::Error(bevkit::ErrorCode::InvalidConfig, "--set needs key=value");
        bevkit::set_key_path(j, s.substr(0, eq), s.substr(eq + 1));
    }
    if (f.seed) j["pcc"]["seed"] = *f.seed;
    if (!f.segmenter.empty()) j["segment"]["segmenter"] = f.segmenter;
    if (!f.out.empty()) j["out"] = f.out;
    if (!f.input.empty()) j["input"] = f.input;
    return bevkit::config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LiDAR BEV traffic analytics"};
    app.require_subcommand(1);

    CommonFlags flags;
    using Stage = std::function<void(const bevkit::PipelineConfig&)>;
    const std::vector<std::tuple<const char*, const char*, Stage>> stages = {
        {"run", "full pipeline", bevkit::run_pipeline},
        {"rasterize", "frames to BEV occupancy images", bevkit::stage_rasterize},
        {"background", "background estimate and completion", bevkit::stage_background},
        {"detect", "subtraction, completion, segmentation, NMS", bevkit::stage_detect},
        {"track", "tracking and track filters", bevkit::stage_track},
        {"ground", "ground height map", bevkit::stage_ground},
        {"boxes", "3D boxes and classes", bevkit::stage_boxes},
        {"params", "speed, acceleration, stats, counts", bevkit::stage_params},
        {"eval", "3D box evaluation against ground truth", bevkit::stage_eval},
        {"plot", "SVG plots", bevkit::stage_plot},
    };
    std::map<CLI::App*, Stage> handlers;
    for (const auto& [name, help, fn] : stages) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub, flags);
        handlers[sub] = fn;
    }

    std::string synth_out;
    std::string synth_preset = "near";
    std::string synth_scene;
    std::optional<std::uint64_t> synth_seed;
    bool synth_occlusion = false;
    auto* synth = app.add_subcommand("synth", "generate a synthetic sequence");
    synth->add_option("--out", synth_out, "output frames directory")->required();
    synth->add_option("--preset", synth_preset, "near | far")->check(CLI::IsMember({"near", "far"}));
    synth->add_option("--scene", synth_scene, "scene script JSON (overrides --preset)");
    synth->add_option("--seed", synth_seed, "sampling seed");
    synth->add_flag("--occlusion", synth_occlusion, "enable angular occlusion");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (synth->parsed()) {
        try {
            bevkit::SceneScript scene;
            if (!synth_scene.empty()) {
                scene = bevkit::scene_from_json(nlohmann::json::parse(bevkit::read_text_file(synth_scene)));
            } else {
                scene = bevkit::intersection_scene(synth_preset == "far" ? bevkit::ScenePreset::Far
                                                                         : bevkit::ScenePreset::Near);
            }
            if (synth_seed) scene.sampling.seed = *synth_seed;
            if (synth_occlusion) scene.sampling.occlusion = true;
            bevkit::write_sequence(synth_out, bevkit::generate_sequence(scene));
            bevkit::write_text_file(std::filesystem::path(synth_out) / "scene.json",
                                    bevkit::scene_to_json(scene).dump(2) + "\n");
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "synth: " << e.what() << "\n";
            return kUsage;
        } catch (const bevkit::Error& e) {
            std::cerr << "synth: " << e.what() << "\n";
            return e.code() == bevkit::ErrorCode::InvalidConfig ? kUsage : kStageFailure;
        }
        return kOk;
    }

    for (const auto& [sub, fn] : handlers) {
        if (!sub->parsed()) continue;
        bevkit::PipelineConfig cfg;
        try {
            cfg = build_config(flags);
        } catch (const bevkit::Error& e) {
            std::cerr << "config: " << e.what() << "\n";
            return kUsage;
        }
        try {
            fn(cfg);
        } catch (const bevkit::StageError& e) {
            std::cerr << e.what() << "\n";
            // A missing input directory is a usage problem, not a data failure.
            if (e.stage() == "frames" && !std::filesystem::is_directory(cfg.input)) return kUsage;
            return kStageFailure;
        } catch (const std::exception& e) {
            std::cerr << sub->get_name() << ": " << e.what() << "\n";
            return kStageFailure;
        }
        return kOk;
    }
    return kUsage;
}
