#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tggm/errors.hpp"
#include "tggm/evaluation.hpp"
#include "tggm/image_io.hpp"
#include "tggm/serialization.hpp"
#include "tggm/synthdata.hpp"
#include "tggm/trainer.hpp"

namespace fs = std::filesystem;
using namespace tggm;

namespace {

constexpr int kExitSchemaError = 2;
constexpr int kExitDomainError = 3;

std::string resolve_relative(const std::string& path, const std::string& anchor_file) {
    fs::path p(path);
    if (p.is_absolute() || fs::exists(p)) {
        return path;
    }
    return (fs::path(anchor_file).parent_path() / p).string();
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir, std::optional<std::uint64_t> seed_override) {
    fs::create_directories(out_dir);
    SceneSpec spec;
    Difficulty difficulty;
    std::optional<TrainConfig> bench_config;
    if (is_benchmark_spec(spec_path, difficulty)) {
        Benchmark bench = make_benchmark(difficulty);
        spec = bench.spec;
        bench_config = bench.config;
    } else {
        spec = load_scene_spec(spec_path);
    }
    if (seed_override) {
        spec.seed = *seed_override;
    }
    const SceneTruth truth = generate_scene(spec);

    const fs::path image_path = fs::path(out_dir) / "scene.png";
    save_png(truth.image, image_path.string());

    AnnotationFile annotations;
    annotations.image = "scene.png";
    annotations.roi = truth.roi;
    annotations.boxes = truth.target_boxes;
    if (!truth.target_boxes.empty()) {
        const Box& first = truth.target_boxes.front();
        annotations.seed_window =
            Window{static_cast<int>(first.x), static_cast<int>(first.y), static_cast<int>(first.width)};
    }
    save_annotations((fs::path(out_dir) / "truth.json").string(), annotations);
    save_scene_spec((fs::path(out_dir) / "spec.json").string(), spec);
    if (bench_config) {
        save_train_config((fs::path(out_dir) / "config.json").string(), *bench_config);
    }
    std::cout << "seed: " << spec.seed << "\n";
    std::cout << "wrote " << image_path.string() << " and truth.json (" << truth.target_boxes.size()
              << " target boxes)\n";
    return 0;
}

int cmd_detect(const std::string& config_path, const std::string& image_path, const std::string& annotations_path,
               const std::string& out_dir, std::optional<std::uint64_t> seed_override) {
    fs::create_directories(out_dir);
    TrainConfig cfg = config_path.empty() ? TrainConfig{} : load_train_config(config_path);
    if (seed_override) {
        cfg.seed = *seed_override;
    }
    const AnnotationFile annotations = load_annotations(annotations_path);
    std::string effective_image = image_path;
    if (effective_image.empty()) {
        if (annotations.image.empty()) {
            throw SchemaError("no image given: pass --image or set \"image\" in the annotation file");
        }
        effective_image = resolve_relative(annotations.image, annotations_path);
    }
    const Image image = load_png(effective_image);

    std::cout << "seed: " << cfg.seed << "\n";
    const DetectionResult result = run(image, annotations.roi, annotations.seed_window, cfg);

    save_detections_csv((fs::path(out_dir) / "detections.csv").string(), result.detections);
    save_history((fs::path(out_dir) / "history.json").string(), result);
    save_checkpoint((fs::path(out_dir) / "checkpoint.json").string(), result.model, result.seed);
    std::cout << "windows: " << result.window_count << ", detected: " << result.detections.size() << ", "
              << result.termination << " after " << result.history.size() << " iterations\n";
    return 0;
}

int cmd_eval(const std::string& detections_path, const std::string& truth_path, const std::vector<int>& grid_sizes,
             const std::string& out_dir, bool overlays, const std::string& image_path) {
    fs::create_directories(out_dir);
    const AnnotationFile truth = load_annotations(truth_path);
    const std::vector<DetectionRow> rows = load_detections_csv(detections_path);

    std::string effective_image = image_path;
    if (overlays && effective_image.empty()) {
        if (truth.image.empty()) {
            throw SchemaError("--overlays needs --image or an \"image\" field in the truth file");
        }
        effective_image = resolve_relative(truth.image, truth_path);
    }

    int width = 0;
    int height = 0;
    Image base;
    if (!effective_image.empty()) {
        base = load_png(effective_image);
        width = base.width;
        height = base.height;
    } else {
        // Without an image the extent comes from the annotations themselves.
        for (const auto& [x, y] : truth.roi.vertices) {
            width = std::max(width, static_cast<int>(std::ceil(x)));
            height = std::max(height, static_cast<int>(std::ceil(y)));
        }
        for (const Box& b : truth.boxes) {
            width = std::max(width, static_cast<int>(std::ceil(b.x + b.width)));
            height = std::max(height, static_cast<int>(std::ceil(b.y + b.height)));
        }
        for (const DetectionRow& row : rows) {
            width = std::max(width, row.window.x + row.window.size);
            height = std::max(height, row.window.y + row.window.size);
        }
    }
    if (width <= 0 || height <= 0) {
        throw SchemaError("cannot determine the image extent for grid evaluation");
    }

    std::vector<Window> detected;
    detected.reserve(rows.size());
    for (const DetectionRow& row : rows) {
        detected.push_back(row.window);
    }

    for (int g : grid_sizes) {
        if (g < 1) {
            throw SchemaError("grid sizes must be >= 1");
        }
        const GridMask gt = grid_ground_truth(truth.boxes, width, height, g);
        const GridMask pred = grid_predictions(detected, width, height, g);
        const GridReport report = prf(gt, pred);
        const fs::path report_path = fs::path(out_dir) / ("report_g" + std::to_string(g) + ".json");
        save_grid_report(report_path.string(), report);
        std::cout << "grid " << g << ": precision " << report.precision << ", recall " << report.recall << ", f1 "
                  << report.f1 << "\n";
        if (overlays) {
            const Image overlay = render_overlay(base, report);
            save_png(overlay, (fs::path(out_dir) / ("overlay_g" + std::to_string(g) + ".png")).string());
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weakly supervised target-window detection over ROI polygons"};
    app.require_subcommand(1);

    std::string spec_path, config_path, image_path, annotations_path, detections_path, truth_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    std::vector<int> grid_sizes{20, 40, 60, 80};
    bool overlays = false;

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic scene with ground truth");
    synth->add_option("--spec", spec_path, "Scene spec JSON, or {\"benchmark\": \"easy\"|\"textured\"}")->required();
    synth->add_option("--out", out_dir, "Output directory");
    synth->add_option("--seed", seed_override, "Override the spec seed");

    CLI::App* detect = app.add_subcommand("detect", "Run iterative target-window detection");
    detect->add_option("--config", config_path, "TrainConfig JSON (defaults used when omitted)");
    detect->add_option("--image", image_path, "Input image (PNG)");
    detect->add_option("--annotations", annotations_path, "ROI + seed window JSON")->required();
    detect->add_option("--out", out_dir, "Output directory");
    detect->add_option("--seed", seed_override, "Override the config seed");

    CLI::App* eval = app.add_subcommand("eval", "Grid-level evaluation of a detections CSV");
    eval->add_option("--detections", detections_path, "Detections CSV")->required();
    eval->add_option("--annotations", truth_path, "Truth JSON with ground-truth boxes")->required();
    eval->add_option("--grid-sizes", grid_sizes, "Grid sizes in pixels")->delimiter(',');
    eval->add_option("--out", out_dir, "Output directory");
    eval->add_option("--image", image_path, "Image used for extent and overlays");
    eval->add_flag("--overlays", overlays, "Render overlay PNGs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitSchemaError;
    }

    try {
        if (synth->parsed()) {
            return cmd_synth(spec_path, out_dir, seed_override);
        }
        if (detect->parsed()) {
            return cmd_detect(config_path, image_path, annotations_path, out_dir, seed_override);
        }
        if (eval->parsed()) {
            return cmd_eval(detections_path, truth_path, grid_sizes, out_dir, overlays, image_path);
        }
    } catch (const EmptyRoiError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomainError;
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomainError;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSchemaError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSchemaError;
    }
    return 0;
}
