#include "tggm/serialization.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "tggm/errors.hpp"

namespace tggm {

using nlohmann::json;

namespace {

constexpr const char* kCheckpointMagic = "tggm-checkpoint";
constexpr int kCheckpointVersion = 1;

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open " + path);
    }
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw SchemaError("cannot write " + path);
    }
    out << j.dump(2) << '\n';
}

json roi_to_json(const RoiPolygon& roi) {
    json arr = json::array();
    for (const auto& [x, y] : roi.vertices) {
        arr.push_back(json::array({x, y}));
    }
    return arr;
}

RoiPolygon roi_from_json(const json& arr) {
    RoiPolygon roi;
    for (const auto& v : arr) {
        roi.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    }
    return roi;
}

json window_to_json(const Window& w) { return json{{"x", w.x}, {"y", w.y}, {"size", w.size}}; }

Window window_from_json(const json& j) {
    return Window{j.at("x").get<int>(), j.at("y").get<int>(), j.at("size").get<int>()};
}

json box_to_json(const Box& b) {
    return json{{"x", b.x}, {"y", b.y}, {"width", b.width}, {"height", b.height}};
}

Box box_from_json(const json& j) {
    return Box{j.at("x").get<double>(), j.at("y").get<double>(), j.at("width").get<double>(),
               j.at("height").get<double>()};
}

json stack_to_json(const LayerStack& net) {
    json layers = json::array();
    for (const auto& layer : net.layers) {
        layers.push_back(json{{"rows", layer.weight.rows},
                              {"cols", layer.weight.cols},
                              {"weight", layer.weight.data},
                              {"bias", layer.bias},
                              {"activation", layer.activation == Activation::kRelu ? "relu" : "identity"}});
    }
    return json{{"layers", layers}};
}

LayerStack stack_from_json(const json& j) {
    LayerStack net;
    for (const auto& lj : j.at("layers")) {
        Layer layer;
        layer.weight = Matrix(lj.at("rows").get<int>(), lj.at("cols").get<int>());
        layer.weight.data = lj.at("weight").get<Vec>();
        layer.bias = lj.at("bias").get<Vec>();
        const std::string act = lj.at("activation").get<std::string>();
        if (act == "relu") {
            layer.activation = Activation::kRelu;
        } else if (act == "identity") {
            layer.activation = Activation::kIdentity;
        } else {
            throw SchemaError("unknown activation: " + act);
        }
        if (layer.weight.data.size() != static_cast<std::size_t>(layer.weight.rows) * layer.weight.cols ||
            layer.bias.size() != static_cast<std::size_t>(layer.weight.rows)) {
            throw SchemaError("layer shape does not match its data");
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

}  // namespace

AnnotationFile load_annotations(const std::string& path) {
    const json j = read_json(path);
    try {
        AnnotationFile a;
        a.image = j.value("image", "");
        a.roi = roi_from_json(j.at("roi"));
        a.seed_window = window_from_json(j.at("seed_window"));
        if (j.contains("boxes")) {
            for (const auto& bj : j.at("boxes")) {
                a.boxes.push_back(box_from_json(bj));
            }
        }
        if (a.roi.vertices.size() < 3) {
            throw SchemaError(path + ": roi needs at least 3 vertices");
        }
        return a;
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

void save_annotations(const std::string& path, const AnnotationFile& annotations) {
    json j{{"image", annotations.image},
           {"roi", roi_to_json(annotations.roi)},
           {"seed_window", window_to_json(annotations.seed_window)}};
    if (!annotations.boxes.empty()) {
        json boxes = json::array();
        for (const Box& b : annotations.boxes) {
            boxes.push_back(box_to_json(b));
        }
        j["boxes"] = boxes;
    }
    write_json(path, j);
}

TrainConfig load_train_config(const std::string& path) {
    const json j = read_json(path);
    try {
        TrainConfig cfg;
        cfg.epochs_per_iteration = j.value("epochs_per_iteration", cfg.epochs_per_iteration);
        cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
        cfg.minibatch_size = j.value("minibatch_size", cfg.minibatch_size);
        cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
        cfg.target_threshold = j.value("target_threshold", cfg.target_threshold);
        cfg.latent_dim = j.value("latent_dim", cfg.latent_dim);
        cfg.hidden_width = j.value("hidden_width", cfg.hidden_width);
        cfg.stride = j.value("stride", cfg.stride);
        cfg.labeled_loss_weight = j.value("labeled_loss_weight", cfg.labeled_loss_weight);
        cfg.seed = j.value("seed", cfg.seed);
        if (j.contains("augmentation")) {
            const json& aj = j.at("augmentation");
            if (aj.contains("rotations")) {
                cfg.augmentation.rotations = aj.at("rotations").get<std::vector<int>>();
            }
            if (aj.contains("translations")) {
                for (const auto& t : aj.at("translations")) {
                    cfg.augmentation.translations.emplace_back(t.at(0).get<int>(), t.at(1).get<int>());
                }
            }
        }
        validate_config(cfg);
        return cfg;
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

void save_train_config(const std::string& path, const TrainConfig& cfg) {
    json aug;
    if (!cfg.augmentation.rotations.empty()) {
        aug["rotations"] = cfg.augmentation.rotations;
    }
    if (!cfg.augmentation.translations.empty()) {
        json t = json::array();
        for (const auto& [dx, dy] : cfg.augmentation.translations) {
            t.push_back(json::array({dx, dy}));
        }
        aug["translations"] = t;
    }
    json j{{"epochs_per_iteration", cfg.epochs_per_iteration},
           {"max_iterations", cfg.max_iterations},
           {"minibatch_size", cfg.minibatch_size},
           {"learning_rate", cfg.learning_rate},
           {"target_threshold", cfg.target_threshold},
           {"latent_dim", cfg.latent_dim},
           {"hidden_width", cfg.hidden_width},
           {"stride", cfg.stride},
           {"labeled_loss_weight", cfg.labeled_loss_weight},
           {"seed", cfg.seed}};
    if (!aug.is_null()) {
        j["augmentation"] = aug;
    }
    write_json(path, j);
}

SceneSpec load_scene_spec(const std::string& path) {
    const json j = read_json(path);
    try {
        SceneSpec spec;
        spec.width = j.value("width", spec.width);
        spec.height = j.value("height", spec.height);
        if (j.contains("background")) {
            const json& bj = j.at("background");
            const std::string type = bj.value("type", "flat");
            if (type == "flat") {
                spec.background = BackgroundKind::kFlat;
            } else if (type == "stripes") {
                spec.background = BackgroundKind::kStripes;
                spec.stripe_amplitude = bj.value("amplitude", 0.1);
                spec.stripe_period = bj.value("period", 8);
            } else {
                throw SchemaError(path + ": unknown background type " + type);
            }
            spec.background_level = bj.value("level", spec.background_level);
        }
        if (j.contains("roi")) {
            spec.roi = roi_from_json(j.at("roi"));
        }
        if (j.contains("targets")) {
            const json& tj = j.at("targets");
            spec.target_count = tj.value("count", 0);
            if (tj.contains("size")) {
                spec.target_size_min = tj.at("size").at(0).get<int>();
                spec.target_size_max = tj.at("size").at(1).get<int>();
            }
            if (tj.contains("intensity")) {
                spec.target_intensity_min = tj.at("intensity").at(0).get<double>();
                spec.target_intensity_max = tj.at("intensity").at(1).get<double>();
            }
            spec.min_separation = tj.value("min_separation", spec.min_separation);
        }
        if (j.contains("distractors")) {
            const json& dj = j.at("distractors");
            spec.distractor_count = dj.value("count", 0);
            const std::string shape = dj.value("shape", "bar");
            if (shape == "bar") {
                spec.distractor_shape = DistractorShape::kBar;
            } else if (shape == "blob") {
                spec.distractor_shape = DistractorShape::kBlob;
            } else {
                throw SchemaError(path + ": unknown distractor shape " + shape);
            }
            if (dj.contains("intensity")) {
                spec.distractor_intensity_min = dj.at("intensity").at(0).get<double>();
                spec.distractor_intensity_max = dj.at("intensity").at(1).get<double>();
            }
        }
        spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
        spec.seed = j.value("seed", spec.seed);
        return spec;
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

void save_scene_spec(const std::string& path, const SceneSpec& spec) {
    json background{{"level", spec.background_level}};
    if (spec.background == BackgroundKind::kFlat) {
        background["type"] = "flat";
    } else {
        background["type"] = "stripes";
        background["amplitude"] = spec.stripe_amplitude;
        background["period"] = spec.stripe_period;
    }
    json j{{"width", spec.width},
           {"height", spec.height},
           {"background", background},
           {"roi", roi_to_json(spec.roi)},
           {"targets",
            json{{"count", spec.target_count},
                 {"size", json::array({spec.target_size_min, spec.target_size_max})},
                 {"intensity", json::array({spec.target_intensity_min, spec.target_intensity_max})},
                 {"min_separation", spec.min_separation}}},
           {"distractors",
            json{{"count", spec.distractor_count},
                 {"shape", spec.distractor_shape == DistractorShape::kBar ? "bar" : "blob"},
                 {"intensity", json::array({spec.distractor_intensity_min, spec.distractor_intensity_max})}}},
           {"noise_sigma", spec.noise_sigma},
           {"seed", spec.seed}};
    write_json(path, j);
}

bool is_benchmark_spec(const std::string& path, Difficulty& difficulty) {
    const json j = read_json(path);
    if (!j.contains("benchmark")) {
        return false;
    }
    const std::string name = j.at("benchmark").get<std::string>();
    if (name == "easy") {
        difficulty = Difficulty::kEasy;
    } else if (name == "textured") {
        difficulty = Difficulty::kTextured;
    } else {
        throw SchemaError(path + ": unknown benchmark " + name);
    }
    return true;
}

void save_checkpoint(const std::string& path, const TggmModel& m, std::uint64_t seed) {
    json j{{"magic", kCheckpointMagic},
           {"version", kCheckpointVersion},
           {"patch_dim", m.patch_dim},
           {"latent_dim", m.latent_dim},
           {"prior_y", m.prior_y},
           {"seed", seed},
           {"f_inf", stack_to_json(m.f_inf)},
           {"f_cls", stack_to_json(m.f_cls)},
           {"f_prior", stack_to_json(m.f_prior)},
           {"f_gen", stack_to_json(m.f_gen)}};
    write_json(path, j);
}

Checkpoint load_checkpoint(const std::string& path) {
    const json j = read_json(path);
    try {
        if (j.value("magic", "") != kCheckpointMagic) {
            throw SchemaError(path + ": not a checkpoint file");
        }
        if (j.at("version").get<int>() != kCheckpointVersion) {
            throw SchemaError(path + ": unsupported checkpoint version");
        }
        Checkpoint ckpt;
        ckpt.model.patch_dim = j.at("patch_dim").get<int>();
        ckpt.model.latent_dim = j.at("latent_dim").get<int>();
        ckpt.model.prior_y = j.at("prior_y").get<Vec>();
        ckpt.model.f_inf = stack_from_json(j.at("f_inf"));
        ckpt.model.f_cls = stack_from_json(j.at("f_cls"));
        ckpt.model.f_prior = stack_from_json(j.at("f_prior"));
        ckpt.model.f_gen = stack_from_json(j.at("f_gen"));
        ckpt.seed = j.at("seed").get<std::uint64_t>();
        validate_model(ckpt.model);
        return ckpt;
    } catch (const json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

void save_detections_csv(const std::string& path, const std::vector<DetectionRow>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw SchemaError("cannot write " + path);
    }
    out << "x,y,size,score,iteration_detected\n";
    out << std::fixed << std::setprecision(6);
    for (const DetectionRow& row : rows) {
        out << row.window.x << ',' << row.window.y << ',' << row.window.size << ',' << row.score << ','
            << row.iteration_detected << '\n';
    }
}

std::vector<DetectionRow> load_detections_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError(path + ": empty file");
    }
    if (line != "x,y,size,score,iteration_detected") {
        throw SchemaError(path + ": unexpected CSV header");
    }
    std::vector<DetectionRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream ss(line);
        DetectionRow row;
        char c1, c2, c3, c4;
        if (!(ss >> row.window.x >> c1 >> row.window.y >> c2 >> row.window.size >> c3 >> row.score >> c4 >>
              row.iteration_detected) ||
            c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',') {
            throw SchemaError(path + ": bad CSV row at line " + std::to_string(line_no));
        }
        rows.push_back(row);
    }
    return rows;
}

void save_history(const std::string& path, const DetectionResult& result) {
    json iters = json::array();
    for (const IterationRecord& rec : result.history) {
        iters.push_back(json{{"iteration", rec.iteration},
                             {"newly_detected", rec.newly_detected},
                             {"detected_total", rec.detected_total},
                             {"prior_y", rec.prior_y},
                             {"epoch_losses", rec.epoch_losses}});
    }
    json j{{"seed", result.seed},
           {"window_count", result.window_count},
           {"termination", result.termination},
           {"iterations", iters}};
    write_json(path, j);
}

void save_grid_report(const std::string& path, const GridReport& report) {
    auto mask_to_json = [](const GridMask& mask) {
        json rows = json::array();
        for (int r = 0; r < mask.rows; ++r) {
            json row = json::array();
            for (int c = 0; c < mask.cols; ++c) {
                row.push_back(mask.at(r, c) ? 1 : 0);
            }
            rows.push_back(row);
        }
        return rows;
    };
    json j{{"grid_size", report.grid_size}, {"precision", report.precision}, {"recall", report.recall},
           {"f1", report.f1},              {"tp", report.tp},               {"fp", report.fp},
           {"fn", report.fn},              {"rows", report.gt_mask.rows},   {"cols", report.gt_mask.cols},
           {"gt_mask", mask_to_json(report.gt_mask)}, {"pred_mask", mask_to_json(report.pred_mask)}};
    write_json(path, j);
}

}  // namespace tggm
