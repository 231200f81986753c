#pragma once

#include <string>
#include <vector>

#include "tggm/evaluation.hpp"
#include "tggm/synthdata.hpp"
#include "tggm/trainer.hpp"

namespace tggm {

// The annotation file the detector consumes; scene truth uses the same
// schema plus ground-truth boxes.
struct AnnotationFile {
    std::string image;  // path, resolved by the caller
    RoiPolygon roi;
    Window seed_window;
    std::vector<Box> boxes;  // empty unless this is a truth file
};

AnnotationFile load_annotations(const std::string& path);
void save_annotations(const std::string& path, const AnnotationFile& annotations);

TrainConfig load_train_config(const std::string& path);
void save_train_config(const std::string& path, const TrainConfig& cfg);

SceneSpec load_scene_spec(const std::string& path);
void save_scene_spec(const std::string& path, const SceneSpec& spec);

// Returns true when the file is a benchmark shorthand like
// {"benchmark": "easy"}; `difficulty` receives the parsed value.
bool is_benchmark_spec(const std::string& path, Difficulty& difficulty);

void save_checkpoint(const std::string& path, const TggmModel& m, std::uint64_t seed);
struct Checkpoint {
    TggmModel model;
    std::uint64_t seed = 0;
};
Checkpoint load_checkpoint(const std::string& path);

void save_detections_csv(const std::string& path, const std::vector<DetectionRow>& rows);
std::vector<DetectionRow> load_detections_csv(const std::string& path);

void save_history(const std::string& path, const DetectionResult& result);

void save_grid_report(const std::string& path, const GridReport& report);

}  // namespace tggm
