#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "foi/formats.hpp"
#include "foi/geometry.hpp"
#include "foi/pipeline.hpp"
#include "foi/reference_store.hpp"

namespace foi::synth {

struct ObjectSpec {
  std::string label;
  BoundingBox start;
  double vx = 0.0;  // pixels per frame
  double vy = 0.0;
};

// Detections of `object` are dropped for frames [first_frame, last_frame].
struct OcclusionWindow {
  std::size_t object = 0;
  std::uint64_t first_frame = 0;
  std::uint64_t last_frame = 0;
};

// From `frame` on, every box is displaced by (dx, dy) on top of earlier jumps.
struct CameraJump {
  std::uint64_t frame = 0;
  double dx = 0.0;
  double dy = 0.0;
};

struct ScenarioConfig {
  std::size_t n_frames = 120;
  double image_width = 1280.0;
  double image_height = 720.0;
  std::size_t dim = kDefaultEmbeddingDim;
  std::vector<ObjectSpec> objects;
  // Isotropic gaussian noise with expected norm `noise_sigma` is added to the
  // unit class prototype before renormalising.
  double noise_sigma = 0.05;
  std::vector<OcclusionWindow> occlusions;
  std::vector<CameraJump> camera_jumps;
  // Classes that get prototypes in the reference store. Empty means the ten
  // fine classes.
  std::vector<std::string> classes;
  std::size_t refs_per_class = 3;
  double ref_sigma = 0.05;
  double confidence = 0.9;
  std::uint64_t frame_interval_ms = 33;
  std::uint64_t seed = 1;

  void validate() const;
};

struct IouDiagnostic {
  std::uint64_t frame_index = 0;
  std::uint64_t identity = 0;
  double iou_prev = 0.0;  // own box in the previous frame
  bool camera_jump = false;
};

struct Scenario {
  ScenarioConfig config;
  std::vector<FrameDetections> frames;
  std::vector<AnnotatedFrame> ground_truth;
  ReferenceStore store;
  std::vector<IouDiagnostic> diagnostics;
  std::vector<std::string> warnings;

  Scenario() : store(1) {}
};

// Identities in the ground truth are object position + 1.
Scenario generate(const ScenarioConfig& cfg);

// Three objects of distinct classes moving through near-overlapping lanes,
// crossing each other, with one occlusion and two camera jumps.
ScenarioConfig crossing_scenario(std::uint64_t seed, std::size_t n_frames = 120,
                                 double noise_sigma = 0.05);

// Random unit vectors, orthogonalised so distinct rows have zero cosine.
std::vector<std::vector<double>> orthonormal_prototypes(std::size_t count, std::size_t dim,
                                                        std::uint64_t seed);

// Uniform random directions, labels cycling through the fine classes.
ReferenceStore random_store(std::size_t size, std::size_t dim, std::uint64_t seed);

ScenarioConfig scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& cfg);

struct OutputPaths {
  std::filesystem::path frames;
  std::filesystem::path ground_truth;
  std::filesystem::path store;
  std::optional<std::filesystem::path> diagnostics;
};

void write_scenario(const Scenario& s, const OutputPaths& paths);
std::string format_diagnostic(const IouDiagnostic& d);

}  // namespace foi::synth
