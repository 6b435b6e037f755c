#pragma once

#include <string>
#include <vector>

#include "foi/formats.hpp"
#include "foi/geometry.hpp"
#include "foi/pipeline.hpp"
#include "foi/reference_store.hpp"

namespace foi::fixtures {

// Published frame-to-frame IoU and cosine scores of the two field cases.
inline const std::vector<double> kCraneIoU = {0.1568, 0.3261, 0.4375, 0.3632, 0.3420};
inline const std::vector<double> kCraneCosine = {0.7789, 0.7873, 0.8470, 0.7057, 0.8829};
inline const std::vector<double> kNetIoU = {0.4665, 0.0, 0.0, 0.2375, 0.4076};
inline const std::vector<double> kNetCosine = {0.7463, 0.8008, 0.9075, 0.8300, 0.8239};

// A six-frame trace rebuilt so that consecutive boxes and embeddings of the
// tracked object reproduce given IoU and cosine sequences.
//
// Boxes are equal-sized and slide along x: for target IoU r and width w the
// overlap is o = 2wr / (1 + r); r = 0 becomes a jump past the previous box.
// Embeddings form a chain e[k+1] = c[k] e[k] + sqrt(1 - c[k]^2) u[k] with each
// u[k] a fresh coordinate axis, so cos(e[k], e[k+1]) = c[k] and every older
// embedding is less similar than the latest one.
struct CaseFixture {
  std::string name;
  std::string label;
  std::vector<double> ious;
  std::vector<double> cosines;
  Zone zone;
  std::vector<FrameDetections> frames;
  std::vector<AnnotatedFrame> ground_truth;
  ReferenceStore store;

  CaseFixture() : store(1) {}
};

struct CaseSpec {
  std::string name;
  std::string label;
  std::vector<double> ious;
  std::vector<double> cosines;
  BoundingBox first_box;
  Zone zone;
  // Optional stationary second object (e.g. a tower crane outside the zone).
  std::string bystander_label;
  BoundingBox bystander_box;
  std::uint64_t frame_interval_ms = 33;
  std::size_t dim = kDefaultEmbeddingDim;
};

CaseFixture build_case(const CaseSpec& spec);

// Crane vehicle driving through a critical zone under a fixed camera.
CaseFixture crane_fixture();
// Dust-proof net entering a drone clearance zone; a tower crane stays outside.
CaseFixture net_fixture();

// Writes frames.jsonl, gt.jsonl, store.jsonl and track.json (a `track`
// --config file) into `dir`.
void write_case(const CaseFixture& fixture, const std::string& dir);

}  // namespace foi::fixtures
