#include "foi/fixtures.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "foi/error.hpp"
#include "json_support.hpp"

namespace foi::fixtures {

namespace {

constexpr double kRefOffset = 0.3;
constexpr double kConfidence = 0.9;

std::vector<double> axis(std::size_t dim, std::size_t i) {
  std::vector<double> v(dim, 0.0);
  v.at(i) = 1.0;
  return v;
}

Embedding to_embedding(const std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / n);
  return Embedding(std::move(out));
}

}  // namespace

CaseFixture build_case(const CaseSpec& spec) {
  if (spec.ious.size() != spec.cosines.size()) throw ContractViolation("IoU and cosine traces differ in length");
  const std::size_t n_frames = spec.ious.size() + 1;
  const std::size_t dim = spec.dim;
  std::size_t next_axis = 0;

  CaseFixture fx;
  fx.name = spec.name;
  fx.label = spec.label;
  fx.ious = spec.ious;
  fx.cosines = spec.cosines;
  fx.zone = spec.zone;

  // Tracked object: box slide and embedding chain.
  std::vector<BoundingBox> boxes{spec.first_box};
  const double w = spec.first_box.width();
  for (double r : spec.ious) {
    const double shift = r > 0.0 ? w - 2.0 * w * r / (1.0 + r) : 1.2 * w;
    boxes.push_back(boxes.back().translated(shift, 0.0));
  }
  std::vector<std::vector<double>> chain{axis(dim, next_axis++)};
  for (double c : spec.cosines) {
    const std::vector<double> u = axis(dim, next_axis++);
    const double s = std::sqrt(1.0 - c * c);
    std::vector<double> e(dim);
    for (std::size_t i = 0; i < dim; ++i) e[i] = c * chain.back()[i] + s * u[i];
    chain.push_back(std::move(e));
  }

  // References for the tracked class: one per frame, each offset along its
  // own axis so every frame matches its own reference best.
  fx.store = ReferenceStore(dim);
  for (std::size_t k = 0; k < n_frames; ++k) {
    std::vector<double> r = chain[k];
    r[next_axis++] += kRefOffset;
    fx.store.insert(to_embedding(r), spec.label,
                    "fixtures/" + spec.name + "/ref_" + std::to_string(k + 1) + ".png");
  }

  // Two references for every other fine class, each class on its own axis.
  std::vector<double> bystander_embedding;
  for (std::string_view cls : kFineClasses) {
    if (cls == spec.label) continue;
    const std::size_t base = next_axis++;
    const std::size_t side = next_axis++;
    for (double sign : {1.0, -1.0}) {
      std::vector<double> r = axis(dim, base);
      r[side] = sign * kRefOffset;
      fx.store.insert(to_embedding(r), std::string(cls),
                      "fixtures/" + spec.name + "/" + std::string(cls) + (sign > 0 ? "_a.png" : "_b.png"));
    }
    if (cls == spec.bystander_label) bystander_embedding = axis(dim, base);
  }
  if (!spec.bystander_label.empty() && bystander_embedding.empty()) {
    throw ContractViolation("bystander label must be a fine class other than the tracked one");
  }

  for (std::size_t k = 0; k < n_frames; ++k) {
    FrameDetections frame;
    frame.frame_index = k + 1;
    frame.timestamp_ms = k * spec.frame_interval_ms;
    AnnotatedFrame gt;
    gt.frame_index = frame.frame_index;
    gt.timestamp_ms = frame.timestamp_ms;

    auto add = [&](const BoundingBox& box, const std::vector<double>& e, const std::string& label,
                   std::uint64_t identity) {
      Embedding emb = to_embedding(e);
      AnnotatedDetection a;
      a.box = box;
      a.confidence = kConfidence;
      a.gt_label = label;
      a.gt_identity = identity;
      a.embedding = std::vector<float>(emb.values().begin(), emb.values().end());
      gt.detections.push_back(std::move(a));
      frame.detections.push_back({box, std::move(emb), kConfidence, std::nullopt});
    };
    add(boxes[k], chain[k], spec.label, 1);
    if (!spec.bystander_label.empty()) add(spec.bystander_box, bystander_embedding, spec.bystander_label, 2);

    fx.frames.push_back(std::move(frame));
    fx.ground_truth.push_back(std::move(gt));
  }
  return fx;
}

CaseFixture crane_fixture() {
  CaseSpec spec;
  spec.name = "crane";
  spec.label = "crane vehicle";
  spec.ious = kCraneIoU;
  spec.cosines = kCraneCosine;
  spec.first_box = {100.0, 440.0, 300.0, 560.0};
  spec.zone = {{600.0, 300.0, 1000.0, 700.0}, "critical"};
  spec.frame_interval_ms = 33;
  return build_case(spec);
}

CaseFixture net_fixture() {
  CaseSpec spec;
  spec.name = "net";
  spec.label = "dust-proof net";
  spec.ious = kNetIoU;
  spec.cosines = kNetCosine;
  spec.first_box = {100.0, 360.0, 200.0, 440.0};
  spec.zone = {{400.0, 200.0, 800.0, 600.0}, "clearance"};
  spec.bystander_label = "tower crane";
  spec.bystander_box = {1000.0, 80.0, 1200.0, 320.0};
  spec.frame_interval_ms = 40;
  return build_case(spec);
}

void write_case(const CaseFixture& fx, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InputError("cannot open '" + p.string() + "' for writing");
    return out;
  };
  {
    auto out = open(root / "frames.jsonl");
    write_frames(fx.frames, out);
  }
  {
    auto out = open(root / "gt.jsonl");
    write_annotated(fx.ground_truth, out);
  }
  fx.store.save_snapshot(root / "store.jsonl");
  {
    const auto& b = fx.zone.box;
    detail::OrderedJson cfg;
    cfg["frames"] = "frames.jsonl";
    cfg["store"] = "store.jsonl";
    cfg["zone"] = {fx.zone.name + "=" + detail::Json(b.x_min).dump() + "," + detail::Json(b.y_min).dump() +
                   "," + detail::Json(b.x_max).dump() + "," + detail::Json(b.y_max).dump()};
    auto out = open(root / "track.json");
    out << cfg.dump(2) << '\n';
  }
}

}  // namespace foi::fixtures
