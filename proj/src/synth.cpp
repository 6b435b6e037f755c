#include "foi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "foi/error.hpp"
#include "json_support.hpp"

namespace foi::synth {

namespace {

constexpr std::uint64_t kPrototypeStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kReferenceStream = 0xbf58476d1ce4e5b9ULL;

Embedding noisy_unit(const std::vector<double>& prototype, double sigma, std::mt19937_64& rng) {
  const std::size_t dim = prototype.size();
  std::vector<double> v = prototype;
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma / std::sqrt(static_cast<double>(dim)));
    for (double& x : v) x += noise(rng);
  }
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / n);
  return Embedding(std::move(out));
}

BoundingBox clamp_to_canvas(const BoundingBox& b, double w, double h, bool& clamped) {
  double dx = 0.0, dy = 0.0;
  if (b.x_min < 0.0) dx = -b.x_min;
  if (b.x_max > w) dx = w - b.x_max;
  if (b.y_min < 0.0) dy = -b.y_min;
  if (b.y_max > h) dy = h - b.y_max;
  clamped = dx != 0.0 || dy != 0.0;
  return b.translated(dx, dy);
}

}  // namespace

void ScenarioConfig::validate() const {
  if (dim == 0) throw InputError("scenario dim must be positive");
  if (n_frames == 0) throw InputError("scenario needs at least one frame");
  if (!(noise_sigma >= 0.0) || !(ref_sigma >= 0.0)) throw InputError("noise sigma must be >= 0");
  if (!(confidence >= 0.0 && confidence <= 1.0)) throw InputError("confidence must lie in [0, 1]");
  if (!(image_width > 0.0 && image_height > 0.0)) throw InputError("image size must be positive");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    if (o.label.empty()) throw InputError("object " + std::to_string(i) + " has no label");
    if (!o.start.valid()) throw InputError("object " + std::to_string(i) + " has an invalid box");
    if (o.start.width() > image_width || o.start.height() > image_height) {
      throw InputError("object " + std::to_string(i) + " is larger than the canvas");
    }
  }
  for (const auto& occ : occlusions) {
    if (occ.object >= objects.size()) throw InputError("occlusion refers to a missing object");
    if (occ.first_frame > occ.last_frame) throw InputError("occlusion window is reversed");
  }
}

std::vector<std::vector<double>> orthonormal_prototypes(std::size_t count, std::size_t dim,
                                                        std::uint64_t seed) {
  if (count > dim) throw ContractViolation("cannot build more orthogonal prototypes than dimensions");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> out;
  while (out.size() < count) {
    std::vector<double> v(dim);
    for (double& x : v) x = gauss(rng);
    // Two Gram-Schmidt passes keep the basis orthogonal to rounding.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : out) {
        double d = 0.0;
        for (std::size_t i = 0; i < dim; ++i) d += v[i] * u[i];
        for (std::size_t i = 0; i < dim; ++i) v[i] -= d * u[i];
      }
    }
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n < 1e-6) continue;
    for (double& x : v) x /= n;
    out.push_back(std::move(v));
  }
  return out;
}

Scenario generate(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario s;
  s.config = cfg;

  std::vector<std::string> classes = cfg.classes;
  if (classes.empty()) classes.assign(kFineClasses.begin(), kFineClasses.end());
  for (const auto& o : cfg.objects) {
    if (std::find(classes.begin(), classes.end(), o.label) == classes.end()) classes.push_back(o.label);
  }
  const auto prototypes = orthonormal_prototypes(classes.size(), cfg.dim, cfg.seed ^ kPrototypeStream);
  std::map<std::string, std::size_t> class_pos;
  for (std::size_t i = 0; i < classes.size(); ++i) class_pos[classes[i]] = i;

  // Reference store: exact prototype plus jittered references per class.
  s.store = ReferenceStore(cfg.dim);
  std::mt19937_64 ref_rng(cfg.seed ^ kReferenceStream);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    s.store.insert(noisy_unit(prototypes[c], 0.0, ref_rng), classes[c],
                   "synthetic/" + classes[c] + "/prototype");
    for (std::size_t r = 0; r < cfg.refs_per_class; ++r) {
      s.store.insert(noisy_unit(prototypes[c], cfg.ref_sigma, ref_rng), classes[c],
                     "synthetic/" + classes[c] + "/ref_" + std::to_string(r));
    }
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::optional<BoundingBox>> prev(cfg.objects.size());
  std::vector<bool> warned(cfg.objects.size(), false);
  double cam_dx = 0.0, cam_dy = 0.0;
  for (std::uint64_t f = 0; f < cfg.n_frames; ++f) {
    bool jumped = false;
    for (const auto& j : cfg.camera_jumps) {
      if (j.frame == f) {
        cam_dx += j.dx;
        cam_dy += j.dy;
        jumped = true;
      }
    }

    FrameDetections frame;
    frame.frame_index = f;
    frame.timestamp_ms = f * cfg.frame_interval_ms;
    AnnotatedFrame gt;
    gt.frame_index = frame.frame_index;
    gt.timestamp_ms = frame.timestamp_ms;

    for (std::size_t o = 0; o < cfg.objects.size(); ++o) {
      const ObjectSpec& spec = cfg.objects[o];
      const double t = static_cast<double>(f);
      bool clamped = false;
      const BoundingBox box = clamp_to_canvas(
          spec.start.translated(spec.vx * t + cam_dx, spec.vy * t + cam_dy), cfg.image_width,
          cfg.image_height, clamped);
      if (clamped && !warned[o]) {
        s.warnings.push_back("object " + std::to_string(o) + " left the canvas at frame " +
                             std::to_string(f) + "; clamped to the border");
        warned[o] = true;
      }

      // Noise is drawn for every object every frame so occlusions do not
      // shift the random stream of other objects.
      Embedding emb = noisy_unit(prototypes[class_pos.at(spec.label)], cfg.noise_sigma, rng);

      const bool hidden = std::any_of(cfg.occlusions.begin(), cfg.occlusions.end(), [&](const auto& w) {
        return w.object == o && w.first_frame <= f && f <= w.last_frame;
      });
      if (hidden) continue;

      if (prev[o]) s.diagnostics.push_back({f, o + 1, iou(*prev[o], box), jumped});
      prev[o] = box;

      AnnotatedDetection a;
      a.box = box;
      a.confidence = cfg.confidence;
      a.gt_label = spec.label;
      a.gt_identity = o + 1;
      a.embedding = std::vector<float>(emb.values().begin(), emb.values().end());
      gt.detections.push_back(std::move(a));

      frame.detections.push_back({box, std::move(emb), cfg.confidence, std::nullopt});
    }
    s.frames.push_back(std::move(frame));
    s.ground_truth.push_back(std::move(gt));
  }
  return s;
}

ScenarioConfig crossing_scenario(std::uint64_t seed, std::size_t n_frames, double noise_sigma) {
  std::mt19937_64 rng(seed * 2654435761ULL + 17);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.n_frames = n_frames;
  cfg.noise_sigma = noise_sigma;
  cfg.image_width = 1280.0;
  cfg.image_height = 720.0;

  std::vector<std::string> labels(kFineClasses.begin(), kFineClasses.end());
  std::shuffle(labels.begin(), labels.end(), rng);

  // Lanes 18 px apart with 60 px tall boxes: neighbours overlap heavily when
  // they pass, but a box always overlaps its own previous position more.
  const double w = 80.0, h = 60.0;
  const double lane_y[3] = {342.0, 360.0, 378.0};
  const double start_x[3] = {200.0 + 20.0 * jitter(rng), 1000.0 + 20.0 * jitter(rng),
                             360.0 + 20.0 * jitter(rng)};
  const double speed[3] = {5.0 + 0.5 * jitter(rng), -(5.0 + 0.5 * jitter(rng)), 2.5 + 0.5 * jitter(rng)};
  for (int i = 0; i < 3; ++i) {
    const double cx = start_x[i], cy = lane_y[i];
    cfg.objects.push_back({labels[static_cast<std::size_t>(i)],
                           {cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2}, speed[i], 0.0});
  }

  const auto at = [&](double frac) { return static_cast<std::uint64_t>(frac * static_cast<double>(n_frames)); };
  cfg.occlusions.push_back({static_cast<std::size_t>(seed % 3), at(0.55), at(0.55) + 7});
  cfg.camera_jumps.push_back({at(0.33), 2.5 * w, 2.5 * h});
  cfg.camera_jumps.push_back({at(0.75), -2.5 * w, -2.5 * h});
  return cfg;
}

ReferenceStore random_store(std::size_t size, std::size_t dim, std::uint64_t seed) {
  ReferenceStore store(dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  std::vector<float> v(dim);
  for (std::size_t i = 0; i < size; ++i) {
    for (float& x : v) x = gauss(rng);
    store.insert(Embedding(v), std::string(kFineClasses[i % kFineClasses.size()]),
                 "random/" + std::to_string(i));
  }
  return store;
}

// ---------------------------------------------------------------- config I/O

namespace {

using detail::Json;

BoundingBox box_from(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw InputError("scenario box must be [x_min,y_min,x_max,y_max]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

template <class T>
T value_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed scenario JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("scenario must be a JSON object");
  try {
    ScenarioConfig cfg;
    if (auto p = j.find("preset"); p != j.end()) {
      if (p->get<std::string>() != "crossing") throw InputError("unknown scenario preset");
      cfg = crossing_scenario(value_or<std::uint64_t>(j, "seed", 1),
                              value_or<std::size_t>(j, "n_frames", 120),
                              value_or<double>(j, "noise_sigma", 0.05));
    }
    cfg.n_frames = value_or(j, "n_frames", cfg.n_frames);
    cfg.image_width = value_or(j, "image_width", cfg.image_width);
    cfg.image_height = value_or(j, "image_height", cfg.image_height);
    cfg.dim = value_or(j, "dim", cfg.dim);
    cfg.noise_sigma = value_or(j, "noise_sigma", cfg.noise_sigma);
    cfg.refs_per_class = value_or(j, "refs_per_class", cfg.refs_per_class);
    cfg.ref_sigma = value_or(j, "ref_sigma", cfg.ref_sigma);
    cfg.confidence = value_or(j, "confidence", cfg.confidence);
    cfg.frame_interval_ms = value_or(j, "frame_interval_ms", cfg.frame_interval_ms);
    cfg.seed = value_or(j, "seed", cfg.seed);
    if (auto c = j.find("classes"); c != j.end()) cfg.classes = c->get<std::vector<std::string>>();
    if (auto objs = j.find("objects"); objs != j.end()) {
      cfg.objects.clear();
      for (const auto& o : *objs) {
        cfg.objects.push_back({o.at("label").get<std::string>(), box_from(o.at("start")),
                               value_or(o, "vx", 0.0), value_or(o, "vy", 0.0)});
      }
    }
    if (auto occ = j.find("occlusions"); occ != j.end()) {
      cfg.occlusions.clear();
      for (const auto& o : *occ) {
        cfg.occlusions.push_back({o.at("object").get<std::size_t>(), o.at("first_frame").get<std::uint64_t>(),
                                  o.at("last_frame").get<std::uint64_t>()});
      }
    }
    if (auto jumps = j.find("camera_jumps"); jumps != j.end()) {
      cfg.camera_jumps.clear();
      for (const auto& o : *jumps) {
        cfg.camera_jumps.push_back({o.at("frame").get<std::uint64_t>(), value_or(o, "dx", 0.0),
                                    value_or(o, "dy", 0.0)});
      }
    }
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid scenario field: ") + e.what());
  }
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  detail::OrderedJson j;
  j["seed"] = cfg.seed;
  j["n_frames"] = cfg.n_frames;
  j["image_width"] = cfg.image_width;
  j["image_height"] = cfg.image_height;
  j["dim"] = cfg.dim;
  j["noise_sigma"] = cfg.noise_sigma;
  j["refs_per_class"] = cfg.refs_per_class;
  j["ref_sigma"] = cfg.ref_sigma;
  j["confidence"] = cfg.confidence;
  j["frame_interval_ms"] = cfg.frame_interval_ms;
  j["classes"] = cfg.classes;
  auto objs = detail::OrderedJson::array();
  for (const auto& o : cfg.objects) {
    objs.push_back({{"label", o.label},
                    {"start", {o.start.x_min, o.start.y_min, o.start.x_max, o.start.y_max}},
                    {"vx", o.vx},
                    {"vy", o.vy}});
  }
  j["objects"] = std::move(objs);
  auto occ = detail::OrderedJson::array();
  for (const auto& o : cfg.occlusions) {
    occ.push_back({{"object", o.object}, {"first_frame", o.first_frame}, {"last_frame", o.last_frame}});
  }
  j["occlusions"] = std::move(occ);
  auto jumps = detail::OrderedJson::array();
  for (const auto& o : cfg.camera_jumps) jumps.push_back({{"frame", o.frame}, {"dx", o.dx}, {"dy", o.dy}});
  j["camera_jumps"] = std::move(jumps);
  return j.dump(2);
}

std::string format_diagnostic(const IouDiagnostic& d) {
  detail::OrderedJson j;
  j["frame_index"] = d.frame_index;
  j["identity"] = d.identity;
  j["iou_prev"] = d.iou_prev;
  j["camera_jump"] = d.camera_jump;
  return j.dump();
}

void write_scenario(const Scenario& s, const OutputPaths& paths) {
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InputError("cannot open '" + p.string() + "' for writing");
    return out;
  };
  {
    auto out = open(paths.frames);
    write_frames(s.frames, out);
  }
  {
    auto out = open(paths.ground_truth);
    write_annotated(s.ground_truth, out);
  }
  s.store.save_snapshot(paths.store);
  if (paths.diagnostics) {
    auto out = open(*paths.diagnostics);
    for (const auto& d : s.diagnostics) out << format_diagnostic(d) << '\n';
  }
}

}  // namespace foi::synth
