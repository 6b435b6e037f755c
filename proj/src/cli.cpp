#include "foi/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "foi/bench.hpp"
#include "foi/error.hpp"
#include "foi/evalkit.hpp"
#include "foi/formats.hpp"
#include "foi/pipeline.hpp"
#include "foi/reference_store.hpp"
#include "foi/synth.hpp"
#include "json_support.hpp"

namespace foi::cli {

namespace fs = std::filesystem;
using detail::Json;
using detail::OrderedJson;

namespace {

const std::set<std::string> kPathKeys = {
    "frames", "store",     "out",       "reports",    "assignments",     "diagnostics", "timings",
    "records", "base",     "embedding", "pred",       "gt",              "scenario",    "frames-out",
    "gt-out", "store-out", "diagnostics-out", "config-out"};

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

std::string scalar_token(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// ---------------------------------------------------------------- streams

class Input {
 public:
  explicit Input(const std::string& path) {
    if (path == "-") {
      stream_ = &std::cin;
    } else {
      file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
      if (!*file_) throw InputError("cannot open '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::istream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
};

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path == "-" || path.empty()) {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw InputError("cannot open '" + path + "' for writing");
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

std::string slurp(const std::string& path) {
  Input in(path);
  std::stringstream ss;
  ss << in.get().rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- build-store

struct BuildStoreArgs {
  std::string records;
  std::string base;
  std::string out = "-";
  std::size_t dim = 0;
  std::string taxonomy;
};

int cmd_build_store(const BuildStoreArgs& a, std::ostream& out) {
  std::optional<ReferenceStore> store;
  if (!a.base.empty()) {
    store.emplace(ReferenceStore::load_snapshot(fs::path(a.base),
                                                a.dim ? std::optional<std::size_t>(a.dim) : std::nullopt));
  }
  if (!a.taxonomy.empty() && store) store->set_taxonomy(ClassTaxonomy::preset(a.taxonomy));

  std::size_t added = 0;
  if (!a.records.empty()) {
    Input in(a.records);
    std::string text;
    std::size_t line = 0;
    while (std::getline(in.get(), text)) {
      ++line;
      if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto rec = detail::parse_line<detail::FloatJson>(text, line);
      const auto& emb_json = detail::require_field(rec, "embedding", line);
      if (!store) {
        const std::size_t dim = a.dim ? a.dim : emb_json.size();
        store.emplace(dim == 0 ? kDefaultEmbeddingDim : dim);
        if (!a.taxonomy.empty()) store->set_taxonomy(ClassTaxonomy::preset(a.taxonomy));
      }
      Embedding e = detail::parse_embedding(emb_json, store->dim(), line);
      std::string label = detail::require_string(rec, "label", line);
      std::string path = detail::require_string(rec, "source_path", line);
      if (label.empty()) throw InputError(detail::where(line) + ": label is empty");
      try {
        if (rec.contains("index")) {
          store->insert({detail::require_uint(rec, "index", line), std::move(e), std::move(path), std::move(label)});
        } else {
          store->insert(std::move(e), std::move(label), std::move(path));
        }
      } catch (const ContractViolation& err) {
        throw InputError(detail::where(line) + ": " + err.what());
      }
      ++added;
    }
  }
  if (!store) store.emplace(a.dim ? a.dim : kDefaultEmbeddingDim);

  {
    Output o(a.out, out);
    store->save_snapshot(o.get());
  }
  if (a.out != "-") {
    OrderedJson summary;
    summary["count"] = store->size();
    summary["added"] = added;
    summary["dim"] = store->dim();
    summary["labels"] = store->labels();
    if (!a.taxonomy.empty()) summary["unmapped_labels"] = store->unmapped_labels();
    out << summary.dump() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- query

struct QueryArgs {
  std::string store;
  std::string embedding;
  std::size_t k = 5;
};

int cmd_query(const QueryArgs& a, std::ostream& out) {
  const ReferenceStore store = ReferenceStore::load_snapshot(fs::path(a.store));
  const auto j = detail::parse_line<detail::FloatJson>(slurp(a.embedding), 1);
  const auto& arr = j.is_object() ? detail::require_field(j, "embedding", 1) : j;
  const Embedding query = detail::parse_embedding(arr, store.dim(), 1);
  OrderedJson result = OrderedJson::array();
  for (const Match& m : store.nearest(query, a.k)) {
    const auto rec = store.find(m.record_index);
    result.push_back({{"record_index", m.record_index},
                      {"label", m.label},
                      {"similarity", m.similarity},
                      {"source_path", rec ? rec->source_path : ""}});
  }
  out << result.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- track

struct TrackArgs {
  std::string frames;
  std::string store;
  std::vector<std::string> zones;
  std::string out = "-";
  std::string reports;
  std::string assignments;
  std::string diagnostics;
  std::string timings;
  TrackerConfig tracker;
  std::size_t window = kDefaultApproachWindow;
  std::string taxonomy = "functional";
  std::size_t dim = 0;
};

int cmd_track(const TrackArgs& a, std::ostream& out) {
  const ReferenceStore store = ReferenceStore::load_snapshot(
      fs::path(a.store), a.dim ? std::optional<std::size_t>(a.dim) : std::nullopt);

  PipelineConfig cfg;
  cfg.tracker = a.tracker;
  cfg.approach_window = a.window;
  if (!a.taxonomy.empty() && a.taxonomy != "none") cfg.taxonomy = ClassTaxonomy::preset(a.taxonomy);
  for (std::size_t i = 0; i < a.zones.size(); ++i) {
    cfg.zones.push_back(parse_zone(a.zones[i], "zone" + std::to_string(i)));
  }
  Session session(store, cfg);

  Input frames_in(a.frames);
  Output events_out(a.out, out);
  std::optional<Output> diag_out, timing_out;
  if (!a.diagnostics.empty()) diag_out.emplace(a.diagnostics, out);
  if (!a.timings.empty()) timing_out.emplace(a.timings, out);

  std::vector<AnnotatedFrame> annotated;
  FrameReader reader(frames_in.get(), store.dim());
  while (true) {
    const auto p0 = std::chrono::steady_clock::now();
    auto frame = reader.next();
    const auto p1 = std::chrono::steady_clock::now();
    if (!frame) break;
    FrameOutput fo = session.process_frame(*frame);
    fo.timings.parse_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(p1 - p0).count();
    fo.timings.total_ns += fo.timings.parse_ns;

    write_events(fo.alerts, events_out.get());

    if (diag_out) {
      for (const Assignment& as : fo.result.assignments) {
        OrderedJson d;
        d["frame_index"] = frame->frame_index;
        d["track_id"] = as.track_id;
        d["detection"] = as.detection;
        d["mode"] = to_string(as.mode);
        d["iou"] = as.iou;
        d["similarity"] = as.similarity;
        d["last_similarity"] = as.last_similarity;
        diag_out->get() << d.dump() << '\n';
      }
      for (const NewTrack& n : fo.result.new_tracks) {
        OrderedJson d;
        d["frame_index"] = frame->frame_index;
        d["track_id"] = n.track_id;
        d["detection"] = n.detection;
        d["mode"] = "New";
        diag_out->get() << d.dump() << '\n';
      }
    }
    if (timing_out) {
      OrderedJson t;
      t["frame_index"] = frame->frame_index;
      t["parse_ns"] = fo.timings.parse_ns;
      t["associate_ns"] = fo.timings.associate_ns;
      t["classify_ns"] = fo.timings.classify_ns;
      t["alert_ns"] = fo.timings.alert_ns;
      t["total_ns"] = fo.timings.total_ns;
      timing_out->get() << t.dump() << '\n';
    }

    if (!a.assignments.empty()) {
      AnnotatedFrame af;
      af.frame_index = frame->frame_index;
      af.timestamp_ms = frame->timestamp_ms;
      for (const DetectionLabel& dl : fo.labels) {
        const Detection& d = frame->detections[dl.detection];
        AnnotatedDetection ad;
        ad.box = d.box;
        ad.confidence = d.confidence;
        ad.agg_class = d.agg_class;
        ad.track_id = dl.track_id;
        af.detections.push_back(std::move(ad));
      }
      annotated.push_back(std::move(af));
    }
  }

  const auto reports = session.finalize();
  if (!a.reports.empty()) {
    Output o(a.reports, out);
    write_reports(reports, o.get());
  }
  if (!a.assignments.empty()) {
    std::map<std::uint64_t, std::string> final_label;
    for (const auto& r : reports) final_label[r.track_id] = r.final_label;
    for (auto& af : annotated) {
      for (auto& d : af.detections) d.label = final_label.at(*d.track_id);
    }
    Output o(a.assignments, out);
    write_annotated(annotated, o.get());
  }
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string scenario;
  std::string preset = "crossing";
  std::uint64_t seed = 1;
  std::size_t n_frames = 120;
  double sigma = 0.05;
  std::size_t dim = kDefaultEmbeddingDim;
  std::string frames_out;
  std::string gt_out;
  std::string store_out;
  std::string diagnostics_out;
  std::string config_out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  synth::ScenarioConfig cfg;
  if (!a.scenario.empty()) {
    cfg = synth::scenario_from_json(slurp(a.scenario));
  } else {
    if (a.preset != "crossing") throw InputError("unknown preset '" + a.preset + "'");
    cfg = synth::crossing_scenario(a.seed, a.n_frames, a.sigma);
    cfg.dim = a.dim;
  }
  const synth::Scenario s = synth::generate(cfg);
  for (const auto& w : s.warnings) err << "warning: " << w << '\n';

  synth::OutputPaths paths{a.frames_out, a.gt_out, a.store_out, std::nullopt};
  if (!a.diagnostics_out.empty()) paths.diagnostics = a.diagnostics_out;
  synth::write_scenario(s, paths);
  if (!a.config_out.empty()) {
    Output o(a.config_out, out);
    o.get() << synth::scenario_to_json(cfg) << '\n';
  }
  OrderedJson summary;
  summary["frames"] = s.frames.size();
  summary["objects"] = cfg.objects.size();
  summary["store_size"] = s.store.size();
  summary["warnings"] = s.warnings.size();
  out << summary.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string pred;
  std::string gt;
  double iou = 0.5;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  std::vector<AnnotatedFrame> preds, gts;
  {
    Input in(a.pred);
    preds = read_annotated(in.get());
  }
  {
    Input in(a.gt);
    gts = read_annotated(in.get());
  }
  std::map<std::uint64_t, const AnnotatedFrame*> pred_by_frame;
  for (const auto& f : preds) pred_by_frame[f.frame_index] = &f;
  std::set<std::uint64_t> gt_frames;
  for (const auto& f : gts) gt_frames.insert(f.frame_index);
  for (const auto& f : preds) {
    if (!gt_frames.contains(f.frame_index)) {
      throw InputError("prediction frame " + std::to_string(f.frame_index) + " has no ground truth");
    }
  }

  std::vector<eval::ImageDetections> images;
  std::vector<std::vector<std::uint64_t>> identities;
  std::vector<std::vector<std::optional<std::uint64_t>>> bound;
  bool have_identity = true;
  for (const auto& g : gts) {
    eval::ImageDetections img;
    std::vector<eval::GroundTruthBox> any_label_gt;
    for (const auto& d : g.detections) {
      if (!d.gt_label) throw InputError("frame " + std::to_string(g.frame_index) + ": detection without gt_label");
      img.gts.push_back({d.box, *d.gt_label});
      any_label_gt.push_back({d.box, ""});
      have_identity = have_identity && d.gt_identity.has_value();
    }
    std::vector<eval::ScoredBox> any_label_pred;
    std::vector<std::optional<std::uint64_t>> pred_tracks;
    if (auto it = pred_by_frame.find(g.frame_index); it != pred_by_frame.end()) {
      for (const auto& d : it->second->detections) {
        if (!d.label) throw InputError("frame " + std::to_string(g.frame_index) + ": prediction without label");
        img.preds.push_back({d.box, d.confidence, *d.label});
        any_label_pred.push_back({d.box, d.confidence, ""});
        pred_tracks.push_back(d.track_id);
      }
    }
    if (have_identity) {
      // Identity binding ignores class so a wrong label does not hide a switch.
      const auto m = eval::match_detections(any_label_pred, any_label_gt, a.iou);
      std::vector<std::uint64_t> ids;
      std::vector<std::optional<std::uint64_t>> tracks;
      for (std::size_t p = 0; p < any_label_pred.size(); ++p) {
        if (!m.matched_gt[p]) continue;
        ids.push_back(*g.detections[*m.matched_gt[p]].gt_identity);
        tracks.push_back(pred_tracks[p]);
      }
      identities.push_back(std::move(ids));
      bound.push_back(std::move(tracks));
    }
    images.push_back(std::move(img));
  }

  const auto metrics = eval::evaluate_dataset(images, a.iou);
  OrderedJson j;
  j["iou_threshold"] = a.iou;
  j["frames"] = gts.size();
  j["tp"] = metrics.counts.tp;
  j["fp"] = metrics.counts.fp;
  j["fn"] = metrics.counts.fn;
  j["precision"] = metrics.prf.precision;
  j["recall"] = metrics.prf.recall;
  j["f1"] = metrics.prf.f1;
  j["map"] = metrics.mean_ap;
  OrderedJson ap = OrderedJson::object();
  for (const auto& [label, v] : metrics.ap) {
    if (v) {
      ap[label] = *v;
    } else {
      ap[label] = nullptr;
    }
  }
  j["ap"] = std::move(ap);
  if (have_identity) {
    j["id_switches"] = eval::id_switches(identities, bound);
  } else {
    j["id_switches"] = nullptr;
  }
  out << j.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string store;
  std::size_t synthetic = 0;
  std::size_t dim = kDefaultEmbeddingDim;
  std::size_t queries = 10000;
  std::uint64_t seed = 7;
  std::size_t workers = 1;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.store.empty() == (a.synthetic == 0)) {
    throw InputError("bench needs exactly one of --store or --synthetic");
  }
  const ReferenceStore store = a.store.empty() ? synth::random_store(a.synthetic, a.dim, a.seed + 1)
                                               : ReferenceStore::load_snapshot(fs::path(a.store));
  out << bench::format_report(bench::bench_store(store, a.queries, a.seed, a.workers)) << '\n';
  return kExitOk;
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw InputError("--config needs a file argument");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config_path || rest.empty()) return rest;

  Json j;
  try {
    j = Json::parse(slurp(*config_path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed config '" + *config_path + "': " + e.what());
  }
  if (!j.is_object()) throw InputError("config '" + *config_path + "' must be a JSON object");
  const fs::path base = fs::path(*config_path).parent_path();

  std::vector<std::string> tokens;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + flag_name(key);
    auto resolve = [&](const Json& v) {
      std::string s = scalar_token(v);
      if (kPathKeys.contains(flag_name(key)) && s != "-" && fs::path(s).is_relative()) {
        s = (base / s).string();
      }
      return s;
    };
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        tokens.push_back(flag);
        tokens.push_back(resolve(v));
      }
    } else if (!value.is_null()) {
      tokens.push_back(flag);
      tokens.push_back(resolve(value));
    }
  }
  std::vector<std::string> out{rest.front()};
  out.insert(out.end(), tokens.begin(), tokens.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Foreign-object intrusion tracking and retrieval toolkit", "foi"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string unused_config;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", unused_config, "JSON file with any of this command's flags");
  };

  BuildStoreArgs bs;
  auto* build = app.add_subcommand("build-store", "Create or extend a reference store snapshot");
  build->add_option("--records", bs.records, "JSONL records: label, source_path, embedding[, index]");
  build->add_option("--base", bs.base, "Existing snapshot to append to");
  build->add_option("--out", bs.out, "Snapshot output path")->required();
  build->add_option("--dim", bs.dim, "Session embedding dimension");
  build->add_option("--taxonomy", bs.taxonomy, "Flag labels unmapped by this preset");
  add_config(build);

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "Top-k cosine retrieval for one embedding");
  query->add_option("--store", qa.store)->required();
  query->add_option("--embedding", qa.embedding, "JSON array or {\"embedding\": [...]}")->required();
  query->add_option("--k", qa.k)->check(CLI::PositiveNumber);
  add_config(query);

  TrackArgs ta;
  auto* track = app.add_subcommand("track", "Track, classify and alert over a frame stream");
  track->add_option("--frames", ta.frames)->required();
  track->add_option("--store", ta.store)->required();
  track->add_option("--zone", ta.zones, "[name=]x_min,y_min,x_max,y_max")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  track->add_option("--out", ta.out, "Alert events (JSONL)");
  track->add_option("--reports", ta.reports, "Per-track reports (JSONL)");
  track->add_option("--assignments", ta.assignments, "Per-detection track ids and final labels");
  track->add_option("--diagnostics", ta.diagnostics, "Per-association IoU and similarity");
  track->add_option("--timings", ta.timings, "Per-frame stage timings");
  track->add_option("--iou-threshold", ta.tracker.iou_threshold);
  track->add_option("--feature-threshold", ta.tracker.feature_threshold);
  track->add_option("--max-misses", ta.tracker.max_misses);
  track->add_option("--buffer-size", ta.tracker.buffer_size);
  track->add_option("--window", ta.window, "Approach window in frames");
  track->add_option("--taxonomy", ta.taxonomy, "functional, material, height or none");
  track->add_option("--dim", ta.dim, "Expected session embedding dimension");
  add_config(track);

  SynthArgs sa;
  auto* syn = app.add_subcommand("synth", "Generate a synthetic scenario");
  syn->add_option("--scenario", sa.scenario, "Scenario JSON (overrides the preset flags)");
  syn->add_option("--preset", sa.preset);
  syn->add_option("--seed", sa.seed);
  syn->add_option("--n-frames", sa.n_frames);
  syn->add_option("--sigma", sa.sigma);
  syn->add_option("--dim", sa.dim);
  syn->add_option("--frames-out", sa.frames_out)->required();
  syn->add_option("--gt-out", sa.gt_out)->required();
  syn->add_option("--store-out", sa.store_out)->required();
  syn->add_option("--diagnostics-out", sa.diagnostics_out);
  syn->add_option("--config-out", sa.config_out, "Echo the effective scenario JSON");
  add_config(syn);

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Precision, recall, F1, mAP and ID switches");
  ev->add_option("--pred", ea.pred)->required();
  ev->add_option("--gt", ea.gt)->required();
  ev->add_option("--iou", ea.iou);
  add_config(ev);

  BenchArgs ba;
  auto* be = app.add_subcommand("bench", "Retrieval latency benchmark");
  be->add_option("--store", ba.store);
  be->add_option("--synthetic", ba.synthetic, "Random store of this size instead of --store");
  be->add_option("--dim", ba.dim);
  be->add_option("--queries", ba.queries)->check(CLI::PositiveNumber);
  be->add_option("--seed", ba.seed);
  be->add_option("--workers", ba.workers);
  add_config(be);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitInputError;
    }

    if (build->parsed()) return cmd_build_store(bs, out);
    if (query->parsed()) return cmd_query(qa, out);
    if (track->parsed()) return cmd_track(ta, out);
    if (syn->parsed()) return cmd_synth(sa, out, err);
    if (ev->parsed()) return cmd_eval(ea, out);
    if (be->parsed()) return cmd_bench(ba, out);
    return kExitInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const ContractViolation& e) {
    err << "contract violation: " << e.what() << '\n';
    return kExitContractViolation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace foi::cli
