#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "foi/bench.hpp"
#include "foi/cli.hpp"
#include "foi/error.hpp"
#include "foi/evalkit.hpp"
#include "foi/geometry.hpp"
#include "foi/losses.hpp"
#include "foi/pipeline.hpp"
#include "foi/reference_store.hpp"
#include "foi/synth.hpp"
#include "foi/tracker.hpp"
#include "foi/vectorspace.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

foi::Embedding to_embedding(const std::vector<float>& v) { return foi::Embedding(v); }

std::vector<float> from_embedding(const foi::Embedding& e) {
  return {e.values().begin(), e.values().end()};
}

}  // namespace

PYBIND11_MODULE(_foi, m) {
  m.doc() = "Foreign-object intrusion tracking: retrieval, tracking, alerting and metrics";

  auto input_error = py::register_exception<foi::InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<foi::ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  (void)input_error;

  // vectorspace
  m.def("cosine_similarity", [](const std::vector<float>& x, const std::vector<float>& y) {
    return foi::cosine_similarity(x, y);
  }, "x"_a, "y"_a);
  m.def("squared_l2_distance", [](const std::vector<float>& x, const std::vector<float>& y) {
    return foi::squared_l2_distance(x, y);
  }, "x"_a, "y"_a);
  m.def("l2_normalize", [](const std::vector<float>& x) { return foi::l2_normalize(x).values; }, "x"_a);

  // geometry
  py::class_<foi::Point>(m, "Point")
      .def(py::init<double, double>(), "x"_a, "y"_a)
      .def_readwrite("x", &foi::Point::x)
      .def_readwrite("y", &foi::Point::y)
      .def("__repr__", [](const foi::Point& p) {
        std::ostringstream s;
        s << "Point(" << p.x << ", " << p.y << ")";
        return s.str();
      });
  py::class_<foi::BoundingBox>(m, "BoundingBox")
      .def(py::init<double, double, double, double>(), "x_min"_a, "y_min"_a, "x_max"_a, "y_max"_a)
      .def_readwrite("x_min", &foi::BoundingBox::x_min)
      .def_readwrite("y_min", &foi::BoundingBox::y_min)
      .def_readwrite("x_max", &foi::BoundingBox::x_max)
      .def_readwrite("y_max", &foi::BoundingBox::y_max)
      .def_property_readonly("area", &foi::BoundingBox::area);
  py::class_<foi::Zone>(m, "Zone")
      .def(py::init([](const foi::BoundingBox& b, std::string name) { return foi::Zone{b, std::move(name)}; }),
           "box"_a, "name"_a)
      .def_readwrite("box", &foi::Zone::box)
      .def_readwrite("name", &foi::Zone::name);
  m.def("iou", &foi::iou, "a"_a, "b"_a);
  m.def("center", &foi::center, "box"_a);
  m.def("zone_contains", &foi::zone_contains, "zone"_a, "point"_a);
  m.def("approaching", [](const std::vector<foi::Point>& c, const foi::Zone& z, std::size_t w) {
    return foi::approaching(c, z, w);
  }, "centers"_a, "zone"_a, "window"_a = foi::kDefaultApproachWindow);

  // losses
  m.def("triplet_loss", [](const std::vector<float>& a, const std::vector<float>& p,
                           const std::vector<float>& n, double margin) {
    return foi::losses::triplet_loss(to_embedding(a), to_embedding(p), to_embedding(n), {margin});
  }, "anchor"_a, "positive"_a, "negative"_a, "margin"_a = 0.2);
  m.def("bce_multilabel", [](const std::vector<double>& p, const std::vector<double>& y) {
    return foi::losses::bce_multilabel(p, y);
  }, "probs"_a, "labels"_a);
  py::class_<foi::losses::LogitModel>(m, "LogitModel")
      .def(py::init([](std::vector<double> w, double b) { return foi::losses::LogitModel{std::move(w), b}; }),
           "w"_a, "bias"_a = 0.0)
      .def_readwrite("w", &foi::losses::LogitModel::w)
      .def_readwrite("bias", &foi::losses::LogitModel::bias);
  m.def("bce_logit_gradient", [](const foi::losses::LogitModel& model, const std::vector<double>& x, double y) {
    auto g = foi::losses::bce_logit_gradient(model, x, y);
    return py::make_tuple(g.w, g.bias);
  }, "model"_a, "x"_a, "y"_a);
  m.def("dice_loss", [](const std::vector<double>& p, const std::vector<double>& g) {
    return foi::losses::dice_loss(p, g);
  }, "pred"_a, "gt"_a);
  py::class_<foi::losses::CompositeWeights>(m, "CompositeWeights")
      .def(py::init([](double a, double b) { return foi::losses::CompositeWeights{a, b}; }),
           "alpha"_a = 1.0, "beta"_a = 1.0)
      .def_readwrite("alpha", &foi::losses::CompositeWeights::alpha)
      .def_readwrite("beta", &foi::losses::CompositeWeights::beta);
  m.def("total_loss", [](double cls, double box, double seg_bce, double seg_dice,
                         const foi::losses::CompositeWeights& w) {
    return foi::losses::total_loss({cls, box, seg_bce, seg_dice}, w);
  }, "class_loss"_a, "box"_a, "seg_bce"_a, "seg_dice"_a, "weights"_a = foi::losses::CompositeWeights{});

  // reference store
  py::class_<foi::Match>(m, "Match")
      .def_readonly("record_index", &foi::Match::record_index)
      .def_readonly("label", &foi::Match::label)
      .def_readonly("similarity", &foi::Match::similarity)
      .def("__repr__", [](const foi::Match& x) {
        std::ostringstream s;
        s << "Match(" << x.record_index << ", '" << x.label << "', " << x.similarity << ")";
        return s.str();
      });
  py::class_<foi::ClassTaxonomy>(m, "ClassTaxonomy")
      .def_static("preset", &foi::ClassTaxonomy::preset, "name"_a)
      .def_property_readonly("name", &foi::ClassTaxonomy::name)
      .def_property_readonly("mapping", &foi::ClassTaxonomy::mapping)
      .def("aggregate", &foi::ClassTaxonomy::aggregate, "fine"_a);
  m.def("aggregate_label", &foi::aggregate_label, "taxonomy"_a, "fine"_a);
  m.def("majority_vote", [](const std::vector<foi::Match>& votes) {
    auto s = foi::majority_vote(votes);
    py::dict support;
    for (const auto& [label, sup] : s.support) {
      support[py::str(label)] = py::make_tuple(sup.votes, sup.mean_similarity);
    }
    return py::make_tuple(s.label, support);
  }, "votes"_a);

  py::class_<foi::ReferenceStore>(m, "ReferenceStore")
      .def(py::init<std::size_t>(), "dim"_a = foi::kDefaultEmbeddingDim)
      .def_property_readonly("dim", &foi::ReferenceStore::dim)
      .def("__len__", &foi::ReferenceStore::size)
      .def("insert", [](foi::ReferenceStore& s, const std::vector<float>& e, std::string label,
                        std::string path, std::optional<std::uint64_t> index) {
        if (index) return s.insert({*index, to_embedding(e), std::move(path), std::move(label)});
        return s.insert(to_embedding(e), std::move(label), std::move(path));
      }, "embedding"_a, "label"_a, "source_path"_a = "", "index"_a = py::none())
      .def("nearest", [](const foi::ReferenceStore& s, const std::vector<float>& q, std::size_t k) {
        return s.nearest(to_embedding(q), k);
      }, "query"_a, "k"_a = 1, py::call_guard<py::gil_scoped_release>())
      .def("classify_frame", [](const foi::ReferenceStore& s, const std::vector<float>& q) {
        return s.classify_frame(to_embedding(q));
      }, "query"_a, py::call_guard<py::gil_scoped_release>())
      .def("labels", &foi::ReferenceStore::labels)
      .def("save", [](const foi::ReferenceStore& s, const std::string& path) {
        s.save_snapshot(std::filesystem::path(path));
      }, "path"_a)
      .def_static("load", [](const std::string& path, std::optional<std::size_t> dim) {
        return foi::ReferenceStore::load_snapshot(std::filesystem::path(path), dim);
      }, "path"_a, "dim"_a = py::none());
  m.def("random_store", &foi::synth::random_store, "size"_a, "dim"_a, "seed"_a);

  // tracker
  py::enum_<foi::AssociationMode>(m, "AssociationMode")
      .value("IoU", foi::AssociationMode::IoU)
      .value("Feature", foi::AssociationMode::Feature);
  py::class_<foi::TrackerConfig>(m, "TrackerConfig")
      .def(py::init<>())
      .def_readwrite("iou_threshold", &foi::TrackerConfig::iou_threshold)
      .def_readwrite("feature_threshold", &foi::TrackerConfig::feature_threshold)
      .def_readwrite("max_misses", &foi::TrackerConfig::max_misses)
      .def_readwrite("buffer_size", &foi::TrackerConfig::buffer_size);
  py::class_<foi::Detection>(m, "Detection")
      .def(py::init([](const foi::BoundingBox& b, const std::vector<float>& e, double c) {
             return foi::Detection{b, to_embedding(e), c, std::nullopt};
           }),
           "box"_a, "embedding"_a, "confidence"_a = 1.0)
      .def_readwrite("box", &foi::Detection::box)
      .def_property_readonly("embedding", [](const foi::Detection& d) { return from_embedding(d.embedding); })
      .def_readwrite("confidence", &foi::Detection::confidence);
  py::class_<foi::Tracker>(m, "Tracker")
      .def(py::init<foi::TrackerConfig>(), "config"_a = foi::TrackerConfig{})
      .def("step", [](foi::Tracker& t, const std::vector<foi::Detection>& dets, std::uint64_t frame) {
        const auto r = t.step(dets, frame);
        py::list assigned;
        for (const auto& a : r.assignments) {
          assigned.append(py::dict("track_id"_a = a.track_id, "detection"_a = a.detection,
                                   "mode"_a = a.mode, "iou"_a = a.iou, "similarity"_a = a.similarity));
        }
        py::list spawned;
        for (const auto& n : r.new_tracks) spawned.append(py::make_tuple(n.track_id, n.detection));
        return py::dict("assignments"_a = assigned, "new_tracks"_a = spawned, "lost_tracks"_a = r.lost_tracks);
      }, "detections"_a, "frame_index"_a)
      .def("active_track_ids", [](const foi::Tracker& t) {
        std::vector<std::uint64_t> ids;
        for (const auto* tr : t.active_tracks()) ids.push_back(tr->id);
        return ids;
      });

  // pipeline
  py::class_<foi::FrameDetections>(m, "FrameDetections")
      .def(py::init([](std::uint64_t idx, std::uint64_t ts, std::vector<foi::Detection> d) {
             return foi::FrameDetections{idx, ts, std::move(d)};
           }),
           "frame_index"_a, "timestamp_ms"_a = 0, "detections"_a = std::vector<foi::Detection>{});
  py::class_<foi::AlertEvent>(m, "AlertEvent")
      .def_readonly("frame_index", &foi::AlertEvent::frame_index)
      .def_readonly("track_id", &foi::AlertEvent::track_id)
      .def_property_readonly("kind", [](const foi::AlertEvent& e) { return std::string(foi::to_string(e.kind)); })
      .def_readonly("zone", &foi::AlertEvent::zone)
      .def_readonly("label", &foi::AlertEvent::label)
      .def_readonly("mean_similarity", &foi::AlertEvent::mean_similarity);
  py::class_<foi::PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("tracker", &foi::PipelineConfig::tracker)
      .def_readwrite("zones", &foi::PipelineConfig::zones)
      .def_readwrite("approach_window", &foi::PipelineConfig::approach_window);
  py::class_<foi::Session>(m, "Session")
      .def(py::init<const foi::ReferenceStore&, foi::PipelineConfig>(), "store"_a, "config"_a,
           py::keep_alive<1, 2>())
      .def("process_frame", [](foi::Session& s, const foi::FrameDetections& f) {
        auto out = s.process_frame(f);
        py::list labels;
        for (const auto& l : out.labels) labels.append(py::make_tuple(l.detection, l.track_id, l.match));
        return py::make_tuple(labels, out.alerts);
      }, "frame"_a)
      .def("finalize", [](const foi::Session& s) {
        py::list reports;
        for (const auto& r : s.finalize()) {
          reports.append(py::dict("track_id"_a = r.track_id, "final_label"_a = r.final_label,
                                  "first_frame"_a = r.first_frame, "last_frame"_a = r.last_frame,
                                  "votes"_a = r.trail.size()));
        }
        return reports;
      });

  // evaluation
  m.def("precision_recall_f1", [](std::size_t tp, std::size_t fp, std::size_t fn) {
    const auto r = foi::eval::precision_recall_f1({tp, fp, fn});
    return py::make_tuple(r.precision, r.recall, r.f1);
  }, "tp"_a, "fp"_a, "fn"_a);
  m.def("average_precision", [](const std::vector<std::pair<double, bool>>& flags, std::size_t n_gt) {
    std::vector<foi::eval::RankedFlag> f;
    for (const auto& [c, tp] : flags) f.push_back({c, tp});
    return foi::eval::average_precision(f, n_gt);
  }, "flags"_a, "n_ground_truth"_a);
  m.def("id_switches", [](const std::vector<std::vector<std::uint64_t>>& gt,
                          const std::vector<std::vector<std::optional<std::uint64_t>>>& tracks) {
    return foi::eval::id_switches(gt, tracks);
  }, "gt_identities"_a, "track_ids"_a);

  // harness
  m.def("bench_store", [](const foi::ReferenceStore& s, std::size_t n, std::uint64_t seed) {
    foi::bench::BenchReport r;
    {
      py::gil_scoped_release release;
      r = foi::bench::bench_store(s, n, seed);
    }
    return py::dict("store_size"_a = r.store_size, "measured"_a = r.measured, "p50_ms"_a = r.p50_ms,
                    "p95_ms"_a = r.p95_ms, "max_ms"_a = r.max_ms, "mean_ms"_a = r.mean_ms);
  }, "store"_a, "n_queries"_a, "seed"_a = 7);
  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = foi::cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, "args"_a);
}
