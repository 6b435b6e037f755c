#include "foi/formats.hpp"

#include <istream>
#include <ostream>

#include "foi/error.hpp"
#include "json_support.hpp"

namespace foi {

using detail::Json;
using detail::OrderedJson;

namespace {

std::string num(double v) { return Json(v).dump(); }

void append_box(std::string& out, const BoundingBox& b) {
  out += '[';
  out += num(b.x_min);
  out += ',';
  out += num(b.y_min);
  out += ',';
  out += num(b.x_max);
  out += ',';
  out += num(b.y_max);
  out += ']';
}

void append_embedding(std::string& out, std::span<const float> values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    append_float(out, values[i]);
  }
  out += ']';
}

BoundingBox parse_box(const Json& det, std::size_t line) {
  const Json& b = detail::require_field(det, "box", line);
  if (!b.is_array() || b.size() != 4) {
    throw InputError(detail::where(line) + ": field \"box\" must be [x_min,y_min,x_max,y_max]");
  }
  for (const auto& v : b) {
    if (!v.is_number()) throw InputError(detail::where(line) + ": field \"box\" must contain numbers");
  }
  BoundingBox box{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
  if (!box.valid()) throw InputError(detail::where(line) + ": field \"box\" has min > max");
  return box;
}

double parse_confidence(const Json& det, std::size_t line) {
  const double c = detail::require_number(det, "confidence", line);
  if (!(c >= 0.0 && c <= 1.0)) {
    throw InputError(detail::where(line) + ": field \"confidence\" must lie in [0, 1]");
  }
  return c;
}

std::optional<std::string> optional_string(const Json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw InputError(detail::where(line) + ": field \"" + field + "\" must be a string");
  return it->get<std::string>();
}

std::optional<std::uint64_t> optional_uint(const Json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_unsigned()) {
    throw InputError(detail::where(line) + ": field \"" + field + "\" must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

const Json& detections_array(const Json& frame, std::size_t line) {
  const Json& dets = detail::require_field(frame, "detections", line);
  if (!dets.is_array()) throw InputError(detail::where(line) + ": field \"detections\" must be an array");
  return dets;
}

}  // namespace

// ---------------------------------------------------------------- frames

FrameDetections parse_frame(const std::string& text, std::size_t dim, std::size_t line) {
  const Json j = detail::parse_line<Json>(text, line);
  FrameDetections frame;
  frame.frame_index = detail::require_uint(j, "frame_index", line);
  frame.timestamp_ms = detail::require_uint(j, "timestamp_ms", line);
  for (const Json& det : detections_array(j, line)) {
    Detection d;
    d.box = parse_box(det, line);
    d.confidence = parse_confidence(det, line);
    d.agg_class = optional_string(det, "agg_class", line);
    d.embedding = detail::parse_embedding(detail::require_field(det, "embedding", line), dim, line);
    frame.detections.push_back(std::move(d));
  }
  return frame;
}

FrameReader::FrameReader(std::istream& in, std::size_t dim) : in_(in), dim_(dim) {}

std::optional<FrameDetections> FrameReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    FrameDetections frame = parse_frame(text, dim_, line_);
    if (last_frame_ && frame.frame_index <= *last_frame_) {
      throw InputError(detail::where(line_) + ": field \"frame_index\" " +
                       std::to_string(frame.frame_index) + " is not greater than " +
                       std::to_string(*last_frame_));
    }
    last_frame_ = frame.frame_index;
    return frame;
  }
  return std::nullopt;
}

std::vector<FrameDetections> read_frames(std::istream& in, std::size_t dim) {
  FrameReader reader(in, dim);
  std::vector<FrameDetections> out;
  while (auto f = reader.next()) out.push_back(std::move(*f));
  return out;
}

std::string format_frame(const FrameDetections& frame) {
  std::string s = "{\"frame_index\":" + std::to_string(frame.frame_index) +
                  ",\"timestamp_ms\":" + std::to_string(frame.timestamp_ms) + ",\"detections\":[";
  for (std::size_t i = 0; i < frame.detections.size(); ++i) {
    const Detection& d = frame.detections[i];
    if (i) s += ',';
    s += "{\"box\":";
    append_box(s, d.box);
    s += ",\"confidence\":" + num(d.confidence);
    if (d.agg_class) s += ",\"agg_class\":" + Json(*d.agg_class).dump();
    s += ",\"embedding\":";
    append_embedding(s, d.embedding.values());
    s += '}';
  }
  s += "]}";
  return s;
}

void write_frames(const std::vector<FrameDetections>& frames, std::ostream& out) {
  for (const auto& f : frames) out << format_frame(f) << '\n';
}

// ---------------------------------------------------------------- events

std::string format_event(const AlertEvent& e) {
  OrderedJson j;
  j["frame_index"] = e.frame_index;
  j["track_id"] = e.track_id;
  j["kind"] = to_string(e.kind);
  j["zone"] = e.zone;
  j["label"] = e.label;
  j["mean_similarity"] = e.mean_similarity;
  return j.dump();
}

void write_events(const std::vector<AlertEvent>& events, std::ostream& out) {
  for (const auto& e : events) out << format_event(e) << '\n';
}

std::vector<AlertEvent> read_events(std::istream& in) {
  std::vector<AlertEvent> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    const Json j = detail::parse_line<Json>(text, line);
    AlertEvent e;
    e.frame_index = detail::require_uint(j, "frame_index", line);
    e.track_id = detail::require_uint(j, "track_id", line);
    const std::string kind = detail::require_string(j, "kind", line);
    if (kind == "Entered") {
      e.kind = AlertKind::Entered;
    } else if (kind == "Approaching") {
      e.kind = AlertKind::Approaching;
    } else {
      throw InputError(detail::where(line) + ": field \"kind\" must be Entered or Approaching");
    }
    e.zone = detail::require_string(j, "zone", line);
    e.label = detail::require_string(j, "label", line);
    e.mean_similarity = detail::require_number(j, "mean_similarity", line);
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------- reports

std::string format_report(const TrackReport& r) {
  OrderedJson j;
  j["track_id"] = r.track_id;
  j["final_label"] = r.final_label;
  if (r.aggregate_label) j["aggregate_label"] = *r.aggregate_label;
  j["state"] = to_string(r.state);
  j["first_frame"] = r.first_frame;
  j["last_frame"] = r.last_frame;
  OrderedJson support = OrderedJson::object();
  for (const auto& [label, s] : r.support) {
    support[label] = {{"votes", s.votes}, {"mean_similarity", s.mean_similarity}};
  }
  j["support"] = std::move(support);
  OrderedJson trail = OrderedJson::array();
  for (const TrailEntry& t : r.trail) {
    trail.push_back({{"frame_index", t.frame_index},
                     {"record_index", t.record_index},
                     {"label", t.label},
                     {"similarity", t.similarity}});
  }
  j["trail"] = std::move(trail);
  OrderedJson traj = OrderedJson::array();
  for (const Point& p : r.trajectory) traj.push_back({p.x, p.y});
  j["trajectory"] = std::move(traj);
  return j.dump();
}

void write_reports(const std::vector<TrackReport>& reports, std::ostream& out) {
  for (const auto& r : reports) out << format_report(r) << '\n';
}

// ---------------------------------------------------------------- annotated

std::vector<AnnotatedFrame> read_annotated(std::istream& in) {
  std::vector<AnnotatedFrame> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const Json j = detail::parse_line<Json>(text, line);
    AnnotatedFrame f;
    f.frame_index = detail::require_uint(j, "frame_index", line);
    f.timestamp_ms = detail::require_uint(j, "timestamp_ms", line);
    if (!out.empty() && f.frame_index <= out.back().frame_index) {
      throw InputError(detail::where(line) + ": field \"frame_index\" is not increasing");
    }
    for (const Json& det : detections_array(j, line)) {
      AnnotatedDetection d;
      d.box = parse_box(det, line);
      d.confidence = parse_confidence(det, line);
      d.agg_class = optional_string(det, "agg_class", line);
      d.label = optional_string(det, "label", line);
      d.track_id = optional_uint(det, "track_id", line);
      d.gt_label = optional_string(det, "gt_label", line);
      d.gt_identity = optional_uint(det, "gt_identity", line);
      if (auto it = det.find("embedding"); it != det.end()) {
        if (!it->is_array()) throw InputError(detail::where(line) + ": field \"embedding\" must be an array");
        std::vector<float> values;
        for (const auto& v : *it) {
          if (!v.is_number()) throw InputError(detail::where(line) + ": field \"embedding\" must contain numbers");
          values.push_back(v.get<float>());
        }
        d.embedding = std::move(values);
      }
      f.detections.push_back(std::move(d));
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::string format_annotated(const AnnotatedFrame& frame) {
  std::string s = "{\"frame_index\":" + std::to_string(frame.frame_index) +
                  ",\"timestamp_ms\":" + std::to_string(frame.timestamp_ms) + ",\"detections\":[";
  for (std::size_t i = 0; i < frame.detections.size(); ++i) {
    const AnnotatedDetection& d = frame.detections[i];
    if (i) s += ',';
    s += "{\"box\":";
    append_box(s, d.box);
    s += ",\"confidence\":" + num(d.confidence);
    if (d.agg_class) s += ",\"agg_class\":" + Json(*d.agg_class).dump();
    if (d.label) s += ",\"label\":" + Json(*d.label).dump();
    if (d.track_id) s += ",\"track_id\":" + std::to_string(*d.track_id);
    if (d.gt_label) s += ",\"gt_label\":" + Json(*d.gt_label).dump();
    if (d.gt_identity) s += ",\"gt_identity\":" + std::to_string(*d.gt_identity);
    if (d.embedding) {
      s += ",\"embedding\":";
      append_embedding(s, *d.embedding);
    }
    s += '}';
  }
  s += "]}";
  return s;
}

void write_annotated(const std::vector<AnnotatedFrame>& frames, std::ostream& out) {
  for (const auto& f : frames) out << format_annotated(f) << '\n';
}

}  // namespace foi
