#include "foi/reference_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>

#include "foi/error.hpp"
#include "json_support.hpp"

namespace foi {

// ---------------------------------------------------------------- taxonomy

ClassTaxonomy::ClassTaxonomy(std::string name, std::map<std::string, std::string> mapping,
                             std::optional<std::string> unknown_bucket)
    : name_(std::move(name)), mapping_(std::move(mapping)), unknown_bucket_(std::move(unknown_bucket)) {}

ClassTaxonomy ClassTaxonomy::functional_behavior() {
  return ClassTaxonomy("functional", {{"greenhouse film", "non-rigid"},
                                      {"dust-proof net", "non-rigid"},
                                      {"wind-blown banner", "non-rigid"},
                                      {"tower crane", "construction machinery"},
                                      {"crane vehicle", "construction machinery"},
                                      {"cement mixer", "construction machinery"},
                                      {"excavator", "construction machinery"},
                                      {"bulldozer", "construction machinery"},
                                      {"cement pump", "construction machinery"},
                                      {"metal roof sheet", "rigid"}});
}

ClassTaxonomy ClassTaxonomy::material() {
  return ClassTaxonomy("material", {{"tower crane", "metal"},
                                    {"crane vehicle", "metal"},
                                    {"cement mixer", "metal"},
                                    {"excavator", "metal"},
                                    {"bulldozer", "metal"},
                                    {"cement pump", "metal"},
                                    {"metal roof sheet", "metal"},
                                    {"dust-proof net", "mesh"},
                                    {"wind-blown banner", "plastic"},
                                    {"greenhouse film", "plastic"}});
}

ClassTaxonomy ClassTaxonomy::height() {
  return ClassTaxonomy("height", {{"tower crane", "high"},
                                  {"cement pump", "high"},
                                  {"crane vehicle", "high"},
                                  {"excavator", "medium"},
                                  {"cement mixer", "medium"},
                                  {"bulldozer", "medium"},
                                  {"metal roof sheet", "medium"},
                                  {"dust-proof net", "ground-contact"},
                                  {"greenhouse film", "ground-contact"},
                                  {"wind-blown banner", "ground-contact"}});
}

ClassTaxonomy ClassTaxonomy::preset(std::string_view name) {
  if (name == "functional") return functional_behavior();
  if (name == "material") return material();
  if (name == "height") return height();
  throw InputError("unknown taxonomy preset '" + std::string(name) +
                   "' (expected functional, material or height)");
}

bool ClassTaxonomy::maps(const std::string& fine) const {
  return mapping_.contains(fine) || unknown_bucket_.has_value();
}

std::string ClassTaxonomy::aggregate(const std::string& fine) const {
  if (auto it = mapping_.find(fine); it != mapping_.end()) return it->second;
  if (unknown_bucket_) return *unknown_bucket_;
  throw InputError("label '" + fine + "' is not mapped by taxonomy '" + name_ + "'");
}

ClassTaxonomy ClassTaxonomy::with_unknown_bucket(std::string bucket) const {
  return ClassTaxonomy(name_, mapping_, std::move(bucket));
}

std::string aggregate_label(const ClassTaxonomy& taxonomy, const std::string& fine) {
  return taxonomy.aggregate(fine);
}

// ---------------------------------------------------------------- voting

VoteSummary majority_vote(std::span<const Match> votes) {
  if (votes.empty()) throw ContractViolation("majority_vote needs at least one vote");
  VoteSummary out;
  std::map<std::string, double> sums;
  for (const Match& m : votes) {
    ++out.support[m.label].votes;
    sums[m.label] += m.similarity;
  }
  for (auto& [label, s] : out.support) s.mean_similarity = sums[label] / static_cast<double>(s.votes);

  // std::map iterates labels in ascending order, so strict comparisons keep
  // the lexicographically smallest label among exact ties.
  const LabelSupport* best = nullptr;
  for (const auto& [label, s] : out.support) {
    if (best == nullptr || s.votes > best->votes ||
        (s.votes == best->votes && s.mean_similarity > best->mean_similarity)) {
      best = &s;
      out.label = label;
    }
  }
  return out;
}

// ---------------------------------------------------------------- store

ReferenceStore::ReferenceStore(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ContractViolation("embedding dimension must be positive");
}

ReferenceStore::ReferenceStore(ReferenceStore&& other) noexcept : dim_(other.dim_) {
  std::unique_lock lock(other.mutex_);
  matrix_ = std::move(other.matrix_);
  norms_ = std::move(other.norms_);
  indices_ = std::move(other.indices_);
  labels_ = std::move(other.labels_);
  paths_ = std::move(other.paths_);
  position_of_ = std::move(other.position_of_);
  next_index_ = other.next_index_;
  taxonomy_ = std::move(other.taxonomy_);
  unmapped_ = std::move(other.unmapped_);
}

ReferenceStore& ReferenceStore::operator=(ReferenceStore&& other) noexcept {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  dim_ = other.dim_;
  matrix_ = std::move(other.matrix_);
  norms_ = std::move(other.norms_);
  indices_ = std::move(other.indices_);
  labels_ = std::move(other.labels_);
  paths_ = std::move(other.paths_);
  position_of_ = std::move(other.position_of_);
  next_index_ = other.next_index_;
  taxonomy_ = std::move(other.taxonomy_);
  unmapped_ = std::move(other.unmapped_);
  return *this;
}

std::size_t ReferenceStore::size() const {
  std::shared_lock lock(mutex_);
  return indices_.size();
}

std::uint64_t ReferenceStore::insert(Embedding embedding, std::string label, std::string source_path) {
  std::unique_lock lock(mutex_);
  return insert_locked(std::move(embedding), std::move(label), std::move(source_path), std::nullopt);
}

std::uint64_t ReferenceStore::insert(ReferenceRecord record) {
  std::unique_lock lock(mutex_);
  return insert_locked(std::move(record.embedding), std::move(record.label),
                       std::move(record.source_path), record.index);
}

std::uint64_t ReferenceStore::insert_locked(Embedding embedding, std::string label,
                                            std::string source_path,
                                            std::optional<std::uint64_t> index) {
  validate_embedding(embedding, dim_);
  if (label.empty()) throw ContractViolation("class label must be non-empty");
  const std::uint64_t assigned = index.value_or(next_index_);
  if (position_of_.contains(assigned)) {
    throw ContractViolation("duplicate record index " + std::to_string(assigned));
  }

  const double len = norm(embedding.values());
  matrix_.insert(matrix_.end(), embedding.values().begin(), embedding.values().end());
  norms_.push_back(len);
  indices_.push_back(assigned);
  position_of_.emplace(assigned, indices_.size() - 1);
  next_index_ = std::max(next_index_, assigned + 1);
  if (taxonomy_ && !taxonomy_->maps(label)) unmapped_.insert(label);
  labels_.push_back(std::move(label));
  paths_.push_back(std::move(source_path));
  return assigned;
}

std::vector<Match> ReferenceStore::nearest(const Embedding& query, std::size_t k) const {
  if (k == 0) throw ContractViolation("k must be at least 1");
  validate_embedding(query, dim_);
  std::shared_lock lock(mutex_);
  const std::size_t n = indices_.size();
  if (n == 0) throw InputError("reference store is empty");

  const double norm_q = norm(query.values());
  auto similarity = [&](std::size_t pos) {
    return std::clamp(dot(row(pos), query.values()) / (norms_[pos] * norm_q), -1.0, 1.0);
  };
  auto better = [&](double sa, std::size_t a, double sb, std::size_t b) {
    return sa > sb || (sa == sb && indices_[a] < indices_[b]);
  };

  // Screen every row with the float kernel, then rescore in double only the
  // rows that could still rank in the top k given the screening error.
  std::vector<double> screen(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    screen[pos] = screening_dot(row(pos), query.values()) / (norms_[pos] * norm_q);
  }
  const std::size_t take = std::min(k, n);
  double kth;
  if (take == 1) {
    kth = *std::max_element(screen.begin(), screen.end());
  } else {
    std::vector<double> copy = screen;
    std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(take - 1), copy.end(),
                     std::greater<>());
    kth = copy[take - 1];
  }
  const double cutoff = kth - 2.0 * screening_error_bound(dim_);

  std::vector<std::pair<double, std::size_t>> candidates;
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (screen[pos] >= cutoff) candidates.emplace_back(similarity(pos), pos);
  }
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), [&](const auto& a, const auto& b) {
                      return better(a.first, a.second, b.first, b.second);
                    });
  std::vector<Match> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const auto [sim, pos] = candidates[i];
    out.push_back({indices_[pos], labels_[pos], sim});
  }
  return out;
}

Match ReferenceStore::classify_frame(const Embedding& query) const {
  return nearest(query, 1).front();
}

std::vector<ReferenceRecord> ReferenceStore::records() const {
  std::shared_lock lock(mutex_);
  std::vector<ReferenceRecord> out;
  out.reserve(indices_.size());
  for (std::size_t pos = 0; pos < indices_.size(); ++pos) {
    auto r = row(pos);
    out.push_back({indices_[pos], Embedding(std::vector<float>(r.begin(), r.end())), paths_[pos],
                   labels_[pos]});
  }
  return out;
}

std::optional<ReferenceRecord> ReferenceStore::find(std::uint64_t index) const {
  std::shared_lock lock(mutex_);
  auto it = position_of_.find(index);
  if (it == position_of_.end()) return std::nullopt;
  const std::size_t pos = it->second;
  auto r = row(pos);
  return ReferenceRecord{indices_[pos], Embedding(std::vector<float>(r.begin(), r.end())),
                         paths_[pos], labels_[pos]};
}

std::set<std::string> ReferenceStore::labels() const {
  std::shared_lock lock(mutex_);
  return {labels_.begin(), labels_.end()};
}

void ReferenceStore::set_taxonomy(std::optional<ClassTaxonomy> taxonomy) {
  std::unique_lock lock(mutex_);
  taxonomy_ = std::move(taxonomy);
  unmapped_.clear();
  if (!taxonomy_) return;
  for (const auto& label : labels_) {
    if (!taxonomy_->maps(label)) unmapped_.insert(label);
  }
}

std::set<std::string> ReferenceStore::unmapped_labels() const {
  std::shared_lock lock(mutex_);
  return unmapped_;
}

// ---------------------------------------------------------------- snapshots

void append_float(std::string& out, float value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

void ReferenceStore::save_snapshot(std::ostream& out) const {
  std::shared_lock lock(mutex_);
  detail::OrderedJson header;
  header["format"] = "foi-store";
  header["version"] = 1;
  header["dim"] = dim_;
  header["count"] = indices_.size();
  out << header.dump() << '\n';

  std::string line;
  for (std::size_t pos = 0; pos < indices_.size(); ++pos) {
    line.clear();
    line += "{\"index\":";
    line += std::to_string(indices_[pos]);
    line += ",\"label\":";
    line += detail::Json(labels_[pos]).dump();
    line += ",\"source_path\":";
    line += detail::Json(paths_[pos]).dump();
    line += ",\"embedding\":[";
    auto r = row(pos);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) line += ',';
      append_float(line, r[i]);
    }
    line += "]}\n";
    out << line;
  }
  if (!out) throw InputError("failed writing store snapshot");
}

void ReferenceStore::save_snapshot(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  save_snapshot(out);
}

ReferenceStore ReferenceStore::load_snapshot(std::istream& in,
                                             std::optional<std::size_t> expected_dim) {
  using detail::FloatJson;
  std::string text;
  if (!std::getline(in, text)) throw InputError("line 1: missing store header");
  const auto header = detail::parse_line<FloatJson>(text, 1);
  if (detail::require_string(header, "format", 1) != "foi-store") {
    throw InputError("line 1: not a foi-store snapshot");
  }
  if (detail::require_uint(header, "version", 1) != 1) {
    throw InputError("line 1: unsupported snapshot version");
  }
  const auto dim = static_cast<std::size_t>(detail::require_uint(header, "dim", 1));
  const auto count = detail::require_uint(header, "count", 1);
  if (dim == 0) throw InputError("line 1: dim must be positive");
  if (expected_dim && *expected_dim != dim) {
    throw InputError("line 1: snapshot dim " + std::to_string(dim) + " does not match session dim " +
                     std::to_string(*expected_dim));
  }

  ReferenceStore store(dim);
  store.matrix_.reserve(static_cast<std::size_t>(count) * dim);
  std::size_t line_no = 1;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    const auto rec = detail::parse_line<FloatJson>(text, line_no);
    const auto index = detail::require_uint(rec, "index", line_no);
    auto label = detail::require_string(rec, "label", line_no);
    auto path = detail::require_string(rec, "source_path", line_no);
    auto embedding = detail::parse_embedding(detail::require_field(rec, "embedding", line_no), dim, line_no);
    if (label.empty()) throw InputError(detail::where(line_no) + ": label is empty");
    if (store.position_of_.contains(index)) {
      throw InputError(detail::where(line_no) + ": duplicate index " + std::to_string(index));
    }
    store.insert_locked(std::move(embedding), std::move(label), std::move(path), index);
  }
  if (store.indices_.size() != count) {
    throw InputError("header count " + std::to_string(count) + " does not match " +
                     std::to_string(store.indices_.size()) + " records");
  }
  return store;
}

ReferenceStore ReferenceStore::load_snapshot(const std::filesystem::path& path,
                                             std::optional<std::size_t> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return load_snapshot(in, expected_dim);
}

}  // namespace foi
