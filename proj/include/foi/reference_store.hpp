#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "foi/vectorspace.hpp"

namespace foi {

// The ten fine-grained object classes the reference set is labeled with.
inline constexpr std::array<std::string_view, 10> kFineClasses = {
    "greenhouse film", "dust-proof net", "wind-blown banner", "metal roof sheet",
    "tower crane",     "crane vehicle",  "cement mixer",      "excavator",
    "bulldozer",       "cement pump"};

struct ReferenceRecord {
  std::uint64_t index = 0;
  Embedding embedding;
  std::string source_path;
  std::string label;

  friend bool operator==(const ReferenceRecord&, const ReferenceRecord&) = default;
};

struct Match {
  std::uint64_t record_index = 0;
  std::string label;
  double similarity = 0.0;
};

// Fine label -> coarse label. Unmapped labels either go to an explicit
// unknown bucket or raise InputError.
class ClassTaxonomy {
 public:
  ClassTaxonomy() = default;
  ClassTaxonomy(std::string name, std::map<std::string, std::string> mapping,
                std::optional<std::string> unknown_bucket = std::nullopt);

  // Non-rigid / construction machinery / rigid. Default.
  static ClassTaxonomy functional_behavior();
  static ClassTaxonomy material();
  static ClassTaxonomy height();
  // "functional", "material" or "height".
  static ClassTaxonomy preset(std::string_view name);

  const std::string& name() const noexcept { return name_; }
  bool maps(const std::string& fine) const;
  std::string aggregate(const std::string& fine) const;
  const std::map<std::string, std::string>& mapping() const noexcept { return mapping_; }
  ClassTaxonomy with_unknown_bucket(std::string bucket) const;

 private:
  std::string name_;
  std::map<std::string, std::string> mapping_;
  std::optional<std::string> unknown_bucket_;
};

std::string aggregate_label(const ClassTaxonomy& taxonomy, const std::string& fine);

struct LabelSupport {
  std::size_t votes = 0;
  double mean_similarity = 0.0;
};

struct VoteSummary {
  std::string label;
  std::map<std::string, LabelSupport> support;
};

// Mode of the per-frame labels. Ties go to the higher mean similarity, then
// to the lexicographically smaller label.
VoteSummary majority_vote(std::span<const Match> votes);

// Brute-force cosine retrieval over labeled reference embeddings.
//
// Original embeddings are kept verbatim (so snapshots round-trip bit-exactly)
// together with their cached norms; a lookup screens all rows with a float-accumulated dot product and rescores in
// double only the rows whose screened score is within the screening error of
// the k-th best. Results are exactly those of a full double-precision scan.
//
// Readers (nearest, classify_frame, save) take a shared lock; insert takes an
// exclusive one, so a lookup sees the store either before or after an insert.
class ReferenceStore {
 public:
  explicit ReferenceStore(std::size_t dim = kDefaultEmbeddingDim);
  ReferenceStore(ReferenceStore&& other) noexcept;
  ReferenceStore& operator=(ReferenceStore&& other) noexcept;
  ReferenceStore(const ReferenceStore&) = delete;
  ReferenceStore& operator=(const ReferenceStore&) = delete;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  // Auto-assigns an index one past the largest index seen so far.
  std::uint64_t insert(Embedding embedding, std::string label, std::string source_path);
  // Uses record.index; throws ContractViolation if it is already taken.
  std::uint64_t insert(ReferenceRecord record);

  // Exact top-k by cosine similarity, ties by lower record index.
  std::vector<Match> nearest(const Embedding& query, std::size_t k) const;
  Match classify_frame(const Embedding& query) const;

  std::vector<ReferenceRecord> records() const;
  std::optional<ReferenceRecord> find(std::uint64_t index) const;
  std::set<std::string> labels() const;

  // With a taxonomy attached, inserts of labels it cannot map are recorded in
  // unmapped_labels() rather than rejected.
  void set_taxonomy(std::optional<ClassTaxonomy> taxonomy);
  std::set<std::string> unmapped_labels() const;

  void save_snapshot(std::ostream& out) const;
  void save_snapshot(const std::filesystem::path& path) const;
  // expected_dim, when given, is the session dimension the header must match.
  static ReferenceStore load_snapshot(std::istream& in,
                                      std::optional<std::size_t> expected_dim = std::nullopt);
  static ReferenceStore load_snapshot(const std::filesystem::path& path,
                                      std::optional<std::size_t> expected_dim = std::nullopt);

 private:
  std::uint64_t insert_locked(Embedding embedding, std::string label, std::string source_path,
                              std::optional<std::uint64_t> index);
  std::span<const float> row(std::size_t pos) const {
    return {matrix_.data() + pos * dim_, dim_};
  }

  mutable std::shared_mutex mutex_;
  std::size_t dim_;
  std::vector<float> matrix_;
  std::vector<double> norms_;
  std::vector<std::uint64_t> indices_;
  std::vector<std::string> labels_;
  std::vector<std::string> paths_;
  std::unordered_map<std::uint64_t, std::size_t> position_of_;
  std::uint64_t next_index_ = 0;
  std::optional<ClassTaxonomy> taxonomy_;
  std::set<std::string> unmapped_;
};

// Writes a float with the fewest digits that parse back to the same value.
void append_float(std::string& out, float value);

}  // namespace foi
