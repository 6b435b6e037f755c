// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "foi/bench.hpp"
#include "foi/evalkit.hpp"
#include "foi/formats.hpp"
#include "foi/losses.hpp"
#include "foi/pipeline.hpp"
#include "foi/reference_store.hpp"
#include "foi/synth.hpp"
#include "../oracles.hpp"
#include "../scenario_runner.hpp"

using namespace foi;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct FixtureRun {
  std::vector<TrackReport> reports;
  std::vector<AlertEvent> alerts;
  std::vector<FrameOutput> frames;
  std::size_t id_switches = 0;
  std::size_t n_frames = 0;
  double seconds = 0.0;
};

// Loads a bundled case from disk and runs it exactly as `foi track` would.
FixtureRun run_bundled(const std::string& name, const Zone& zone) {
  const fs::path dir = fs::path(FOI_SOURCE_DIR) / "fixtures" / name;
  const auto t0 = Clock::now();
  const auto store = ReferenceStore::load_snapshot(dir / "store.jsonl");
  std::ifstream frames_in(dir / "frames.jsonl");
  const auto frames = read_frames(frames_in, store.dim());
  std::ifstream gt_in(dir / "gt.jsonl");
  const auto gt = read_annotated(gt_in);

  PipelineConfig cfg;
  cfg.zones = {zone};
  cfg.taxonomy = ClassTaxonomy::functional_behavior();
  Session session(store, cfg);
  FixtureRun run;
  std::vector<std::vector<std::uint64_t>> ids;
  std::vector<std::vector<std::optional<std::uint64_t>>> bound;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    auto out = session.process_frame(frames[f]);
    run.alerts.insert(run.alerts.end(), out.alerts.begin(), out.alerts.end());
    std::vector<std::optional<std::uint64_t>> track_of(frames[f].detections.size());
    for (const auto& l : out.labels) track_of[l.detection] = l.track_id;
    std::vector<std::uint64_t> frame_ids;
    for (const auto& d : gt[f].detections) frame_ids.push_back(*d.gt_identity);
    ids.push_back(std::move(frame_ids));
    bound.push_back(std::move(track_of));
    run.frames.push_back(std::move(out));
  }
  run.reports = session.finalize();
  run.seconds = seconds_since(t0);
  run.id_switches = eval::id_switches(ids, bound);
  run.n_frames = frames.size();
  return run;
}

void crane_fixture() {
  const auto run = run_bundled("crane", {{600, 300, 1000, 700}, "critical"});
  std::size_t feature = 0, total = 0;
  for (std::size_t f = 1; f < run.frames.size(); ++f) {
    for (const auto& a : run.frames[f].result.assignments) {
      ++total;
      feature += a.mode == AssociationMode::Feature;
    }
  }
  const bool one_track = run.reports.size() == 1 && run.reports[0].trail.size() == run.n_frames;
  const std::string label = run.reports.empty() ? "" : run.reports[0].final_label;
  const bool ok = run.n_frames == 6 && one_track && total == 5 && feature == 5 && run.id_switches == 0 &&
                  label == "crane vehicle" && run.seconds < 1.0;
  report(1, "crane trace", ok,
         fmt("tracks=%zu frames=%zu feature_assoc=%zu/%zu id_switches=%zu label=\"%s\" runtime=%.3fs",
             run.reports.size(), run.n_frames, feature, total, run.id_switches, label.c_str(), run.seconds));
}

void net_fixture() {
  const auto run = run_bundled("net", {{400, 200, 800, 600}, "clearance"});
  const TrackReport* net = nullptr;
  for (const auto& r : run.reports) {
    if (r.track_id == 1) net = &r;
  }
  bool persistent = net && net->trail.size() == run.n_frames;
  for (std::size_t f = 1; f < run.frames.size(); ++f) {
    bool seen = false;
    for (const auto& a : run.frames[f].result.assignments) seen = seen || a.track_id == 1;
    persistent = persistent && seen;
  }
  std::size_t entered = 0, entered_net = 0;
  for (const auto& a : run.alerts) {
    if (a.kind != AlertKind::Entered) continue;
    ++entered;
    entered_net += a.track_id == 1 && a.label == "dust-proof net";
  }
  const std::string label = net ? net->final_label : "";
  const bool ok = persistent && entered == 1 && entered_net == 1 && label == "dust-proof net" &&
                  run.id_switches == 0 && run.seconds < 1.0;
  report(2, "dust-proof net trace", ok,
         fmt("net_track_frames=%zu/%zu entered_alerts=%zu (net:%zu) id_switches=%zu label=\"%s\" runtime=%.3fs",
             net ? net->trail.size() : 0, run.n_frames, entered, entered_net, run.id_switches, label.c_str(),
             run.seconds));
}

void retrieval_latency() {
  const auto store = synth::random_store(4513, 1024, 4513);
  const auto r = bench::bench_store(store, 11112, 7);
  const bool ok = r.measured >= 10000 && r.p50_ms <= 1.0 && r.p95_ms <= 2.0;
  report(3, "retrieval latency 4513x1024", ok,
         fmt("measured=%zu p50=%.3fms p95=%.3fms max=%.3fms (limits 1.0 / 2.0 ms)", r.measured, r.p50_ms, r.p95_ms,
             r.max_ms));
}

void knn_oracle() {
  std::mt19937_64 rng(100);
  std::uniform_int_distribution<std::size_t> size_d(1, 1000), dim_d(1, 64), k_d(1, 20);
  std::size_t mismatches = 0, queries = 0;
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const std::size_t size = size_d(rng), dim = dim_d(rng);
    const auto store = synth::random_store(size, dim, 1000 + s);
    const auto records = store.records();
    for (int q = 0; q < 50; ++q) {
      const auto query = testing::random_direction(rng, dim);
      const std::size_t k = q == 0 ? size : k_d(rng);
      const auto got = store.nearest(Embedding(query), k);
      const auto want = testing::naive_nearest(records, query, k);
      ++queries;
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        const double diff = std::abs(got[i].similarity - want[i].similarity);
        worst = std::max(worst, diff);
        same = got[i].record_index == want[i].index && diff <= 1e-9;
      }
      mismatches += !same;
    }
  }
  report(4, "kNN oracle equivalence", mismatches == 0,
         fmt("stores=100 queries=%zu mismatches=%zu max_similarity_diff=%.2e", queries, mismatches, worst));
}

double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale < 1e-8 ? std::abs(a - b) : std::abs(a - b) / scale;
}

void gradient_check() {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> n;
  std::uniform_int_distribution<int> dim_d(1, 8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_bce = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = static_cast<std::size_t>(dim_d(rng));
    losses::LogitModel m{std::vector<double>(d), n(rng)};
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) {
      m.w[i] = n(rng);
      x[i] = n(rng);
    }
    const double y = u(rng) < 0.5 ? 0.0 : 1.0;
    std::vector<double> params = m.w;
    params.push_back(m.bias);
    const auto fd = losses::finite_difference_gradient(
        [&](std::span<const double> p) {
          return losses::bce_logit_loss({{p.begin(), p.end() - 1}, p.back()}, x, y);
        },
        params, 1e-5);
    const auto g = losses::bce_logit_gradient(m, x, y);
    for (std::size_t i = 0; i < d; ++i) worst_bce = std::max(worst_bce, rel_err(g.w[i], fd[i]));
    worst_bce = std::max(worst_bce, rel_err(g.bias, fd[d]));
  }

  // Composite loss: gradient w.r.t. (class, box, seg_bce, seg_dice, alpha, beta).
  double worst_total = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(6);
    for (auto& v : p) v = 3.0 * u(rng);
    const auto fd = losses::finite_difference_gradient(
        [](std::span<const double> q) { return losses::total_loss({q[0], q[1], q[2], q[3]}, {q[4], q[5]}); }, p,
        1e-5);
    const double analytic[6] = {1.0, 1.0, p[4], p[5], p[2], p[3]};
    for (int i = 0; i < 6; ++i) worst_total = std::max(worst_total, rel_err(analytic[i], fd[i]));
  }
  const bool ok = worst_bce <= 1e-5 && worst_total <= 1e-5;
  report(5, "gradient check", ok,
         fmt("bce_logit draws=1000 max_rel_err=%.2e; composite draws=1000 max_rel_err=%.2e (limit 1e-5)", worst_bce,
             worst_total));
}

void triplet_zero_condition() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> dim_d(1, 32);
  std::uniform_real_distribution<double> margin_d(0.001, 2.0), scale_d(0.1, 3.0);
  std::size_t counterexamples = 0, zeros = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t d = static_cast<std::size_t>(dim_d(rng));
    std::normal_distribution<float> n(0.0f, static_cast<float>(scale_d(rng)));
    std::vector<float> a(d), p(d), q(d);
    for (std::size_t i = 0; i < d; ++i) {
      a[i] = n(rng);
      p[i] = n(rng);
      q[i] = n(rng);
    }
    const double margin = margin_d(rng);
    const double loss = losses::triplet_loss(Embedding(a), Embedding(p), Embedding(q), {margin});
    double dap = 0.0, dan = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double u = static_cast<double>(a[i]) - p[i], v = static_cast<double>(a[i]) - q[i];
      dap += u * u;
      dan += v * v;
    }
    const bool zero = loss == 0.0;
    zeros += zero;
    counterexamples += zero != (dap + margin <= dan) || loss < 0.0;
  }
  report(6, "triplet zero condition", counterexamples == 0,
         fmt("triplets=10000 zero_losses=%zu counterexamples=%zu", zeros, counterexamples));
}

void majority_vote_robustness() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> len_d(1, 60), label_d(0, 9);
  std::uniform_real_distribution<double> sim_d(-1.0, 1.0);
  std::size_t violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = len_d(rng);
    const std::string c(kFineClasses[static_cast<std::size_t>(label_d(rng))]);
    std::uniform_int_distribution<int> win_d(n / 2 + 1, n);
    const int wins = win_d(rng);
    std::vector<Match> trail;
    for (int i = 0; i < wins; ++i) trail.push_back({0, c, sim_d(rng)});
    while (static_cast<int>(trail.size()) < n) {
      std::string other(kFineClasses[static_cast<std::size_t>(label_d(rng))]);
      if (other == c) continue;
      trail.push_back({0, other, sim_d(rng)});
    }
    std::shuffle(trail.begin(), trail.end(), rng);
    violations += majority_vote(trail).label != c;
  }
  report(7, "majority vote robustness", violations == 0, fmt("trails=10000 violations=%zu", violations));
}

void synthetic_end_to_end() {
  std::size_t switches_on = 0, tracks = 0, correct = 0, seeds_with_switches_off = 0, switches_off = 0;
  double min_within = 1.0, max_cross = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = synth::generate(synth::crossing_scenario(seed, 120, 0.05));
    for (std::size_t f = 0; f < s.frames.size(); ++f) {
      const auto& dets = s.frames[f].detections;
      for (std::size_t i = 0; i < dets.size(); ++i) {
        for (std::size_t j = i + 1; j < dets.size(); ++j) {
          max_cross = std::max(max_cross, std::abs(cosine_similarity(dets[i].embedding, dets[j].embedding)));
        }
        min_within = std::min(min_within, s.store.classify_frame(dets[i].embedding).similarity);
      }
    }
    const auto on = testing::score_scenario(s, {});
    switches_on += on.id_switches;
    tracks += on.tracks;
    correct += on.correct_labels;

    PipelineConfig off;
    off.tracker.feature_threshold = 1.01;
    const auto no_fallback = testing::score_scenario(s, off);
    switches_off += no_fallback.id_switches;
    seeds_with_switches_off += no_fallback.id_switches > 0;
  }
  const double accuracy = tracks ? static_cast<double>(correct) / static_cast<double>(tracks) : 0.0;
  const bool ok = switches_on == 0 && accuracy >= 0.95 && seeds_with_switches_off == 20 && min_within >= 0.95 &&
                  max_cross <= 0.2;
  report(8, "synthetic crossing, 20 seeds", ok,
         fmt("id_switches=%zu label_accuracy=%.3f (%zu/%zu tracks); fallback off: id_switches=%zu, seeds>0: %zu/20; "
             "min_within_cos=%.4f max_cross_cos=%.4f",
             switches_on, accuracy, correct, tracks, switches_off, seeds_with_switches_off, min_within, max_cross));
}

void metrics() {
  const auto prf = eval::precision_recall_f1({3, 1, 3});
  const bool prf_ok = std::abs(prf.precision - 0.75) < 1e-12 && std::abs(prf.recall - 0.5) < 1e-12 &&
                      std::abs(prf.f1 - 0.6) < 1e-12;
  const std::vector<eval::RankedFlag> flags = {{0.9, true}, {0.8, false}, {0.7, true}, {0.6, false}};
  const double ap = eval::average_precision(flags, 2);
  // Rank-by-rank: recall steps at ranks 1 and 3, each weighted by the best
  // precision at or after that rank.
  const double oracle = 0.5 * std::max({1.0, 0.5, 2.0 / 3.0, 0.5}) + 0.5 * std::max(2.0 / 3.0, 0.5);
  const bool ap_ok = std::abs(ap - 0.8333) <= 1e-4 && std::abs(ap - oracle) <= 1e-12;
  report(9, "metrics", prf_ok && ap_ok,
         fmt("P/R/F1(3,1,3)=(%.4f, %.4f, %.4f); AP=%.6f oracle=%.6f", prf.precision, prf.recall, prf.f1, ap, oracle));
}

void store_round_trip() {
  auto store = synth::random_store(4513, 1024, 4513);
  std::stringstream buf;
  store.save_snapshot(buf);
  const std::string text = buf.str();
  auto loaded = ReferenceStore::load_snapshot(buf, 1024);
  const auto before = loaded.records();
  const bool identical = before == store.records();

  std::mt19937_64 rng(4514);
  std::vector<std::vector<float>> probes;
  std::vector<Match> answers;
  for (int i = 0; i < 50; ++i) {
    probes.push_back(testing::random_direction(rng, 1024));
    answers.push_back(loaded.classify_frame(Embedding(probes.back())));
  }
  const auto novel = testing::random_direction(rng, 1024);
  const auto idx = loaded.insert(Embedding(novel), "wind turbine blade", "new/blade_01.png");
  const Match hit = loaded.classify_frame(Embedding(novel));
  const bool retrievable = hit.record_index == idx && hit.label == "wind turbine blade" &&
                           std::abs(hit.similarity - 1.0) < 1e-12;

  auto after = loaded.records();
  const bool appended = after.size() == before.size() + 1 && after.back().label == "wind turbine blade";
  after.pop_back();
  bool unchanged = after == before;
  const double novel_norm = norm(novel);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Match m = loaded.classify_frame(Embedding(probes[i]));
    const double to_novel = dot(std::span<const float>(probes[i]), std::span<const float>(novel)) /
                            (norm(probes[i]) * novel_norm);
    // A probe may switch only to the new record, and only if it is closer.
    unchanged = unchanged && ((m.record_index == answers[i].record_index && m.similarity == answers[i].similarity) ||
                              (m.record_index == idx && to_novel > answers[i].similarity));
  }
  std::stringstream again;
  loaded.save_snapshot(again);
  const std::string grown = again.str();
  const std::string body = text.substr(text.find('\n'));
  unchanged = unchanged && grown.find(body.substr(0, body.size())) != std::string::npos;

  const bool ok = identical && retrievable && appended && unchanged;
  report(10, "store round trip and extension", ok,
         fmt("records=%zu round_trip_identical=%s novel_label_rank1=%s existing_state_unchanged=%s",
             before.size(), identical ? "yes" : "no", retrievable ? "yes" : "no",
             appended && unchanged ? "yes" : "no"));
}

}  // namespace

int main() {
  crane_fixture();
  net_fixture();
  retrieval_latency();
  knn_oracle();
  gradient_check();
  triplet_zero_condition();
  majority_vote_robustness();
  synthetic_end_to_end();
  metrics();
  store_round_trip();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
