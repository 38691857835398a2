#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "csisense/csi_tensor.hpp"
#include "csisense/error.hpp"
#include "csisense/features.hpp"
#include "csisense/linalg.hpp"
#include "csisense/models.hpp"
#include "csisense/random.hpp"

namespace csisense {

// ---------------------------------------------------------------------------
// Classification cases
// ---------------------------------------------------------------------------

/// How split_dataset sizes the test set.
enum class SplitPolicy {
  /// Every event contributes round(count * (1 - train_fraction)) test items,
  /// exact halves going to the training side.
  Proportional,
  /// Each label side uses the test share observed in the reference protocol
  /// (reference_test_counts out of reference_per_event captures per event).
  ReferenceMargins,
};

inline std::string split_policy_name(SplitPolicy p) {
  return p == SplitPolicy::Proportional ? "proportional" : "reference";
}

inline SplitPolicy parse_split_policy(const std::string &s) {
  if (s == "proportional") return SplitPolicy::Proportional;
  if (s == "reference") return SplitPolicy::ReferenceMargins;
  throw ArgumentError("unknown split policy '" + s + "' (expected proportional or reference)");
}

struct CaseSpec {
  int id = 1;
  std::vector<Event> positive;  // label 1
  std::vector<Event> negative;  // label 0
  double train_fraction = 0.8;
  std::size_t k_a = 6;
  std::size_t k_p = 6;
  /// Test items per side {negative, positive} in the reference protocol.
  std::optional<std::array<std::size_t, 2>> reference_test_counts;
  std::size_t reference_per_event = 18;

  void validate() const {
    if (positive.empty() || negative.empty()) throw ArgumentError("CaseSpec: event sets must be non-empty");
    for (Event p : positive)
      if (std::find(negative.begin(), negative.end(), p) != negative.end())
        throw ArgumentError("CaseSpec: event sets must be disjoint");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw ArgumentError("CaseSpec: train_fraction must lie in (0, 1)");
  }

  /// 1 for positive events, 0 for negative, empty for events outside the case.
  [[nodiscard]] std::optional<int> label_of(Event e) const {
    if (std::find(positive.begin(), positive.end(), e) != positive.end()) return 1;
    if (std::find(negative.begin(), negative.end(), e) != negative.end()) return 0;
    return std::nullopt;
  }
};

inline std::string event_set_name(const std::vector<Event> &events) {
  std::string s = "{";
  for (std::size_t i = 0; i < events.size(); ++i) s += (i ? "," : "") + event_name(events[i]);
  return s + "}";
}

/// The three classification cases: static vs dynamic, human vs wheel,
/// human vs all non-human motion.
inline CaseSpec builtin_case(int id) {
  switch (id) {
    case 1:
      return {1, {Event::V2, Event::V3, Event::V4, Event::V5}, {Event::V1}, 0.8, 6, 6,
              std::array<std::size_t, 2>{5, 13}, 18};
    case 2:
      return {2, {Event::V2}, {Event::V3}, 0.7, 2, 2, std::array<std::size_t, 2>{8, 3}, 18};
    case 3:
      return {3, {Event::V2}, {Event::V3, Event::V4, Event::V5}, 0.8, 6, 6,
              std::array<std::size_t, 2>{11, 4}, 18};
    default:
      throw ArgumentError("unknown case id " + std::to_string(id) + " (expected 1, 2 or 3)");
  }
}

// ---------------------------------------------------------------------------
// Stratified split
// ---------------------------------------------------------------------------

/// Indices into the dataset plus their binary labels.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<int> train_labels;
  std::vector<int> test_labels;
};

namespace detail {

/// Nearest integer, exact halves rounded down (towards the training side).
inline std::size_t round_half_down(double x) {
  return static_cast<std::size_t>(std::max(0.0, std::ceil(x - 0.5 - 1e-9)));
}

/// Splits `total` across buckets proportionally to `weights` (largest
/// remainder, ties to the earlier bucket).
inline std::vector<std::size_t> apportion(std::size_t total, const std::vector<std::size_t> &weights) {
  std::size_t sum = 0;
  for (auto w : weights) sum += w;
  std::vector<std::size_t> out(weights.size(), 0);
  if (sum == 0) return out;
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t given = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double q = static_cast<double>(total) * static_cast<double>(weights[i]) / static_cast<double>(sum);
    out[i] = std::min(weights[i], static_cast<std::size_t>(std::floor(q + 1e-9)));
    given += out[i];
    rem.emplace_back(q - static_cast<double>(out[i]), i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto &a, const auto &b) { return a.first > b.first; });
  for (std::size_t k = 0; given < total && k < rem.size() * 2; ++k) {
    const std::size_t i = rem[k % rem.size()].second;
    if (out[i] < weights[i]) {
      ++out[i];
      ++given;
    }
  }
  return out;
}

}  // namespace detail

/// Stratified train/test split over the experiments whose events belong to
/// the case (optionally restricted to one scenario). Each event's experiments
/// are shuffled with a seeded stream and the first test_count of them go to
/// the test set. Every label side keeps at least one item on each side of the
/// split.
inline Split split_dataset(const Dataset &d, const CaseSpec &spec, std::uint64_t seed,
                           SplitPolicy policy = SplitPolicy::ReferenceMargins,
                           std::optional<Scenario> scenario = std::nullopt) {
  spec.validate();
  std::array<std::vector<std::size_t>, 5> by_event;
  for (std::size_t i = 0; i < d.experiments.size(); ++i) {
    const auto &e = d.experiments[i];
    if (scenario && e.scenario != *scenario) continue;
    if (spec.label_of(e.label)) by_event[static_cast<std::size_t>(event_number(e.label) - 1)].push_back(i);
  }

  std::array<std::size_t, 5> test_count{};
  for (int side = 0; side < 2; ++side) {
    const auto &events = side == 0 ? spec.negative : spec.positive;
    std::vector<std::size_t> counts;
    std::size_t side_total = 0;
    for (Event e : events) {
      counts.push_back(by_event[static_cast<std::size_t>(event_number(e) - 1)].size());
      side_total += counts.back();
    }
    if (side_total < 2)
      throw ArgumentError("split_dataset: case " + std::to_string(spec.id) + " needs at least 2 experiments of " +
                          event_set_name(events) + ", found " + std::to_string(side_total));

    std::vector<std::size_t> per_event(events.size());
    if (policy == SplitPolicy::ReferenceMargins && spec.reference_test_counts) {
      const double share = static_cast<double>((*spec.reference_test_counts)[static_cast<std::size_t>(side)]) /
                           static_cast<double>(spec.reference_per_event * events.size());
      const std::size_t side_test = detail::round_half_down(static_cast<double>(side_total) * share);
      per_event = detail::apportion(std::clamp<std::size_t>(side_test, 1, side_total - 1), counts);
    } else {
      std::size_t side_test = 0;
      for (std::size_t k = 0; k < events.size(); ++k) {
        per_event[k] = detail::round_half_down(static_cast<double>(counts[k]) * (1.0 - spec.train_fraction));
        side_test += per_event[k];
      }
      // Keep both sides of the split populated.
      const auto largest = static_cast<std::size_t>(
          std::distance(counts.begin(), std::max_element(counts.begin(), counts.end())));
      if (side_test == 0) ++per_event[largest];
      if (side_test == side_total) --per_event[largest];
    }
    for (std::size_t k = 0; k < events.size(); ++k)
      test_count[static_cast<std::size_t>(event_number(events[k]) - 1)] = per_event[k];
  }

  Split s;
  for (std::size_t e = 0; e < 5; ++e) {
    auto idx = by_event[e];
    if (idx.empty()) continue;
    rng::Engine eng(rng::derive_seed(seed, 0x5011 + e));
    rng::shuffle<std::size_t>(idx, eng);
    for (std::size_t k = 0; k < idx.size(); ++k) (k < test_count[e] ? s.test : s.train).push_back(idx[k]);
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  for (auto i : s.train) s.train_labels.push_back(*spec.label_of(d.experiments[i].label));
  for (auto i : s.test) s.test_labels.push_back(*spec.label_of(d.experiments[i].label));
  return s;
}

// ---------------------------------------------------------------------------
// Confusion matrix and reports
// ---------------------------------------------------------------------------

/// counts[i][j] = number of items with true label i predicted as j.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 2>, 2> counts{};

  [[nodiscard]] std::size_t total() const {
    return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
  }
  [[nodiscard]] double accuracy() const {
    const auto t = total();
    return t == 0 ? 0.0 : static_cast<double>(counts[0][0] + counts[1][1]) / static_cast<double>(t);
  }

  friend bool operator==(const ConfusionMatrix &, const ConfusionMatrix &) = default;
};

inline ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size())
    throw ArgumentError("confusion_matrix: length mismatch (" + std::to_string(y_true.size()) + " vs " +
                        std::to_string(y_pred.size()) + ")");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] > 1 || y_pred[i] < 0 || y_pred[i] > 1)
      throw ArgumentError("confusion_matrix: labels must be 0 or 1");
    ++cm.counts[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
  }
  return cm;
}

struct RunReport {
  int case_id = 1;
  std::string scenario = "LOS";  // LOS, NLOS or mixed
  ModelKind model = ModelKind::Svm;
  std::size_t antennas = 0;      // number of RF chains used
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  std::uint64_t seed = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::string negative_label = "{}";  // row/column 0
  std::string positive_label = "{}";  // row/column 1

  friend bool operator==(const RunReport &, const RunReport &) = default;
};

using ojson = nlohmann::ordered_json;

inline ojson report_to_json(const RunReport &r) {
  const auto &c = r.confusion.counts;
  return ojson{{"case", r.case_id},
               {"scenario", r.scenario},
               {"model", model_kind_name(r.model)},
               {"antennas", r.antennas},
               {"accuracy", r.accuracy},
               {"confusion", {{c[0][0], c[0][1]}, {c[1][0], c[1][1]}}},
               {"labels", {r.negative_label, r.positive_label}},
               {"seed", r.seed},
               {"train_size", r.train_size},
               {"test_size", r.test_size}};
}

inline RunReport report_from_json(const ojson &j) {
  try {
    RunReport r;
    r.case_id = j.at("case").get<int>();
    r.scenario = j.at("scenario").get<std::string>();
    r.model = parse_model_kind(j.at("model").get<std::string>());
    r.antennas = j.at("antennas").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    const auto &c = j.at("confusion");
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t k = 0; k < 2; ++k) r.confusion.counts[i][k] = c.at(i).at(k).get<std::size_t>();
    r.negative_label = j.at("labels").at(0).get<std::string>();
    r.positive_label = j.at("labels").at(1).get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.train_size = j.at("train_size").get<std::size_t>();
    r.test_size = j.at("test_size").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception &ex) {
    throw FormatError(std::string("run report: ") + ex.what());
  }
}

/// Human-readable rendering with the confusion table labelled by event sets.
inline std::string report_to_text(const RunReport &r) {
  std::ostringstream os;
  const auto &c = r.confusion.counts;
  const std::size_t w = std::max<std::size_t>({r.negative_label.size(), r.positive_label.size(), 10}) + 2;
  os << "case " << r.case_id << "  scenario " << r.scenario << "  model " << model_kind_name(r.model)
     << "  M=" << r.antennas << "  seed " << r.seed << "\n";
  os << "train " << r.train_size << "  test " << r.test_size << "  accuracy " << std::fixed
     << std::setprecision(4) << r.accuracy << "\n";
  os << std::left << std::setw(static_cast<int>(w)) << "true\\pred" << std::setw(static_cast<int>(w))
     << r.negative_label << std::setw(static_cast<int>(w)) << r.positive_label << "\n";
  os << std::setw(static_cast<int>(w)) << r.negative_label << std::setw(static_cast<int>(w)) << c[0][0]
     << std::setw(static_cast<int>(w)) << c[0][1] << "\n";
  os << std::setw(static_cast<int>(w)) << r.positive_label << std::setw(static_cast<int>(w)) << c[1][0]
     << std::setw(static_cast<int>(w)) << c[1][1] << "\n";
  return os.str();
}

/// format is "json" or "text".
inline std::string render_report(const RunReport &r, const std::string &format) {
  if (format == "json") return report_to_json(r).dump(2) + "\n";
  if (format == "text" || format == "txt") return report_to_text(r);
  throw ArgumentError("unknown report format '" + format + "' (expected json or text)");
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

/// Feature vectors for every experiment, computed on the chosen antenna
/// subset. Experiments are processed concurrently; results and the first
/// error (by experiment index) are deterministic.
inline std::vector<FeatureVector> compute_features(const Dataset &d,
                                                   const std::optional<std::vector<std::size_t>> &antennas,
                                                   const FeatureConfig &cfg, unsigned threads = 0) {
  const std::size_t n = d.experiments.size();
  std::vector<FeatureVector> out(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t i) {
    const auto &e = d.experiments[i];
    const std::string tag = " (experiment " + std::to_string(i) + ")";
    std::string stage = "select_antennas";
    try {
      const CsiTensor t = antennas ? select_antennas(e.csi, *antennas) : e.csi;
      stage = "preprocess";
      const auto pre = preprocess(t, cfg.denoise);
      stage = "features";
      const auto amp = extract_amplitude(pre.amplitude, cfg.window);
      const std::size_t avail = available_phase_features(t.chains(), cfg.window.k_p);
      PhaseFeature ph;
      if (avail > 0) ph = extract_phase(pre.phase, avail);
      ph.values.resize(cfg.window.k_p, 0.0);
      out[i] = build_feature_vector(amp, ph, cfg.window.k_a, cfg.window.k_p);
    } catch (const std::exception &ex) {
      errors[i] = std::make_exception_ptr(StageError(stage, ex.what() + tag));
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < n; i += threads) work(i);
      });
  }
  for (const auto &ep : errors)
    if (ep) std::rethrow_exception(ep);
  return out;
}

struct RunOptions {
  SplitPolicy split = SplitPolicy::ReferenceMargins;
  std::optional<Scenario> scenario;
  TrainConfig train;  // train.seed is replaced by the run seed
  std::size_t window_len = 100;
};

inline FeatureConfig feature_config_for(const CaseSpec &spec, const RunOptions &opt) {
  FeatureConfig fc;
  fc.window.window_len = opt.window_len;
  fc.window.k_a = spec.k_a;
  fc.window.k_p = spec.k_p;
  return fc;
}

inline Matrix gather_rows(const std::vector<FeatureVector> &features, const std::vector<std::size_t> &idx) {
  const std::size_t dim = idx.empty() ? 0 : features[idx.front()].size();
  Matrix X(idx.size(), dim);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto &v = features[idx[r]].values;
    std::copy(v.begin(), v.end(), X.row(r).begin());
  }
  return X;
}

inline std::string scenario_label(const Dataset &d, const Split &s, const std::optional<Scenario> &filter) {
  if (filter) return scenario_name(*filter);
  std::optional<Scenario> seen;
  for (const auto *set : {&s.train, &s.test})
    for (auto i : *set) {
      const auto sc = d.experiments[i].scenario;
      if (seen && *seen != sc) return "mixed";
      seen = sc;
    }
  return seen ? scenario_name(*seen) : "mixed";
}

/// Split, train and evaluate on precomputed features (one per experiment).
inline RunReport run_case_on_features(const Dataset &d, const std::vector<FeatureVector> &features,
                                      const CaseSpec &spec, ModelKind kind, std::size_t antennas_used,
                                      std::uint64_t seed, const RunOptions &opt = {}) {
  Split split;
  try {
    split = split_dataset(d, spec, seed, opt.split, opt.scenario);
  } catch (const std::exception &ex) {
    throw StageError("split", ex.what());
  }
  const Matrix Xtr = gather_rows(features, split.train);
  const Matrix Xte = gather_rows(features, split.test);
  TrainConfig tc = opt.train;
  tc.seed = seed;
  ClassifierModel model;
  try {
    model = train_model(kind, Xtr, split.train_labels, tc);
  } catch (const std::exception &ex) {
    throw StageError("train", ex.what());
  }
  std::vector<int> pred;
  try {
    pred = predict(model, Xte);
  } catch (const std::exception &ex) {
    throw StageError("evaluate", ex.what());
  }
  RunReport r;
  r.case_id = spec.id;
  r.scenario = scenario_label(d, split, opt.scenario);
  r.model = kind;
  r.antennas = antennas_used;
  r.confusion = confusion_matrix(split.test_labels, pred);
  r.accuracy = r.confusion.accuracy();
  r.seed = seed;
  r.train_size = split.train.size();
  r.test_size = split.test.size();
  r.negative_label = event_set_name(spec.negative);
  r.positive_label = event_set_name(spec.positive);
  return r;
}

/// select_antennas -> interpolate -> (denoise, amplitude features) and
/// (unwrap, phase features) -> standardize -> train -> evaluate.
/// `antennas` empty means all chains.
inline RunReport run_case(const Dataset &d, const CaseSpec &spec, ModelKind kind,
                          const std::optional<std::vector<std::size_t>> &antennas, std::uint64_t seed,
                          const RunOptions &opt = {}) {
  if (d.experiments.empty()) throw StageError("split", "dataset is empty");
  const auto features = compute_features(d, antennas, feature_config_for(spec, opt));
  const std::size_t M = antennas ? antennas->size() : d.experiments.front().csi.chains();
  return run_case_on_features(d, features, spec, kind, M, seed, opt);
}

struct AccuracySummary {
  ModelKind model = ModelKind::Svm;
  std::size_t antennas = 0;
  std::vector<double> accuracies;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run
};

inline AccuracySummary summarize(ModelKind kind, std::size_t antennas, const std::vector<RunReport> &runs) {
  AccuracySummary s{kind, antennas, {}, 0.0, 0.0};
  for (const auto &r : runs)
    if (r.model == kind && r.antennas == antennas) s.accuracies.push_back(r.accuracy);
  if (s.accuracies.empty()) return s;
  for (double a : s.accuracies) s.mean += a;
  s.mean /= static_cast<double>(s.accuracies.size());
  if (s.accuracies.size() > 1) {
    double ss = 0.0;
    for (double a : s.accuracies) ss += (a - s.mean) * (a - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.accuracies.size() - 1));
  }
  return s;
}

/// Seeds used by multi-seed runs: base, base+1, ...
inline std::vector<std::uint64_t> seed_sequence(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = base + i;
  return s;
}

/// Runs every (model, seed) pair on a shared feature set.
inline std::vector<RunReport> run_many(const Dataset &d, const CaseSpec &spec, const std::vector<ModelKind> &kinds,
                                       const std::optional<std::vector<std::size_t>> &antennas,
                                       const std::vector<std::uint64_t> &seeds, const RunOptions &opt = {}) {
  if (d.experiments.empty()) throw StageError("split", "dataset is empty");
  const auto features = compute_features(d, antennas, feature_config_for(spec, opt));
  const std::size_t M = antennas ? antennas->size() : d.experiments.front().csi.chains();
  std::vector<RunReport> out;
  for (auto kind : kinds)
    for (auto seed : seeds) out.push_back(run_case_on_features(d, features, spec, kind, M, seed, opt));
  return out;
}

inline ojson summary_to_json(const AccuracySummary &s) {
  return ojson{{"model", model_kind_name(s.model)},
               {"antennas", s.antennas},
               {"runs", s.accuracies.size()},
               {"mean_accuracy", s.mean},
               {"std_accuracy", s.stddev},
               {"accuracies", s.accuracies}};
}

/// {"runs": [...], "summary": [...]} for a batch of runs.
inline ojson runs_to_json(const std::vector<RunReport> &runs) {
  ojson j{{"runs", ojson::array()}, {"summary", ojson::array()}};
  std::vector<std::pair<ModelKind, std::size_t>> groups;
  for (const auto &r : runs) {
    j["runs"].push_back(report_to_json(r));
    const std::pair g{r.model, r.antennas};
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  for (const auto &[kind, m] : groups) j["summary"].push_back(summary_to_json(summarize(kind, m, runs)));
  return j;
}

inline std::string runs_to_text(const std::vector<RunReport> &runs) {
  std::ostringstream os;
  std::vector<std::pair<ModelKind, std::size_t>> groups;
  for (const auto &r : runs) {
    os << report_to_text(r) << "\n";
    const std::pair g{r.model, r.antennas};
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  for (const auto &[kind, m] : groups) {
    const auto s = summarize(kind, m, runs);
    os << model_kind_name(kind) << " M=" << m << ": mean accuracy " << std::fixed << std::setprecision(4)
       << s.mean << " +- " << s.stddev << " over " << s.accuracies.size() << " run(s)\n";
  }
  return os.str();
}

/// Antenna-count ablation: for each count k the first k chains are used and
/// every (model, seed) pair is evaluated with the same seeds, so splits are
/// paired across counts.
inline std::vector<RunReport> ablate(const Dataset &d, const CaseSpec &spec, const std::vector<ModelKind> &kinds,
                                     const std::vector<std::size_t> &antenna_counts,
                                     const std::vector<std::uint64_t> &seeds, const RunOptions &opt = {}) {
  std::vector<RunReport> out;
  for (std::size_t k : antenna_counts) {
    auto runs = run_many(d, spec, kinds, first_antennas(k), seeds, opt);
    out.insert(out.end(), runs.begin(), runs.end());
  }
  return out;
}

}  // namespace csisense
