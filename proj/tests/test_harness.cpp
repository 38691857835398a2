#include <gtest/gtest.h>

#include <csisense/csisense.hpp>

#include <set>

using namespace csisense;

namespace {

Dataset tiny_corpus(std::size_t per_event, std::uint64_t seed = 1) {
  CorpusSpec spec;
  spec.config.F = 2;
  spec.config.M = 2;
  spec.config.N = 16;
  spec.config.seed = seed;
  spec.counts.fill(per_event);
  return generate_corpus(spec);
}

std::array<std::size_t, 2> side_counts(const std::vector<int> &labels) {
  std::array<std::size_t, 2> c{};
  for (int v : labels) ++c[static_cast<std::size_t>(v)];
  return c;
}

}  // namespace

TEST(Split, ReproducesReferenceMargins) {
  const auto d = tiny_corpus(18);
  const std::array<std::array<std::size_t, 2>, 3> expected{{{5, 13}, {8, 3}, {11, 4}}};
  for (int id = 1; id <= 3; ++id)
    for (std::uint64_t seed : {1u, 2u, 99u}) {
      const auto s = split_dataset(d, builtin_case(id), seed);
      EXPECT_EQ(side_counts(s.test_labels), expected[static_cast<std::size_t>(id - 1)]) << "case " << id;
    }
}

TEST(Split, PartitionsTheCaseSubset) {
  const auto d = tiny_corpus(18);
  for (int id = 1; id <= 3; ++id)
    for (auto policy : {SplitPolicy::ReferenceMargins, SplitPolicy::Proportional}) {
      const auto spec = builtin_case(id);
      const auto s = split_dataset(d, spec, 7, policy);
      std::set<std::size_t> train(s.train.begin(), s.train.end()), test(s.test.begin(), s.test.end());
      for (auto i : test) EXPECT_FALSE(train.count(i));
      std::size_t in_case = 0;
      for (const auto &e : d.experiments) in_case += spec.label_of(e.label).has_value();
      EXPECT_EQ(train.size() + test.size(), in_case);
      for (std::size_t k = 0; k < s.test.size(); ++k)
        EXPECT_EQ(s.test_labels[k], *spec.label_of(d.experiments[s.test[k]].label));
    }
}

TEST(Split, ProportionalIsStratifiedPerEvent) {
  const auto d = tiny_corpus(40);
  const auto s = split_dataset(d, builtin_case(1), 3, SplitPolicy::Proportional);
  std::array<int, 5> per{};
  for (auto i : s.test) ++per[static_cast<std::size_t>(event_number(d.experiments[i].label) - 1)];
  for (int c : per) EXPECT_EQ(c, 8);
  EXPECT_EQ(s.train.size(), 160u);
}

TEST(Split, SeedControlsShuffle) {
  const auto d = tiny_corpus(18);
  EXPECT_EQ(split_dataset(d, builtin_case(1), 4).test, split_dataset(d, builtin_case(1), 4).test);
  EXPECT_NE(split_dataset(d, builtin_case(1), 4).test, split_dataset(d, builtin_case(1), 5).test);
}

TEST(Split, ErrorsOnMissingSide) {
  auto d = tiny_corpus(1);
  EXPECT_THROW(split_dataset(d, builtin_case(2), 1), ArgumentError);
  EXPECT_THROW(split_dataset(d, builtin_case(1), 1, SplitPolicy::ReferenceMargins, Scenario::Nlos), ArgumentError);
  CaseSpec bad = builtin_case(1);
  bad.negative.push_back(Event::V2);
  EXPECT_THROW(split_dataset(tiny_corpus(4), bad, 1), ArgumentError);
  EXPECT_THROW(builtin_case(4), ArgumentError);
}

TEST(Confusion, BasicCases) {
  const std::vector<int> t{0, 1, 1};
  const auto cm = confusion_matrix(t, t);
  EXPECT_EQ(cm.counts[0][0], 1u);
  EXPECT_EQ(cm.counts[1][1], 2u);
  EXPECT_EQ(cm.counts[0][1] + cm.counts[1][0], 0u);
  const std::vector<int> wrong{1, 0, 0};
  const auto anti = confusion_matrix(t, wrong);
  EXPECT_EQ(anti.counts[0][1], 1u);
  EXPECT_EQ(anti.counts[1][0], 2u);
  EXPECT_EQ(anti.accuracy(), 0.0);
}

TEST(Confusion, ReferenceLayout) {
  std::vector<int> y(11, 0);
  std::fill(y.begin() + 8, y.end(), 1);
  const auto cm = confusion_matrix(y, y);
  EXPECT_EQ(cm.counts[0][0], 8u);
  EXPECT_EQ(cm.counts[0][1], 0u);
  EXPECT_EQ(cm.counts[1][0], 0u);
  EXPECT_EQ(cm.counts[1][1], 3u);
}

TEST(Confusion, AccuracyMatchesDirectMean) {
  rng::Engine eng(5);
  std::vector<int> a(37), b(37);
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = static_cast<int>(rng::below(eng, 2));
    b[i] = static_cast<int>(rng::below(eng, 2));
    same += a[i] == b[i];
  }
  const auto cm = confusion_matrix(a, b);
  EXPECT_EQ(cm.total(), 37u);
  EXPECT_DOUBLE_EQ(cm.accuracy(), static_cast<double>(same) / 37.0);
}

TEST(Confusion, Errors) {
  const std::vector<int> a{0, 1}, b{0}, c{0, 2};
  EXPECT_THROW(confusion_matrix(a, b), ArgumentError);
  EXPECT_THROW(confusion_matrix(a, c), ArgumentError);
}

TEST(Report, JsonHasAllFieldsAndRoundTrips) {
  RunReport r;
  r.case_id = 2;
  r.scenario = "NLOS";
  r.model = ModelKind::Nn;
  r.antennas = 3;
  r.confusion.counts = {{{8, 0}, {1, 2}}};
  r.accuracy = r.confusion.accuracy();
  r.seed = 12;
  r.train_size = 25;
  r.test_size = 11;
  r.negative_label = "{v3}";
  r.positive_label = "{v2}";
  const auto text = render_report(r, "json");
  const auto j = ojson::parse(text);
  for (const char *k : {"case", "scenario", "model", "antennas", "accuracy", "confusion", "labels", "seed",
                        "train_size", "test_size"})
    EXPECT_TRUE(j.contains(k)) << k;
  const auto back = report_from_json(j);
  EXPECT_EQ(back, r);
  EXPECT_EQ(render_report(back, "json"), text);
}

TEST(Report, TextHasLabelledTable) {
  RunReport r;
  r.negative_label = "{v1}";
  r.positive_label = "{v2,v3,v4,v5}";
  r.confusion.counts = {{{5, 0}, {1, 12}}};
  const auto text = render_report(r, "text");
  EXPECT_NE(text.find("{v1}"), std::string::npos);
  EXPECT_NE(text.find("{v2,v3,v4,v5}"), std::string::npos);
  EXPECT_NE(text.find("true\\pred"), std::string::npos);
  EXPECT_NE(text.find("12"), std::string::npos);
  EXPECT_THROW(render_report(r, "xml"), ArgumentError);
  EXPECT_THROW(report_from_json(ojson{{"case", 1}}), FormatError);
}

TEST(Run, PerfectSeparationOnCleanData) {
  CorpusSpec spec;
  spec.config.F = 6;
  spec.config.M = 8;
  spec.config.N = 200;
  spec.config.noise_std = 0.0;
  spec.config.seed = 3;
  const auto d = generate_corpus(spec);
  const auto r = run_case(d, builtin_case(1), ModelKind::Svm, std::nullopt, 1);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.confusion.counts[0][1] + r.confusion.counts[1][0], 0u);
  EXPECT_EQ(r.confusion.total(), r.test_size);
  EXPECT_EQ(r.test_size, 18u);
  EXPECT_EQ(r.antennas, 8u);
}

TEST(Run, DeterministicAndStageTagged) {
  CorpusSpec spec;
  spec.config.F = 4;
  spec.config.M = 4;
  spec.config.N = 200;
  spec.counts = {6, 6, 6, 6, 6};
  const auto d = generate_corpus(spec);
  const auto a = run_case(d, builtin_case(3), ModelKind::Nn, first_antennas(3), 5);
  const auto b = run_case(d, builtin_case(3), ModelKind::Nn, first_antennas(3), 5);
  EXPECT_EQ(a, b);
  try {
    run_case(d, builtin_case(1), ModelKind::Svm, std::vector<std::size_t>{9}, 1);
    FAIL() << "expected StageError";
  } catch (const StageError &e) {
    EXPECT_EQ(e.stage(), "select_antennas");
  }
  RunOptions opt;
  opt.window_len = 500;
  try {
    run_case(d, builtin_case(1), ModelKind::Svm, std::nullopt, 1, opt);
    FAIL() << "expected StageError";
  } catch (const StageError &e) {
    EXPECT_EQ(e.stage(), "features");
  }
}

TEST(Run, AblationPairsSeedsAcrossCounts) {
  CorpusSpec spec;
  spec.config.F = 4;
  spec.config.M = 6;
  spec.config.N = 200;
  spec.counts = {6, 6, 6, 6, 6};
  const auto d = generate_corpus(spec);
  const auto runs = ablate(d, builtin_case(1), {ModelKind::Svm}, {2, 6}, seed_sequence(1, 3));
  ASSERT_EQ(runs.size(), 6u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(runs[i].antennas, 2u);
    EXPECT_EQ(runs[i + 3].antennas, 6u);
    EXPECT_EQ(runs[i].seed, runs[i + 3].seed);
    EXPECT_EQ(runs[i].test_size, runs[i + 3].test_size);
  }
  const auto j = runs_to_json(runs);
  EXPECT_EQ(j["summary"].size(), 2u);
  EXPECT_EQ(j["summary"][0]["runs"], 3);
}
