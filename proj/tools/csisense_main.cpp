// csisense command-line front end.
#include <CLI11.hpp>

#include <csisense/csisense.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace csisense;

struct DataSource {
  std::string in;
  std::string config;
};

struct CommonOptions {
  int case_id = 1;
  std::string antennas = "all";
  std::uint64_t seed = 1;
  std::string split = "reference";
  std::string scenario = "all";
  std::size_t window = 100;
};

std::optional<std::uint64_t> env_seed() {
  const char *s = std::getenv("CSISENSE_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos, 10);
    if (pos != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw StageError("args", std::string("CSISENSE_SEED is not an unsigned integer: '") + s + "'");
  }
}

template <typename T>
T staged(const char *stage, auto &&fn) {
  try {
    return fn();
  } catch (const StageError &) {
    throw;
  } catch (const std::exception &ex) {
    throw StageError(stage, ex.what());
  }
}

std::string read_text(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
  if (!f) throw IoError("write failed for '" + path + "'");
}

CorpusSpec load_corpus_spec(const std::string &path) {
  return staged<CorpusSpec>("config", [&] {
    auto spec = corpus_spec_from_json(nlohmann::json::parse(read_text(path)));
    if (auto s = env_seed()) spec.config.seed = *s;
    return spec;
  });
}

Dataset load_source(const DataSource &src) {
  if (src.in.empty() == src.config.empty()) throw StageError("args", "exactly one of --in or --config is required");
  if (!src.in.empty()) return staged<Dataset>("load", [&] { return load_dataset(std::filesystem::path(src.in)); });
  const auto spec = load_corpus_spec(src.config);
  return staged<Dataset>("generate", [&] { return generate_corpus(spec); });
}

/// "1,2,3" (one-based) or "all".
std::optional<std::vector<std::size_t>> parse_antennas(const std::string &s) {
  if (s == "all") return std::nullopt;
  std::vector<std::size_t> idx;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(tok, &pos);
    } catch (const std::exception &) {
      pos = 0;
    }
    if (pos == 0 || pos != tok.size() || v == 0)
      throw StageError("args", "bad antenna index '" + tok + "' (expected 1-based integers or 'all')");
    idx.push_back(v - 1);
  }
  if (idx.empty()) throw StageError("args", "empty antenna list");
  return idx;
}

std::vector<std::size_t> parse_counts(const std::string &s) {
  auto v = parse_antennas(s);
  if (!v) throw StageError("args", "--antenna-counts needs explicit numbers");
  for (auto &x : *v) ++x;
  return *v;
}

/// Reports out-of-range chains in the CLI's 1-based numbering.
void check_antennas(const Dataset &d, const std::vector<std::size_t> &idx) {
  for (const auto &e : d.experiments)
    for (auto i : idx)
      if (i >= e.csi.chains())
        throw StageError("select_antennas", "antenna " + std::to_string(i + 1) + " out of range (dataset has " +
                                                std::to_string(e.csi.chains()) + " chains)");
}

std::optional<std::vector<std::size_t>> antennas_for(const Dataset &d, const std::string &spec) {
  auto idx = parse_antennas(spec);
  if (idx) check_antennas(d, *idx);
  return idx;
}

std::vector<ModelKind> parse_models(const std::string &s) {
  if (s == "both") return {ModelKind::Svm, ModelKind::Nn};
  return {staged<ModelKind>("args", [&] { return parse_model_kind(s); })};
}

std::uint64_t effective_seed(const CommonOptions &o) { return env_seed().value_or(o.seed); }

CaseSpec case_of(const CommonOptions &o) {
  return staged<CaseSpec>("args", [&] { return builtin_case(o.case_id); });
}

RunOptions run_options(const CommonOptions &o) {
  return staged<RunOptions>("args", [&] {
    RunOptions r;
    r.split = parse_split_policy(o.split);
    if (o.scenario != "all") r.scenario = parse_scenario(o.scenario);
    r.window_len = o.window;
    return r;
  });
}

std::size_t antennas_used(const Dataset &d, const std::optional<std::vector<std::size_t>> &a) {
  if (a) return a->size();
  return d.experiments.empty() ? 0 : d.experiments.front().csi.chains();
}

std::string format_for(const std::string &path, const std::string &format) {
  if (!format.empty()) return format;
  if (path.size() >= 4 && (path.ends_with(".txt") || path.ends_with(".text"))) return "text";
  return "json";
}

void emit(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    staged<int>("report", [&] {
      write_text(path, text);
      return 0;
    });
}

void add_source(CLI::App *app, DataSource &src) {
  app->add_option("--in", src.in, "CSID dataset file");
  app->add_option("--config", src.config, "generator JSON config (dataset synthesized in memory)");
}

void add_common(CLI::App *app, CommonOptions &o) {
  app->add_option("--case", o.case_id, "case id (1, 2 or 3)");
  app->add_option("--antennas", o.antennas, "1-based chain indices, e.g. 1,2,3, or 'all'");
  app->add_option("--seed", o.seed, "run seed (CSISENSE_SEED overrides)");
  app->add_option("--split", o.split, "split policy: reference or proportional");
  app->add_option("--scenario", o.scenario, "LOS, NLOS or all");
  app->add_option("--window", o.window, "amplitude window length in snapshots");
}

nlohmann::json run_header(const CommonOptions &o, std::uint64_t seed) {
  return {{"case", o.case_id}, {"antennas", o.antennas}, {"seed", seed},
          {"split", o.split},  {"scenario", o.scenario}, {"window", o.window}};
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"csisense: moving-object classification from massive-MIMO CSI"};
  app.require_subcommand(1);

  DataSource src;
  CommonOptions co;
  std::string out, report, format, model_name = "svm", model_file, counts = "2,3,16";
  std::string out_amp, out_phase;
  std::size_t experiment = 0, n_seeds = 1, n_ablate_seeds = 5;

  auto *gen = app.add_subcommand("generate", "synthesize a labelled CSI corpus");
  gen->add_option("--config", src.config, "generator JSON config")->required();
  gen->add_option("--out", out, "output CSID file")->required();

  auto *pre = app.add_subcommand("preprocess", "dump preprocessed tensors of one experiment");
  add_source(pre, src);
  pre->add_option("--experiment", experiment, "0-based experiment index");
  pre->add_option("--antennas", co.antennas, "1-based chain indices or 'all'");
  pre->add_option("--out-amplitude", out_amp, "CSID file for the denoised amplitude");
  pre->add_option("--out-phase", out_phase, "CSID file for the unwrapped phase");

  auto *feat = app.add_subcommand("features", "extract feature vectors for a case");
  add_source(feat, src);
  add_common(feat, co);
  feat->add_option("--out", out, "output JSON (stdout when omitted)");

  auto *train = app.add_subcommand("train", "train a classifier on the case's training split");
  add_source(train, src);
  add_common(train, co);
  train->add_option("--model", model_name, "svm or nn");
  train->add_option("--out", out, "model JSON (stdout when omitted)");

  auto *eval = app.add_subcommand("eval", "evaluate a trained model on its test split");
  add_source(eval, src);
  eval->add_option("--model-file", model_file, "model JSON written by train")->required();
  eval->add_option("--report", report, "report path (.json or .txt; stdout when omitted)");
  eval->add_option("--format", format, "json or text");

  auto *run = app.add_subcommand("run", "end-to-end: split, train and evaluate");
  add_source(run, src);
  add_common(run, co);
  run->add_option("--model", model_name, "svm, nn or both");
  run->add_option("--seeds", n_seeds, "number of seeds starting at --seed");
  run->add_option("--report", report, "report path (.json or .txt; stdout when omitted)");
  run->add_option("--format", format, "json or text");

  auto *abl = app.add_subcommand("ablate", "accuracy versus number of antennas");
  add_source(abl, src);
  add_common(abl, co);
  abl->add_option("--antenna-counts", counts, "comma-separated chain counts");
  abl->add_option("--model", model_name, "svm, nn or both");
  abl->add_option("--seeds", n_ablate_seeds, "number of paired seeds starting at --seed")->capture_default_str();
  abl->add_option("--report", report, "report path (.json or .txt; stdout when omitted)");
  abl->add_option("--format", format, "json or text");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto spec = load_corpus_spec(src.config);
      const auto d = staged<Dataset>("generate", [&] { return generate_corpus(spec); });
      staged<int>("save", [&] {
        save_dataset(d, std::filesystem::path(out));
        return 0;
      });
      std::cerr << "wrote " << d.experiments.size() << " experiments to " << out << "\n";
    } else if (pre->parsed()) {
      const auto d = load_source(src);
      if (experiment >= d.experiments.size())
        throw StageError("args", "experiment index " + std::to_string(experiment) + " out of range");
      const auto &e = d.experiments[experiment];
      const auto ant = antennas_for(d, co.antennas);
      const CsiTensor t =
          staged<CsiTensor>("select_antennas", [&] { return ant ? select_antennas(e.csi, *ant) : e.csi; });
      const auto p = staged<Preprocessed>("preprocess", [&] { return preprocess(t); });
      const auto grid = staged<CsiTensor>("preprocess", [&] { return interpolate_uniform(t); });
      auto dump = [&](const std::string &path, std::span<const double> v) {
        if (path.empty()) return;
        std::vector<cplx> data(v.begin(), v.end());
        Dataset outd;
        std::vector<double> ts(grid.timestamps().begin(), grid.timestamps().end());
        outd.experiments.push_back(Experiment{
            CsiTensor(t.subcarriers(), t.chains(), t.snapshots(), std::move(ts), std::move(data)), e.label,
            e.scenario, e.seed});
        staged<int>("save", [&] {
          save_dataset(outd, std::filesystem::path(path));
          return 0;
        });
      };
      dump(out_amp, p.amplitude.values());
      dump(out_phase, p.phase.values());
    } else if (feat->parsed()) {
      const auto d = load_source(src);
      const auto spec = case_of(co);
      const auto opt = run_options(co);
      const auto fv = compute_features(d, antennas_for(d, co.antennas), feature_config_for(spec, opt));
      std::vector<FeatureRow> rows;
      for (std::size_t i = 0; i < d.experiments.size(); ++i) {
        const auto &e = d.experiments[i];
        if (!spec.label_of(e.label) || (opt.scenario && e.scenario != *opt.scenario)) continue;
        rows.push_back({e.label, e.scenario, fv[i].values});
      }
      emit(out, feature_rows_to_json(rows).dump(2) + "\n");
    } else if (train->parsed()) {
      const auto d = load_source(src);
      const auto spec = case_of(co);
      const auto opt = run_options(co);
      const auto kind = staged<ModelKind>("args", [&] { return parse_model_kind(model_name); });
      const auto seed = effective_seed(co);
      const auto ant = antennas_for(d, co.antennas);
      const auto fv = compute_features(d, ant, feature_config_for(spec, opt));
      const auto split =
          staged<Split>("split", [&] { return split_dataset(d, spec, seed, opt.split, opt.scenario); });
      TrainConfig tc = opt.train;
      tc.seed = seed;
      const auto model = staged<ClassifierModel>(
          "train", [&] { return train_model(kind, gather_rows(fv, split.train), split.train_labels, tc); });
      nlohmann::json j = run_header(co, seed);
      j["model"] = model_to_json(model);
      emit(out, j.dump(2) + "\n");
    } else if (eval->parsed()) {
      const auto d = load_source(src);
      const auto j = staged<nlohmann::json>("load", [&] { return nlohmann::json::parse(read_text(model_file)); });
      CommonOptions mo;
      ClassifierModel model;
      staged<int>("load", [&] {
        mo.case_id = j.at("case").get<int>();
        mo.antennas = j.at("antennas").get<std::string>();
        mo.seed = j.at("seed").get<std::uint64_t>();
        mo.split = j.at("split").get<std::string>();
        mo.scenario = j.at("scenario").get<std::string>();
        mo.window = j.at("window").get<std::size_t>();
        model = model_from_json(j.at("model"));
        return 0;
      });
      const auto spec = case_of(mo);
      const auto opt = run_options(mo);
      const auto ant = antennas_for(d, mo.antennas);
      const auto fv = compute_features(d, ant, feature_config_for(spec, opt));
      const auto split =
          staged<Split>("split", [&] { return split_dataset(d, spec, mo.seed, opt.split, opt.scenario); });
      const auto pred =
          staged<std::vector<int>>("evaluate", [&] { return predict(model, gather_rows(fv, split.test)); });
      RunReport r;
      r.case_id = spec.id;
      r.scenario = scenario_label(d, split, opt.scenario);
      r.model = kind_of(model);
      r.antennas = antennas_used(d, ant);
      r.confusion = confusion_matrix(split.test_labels, pred);
      r.accuracy = r.confusion.accuracy();
      r.seed = mo.seed;
      r.train_size = split.train.size();
      r.test_size = split.test.size();
      r.negative_label = event_set_name(spec.negative);
      r.positive_label = event_set_name(spec.positive);
      emit(report, staged<std::string>("report", [&] { return render_report(r, format_for(report, format)); }));
    } else if (run->parsed() || abl->parsed()) {
      const auto d = load_source(src);
      const auto spec = case_of(co);
      const auto opt = run_options(co);
      const auto kinds = parse_models(model_name);
      const std::size_t count = abl->parsed() ? n_ablate_seeds : n_seeds;
      if (count == 0) throw StageError("args", "--seeds must be positive");
      const auto seeds = seed_sequence(effective_seed(co), count);
      std::vector<RunReport> runs;
      if (abl->parsed()) {
        const auto ks = parse_counts(counts);
        for (auto k : ks) check_antennas(d, first_antennas(k));
        runs = ablate(d, spec, kinds, ks, seeds, opt);
      } else {
        const auto ant = antennas_for(d, co.antennas);
        runs = run_many(d, spec, kinds, ant, seeds, opt);
      }
      const auto fmt = format_for(report, format);
      std::string text;
      if (runs.size() == 1)
        text = staged<std::string>("report", [&] { return render_report(runs.front(), fmt); });
      else if (fmt == "json")
        text = runs_to_json(runs).dump(2) + "\n";
      else if (fmt == "text" || fmt == "txt")
        text = runs_to_text(runs);
      else
        throw StageError("report", "unknown report format '" + fmt + "' (expected json or text)");
      emit(report, text);
    }
  } catch (const StageError &ex) {
    std::cerr << "csisense: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception &ex) {
    std::cerr << "csisense: [internal] " << ex.what() << "\n";
    return 3;
  }
  return 0;
}
