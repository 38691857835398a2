#pragma once

// Synthetic CSI generator.
//
//   Y_f(m, n) = H_f(m, n) * d_m * exp(j(alpha_m - n * eps_{m,f})) + noise
//
// H_f is a sum of complex paths. Every path p has a gain g_p, a delay tau_p,
// a per-chain phase psi_{p,m} and a Doppler frequency nu_p:
//
//   H_f(m, n) = sum_p g_p exp(j(psi_{p,m} - 2 pi f df tau_p + 2 pi nu_p t_n))
//
// The path set is a direct path (strong in LOS, weak in NLOS), a few static
// room reflections, and the event's own paths of which a fraction move with
// Doppler drawn uniformly in [-doppler_spread, +doppler_spread].

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csisense/csi_tensor.hpp"
#include "csisense/error.hpp"
#include "csisense/random.hpp"

namespace csisense {

/// Per-chain RF response: amplitude scaling d_m, initial phase alpha_m and
/// per-(chain, subcarrier) CFO phase step eps_{m,f} in rad/snapshot.
struct RfChainParams {
  std::vector<double> gain;          // size M
  std::vector<double> phase_offset;  // size M
  std::vector<double> cfo;           // size M*F, index m*F + f

  [[nodiscard]] double cfo_at(std::size_t m, std::size_t f, std::size_t F) const {
    return cfo[m * F + f];
  }

  void validate(std::size_t F, std::size_t M) const {
    if (gain.size() != M || phase_offset.size() != M)
      throw ArgumentError("RfChainParams: gain/phase_offset length must equal M=" + std::to_string(M));
    if (cfo.size() != M * F) throw ArgumentError("RfChainParams: cfo length must equal M*F");
    for (double d : gain)
      if (!std::isfinite(d) || d <= 0.0) throw ArgumentError("RfChainParams: gain must be finite and > 0");
    for (double a : phase_offset)
      if (!std::isfinite(a)) throw ArgumentError("RfChainParams: non-finite phase offset");
    for (double e : cfo)
      if (!std::isfinite(e)) throw ArgumentError("RfChainParams: non-finite cfo");
  }

  friend bool operator==(const RfChainParams &, const RfChainParams &) = default;
};

/// d = 1, alpha = 0, eps = 0.
inline RfChainParams ideal_rf_params(std::size_t F, std::size_t M) {
  return {std::vector<double>(M, 1.0), std::vector<double>(M, 0.0), std::vector<double>(M * F, 0.0)};
}

/// d ~ U[0.5, 2], alpha ~ U[-pi, pi), eps ~ U[-0.05, 0.05].
inline RfChainParams draw_rf_params(std::size_t F, std::size_t M, std::uint64_t seed) {
  rng::Engine eng(seed);
  RfChainParams rf;
  rf.gain.resize(M);
  rf.phase_offset.resize(M);
  rf.cfo.resize(M * F);
  for (auto &d : rf.gain) d = rng::uniform(eng, 0.5, 2.0);
  for (auto &a : rf.phase_offset) a = rng::uniform(eng, -std::numbers::pi, std::numbers::pi);
  for (auto &e : rf.cfo) e = rng::uniform(eng, -0.05, 0.05);
  return rf;
}

struct EventProfile {
  Event event = Event::V1;
  std::size_t num_paths = 1;
  double doppler_spread = 0.0;   // Hz
  double path_gain_decay = 0.8;  // gain ratio between consecutive event paths
  double motion_richness = 0.0;  // fraction of event paths that move, in [0, 1]
  double gain = 0.5;             // amplitude of the strongest event path

  void validate() const {
    if (num_paths < 1) throw ArgumentError("EventProfile: num_paths must be >= 1");
    if (event == Event::V1 && doppler_spread != 0.0)
      throw ArgumentError("EventProfile: static event v1 requires doppler_spread = 0");
    if (!(doppler_spread >= 0.0) || !std::isfinite(doppler_spread))
      throw ArgumentError("EventProfile: doppler_spread must be finite and >= 0");
    if (!(path_gain_decay > 0.0) || !std::isfinite(path_gain_decay))
      throw ArgumentError("EventProfile: path_gain_decay must be > 0");
    if (!(motion_richness >= 0.0 && motion_richness <= 1.0))
      throw ArgumentError("EventProfile: motion_richness must be in [0, 1]");
    if (!(gain >= 0.0) || !std::isfinite(gain)) throw ArgumentError("EventProfile: gain must be >= 0");
  }

  [[nodiscard]] std::size_t moving_paths() const {
    if (doppler_spread == 0.0 || motion_richness == 0.0) return 0;
    const auto k = static_cast<std::size_t>(std::lround(motion_richness * static_cast<double>(num_paths)));
    return std::clamp<std::size_t>(k, 1, num_paths);
  }

  friend bool operator==(const EventProfile &, const EventProfile &) = default;
};

/// Human motion gets many weak paths with broad Doppler; the rotating and
/// waving objects get fewer, stronger paths.
inline EventProfile default_profile(Event e) {
  switch (e) {
    case Event::V1: return {Event::V1, 8, 0.0, 0.8, 0.0, 0.5};
    case Event::V2: return {Event::V2, 24, 4.0, 0.95, 1.0, 0.25};
    case Event::V3: return {Event::V3, 4, 6.0, 0.7, 0.5, 0.6};
    case Event::V4: return {Event::V4, 6, 2.0, 0.8, 0.5, 0.4};
    case Event::V5: return {Event::V5, 6, 8.0, 0.75, 0.67, 0.6};
  }
  throw ArgumentError("default_profile: unknown event");
}

inline std::array<EventProfile, 5> default_profiles() {
  return {default_profile(Event::V1), default_profile(Event::V2), default_profile(Event::V3),
          default_profile(Event::V4), default_profile(Event::V5)};
}

struct GenConfig {
  std::size_t F = 100;
  std::size_t M = 100;
  std::size_t N = 3000;
  double snapshot_rate = 100.0;       // Hz
  double jitter_std = 1e-3;           // s
  double noise_std = 0.01;            // per real/imag component
  Scenario scenario = Scenario::Los;
  std::uint64_t seed = 1;
  double subcarrier_spacing = 200e3;  // Hz
  double max_delay = 300e-9;          // s
  std::size_t room_paths = 6;         // static reflections present in every event

  void validate() const {
    if (F == 0 || M == 0 || N == 0) throw ArgumentError("GenConfig: F, M and N must be positive");
    if (!(snapshot_rate > 0.0)) throw ArgumentError("GenConfig: snapshot_rate must be > 0");
    if (!(jitter_std >= 0.0) || !(jitter_std < 0.25 / snapshot_rate))
      throw ArgumentError("GenConfig: jitter_std must be in [0, 0.25/snapshot_rate)");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
      throw ArgumentError("GenConfig: noise_std must be finite and >= 0");
    if (!(subcarrier_spacing >= 0.0) || !(max_delay >= 0.0))
      throw ArgumentError("GenConfig: subcarrier_spacing and max_delay must be >= 0");
  }

  friend bool operator==(const GenConfig &, const GenConfig &) = default;
};

namespace detail {

struct Path {
  double gain;
  double delay;
  double doppler;
  std::vector<double> chain_phase;  // size M
};

// Independent sub-streams so that two events generated from the same seed
// share timestamps and noise and differ only in their paths.
enum Stream : std::uint64_t { kPathStream = 1, kTimeStream = 2, kNoiseStream = 3 };

inline std::vector<Path> draw_paths(const GenConfig &cfg, const EventProfile &ev, rng::Engine &eng) {
  std::vector<Path> paths;
  auto add = [&](double gain, double doppler) {
    Path p{gain, rng::uniform(eng, 0.0, cfg.max_delay), doppler, std::vector<double>(cfg.M)};
    for (auto &ph : p.chain_phase) ph = rng::uniform(eng, -std::numbers::pi, std::numbers::pi);
    paths.push_back(std::move(p));
  };
  add(cfg.scenario == Scenario::Los ? 1.0 : 0.15, 0.0);
  double g = 0.3;
  for (std::size_t i = 0; i < cfg.room_paths; ++i, g *= 0.8) add(g, 0.0);
  const std::size_t moving = ev.moving_paths();
  g = ev.gain;
  for (std::size_t i = 0; i < ev.num_paths; ++i, g *= ev.path_gain_decay) {
    const double nu = i < moving ? rng::uniform(eng, -ev.doppler_spread, ev.doppler_spread) : 0.0;
    add(g, nu);
  }
  return paths;
}

inline std::vector<double> draw_timestamps(const GenConfig &cfg, rng::Engine &eng) {
  const double period = 1.0 / cfg.snapshot_rate;
  // Clipping at +-0.45 periods keeps the grid strictly increasing.
  const double clip = 0.45 * period;
  std::vector<double> ts(cfg.N);
  for (std::size_t n = 0; n < cfg.N; ++n) {
    double j = cfg.jitter_std > 0.0 ? cfg.jitter_std * rng::normal(eng) : 0.0;
    j = std::clamp(j, -clip, clip);
    ts[n] = static_cast<double>(n) * period + j;
  }
  return ts;
}

}  // namespace detail

/// One synthetic capture; deterministic in (cfg, rf, ev).
inline Experiment generate_experiment(const GenConfig &cfg, const RfChainParams &rf,
                                      const EventProfile &ev) {
  cfg.validate();
  rf.validate(cfg.F, cfg.M);
  ev.validate();
  const std::size_t F = cfg.F, M = cfg.M, N = cfg.N;

  rng::Engine path_eng(rng::derive_seed(cfg.seed, detail::kPathStream));
  rng::Engine time_eng(rng::derive_seed(cfg.seed, detail::kTimeStream));
  rng::Engine noise_eng(rng::derive_seed(cfg.seed, detail::kNoiseStream));

  const auto paths = detail::draw_paths(cfg, ev, path_eng);
  auto ts = detail::draw_timestamps(cfg, time_eng);

  std::vector<const detail::Path *> moving;
  for (const auto &p : paths)
    if (p.doppler != 0.0) moving.push_back(&p);

  // Doppler rotations, one row per moving path.
  std::vector<cplx> rot(moving.size() * N);
  for (std::size_t k = 0; k < moving.size(); ++k)
    for (std::size_t n = 0; n < N; ++n)
      rot[k * N + n] = std::polar(1.0, 2.0 * std::numbers::pi * moving[k]->doppler * ts[n]);

  std::vector<cplx> data(F * M * N);
  std::vector<cplx> coef(moving.size());
  for (std::size_t f = 0; f < F; ++f) {
    const double freq = static_cast<double>(f) * cfg.subcarrier_spacing;
    for (std::size_t m = 0; m < M; ++m) {
      cplx base{0.0, 0.0};
      std::size_t k = 0;
      for (const auto &p : paths) {
        const cplx c = std::polar(p.gain, p.chain_phase[m] - 2.0 * std::numbers::pi * freq * p.delay);
        if (p.doppler != 0.0)
          coef[k++] = c;
        else
          base += c;
      }
      const double d = rf.gain[m], alpha = rf.phase_offset[m], eps = rf.cfo_at(m, f, F);
      cplx *out = data.data() + (f * M + m) * N;
      for (std::size_t n = 0; n < N; ++n) {
        cplx h = base;
        for (std::size_t q = 0; q < moving.size(); ++q) h += coef[q] * rot[q * N + n];
        // Snapshot index in the RF response is one-based.
        const cplx gamma = std::polar(d, alpha - static_cast<double>(n + 1) * eps);
        out[n] = h * gamma;
      }
    }
  }
  if (cfg.noise_std > 0.0)
    for (auto &z : data) {
      const double re = rng::normal(noise_eng), im = rng::normal(noise_eng);
      z += cplx(cfg.noise_std * re, cfg.noise_std * im);
    }

  return Experiment{CsiTensor(F, M, N, std::move(ts), std::move(data)), ev.event, cfg.scenario,
                    cfg.seed};
}

/// Everything needed to synthesize a labelled corpus.
struct CorpusSpec {
  GenConfig config;                                   // config.seed is the master seed
  std::array<std::size_t, 5> counts{18, 18, 18, 18, 18};  // per event v1..v5
  std::array<EventProfile, 5> profiles = default_profiles();
  std::optional<RfChainParams> rf;                    // drawn per experiment when empty
  std::vector<Scenario> scenarios{Scenario::Los};

  friend bool operator==(const CorpusSpec &, const CorpusSpec &) = default;
};

/// Experiments are ordered by scenario, then event, then draw. Each gets
/// seed derive_seed(master, ordinal), so the result does not depend on the
/// order in which experiments are produced.
inline Dataset generate_corpus(const CorpusSpec &spec) {
  Dataset d;
  std::uint64_t ordinal = 0;
  for (Scenario sc : spec.scenarios) {
    for (std::size_t e = 0; e < 5; ++e) {
      for (std::size_t i = 0; i < spec.counts[e]; ++i, ++ordinal) {
        GenConfig cfg = spec.config;
        cfg.scenario = sc;
        cfg.seed = rng::derive_seed(spec.config.seed, ordinal);
        const RfChainParams rf =
            spec.rf ? *spec.rf : draw_rf_params(cfg.F, cfg.M, rng::derive_seed(cfg.seed, 0xAF));
        EventProfile ev = spec.profiles[e];
        ev.event = kAllEvents[e];
        d.experiments.push_back(generate_experiment(cfg, rf, ev));
      }
    }
  }
  d.metadata["generator"] = "csisense-synth";
  d.metadata["master_seed"] = std::to_string(spec.config.seed);
  return d;
}

// ---------------------------------------------------------------------------
// JSON configuration document.
//
// {
//   "F": 20, "M": 16, "N": 600, "snapshot_rate": 100, "jitter_std": 0.001,
//   "noise_std": 0.05, "seed": 7, "subcarrier_spacing": 200000,
//   "max_delay": 3e-7, "room_paths": 6,
//   "scenario": "LOS" | "NLOS" | "both",
//   "counts": {"v1": 40, "v2": 40, ...},
//   "events": {"v2": {"num_paths": 24, "doppler_spread": 4, ...}, ...},
//   "rf": {"gain": [...], "phase_offset": [...], "cfo": [[eps_{m,f} per f] per m]}
// }
//
// Every key is optional; missing keys keep their defaults.
// ---------------------------------------------------------------------------

inline nlohmann::json profile_to_json(const EventProfile &p) {
  return {{"num_paths", p.num_paths},
          {"doppler_spread", p.doppler_spread},
          {"path_gain_decay", p.path_gain_decay},
          {"motion_richness", p.motion_richness},
          {"gain", p.gain}};
}

inline nlohmann::json corpus_spec_to_json(const CorpusSpec &s) {
  const auto &c = s.config;
  nlohmann::json j{{"F", c.F},
                   {"M", c.M},
                   {"N", c.N},
                   {"snapshot_rate", c.snapshot_rate},
                   {"jitter_std", c.jitter_std},
                   {"noise_std", c.noise_std},
                   {"seed", c.seed},
                   {"subcarrier_spacing", c.subcarrier_spacing},
                   {"max_delay", c.max_delay},
                   {"room_paths", c.room_paths}};
  if (s.scenarios.size() == 1)
    j["scenario"] = scenario_name(s.scenarios.front());
  else
    j["scenario"] = "both";
  for (std::size_t e = 0; e < 5; ++e) {
    j["counts"][event_name(kAllEvents[e])] = s.counts[e];
    j["events"][event_name(kAllEvents[e])] = profile_to_json(s.profiles[e]);
  }
  if (s.rf) {
    nlohmann::json cfo = nlohmann::json::array();
    for (std::size_t m = 0; m < c.M; ++m) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t f = 0; f < c.F; ++f) row.push_back(s.rf->cfo_at(m, f, c.F));
      cfo.push_back(std::move(row));
    }
    j["rf"] = {{"gain", s.rf->gain}, {"phase_offset", s.rf->phase_offset}, {"cfo", std::move(cfo)}};
  }
  return j;
}

inline CorpusSpec corpus_spec_from_json(const nlohmann::json &j) {
  if (!j.is_object()) throw FormatError("generator config: top level must be an object");
  CorpusSpec s;
  auto &c = s.config;
  try {
    c.F = j.value("F", c.F);
    c.M = j.value("M", c.M);
    c.N = j.value("N", c.N);
    c.snapshot_rate = j.value("snapshot_rate", c.snapshot_rate);
    c.jitter_std = j.value("jitter_std", c.jitter_std);
    c.noise_std = j.value("noise_std", c.noise_std);
    c.seed = j.value("seed", c.seed);
    c.subcarrier_spacing = j.value("subcarrier_spacing", c.subcarrier_spacing);
    c.max_delay = j.value("max_delay", c.max_delay);
    c.room_paths = j.value("room_paths", c.room_paths);
    if (j.contains("scenario")) {
      const auto sc = j.at("scenario").get<std::string>();
      if (sc == "both")
        s.scenarios = {Scenario::Los, Scenario::Nlos};
      else
        s.scenarios = {parse_scenario(sc)};
    }
    if (j.contains("counts"))
      for (const auto &[key, val] : j.at("counts").items())
        s.counts[static_cast<std::size_t>(event_number(parse_event(key)) - 1)] = val.get<std::size_t>();
    if (j.contains("events"))
      for (const auto &[key, val] : j.at("events").items()) {
        const Event e = parse_event(key);
        auto &p = s.profiles[static_cast<std::size_t>(event_number(e) - 1)];
        p.event = e;
        p.num_paths = val.value("num_paths", p.num_paths);
        p.doppler_spread = val.value("doppler_spread", p.doppler_spread);
        p.path_gain_decay = val.value("path_gain_decay", p.path_gain_decay);
        p.motion_richness = val.value("motion_richness", p.motion_richness);
        p.gain = val.value("gain", p.gain);
      }
    if (j.contains("rf")) {
      const auto &r = j.at("rf");
      RfChainParams rf;
      rf.gain = r.at("gain").get<std::vector<double>>();
      rf.phase_offset = r.at("phase_offset").get<std::vector<double>>();
      const auto rows = r.at("cfo").get<std::vector<std::vector<double>>>();
      for (const auto &row : rows) {
        if (row.size() != c.F) throw FormatError("generator config: rf.cfo rows must have F entries");
        rf.cfo.insert(rf.cfo.end(), row.begin(), row.end());
      }
      s.rf = std::move(rf);
    }
  } catch (const nlohmann::json::exception &ex) {
    throw FormatError(std::string("generator config: ") + ex.what());
  }
  c.validate();
  for (const auto &p : s.profiles) p.validate();
  if (s.rf) s.rf->validate(c.F, c.M);
  return s;
}

}  // namespace csisense
