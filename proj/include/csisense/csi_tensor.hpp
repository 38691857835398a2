#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csisense/error.hpp"

namespace csisense {

using cplx = std::complex<double>;

/// Activity taxonomy. Numeric values match the on-disk label byte.
enum class Event : std::uint8_t {
  V1 = 1,  // static
  V2 = 2,  // human dancing
  V3 = 3,  // spinning bike wheel
  V4 = 4,  // waving aluminium foil balloon
  V5 = 5,  // spinning and moving bike wheel
};

inline constexpr std::array<Event, 5> kAllEvents{Event::V1, Event::V2, Event::V3, Event::V4,
                                                 Event::V5};

enum class Scenario : std::uint8_t { Los = 0, Nlos = 1 };

inline constexpr int event_number(Event e) { return static_cast<int>(e); }

inline std::string event_name(Event e) { return "v" + std::to_string(event_number(e)); }

inline Event event_from_number(int v) {
  if (v < 1 || v > 5) throw ArgumentError("event id out of range 1..5: " + std::to_string(v));
  return static_cast<Event>(v);
}

/// Accepts "v3", "V3" or "3".
inline Event parse_event(std::string_view s) {
  if (!s.empty() && (s.front() == 'v' || s.front() == 'V')) s.remove_prefix(1);
  if (s.size() != 1 || s[0] < '1' || s[0] > '5')
    throw ArgumentError("unknown event '" + std::string(s) + "'");
  return event_from_number(s[0] - '0');
}

inline std::string scenario_name(Scenario s) { return s == Scenario::Los ? "LOS" : "NLOS"; }

inline Scenario parse_scenario(std::string_view s) {
  if (s == "LOS" || s == "los") return Scenario::Los;
  if (s == "NLOS" || s == "nlos") return Scenario::Nlos;
  throw ArgumentError("unknown scenario '" + std::string(s) + "'");
}

/// Complex CSI cube of F subcarriers x M RF chains x N snapshots.
///
/// Storage is f-major, then m, then n (snapshot index fastest), which is also
/// the on-disk order. Each (f, m) pair therefore owns a contiguous time series.
/// Indices are zero-based throughout the library.
class CsiTensor {
 public:
  CsiTensor() = default;

  CsiTensor(std::size_t F, std::size_t M, std::size_t N, std::vector<double> timestamps,
            std::vector<cplx> data)
      : F_(F), M_(M), N_(N), timestamps_(std::move(timestamps)), data_(std::move(data)) {
    if (F_ == 0 || M_ == 0 || N_ == 0) throw ArgumentError("CsiTensor: F, M and N must be positive");
    if (timestamps_.size() != N_)
      throw ArgumentError("CsiTensor: timestamps length " + std::to_string(timestamps_.size()) +
                          " != N " + std::to_string(N_));
    if (data_.size() != F_ * M_ * N_) throw ArgumentError("CsiTensor: data size != F*M*N");
    for (std::size_t n = 0; n < N_; ++n) {
      if (!std::isfinite(timestamps_[n])) throw ArgumentError("CsiTensor: non-finite timestamp");
      if (n > 0 && !(timestamps_[n] > timestamps_[n - 1]))
        throw ArgumentError("CsiTensor: timestamps not strictly increasing at n=" +
                            std::to_string(n));
    }
    for (const auto &z : data_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw ArgumentError("CsiTensor: non-finite sample");
  }

  [[nodiscard]] std::size_t subcarriers() const noexcept { return F_; }
  [[nodiscard]] std::size_t chains() const noexcept { return M_; }
  [[nodiscard]] std::size_t snapshots() const noexcept { return N_; }

  [[nodiscard]] std::size_t index(std::size_t f, std::size_t m, std::size_t n) const noexcept {
    return (f * M_ + m) * N_ + n;
  }

  [[nodiscard]] cplx at(std::size_t f, std::size_t m, std::size_t n) const {
    return data_[index(f, m, n)];
  }

  /// Time series of one (subcarrier, chain) pair.
  [[nodiscard]] std::span<const cplx> series(std::size_t f, std::size_t m) const {
    return {data_.data() + index(f, m, 0), N_};
  }

  [[nodiscard]] std::span<const double> timestamps() const noexcept { return timestamps_; }
  [[nodiscard]] std::span<const cplx> data() const noexcept { return data_; }

  friend bool operator==(const CsiTensor &, const CsiTensor &) = default;

 private:
  std::size_t F_ = 0;
  std::size_t M_ = 0;
  std::size_t N_ = 0;
  std::vector<double> timestamps_;
  std::vector<cplx> data_;
};

/// One labelled capture. `seed` is empty for measured (non-synthetic) data.
struct Experiment {
  CsiTensor csi;
  Event label = Event::V1;
  Scenario scenario = Scenario::Los;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const Experiment &, const Experiment &) = default;
};

struct Dataset {
  std::vector<Experiment> experiments;
  /// In-memory annotations only; the binary file format has no slot for them.
  std::map<std::string, std::string> metadata;

  friend bool operator==(const Dataset &, const Dataset &) = default;
};

/// Gathers a subset of RF chains: out[f, i, n] = t[f, indices[i], n].
/// Indices are zero-based, must be distinct and < M.
inline CsiTensor select_antennas(const CsiTensor &t, std::span<const std::size_t> indices) {
  const std::size_t M = t.chains();
  if (indices.empty()) throw ArgumentError("select_antennas: empty index list");
  std::vector<bool> seen(M, false);
  for (std::size_t idx : indices) {
    if (idx >= M)
      throw ArgumentError("select_antennas: index " + std::to_string(idx) + " out of range for M=" +
                          std::to_string(M));
    if (seen[idx]) throw ArgumentError("select_antennas: duplicate index " + std::to_string(idx));
    seen[idx] = true;
  }
  const std::size_t F = t.subcarriers(), N = t.snapshots(), Mo = indices.size();
  std::vector<cplx> out(F * Mo * N);
  for (std::size_t f = 0; f < F; ++f)
    for (std::size_t i = 0; i < Mo; ++i) {
      auto src = t.series(f, indices[i]);
      std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>((f * Mo + i) * N));
    }
  return {F, Mo, N, std::vector<double>(t.timestamps().begin(), t.timestamps().end()),
          std::move(out)};
}

/// Zero-based indices 0..count-1.
inline std::vector<std::size_t> first_antennas(std::size_t count) {
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i;
  return idx;
}

}  // namespace csisense
