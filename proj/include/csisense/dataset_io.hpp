#pragma once

// Binary dataset container (".csid"), little-endian:
//
//   magic   "CSID"                      4 bytes
//   version u32 = 1
//   count   u32                         number of experiments
//   per experiment:
//     label    u8   (1..5)
//     scenario u8   (0 = LOS, 1 = NLOS)
//     seed     u64  (UINT64_MAX marks measured data)
//     F, M, N  u32 each
//     timestamps  N x f64
//     data        F*M*N x (f64 re, f64 im), f-major, then m, then n

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "csisense/csi_tensor.hpp"
#include "csisense/error.hpp"

namespace csisense {

inline constexpr std::array<char, 4> kDatasetMagic{'C', 'S', 'I', 'D'};
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::uint64_t kMeasuredSeed = std::numeric_limits<std::uint64_t>::max();

namespace detail {

template <typename U>
void put_le(std::vector<char> &buf, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i)
    buf.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
}

inline void put_f64(std::vector<char> &buf, double v) { put_le(buf, std::bit_cast<std::uint64_t>(v)); }

class LeReader {
 public:
  explicit LeReader(std::istream &in) : in_(in) {}

  void read_bytes(char *dst, std::size_t n, const char *what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw IoError(std::string("truncated dataset while reading ") + what);
  }

  template <typename U>
  U get(const char *what) {
    std::array<unsigned char, sizeof(U)> b{};
    read_bytes(reinterpret_cast<char *>(b.data()), b.size(), what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return static_cast<U>(v);
  }

  /// Bulk f64 read, decoding in place.
  void get_f64s(double *dst, std::size_t count, const char *what) {
    constexpr std::size_t kChunk = 1 << 16;
    std::vector<unsigned char> raw;
    for (std::size_t done = 0; done < count;) {
      const std::size_t n = std::min(kChunk, count - done);
      raw.resize(n * 8);
      read_bytes(reinterpret_cast<char *>(raw.data()), raw.size(), what);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t v = 0;
        for (std::size_t k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(raw[i * 8 + k]) << (8 * k);
        dst[done + i] = std::bit_cast<double>(v);
      }
      done += n;
    }
  }

 private:
  std::istream &in_;
};

}  // namespace detail

inline void save_dataset(const Dataset &d, std::ostream &out) {
  if (d.experiments.size() > std::numeric_limits<std::uint32_t>::max())
    throw ArgumentError("save_dataset: too many experiments");
  std::vector<char> buf(kDatasetMagic.begin(), kDatasetMagic.end());
  detail::put_le<std::uint32_t>(buf, kDatasetVersion);
  detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(d.experiments.size()));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  for (const auto &e : d.experiments) {
    const auto &t = e.csi;
    constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
    if (t.subcarriers() > kMax || t.chains() > kMax || t.snapshots() > kMax)
      throw ArgumentError("save_dataset: dimension exceeds u32");
    buf.clear();
    detail::put_le<std::uint8_t>(buf, static_cast<std::uint8_t>(e.label));
    detail::put_le<std::uint8_t>(buf, static_cast<std::uint8_t>(e.scenario));
    detail::put_le<std::uint64_t>(buf, e.seed.value_or(kMeasuredSeed));
    detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(t.subcarriers()));
    detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(t.chains()));
    detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(t.snapshots()));
    buf.reserve(buf.size() + 8 * (t.snapshots() + 2 * t.data().size()));
    for (double ts : t.timestamps()) detail::put_f64(buf, ts);
    for (const auto &z : t.data()) {
      detail::put_f64(buf, z.real());
      detail::put_f64(buf, z.imag());
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw IoError("save_dataset: write failed");
}

inline Dataset load_dataset(std::istream &in) {
  detail::LeReader rd(in);
  std::array<char, 4> magic{};
  rd.read_bytes(magic.data(), magic.size(), "magic");
  if (magic != kDatasetMagic) throw FormatError("dataset: bad magic (expected \"CSID\")");
  const auto version = rd.get<std::uint32_t>("version");
  if (version != kDatasetVersion)
    throw FormatError("dataset: unsupported version " + std::to_string(version));
  const auto count = rd.get<std::uint32_t>("experiment count");

  Dataset d;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string where = "experiment " + std::to_string(i) + ": ";
    const auto label = rd.get<std::uint8_t>("label");
    if (label < 1 || label > 5) throw FormatError(where + "label " + std::to_string(label) + " not in 1..5");
    const auto scenario = rd.get<std::uint8_t>("scenario");
    if (scenario > 1) throw FormatError(where + "scenario " + std::to_string(scenario) + " not in 0..1");
    const auto seed = rd.get<std::uint64_t>("seed");
    const auto F = rd.get<std::uint32_t>("F");
    const auto M = rd.get<std::uint32_t>("M");
    const auto N = rd.get<std::uint32_t>("N");
    if (F == 0) throw FormatError(where + "F is zero");
    if (M == 0) throw FormatError(where + "M is zero");
    if (N == 0) throw FormatError(where + "N is zero");

    std::vector<double> ts(N);
    rd.get_f64s(ts.data(), ts.size(), "timestamps");
    const std::uint64_t cells = std::uint64_t{F} * M * N;
    // Grow in chunks so a corrupt header cannot force a huge allocation
    // before truncation is detected.
    std::vector<cplx> data;
    constexpr std::uint64_t kChunk = 1 << 15;
    std::vector<double> tmp;
    for (std::uint64_t done = 0; done < cells;) {
      const std::uint64_t n = std::min(kChunk, cells - done);
      tmp.resize(2 * n);
      rd.get_f64s(tmp.data(), tmp.size(), "data");
      for (std::uint64_t k = 0; k < n; ++k) data.emplace_back(tmp[2 * k], tmp[2 * k + 1]);
      done += n;
    }
    try {
      d.experiments.push_back(Experiment{
          CsiTensor(F, M, N, std::move(ts), std::move(data)), static_cast<Event>(label),
          static_cast<Scenario>(scenario),
          seed == kMeasuredSeed ? std::nullopt : std::optional<std::uint64_t>(seed)});
    } catch (const ArgumentError &ex) {
      throw FormatError(where + ex.what());
    }
  }
  return d;
}

inline void save_dataset(const Dataset &d, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  save_dataset(d, out);
}

inline Dataset load_dataset(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return load_dataset(in);
}

}  // namespace csisense
