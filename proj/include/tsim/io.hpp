#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "tsim/protocol.hpp"
#include "tsim/state.hpp"

namespace tsim {

inline constexpr const char* kTrajectoryHeader =
    "cycle,stage,model_time,S_tau,S_upsilon,S_total,S_ent,fidelity";

/// One parsed CSV row.
struct TrajectoryRow {
  std::uint64_t cycle = 0;
  std::string stage;
  double model_time = 0.0;
  double s_tau = 0.0;
  double s_upsilon = 0.0;
  double s_total = 0.0;
  double s_ent = 0.0;
  double fidelity = 0.0;

  friend bool operator==(const TrajectoryRow&, const TrajectoryRow&) = default;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what) {}
};

/// %.17g: enough digits for an exact strtod round trip.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

inline void write_trajectory(std::ostream& os, const std::vector<StageRecord>& records) {
  if (records.empty()) throw std::invalid_argument("write_trajectory: no records");
  os << kTrajectoryHeader << '\n';
  for (const auto& r : records) {
    os << r.cycle << ',' << to_string(r.stage) << ',' << format_double(r.model_time) << ','
       << format_double(r.report.s_tau) << ',' << format_double(r.report.s_upsilon) << ','
       << format_double(r.report.s_total) << ',' << format_double(r.report.s_ent) << ','
       << format_double(r.report.fidelity_to_initial) << '\n';
  }
}

inline std::filesystem::path write_trajectory(const std::vector<StageRecord>& records,
                                              const std::filesystem::path& out_dir,
                                              const std::string& filename = "trajectory.csv") {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir, "cannot create directory: " + ec.message());
  const auto path = out_dir / filename;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path, "cannot open for writing");
  write_trajectory(os, records);
  os.flush();
  if (!os) throw IoError(path, "write failed");
  return path;
}

inline std::vector<TrajectoryRow> read_trajectory(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTrajectoryHeader) {
    throw std::runtime_error("read_trajectory: missing or unexpected header");
  }
  std::vector<TrajectoryRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 8) {
      throw std::runtime_error("read_trajectory: expected 8 fields in \"" + line + "\"");
    }
    auto num = [&](std::size_t i) {
      char* end = nullptr;
      const double v = std::strtod(fields[i].c_str(), &end);
      if (end == fields[i].c_str() || *end != '\0') {
        throw std::runtime_error("read_trajectory: bad number \"" + fields[i] + "\"");
      }
      return v;
    };
    TrajectoryRow r;
    r.cycle = std::stoull(fields[0]);
    r.stage = fields[1];
    r.model_time = num(2);
    r.s_tau = num(3);
    r.s_upsilon = num(4);
    r.s_total = num(5);
    r.s_ent = num(6);
    r.fidelity = num(7);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<TrajectoryRow> read_trajectory(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path, "cannot open for reading");
  return read_trajectory(is);
}

// StateDump: "TSIM", u32 version, u64 d_x, u64 d_y, then (re, im) f64 pairs,
// all little-endian, row-major over (m, n).

inline constexpr std::uint32_t kStateDumpVersion = 1;

namespace detail {

template <typename T>
void put_le(std::ostream& os, T value) {
  std::array<char, sizeof(T)> bytes{};
  auto bits = std::bit_cast<std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  }
  os.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& is) {
  using Bits = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  std::array<unsigned char, sizeof(T)> bytes{};
  is.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!is) throw std::runtime_error("read_state: truncated input");
  Bits bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<Bits>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace detail

inline void write_state(std::ostream& os, const ManyBodyState& state) {
  os.write("TSIM", 4);
  detail::put_le<std::uint32_t>(os, kStateDumpVersion);
  detail::put_le<std::uint64_t>(os, state.d_x());
  detail::put_le<std::uint64_t>(os, state.d_y());
  for (const auto& a : state.amplitudes()) {
    detail::put_le<double>(os, a.real());
    detail::put_le<double>(os, a.imag());
  }
}

inline void write_state(const std::filesystem::path& path, const ManyBodyState& state) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path, "cannot open for writing");
  write_state(os, state);
  if (!os) throw IoError(path, "write failed");
}

/// Reloads amplitudes bit-exactly; no renormalization is applied.
inline ManyBodyState read_state(std::istream& is) {
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (!is || std::string(magic.data(), 4) != "TSIM") {
    throw std::runtime_error("read_state: bad magic bytes");
  }
  const auto version = detail::get_le<std::uint32_t>(is);
  if (version != kStateDumpVersion) {
    throw std::runtime_error("read_state: unsupported version " + std::to_string(version));
  }
  const auto d_x = detail::get_le<std::uint64_t>(is);
  const auto d_y = detail::get_le<std::uint64_t>(is);
  if (d_x > (std::uint64_t{1} << 31) || d_y > (std::uint64_t{1} << 31)) {
    throw std::runtime_error("read_state: implausible dimensions in header");
  }
  Eigen::VectorXcd amps(static_cast<Eigen::Index>(d_x * d_y));
  for (Eigen::Index k = 0; k < amps.size(); ++k) {
    const double re = detail::get_le<double>(is);
    const double im = detail::get_le<double>(is);
    amps[k] = {re, im};
  }
  return ManyBodyState::from_unitary_image(d_x, d_y, std::move(amps));
}

inline ManyBodyState read_state(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path, "cannot open for reading");
  return read_state(is);
}

/// One phase per line, 17 significant digits.
inline void write_phases(const std::filesystem::path& path, const std::vector<double>& phases) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path, "cannot open for writing");
  for (double theta : phases) os << format_double(theta) << '\n';
  if (!os) throw IoError(path, "write failed");
}

}  // namespace tsim
