#pragma once

// CSV tables, binary wavefunction files and the exports built on them.

#include "gaugelab/dynamics.hpp"
#include "gaugelab/multipole.hpp"
#include "gaugelab/stationary.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace gaugelab {

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// RFC 4180 writer: CRLF line ends, fields quoted when they contain a
/// comma, quote or line break.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  CsvWriter& row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out_ << ',';
      out_ << escape(fields[i]);
    }
    out_ << "\r\n";
    return *this;
  }

  static std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + '"';
  }

 private:
  std::ostream& out_;
};

/// Minimal RFC 4180 reader, the inverse of CsvWriter.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw InvalidInput("unterminated quoted CSV field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Binary wavefunction file, all fields little-endian:
//   char[8] magic "GLWAVE01"
//   uint32  dim
//   uint32  reserved (0)
//   uint64  points[2]      (points[1] = 1 in 1D)
//   float64 extents[4]     (xmin, xmax, ymin, ymax; y pair is 0 in 1D)
//   float64 time
//   float64 values[2 * size]   (re, im interleaved, node k = ix + nx * iy)
inline constexpr char kWaveMagic[8] = {'G', 'L', 'W', 'A', 'V', 'E', '0', '1'};

namespace detail {

template <class T>
void put_le(std::ostream& out, T v) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw InvalidInput("truncated wavefunction file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T v;
  std::memcpy(&v, bytes.data(), sizeof(T));
  return v;
}

}  // namespace detail

inline void write_wavefunction(std::ostream& out, const Wavefunction& psi) {
  const Grid& g = psi.grid();
  out.write(kWaveMagic, sizeof kWaveMagic);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  detail::put_le<std::uint32_t>(out, 0);
  detail::put_le<std::uint64_t>(out, g.nx());
  detail::put_le<std::uint64_t>(out, g.ny());
  detail::put_le<double>(out, g.axis(0).min);
  detail::put_le<double>(out, g.axis(0).max);
  detail::put_le<double>(out, g.dim() == 2 ? g.axis(1).min : 0.0);
  detail::put_le<double>(out, g.dim() == 2 ? g.axis(1).max : 0.0);
  detail::put_le<double>(out, psi.time());
  for (Eigen::Index k = 0; k < psi.values().size(); ++k) {
    detail::put_le<double>(out, psi.values()[k].real());
    detail::put_le<double>(out, psi.values()[k].imag());
  }
}

inline Wavefunction read_wavefunction(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kWaveMagic, sizeof magic) != 0) throw InvalidInput("not a wavefunction file");
  const auto dim = detail::get_le<std::uint32_t>(in);
  detail::get_le<std::uint32_t>(in);
  const auto nx = detail::get_le<std::uint64_t>(in);
  const auto ny = detail::get_le<std::uint64_t>(in);
  std::array<double, 4> ext;
  for (double& e : ext) e = detail::get_le<double>(in);
  const double time = detail::get_le<double>(in);
  if (dim != 1 && dim != 2) throw InvalidInput("wavefunction file has an invalid dimension");
  if (dim == 1 && ny != 1) throw InvalidInput("1D wavefunction file must have one row");
  const Grid grid = dim == 1 ? Grid(Axis{ext[0], ext[1], nx}) : Grid(Axis{ext[0], ext[1], nx}, Axis{ext[2], ext[3], ny});
  CVector v(static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double re = detail::get_le<double>(in);
    const double im = detail::get_le<double>(in);
    v[k] = complex(re, im);
  }
  return Wavefunction(grid, std::move(v), time);
}

inline void save_wavefunction(const std::filesystem::path& path, const Wavefunction& psi) {
  auto out = open_output(path, true);
  write_wavefunction(out, psi);
}

inline Wavefunction load_wavefunction(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  return read_wavefunction(in);
}

/// Columns n, energy, residual.
inline void write_basis_csv(std::ostream& out, const StationaryBasis& basis) {
  CsvWriter csv(out);
  csv.row({"n", "energy", "residual"});
  for (std::size_t n = 0; n < basis.count(); ++n) {
    csv.row({std::to_string(n), format_double(basis.energies[n]), format_double(basis.residuals[n])});
  }
}

/// Columns time, n, re, im, abs2, gauge_label.
inline void write_amplitudes_csv(std::ostream& out, const AmplitudeTrajectory& traj, bool header = true) {
  CsvWriter csv(out);
  if (header) csv.row({"time", "n", "re", "im", "abs2", "gauge_label"});
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    for (std::size_t n = 0; n < traj.states(); ++n) {
      const complex a = traj.amplitudes[s][static_cast<Eigen::Index>(n)];
      csv.row({format_double(traj.times[s]), std::to_string(n), format_double(a.real()), format_double(a.imag()),
               format_double(std::norm(a)), traj.gauge_label});
    }
  }
}

/// Columns order, quantity, max_error, shrink_ratio.
inline void write_truncation_csv(std::ostream& out, const TruncationReport& report) {
  CsvWriter csv(out);
  csv.row({"order", "quantity", "max_error", "shrink_ratio"});
  for (const auto& r : report.rows) {
    csv.row({r.order, r.quantity, format_double(r.max_error), format_double(r.shrink_ratio)});
  }
}

/// Columns x, y, Ax, Ay, phi, sampled at time t on every node.
inline void write_potentials_csv(std::ostream& out, const PotentialSet& pots, const Grid& grid, double t) {
  CsvWriter csv(out);
  csv.row({"x", "y", "Ax", "Ay", "phi"});
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec2 r = grid.node(k);
    const Vec2 A = pots.A(r, t);
    csv.row({format_double(r.x), format_double(r.y), format_double(A.x), format_double(A.y),
             format_double(pots.phi(r, t))});
  }
}

}  // namespace gaugelab
