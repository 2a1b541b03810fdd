#pragma once

// PGM images and sampling-plan CSV files.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdcs/image.hpp"
#include "vdcs/sampling.hpp"

namespace vdcs {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Grayscale raster at its stored bit depth (maxval <= 65535).
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 255;
  std::vector<std::uint16_t> samples;  // row-major

  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

namespace detail {

inline std::string next_pnm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(c);
  }
  if (tok.empty()) throw IoError("PGM: unexpected end of header");
  return tok;
}

inline std::size_t parse_positive(const std::string& s, const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || v == 0) throw IoError(std::string("PGM: invalid ") + what + " '" + s + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

/// Reads P5 (binary, 8- or 16-bit big-endian) or P2 (ASCII) PGM.
inline GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  const std::string magic = detail::next_pnm_token(in);
  if (magic != "P5" && magic != "P2") throw IoError("'" + path + "' is not a P2/P5 PGM");
  GrayImage img;
  img.width = detail::parse_positive(detail::next_pnm_token(in), "width");
  img.height = detail::parse_positive(detail::next_pnm_token(in), "height");
  const std::size_t maxval = detail::parse_positive(detail::next_pnm_token(in), "maxval");
  if (maxval > 65535) throw IoError("PGM: maxval exceeds 65535");
  img.maxval = static_cast<unsigned>(maxval);
  img.samples.resize(img.width * img.height);
  if (magic == "P5") {
    const bool wide = img.maxval > 255;
    for (auto& s : img.samples) {
      unsigned char b[2] = {0, 0};
      if (!in.read(reinterpret_cast<char*>(b), wide ? 2 : 1)) throw IoError("PGM: truncated pixel data");
      s = wide ? static_cast<std::uint16_t>((b[0] << 8) | b[1]) : b[0];
    }
  } else {
    for (auto& s : img.samples) {
      const auto v = std::stoul(detail::next_pnm_token(in));
      s = static_cast<std::uint16_t>(v);
    }
  }
  for (auto s : img.samples)
    if (s > img.maxval) throw IoError("PGM: sample exceeds maxval");
  return img;
}

/// Writes binary P5.
inline void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "P5\n" << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
  const bool wide = img.maxval > 255;
  for (auto s : img.samples) {
    if (wide) out.put(static_cast<char>(s >> 8));
    out.put(static_cast<char>(s & 0xff));
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

/// Square power-of-two grayscale image mapped to [0, 1].
inline Image to_image(const GrayImage& g) {
  if (g.width != g.height) throw std::invalid_argument("image must be square");
  log2_exact(g.width);
  Image f(g.width);
  for (std::size_t i = 0; i < g.samples.size(); ++i) f.pixels()[i] = static_cast<double>(g.samples[i]) / g.maxval;
  return f;
}

/// Real part clipped to [0, 1] and quantized to maxval.
inline GrayImage to_gray(const Image& f, unsigned maxval = 255) {
  GrayImage g{f.size(), f.size(), maxval, std::vector<std::uint16_t>(f.pixel_count())};
  for (std::size_t i = 0; i < g.samples.size(); ++i) {
    const double v = std::clamp(f.pixels()[i].real(), 0.0, 1.0);
    g.samples[i] = static_cast<std::uint16_t>(std::lround(v * maxval));
  }
  return g;
}

/// K-space mask with DC at the centre: row r holds k1 = r - N/2 + 1,
/// column c holds k2 = c - N/2 + 1. White = sampled at least once.
inline GrayImage plan_mask(const SamplingPlan& plan) {
  const std::size_t n = plan.n;
  GrayImage g{n, n, 255, std::vector<std::uint16_t>(n * n, 0)};
  const int lo = min_frequency(n);
  for (const auto& k : plan.freqs) {
    require_in_range(k, n);
    g.samples[static_cast<std::size_t>(k.k1 - lo) * n + static_cast<std::size_t>(k.k2 - lo)] = 255;
  }
  return g;
}

/// CSV with header j,k1,k2,rho; j is 1-based. The first comment line carries
/// n, density label, seed and generator so the plan can be read back whole.
inline void write_plan_csv(const std::string& path, const SamplingPlan& plan) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "# n=" << plan.n << " density=" << plan.density_label << " seed=" << plan.seed
      << " generator=" << plan.generator << '\n';
  out << "j,k1,k2,rho\n";
  out << std::setprecision(17);
  for (std::size_t j = 0; j < plan.m(); ++j)
    out << (j + 1) << ',' << plan.freqs[j].k1 << ',' << plan.freqs[j].k2 << ',' << plan.rho[j] << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline SamplingPlan read_plan_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  SamplingPlan plan;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string kv;
      while (meta >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const auto key = kv.substr(0, eq), value = kv.substr(eq + 1);
        if (key == "n") plan.n = std::stoul(value);
        else if (key == "density") plan.density_label = value;
        else if (key == "seed") plan.seed = std::stoull(value);
        else if (key == "generator") plan.generator = value;
      }
      continue;
    }
    if (!header_seen) {
      if (line.rfind("j,k1,k2,rho", 0) != 0) throw IoError("plan CSV: missing header j,k1,k2,rho");
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string j, k1, k2, rho;
    if (!std::getline(row, j, ',') || !std::getline(row, k1, ',') || !std::getline(row, k2, ',') ||
        !std::getline(row, rho, ','))
      throw IoError("plan CSV: malformed row '" + line + "'");
    try {
      plan.freqs.push_back({std::stoi(k1), std::stoi(k2)});
      plan.rho.push_back(std::stod(rho));
    } catch (const std::exception&) {
      throw IoError("plan CSV: malformed row '" + line + "'");
    }
  }
  if (plan.n == 0) throw IoError("plan CSV: missing '# n=' metadata line");
  log2_exact(plan.n);
  for (const auto& k : plan.freqs)
    if (!in_range(k, plan.n))
      throw IoError("plan CSV: frequency (" + std::to_string(k.k1) + "," + std::to_string(k.k2) + ") outside the grid");
  return plan;
}

}  // namespace vdcs
