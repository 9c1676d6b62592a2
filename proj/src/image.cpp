/* Copyright 2026 The mwdiff Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mwdiff/image.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mwdiff/errors.hpp"

namespace mwdiff {

double DetectorConfig::column_position(int column) const {
  return (static_cast<double>(column) - 0.5 * static_cast<double>(width_px - 1)) * pitch_m();
}

double DetectorConfig::row_offset(int row) const {
  return static_cast<double>(row - reference_row) * pitch_m();
}

Eigen::ArrayXd DetectorConfig::column_positions() const {
  Eigen::ArrayXd x(width_px);
  for (int c = 0; c < width_px; ++c) x[c] = column_position(c);
  return x;
}

void DetectorConfig::validate() const {
  if (!(pixel_pitch_um > 0)) throw DomainError("pixel pitch must be positive");
  if (width_px < 16 || height_px < 16) throw DomainError("detector must be at least 16 x 16 pixels");
  if (!(reference_velocity > 0)) throw DomainError("reference velocity must be positive");
  if (!(exposure_scale >= 0) || !std::isfinite(exposure_scale)) throw DomainError("exposure scale must be non-negative");
}

void DetectorImage::validate() const {
  config.validate();
  if (pixels.rows() != config.height_px || pixels.cols() != config.width_px)
    throw DomainError("image dimensions do not match the detector configuration");
  if (!pixels.allFinite() || (pixels < 0).any()) throw DomainError("image pixels must be finite and non-negative");
}

namespace {

std::uint16_t to_count(double v) {
  const double r = std::nearbyint(v);
  if (!(r >= 0 && r <= 65535)) throw DomainError("pixel value outside the 16-bit range");
  return static_cast<std::uint16_t>(r);
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

long parse_header_int(std::istream& in, const char* what) {
  const auto tok = header_token(in);
  try {
    std::size_t used = 0;
    const long v = std::stol(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw FormatError(std::string("corrupt PGM header: bad ") + what);
  }
}

}  // namespace

void write_pgm(std::ostream& out, const ImageArray& pixels, bool plain) {
  out << (plain ? "P2" : "P5") << '\n' << pixels.cols() << ' ' << pixels.rows() << '\n' << 65535 << '\n';
  if (plain) {
    for (Eigen::Index r = 0; r < pixels.rows(); ++r) {
      for (Eigen::Index c = 0; c < pixels.cols(); ++c) out << (c ? " " : "") << to_count(pixels(r, c));
      out << '\n';
    }
    return;
  }
  std::string row(static_cast<std::size_t>(2 * pixels.cols()), '\0');
  for (Eigen::Index r = 0; r < pixels.rows(); ++r) {
    for (Eigen::Index c = 0; c < pixels.cols(); ++c) {
      const std::uint16_t v = to_count(pixels(r, c));
      row[static_cast<std::size_t>(2 * c)] = static_cast<char>(v >> 8);
      row[static_cast<std::size_t>(2 * c + 1)] = static_cast<char>(v & 0xFF);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

ImageArray read_pgm(std::istream& in) {
  const auto magic = header_token(in);
  if (magic != "P2" && magic != "P5") throw FormatError("not a PGM file");
  const long width = parse_header_int(in, "width");
  const long height = parse_header_int(in, "height");
  const long maxval = parse_header_int(in, "maxval");
  if (width <= 0 || height <= 0 || width > 1 << 16 || height > 1 << 16) throw FormatError("corrupt PGM dimensions");
  if (maxval <= 0 || maxval > 65535) throw FormatError("corrupt PGM maxval");
  ImageArray pixels(height, width);
  if (magic == "P2") {
    for (long r = 0; r < height; ++r)
      for (long c = 0; c < width; ++c) {
        long v = -1;
        if (!(in >> v) || v < 0 || v > maxval) throw FormatError("corrupt or truncated PGM pixel data");
        pixels(r, c) = static_cast<double>(v);
      }
    return pixels;
  }
  const bool wide = maxval > 255;
  std::string buf(static_cast<std::size_t>(width * height * (wide ? 2 : 1)), '\0');
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw FormatError("truncated PGM pixel data");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after PGM pixel data");
  for (long r = 0; r < height; ++r)
    for (long c = 0; c < width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r * width + c);
      unsigned v = wide ? (static_cast<unsigned char>(buf[2 * i]) << 8) | static_cast<unsigned char>(buf[2 * i + 1])
                        : static_cast<unsigned char>(buf[i]);
      if (v > static_cast<unsigned>(maxval)) throw FormatError("PGM pixel exceeds maxval");
      pixels(r, c) = static_cast<double>(v);
    }
  return pixels;
}

void save_pgm(const std::string& path, const ImageArray& pixels, bool plain) {
  std::ostringstream buf;
  write_pgm(buf, pixels, plain);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << buf.str();
}

ImageArray load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return read_pgm(in);
}

}  // namespace mwdiff
