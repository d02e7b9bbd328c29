#include "topoms/grid.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "topoms/errors.hpp"

namespace topoms {

ImageGrid::ImageGrid(int nx, int ny, std::vector<double> nodal)
    : nx_(nx), ny_(ny), h_(1.0 / std::max(nx, ny)), f_(std::move(nodal)) {
  if (nx_ < 2 || ny_ < 2) {
    throw config_error("grid too small: " + std::to_string(nx_) + "x" +
                       std::to_string(ny_) + " cells (need at least 2x2)");
  }
  if (f_.size() != node_count()) {
    throw config_error("nodal data size " + std::to_string(f_.size()) +
                       " does not match " + std::to_string(node_count()) +
                       " nodes");
  }
  for (double v : f_) {
    if (!std::isfinite(v)) throw config_error("nodal data contains non-finite value");
  }
}

namespace {

// Reads the next header token, skipping whitespace and # comments.
std::string next_header_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(char(c));
  }
  return tok;
}

int parse_header_int(std::istream& in, const char* what) {
  std::string tok = next_header_token(in);
  if (tok.empty()) {
    throw format_error(std::string("malformed PGM header: missing ") + what);
  }
  for (char ch : tok) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) {
      throw format_error(std::string("malformed PGM header: expected integer for ") +
                         what + ", got '" + tok + "'");
    }
  }
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw format_error(std::string("malformed PGM header: value out of range for ") +
                       what + ": '" + tok + "'");
  }
}

}  // namespace

ImageGrid load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path.string() + "' for reading");

  std::string magic = next_header_token(in);
  if (magic != "P2" && magic != "P5") {
    throw format_error("unsupported magic number '" + magic +
                       "' (only P2 and P5 grayscale supported)");
  }
  const int width = parse_header_int(in, "width");
  const int height = parse_header_int(in, "height");
  const int maxval = parse_header_int(in, "maxval");
  if (width < 3 || height < 3) {
    throw format_error("image too small: " + std::to_string(width) + "x" +
                       std::to_string(height) + " (need at least 3x3 pixels)");
  }
  if (maxval != 255) {
    throw format_error("unsupported maxval " + std::to_string(maxval) +
                       " (only 8-bit images with maxval 255 supported)");
  }

  const std::size_t n = std::size_t(width) * height;
  std::vector<double> nodal(n);
  if (magic == "P5") {
    // exactly one whitespace byte separates maxval from the raster
    std::vector<std::uint8_t> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(n));
    if (std::size_t(in.gcount()) != n) {
      throw format_error("truncated P5 raster: expected " + std::to_string(n) +
                         " bytes");
    }
    for (std::size_t k = 0; k < n; ++k) nodal[k] = raw[k] / 255.0;
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      const int v = parse_header_int(in, "pixel");
      if (v > maxval) {
        throw format_error("pixel value " + std::to_string(v) +
                           " exceeds maxval 255");
      }
      nodal[k] = v / 255.0;
    }
  }
  return ImageGrid(width - 1, height - 1, std::move(nodal));
}

namespace {

int quantize_clamp(double v) {
  const double c = std::min(std::max(v, 0.0), 1.0);
  return int(std::lround(255.0 * c));
}

void write_p5(const std::filesystem::path& path, int width, int height,
              const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) throw io_error("write failed for '" + path.string() + "'");
}

std::vector<std::uint8_t> to_bytes(const std::vector<double>& values,
                                   SaveMode mode) {
  std::vector<std::uint8_t> bytes(values.size());
  if (mode == SaveMode::clamp) {
    for (std::size_t k = 0; k < values.size(); ++k) {
      bytes[k] = std::uint8_t(quantize_clamp(values[k]));
    }
  } else {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double lo = *mn, hi = *mx;
    if (hi <= lo) {
      std::fill(bytes.begin(), bytes.end(), std::uint8_t(128));
    } else {
      for (std::size_t k = 0; k < values.size(); ++k) {
        bytes[k] = std::uint8_t(
            std::lround(255.0 * (values[k] - lo) / (hi - lo)));
      }
    }
  }
  return bytes;
}

}  // namespace

void save_pgm(const NodalField& field, const std::filesystem::path& path,
              SaveMode mode) {
  write_p5(path, field.nx + 1, field.ny + 1, to_bytes(field.values, mode));
}

void save_pgm(const CellField& field, const std::filesystem::path& path,
              SaveMode mode) {
  write_p5(path, field.nx, field.ny, to_bytes(field.values, mode));
}

double bilinear_eval(const NodalField& field, const ImageGrid& grid, double x,
                     double y) {
  if (!field.matches(grid)) {
    throw std::invalid_argument("field dimensions do not match grid");
  }
  if (x < 0.0 || y < 0.0 || x > grid.width() || y > grid.height()) {
    std::ostringstream msg;
    msg << "point (" << x << ", " << y << ") outside domain [0," << grid.width()
        << "]x[0," << grid.height() << "]";
    throw std::domain_error(msg.str());
  }
  const double h = grid.h();
  int ci = std::min(int(x / h), grid.nx() - 1);
  int cj = std::min(int(y / h), grid.ny() - 1);
  const double xi = x / h - ci;
  const double eta = y / h - cj;
  const double sw = field.at(ci, cj);
  const double se = field.at(ci + 1, cj);
  const double ne = field.at(ci + 1, cj + 1);
  const double nw = field.at(ci, cj + 1);
  return (1 - xi) * (1 - eta) * sw + xi * (1 - eta) * se + xi * eta * ne +
         (1 - xi) * eta * nw;
}

}  // namespace topoms
