#include "topoms/cover.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "topoms/csv.hpp"
#include "topoms/errors.hpp"

namespace topoms {

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw io_error("write failed for '" + path.string() + "'");
}

BallCover::BallCover(double epsilon, double kappa, double domain_w,
                     double domain_h)
    : epsilon_(epsilon), kappa_(kappa), domain_w_(domain_w), domain_h_(domain_h) {
  if (!(epsilon > 0.0)) throw config_error("epsilon must be positive");
  if (!(kappa > 0.0 && kappa < 1.0)) throw config_error("kappa must lie in (0,1)");
  if (!(domain_w > 0.0 && domain_h > 0.0)) {
    throw config_error("domain extents must be positive");
  }
}

void BallCover::insert(double x, double y) {
  if (x < 0.0 || y < 0.0 || x > domain_w_ || y > domain_h_) {
    std::ostringstream msg;
    msg << "ball center (" << x << ", " << y << ") outside domain [0,"
        << domain_w_ << "]x[0," << domain_h_ << "]";
    throw config_error(msg.str());
  }
  for (const auto& c : centers_) {
    if (c[0] == x && c[1] == y) {
      std::ostringstream msg;
      msg << "duplicate ball center (" << x << ", " << y << ")";
      throw std::invalid_argument(msg.str());
    }
  }
  centers_.push_back({x, y});
}

bool BallCover::contains(double x, double y) const {
  const double r2 = epsilon_ * epsilon_;
  for (const auto& c : centers_) {
    const double dx = x - c[0];
    const double dy = y - c[1];
    if (dx * dx + dy * dy <= r2) return true;
  }
  return false;
}

CellField indicator_field(const BallCover& cover, const ImageGrid& grid) {
  CellField v(grid, 1.0);
  const double h = grid.h();
  const double eps = cover.epsilon();
  const double r2 = eps * eps;
  const double kappa = cover.kappa();
  for (const auto& c : cover.centers()) {
    // cells whose center can possibly lie inside this ball
    const int i0 = std::max(0, int(std::floor((c[0] - eps) / h - 0.5)));
    const int i1 = std::min(grid.nx() - 1, int(std::ceil((c[0] + eps) / h - 0.5)));
    const int j0 = std::max(0, int(std::floor((c[1] - eps) / h - 0.5)));
    const int j1 = std::min(grid.ny() - 1, int(std::ceil((c[1] + eps) / h - 0.5)));
    for (int j = j0; j <= j1; ++j) {
      const double dy = grid.cell_cy(j) - c[1];
      for (int i = i0; i <= i1; ++i) {
        const double dx = grid.cell_cx(i) - c[0];
        if (dx * dx + dy * dy <= r2) v.at(i, j) = kappa;
      }
    }
  }
  return v;
}

std::string cover_csv_string(const BallCover& cover) {
  std::string out = "# epsilon=" + fmt_double(cover.epsilon()) +
                    " kappa=" + fmt_double(cover.kappa()) + "\n";
  out += "x,y\n";
  for (const auto& c : cover.centers()) {
    out += fmt_double(c[0]);
    out += ',';
    out += fmt_double(c[1]);
    out += '\n';
  }
  return out;
}

void save_cover_csv(const BallCover& cover, const std::filesystem::path& path) {
  write_text_file(path, cover_csv_string(cover));
}

BallCover load_cover_csv(const std::filesystem::path& path, double domain_w,
                         double domain_h) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path.string() + "' for reading");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# epsilon=", 0) != 0) {
    throw format_error("cover CSV missing '# epsilon=... kappa=...' comment line");
  }
  double eps = 0.0, kappa = 0.0;
  {
    std::istringstream ls(line.substr(1));
    std::string tok;
    while (ls >> tok) {
      if (tok.rfind("epsilon=", 0) == 0) eps = std::stod(tok.substr(8));
      if (tok.rfind("kappa=", 0) == 0) kappa = std::stod(tok.substr(6));
    }
  }
  if (!std::getline(in, line) || line != "x,y") {
    throw format_error("cover CSV missing 'x,y' header");
  }
  BallCover cover(eps, kappa, domain_w, domain_h);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw format_error("cover CSV row without comma: '" + line + "'");
    }
    cover.insert(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return cover;
}

}  // namespace topoms
