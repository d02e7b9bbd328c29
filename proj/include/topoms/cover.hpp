#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "topoms/grid.hpp"

namespace topoms {

/// Union of equal-radius balls representing the edge set: a list of
/// centers with shared radius epsilon and contrast kappa.  The grid
/// coefficient induced by the cover is kappa inside the union and 1
/// elsewhere (see indicator_field).
class BallCover {
 public:
  /// domain_w/domain_h bound the admissible center positions.
  BallCover(double epsilon, double kappa, double domain_w, double domain_h);

  /// Adds a center.  Throws config_error if the point lies outside the
  /// closed domain rectangle; an exact duplicate throws
  /// std::invalid_argument (a duplicate signals a driver bug).
  void insert(double x, double y);

  /// True iff (x,y) lies in the union of balls (closed: dist <= epsilon).
  bool contains(double x, double y) const;

  std::size_t ball_count() const { return centers_.size(); }
  double length_estimate() const { return 2.0 * epsilon_ * double(centers_.size()); }

  double epsilon() const { return epsilon_; }
  double kappa() const { return kappa_; }
  double domain_w() const { return domain_w_; }
  double domain_h() const { return domain_h_; }
  const std::vector<std::array<double, 2>>& centers() const { return centers_; }

 private:
  double epsilon_;
  double kappa_;
  double domain_w_;
  double domain_h_;
  std::vector<std::array<double, 2>> centers_;
};

/// Cell value = kappa if the cell center lies in the union of balls,
/// else exactly 1.  No other values occur.
CellField indicator_field(const BallCover& cover, const ImageGrid& grid);

/// CSV serialization: a comment line `# epsilon=<v> kappa=<v>` followed
/// by a `x,y` header and one row per center, in domain units.
void save_cover_csv(const BallCover& cover, const std::filesystem::path& path);
std::string cover_csv_string(const BallCover& cover);
BallCover load_cover_csv(const std::filesystem::path& path, double domain_w,
                         double domain_h);

}  // namespace topoms
