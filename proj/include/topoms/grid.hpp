#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace topoms {

/// Rectangular vertex-centered grid carrying the image datum f.
///
/// Pixels are identified with grid nodes, so a W x H image yields
/// nx = W-1 by ny = H-1 cells of side h = 1/max(nx,ny); the longer
/// side of the domain has unit length.  Node (i,j) sits at (i*h, j*h),
/// cell (i,j) spans [i*h,(i+1)*h] x [j*h,(j+1)*h].  Storage is
/// row-major with i (the x index) fastest.
class ImageGrid {
 public:
  /// Builds a grid from nodal data; `nodal` must hold (nx+1)*(ny+1)
  /// finite values.  Throws config_error for nx < 2 or ny < 2.
  ImageGrid(int nx, int ny, std::vector<double> nodal);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  const std::vector<double>& f() const { return f_; }

  int nodes_x() const { return nx_ + 1; }
  int nodes_y() const { return ny_ + 1; }
  std::size_t node_count() const { return std::size_t(nx_ + 1) * (ny_ + 1); }
  std::size_t cell_count() const { return std::size_t(nx_) * ny_; }

  double width() const { return nx_ * h_; }
  double height() const { return ny_ * h_; }

  std::size_t node_index(int i, int j) const {
    return std::size_t(j) * (nx_ + 1) + i;
  }
  std::size_t cell_index(int i, int j) const { return std::size_t(j) * nx_ + i; }

  double node_x(int i) const { return i * h_; }
  double node_y(int j) const { return j * h_; }
  double cell_cx(int i) const { return (i + 0.5) * h_; }
  double cell_cy(int j) const { return (j + 0.5) * h_; }

 private:
  int nx_;
  int ny_;
  double h_;
  std::vector<double> f_;
};

/// Scalar field on grid nodes, same layout as ImageGrid::f.
struct NodalField {
  int nx = 0;
  int ny = 0;
  std::vector<double> values;

  NodalField() = default;
  explicit NodalField(const ImageGrid& g, double init = 0.0)
      : nx(g.nx()), ny(g.ny()), values(g.node_count(), init) {}

  bool matches(const ImageGrid& g) const {
    return nx == g.nx() && ny == g.ny() &&
           values.size() == std::size_t(nx + 1) * (ny + 1);
  }
  double& at(int i, int j) { return values[std::size_t(j) * (nx + 1) + i]; }
  double at(int i, int j) const { return values[std::size_t(j) * (nx + 1) + i]; }
};

/// Scalar field on cell centers (piecewise-constant coefficients,
/// recovered gradients, edge indicators).
struct CellField {
  int nx = 0;
  int ny = 0;
  std::vector<double> values;

  CellField() = default;
  explicit CellField(const ImageGrid& g, double init = 0.0)
      : nx(g.nx()), ny(g.ny()), values(g.cell_count(), init) {}

  bool matches(const ImageGrid& g) const {
    return nx == g.nx() && ny == g.ny() &&
           values.size() == std::size_t(nx) * ny;
  }
  double& at(int i, int j) { return values[std::size_t(j) * nx + i]; }
  double at(int i, int j) const { return values[std::size_t(j) * nx + i]; }
};

enum class SaveMode { clamp, rescale };

/// Reads an 8-bit P2 (ASCII) or P5 (binary) PGM; pixel values are
/// normalized to [0,1] by dividing by 255.  Header comments (# ...)
/// are permitted.  Throws format_error on malformed or unsupported
/// input (including maxval != 255 and images smaller than 3x3).
ImageGrid load_pgm(const std::filesystem::path& path);

/// Writes a nodal field as binary P5 PGM, one pixel per node.
/// clamp:   pixel = round(255 * min(max(v,0),1)), round half up.
/// rescale: affine map [min,max] -> [0,255]; constant fields map to 128.
void save_pgm(const NodalField& field, const std::filesystem::path& path,
              SaveMode mode);

/// Same, one pixel per cell.
void save_pgm(const CellField& field, const std::filesystem::path& path,
              SaveMode mode);

/// Tensor-product bilinear interpolation of nodal values at (x,y).
/// Throws std::domain_error if the point lies outside the closed
/// domain rectangle.
double bilinear_eval(const NodalField& field, const ImageGrid& grid, double x,
                     double y);

}  // namespace topoms
