#include "topoms/synthetic.hpp"

#include <cmath>

namespace topoms {

namespace {

template <typename F>
ImageGrid render(int n, F f) {
  const double h = 1.0 / n;
  std::vector<double> nodal(std::size_t(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      nodal[std::size_t(j) * (n + 1) + i] = f(i * h, j * h);
    }
  }
  return ImageGrid(n, n, std::move(nodal));
}

}  // namespace

ImageGrid make_constant(int n, double value) {
  return render(n, [value](double, double) { return value; });
}

ImageGrid make_step(int n) {
  return render(n, [](double x, double) { return x < 0.5 ? 0.0 : 1.0; });
}

ImageGrid make_gaussian_bump(int n, double cx, double cy, double sigma,
                             double base, double amplitude) {
  return render(n, [=](double x, double y) {
    const double dx = x - cx;
    const double dy = y - cy;
    return base + amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
  });
}

ImageGrid make_ramp(int n) {
  return render(n, [](double x, double) { return x; });
}

}  // namespace topoms
