#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "topoms/at.hpp"
#include "topoms/energy.hpp"
#include "topoms/errors.hpp"
#include "topoms/synthetic.hpp"
#include "topoms/topo.hpp"

using namespace topoms;

namespace {

ATConfig work_config() {
  ATConfig cfg;
  cfg.alpha = 0.04;
  cfg.beta = 0.005;
  cfg.eps_at = 0.05;
  cfg.outer_iters = 30;
  return cfg;
}

NodalField linear_ramp(const ImageGrid& g, double slope) {
  NodalField u(g);
  for (int j = 0; j <= g.ny(); ++j) {
    for (int i = 0; i <= g.nx(); ++i) u.at(i, j) = slope * g.node_x(i);
  }
  return u;
}

}  // namespace

TEST_CASE("the u-solve returns constant data unchanged when v is one") {
  ImageGrid g = make_constant(16, 0.62);
  ATConfig cfg = work_config();
  NodalField v(g, 1.0);
  NodalField u = at_solve_u(v, g, cfg);
  for (double x : u.values) CHECK(x == doctest::Approx(0.62).epsilon(1e-8));
}

TEST_CASE("v equal to one reproduces the plain smoothing solve") {
  ImageGrid g = make_gaussian_bump(24, 0.4, 0.6, 0.2, 0.1, 0.7);
  ATConfig cfg = work_config();
  NodalField v(g, 1.0);
  NodalField u_at = at_solve_u(v, g, cfg);

  // with v = 1 the floored coefficient max(v^2, eta) is exactly 1
  CellField unit(g, 1.0);
  SparseSystem sys = assemble(g, unit, cfg.alpha);
  auto [u_ref, rep] =
      solve_cg(sys, cfg.cg_tol, default_max_iter(sys.matrix.size()));
  REQUIRE(rep.converged);
  for (std::size_t k = 0; k < u_ref.size(); ++k) {
    CHECK(std::abs(u_at.values[k] - u_ref[k]) <= 1e-12);
  }
}

TEST_CASE("v equal to zero solves with the ellipticity floor") {
  ImageGrid g = make_step(48);
  ATConfig cfg = work_config();
  NodalField v(g, 0.0);
  NodalField u_at = at_solve_u(v, g, cfg);

  CellField floor_coeff(g, cfg.eta);
  SparseSystem sys = assemble(g, floor_coeff, cfg.alpha);
  auto [u_ref, rep] =
      solve_cg(sys, cfg.cg_tol, default_max_iter(sys.matrix.size()));
  REQUIRE(rep.converged);
  for (std::size_t k = 0; k < u_ref.size(); ++k) {
    CHECK(std::abs(u_at.values[k] - u_ref[k]) <= 1e-12);
  }

  // fidelity dominates: u tracks the data away from the jump column
  double max_dev = 0.0;
  for (int j = 0; j <= g.ny(); ++j) {
    for (int i = 0; i <= g.nx(); ++i) {
      if (std::abs(g.node_x(i) - 0.5) <= 2.0 * g.h()) continue;
      max_dev = std::max(max_dev,
                         std::abs(u_at.at(i, j) - g.f()[g.node_index(i, j)]));
    }
  }
  CHECK(max_dev < 0.02);
}

TEST_CASE("the v-solve returns one when u is flat") {
  ImageGrid g = make_constant(16, 0.5);
  ATConfig cfg = work_config();
  NodalField u(g, 0.5);
  NodalField v = at_solve_v(u, g, cfg);
  for (double x : v.values) CHECK(x == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("a uniform gradient damps v to the closed-form constant") {
  ImageGrid g = make_constant(24, 0.5);
  ATConfig cfg;
  cfg.alpha = 1.0;
  cfg.beta = 1.0;
  cfg.eps_at = 0.05;
  const double slope = 2.0;
  NodalField u = linear_ramp(g, slope);
  NodalField v = at_solve_v(u, g, cfg);

  const double b2e = cfg.beta / (2.0 * cfg.eps_at);
  const double expected = b2e / (cfg.alpha * slope * slope + b2e);
  CHECK(expected == doctest::Approx(10.0 / 14.0));
  for (double x : v.values) CHECK(x == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("steeper regions receive smaller v") {
  ImageGrid g = make_constant(32, 0.5);
  ATConfig cfg;
  cfg.alpha = 1.0;
  cfg.beta = 0.2;
  cfg.eps_at = 0.05;
  NodalField u(g);
  for (int j = 0; j <= g.ny(); ++j) {
    for (int i = 0; i <= g.nx(); ++i) {
      const double x = g.node_x(i);
      u.at(i, j) = x < 0.5 ? 0.3 * x : 0.15 + 1.5 * (x - 0.5);
    }
  }
  NodalField v = at_solve_v(u, g, cfg);
  // compare well inside each half, away from the slope change
  CHECK(v.at(8, 16) > v.at(24, 16) + 0.05);
}

TEST_CASE("v stays within its physical bounds") {
  ImageGrid g = make_gaussian_bump(32, 0.35, 0.65, 0.12, 0.1, 0.85);
  ATConfig cfg = work_config();
  cfg.outer_iters = 3;
  ATResult res = run_at(g, cfg);
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (double x : res.v.values) {
    vmin = std::min(vmin, x);
    vmax = std::max(vmax, x);
  }
  CHECK(vmin > 0.0);
  CHECK(vmax <= 1.0 + 1e-8);
}

TEST_CASE("constant data converge in a single sweep") {
  ImageGrid g = make_constant(16, 0.31);
  ATConfig cfg = work_config();
  cfg.outer_iters = 1;
  ATResult res = run_at(g, cfg);
  for (double x : res.u.values) CHECK(x == doctest::Approx(0.31).epsilon(1e-8));
  for (double x : res.v.values) CHECK(x == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(res.trace.iterations.back().energy.total ==
        doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("alternating sweeps never increase the energy") {
  ImageGrid g = make_step(64);
  ATConfig cfg = work_config();
  cfg.outer_iters = 12;
  ATResult res = run_at(g, cfg);
  REQUIRE(res.trace.iterations.size() == 12);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& rec : res.trace.iterations) {
    const double slack = 10.0 * cfg.cg_tol * std::max(1.0, std::abs(prev));
    CHECK(rec.energy.total - prev < slack);
    prev = rec.energy.total;
  }
}

TEST_CASE("the v minimum settles on the jump line") {
  ImageGrid g = make_step(128);
  SUBCASE("published parameter set") {
    ATConfig cfg;
    cfg.alpha = 20.0;
    cfg.beta = 200.0;
    cfg.eps_at = 0.05;
    cfg.outer_iters = 30;
    ATResult res = run_at(g, cfg);
    double vmin = std::numeric_limits<double>::infinity();
    double xmin = -1.0;
    for (int j = 0; j <= g.ny(); ++j) {
      for (int i = 0; i <= g.nx(); ++i) {
        if (res.v.at(i, j) < vmin) {
          vmin = res.v.at(i, j);
          xmin = g.node_x(i);
        }
      }
    }
    CHECK(std::abs(xmin - 0.5) <= 2.0 * cfg.eps_at);
  }
  SUBCASE("edge-resolving parameter set") {
    ATConfig cfg = work_config();
    ATResult res = run_at(g, cfg);
    double vmin = std::numeric_limits<double>::infinity();
    double xmin = -1.0;
    for (int j = 0; j <= g.ny(); ++j) {
      for (int i = 0; i <= g.nx(); ++i) {
        if (res.v.at(i, j) < vmin) {
          vmin = res.v.at(i, j);
          xmin = g.node_x(i);
        }
      }
    }
    CHECK(std::abs(xmin - 0.5) <= 2.0 * cfg.eps_at);
    CHECK(vmin < 0.1);  // the edge is actually detected in this regime
  }
}

TEST_CASE("thresholding marks exactly the sub-threshold cells") {
  ImageGrid g = make_constant(16, 0.5);
  NodalField ones(g, 1.0);
  CellField none = threshold_edges(ones, g, 0.8);
  for (double x : none.values) CHECK(x == 0.0);

  NodalField half(g, 0.5);
  CellField all = threshold_edges(half, g, 0.8);
  for (double x : all.values) CHECK(x == 1.0);

  CHECK_THROWS_AS(threshold_edges(ones, g, 0.0), config_error);
  CHECK_THROWS_AS(threshold_edges(ones, g, 1.0), config_error);
}

TEST_CASE("thresholded edges form a band containing the jump line") {
  ImageGrid g = make_step(128);
  ATConfig cfg = work_config();
  ATResult res = run_at(g, cfg);
  CellField edges = threshold_edges(res.v, g, 0.8);

  int marked = 0;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (edges.at(i, j) > 0.5) {
        ++marked;
        CHECK(std::abs(g.cell_cx(i) - 0.5) <= 0.3);
      }
      // every cell crossing the line is marked
      if (i * g.h() <= 0.5 && 0.5 <= (i + 1) * g.h()) {
        CHECK(edges.at(i, j) == 1.0);
      }
    }
  }
  CHECK(marked > 0);
}

TEST_CASE("both methods mark overlapping edge regions") {
  ImageGrid g = make_step(128);
  ATConfig acfg = work_config();
  ATResult at = run_at(g, acfg);
  CellField at_edges = threshold_edges(at.v, g, 0.8);

  TopoConfig tcfg;
  tcfg.alpha = 0.04;
  tcfg.beta = 0.005;
  tcfg.epsilon = 0.05;
  tcfg.kappa = 0.01;
  tcfg.batch_size = 1;
  tcfg.separation = 0.05;
  SegmentationResult topo = run(g, tcfg);

  std::size_t inter = 0, uni = 0;
  for (std::size_t k = 0; k < at_edges.values.size(); ++k) {
    const bool a = at_edges.values[k] > 0.5;
    const bool b = topo.v.values[k] != 1.0;
    if (a && b) ++inter;
    if (a || b) ++uni;
  }
  REQUIRE(uni > 0);
  CHECK(double(inter) / double(uni) >= 0.2);
}

TEST_CASE("configuration bounds are enforced") {
  ATConfig cfg = work_config();
  cfg.threshold = 1.2;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = work_config();
  cfg.eps_at = 0.0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = work_config();
  cfg.outer_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
}
