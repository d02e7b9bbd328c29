#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "topoms/errors.hpp"
#include "topoms/oracle.hpp"
#include "topoms/synthetic.hpp"
#include "topoms/topo.hpp"

using namespace topoms;

namespace {

TopoConfig fig1_config() {
  TopoConfig cfg;
  cfg.alpha = 20.0;
  cfg.beta = 200.0;
  cfg.epsilon = 0.05;
  cfg.kappa = 0.01;
  cfg.batch_size = 1;
  cfg.separation = 0.05;
  return cfg;
}

// Parameters in the regime where the expansion is sharp on the step
// image (ball radius well below the smoothing length sqrt(alpha)).
TopoConfig step_config() {
  TopoConfig cfg;
  cfg.alpha = 0.04;
  cfg.beta = 0.005;
  cfg.epsilon = 0.05;
  cfg.kappa = 0.01;
  cfg.batch_size = 1;
  cfg.separation = 0.05;
  return cfg;
}

}  // namespace

TEST_CASE("predicted gain follows the closed-form coefficient") {
  TopoConfig cfg = fig1_config();
  CHECK(predicted_delta_G(0.0, cfg) == 0.0);
  // -eps^2 pi alpha (1-kappa)/(1+kappa) at gsq = 1
  CHECK(predicted_delta_G(1.0, cfg) ==
        doctest::Approx(-0.15396914490365818).epsilon(1e-12));
  // quadratic scaling in the radius
  TopoConfig wide = cfg;
  wide.epsilon = 2.0 * cfg.epsilon;
  CHECK(predicted_delta_G(3.3, wide) ==
        doctest::Approx(4.0 * predicted_delta_G(3.3, cfg)).epsilon(1e-14));
  // linear in gsq
  CHECK(predicted_delta_G(5.0, cfg) ==
        doctest::Approx(5.0 * predicted_delta_G(1.0, cfg)).epsilon(1e-14));
}

TEST_CASE("the acceptance threshold sits between gsq 129 and 130") {
  TopoConfig cfg = fig1_config();
  CHECK_FALSE(accept_test(0.0, cfg));
  CHECK_FALSE(accept_test(129.0, cfg));
  CHECK(accept_test(130.0, cfg));
  // threshold value: 2 beta (1+kappa) / (eps alpha pi (1-kappa))
  const double gstar = 2.0 * cfg.beta * (1.0 + cfg.kappa) /
                       (cfg.epsilon * cfg.alpha * std::numbers::pi *
                        (1.0 - cfg.kappa));
  CHECK(gstar == doctest::Approx(129.89615557399134).epsilon(1e-12));
  CHECK(accept_test(gstar * 1.0000001, cfg));
  CHECK_FALSE(accept_test(gstar * 0.9999999, cfg));
}

TEST_CASE("accepting equals non-positive predicted total change") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(0.0, 400.0);
  TopoConfig cfg = fig1_config();
  for (int k = 0; k < 500; ++k) {
    const double gsq = dist(rng);
    const double dj = predicted_delta_G(gsq, cfg) + 2.0 * cfg.beta * cfg.epsilon;
    if (std::abs(dj) < 1e-9) continue;  // knife edge, either rounding wins
    CHECK(accept_test(gsq, cfg) == (dj <= 0.0));
  }
}

TEST_CASE("select_batch returns nothing for a flat field") {
  ImageGrid g = make_constant(16, 0.5);
  TopoConfig cfg = fig1_config();
  BallCover cover(cfg.epsilon, cfg.kappa, g.width(), g.height());
  CellField gsq(g, 0.0);
  CHECK(select_batch(gsq, cover, g, cfg).empty());
}

TEST_CASE("a single passing peak yields a single center") {
  ImageGrid g = make_constant(16, 0.5);
  TopoConfig cfg = fig1_config();
  cfg.batch_size = 3;
  BallCover cover(cfg.epsilon, cfg.kappa, g.width(), g.height());
  CellField gsq(g, 1.0);  // far below threshold
  gsq.at(7, 9) = 500.0;
  auto centers = select_batch(gsq, cover, g, cfg);
  REQUIRE(centers.size() == 1);
  CHECK(centers[0][0] == doctest::Approx(g.cell_cx(7)));
  CHECK(centers[0][1] == doctest::Approx(g.cell_cy(9)));
}

TEST_CASE("gsq ties break toward the smaller row-major cell index") {
  ImageGrid g = make_constant(4, 0.5);
  TopoConfig cfg = fig1_config();
  cfg.epsilon = 0.5;  // comfortably above 2h
  cfg.batch_size = 2;
  cfg.separation = 1.5;  // wider than the domain: only one can be chosen
  BallCover cover(cfg.epsilon, cfg.kappa, g.width(), g.height());
  CellField gsq(g, 0.0);
  gsq.at(2, 1) = 700.0;  // index 6
  gsq.at(1, 2) = 700.0;  // index 9
  auto centers = select_batch(gsq, cover, g, cfg);
  REQUIRE(centers.size() == 1);
  CHECK(centers[0][0] == doctest::Approx(g.cell_cx(2)));
  CHECK(centers[0][1] == doctest::Approx(g.cell_cy(1)));
}

TEST_CASE("select_batch matches a brute-force greedy reference") {
  ImageGrid g = make_constant(8, 0.5);
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> gdist(0.0, 300.0);
  std::uniform_real_distribution<double> pdist(0.0, 1.0);

  for (int trial = 0; trial < 25; ++trial) {
    TopoConfig cfg = fig1_config();
    cfg.epsilon = 0.25;
    cfg.batch_size = 1 + int(trial % 4);
    cfg.separation = (trial % 3) * 0.2;
    BallCover cover(cfg.epsilon, cfg.kappa, g.width(), g.height());
    if (trial % 2 == 1) cover.insert(pdist(rng), pdist(rng));
    CellField gsq(g);
    for (double& v : gsq.values) v = gdist(rng);

    // independent restatement of the rule
    std::vector<std::array<double, 2>> want;
    std::vector<std::size_t> order(gsq.values.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return gsq.values[a] != gsq.values[b] ? gsq.values[a] > gsq.values[b]
                                            : a < b;
    });
    for (std::size_t cell : order) {
      if (int(want.size()) >= cfg.batch_size) break;
      if (!accept_test(gsq.values[cell], cfg)) continue;
      const double x = g.cell_cx(int(cell % g.nx()));
      const double y = g.cell_cy(int(cell / g.nx()));
      if (cover.contains(x, y)) continue;
      bool close = false;
      for (const auto& p : want) {
        close = close || std::hypot(x - p[0], y - p[1]) <= cfg.separation;
      }
      if (close) continue;
      want.push_back({x, y});
    }

    auto got = select_batch(gsq, cover, g, cfg);
    REQUIRE(got.size() == want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      CHECK(got[k][0] == want[k][0]);
      CHECK(got[k][1] == want[k][1]);
    }
  }
}

TEST_CASE("candidates inside the existing cover are skipped") {
  ImageGrid g = make_constant(16, 0.5);
  TopoConfig cfg = fig1_config();
  BallCover cover(cfg.epsilon, cfg.kappa, g.width(), g.height());
  cover.insert(g.cell_cx(8), g.cell_cy(8));
  CellField gsq(g, 0.0);
  gsq.at(8, 8) = 1e6;  // inside the existing ball
  auto centers = select_batch(gsq, cover, g, cfg);
  CHECK(centers.empty());
}

TEST_CASE("a constant image stops immediately with an empty cover") {
  ImageGrid g = make_constant(64, 0.43);
  TopoConfig cfg = fig1_config();
  SegmentationResult res = run(g, cfg);
  CHECK(res.stopped_by == StopReason::threshold);
  CHECK(res.cover.ball_count() == 0);
  CHECK(res.trace.iterations.empty());
  for (double v : res.u.values) CHECK(v == doctest::Approx(0.43).epsilon(1e-8));
  for (double v : res.v.values) CHECK(v == 1.0);
}

TEST_CASE("step image run keeps all selected centers near the jump") {
  ImageGrid g = make_step(128);
  SUBCASE("published parameter set") {
    // alpha=20 smooths the unit-contrast step so strongly that no cell
    // reaches the acceptance threshold: the empty cover is optimal and
    // the geometric claim holds vacuously
    SegmentationResult res = run(g, fig1_config());
    for (const auto& rec : res.trace.iterations) {
      for (const auto& c : rec.centers) {
        CHECK(std::abs(c[0] - 0.5) <= res.cover.epsilon() + g.h());
      }
    }
    CHECK(descent_audit(res.trace));
  }
  SUBCASE("expansion-sharp parameter set") {
    TopoConfig cfg = step_config();
    SegmentationResult res = run(g, cfg);
    REQUIRE(res.cover.ball_count() > 0);
    for (const auto& rec : res.trace.iterations) {
      for (const auto& c : rec.centers) {
        CHECK(std::abs(c[0] - 0.5) <= cfg.epsilon + g.h());
      }
    }
    CHECK(res.stopped_by == StopReason::threshold);
    // recomputed energies decrease strictly at every accepted iteration
    CHECK(descent_audit(res.trace));
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& rec : res.trace.iterations) {
      CHECK(rec.energy.total < prev);
      prev = rec.energy.total;
    }
  }
}

TEST_CASE("covers grow strictly and never re-enter themselves") {
  ImageGrid g = make_step(64);
  TopoConfig cfg = step_config();
  SegmentationResult res = run(g, cfg);
  REQUIRE(res.cover.ball_count() > 1);

  // batch size 1: one new ball per recorded iteration
  std::size_t n = 0;
  for (const auto& rec : res.trace.iterations) {
    CHECK(rec.centers.size() == 1);
    ++n;
  }
  CHECK(n == res.cover.ball_count());

  // every center keeps distance > epsilon to all earlier centers
  const auto& centers = res.cover.centers();
  for (std::size_t k = 1; k < centers.size(); ++k) {
    for (std::size_t m = 0; m < k; ++m) {
      const double d = std::hypot(centers[k][0] - centers[m][0],
                                  centers[k][1] - centers[m][1]);
      CHECK(d > res.cover.epsilon());
    }
  }

  // the final indicator is the indicator of the final cover
  CellField ref = indicator_field(res.cover, g);
  REQUIRE(ref.values.size() == res.v.values.size());
  for (std::size_t k = 0; k < ref.values.size(); ++k) {
    CHECK(res.v.values[k] == ref.values[k]);
  }
}

TEST_CASE("an accept-everything configuration covers the grid and halts") {
  ImageGrid g = make_gaussian_bump(12, 0.4, 0.4, 0.2, 0.1, 0.8);
  TopoConfig cfg;
  cfg.alpha = 1.0;
  cfg.beta = 1e-12;  // every positive-gradient cell passes
  cfg.epsilon = 0.2;
  cfg.kappa = 0.01;
  cfg.batch_size = 8;
  cfg.separation = 0.0;
  cfg.max_iters = 10000;
  SegmentationResult res = run(g, cfg);
  CHECK(res.stopped_by == StopReason::no_candidates);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      CHECK(res.cover.contains(g.cell_cx(i), g.cell_cy(j)));
    }
  }
  CHECK(res.cover.ball_count() <= g.cell_count());
}

TEST_CASE("max_iters is honored as a backstop") {
  ImageGrid g = make_step(64);
  TopoConfig cfg = step_config();
  cfg.max_iters = 3;
  SegmentationResult res = run(g, cfg);
  CHECK(res.stopped_by == StopReason::max_iters);
  CHECK(res.trace.iterations.size() == 3);
}

TEST_CASE("scaling data by 4 and beta by 16 reproduces the selection") {
  // power-of-two intensity scaling is exact in floating point, so the
  // selected centers must agree bitwise when beta follows quadratically
  ImageGrid base = make_step(64);
  std::vector<double> scaled = base.f();
  for (double& v : scaled) v *= 4.0;
  ImageGrid big(base.nx(), base.ny(), std::move(scaled));

  TopoConfig cfg = step_config();
  cfg.max_iters = 6;
  TopoConfig cfg_big = cfg;
  cfg_big.beta = 16.0 * cfg.beta;

  SegmentationResult a = run(base, cfg);
  SegmentationResult b = run(big, cfg_big);
  REQUIRE(a.cover.ball_count() == b.cover.ball_count());
  for (std::size_t k = 0; k < a.cover.centers().size(); ++k) {
    CHECK(a.cover.centers()[k][0] == b.cover.centers()[k][0]);
    CHECK(a.cover.centers()[k][1] == b.cover.centers()[k][1]);
  }
}

TEST_CASE("a mirror-symmetric image yields a mirror-symmetric gsq field") {
  // symmetric about the horizontal midline
  const int n = 48;
  ImageGrid g = make_gaussian_bump(n, 0.4, 0.5, 0.18, 0.1, 0.8);
  TopoConfig cfg;
  cfg.alpha = 0.05;
  cfg.kappa = 0.01;
  CellField unit(g, 1.0);
  SparseSystem sys = assemble(g, unit, cfg.alpha);
  auto [u, rep] = solve_cg(sys, 1e-11, 10 * default_max_iter(sys.matrix.size()));
  REQUIRE(rep.converged);
  NodalField uf(g);
  uf.values = std::move(u);
  CellGradients grads = cell_gradients(uf, g);
  for (int j = 0; j < n / 2; ++j) {
    for (int i = 0; i < n; ++i) {
      CHECK(grads.gsq.at(i, j) ==
            doctest::Approx(grads.gsq.at(i, n - 1 - j)).epsilon(1e-7));
    }
  }
}

TEST_CASE("trace records predicted gains and solver work per iteration") {
  ImageGrid g = make_step(64);
  TopoConfig cfg = step_config();
  cfg.max_iters = 4;
  SegmentationResult res = run(g, cfg);
  REQUIRE(res.trace.iterations.size() == 4);
  int iter = 0;
  for (const auto& rec : res.trace.iterations) {
    CHECK(rec.iter == iter++);
    REQUIRE(rec.centers.size() == rec.predicted_delta_J.size());
    REQUIRE(rec.centers.size() == rec.ball_exits_domain.size());
    for (double dj : rec.predicted_delta_J) CHECK(dj <= 0.0);
    CHECK(rec.solver.converged);
    CHECK(rec.solver.iterations > 0);
    CHECK(rec.energy.total > 0.0);
  }
  const std::string csv = trace_csv_string(res.trace);
  CHECK(csv.rfind("iter,n_new_balls,n_total_balls,fidelity,dirichlet,length,"
                  "total,cg_iters\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("configuration invariants are enforced") {
  ImageGrid g = make_constant(16, 0.5);
  TopoConfig cfg = step_config();

  TopoConfig bad = cfg;
  bad.kappa = 0.5;
  bad.alpha = 3.0;  // alpha*kappa = 1.5
  CHECK_THROWS_AS(bad.validate(), config_error);

  bad = cfg;
  bad.kappa = 0.1;
  bad.epsilon = 0.05;  // kappa > epsilon
  CHECK_THROWS_AS(bad.validate(), config_error);

  bad = cfg;
  bad.epsilon = g.h();  // below 2h
  CHECK_THROWS_AS(bad.validate_for(g), config_error);

  bad = cfg;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), config_error);

  bad = cfg;
  bad.separation = -1.0;
  CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("solver breakdown inside a run carries the partial trace") {
  ImageGrid g = make_step(64);
  TopoConfig cfg = step_config();
  cfg.cg_tol = 1e-300;  // unattainable
  CHECK_THROWS_AS(run(g, cfg), run_aborted);
  try {
    run(g, cfg);
  } catch (const run_aborted& e) {
    CHECK(e.partial_trace.iterations.empty());  // first solve already fails
    CHECK_FALSE(e.report.converged);
  }
}
