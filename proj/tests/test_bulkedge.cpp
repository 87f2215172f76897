#include <doctest.h>

#include <cmath>
#include <random>

#include "chiralflow/bloch.hpp"
#include "chiralflow/bulkedge.hpp"
#include "chiralflow/quantum.hpp"
#include "chiralflow/zeno.hpp"

using namespace chiralflow;
using cxd = std::complex<double>;

TEST_CASE("edge term equals p^2 + p^3 + p^4 exactly") {
  for (double p : {0.0, 0.25, 0.5, 0.75, 1.0})
    CHECK(std::abs(f_edge(p) - (p * p + p * p * p + p * p * p * p)) < 1e-10);
  for (int k = 0; k <= 20; ++k) {
    double p = std::min(1.0, 0.05 * k);
    CHECK(std::abs(f_edge(p) - (p * p + p * p * p + p * p * p * p)) < 1e-10);
  }
}

TEST_CASE("edge term is insensitive to the ladder height") {
  for (double p : {0.3, 0.8})
    CHECK(f_edge(p, 4) == doctest::Approx(f_edge(p, 6)).epsilon(1e-12));
}

TEST_CASE("named bulk values") {
  CHECK(std::abs(f_bulk(0.0)) == 0.0);
  CHECK(f_bulk(1.0) == doctest::Approx(1.0).epsilon(1e-6));
  DecomposedFlow d = f_total(1.0);
  CHECK(d.f_total == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(d.f_total == d.f_bulk + d.f_edge);
  CHECK(f_total(0.0).f_total == 0.0);
}

TEST_CASE("reduced resolvent inverts I - R_B(0) on the uniform complement") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double p : {0.3, 0.7}) {
    Eigen::MatrixXcd r = bloch_cycle(LatticeKind::lieb, p, {0, 0}, 0);
    Eigen::MatrixXcd pi = Eigen::MatrixXcd::Constant(6, 6, 1.0 / 6);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(6, 6) - r;
    Eigen::MatrixXcd x =
        (a + pi).partialPivLu().solve(Eigen::MatrixXcd::Identity(6, 6) - pi);
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXcd v(6);
      for (int i = 0; i < 6; ++i) v[i] = cxd(u(rng), u(rng));
      v -= Eigen::VectorXcd::Constant(6, v.mean());  // orthogonal to uniform
      CHECK((a * (x * v) - v).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("analytic dky derivative matches central finite differences") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  const double h = 1e-5;
  for (double p : {0.4, 0.9})
    for (int trial = 0; trial < 4; ++trial) {
      Eigen::Vector2d k(u(rng), u(rng));
      double theta = u(rng);
      // ky enters through (ka, kb) with one cell-row per step along a and b
      Eigen::Vector2d step(h, h);
      Eigen::MatrixXcd fd = (bloch_cycle(LatticeKind::lieb, p, k + step, theta) -
                             bloch_cycle(LatticeKind::lieb, p, k - step, theta)) /
                            (2 * h);
      Eigen::MatrixXcd an = bloch_cycle_dky(LatticeKind::lieb, p, k, theta);
      CHECK((fd - an).cwiseAbs().maxCoeff() < 1e-9);
    }
}

namespace {

// Finite-N evaluation of the bulk term on a tall periodic strip: the m-th
// term (1/Lx) <I| J_B P_{S_m} R_B^m G |I> with S_m the interface band
// thickened by m cell rows. Converges to f_bulk at the lambda_2 rate.
double bulk_term(double p, int m, int ly) {
  LatticeSpec spec{LatticeKind::lieb, 1, ly, Boundary::torus};
  Lattice lat = build_lattice(spec);
  MeasurementSchedule sched = build_schedule(lat);
  ZenoEngine eng = ZenoEngine::build(lat, sched, p, CountingWeight::all_links);
  const int l1 = ly / 2;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(lat.size());
  for (SiteId s = 0; s < lat.size(); ++s)
    if (lat.sites[s].cell_y < l1) g[s] = 1.0;
  for (int i = 0; i < m; ++i) g = eng.apply_cycle(g);
  for (SiteId s = 0; s < lat.size(); ++s)
    if (lat.sites[s].cell_y < l1 - m || lat.sites[s].cell_y > l1 + m) g[s] = 0.0;
  Eigen::VectorXd w = eng.current_row();
  return w.dot(g) / spec.lx;
}

}  // namespace

TEST_CASE("finite-N interface evaluation converges to the analytic bulk term") {
  for (double p : {0.5, 0.8}) {
    GapReport gap = spectral_gap_check(LatticeKind::lieb, p, 12);
    double lambda2 = gap.max_radius;  // worst contraction over nonzero k
    double target = f_bulk(p);
    for (int m : {8, 16}) {
      double tail = std::pow(lambda2, m) / (1 - lambda2);
      CHECK(std::abs(bulk_term(p, m, 48) - target) < 5.0 * tail + 1e-9);
    }
  }
}

TEST_CASE("decomposition matches direct simulation within one percent") {
  for (double p : {0.6, 0.8, 0.96}) {
    LatticeSpec spec{LatticeKind::lieb, 8, 16, Boundary::cylinder_x};
    Lattice lat = build_lattice(spec);
    MeasurementSchedule sched = build_schedule(lat);
    CutSpec cut = flow_cut(lat, sched, default_cut_x(lat));
    ZenoEngine eng = ZenoEngine::build(lat, sched, p, CountingWeight::cut, &cut);
    std::vector<Eigen::VectorXd> dens;
    FlowTrace tr = eng.run_flow(make_fill(lat, FillLowerHalf{}), 200, &dens);
    double f_sim = steady_flow(lat, tr, dens, 10);
    double predicted = f_total(p).f_total / 4.0;
    CHECK(std::abs(predicted - f_sim) / f_sim < 0.01);
  }
}

TEST_CASE("total flow is nondecreasing in p") {
  double prev = -1e-12;
  for (int k = 0; k <= 20; ++k) {
    double f = f_total(std::min(1.0, 0.05 * k)).f_total;
    CHECK(f >= prev - 1e-10);
    prev = f;
  }
}
