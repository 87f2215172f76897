#include "chiralflow/bulkedge.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "chiralflow/bloch.hpp"
#include "chiralflow/zeno.hpp"

namespace chiralflow {

double f_edge(double p, int ladder_rows) {
  LatticeSpec spec{LatticeKind::lieb, 2, ladder_rows, Boundary::cylinder_x};
  Lattice lat = build_lattice(spec);
  MeasurementSchedule sched = build_schedule(lat);
  ZenoEngine eng = ZenoEngine::build(lat, sched, p, CountingWeight::all_links);
  Eigen::VectorXd w = eng.current_row();
  double acc = 0;
  for (SiteId s = 0; s < lat.size(); ++s)
    if (lat.sites[s].cell_y == 0) acc += w[s];
  return acc / spec.lx;
}

namespace {

double f_bulk_regular(double p) {
  const int n = 6;
  const Eigen::Vector2d k0(0, 0);
  Eigen::MatrixXcd r = bloch_cycle(LatticeKind::lieb, p, k0, 0.0);
  Eigen::MatrixXcd j = bloch_current(LatticeKind::lieb, p, k0);
  Eigen::MatrixXcd dky = bloch_cycle_dky(LatticeKind::lieb, p, k0, 0.0);

  // reduced resolvent of (I - R) on the complement of the uniform eigenvector
  Eigen::MatrixXcd pi = Eigen::MatrixXcd::Constant(n, n, 1.0 / n);
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n) - r;
  Eigen::MatrixXcd x = (a + pi).partialPivLu().solve(
      Eigen::MatrixXcd::Identity(n, n) - pi);

  std::complex<double> val =
      std::complex<double>(0, 1) * (Eigen::VectorXcd::Ones(n).transpose() * (j * x * dky) *
                                    Eigen::VectorXcd::Ones(n))(0, 0);
  return val.real();
}

}  // namespace

double f_bulk(double p) {
  if (p < 0 || p > 1) throw std::invalid_argument("p out of [0,1]");
  if (p == 0) return 0.0;
  if (p > 1 - 1e-9) {
    // eigenvalue-1 subspace of R_B(0) is two-dimensional exactly at p = 1
    double d = 2e-6;
    double f1 = f_bulk_regular(1 - d);
    double f2 = f_bulk_regular(1 - d / 2);
    return 2 * f2 - f1;
  }
  return f_bulk_regular(p);
}

DecomposedFlow f_total(double p) {
  DecomposedFlow out;
  out.f_bulk = f_bulk(p);
  out.f_edge = f_edge(p);
  out.f_total = out.f_bulk + out.f_edge;
  return out;
}

}  // namespace chiralflow
