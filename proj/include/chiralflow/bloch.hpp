#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "chiralflow/lattice.hpp"

namespace chiralflow {

// k-space transfer matrices of the periodically measured bulk. k is given in
// reciprocal coordinates of the (a,b) Bravais basis: k = (ka, kb) enters as
// phases e^{-i(ka*na + kb*nb)} for a hop shifting cells by na*a + nb*b. The
// block size is the internal site count of the lattice kind (6 for lieb).

Eigen::MatrixXcd bloch_step(LatticeKind kind, int step, double p, const Eigen::Vector2d& k,
                            double theta);
Eigen::MatrixXcd bloch_cycle(LatticeKind kind, double p, const Eigen::Vector2d& k, double theta);

// J_B(k) = -i d/dtheta R_cyc(k,theta) |_{theta=0}
Eigen::MatrixXcd bloch_current(LatticeKind kind, double p, const Eigen::Vector2d& k);

// d/dky R_cyc(k,theta): analytic derivative with respect to the Cartesian
// y-component of k (each entry is a monomial in e^{i k.a}, e^{i k.b}).
Eigen::MatrixXcd bloch_cycle_dky(LatticeKind kind, double p, const Eigen::Vector2d& k,
                                 double theta);

double spectral_radius(const Eigen::MatrixXcd& m);

// Characteristic polynomial coefficients, highest degree first (monic).
Eigen::VectorXcd char_poly(const Eigen::MatrixXcd& m);

struct GapReport {
  int grid = 0;
  double max_radius = 0;          // over nonzero k
  Eigen::Vector2d argmax_k{0, 0};
  bool all_below_one = false;
  std::vector<std::array<double, 3>> rows;  // ka, kb, spectral radius
};

// Max spectral radius of R_cyc(k, 0) over a grid of nonzero k.
GapReport spectral_gap_check(LatticeKind kind, double p, int grid);

}  // namespace chiralflow
