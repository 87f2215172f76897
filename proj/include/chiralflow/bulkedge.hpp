#pragma once

#include "chiralflow/lattice.hpp"

namespace chiralflow {

struct DecomposedFlow {
  double f_bulk = 0;
  double f_edge = 0;
  double f_total = 0;  // f_bulk + f_edge by construction
};

// Edge contribution: current-operator column sums over the bottom dynamical
// cell row of a narrow cylinder ladder. Equals p^2 + p^3 + p^4.
double f_edge(double p, int ladder_rows = 4);

// Bulk contribution from the 6x6 k-space matrices: the (I - R_B(0)) inverse
// is taken as the reduced resolvent on the complement of the stationary
// (uniform) eigenvector; dR_B/dky is analytic. p = 1 is handled by
// extrapolation (the eigenvalue-1 subspace degenerates there).
double f_bulk(double p);

DecomposedFlow f_total(double p);

}  // namespace chiralflow
