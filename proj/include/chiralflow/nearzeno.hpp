#pragma once

#include <Eigen/Dense>

#include "chiralflow/lattice.hpp"
#include "chiralflow/quantum.hpp"
#include "chiralflow/zeno.hpp"

namespace chiralflow {

enum class SiteCase { inert, case1, case2 };

// Per-step classification: pair members and their neighbors (case2), lone
// free-set members and their neighbors (case1), everything else inert.
std::vector<SiteCase> classify_sites(const Lattice& lat, const MeasurementSchedule& sched,
                                     int step);

// First-order correction matrix R~_i (zero row and column sums, exact).
// Diagonal deg(a) and -1 nearest-neighbor links outside the activated pairs;
// on each pair: 0 diagonal, (deg a + deg b)/2 - 1 on the intra-pair link and
// -1/2 between each member and every external neighbor of the pair. Derived
// at perfect switching (n*tau = pi/2).
Eigen::MatrixXd build_correction(const Lattice& lat, const MeasurementSchedule& sched, int step);

struct NzEngine {
  const Lattice* lat = nullptr;
  double n_tau_sq = 0;              // n * tau^2
  Eigen::MatrixXd r_nz;             // theta = 0
  Eigen::MatrixXd j_nz;             // -i dR_nz(theta)/dtheta |_0, exact
  double lx = 1;

  // Requires perfect switching (T = 4*pi for the 8-step cycle). Keeps only
  // first-order terms in n*tau^2 when expanding the cycle product.
  static NzEngine build(const Lattice& lat, const MeasurementSchedule& sched,
                        const ProtocolParams& params,
                        CountingWeight weight = CountingWeight::all_links,
                        const CutSpec* cut = nullptr);

  Eigen::MatrixXcd r_nz_theta(const MeasurementSchedule& sched, const ProtocolParams& params,
                              CountingWeight weight, const CutSpec* cut, double theta) const;

  FlowTrace run_flow(const Eigen::VectorXd& g0, int n_cycles,
                     std::vector<Eigen::VectorXd>* cycle_density = nullptr) const;
};

// Steady per-cycle flow across the cut predicted by R_nz.
double nz_flow(const Lattice& lat, const MeasurementSchedule& sched, int n_meas, int n_cycles,
               const Eigen::VectorXd& g0, const CutSpec& cut, int transient = 3);

}  // namespace chiralflow
