#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "chiralflow/lattice.hpp"

namespace chiralflow {

using Cmat = Eigen::MatrixXcd;

struct ProtocolParams {
  double period_t = 4.0 * M_PI;  // full-cycle duration T (hbar = t_hop = 1)
  int n_meas = 1;                // measurement repetitions per step

  double tau(int period) const { return period_t / (period * n_meas); }
};

// Raised when trace / hermiticity drift exceeds the run budget.
struct NumericalHealthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvolutionCache {
  double tau = 0;
  Cmat u;                 // exp(-i tau H)
  Eigen::MatrixXd abs2u;  // |u|^2 elementwise (diagonal propagation kernel)
};

// One-time real-symmetric eigendecomposition of H; asserts unitarity of U.
EvolutionCache make_cache(const Lattice& lat, double tau);

// G -> U G U†
Cmat evolve_free(const Cmat& g, const EvolutionCache& cache);

// Projective density measurement of every site in `measured`: zeroes each
// off-diagonal entry with at least one measured index.
void measure_sites_inplace(Cmat& g, const std::vector<char>& measured_mask);
Cmat measure_sites(Cmat g, const std::vector<SiteId>& measured, int n_sites);
Cmat measure_sites(Cmat g, const std::vector<char>& measured_mask);

// Soft injection / extraction at one site (closed-hierarchy affine maps).
Cmat inject(Cmat g, SiteId site, double epsilon);
Cmat extract(Cmat g, SiteId site, double epsilon);

double hs_norm(const Cmat& g);

// Called after each protocol step with the current site densities.
using StepObserver = std::function<void(int cycle, int step, const Eigen::VectorXd& density)>;

// Full measurement cycle(s): for step i, measure (A_i ∩ A_{i-1})^c once, then
// n repetitions of [evolve tau; measure A_i^c], with A_0 = A_s. Exact; the
// inter-measurement support structure is exploited for speed but no terms are
// dropped. Trace drift beyond budget raises NumericalHealthError.
Cmat run_cycle(const Cmat& g0, const Lattice& lat, const MeasurementSchedule& sched,
               const ProtocolParams& params, int n_cycles = 1,
               const StepObserver& observer = {});

// Same step sequencing with all measurements omitted: each step applies
// U_{A_i}^n where the hopping is restricted to A_i (pair blocks).
Cmat run_floquet_cycle(const Cmat& g0, const Lattice& lat, const MeasurementSchedule& sched,
                       const ProtocolParams& params, int n_cycles = 1,
                       const StepObserver& observer = {});

// Transported charge across the cut: gain of the right half.
double flow_sim(const Cmat& g_before, const Cmat& g_after, const CutSpec& cut);
double flow_sim(const Eigen::VectorXd& before, const Eigen::VectorXd& after, const CutSpec& cut);

// -------------------------------------------------------------------------
// Initial fills

struct FillLowerHalf {};
struct FillUniform { double density = 0.5; };
struct FillSingleSite { SiteId site = 0; };
struct FillFromFile { std::string path; };
using FillSpec = std::variant<FillLowerHalf, FillUniform, FillSingleSite, FillFromFile>;

Eigen::VectorXd make_fill(const Lattice& lat, const FillSpec& fill);
Cmat diagonal_state(const Eigen::VectorXd& density);

}  // namespace chiralflow
