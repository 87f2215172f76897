#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "chiralflow/lattice.hpp"

namespace chiralflow {

// p = sin^2(T/8) for the 8-step cycle (T/6 for the 6-step one).
double hop_probability(double period_t, int period = 8);
double period_for_probability(double p, int period = 8);  // smallest T > 0

// Counting-field weighting of a hop: net x-displacement (all horizontal
// links) or signed crossings of one vertical cut.
enum class CountingWeight { none, all_links, cut };

// Signed number of crossings of the cut (+ periodic images) along the hop
// from x_from to x_from + dx.
double crossing_count(double x_from, double dx, double x_cut, double x_period);

struct PairBlock {
  SiteId a = -1, b = -1;  // left/lower first
  double w = 0;           // counting weight of the hop a -> b
};

// One step's doubly stochastic transition matrix, stored as its active
// 2x2 swap blocks; identity on measured and isolated sites.
struct StepMatrix {
  int step_index = 0;  // 1-based
  double p = 0;
  int n_sites = 0;
  std::vector<PairBlock> blocks;

  void apply(Eigen::VectorXd& v) const;                  // theta = 0 (symmetric)
  void apply(Eigen::VectorXcd& v, double theta) const;   // v <- R_i(theta) v
  Eigen::MatrixXd dense() const;
  Eigen::MatrixXcd dense(double theta) const;
  Eigen::MatrixXd current_dense() const;                 // J_i = -i dR_i/dtheta|_0
  Eigen::VectorXd current_colsums() const;               // 1^T J_i
};

struct FlowTrace {
  double lx = 1;
  std::vector<std::vector<double>> step_flow;  // [cycle][step]
  std::vector<double> cycle_flow;              // per-cycle transported charge
  std::vector<double> cumulative;

  // average flow per cycle per unit length over the first n cycles
  double f_n(int n) const;
  // windowed per-cycle average (cycles first..last inclusive, 1-based)
  double steady(int first, int last) const;
};

struct ZenoEngine {
  const Lattice* lat = nullptr;
  double p = 0;
  std::vector<StepMatrix> steps;

  static ZenoEngine build(const Lattice& lat, const MeasurementSchedule& sched, double p,
                          CountingWeight weight = CountingWeight::all_links,
                          const CutSpec* cut = nullptr);

  int period() const { return static_cast<int>(steps.size()); }
  int size() const { return steps.empty() ? 0 : steps.front().n_sites; }

  Eigen::VectorXd apply_cycle(Eigen::VectorXd g) const;
  Eigen::MatrixXd cycle_dense() const;
  Eigen::MatrixXcd cycle_dense(double theta) const;

  // |g> -> R_cyc^N |g>; theta-free by construction, conserves total density.
  Eigen::VectorXd evolve_density(Eigen::VectorXd g, int n_cycles) const;

  // chi_N(theta) = <I| R_cyc(theta)^N |g0>
  std::complex<double> moment_generating(const Eigen::VectorXd& g0, double theta,
                                         int n_cycles) const;

  // 1^T J with J = -i dR_cyc(theta)/dtheta|_0 assembled exactly per link.
  Eigen::VectorXd current_row() const;

  // Exact per-step and per-cycle transported charge for n_cycles cycles.
  FlowTrace run_flow(const Eigen::VectorXd& g0, int n_cycles,
                     std::vector<Eigen::VectorXd>* cycle_density = nullptr) const;
};

// Windowed steady-flow estimate with an upper-edge buildup guard: averages
// per-cycle flow from `transient` cycles in, stopping once the total density
// in the top `guard_rows` cell rows exceeds `guard`.
double steady_flow(const Lattice& lat, const FlowTrace& trace,
                   const std::vector<Eigen::VectorXd>& cycle_density, int transient,
                   int guard_rows = 2, double guard = 0.05);

}  // namespace chiralflow
