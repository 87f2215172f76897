#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace chiralflow {

using SiteId = int32_t;

enum class LatticeKind { lieb, square, kagome_mod };
enum class Boundary { open, cylinder_x, torus };
enum class ScheduleKind { standard, naive4 };

const char* to_string(LatticeKind k);
const char* to_string(Boundary b);

struct LatticeSpec {
  LatticeKind kind = LatticeKind::lieb;
  int lx = 1;  // dynamical unit cells along x
  int ly = 1;  // dynamical unit cells along y
  Boundary boundary = Boundary::cylinder_x;

  bool operator==(const LatticeSpec&) const = default;
};

struct Site {
  int cell_x = 0;
  int cell_y = 0;
  int internal = 0;  // 0-based; printed site types are internal+1
  double x = 0;
  double y = 0;
};

// One cell's worth of one protocol step: an activated nearest-neighbor pair.
// Internal indices plus cell offsets (grid coordinates) relative to the anchor
// cell. Shared between schedule construction and the k-space transfer matrices.
struct BulkPair {
  int step = 0;  // 1-based
  int ia = 0, ib = 0;
  int ua = 0, va = 0;  // grid offset of site a
  int ub = 0, vb = 0;  // grid offset of site b
};

struct Lattice {
  LatticeSpec spec;
  int n_internal = 0;
  std::vector<Site> sites;
  std::vector<std::vector<SiteId>> adj;
  Eigen::MatrixXd hamiltonian;  // symmetric, entries in {0,1}

  int size() const { return static_cast<int>(sites.size()); }
  int degree(SiteId s) const { return static_cast<int>(adj[s].size()); }

  // Site id for cell (cx,cy) and internal index, applying boundary wrap.
  // Returns -1 if the cell falls outside an open boundary.
  SiteId id_of(int cx, int cy, int internal) const;

  // Spatial x-period when periodic in x (cylinder_x or torus).
  double x_period() const;
  // Wrapped x-displacement from site a to site b, in (-period/2, period/2].
  double dx_wrapped(SiteId a, SiteId b) const;

  bool adjacent(SiteId a, SiteId b) const;

  // BFS edge distance between two sites (-1 if disconnected).
  int edge_distance(SiteId a, SiteId b) const;

  std::string debug_dump() const;
};

Lattice build_lattice(const LatticeSpec& spec);

// Bulk pair tables defining the periodic protocol for each lattice kind.
const std::vector<BulkPair>& bulk_pairs(LatticeKind kind, ScheduleKind sched = ScheduleKind::standard);
int schedule_period(LatticeKind kind, ScheduleKind sched = ScheduleKind::standard);

// Real-space Bravais vectors (a, b) and the grid->Bravais coordinate map.
// Grid offset (u,v) corresponds to the Bravais vector na*a + nb*b.
struct CellBasis {
  Eigen::Vector2d a, b;
  // (na, nb) = M * (u, v)
  Eigen::Matrix2i grid_to_bravais;
  // cell-row displacement of one step along a / b (k_y is conjugate to the
  // integer cell-row index in the k-space flow formulas)
  int rows_a = 0, rows_b = 0;
};
CellBasis cell_basis(LatticeKind kind);

struct FreeSet {
  std::vector<std::pair<SiteId, SiteId>> pairs;  // (left,right) or (lower,upper)
  std::vector<SiteId> isolated;                  // members whose partner is absent
  std::vector<char> member;                      // size N mask: true if unmeasured

  std::vector<SiteId> members() const;
};

struct MeasurementSchedule {
  std::vector<FreeSet> steps;
  int period() const { return static_cast<int>(steps.size()); }
};

MeasurementSchedule build_schedule(const Lattice& lat, ScheduleKind kind = ScheduleKind::standard);
MeasurementSchedule reversed(const MeasurementSchedule& s);

std::string debug_dump(const Lattice& lat, const MeasurementSchedule& sched);

struct PairClash {
  int step = 0;       // 1-based
  int pair_a = 0;     // indices into FreeSet::pairs
  int pair_b = 0;
  int distance = 0;   // offending edge distance (< 2)
};

struct ValidationReport {
  std::vector<PairClash> clashes;
  std::vector<std::string> structural;  // non-adjacent pairs, overlaps, ...
  int min_pair_distance = -1;           // over all steps; -1 if no pair-pairs
  bool admissible() const { return clashes.empty() && structural.empty(); }
  std::string to_string() const;
};

ValidationReport validate_schedule(const Lattice& lat, const MeasurementSchedule& sched);

struct CrossLink {
  SiteId left = -1;
  SiteId right = -1;
  std::vector<int> steps;  // 1-based steps whose pair activates this link
};

struct CutSpec {
  double x_cut = 0;
  std::vector<char> left;   // size N: strictly left of the cut
  std::vector<CrossLink> links;
};

// Vertical cut at x_cut; throws std::invalid_argument if it passes through a
// site column. On periodic-x lattices the seam-wrapping bonds are included.
CutSpec flow_cut(const Lattice& lat, const MeasurementSchedule& sched, double x_cut);

// Canonical between-cell cut position for flow experiments.
double default_cut_x(const Lattice& lat);

}  // namespace chiralflow
