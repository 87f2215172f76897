#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "chiralflow/lattice.hpp"

using namespace chiralflow;

namespace {

// Independent adjacency oracle: two sites are bonded iff some periodic image
// lies at distance one (physical bond length for every shipped kind).
Eigen::MatrixXd brute_adjacency(const Lattice& lat) {
  const int n = lat.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::Vector2d> images{{0, 0}};
  CellBasis cb = cell_basis(lat.spec.kind);
  Eigen::Vector2d gx = lat.spec.kind == LatticeKind::kagome_mod ? cb.a : Eigen::Vector2d(4, 0);
  Eigen::Vector2d gy = lat.spec.kind == LatticeKind::kagome_mod ? cb.b : Eigen::Vector2d(2, 2);
  if (lat.spec.boundary != Boundary::open)
    for (int s : {-1, 1}) images.push_back(s * lat.spec.lx * gx);
  if (lat.spec.boundary == Boundary::torus) {
    size_t base = images.size();
    for (int s : {-1, 1})
      for (size_t i = 0; i < base; ++i) images.push_back(images[i] + s * lat.spec.ly * gy);
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      Eigen::Vector2d pa(lat.sites[a].x, lat.sites[a].y);
      Eigen::Vector2d pb(lat.sites[b].x, lat.sites[b].y);
      for (const auto& im : images)
        if (std::abs((pb + im - pa).norm() - 1.0) < 1e-9) {
          h(a, b) = h(b, a) = 1;
          break;
        }
    }
  return h;
}

}  // namespace

TEST_CASE("lieb 1x1 torus: six internal sites, corner/midpoint degrees") {
  Lattice lat = build_lattice({LatticeKind::lieb, 1, 1, Boundary::torus});
  CHECK(lat.size() == 6);
  // types 1 and 4 are lattice corners (degree 4); the rest are bond midpoints
  for (SiteId s = 0; s < 6; ++s) {
    int expected = (lat.sites[s].internal == 0 || lat.sites[s].internal == 3) ? 4 : 2;
    CHECK(lat.degree(s) == expected);
  }
  CHECK(lat.hamiltonian == brute_adjacency(lat));
}

TEST_CASE("lieb 2x2 open: 24 sites, boundary degrees reduced") {
  Lattice lat = build_lattice({LatticeKind::lieb, 2, 2, Boundary::open});
  CHECK(lat.size() == 24);
  CHECK(lat.hamiltonian == brute_adjacency(lat));
  int max_deg = 0;
  for (SiteId s = 0; s < lat.size(); ++s) max_deg = std::max(max_deg, lat.degree(s));
  CHECK(max_deg <= 4);
  // the type-1 corner of cell (0,0) sits on the open corner: two bonds cut
  SiteId corner = lat.id_of(0, 0, 0);
  CHECK(lat.degree(corner) == 2);
}

TEST_CASE("square 1x1 torus: 8 internal sites, all degree 4") {
  Lattice lat = build_lattice({LatticeKind::square, 1, 1, Boundary::torus});
  CHECK(lat.size() == 8);
  for (SiteId s = 0; s < lat.size(); ++s) CHECK(lat.hamiltonian.row(s).sum() == lat.degree(s));
  for (SiteId s = 0; s < lat.size(); ++s) CHECK(lat.degree(s) == 4);
  CHECK(lat.hamiltonian == brute_adjacency(lat));
}

TEST_CASE("kagome_mod: degree 3 everywhere on the torus, 6-step schedule") {
  Lattice lat = build_lattice({LatticeKind::kagome_mod, 3, 3, Boundary::torus});
  CHECK(lat.size() == 54);
  for (SiteId s = 0; s < lat.size(); ++s) CHECK(lat.degree(s) == 3);
  CHECK(lat.hamiltonian == brute_adjacency(lat));
  MeasurementSchedule sched = build_schedule(lat);
  REQUIRE(sched.period() == 6);
  for (const FreeSet& fs : sched.steps) {
    CHECK(fs.pairs.size() == 9);
    CHECK(fs.isolated.empty());
  }
}

TEST_CASE("invalid dimensions rejected") {
  CHECK_THROWS_AS(build_lattice({LatticeKind::lieb, 0, 1, Boundary::open}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_lattice({LatticeKind::lieb, 1, 0, Boundary::open}),
                  std::invalid_argument);
}

TEST_CASE("hamiltonian structure invariants") {
  for (LatticeKind kind : {LatticeKind::lieb, LatticeKind::square, LatticeKind::kagome_mod}) {
    Lattice lat = build_lattice({kind, 2, 3, Boundary::cylinder_x});
    CHECK(lat.hamiltonian == lat.hamiltonian.transpose());
    int bonds = 0;
    for (SiteId s = 0; s < lat.size(); ++s) bonds += lat.degree(s);
    CHECK(lat.hamiltonian.sum() == bonds);  // = 2 x bond count
    for (int i = 0; i < lat.size(); ++i)
      for (int j = 0; j < lat.size(); ++j) {
        double v = lat.hamiltonian(i, j);
        CHECK((v == 0.0 || v == 1.0));
      }
  }
}

TEST_CASE("lieb torus schedule: 8 steps, one pair per cell, no isolated sites") {
  Lattice lat = build_lattice({LatticeKind::lieb, 3, 3, Boundary::torus});
  MeasurementSchedule sched = build_schedule(lat);
  REQUIRE(sched.period() == 8);
  for (const FreeSet& fs : sched.steps) {
    CHECK(fs.pairs.size() == 9);  // one per dynamical cell
    CHECK(fs.isolated.empty());
    for (auto [a, b] : fs.pairs) CHECK(lat.adjacent(a, b));
  }
  // free types per step follow the cell labeling: A_1 = {1,3}, A_2 = {3,4}, ...
  const std::vector<std::set<int>> expected = {{0, 2}, {2, 3}, {1, 3}, {0, 1},
                                               {5, 0}, {3, 5}, {3, 4}, {4, 0}};
  for (int i = 0; i < 8; ++i) {
    std::set<int> types;
    for (SiteId s : sched.steps[i].members()) types.insert(lat.sites[s].internal);
    CHECK(types == expected[i]);
  }
}

TEST_CASE("torus: step membership depends only on internal index") {
  Lattice lat = build_lattice({LatticeKind::lieb, 3, 2, Boundary::torus});
  MeasurementSchedule sched = build_schedule(lat);
  for (const FreeSet& fs : sched.steps)
    for (int k = 0; k < lat.n_internal; ++k) {
      char first = fs.member[lat.id_of(0, 0, k)];
      for (int cy = 0; cy < 2; ++cy)
        for (int cx = 0; cx < 3; ++cx) CHECK(fs.member[lat.id_of(cx, cy, k)] == first);
    }
}

TEST_CASE("open lower boundary: type-4 sites isolated in step 3") {
  Lattice lat = build_lattice({LatticeKind::lieb, 4, 3, Boundary::cylinder_x});
  MeasurementSchedule sched = build_schedule(lat);
  const FreeSet& a3 = sched.steps[2];
  REQUIRE(!a3.isolated.empty());
  for (SiteId s : a3.isolated) {
    CHECK(lat.sites[s].internal == 3);  // type 4
    CHECK(lat.sites[s].cell_y == 0);    // lower boundary row
  }
  // bulk rows still provide full pairs
  CHECK(a3.pairs.size() == 4 * 2);  // pairs anchored in rows 1,2 survive
}

TEST_CASE("reversed schedule flips step order, keeps pair lists") {
  Lattice lat = build_lattice({LatticeKind::lieb, 2, 2, Boundary::torus});
  MeasurementSchedule sched = build_schedule(lat);
  MeasurementSchedule rev = reversed(sched);
  REQUIRE(rev.period() == sched.period());
  for (int i = 0; i < sched.period(); ++i)
    CHECK(rev.steps[i].pairs == sched.steps[sched.period() - 1 - i].pairs);
}

TEST_CASE("consecutive free sets intersect in isolated points") {
  Lattice lat = build_lattice({LatticeKind::lieb, 3, 3, Boundary::torus});
  MeasurementSchedule sched = build_schedule(lat);
  for (int i = 0; i < sched.period(); ++i) {
    const auto& cur = sched.steps[i].member;
    const auto& nxt = sched.steps[(i + 1) % sched.period()].member;
    std::vector<SiteId> both;
    for (SiteId s = 0; s < lat.size(); ++s)
      if (cur[s] && nxt[s]) both.push_back(s);
    CHECK(!both.empty());
    for (SiteId a : both)
      for (SiteId b : both)
        if (a != b) CHECK(!lat.adjacent(a, b));
  }
}

TEST_CASE("validation: shipped schedules admissible with the expected margins") {
  for (auto [kind, min_dist] :
       std::vector<std::pair<LatticeKind, int>>{{LatticeKind::lieb, 3},
                                                {LatticeKind::square, 3},
                                                {LatticeKind::kagome_mod, 3}}) {
    Lattice lat = build_lattice({kind, 4, 4, Boundary::torus});
    MeasurementSchedule sched = build_schedule(lat);
    ValidationReport rep = validate_schedule(lat, sched);
    CHECK(rep.admissible());
    CHECK(rep.min_pair_distance == min_dist);
  }
}

TEST_CASE("validation: naive 4-step square cycle fails at distance 1") {
  Lattice lat = build_lattice({LatticeKind::square, 3, 3, Boundary::torus});
  MeasurementSchedule sched = build_schedule(lat, ScheduleKind::naive4);
  REQUIRE(sched.period() == 4);
  ValidationReport rep = validate_schedule(lat, sched);
  CHECK(!rep.admissible());
  CHECK(!rep.clashes.empty());
  CHECK(rep.min_pair_distance == 1);
  for (const PairClash& c : rep.clashes) CHECK(c.distance < 2);
}

TEST_CASE("validation: overlapping pairs reported as structural failure") {
  Lattice lat = build_lattice({LatticeKind::lieb, 2, 2, Boundary::torus});
  MeasurementSchedule sched = build_schedule(lat);
  auto& pairs = sched.steps[0].pairs;
  pairs.push_back(pairs.front());  // duplicate pair shares both sites
  ValidationReport rep = validate_schedule(lat, sched);
  CHECK(!rep.admissible());
  CHECK(!rep.structural.empty());
}

TEST_CASE("naive4 rejected off the square lattice") {
  Lattice lat = build_lattice({LatticeKind::lieb, 2, 2, Boundary::torus});
  CHECK_THROWS_AS(build_schedule(lat, ScheduleKind::naive4), std::invalid_argument);
}

TEST_CASE("flow cut: crossing links and their activating steps") {
  Lattice lat = build_lattice({LatticeKind::lieb, 4, 4, Boundary::cylinder_x});
  MeasurementSchedule sched = build_schedule(lat);

  SUBCASE("between-cell cut crosses one link per cell row") {
    CutSpec cut = flow_cut(lat, sched, default_cut_x(lat));
    CHECK(cut.links.size() == 4);  // one per cell row
    std::set<int> steps;
    for (const CrossLink& l : cut.links) {
      CHECK(lat.sites[l.left].x < lat.sites[l.right].x + lat.x_period() * 0.5);
      REQUIRE(l.steps.size() == 1);
      steps.insert(l.steps[0]);
    }
    CHECK(steps.size() == 2);  // two horizontal steps alternate between sheared rows
  }

  SUBCASE("2x2-cell patch, mid cut: 2 crossings per two cell rows") {
    Lattice small = build_lattice({LatticeKind::lieb, 2, 2, Boundary::cylinder_x});
    MeasurementSchedule ssched = build_schedule(small);
    CutSpec cut = flow_cut(small, ssched, default_cut_x(small));
    CHECK(cut.links.size() == 2);
  }

  SUBCASE("cut through a site column rejected") {
    CHECK_THROWS_AS(flow_cut(lat, sched, 2.0), std::invalid_argument);
  }

  SUBCASE("cut left of everything: empty left set on an open patch") {
    Lattice open = build_lattice({LatticeKind::lieb, 3, 2, Boundary::open});
    MeasurementSchedule osched = build_schedule(open);
    CutSpec cut = flow_cut(open, osched, -0.5);
    CHECK(std::count(cut.left.begin(), cut.left.end(), 1) == 0);
    CHECK(cut.links.empty());
  }
}

TEST_CASE("debug dump lists sites and step membership") {
  Lattice lat = build_lattice({LatticeKind::lieb, 1, 1, Boundary::torus});
  MeasurementSchedule sched = build_schedule(lat);
  std::string dump = debug_dump(lat, sched);
  CHECK(dump.find("6 sites") != std::string::npos);
  CHECK(dump.find("free at steps") != std::string::npos);
}
