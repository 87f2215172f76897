#include "chiralflow/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace chiralflow {

namespace {

constexpr double kPosTol = 1e-9;

struct InternalGeometry {
  std::vector<Eigen::Vector2d> delta;  // internal site offsets
  Eigen::Vector2d gx, gy;              // grid vectors (cells along x / y)
};

// Bond table entry: internal i in the anchor cell bonded to internal j in the
// cell at grid offset (du, dv). Each physical bond appears exactly once.
struct Bond {
  int i, j, du, dv;
};

const InternalGeometry& geometry(LatticeKind kind) {
  static const InternalGeometry lieb{
      {{0, 0}, {0, 1}, {1, 0}, {2, 0}, {2, 1}, {3, 0}},
      {4, 0},
      {2, 2}};
  static const InternalGeometry square{
      {{0, 0}, {0, 1}, {1, 0}, {2, 0}, {2, 1}, {3, 0}, {1, 1}, {3, 1}},
      {4, 0},
      {2, 2}};
  static const double s3 = std::sqrt(3.0);
  static const InternalGeometry kagome{
      {{1, 0}, {0.5, 0.5 * s3}, {-0.5, 0.5 * s3}, {-1, 0}, {-0.5, -0.5 * s3}, {0.5, -0.5 * s3}},
      {3, 0},
      {1.5, 1.5 * s3}};
  switch (kind) {
    case LatticeKind::lieb: return lieb;
    case LatticeKind::square: return square;
    case LatticeKind::kagome_mod: return kagome;
  }
  throw std::logic_error("unknown lattice kind");
}

const std::vector<Bond>& bonds(LatticeKind kind) {
  static const std::vector<Bond> lieb = {
      {0, 2, 0, 0}, {0, 1, 0, 0}, {2, 3, 0, 0}, {3, 4, 0, 0},
      {3, 5, 0, 0}, {5, 0, 1, 0}, {4, 0, 0, 1}, {1, 3, -1, 1},
  };
  static const std::vector<Bond> square = [] {
    std::vector<Bond> b = lieb;
    b.insert(b.end(), {{6, 2, 0, 0}, {6, 1, 0, 0}, {6, 4, 0, 0}, {6, 5, -1, 1},
                       {7, 5, 0, 0}, {7, 4, 0, 0}, {7, 2, 0, 1}, {7, 1, 1, 0}});
    return b;
  }();
  static const std::vector<Bond> kagome = {
      {0, 1, 0, 0}, {1, 2, 0, 0}, {2, 3, 0, 0}, {3, 4, 0, 0}, {4, 5, 0, 0}, {5, 0, 0, 0},
      {0, 3, 1, 0}, {1, 4, 0, 1}, {2, 5, -1, 1},
  };
  switch (kind) {
    case LatticeKind::lieb: return lieb;
    case LatticeKind::square: return square;
    case LatticeKind::kagome_mod: return kagome;
  }
  throw std::logic_error("unknown lattice kind");
}

}  // namespace

const char* to_string(LatticeKind k) {
  switch (k) {
    case LatticeKind::lieb: return "lieb";
    case LatticeKind::square: return "square";
    case LatticeKind::kagome_mod: return "kagome_mod";
  }
  return "?";
}

const char* to_string(Boundary b) {
  switch (b) {
    case Boundary::open: return "open";
    case Boundary::cylinder_x: return "cylinder_x";
    case Boundary::torus: return "torus";
  }
  return "?";
}

const std::vector<BulkPair>& bulk_pairs(LatticeKind kind, ScheduleKind sched) {
  // Lieb / square standard cycle: the pair of each step, with the cell offsets
  // that make the activated bonds trace the clockwise decorated-square path.
  static const std::vector<BulkPair> lieb = {
      {1, 0, 2, 0, 0, 0, 0},    // 1-3 horizontal
      {2, 2, 3, 0, 0, 0, 0},    // 3-4 horizontal
      {3, 1, 3, 1, -1, 0, 0},   // 2(below)-4 vertical
      {4, 0, 1, 0, 0, 0, 0},    // 1-2 vertical
      {5, 5, 0, 0, 0, 1, 0},    // 6-1(right cell) horizontal
      {6, 3, 5, 0, 0, 0, 0},    // 4-6 horizontal
      {7, 3, 4, 0, 0, 0, 0},    // 4-5 vertical
      {8, 4, 0, 0, 0, 0, 1},    // 5-1(cell above) vertical
  };
  static const std::vector<BulkPair> naive4 = {
      {1, 0, 2, 0, 0, 0, 0}, {1, 3, 5, 0, 0, 0, 0}, {1, 6, 4, 0, 0, 0, 0}, {1, 7, 1, 0, 0, 1, 0},
      {2, 0, 1, 0, 0, 0, 0}, {2, 3, 4, 0, 0, 0, 0}, {2, 6, 5, 0, 0, -1, 1}, {2, 7, 2, 0, 0, 0, 1},
      {3, 5, 0, -1, 0, 0, 0}, {3, 2, 3, 0, 0, 0, 0}, {3, 1, 6, 0, 0, 0, 0}, {3, 4, 7, 0, 0, 0, 0},
      {4, 4, 0, 0, -1, 0, 0}, {4, 1, 3, 1, -1, 0, 0}, {4, 2, 6, 0, 0, 0, 0}, {4, 5, 7, 0, 0, 0, 0},
  };
  static const std::vector<BulkPair> kagome = {
      {1, 0, 1, 0, 0, 0, 0}, {2, 1, 2, 0, 0, 0, 0}, {3, 2, 3, 0, 0, 0, 0},
      {4, 3, 4, 0, 0, 0, 0}, {5, 4, 5, 0, 0, 0, 0}, {6, 5, 0, 0, 0, 0, 0},
  };
  if (sched == ScheduleKind::naive4) {
    if (kind != LatticeKind::square)
      throw std::invalid_argument("naive4 schedule is defined on the square lattice only");
    return naive4;
  }
  switch (kind) {
    case LatticeKind::lieb:
    case LatticeKind::square: return lieb;
    case LatticeKind::kagome_mod: return kagome;
  }
  throw std::logic_error("unknown lattice kind");
}

int schedule_period(LatticeKind kind, ScheduleKind sched) {
  if (sched == ScheduleKind::naive4) return 4;
  return kind == LatticeKind::kagome_mod ? 6 : 8;
}

CellBasis cell_basis(LatticeKind kind) {
  CellBasis cb;
  if (kind == LatticeKind::kagome_mod) {
    cb.a = geometry(kind).gx;
    cb.b = geometry(kind).gy;
    cb.grid_to_bravais << 1, 0, 0, 1;
    cb.rows_a = 0;
    cb.rows_b = 1;
  } else {
    cb.a = Eigen::Vector2d(2, 2);
    cb.b = Eigen::Vector2d(-2, 2);
    // gx = a - b, gy = a  =>  (u,v) -> na = u+v, nb = -u
    cb.grid_to_bravais << 1, 1, -1, 0;
    cb.rows_a = 1;
    cb.rows_b = 1;
  }
  return cb;
}

SiteId Lattice::id_of(int cx, int cy, int internal) const {
  const bool px = spec.boundary != Boundary::open;
  const bool py = spec.boundary == Boundary::torus;
  if (px) cx = ((cx % spec.lx) + spec.lx) % spec.lx;
  if (py) cy = ((cy % spec.ly) + spec.ly) % spec.ly;
  if (cx < 0 || cx >= spec.lx || cy < 0 || cy >= spec.ly) return -1;
  return (cy * spec.lx + cx) * n_internal + internal;
}

double Lattice::x_period() const {
  return geometry(spec.kind).gx.x() * spec.lx;
}

double Lattice::dx_wrapped(SiteId a, SiteId b) const {
  double dx = sites[b].x - sites[a].x;
  if (spec.boundary != Boundary::open) {
    const double px = x_period();
    dx -= px * std::round(dx / px);
  }
  return dx;
}

bool Lattice::adjacent(SiteId a, SiteId b) const {
  return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
}

int Lattice::edge_distance(SiteId a, SiteId b) const {
  if (a == b) return 0;
  std::vector<int> dist(size(), -1);
  std::deque<SiteId> q{a};
  dist[a] = 0;
  while (!q.empty()) {
    SiteId s = q.front();
    q.pop_front();
    for (SiteId t : adj[s]) {
      if (dist[t] >= 0) continue;
      dist[t] = dist[s] + 1;
      if (t == b) return dist[t];
      q.push_back(t);
    }
  }
  return -1;
}

Lattice build_lattice(const LatticeSpec& spec) {
  if (spec.lx < 1 || spec.ly < 1)
    throw std::invalid_argument("lattice dimensions must be positive");

  const auto& geo = geometry(spec.kind);
  Lattice lat;
  lat.spec = spec;
  lat.n_internal = static_cast<int>(geo.delta.size());

  const int n = spec.lx * spec.ly * lat.n_internal;
  lat.sites.resize(n);
  const bool wrap_x = spec.boundary != Boundary::open;
  const double px = geo.gx.x() * spec.lx;
  for (int cy = 0; cy < spec.ly; ++cy)
    for (int cx = 0; cx < spec.lx; ++cx)
      for (int k = 0; k < lat.n_internal; ++k) {
        Site& s = lat.sites[(cy * spec.lx + cx) * lat.n_internal + k];
        s.cell_x = cx;
        s.cell_y = cy;
        s.internal = k;
        Eigen::Vector2d pos = cx * geo.gx + cy * geo.gy + geo.delta[k];
        if (wrap_x) {
          pos.x() = std::fmod(pos.x(), px);
          if (pos.x() < -kPosTol) pos.x() += px;
        }
        s.x = pos.x();
        s.y = pos.y();
      }

  lat.adj.assign(n, {});
  std::set<std::pair<SiteId, SiteId>> seen;
  for (int cy = 0; cy < spec.ly; ++cy)
    for (int cx = 0; cx < spec.lx; ++cx)
      for (const Bond& b : bonds(spec.kind)) {
        SiteId u = lat.id_of(cx, cy, b.i);
        SiteId v = lat.id_of(cx + b.du, cy + b.dv, b.j);
        if (u < 0 || v < 0 || u == v) continue;
        auto key = std::minmax(u, v);
        if (!seen.insert(key).second) continue;
        lat.adj[u].push_back(v);
        lat.adj[v].push_back(u);
      }
  for (auto& nb : lat.adj) std::sort(nb.begin(), nb.end());

  lat.hamiltonian = Eigen::MatrixXd::Zero(n, n);
  for (SiteId s = 0; s < n; ++s)
    for (SiteId t : lat.adj[s]) lat.hamiltonian(s, t) = 1.0;
  return lat;
}

std::vector<SiteId> FreeSet::members() const {
  std::vector<SiteId> out;
  for (SiteId s = 0; s < static_cast<SiteId>(member.size()); ++s)
    if (member[s]) out.push_back(s);
  return out;
}

MeasurementSchedule build_schedule(const Lattice& lat, ScheduleKind kind) {
  const auto& table = bulk_pairs(lat.spec.kind, kind);
  const int period = schedule_period(lat.spec.kind, kind);

  MeasurementSchedule sched;
  sched.steps.resize(period);
  for (auto& fs : sched.steps) fs.member.assign(lat.size(), 0);

  for (int cy = 0; cy < lat.spec.ly; ++cy)
    for (int cx = 0; cx < lat.spec.lx; ++cx)
      for (const BulkPair& bp : table) {
        FreeSet& fs = sched.steps[bp.step - 1];
        SiteId a = lat.id_of(cx + bp.ua, cy + bp.va, bp.ia);
        SiteId b = lat.id_of(cx + bp.ub, cy + bp.vb, bp.ib);
        if (a < 0 && b < 0) continue;
        if (a < 0 || b < 0) {
          SiteId lone = a < 0 ? b : a;
          if (!fs.member[lone]) {
            fs.member[lone] = 1;
            fs.isolated.push_back(lone);
          }
          continue;
        }
        if (fs.member[a] || fs.member[b]) continue;  // cell wrap duplicate
        fs.member[a] = 1;
        fs.member[b] = 1;
        // left site first for horizontal pairs, lower site first otherwise
        double dx = lat.dx_wrapped(a, b);
        bool swap = std::abs(dx) > kPosTol ? dx < 0 : lat.sites[b].y < lat.sites[a].y;
        fs.pairs.emplace_back(swap ? b : a, swap ? a : b);
      }
  for (auto& fs : sched.steps) {
    std::sort(fs.pairs.begin(), fs.pairs.end());
    std::sort(fs.isolated.begin(), fs.isolated.end());
  }
  return sched;
}

MeasurementSchedule reversed(const MeasurementSchedule& s) {
  MeasurementSchedule out = s;
  std::reverse(out.steps.begin(), out.steps.end());
  return out;
}

std::string Lattice::debug_dump() const {
  std::ostringstream os;
  os << to_string(spec.kind) << " " << spec.lx << "x" << spec.ly << " "
     << to_string(spec.boundary) << ", " << size() << " sites\n";
  for (SiteId s = 0; s < size(); ++s) {
    const Site& st = sites[s];
    os << s << "\tcell (" << st.cell_x << "," << st.cell_y << ") type " << st.internal + 1
       << "\tpos (" << st.x << "," << st.y << ")\tdeg " << degree(s) << "\n";
  }
  return os.str();
}

std::string debug_dump(const Lattice& lat, const MeasurementSchedule& sched) {
  std::ostringstream os;
  os << lat.debug_dump();
  os << "schedule: " << sched.period() << " steps\n";
  for (SiteId s = 0; s < lat.size(); ++s) {
    os << s << "\tfree at steps";
    for (int i = 0; i < sched.period(); ++i)
      if (sched.steps[i].member[s]) os << " " << i + 1;
    os << "\n";
  }
  return os.str();
}

ValidationReport validate_schedule(const Lattice& lat, const MeasurementSchedule& sched) {
  ValidationReport rep;
  int min_dist = -1;
  for (int i = 0; i < sched.period(); ++i) {
    const FreeSet& fs = sched.steps[i];
    std::vector<int> seen(lat.size(), 0);
    for (size_t a = 0; a < fs.pairs.size(); ++a) {
      auto [u, v] = fs.pairs[a];
      if (!lat.adjacent(u, v)) {
        std::ostringstream os;
        os << "step " << i + 1 << " pair " << a << " (" << u << "," << v << ") not adjacent";
        rep.structural.push_back(os.str());
      }
      if (seen[u]++ || seen[v]++) {
        std::ostringstream os;
        os << "step " << i + 1 << " pair " << a << " overlaps another pair";
        rep.structural.push_back(os.str());
      }
    }
    for (SiteId s : fs.isolated)
      if (seen[s]++) {
        std::ostringstream os;
        os << "step " << i + 1 << " isolated site " << s << " overlaps a pair";
        rep.structural.push_back(os.str());
      }
    for (size_t a = 0; a < fs.pairs.size(); ++a)
      for (size_t b = a + 1; b < fs.pairs.size(); ++b) {
        int d = -1;
        for (SiteId u : {fs.pairs[a].first, fs.pairs[a].second})
          for (SiteId v : {fs.pairs[b].first, fs.pairs[b].second}) {
            int e = lat.edge_distance(u, v);
            if (e >= 0 && (d < 0 || e < d)) d = e;
          }
        if (d < 0) continue;
        if (min_dist < 0 || d < min_dist) min_dist = d;
        if (d < 2)
          rep.clashes.push_back({i + 1, static_cast<int>(a), static_cast<int>(b), d});
      }
  }
  rep.min_pair_distance = min_dist;
  return rep;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  if (admissible()) {
    os << "schedule admissible, min inter-pair edge distance " << min_pair_distance << "\n";
    return os.str();
  }
  for (const auto& s : structural) os << s << "\n";
  for (const auto& c : clashes)
    os << "step " << c.step << ": pairs " << c.pair_a << " and " << c.pair_b
       << " at edge distance " << c.distance << " (< 2)\n";
  return os.str();
}

CutSpec flow_cut(const Lattice& lat, const MeasurementSchedule& sched, double x_cut) {
  for (const Site& s : lat.sites)
    if (std::abs(s.x - x_cut) < kPosTol)
      throw std::invalid_argument("cut passes through a site column");

  CutSpec cut;
  cut.x_cut = x_cut;
  cut.left.assign(lat.size(), 0);
  for (SiteId s = 0; s < lat.size(); ++s) cut.left[s] = lat.sites[s].x < x_cut;

  std::map<std::pair<SiteId, SiteId>, std::vector<int>> step_of;
  for (int i = 0; i < sched.period(); ++i)
    for (auto [u, v] : sched.steps[i].pairs) step_of[std::minmax(u, v)].push_back(i + 1);

  const bool periodic = lat.spec.boundary != Boundary::open;
  for (SiteId u = 0; u < lat.size(); ++u)
    for (SiteId v : lat.adj[u]) {
      if (v < u) continue;
      double dx = lat.dx_wrapped(u, v);
      if (std::abs(dx) < kPosTol) continue;
      SiteId l = dx > 0 ? u : v;
      SiteId r = dx > 0 ? v : u;
      double xl = lat.sites[l].x, xr = lat.sites[r].x;
      bool crosses;
      if (periodic && xl > xr) {
        crosses = x_cut > xl || x_cut < xr;  // bond wraps the seam
      } else {
        crosses = xl < x_cut && x_cut < xr;
      }
      if (!crosses) continue;
      CrossLink link;
      link.left = l;
      link.right = r;
      auto it = step_of.find(std::minmax(l, r));
      if (it != step_of.end()) link.steps = it->second;
      cut.links.push_back(link);
    }
  std::sort(cut.links.begin(), cut.links.end(),
            [](const CrossLink& a, const CrossLink& b) { return a.left < b.left; });
  return cut;
}

double default_cut_x(const Lattice& lat) {
  // midpoint of a gap between site columns near the middle of the lattice
  std::vector<double> cols;
  for (const Site& s : lat.sites) cols.push_back(s.x);
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end(),
                         [](double a, double b) { return std::abs(a - b) < kPosTol; }),
             cols.end());
  if (lat.spec.kind != LatticeKind::kagome_mod) {
    // Phase within the 4-column cell chosen so that the orbits straddling a
    // half-height fill horizon never hop across the cut (their link columns
    // shift with the row shear); both phases are crossed by the same two
    // schedule steps.
    double phase = (lat.spec.ly / 2) % 2 == 0 ? 0.5 : 2.5;
    return 4.0 * (lat.spec.lx / 2) + phase;
  }
  double mid = cols[cols.size() / 2];
  for (size_t i = 0; i + 1 < cols.size(); ++i)
    if (cols[i] <= mid && mid <= cols[i + 1] && cols[i + 1] - cols[i] > 10 * kPosTol)
      return 0.5 * (cols[i] + cols[i + 1]);
  return mid + 0.25;
}

}  // namespace chiralflow
