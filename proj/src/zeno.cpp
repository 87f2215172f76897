#include "chiralflow/zeno.hpp"

#include <cmath>
#include <stdexcept>

namespace chiralflow {

double hop_probability(double period_t, int period) {
  if (period_t <= 0) throw std::invalid_argument("period T must be positive");
  double s = std::sin(period_t / period);
  return s * s;
}

double period_for_probability(double p, int period) {
  if (p < 0 || p > 1) throw std::invalid_argument("p out of [0,1]");
  return period * std::asin(std::sqrt(p));
}

double crossing_count(double x_from, double dx, double x_cut, double x_period) {
  auto f = [&](double x) { return std::floor((x - x_cut) / x_period); };
  return f(x_from + dx) - f(x_from);
}

void StepMatrix::apply(Eigen::VectorXd& v) const {
  for (const PairBlock& blk : blocks) {
    double va = v[blk.a], vb = v[blk.b];
    v[blk.a] = (1 - p) * va + p * vb;
    v[blk.b] = p * va + (1 - p) * vb;
  }
}

void StepMatrix::apply(Eigen::VectorXcd& v, double theta) const {
  for (const PairBlock& blk : blocks) {
    std::complex<double> va = v[blk.a], vb = v[blk.b];
    std::complex<double> ph = std::polar(1.0, theta * blk.w);  // hop a->b carries e^{+i theta w}
    v[blk.a] = (1 - p) * va + p * vb / ph;
    v[blk.b] = p * va * ph + (1 - p) * vb;
  }
}

Eigen::MatrixXd StepMatrix::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n_sites, n_sites);
  for (const PairBlock& blk : blocks) {
    m(blk.a, blk.a) = 1 - p;
    m(blk.b, blk.b) = 1 - p;
    m(blk.b, blk.a) = p;
    m(blk.a, blk.b) = p;
  }
  return m;
}

Eigen::MatrixXcd StepMatrix::dense(double theta) const {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n_sites, n_sites);
  for (const PairBlock& blk : blocks) {
    std::complex<double> ph = std::polar(1.0, theta * blk.w);
    m(blk.a, blk.a) = 1 - p;
    m(blk.b, blk.b) = 1 - p;
    m(blk.b, blk.a) = p * ph;
    m(blk.a, blk.b) = p / ph;
  }
  return m;
}

Eigen::MatrixXd StepMatrix::current_dense() const {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n_sites, n_sites);
  for (const PairBlock& blk : blocks) {
    j(blk.b, blk.a) = p * blk.w;
    j(blk.a, blk.b) = -p * blk.w;
  }
  return j;
}

Eigen::VectorXd StepMatrix::current_colsums() const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n_sites);
  for (const PairBlock& blk : blocks) {
    u[blk.a] += p * blk.w;
    u[blk.b] -= p * blk.w;
  }
  return u;
}

ZenoEngine ZenoEngine::build(const Lattice& lat, const MeasurementSchedule& sched, double p,
                             CountingWeight weight, const CutSpec* cut) {
  if (p < 0 || p > 1) throw std::invalid_argument("p out of [0,1]");
  if (weight == CountingWeight::cut && cut == nullptr)
    throw std::invalid_argument("cut weighting needs a CutSpec");

  ZenoEngine eng;
  eng.lat = &lat;
  eng.p = p;
  const double px = lat.spec.boundary != Boundary::open
                        ? lat.x_period()
                        : 2 * (std::abs(lat.sites.back().x) + lat.x_period() + 1);
  eng.steps.resize(sched.period());
  for (int i = 0; i < sched.period(); ++i) {
    StepMatrix& sm = eng.steps[i];
    sm.step_index = i + 1;
    sm.p = p;
    sm.n_sites = lat.size();
    for (auto [a, b] : sched.steps[i].pairs) {
      PairBlock blk;
      blk.a = a;
      blk.b = b;
      double dx = lat.dx_wrapped(a, b);
      switch (weight) {
        case CountingWeight::none: blk.w = 0; break;
        case CountingWeight::all_links: blk.w = dx; break;
        case CountingWeight::cut:
          blk.w = crossing_count(lat.sites[a].x, dx, cut->x_cut, px);
          break;
      }
      sm.blocks.push_back(blk);
    }
  }
  return eng;
}

Eigen::VectorXd ZenoEngine::apply_cycle(Eigen::VectorXd g) const {
  for (const StepMatrix& sm : steps) sm.apply(g);
  return g;
}

Eigen::MatrixXd ZenoEngine::cycle_dense() const {
  const int n = size();
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd col(n);
  for (int c = 0; c < n; ++c) {
    col.setZero();
    col[c] = 1.0;
    for (const StepMatrix& sm : steps) sm.apply(col);
    m.col(c) = col;
  }
  return m;
}

Eigen::MatrixXcd ZenoEngine::cycle_dense(double theta) const {
  const int n = size();
  Eigen::MatrixXcd m(n, n);
  Eigen::VectorXcd col(n);
  for (int c = 0; c < n; ++c) {
    col.setZero();
    col[c] = 1.0;
    for (const StepMatrix& sm : steps) sm.apply(col, theta);
    m.col(c) = col;
  }
  return m;
}

Eigen::VectorXd ZenoEngine::evolve_density(Eigen::VectorXd g, int n_cycles) const {
  const double total = g.sum();
  for (int c = 0; c < n_cycles; ++c) g = apply_cycle(std::move(g));
  if (std::abs(g.sum() - total) > 1e-10 * std::max(1.0, std::abs(total)))
    throw std::runtime_error("density not conserved");
  return g;
}

std::complex<double> ZenoEngine::moment_generating(const Eigen::VectorXd& g0, double theta,
                                                   int n_cycles) const {
  Eigen::VectorXcd v = g0.cast<std::complex<double>>();
  for (int c = 0; c < n_cycles; ++c)
    for (const StepMatrix& sm : steps) sm.apply(v, theta);
  return v.sum();
}

Eigen::VectorXd ZenoEngine::current_row() const {
  // 1^T J = sum_i (1^T J_i) R_{i-1} ... R_1, using R_j(0)^T = R_j(0)
  const int n = size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < period(); ++i) {
    Eigen::VectorXd v = steps[i].current_colsums();
    for (int j = i - 1; j >= 0; --j) steps[j].apply(v);
    w += v;
  }
  return w;
}

double FlowTrace::f_n(int n) const {
  if (n <= 0 || n > static_cast<int>(cumulative.size())) throw std::out_of_range("f_n");
  return cumulative[n - 1] / (lx * n);
}

double FlowTrace::steady(int first, int last) const {
  first = std::max(first, 1);
  last = std::min<int>(last, static_cast<int>(cycle_flow.size()));
  if (last < first) throw std::out_of_range("steady window empty");
  double acc = 0;
  for (int c = first; c <= last; ++c) acc += cycle_flow[c - 1];
  return acc / (last - first + 1);
}

FlowTrace ZenoEngine::run_flow(const Eigen::VectorXd& g0, int n_cycles,
                               std::vector<Eigen::VectorXd>* cycle_density) const {
  FlowTrace tr;
  tr.lx = lat->spec.lx;
  Eigen::VectorXd g = g0;
  double cum = 0;
  for (int c = 0; c < n_cycles; ++c) {
    std::vector<double> per_step;
    per_step.reserve(period());
    double cycle = 0;
    for (const StepMatrix& sm : steps) {
      double moved = 0;  // <1|J_i|g> = exact charge through the counted links
      for (const PairBlock& blk : sm.blocks) moved += p * blk.w * (g[blk.a] - g[blk.b]);
      sm.apply(g);
      per_step.push_back(moved);
      cycle += moved;
    }
    cum += cycle;
    tr.step_flow.push_back(std::move(per_step));
    tr.cycle_flow.push_back(cycle);
    tr.cumulative.push_back(cum);
    if (cycle_density) cycle_density->push_back(g);
  }
  return tr;
}

double steady_flow(const Lattice& lat, const FlowTrace& trace,
                   const std::vector<Eigen::VectorXd>& cycle_density, int transient,
                   int guard_rows, double guard) {
  const int n_cycles = static_cast<int>(trace.cycle_flow.size());
  int last = n_cycles;
  for (int c = 0; c < n_cycles; ++c) {
    double top = 0;
    for (SiteId s = 0; s < lat.size(); ++s)
      if (lat.sites[s].cell_y >= lat.spec.ly - guard_rows) top += cycle_density[c][s];
    if (top > guard) {
      last = c;  // cycle index c+1 is contaminated; keep up to c
      break;
    }
  }
  // plateau between the transient and the opposite-edge buildup; fall back to
  // the latest uncontaminated cycles when the lattice is too small for both
  int first = std::min(transient + 1, std::max(2, last - 5));
  if (last < first) last = std::min(n_cycles, first);
  return trace.steady(first, last);
}

}  // namespace chiralflow
