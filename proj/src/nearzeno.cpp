#include "chiralflow/nearzeno.hpp"

#include <cmath>
#include <stdexcept>

namespace chiralflow {

namespace {

struct StepGeometry {
  std::vector<SiteId> partner;  // -1 unless a pair member of this step
  std::vector<char> lone;       // isolated free-set members
};

StepGeometry step_geometry(const Lattice& lat, const FreeSet& fs) {
  StepGeometry g;
  g.partner.assign(lat.size(), -1);
  g.lone.assign(lat.size(), 0);
  for (auto [a, b] : fs.pairs) {
    g.partner[a] = b;
    g.partner[b] = a;
  }
  for (SiteId s : fs.isolated) g.lone[s] = 1;
  return g;
}

}  // namespace

std::vector<SiteCase> classify_sites(const Lattice& lat, const MeasurementSchedule& sched,
                                     int step) {
  if (step < 1 || step > sched.period()) throw std::out_of_range("step index");
  StepGeometry g = step_geometry(lat, sched.steps[step - 1]);
  std::vector<SiteCase> cls(lat.size(), SiteCase::inert);
  auto mark = [&](SiteId s, SiteCase c) {
    if (cls[s] != SiteCase::inert && cls[s] != c)
      throw std::logic_error("case regions overlap; schedule violates pair separation");
    cls[s] = c;
  };
  for (SiteId s = 0; s < lat.size(); ++s) {
    if (g.partner[s] >= 0) {
      mark(s, SiteCase::case2);
      for (SiteId t : lat.adj[s]) mark(t, SiteCase::case2);
    } else if (g.lone[s]) {
      mark(s, SiteCase::case1);
      for (SiteId t : lat.adj[s]) mark(t, SiteCase::case1);
    }
  }
  return cls;
}

Eigen::MatrixXd build_correction(const Lattice& lat, const MeasurementSchedule& sched, int step) {
  if (step < 1 || step > sched.period()) throw std::out_of_range("step index");
  const FreeSet& fs = sched.steps[step - 1];
  StepGeometry g = step_geometry(lat, fs);
  const int n = lat.size();

  Eigen::MatrixXd rt = Eigen::MatrixXd::Zero(n, n);
  for (SiteId a = 0; a < n; ++a) {
    if (g.partner[a] >= 0) continue;
    rt(a, a) = lat.degree(a);
    for (SiteId b : lat.adj[a])
      if (g.partner[b] < 0) rt(a, b) = -1.0;
  }
  for (auto [a, b] : fs.pairs) {
    double s = lat.degree(a) + lat.degree(b);
    rt(a, b) = rt(b, a) = 0.5 * s - 1.0;
    for (SiteId x : {a, b})
      for (SiteId m : lat.adj[x]) {
        if (m == a || m == b) continue;
        rt(m, a) -= 0.5;
        rt(a, m) -= 0.5;
        rt(m, b) -= 0.5;
        rt(b, m) -= 0.5;
      }
  }

  for (int i = 0; i < n; ++i) {
    if (rt.row(i).sum() != 0.0 || rt.col(i).sum() != 0.0)
      throw std::logic_error("correction matrix is not zero line-sum");
  }
  return rt;
}

namespace {

// Weighted counting dress: entry (t,s) describes the hop s -> t and carries
// weight w(s->t); J picks entry * weight.
Eigen::MatrixXd dress_current(const Lattice& lat, const Eigen::MatrixXd& m, CountingWeight weight,
                              const CutSpec* cut) {
  const int n = lat.size();
  const double px = lat.spec.boundary != Boundary::open
                        ? lat.x_period()
                        : 2 * (std::abs(lat.sites.back().x) + lat.x_period() + 1);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  if (weight == CountingWeight::none) return j;
  for (int t = 0; t < n; ++t)
    for (int s = 0; s < n; ++s) {
      if (m(t, s) == 0.0 || t == s) continue;
      double dx = lat.dx_wrapped(s, t);
      double w = weight == CountingWeight::all_links
                     ? dx
                     : crossing_count(lat.sites[s].x, dx, cut->x_cut, px);
      j(t, s) = w * m(t, s);
    }
  return j;
}

struct Factor {
  Eigen::MatrixXd m;  // value at theta = 0
  Eigen::MatrixXd j;  // -i d/dtheta at 0
};

// Product F_last ... F_first with exact first-derivative accumulation.
Factor chain(const std::vector<const Factor*>& factors) {
  const int n = static_cast<int>(factors.front()->m.rows());
  Factor out{Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Zero(n, n)};
  for (const Factor* f : factors) {
    out.j = f->m * out.j + f->j * out.m;
    out.m = f->m * out.m;
  }
  return out;
}

}  // namespace

NzEngine NzEngine::build(const Lattice& lat, const MeasurementSchedule& sched,
                         const ProtocolParams& params, CountingWeight weight,
                         const CutSpec* cut) {
  const int s = sched.period();
  const double p = hop_probability(params.period_t, s);
  if (std::abs(p - 1.0) > 1e-9)
    throw std::invalid_argument(
        "near-Zeno corrections are derived at perfect switching (p = 1) only");
  const double tau = params.tau(s);

  NzEngine eng;
  eng.lat = &lat;
  eng.lx = lat.spec.lx;
  eng.n_tau_sq = params.n_meas * tau * tau;

  ZenoEngine zeno = ZenoEngine::build(lat, sched, p, weight, cut);
  std::vector<Factor> rfac(s), cfac(s);
  for (int i = 0; i < s; ++i) {
    rfac[i].m = zeno.steps[i].dense();
    rfac[i].j = zeno.steps[i].current_dense();
    cfac[i].m = build_correction(lat, sched, i + 1);
    cfac[i].j = dress_current(lat, cfac[i].m, weight, cut);
  }

  std::vector<const Factor*> order(s);
  for (int i = 0; i < s; ++i) order[i] = &rfac[i];
  Factor cyc = chain(order);
  eng.r_nz = cyc.m;
  eng.j_nz = cyc.j;
  for (int i = 0; i < s; ++i) {
    order[i] = &cfac[i];
    Factor term = chain(order);
    eng.r_nz -= eng.n_tau_sq * term.m;
    eng.j_nz -= eng.n_tau_sq * term.j;
    order[i] = &rfac[i];
  }
  return eng;
}

Eigen::MatrixXcd NzEngine::r_nz_theta(const MeasurementSchedule& sched,
                                      const ProtocolParams& params, CountingWeight weight,
                                      const CutSpec* cut, double theta) const {
  const int s = sched.period();
  const double p = hop_probability(params.period_t, s);
  ZenoEngine zeno = ZenoEngine::build(*lat, sched, p, weight, cut);
  const int n = lat->size();
  const double px = lat->spec.boundary != Boundary::open
                        ? lat->x_period()
                        : 2 * (std::abs(lat->sites.back().x) + lat->x_period() + 1);
  auto dress = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXcd out = m.cast<std::complex<double>>();
    for (int t = 0; t < n; ++t)
      for (int c = 0; c < n; ++c) {
        if (t == c || m(t, c) == 0.0) continue;
        double dx = lat->dx_wrapped(c, t);
        double w = weight == CountingWeight::all_links
                       ? dx
                       : (weight == CountingWeight::cut
                              ? crossing_count(lat->sites[c].x, dx, cut->x_cut, px)
                              : 0.0);
        out(t, c) *= std::polar(1.0, theta * w);
      }
    return out;
  };
  std::vector<Eigen::MatrixXcd> rfac(s), cfac(s);
  for (int i = 0; i < s; ++i) {
    rfac[i] = zeno.steps[i].dense(theta);
    cfac[i] = dress(build_correction(*lat, sched, i + 1));
  }
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Identity(n, n);
  for (int i = 0; i < s; ++i) total = rfac[i] * total;
  for (int i = 0; i < s; ++i) {
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(n, n);
    for (int j = 0; j < s; ++j) term = (j == i ? cfac[j] : rfac[j]) * term;
    total -= n_tau_sq * term;
  }
  return total;
}

FlowTrace NzEngine::run_flow(const Eigen::VectorXd& g0, int n_cycles,
                             std::vector<Eigen::VectorXd>* cycle_density) const {
  FlowTrace tr;
  tr.lx = lx;
  Eigen::VectorXd g = g0;
  Eigen::RowVectorXd w = Eigen::RowVectorXd::Ones(g.size()) * j_nz;
  double cum = 0;
  for (int c = 0; c < n_cycles; ++c) {
    double moved = w * g;
    g = r_nz * g;
    cum += moved;
    tr.step_flow.push_back({moved});
    tr.cycle_flow.push_back(moved);
    tr.cumulative.push_back(cum);
    if (cycle_density) cycle_density->push_back(g);
  }
  return tr;
}

double nz_flow(const Lattice& lat, const MeasurementSchedule& sched, int n_meas, int n_cycles,
               const Eigen::VectorXd& g0, const CutSpec& cut, int transient) {
  ProtocolParams params{4.0 * M_PI, n_meas};
  NzEngine eng = NzEngine::build(lat, sched, params, CountingWeight::cut, &cut);
  std::vector<Eigen::VectorXd> dens;
  FlowTrace tr = eng.run_flow(g0, n_cycles, &dens);
  return steady_flow(lat, tr, dens, transient);
}

}  // namespace chiralflow
