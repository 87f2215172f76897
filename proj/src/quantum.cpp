#include "chiralflow/quantum.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace chiralflow {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
}

EvolutionCache make_cache(const Lattice& lat, double tau) {
  EvolutionCache cache;
  cache.tau = tau;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lat.hamiltonian);
  if (es.info() != Eigen::Success) throw NumericalHealthError("eigendecomposition failed");
  const Eigen::MatrixXd& v = es.eigenvectors();
  Eigen::VectorXcd phases = (-kI * tau * es.eigenvalues().array()).exp();
  cache.u = v * phases.asDiagonal() * v.transpose();
  double unit_err = (cache.u.adjoint() * cache.u - Cmat::Identity(v.rows(), v.cols()))
                        .cwiseAbs()
                        .maxCoeff();
  if (unit_err > 1e-10) throw NumericalHealthError("propagator not unitary");
  cache.abs2u = cache.u.cwiseAbs2();
  return cache;
}

Cmat evolve_free(const Cmat& g, const EvolutionCache& cache) {
  if (g.rows() != cache.u.rows() || g.cols() != cache.u.cols())
    throw std::invalid_argument("dimension mismatch");
  return cache.u * g * cache.u.adjoint();
}

void measure_sites_inplace(Cmat& g, const std::vector<char>& measured_mask) {
  const int n = static_cast<int>(g.rows());
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      if (measured_mask[r] || measured_mask[c]) g(r, c) = 0.0;
    }
}

Cmat measure_sites(Cmat g, const std::vector<char>& measured_mask) {
  measure_sites_inplace(g, measured_mask);
  return g;
}

Cmat measure_sites(Cmat g, const std::vector<SiteId>& measured, int n_sites) {
  std::vector<char> mask(n_sites, 0);
  for (SiteId s : measured) mask[s] = 1;
  measure_sites_inplace(g, mask);
  return g;
}

Cmat inject(Cmat g, SiteId site, double epsilon) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon out of [0,1]");
  const double keep = 1.0 - epsilon;
  g.row(site) *= keep;
  g.col(site) *= keep;
  g(site, site) = keep * keep * g(site, site).real() + epsilon * (2.0 - epsilon);
  return g;
}

Cmat extract(Cmat g, SiteId site, double epsilon) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon out of [0,1]");
  const double keep = 1.0 - epsilon;
  g.row(site) *= keep;
  g.col(site) *= keep;
  g(site, site) = keep * keep * g(site, site).real();
  return g;
}

double hs_norm(const Cmat& g) { return g.norm(); }

namespace {

// Exact fast path for one measurement step. The state between measurements is
// diag(d) plus a Hermitian off-diagonal block supported on the free set A;
// only those entries of U G U† are ever needed back.
struct StepWorkspace {
  std::vector<SiteId> a_sites;         // free set, ascending
  std::vector<int> slot;               // site -> index in a_sites, or -1
  Cmat u_cols;                         // U(:, A)
  Cmat u_rows;                         // U(A, :)
  Cmat u_aa;                           // U(A, A)
};

StepWorkspace make_step_workspace(const FreeSet& fs, const EvolutionCache& cache) {
  StepWorkspace w;
  w.a_sites = fs.members();
  const int n = static_cast<int>(cache.u.rows());
  const int k = static_cast<int>(w.a_sites.size());
  w.slot.assign(n, -1);
  for (int i = 0; i < k; ++i) w.slot[w.a_sites[i]] = i;
  w.u_cols.resize(n, k);
  w.u_rows.resize(k, n);
  for (int i = 0; i < k; ++i) {
    w.u_cols.col(i) = cache.u.col(w.a_sites[i]);
    w.u_rows.row(i) = cache.u.row(w.a_sites[i]);
  }
  w.u_aa.resize(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) w.u_aa(i, j) = cache.u(w.a_sites[i], w.a_sites[j]);
  return w;
}

// One repetition of [evolve tau; measure A^c] on (d, b).
void inner_rep(const EvolutionCache& cache, const StepWorkspace& w,
               Eigen::VectorXd& d, Cmat& b) {
  const int k = static_cast<int>(w.a_sites.size());
  Eigen::VectorXd new_d = cache.abs2u * d;
  Cmat new_b;
  if (k > 0) {
    Cmat m = w.u_cols * b;                                   // U(:,A) B
    new_d += (m.array() * w.u_cols.array().conjugate()).rowwise().sum().real().matrix();
    Cmat block = (w.u_rows * d.asDiagonal()) * w.u_rows.adjoint();  // (U D U†)_AA
    Cmat mb(k, k);
    for (int i = 0; i < k; ++i) mb.row(i) = m.row(w.a_sites[i]);
    block.noalias() += mb * w.u_aa.adjoint();                // (U B U†)_AA
    block = 0.5 * (block + block.adjoint()).eval();
    block.diagonal().setZero();
    new_b = std::move(block);
  } else {
    new_b = Cmat::Zero(0, 0);
  }
  d = std::move(new_d);
  b = std::move(new_b);
}

// Restrict the block (in old A-coordinates) to the survivors of a measurement
// keeping only `keep_mask` sites, re-indexed into the new A-coordinates.
Cmat restrict_block(const Cmat& b, const std::vector<SiteId>& old_sites,
                    const std::vector<char>& keep_mask, const StepWorkspace& next) {
  const int k_new = static_cast<int>(next.a_sites.size());
  Cmat out = Cmat::Zero(k_new, k_new);
  const int k_old = static_cast<int>(old_sites.size());
  for (int i = 0; i < k_old; ++i) {
    SiteId si = old_sites[i];
    if (!keep_mask[si] || next.slot[si] < 0) continue;
    for (int j = 0; j < k_old; ++j) {
      SiteId sj = old_sites[j];
      if (!keep_mask[sj] || next.slot[sj] < 0) continue;
      out(next.slot[si], next.slot[sj]) = b(i, j);
    }
  }
  return out;
}

}  // namespace

Cmat run_cycle(const Cmat& g0, const Lattice& lat, const MeasurementSchedule& sched,
               const ProtocolParams& params, int n_cycles, const StepObserver& observer) {
  const int n = lat.size();
  if (g0.rows() != n || g0.cols() != n) throw std::invalid_argument("dimension mismatch");
  const int s = sched.period();
  EvolutionCache cache = make_cache(lat, params.tau(s));

  std::vector<StepWorkspace> ws;
  ws.reserve(s);
  for (int i = 0; i < s; ++i) ws.push_back(make_step_workspace(sched.steps[i], cache));

  // intersection masks A_i ∩ A_{i-1}
  std::vector<std::vector<char>> inter(s);
  for (int i = 0; i < s; ++i) {
    const auto& cur = sched.steps[i].member;
    const auto& prev = sched.steps[(i + s - 1) % s].member;
    inter[i].resize(n);
    for (int r = 0; r < n; ++r) inter[i][r] = cur[r] && prev[r];
  }

  Eigen::VectorXd d = g0.diagonal().real();
  const double trace0 = d.sum();

  // opening measurement of cycle 1, step 1: keep diag + (A_1 ∩ A_0) block
  Cmat b = Cmat::Zero(ws[0].a_sites.size(), ws[0].a_sites.size());
  for (SiteId r : ws[0].a_sites)
    for (SiteId c : ws[0].a_sites) {
      if (r == c || !inter[0][r] || !inter[0][c]) continue;
      b(ws[0].slot[r], ws[0].slot[c]) = g0(r, c);
    }

  int prev_step = 0;
  for (int cycle = 0; cycle < n_cycles; ++cycle) {
    for (int i = 0; i < s; ++i) {
      if (cycle > 0 || i > 0) {
        b = restrict_block(b, ws[prev_step].a_sites, inter[i], ws[i]);
      }
      for (int rep = 0; rep < params.n_meas; ++rep) inner_rep(cache, ws[i], d, b);
      prev_step = i;
      if (observer) observer(cycle + 1, i + 1, d);
    }
    double budget = 1e-7 * std::max(1.0, (cycle + 1) / 100.0);
    if (std::abs(d.sum() - trace0) > budget)
      throw NumericalHealthError("trace drift beyond budget");
  }

  Cmat g = Cmat::Zero(n, n);
  g.diagonal() = d.cast<std::complex<double>>();
  const auto& last = ws[prev_step];
  for (size_t i = 0; i < last.a_sites.size(); ++i)
    for (size_t j = 0; j < last.a_sites.size(); ++j)
      if (i != j) g(last.a_sites[i], last.a_sites[j]) = b(i, j);
  return g;
}

Cmat run_floquet_cycle(const Cmat& g0, const Lattice& lat, const MeasurementSchedule& sched,
                       const ProtocolParams& params, int n_cycles,
                       const StepObserver& observer) {
  const int n = lat.size();
  if (g0.rows() != n || g0.cols() != n) throw std::invalid_argument("dimension mismatch");
  const int s = sched.period();
  const double angle = params.n_meas * params.tau(s);
  const double c = std::cos(angle);
  const std::complex<double> ms = -kI * std::sin(angle);

  Cmat g = g0;
  for (int cycle = 0; cycle < n_cycles; ++cycle) {
    for (int i = 0; i < s; ++i) {
      // G <- W G W† with W = exp(-i n tau H_{A_i}): 2x2 rotations on pairs
      for (auto [a, b] : sched.steps[i].pairs) {
        Eigen::RowVectorXcd ra = g.row(a), rb = g.row(b);
        g.row(a) = c * ra + ms * rb;
        g.row(b) = ms * ra + c * rb;
      }
      for (auto [a, b] : sched.steps[i].pairs) {
        Eigen::VectorXcd ca = g.col(a), cb = g.col(b);
        g.col(a) = c * ca + std::conj(ms) * cb;
        g.col(b) = std::conj(ms) * ca + c * cb;
      }
      if (observer) observer(cycle + 1, i + 1, g.diagonal().real());
    }
  }
  return g;
}

double flow_sim(const Eigen::VectorXd& before, const Eigen::VectorXd& after, const CutSpec& cut) {
  double gain = 0;
  for (int s = 0; s < before.size(); ++s)
    if (!cut.left[s]) gain += after[s] - before[s];
  return gain;
}

double flow_sim(const Cmat& g_before, const Cmat& g_after, const CutSpec& cut) {
  if (g_before.rows() != g_after.rows()) throw std::invalid_argument("dimension mismatch");
  return flow_sim(Eigen::VectorXd(g_before.diagonal().real()),
                  Eigen::VectorXd(g_after.diagonal().real()), cut);
}

Eigen::VectorXd make_fill(const Lattice& lat, const FillSpec& fill) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(lat.size());
  if (std::holds_alternative<FillLowerHalf>(fill)) {
    for (SiteId s = 0; s < lat.size(); ++s)
      if (lat.sites[s].cell_y < lat.spec.ly / 2) g[s] = 1.0;
  } else if (auto* u = std::get_if<FillUniform>(&fill)) {
    if (u->density < 0.0 || u->density > 1.0)
      throw std::invalid_argument("uniform density out of [0,1]");
    g.setConstant(u->density);
  } else if (auto* ss = std::get_if<FillSingleSite>(&fill)) {
    if (ss->site < 0 || ss->site >= lat.size()) throw std::invalid_argument("site out of range");
    g[ss->site] = 1.0;
  } else if (auto* f = std::get_if<FillFromFile>(&fill)) {
    std::ifstream in(f->path);
    if (!in) throw std::invalid_argument("cannot open fill file: " + f->path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ls(line);
      long site;
      double val;
      if (!(ls >> site >> val)) throw std::invalid_argument("bad fill line: " + line);
      if (site < 0 || site >= lat.size()) throw std::invalid_argument("fill site out of range");
      if (val < -1e-12 || val > 1.0 + 1e-12)
        throw std::invalid_argument("fill density out of [0,1]");
      g[site] = val;
    }
  }
  return g;
}

Cmat diagonal_state(const Eigen::VectorXd& density) {
  Cmat g = Cmat::Zero(density.size(), density.size());
  g.diagonal() = density.cast<std::complex<double>>();
  return g;
}

}  // namespace chiralflow
