#include "chiralflow/bloch.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace chiralflow {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

struct BlochPair {
  int ia, ib;
  Eigen::Vector2i dn;    // Bravais coordinates of cell(b) - cell(a)
  double dx;             // real-space x displacement of the hop a -> b
  double dy_cell;        // real-space y displacement of the cell shift only
};

struct BlochTable {
  int block = 0;
  int period = 0;
  std::vector<std::vector<BlochPair>> by_step;
};

const BlochTable& table(LatticeKind kind) {
  static auto make = [](LatticeKind kd) {
    BlochTable t;
    const auto& pairs = bulk_pairs(kd);
    t.period = schedule_period(kd);
    t.by_step.resize(t.period);
    CellBasis cb = cell_basis(kd);
    LatticeSpec probe{kd, 1, 1, Boundary::open};
    Lattice unit = build_lattice(probe);
    t.block = unit.n_internal;
    for (const BulkPair& bp : pairs) {
      BlochPair e;
      e.ia = bp.ia;
      e.ib = bp.ib;
      Eigen::Vector2i grid(bp.ub - bp.ua, bp.vb - bp.va);
      e.dn = cb.grid_to_bravais * grid;
      Eigen::Vector2d cell_shift = e.dn.x() * cb.a + e.dn.y() * cb.b;
      const Site& sa = unit.sites[bp.ia];
      const Site& sb = unit.sites[bp.ib];
      e.dx = sb.x - sa.x + cell_shift.x();
      e.dy_cell = cell_shift.y();
      t.by_step[bp.step - 1].push_back(e);
    }
    return t;
  };
  static const BlochTable lieb = make(LatticeKind::lieb);
  static const BlochTable square = make(LatticeKind::square);
  static const BlochTable kagome = make(LatticeKind::kagome_mod);
  switch (kind) {
    case LatticeKind::lieb: return lieb;
    case LatticeKind::square: return square;
    case LatticeKind::kagome_mod: return kagome;
  }
  throw std::logic_error("unknown lattice kind");
}

// Builds one step factor plus (optionally) its theta- or ky-derivative.
enum class Deriv { none, theta, ky };

Eigen::MatrixXcd step_factor(LatticeKind kind, int step, double p, const Eigen::Vector2d& k,
                             double theta, Deriv d) {
  const BlochTable& t = table(kind);
  if (step < 1 || step > t.period) throw std::out_of_range("step index");
  CellBasis cb = cell_basis(kind);
  Eigen::MatrixXcd m = d == Deriv::none
                           ? Eigen::MatrixXcd::Identity(t.block, t.block).eval()
                           : Eigen::MatrixXcd::Zero(t.block, t.block).eval();
  for (const BlochPair& e : t.by_step[step - 1]) {
    std::complex<double> kph = std::exp(-kI * (k.x() * e.dn.x() + k.y() * e.dn.y()));
    std::complex<double> tph = std::polar(1.0, theta * e.dx);
    std::complex<double> fwd = p * kph * tph;        // hop a -> b: entry (ib, ia)
    std::complex<double> bwd = p / (kph * tph);      // hop b -> a: entry (ia, ib)
    switch (d) {
      case Deriv::none:
        m(e.ia, e.ia) = 1 - p;
        m(e.ib, e.ib) = 1 - p;
        m(e.ib, e.ia) = fwd;
        m(e.ia, e.ib) = bwd;
        break;
      case Deriv::theta:  // -i d/dtheta
        m(e.ib, e.ia) += e.dx * fwd;
        m(e.ia, e.ib) += -e.dx * bwd;
        break;
      case Deriv::ky: {
        // d/dky with ky conjugate to the integer cell-row index
        double w = e.dn.x() * cb.rows_a + e.dn.y() * cb.rows_b;
        m(e.ib, e.ia) += -kI * w * fwd;
        m(e.ia, e.ib) += kI * w * bwd;
        break;
      }
    }
  }
  return m;
}

}  // namespace

Eigen::MatrixXcd bloch_step(LatticeKind kind, int step, double p, const Eigen::Vector2d& k,
                            double theta) {
  return step_factor(kind, step, p, k, theta, Deriv::none);
}

Eigen::MatrixXcd bloch_cycle(LatticeKind kind, double p, const Eigen::Vector2d& k, double theta) {
  const BlochTable& t = table(kind);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(t.block, t.block);
  for (int i = 1; i <= t.period; ++i) m = step_factor(kind, i, p, k, theta, Deriv::none) * m;
  return m;
}

namespace {

Eigen::MatrixXcd cycle_derivative(LatticeKind kind, double p, const Eigen::Vector2d& k,
                                  double theta, Deriv d) {
  const BlochTable& t = table(kind);
  Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(t.block, t.block);
  Eigen::MatrixXcd deriv = Eigen::MatrixXcd::Zero(t.block, t.block);
  for (int i = 1; i <= t.period; ++i) {
    Eigen::MatrixXcd f = step_factor(kind, i, p, k, theta, Deriv::none);
    Eigen::MatrixXcd df = step_factor(kind, i, p, k, theta, d);
    deriv = f * deriv + df * prod;
    prod = f * prod;
  }
  return deriv;
}

}  // namespace

Eigen::MatrixXcd bloch_current(LatticeKind kind, double p, const Eigen::Vector2d& k) {
  return cycle_derivative(kind, p, k, 0.0, Deriv::theta);
}

Eigen::MatrixXcd bloch_cycle_dky(LatticeKind kind, double p, const Eigen::Vector2d& k,
                                 double theta) {
  return cycle_derivative(kind, p, k, theta, Deriv::ky);
}

double spectral_radius(const Eigen::MatrixXcd& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::VectorXcd char_poly(const Eigen::MatrixXcd& m) {
  // Faddeev-LeVerrier
  const int n = static_cast<int>(m.rows());
  Eigen::VectorXcd c(n + 1);
  c[0] = 1.0;
  Eigen::MatrixXcd mk = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 1; k <= n; ++k) {
    mk = m * mk + c[k - 1] * Eigen::MatrixXcd::Identity(n, n);
    c[k] = -(m * mk).trace() / static_cast<double>(k);
  }
  return c;
}

GapReport spectral_gap_check(LatticeKind kind, double p, int grid) {
  if (p <= 0 || p >= 1) throw std::invalid_argument("spectral_gap_check needs 0 < p < 1");
  GapReport rep;
  rep.grid = grid;
  rep.max_radius = 0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      if (i == 0 && j == 0) continue;
      Eigen::Vector2d k(2 * M_PI * i / grid, 2 * M_PI * j / grid);
      double r = spectral_radius(bloch_cycle(kind, p, k, 0.0));
      rep.rows.push_back({k.x(), k.y(), r});
      if (r > rep.max_radius) {
        rep.max_radius = r;
        rep.argmax_k = k;
      }
    }
  rep.all_below_one = rep.max_radius < 1.0 - 1e-12;
  return rep;
}

}  // namespace chiralflow
