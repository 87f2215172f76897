// Command-line front end: lattice/schedule validation, exact and stochastic
// simulation runs, parameter scans, and the analytic flow decomposition.
// All outputs are deterministic CSV files.

#include <CLI11.hpp>
#include <filesystem>
#include <future>
#include <iostream>

#include "chiralflow/bloch.hpp"
#include "chiralflow/bulkedge.hpp"
#include "chiralflow/config.hpp"
#include "chiralflow/csv.hpp"
#include "chiralflow/nearzeno.hpp"
#include "chiralflow/quantum.hpp"
#include "chiralflow/zeno.hpp"

namespace cf = chiralflow;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;  // collected as key=value from flags
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "flat key = value config file");
  auto push = [&opts](const std::string& key) {
    return [&opts, key](const std::string& v) { opts.overrides.push_back(key + "=" + v); };
  };
  cmd->add_option_function<std::string>("--lattice", push("lattice"),
                                        "lieb | square | kagome_mod");
  cmd->add_option_function<std::string>("--lx", push("lx"), "cells along x");
  cmd->add_option_function<std::string>("--ly", push("ly"), "cells along y");
  cmd->add_option_function<std::string>("--boundary", push("boundary"),
                                        "open | cylinder_x | torus");
  cmd->add_option_function<std::string>("--schedule", push("schedule"), "standard | naive4");
  cmd->add_option_function<std::string>("--period", push("period"), "cycle duration T");
  cmd->add_option_function<std::string>("--nmeas", push("nmeas"), "measurements per step");
  cmd->add_option_function<std::string>("--cycles", push("cycles"), "number of cycles");
  cmd->add_option_function<std::string>("--engine", push("engine"),
                                        "exact | zeno | floquet | near_zeno");
  cmd->add_option_function<std::string>("--fill", push("fill"),
                                        "lower_half | uniform[:d] | single_site:<id> | file:<p>");
  cmd->add_option_function<std::string>("--cut-x", push("cut_x"), "flow cut position");
  cmd->add_option_function<std::string>("--out", push("out"), "output directory");
}

cf::RunConfig load_config(const CommonOpts& opts) {
  cf::RunConfig cfg;
  if (!opts.config_path.empty()) cfg = cf::parse_config_file(opts.config_path);
  for (const std::string& ov : opts.overrides) {
    size_t eq = ov.find('=');
    cf::apply_override(cfg, ov.substr(0, eq), ov.substr(eq + 1));
  }
  cf::check_config(cfg);
  return cfg;
}

struct Setup {
  cf::Lattice lat;
  cf::MeasurementSchedule sched;
  cf::CutSpec cut;
  Eigen::VectorXd fill;
};

Setup make_setup(const cf::RunConfig& cfg) {
  Setup s;
  s.lat = cf::build_lattice(cfg.lattice);
  s.sched = cf::build_schedule(s.lat, cfg.schedule);
  double x = cfg.cut_x.value_or(cf::default_cut_x(s.lat));
  s.cut = cf::flow_cut(s.lat, s.sched, x);
  s.fill = cf::make_fill(s.lat, cf::parse_fill(cfg.fill));
  return s;
}

void write_density_row(cf::CsvWriter& w, const cf::Lattice& lat, int cycle, int step,
                       const Eigen::VectorXd& d) {
  for (cf::SiteId s = 0; s < lat.size(); ++s)
    w.row({cf::csv_cell(cycle), cf::csv_cell(step), cf::csv_cell(s),
           cf::csv_cell(lat.sites[s].x), cf::csv_cell(lat.sites[s].y), cf::csv_cell(d[s])});
}

int cmd_validate(const CommonOpts& opts, bool dump) {
  cf::RunConfig cfg = load_config(opts);
  cf::Lattice lat = cf::build_lattice(cfg.lattice);
  cf::MeasurementSchedule sched = cf::build_schedule(lat, cfg.schedule);
  cf::ValidationReport rep = cf::validate_schedule(lat, sched);
  if (dump) std::cout << cf::debug_dump(lat, sched);
  std::cout << rep.to_string();
  return rep.admissible() ? kExitOk : kExitValidation;
}

int cmd_simulate(const CommonOpts& opts) {
  cf::RunConfig cfg = load_config(opts);
  Setup s = make_setup(cfg);
  fs::create_directories(cfg.out);
  {
    std::ofstream cfgout(fs::path(cfg.out) / "config.txt", std::ios::binary);
    cfgout << cfg.dump();
  }
  cf::CsvWriter dens(fs::path(cfg.out) / "density.csv",
                     {"cycle", "step", "site", "x", "y", "density"});
  cf::CsvWriter flow(fs::path(cfg.out) / "flow.csv",
                     {"cycle", "step", "cumulative_flow", "step_flow"});

  const int s_steps = s.sched.period();
  if (cfg.engine == cf::Engine::zeno) {
    double p = cf::hop_probability(cfg.period_t, s_steps);
    cf::ZenoEngine eng =
        cf::ZenoEngine::build(s.lat, s.sched, p, cf::CountingWeight::cut, &s.cut);
    Eigen::VectorXd g = s.fill;
    double cum = 0;
    for (int cycle = 1; cycle <= cfg.cycles; ++cycle)
      for (int i = 0; i < s_steps; ++i) {
        double moved = 0;
        for (const cf::PairBlock& blk : eng.steps[i].blocks)
          moved += p * blk.w * (g[blk.a] - g[blk.b]);
        eng.steps[i].apply(g);
        cum += moved;
        write_density_row(dens, s.lat, cycle, i + 1, g);
        flow.row({cf::csv_cell(cycle), cf::csv_cell(i + 1), cf::csv_cell(cum),
                  cf::csv_cell(moved)});
      }
  } else if (cfg.engine == cf::Engine::near_zeno) {
    cf::ProtocolParams params{cfg.period_t, cfg.n_meas};
    cf::NzEngine eng =
        cf::NzEngine::build(s.lat, s.sched, params, cf::CountingWeight::cut, &s.cut);
    cf::FlowTrace tr = eng.run_flow(s.fill, cfg.cycles);
    Eigen::VectorXd g = s.fill;
    for (int cycle = 1; cycle <= cfg.cycles; ++cycle) {
      g = eng.r_nz * g;
      write_density_row(dens, s.lat, cycle, s_steps, g);
      flow.row({cf::csv_cell(cycle), cf::csv_cell(s_steps),
                cf::csv_cell(tr.cumulative[cycle - 1]), cf::csv_cell(tr.cycle_flow[cycle - 1])});
    }
  } else {
    cf::ProtocolParams params{cfg.period_t, cfg.n_meas};
    Eigen::VectorXd prev = s.fill;
    double cum = 0;
    auto observer = [&](int cycle, int step, const Eigen::VectorXd& d) {
      double moved = cf::flow_sim(prev, d, s.cut);
      cum += moved;
      prev = d;
      write_density_row(dens, s.lat, cycle, step, d);
      flow.row({cf::csv_cell(cycle), cf::csv_cell(step), cf::csv_cell(cum), cf::csv_cell(moved)});
    };
    cf::Cmat g0 = cf::diagonal_state(s.fill);
    if (cfg.engine == cf::Engine::exact)
      cf::run_cycle(g0, s.lat, s.sched, params, cfg.cycles, observer);
    else
      cf::run_floquet_cycle(g0, s.lat, s.sched, params, cfg.cycles, observer);
  }
  return kExitOk;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    size_t colon = item.find(':');
    if (colon == std::string::npos) {
      grid.push_back(std::stod(item));
      continue;
    }
    // a:b:step inclusive range
    size_t colon2 = item.find(':', colon + 1);
    if (colon2 == std::string::npos) throw cf::ConfigError("bad grid range: " + item);
    double a = std::stod(item.substr(0, colon));
    double b = std::stod(item.substr(colon + 1, colon2 - colon - 1));
    double st = std::stod(item.substr(colon2 + 1));
    if (st <= 0) throw cf::ConfigError("bad grid step: " + item);
    for (double v = a; v <= b + 1e-12; v += st) grid.push_back(v);
  }
  return grid;
}

// One p-scan point: analytic decomposition vs direct Zeno simulation.
struct PScanRow {
  double p, f_bulk, f_edge, f_total, f_sim_x4;
  std::string error;
};

PScanRow scan_point_p(const cf::RunConfig& cfg, double p) {
  PScanRow row{p, 0, 0, 0, 0, ""};
  try {
    cf::DecomposedFlow dec = cf::f_total(p);
    row.f_bulk = dec.f_bulk;
    row.f_edge = dec.f_edge;
    row.f_total = dec.f_total;
    cf::RunConfig sim = cfg;
    sim.period_t = cf::period_for_probability(p);
    Setup s = make_setup(sim);
    cf::ZenoEngine eng = cf::ZenoEngine::build(s.lat, s.sched, p, cf::CountingWeight::cut, &s.cut);
    std::vector<Eigen::VectorXd> dens;
    cf::FlowTrace tr = eng.run_flow(s.fill, sim.cycles, &dens);
    row.f_sim_x4 = 4.0 * cf::steady_flow(s.lat, tr, dens, 10);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

struct NScanRow {
  int n;
  double flow_nz, flow_exact;
  std::string error;
};

NScanRow scan_point_n(const cf::RunConfig& cfg, int n) {
  NScanRow row{n, 0, 0, ""};
  try {
    cf::RunConfig sim = cfg;
    sim.n_meas = n;
    Setup s = make_setup(sim);
    row.flow_nz = cf::nz_flow(s.lat, s.sched, n, sim.cycles, s.fill, s.cut);
    cf::ProtocolParams params{sim.period_t, n};
    std::vector<double> per_cycle;
    std::vector<Eigen::VectorXd> dens;
    Eigen::VectorXd prev = s.fill;
    double cycle_moved = 0;
    auto observer = [&](int, int step, const Eigen::VectorXd& d) {
      cycle_moved += cf::flow_sim(prev, d, s.cut);
      prev = d;
      if (step == s.sched.period()) {
        per_cycle.push_back(cycle_moved);
        dens.push_back(d);
        cycle_moved = 0;
      }
    };
    cf::run_cycle(cf::diagonal_state(s.fill), s.lat, s.sched, params, sim.cycles, observer);
    cf::FlowTrace tr;
    tr.lx = s.lat.spec.lx;
    tr.cycle_flow = per_cycle;
    double cum = 0;
    for (double v : per_cycle) tr.cumulative.push_back(cum += v);
    row.flow_exact = cf::steady_flow(s.lat, tr, dens, 3);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

int cmd_scan(const CommonOpts& opts, const std::string& axis, const std::string& grid_text) {
  cf::RunConfig cfg = load_config(opts);
  std::vector<double> grid = parse_grid(grid_text);
  fs::create_directories(cfg.out);
  if (axis == "p") {
    cf::CsvWriter out(fs::path(cfg.out) / "scan_p.csv",
                      {"p", "f_bulk", "f_edge", "f_total", "f_sim_x4", "abs_err", "error"});
    std::vector<std::future<PScanRow>> futs;
    for (double p : grid)
      futs.push_back(std::async(std::launch::async, scan_point_p, cfg, p));
    for (auto& f : futs) {
      PScanRow r = f.get();
      out.row({cf::csv_cell(r.p), cf::csv_cell(r.f_bulk), cf::csv_cell(r.f_edge),
               cf::csv_cell(r.f_total), cf::csv_cell(r.f_sim_x4),
               cf::csv_cell(std::abs(r.f_total - r.f_sim_x4)), r.error});
    }
  } else if (axis == "n") {
    cf::CsvWriter out(fs::path(cfg.out) / "scan_n.csv",
                      {"n", "flow_nz", "flow_exact", "abs_err", "error"});
    std::vector<std::future<NScanRow>> futs;
    for (double n : grid)
      futs.push_back(std::async(std::launch::async, scan_point_n, cfg, (int)std::lround(n)));
    for (auto& f : futs) {
      NScanRow r = f.get();
      out.row({cf::csv_cell(r.n), cf::csv_cell(r.flow_nz), cf::csv_cell(r.flow_exact),
               cf::csv_cell(std::abs(r.flow_nz - r.flow_exact)), r.error});
    }
  } else if (axis == "k") {
    // spectral radius of the bulk cycle over a k-grid (grid size from --grid)
    int size = grid.empty() ? 16 : (int)std::lround(grid.front());
    double p = cf::hop_probability(cfg.period_t,
                                   cf::schedule_period(cfg.lattice.kind, cfg.schedule));
    cf::GapReport rep = cf::spectral_gap_check(cfg.lattice.kind, p, size);
    cf::CsvWriter out(fs::path(cfg.out) / "scan_k.csv", {"kx", "ky", "spectral_radius"});
    for (const auto& row : rep.rows)
      out.row({cf::csv_cell(row[0]), cf::csv_cell(row[1]), cf::csv_cell(row[2])});
  } else {
    throw CLI::ValidationError("--axis must be p, n, or k");
  }
  return kExitOk;
}

int cmd_decompose(const CommonOpts& opts, const std::string& grid_text) {
  cf::RunConfig cfg = load_config(opts);
  std::vector<double> grid = parse_grid(grid_text);
  fs::create_directories(cfg.out);
  cf::CsvWriter out(fs::path(cfg.out) / "decompose.csv",
                    {"p", "f_bulk", "f_edge", "f_total", "f_sim_x4", "abs_err"});
  for (double p : grid) {
    PScanRow r = scan_point_p(cfg, p);
    if (!r.error.empty()) throw std::runtime_error(r.error);
    out.row({cf::csv_cell(r.p), cf::csv_cell(r.f_bulk), cf::csv_cell(r.f_edge),
             cf::csv_cell(r.f_total), cf::csv_cell(r.f_sim_x4),
             cf::csv_cell(std::abs(r.f_total - r.f_sim_x4))});
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"measurement-driven chiral edge transport simulator"};
  app.require_subcommand(1);

  CommonOpts vopts, sopts, scopts, dopts;
  bool dump = false;
  std::string axis = "p", grid = "0:1:0.05";

  CLI::App* validate = app.add_subcommand("validate", "check schedule admissibility");
  add_common_flags(validate, vopts);
  validate->add_flag("--dump", dump, "print the lattice/schedule listing");

  CLI::App* simulate = app.add_subcommand("simulate", "run one engine, write CSV traces");
  add_common_flags(simulate, sopts);

  CLI::App* scan = app.add_subcommand("scan", "scan p, n, or k; one CSV row per grid point");
  add_common_flags(scan, scopts);
  scan->add_option("--axis", axis, "p | n | k");
  scan->add_option("--grid", grid, "comma list and/or a:b:step ranges");

  CLI::App* decompose = app.add_subcommand("decompose", "bulk/edge flow decomposition over p");
  add_common_flags(decompose, dopts);
  decompose->add_option("--grid", grid, "comma list and/or a:b:step ranges");

  try {
    app.parse(argc, argv);
    if (validate->parsed()) return cmd_validate(vopts, dump);
    if (simulate->parsed()) return cmd_simulate(sopts);
    if (scan->parsed()) return cmd_scan(scopts, axis, grid);
    if (decompose->parsed()) return cmd_decompose(dopts, grid);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const cf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const cf::NumericalHealthError& e) {
    std::cerr << "numerical health failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}
