#include "chiralflow/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "chiralflow/csv.hpp"

namespace chiralflow {

const char* to_string(Engine e) {
  switch (e) {
    case Engine::exact: return "exact";
    case Engine::zeno: return "zeno";
    case Engine::floquet: return "floquet";
    case Engine::near_zeno: return "near_zeno";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

template <typename T>
T parse_enum(const std::string& v, std::initializer_list<std::pair<const char*, T>> table,
             const char* what) {
  for (auto& [name, val] : table)
    if (v == name) return val;
  throw ConfigError(std::string("invalid ") + what + ": " + v);
}

double parse_double(const std::string& v, const char* what) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(std::string("invalid ") + what + ": " + v);
  }
}

int parse_int(const std::string& v, const char* what) {
  try {
    size_t pos = 0;
    int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError(std::string("invalid ") + what + ": " + v);
  }
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "lattice") {
    cfg.lattice.kind = parse_enum<LatticeKind>(value,
                                               {{"lieb", LatticeKind::lieb},
                                                {"square", LatticeKind::square},
                                                {"kagome_mod", LatticeKind::kagome_mod}},
                                               "lattice");
  } else if (key == "lx") {
    cfg.lattice.lx = parse_int(value, "lx");
  } else if (key == "ly") {
    cfg.lattice.ly = parse_int(value, "ly");
  } else if (key == "boundary") {
    cfg.lattice.boundary = parse_enum<Boundary>(value,
                                                {{"open", Boundary::open},
                                                 {"cylinder_x", Boundary::cylinder_x},
                                                 {"torus", Boundary::torus}},
                                                "boundary");
  } else if (key == "schedule") {
    cfg.schedule = parse_enum<ScheduleKind>(
        value, {{"standard", ScheduleKind::standard}, {"naive4", ScheduleKind::naive4}},
        "schedule");
  } else if (key == "period") {
    cfg.period_t = parse_double(value, "period");
  } else if (key == "nmeas") {
    cfg.n_meas = parse_int(value, "nmeas");
  } else if (key == "cycles") {
    cfg.cycles = parse_int(value, "cycles");
  } else if (key == "engine") {
    cfg.engine = parse_enum<Engine>(value,
                                    {{"exact", Engine::exact},
                                     {"zeno", Engine::zeno},
                                     {"floquet", Engine::floquet},
                                     {"near_zeno", Engine::near_zeno}},
                                    "engine");
  } else if (key == "fill") {
    parse_fill(value);  // validates
    cfg.fill = value;
  } else if (key == "cut_x") {
    cfg.cut_x = parse_double(value, "cut_x");
  } else if (key == "out") {
    cfg.out = value;
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    apply_override(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string RunConfig::dump() const {
  std::ostringstream os;
  os << "lattice = " << chiralflow::to_string(lattice.kind) << "\n";
  os << "lx = " << lattice.lx << "\n";
  os << "ly = " << lattice.ly << "\n";
  os << "boundary = " << chiralflow::to_string(lattice.boundary) << "\n";
  os << "schedule = " << (schedule == ScheduleKind::naive4 ? "naive4" : "standard") << "\n";
  os << "period = " << fmt_double(period_t) << "\n";
  os << "nmeas = " << n_meas << "\n";
  os << "cycles = " << cycles << "\n";
  os << "engine = " << chiralflow::to_string(engine) << "\n";
  os << "fill = " << fill << "\n";
  if (cut_x) os << "cut_x = " << fmt_double(*cut_x) << "\n";
  os << "out = " << out << "\n";
  return os.str();
}

FillSpec parse_fill(const std::string& text) {
  if (text == "lower_half") return FillLowerHalf{};
  if (text == "uniform") return FillUniform{};
  if (text.rfind("uniform:", 0) == 0)
    return FillUniform{parse_double(text.substr(8), "uniform fill density")};
  if (text.rfind("single_site:", 0) == 0)
    return FillSingleSite{parse_int(text.substr(12), "fill site")};
  if (text.rfind("file:", 0) == 0) return FillFromFile{text.substr(5)};
  throw ConfigError("invalid fill: " + text);
}

void check_config(const RunConfig& cfg) {
  if (cfg.lattice.lx < 1 || cfg.lattice.ly < 1) throw ConfigError("lx and ly must be >= 1");
  if (cfg.period_t <= 0) throw ConfigError("period must be positive");
  if (cfg.n_meas < 1) throw ConfigError("nmeas must be >= 1");
  if (cfg.cycles < 0) throw ConfigError("cycles must be >= 0");
  if (cfg.engine == Engine::near_zeno && std::abs(cfg.period_t - 4 * M_PI) > 1e-9)
    throw ConfigError("near_zeno engine requires period = 4*pi (perfect switching)");
  if (cfg.schedule == ScheduleKind::naive4 && cfg.lattice.kind != LatticeKind::square)
    throw ConfigError("naive4 schedule is defined on the square lattice only");
}

}  // namespace chiralflow
