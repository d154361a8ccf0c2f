#pragma once

// Configuration and subcommand bodies for the htqft command-line tool.
// Commands write to caller-supplied streams so they can be driven in-process.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "htqft/htqft.hpp"
#include <nlohmann/json.hpp>

namespace htqft::app {

using json = nlohmann::json;

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class Command { basis, spectrum, quench, pauli, circuit, matrix };

inline std::string to_string(Command c) {
  switch (c) {
    case Command::basis: return "basis";
    case Command::spectrum: return "spectrum";
    case Command::quench: return "quench";
    case Command::pauli: return "pauli";
    case Command::circuit: return "circuit";
    case Command::matrix: return "matrix";
  }
  return "?";
}

struct RunConfig {
  std::vector<double> m_over_g{0.2};
  double gL = 8.0;
  double theta = 0.0;
  std::vector<int> n_q{2};
  Sector sector = Sector::even;
  std::string method = "exp";
  std::vector<double> dt{0.1};
  double t_max = 25.0;
  std::optional<double> sample_dt;  // default: 0.1 for exp, dt for trotter/split
  std::optional<double> e_max;      // raw energy cutoff instead of n_q
  std::uint64_t seed = 0;
  std::string out;        // empty: stdout
  std::string resources;  // circuit resource JSON; empty: stderr
  int jobs = 1;
  bool zero_mode_delta = false;
  int steps = 1;
};

enum class KeyKind { real, real_list, integer, integer_list, text, boolean };

inline const std::map<std::string, KeyKind>& config_keys() {
  static const std::map<std::string, KeyKind> keys{
      {"m_over_g", KeyKind::real_list}, {"gL", KeyKind::real},          {"theta", KeyKind::real},
      {"n_q", KeyKind::integer_list},   {"sector", KeyKind::text},      {"method", KeyKind::text},
      {"dt", KeyKind::real_list},       {"t_max", KeyKind::real},       {"sample_dt", KeyKind::real},
      {"e_max", KeyKind::real},         {"seed", KeyKind::integer},     {"out", KeyKind::text},
      {"resources", KeyKind::text},     {"jobs", KeyKind::integer},     {"zero_mode_delta", KeyKind::boolean},
      {"steps", KeyKind::integer},
  };
  return keys;
}

namespace detail {

inline double as_real(const std::string& key, const json& v) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "' expects a number, got " + v.dump());
  return v.get<double>();
}

inline long long as_integer(const std::string& key, const json& v) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 1e15) return static_cast<long long>(d);
  }
  throw ConfigError("config key '" + key + "' expects an integer, got " + v.dump());
}

template <class T, class F>
std::vector<T> as_list(const std::string& key, const json& v, F one) {
  std::vector<T> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(static_cast<T>(one(key, x)));
  } else {
    out.push_back(static_cast<T>(one(key, v)));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "' needs at least one value");
  return out;
}

inline int narrow_int(const std::string& key, long long v) {
  if (v < -1000000 || v > 1000000) throw ConfigError("config key '" + key + "' out of range: " + std::to_string(v));
  return static_cast<int>(v);
}

}  // namespace detail

inline void set_key(RunConfig& c, const std::string& key, const json& v) {
  using namespace detail;
  if (!config_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  if (key == "m_over_g") c.m_over_g = as_list<double>(key, v, as_real);
  else if (key == "gL") c.gL = as_real(key, v);
  else if (key == "theta") c.theta = as_real(key, v);
  else if (key == "n_q") {
    c.n_q.clear();
    for (long long n : as_list<long long>(key, v, as_integer)) c.n_q.push_back(narrow_int(key, n));
  } else if (key == "sector") {
    if (!v.is_string()) throw ConfigError("config key 'sector' expects even, odd or both");
    try {
      c.sector = parse_sector(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "method") {
    if (!v.is_string()) throw ConfigError("config key 'method' expects exp, trotter or split");
    c.method = v.get<std::string>();
  } else if (key == "dt") c.dt = as_list<double>(key, v, as_real);
  else if (key == "t_max") c.t_max = as_real(key, v);
  else if (key == "sample_dt") c.sample_dt = as_real(key, v);
  else if (key == "e_max") c.e_max = as_real(key, v);
  else if (key == "seed") {
    const long long s = as_integer(key, v);
    if (s < 0) throw ConfigError("config key 'seed' must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "out" || key == "resources") {
    if (!v.is_string()) throw ConfigError("config key '" + key + "' expects a path string");
    (key == "out" ? c.out : c.resources) = v.get<std::string>();
  } else if (key == "jobs") c.jobs = narrow_int(key, as_integer(key, v));
  else if (key == "zero_mode_delta") {
    if (!v.is_boolean()) throw ConfigError("config key 'zero_mode_delta' expects true or false");
    c.zero_mode_delta = v.get<bool>();
  } else if (key == "steps") c.steps = narrow_int(key, as_integer(key, v));
}

inline void apply_json(RunConfig& c, const json& obj) {
  if (!obj.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, value] : obj.items()) set_key(c, key, value);
}

inline void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  apply_json(c, obj);
}

/// Converts command-line text for `key` into the JSON value set_key expects.
inline json flag_value(const std::string& key, const std::vector<std::string>& words) {
  const auto it = config_keys().find(key);
  if (it == config_keys().end()) throw ConfigError("unknown flag --" + key);
  auto number = [&](const std::string& w) -> json {
    try {
      return parse_double(w);
    } catch (const std::exception&) {
      throw ConfigError("--" + key + " expects a number, got '" + w + "'");
    }
  };
  auto integer = [&](const std::string& w) -> json {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(w, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != w.size() || w.empty()) throw ConfigError("--" + key + " expects an integer, got '" + w + "'");
    return v;
  };
  if (words.empty()) throw ConfigError("--" + key + " needs a value");
  switch (it->second) {
    case KeyKind::real: return number(words.back());
    case KeyKind::integer: return integer(words.back());
    case KeyKind::text: return words.back();
    case KeyKind::boolean: {
      const std::string& w = words.back();
      if (w == "true" || w == "1" || w.empty()) return true;
      if (w == "false" || w == "0") return false;
      throw ConfigError("--" + key + " expects true or false, got '" + w + "'");
    }
    case KeyKind::real_list: {
      json a = json::array();
      for (const auto& w : words) a.push_back(number(w));
      return a;
    }
    case KeyKind::integer_list: {
      json a = json::array();
      for (const auto& w : words) a.push_back(integer(w));
      return a;
    }
  }
  return {};
}

/// Defaults, then the config file (if any), then command-line flags, each overriding the last.
inline RunConfig resolve_config(const std::string& config_path,
                                const std::vector<std::pair<std::string, json>>& flags) {
  RunConfig c;
  if (!config_path.empty()) apply_config_file(c, config_path);
  for (const auto& [key, value] : flags) set_key(c, key, value);
  return c;
}

inline std::optional<QuenchMethod> parse_method(const std::string& name, double dt) {
  if (name == "exp") return QuenchMethod::exp();
  if (name == "trotter") return QuenchMethod::trotter(dt);
  if (name == "split") return QuenchMethod::split(dt);
  return std::nullopt;
}

inline void validate(const RunConfig& c, Command cmd) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  auto finite = [](double x) { return std::isfinite(x); };
  if (!(c.gL > 0.0) || !finite(c.gL)) fail("gL must be positive, got " + format_double(c.gL));
  if (!finite(c.theta)) fail("theta must be finite");
  for (double m : c.m_over_g)
    if (!(m >= 0.0) || !finite(m)) fail("m_over_g must be non-negative, got " + format_double(m));
  for (int n : c.n_q)
    if (n < 0 || n > 14) fail("n_q must be in 0..14, got " + std::to_string(n));
  for (double d : c.dt)
    if (!(d > 0.0) || !finite(d)) fail("dt must be positive, got " + format_double(d));
  if (!(c.t_max > 0.0) || !finite(c.t_max)) fail("t_max must be positive, got " + format_double(c.t_max));
  if (c.sample_dt && (!(*c.sample_dt > 0.0) || !finite(*c.sample_dt)))
    fail("sample_dt must be positive, got " + format_double(*c.sample_dt));
  if (c.e_max && (!(*c.e_max > 0.0) || !finite(*c.e_max))) fail("e_max must be positive, got " + format_double(*c.e_max));
  if (c.jobs < 1) fail("jobs must be at least 1");
  if (c.steps < 1) fail("steps must be at least 1");
  if (!parse_method(c.method, 1.0)) fail("method must be exp, trotter or split, got '" + c.method + "'");

  const bool single = cmd == Command::basis || cmd == Command::pauli || cmd == Command::circuit || cmd == Command::matrix;
  if (single && c.m_over_g.size() != 1) fail(to_string(cmd) + " takes a single m_over_g value");
  if (single && c.n_q.size() != 1) fail(to_string(cmd) + " takes a single n_q value");
  if (cmd == Command::circuit && c.dt.size() != 1) fail("circuit takes a single dt value");
  if (c.e_max && c.n_q.size() > 1 && cmd != Command::basis)
    fail("e_max replaces the n_q truncation; give one or the other");
  const bool needs_qubits = cmd == Command::quench || cmd == Command::pauli || cmd == Command::circuit;
  if (needs_qubits && !c.e_max)
    for (int n : c.n_q)
      if (n < 1) fail(to_string(cmd) + " needs n_q >= 1");
  if (cmd == Command::quench && c.sector == Sector::odd)
    fail("sector=odd has no vacuum to quench from; use sector even or both");
}

inline ModelParams params_for(const RunConfig& c, double m_over_g) {
  return ModelParams::from_ratios(m_over_g, c.gL, c.theta);
}

inline AssembleOptions assemble_options(const RunConfig& c, unsigned workers = 1) {
  AssembleOptions o;
  o.vertex.zero_mode_delta = c.zero_mode_delta;
  o.workers = workers;
  return o;
}

/// Basis for one grid point: 2^n_q states, or everything below e_max.
/// With power_of_two the e_max basis must have a qubit-compatible dimension.
inline TruncatedBasis point_basis(const RunConfig& c, const ModelParams& p, int n_q, Sector sector,
                                  bool power_of_two) {
  if (!c.e_max) return enumerate_for_qubits(p, n_q, sector);
  TruncatedBasis b = enumerate_basis(p, *c.e_max, sector);
  if (power_of_two) {
    const std::size_t d = b.size();
    if (d == 0 || (d & (d - 1)) != 0)
      throw ConfigError("e_max=" + format_double(*c.e_max) + " gives " + std::to_string(d) + " " + to_string(sector) +
                        " states, not a power of two");
  }
  return b;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; results keep index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, int jobs, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += workers) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Destination for a command's main output: the `out` path, or the given stream.
class Output {
public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
      return;
    }
    file_.open(path, std::ios::binary);
    if (!file_) throw ConfigError("cannot open output file '" + path + "'");
    os_ = &file_;
  }
  std::ostream& stream() { return *os_; }

private:
  std::ofstream file_;
  std::ostream* os_ = nullptr;
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  f << text;
}

inline int cmd_basis(const RunConfig& c, std::ostream& out, std::ostream& err) {
  validate(c, Command::basis);
  const ModelParams p = params_for(c, c.m_over_g.front());
  const TruncatedBasis b = point_basis(c, p, c.n_q.front(), c.sector, false);
  Output o(c.out, out);
  write_basis_dump(o.stream(), b);
  std::size_t even = 0;
  for (const auto& s : b.states()) even += s.parity() > 0;
  err << "states:";
  if (c.sector != Sector::odd) err << " even=" << even;
  if (c.sector != Sector::even) err << " odd=" << b.size() - even;
  if (c.sector == Sector::both) err << " total=" << b.size();
  err << '\n';
  for (const auto& w : b.warnings()) err << "warning: " << w << '\n';
  return 0;
}

inline int cmd_spectrum(const RunConfig& c, std::ostream& out, std::ostream&) {
  validate(c, Command::spectrum);
  struct Point {
    double m;
    int n_q;
  };
  std::vector<Point> grid;
  const std::vector<int> qubits = c.e_max ? std::vector<int>{0} : sorted_unique(c.n_q);
  for (double m : sorted_unique(c.m_over_g))
    for (int n : qubits) grid.push_back({m, n});
  const unsigned inner = grid.size() == 1 ? static_cast<unsigned>(c.jobs) : 1u;
  const auto masses = parallel_map<double>(grid.size(), c.jobs, [&](std::size_t i) {
    const ModelParams p = params_for(c, grid[i].m);
    const Truncation t = c.e_max ? Truncation{EnergyCutoff{*c.e_max}} : Truncation{QubitCount{grid[i].n_q}};
    return vector_mass(p, t, assemble_options(c, inner)) / p.g();
  });
  Output o(c.out, out);
  if (c.e_max) {
    o.stream() << "m_over_g,e_max,vector_mass_over_g\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      o.stream() << format_double(grid[i].m) << ',' << format_double(*c.e_max) << ',' << format_double(masses[i])
                 << '\n';
  } else {
    std::vector<VectorMassRow> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) rows.push_back({grid[i].m, grid[i].n_q, masses[i]});
    write_vector_mass_csv(o.stream(), rows);
  }
  return 0;
}

/// `out` with `_key<value>` suffixes inserted before the extension.
inline std::string suffixed_path(const std::string& path, const std::string& suffix) {
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

inline int cmd_quench(const RunConfig& c, std::ostream& out, std::ostream&) {
  validate(c, Command::quench);
  const bool stepped = c.method != "exp";
  struct Point {
    double m;
    int n_q;
    double dt;
  };
  std::vector<Point> grid;
  const std::vector<int> qubits = c.e_max ? std::vector<int>{0} : sorted_unique(c.n_q);
  const std::vector<double> steps = stepped ? sorted_unique(c.dt) : std::vector<double>{0.0};
  for (double m : sorted_unique(c.m_over_g))
    for (int n : qubits)
      for (double dt : steps) grid.push_back({m, n, dt});

  const unsigned inner = grid.size() == 1 ? static_cast<unsigned>(c.jobs) : 1u;
  const auto blocks = parallel_map<std::string>(grid.size(), c.jobs, [&](std::size_t i) {
    const Point& g = grid[i];
    const ModelParams p = params_for(c, g.m);
    const QuenchMethod method = *parse_method(c.method, g.dt);
    const double sample = c.sample_dt ? *c.sample_dt : (stepped ? g.dt : 0.1);
    QuenchOptions opt;
    opt.sector = c.sector;
    opt.assemble = assemble_options(c, inner);
    const TruncatedBasis basis = point_basis(c, p, g.n_q, c.sector, true);
    std::ostringstream os;
    write_quench_csv(os, quench_series(p, basis, c.t_max, sample, method, opt));
    return os.str();
  });

  if (grid.size() == 1 || c.out.empty() || c.out == "-") {
    Output o(c.out, out);
    for (const auto& b : blocks) o.stream() << b;
    return 0;
  }
  const bool many_m = sorted_unique(c.m_over_g).size() > 1;
  const bool many_q = qubits.size() > 1;
  const bool many_dt = steps.size() > 1;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::string suffix;
    if (many_m) suffix += "_m" + format_double(grid[i].m);
    if (many_q) suffix += "_nq" + std::to_string(grid[i].n_q);
    if (many_dt) suffix += "_dt" + format_double(grid[i].dt);
    write_file(suffixed_path(c.out, suffix), blocks[i]);
  }
  return 0;
}

inline std::vector<PauliTerm> config_terms(const RunConfig& c, const ModelParams& p, const TruncatedBasis& b) {
  return decompose(assemble(b, p, assemble_options(c, static_cast<unsigned>(c.jobs))));
}

inline int cmd_pauli(const RunConfig& c, std::ostream& out, std::ostream& err) {
  validate(c, Command::pauli);
  const ModelParams p = params_for(c, c.m_over_g.front());
  const auto terms = config_terms(c, p, point_basis(c, p, c.n_q.front(), c.sector, true));
  Output o(c.out, out);
  write_terms(o.stream(), terms);
  err << "terms: " << terms.size() << '\n';
  return 0;
}

inline int cmd_circuit(const RunConfig& c, std::ostream& out, std::ostream& err) {
  validate(c, Command::circuit);
  const ModelParams p = params_for(c, c.m_over_g.front());
  const TruncatedBasis b = point_basis(c, p, c.n_q.front(), c.sector, true);
  const auto terms = config_terms(c, p, b);
  const double dt = c.dt.front();
  const int n_q = qubit_count_for_dim(static_cast<Eigen::Index>(b.size()));
  const TrotterCircuit circuit = terms.empty() ? empty_circuit(n_q, dt, c.steps) : build_trotter_circuit(terms, dt, c.steps);
  Output o(c.out, out);
  o.stream() << emit_qasm(circuit);
  if (c.resources.empty())
    err << resource_json(circuit);
  else
    write_file(c.resources, resource_json(circuit));
  return 0;
}

inline int cmd_matrix(const RunConfig& c, std::ostream& out, std::ostream&) {
  validate(c, Command::matrix);
  const ModelParams p = params_for(c, c.m_over_g.front());
  const TruncatedBasis b = point_basis(c, p, c.n_q.front(), c.sector, false);
  Output o(c.out, out);
  write_matrix_dump(o.stream(), assemble(b, p, assemble_options(c, static_cast<unsigned>(c.jobs))), p);
  return 0;
}

inline int run_command(Command cmd, const RunConfig& c, std::ostream& out, std::ostream& err) {
  switch (cmd) {
    case Command::basis: return cmd_basis(c, out, err);
    case Command::spectrum: return cmd_spectrum(c, out, err);
    case Command::quench: return cmd_quench(c, out, err);
    case Command::pauli: return cmd_pauli(c, out, err);
    case Command::circuit: return cmd_circuit(c, out, err);
    case Command::matrix: return cmd_matrix(c, out, err);
  }
  return 1;
}

}  // namespace htqft::app
