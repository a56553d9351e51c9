#include "nlsn/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "nlsn/error.hpp"
#include "nlsn/oracle.hpp"

namespace nlsn::cli {

using Json = nlohmann::ordered_json;

namespace {

// Defaults are stored as text and run through the same parser as user input.
// "auto" means the command picks the value.
constexpr DefaultEntry kDefaults[] = {
    {"command", "solve", "oracle | solve | sweep | threshold | check"},
    {"N", "3", "spatial dimension (1..4 for oracle, 2..4 otherwise)"},
    {"p", "4", "exponent of the u nonlinearity; 2* is the Sobolev exponent"},
    {"q", "4", "exponent of the v nonlinearity; 2* is the Sobolev exponent"},
    {"mu1", "1", "coefficient of the u nonlinearity"},
    {"mu2", "1", "coefficient of the v nonlinearity"},
    {"beta", "1", "linear coupling"},
    {"a", "1", "mass of u"},
    {"b", "1", "mass of v"},
    {"r_max", "auto", "truncation radius: 28 for oracle, 16 natural lengths for the solver"},
    {"n_nodes", "auto", "grid nodes: 28001 for oracle, 20001 for the solver"},
    {"oracle_tol", "1e-7", "sup-scaled residual target of the shooting oracle"},
    {"max_iter", "50000", "descent iteration budget"},
    {"step0", "0.5", "initial descent step"},
    {"backtrack_factor", "0.5", "step reduction on rejection, in (0, 1)"},
    {"tol_grad", "1e-6", "bound on the relative constrained gradient"},
    {"tol_pde", "1e-6", "bound on the sup-scaled PDE residual"},
    {"tol_pohozaev", "1e-8", "bound on the scaled Pohozaev residual"},
    {"collapse_threshold", "1e-10", "L^p power below which a component counts as vanished"},
    {"seed", "0", "seed of the initial state"},
    {"axis", "none", "sweep axis: a | b | beta | mu1 | mu2 | p | q"},
    {"values", "", "comma separated sweep values"},
    {"m_estimate", "none", "energy used by threshold instead of the closed-form bound"},
    {"format", "auto", "json | csv (csv only for sweep, its default)"},
    {"path", "", "output file; empty writes to standard output"},
    {"timing", "false", "record wall times in sweep output"},
};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

struct Entry {
  std::string value;
  int line = 0;  // 0 for defaults
};

std::string where(const Entry& e) {
  return e.line > 0 ? "line " + std::to_string(e.line) + ": " : "default: ";
}

double parse_real(const std::string& key, const Entry& e) {
  double x = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last || !std::isfinite(x)) {
    config_error(where(e) + key + " expects a finite number, got '" + e.value + "'");
  }
  return x;
}

double parse_exponent(const std::string& key, const Entry& e, int N) {
  if (e.value == "2*") {
    if (N < 3) config_error(where(e) + key + " = 2* needs N >= 3");
    return critical_exponent(N);
  }
  return parse_real(key, e);
}

template <class Int>
Int parse_integer(const std::string& key, const Entry& e) {
  Int x{};
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last) {
    config_error(where(e) + key + " expects an integer, got '" + e.value + "'");
  }
  return x;
}

bool parse_bool(const std::string& key, const Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  config_error(where(e) + key + " expects true or false, got '" + e.value + "'");
}

Command parse_command(const Entry& e) {
  for (Command c : {Command::Oracle, Command::Solve, Command::Sweep, Command::Threshold,
                    Command::Check}) {
    if (e.value == to_string(c)) return c;
  }
  config_error(where(e) + "unknown command '" + e.value + "'");
}

void validate_oracle(const RunConfig& c) {
  const int N = c.problem.N;
  if (N < 1 || N > 4) config_error("invalid problem: N must be 1, 2, 3 or 4 for the oracle");
  if (!(c.problem.p > 2.0) || !(c.problem.p < critical_exponent(N))) {
    config_error("invalid problem: the oracle needs 2 < p < 2N/(N-2) (subcritical)");
  }
  if (!(c.oracle_tol > 0.0)) config_error("invalid oracle_tol: must be positive");
}

void validate_problem(const Params& p) {
  try {
    p.validate();
  } catch (const Error& e) {
    config_error(std::string("invalid problem: ") + e.what());
  }
}

}  // namespace

std::string_view to_string(Command command) noexcept {
  switch (command) {
    case Command::Oracle: return "oracle";
    case Command::Solve: return "solve";
    case Command::Sweep: return "sweep";
    case Command::Threshold: return "threshold";
    case Command::Check: return "check";
  }
  return "?";
}

std::span<const DefaultEntry> defaults() { return kDefaults; }

std::string defaults_table() {
  std::ostringstream os;
  for (const DefaultEntry& d : kDefaults) {
    std::string value = d.value.empty() ? "(empty)" : std::string(d.value);
    os << d.key << std::string(20 - d.key.size(), ' ') << value
       << std::string(value.size() < 10 ? 10 - value.size() : 1, ' ') << d.meaning << '\n';
  }
  return os.str();
}

RunConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  for (const DefaultEntry& d : kDefaults) entries[std::string(d.key)] = {std::string(d.value), 0};

  std::map<std::string, int> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      config_error("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_error("line " + std::to_string(line_no) + ": missing key");
    if (!entries.contains(key)) {
      config_error("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (const auto it = seen.find(key); it != seen.end()) {
      config_error("line " + std::to_string(line_no) + ": duplicate key '" + key +
                   "' (first set on line " + std::to_string(it->second) + ")");
    }
    seen[key] = line_no;
    entries[key] = {value, line_no};
  }

  const auto get = [&](const char* key) -> const Entry& { return entries.at(key); };
  RunConfig c;
  c.command = parse_command(get("command"));
  c.problem.N = parse_integer<int>("N", get("N"));
  c.problem.p = parse_exponent("p", get("p"), c.problem.N);
  c.problem.q = parse_exponent("q", get("q"), c.problem.N);
  c.problem.mu1 = parse_real("mu1", get("mu1"));
  c.problem.mu2 = parse_real("mu2", get("mu2"));
  c.problem.beta = parse_real("beta", get("beta"));
  c.problem.a = parse_real("a", get("a"));
  c.problem.b = parse_real("b", get("b"));
  if (get("r_max").value != "auto") {
    c.r_max = parse_real("r_max", get("r_max"));
    if (!(*c.r_max > 0.0)) config_error(where(get("r_max")) + "r_max must be positive");
  }
  if (get("n_nodes").value != "auto") {
    c.n_nodes = parse_integer<std::size_t>("n_nodes", get("n_nodes"));
    if (*c.n_nodes < 16) config_error(where(get("n_nodes")) + "n_nodes must be at least 16");
  }
  c.oracle_tol = parse_real("oracle_tol", get("oracle_tol"));
  c.solver.max_iter = parse_integer<int>("max_iter", get("max_iter"));
  c.solver.step0 = parse_real("step0", get("step0"));
  c.solver.backtrack_factor = parse_real("backtrack_factor", get("backtrack_factor"));
  c.solver.tol_grad = parse_real("tol_grad", get("tol_grad"));
  c.solver.tol_pde = parse_real("tol_pde", get("tol_pde"));
  c.solver.tol_pohozaev = parse_real("tol_pohozaev", get("tol_pohozaev"));
  c.solver.collapse_threshold = parse_real("collapse_threshold", get("collapse_threshold"));
  c.seed = parse_integer<std::uint64_t>("seed", get("seed"));
  c.solver.seed = c.seed;
  try {
    c.solver.validate();
  } catch (const Error& e) {
    config_error(std::string("invalid solver options: ") + e.what());
  }
  if (c.solver.max_iter < 1) config_error("invalid solver options: max_iter must be positive");

  if (get("axis").value != "none") {
    try {
      c.axis = parse_axis(get("axis").value);
    } catch (const Error& e) {
      config_error(where(get("axis")) + e.what());
    }
  }
  {
    const Entry& e = get("values");
    std::string_view rest = e.value;
    while (!trim(rest).empty()) {
      const auto comma = rest.find(',');
      const Entry item{trim(rest.substr(0, comma)), e.line};
      const bool exponent_axis = c.axis == SweepAxis::P || c.axis == SweepAxis::Q;
      c.values.push_back(exponent_axis ? parse_exponent("values", item, c.problem.N)
                                       : parse_real("values", item));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  if (get("m_estimate").value != "none") c.m_estimate = parse_real("m_estimate", get("m_estimate"));
  c.path = get("path").value;
  c.timing = parse_bool("timing", get("timing"));

  const std::string& format = get("format").value;
  if (format == "auto") {
    c.format = c.command == Command::Sweep ? OutputFormat::Csv : OutputFormat::Json;
  } else if (format == "json") {
    c.format = OutputFormat::Json;
  } else if (format == "csv") {
    c.format = OutputFormat::Csv;
    if (c.command != Command::Sweep) config_error(where(get("format")) + "csv output is only available for sweep");
  } else {
    config_error(where(get("format")) + "format must be json or csv");
  }

  switch (c.command) {
    case Command::Oracle:
      validate_oracle(c);
      break;
    case Command::Solve:
      validate_problem(c.problem);
      if (c.problem.beta < 0.0) {
        config_error("invalid problem: beta must be nonnegative for a positive ground state");
      }
      break;
    case Command::Sweep:
      validate_problem(c.problem);
      if (!c.axis) config_error("sweep needs an axis");
      for (double v : c.values) {
        try {
          with_axis_value(c.problem, *c.axis, v).validate();
        } catch (const Error& e) {
          config_error("invalid sweep value " + format_double(v) + ": " + e.what());
        }
      }
      break;
    case Command::Threshold:
      validate_problem(c.problem);
      if ((c.problem.N != 3 && c.problem.N != 4) || !c.problem.is_q_critical() ||
          c.problem.is_p_critical()) {
        config_error("invalid problem: threshold needs N = 3 or 4, q = 2* and p < 2*");
      }
      break;
    case Command::Check:
      validate_problem(c.problem);
      if (!c.problem.is_p_critical() || !c.problem.is_q_critical()) {
        config_error("invalid problem: check needs p = q = 2* (N = 3 or 4)");
      }
      if (c.problem.beta < 0.0) config_error("invalid problem: beta must be nonnegative");
      break;
  }
  return c;
}

namespace {

Json params_json(const Params& p) {
  return Json{{"N", p.N},     {"p", p.p},       {"q", p.q}, {"mu1", p.mu1},
              {"mu2", p.mu2}, {"beta", p.beta}, {"a", p.a}, {"b", p.b}};
}

GridSpec solver_spec(const RunConfig& c) {
  GridSpec spec;
  if (c.r_max) spec.r_max = *c.r_max;
  if (c.n_nodes) spec.n_nodes = *c.n_nodes;
  return spec;
}

Json identity_json(const IdentityCheck& id) {
  return Json{{"contradiction", id.contradiction},
              {"verdict", std::string(to_string(id.verdict))},
              {"lhs", id.lhs},
              {"rhs", id.rhs},
              {"tol", id.tol}};
}

Json threshold_json(const ThresholdReport& t) {
  return Json{{"lhs", t.lhs},
              {"rhs", t.rhs},
              {"margin", t.margin},
              {"sufficient_condition_holds", t.sufficient_condition_holds},
              {"used_closed_form", t.used_closed_form}};
}

Json record_json(const SweepRecord& r) {
  Json j{{"axis", std::string(to_string(r.axis))},
         {"value", r.value},
         {"params", params_json(r.params)},
         {"energy", r.energy},
         {"lambda1", r.lambda1},
         {"lambda2", r.lambda2},
         {"status", std::string(r.status_label())},
         {"pohozaev_residual", r.pohozaev_residual},
         {"pde_residual", r.pde_residual},
         {"iterations", r.iterations},
         {"wall_time", r.wall_time}};
  if (r.threshold) j["threshold"] = threshold_json(*r.threshold);
  if (r.identity) j["identity"] = identity_json(*r.identity);
  if (r.failed()) j["failure"] = r.failure;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

RunOutcome run_oracle(const RunConfig& c) {
  ShootOptions opts;
  if (c.r_max) opts.grid.r_max = *c.r_max;
  if (c.n_nodes) opts.grid.n_nodes = *c.n_nodes;
  const GroundProfile g = shoot_ground(c.problem.N, c.problem.p, c.oracle_tol, opts);
  const double gamma = gamma_exponent(c.problem.p, c.problem.N);
  const double lp_norm = std::pow(g.lp_power, 1.0 / c.problem.p);
  const double gn = lp_norm / (std::pow(g.kinetic, 0.5 * gamma) *
                               std::pow(g.l2_mass, 0.5 * (1.0 - gamma)));
  const Json j{{"N", g.N},
               {"p", g.p},
               {"w0", g.w[0]},
               {"l2_mass", g.l2_mass},
               {"kinetic", g.kinetic},
               {"lp_norm", lp_norm},
               {"gn_constant", gn},
               {"residual", g.residual}};
  return {kExitSuccess, dump(j), {}};
}

RunOutcome run_solve(const RunConfig& c) {
  const GridSpec spec = solver_spec(c);
  const GridPtr grid = solver_grid(c.problem, spec);
  const SolveResult r = descend(c.problem, grid, c.solver);
  const Residuals res = residuals(c.problem, r.state, r.lambda1, r.lambda2);
  const Json j{{"status", std::string(to_string(r.status))},
               {"energy", r.energy},
               {"lambda1", r.lambda1},
               {"lambda2", r.lambda2},
               {"pohozaev_residual", r.pohozaev_residual},
               {"pde_residual", r.pde_residual},
               {"grad_norm", r.grad_norm},
               {"iterations", r.iterations},
               {"total_dilation", r.total_dilation},
               {"params", params_json(c.problem)},
               {"grid", Json{{"r_max", grid->r_max()}, {"n_nodes", grid->size()}}},
               {"residuals", Json{{"pde_u", res.pde_u},
                                  {"pde_v", res.pde_v},
                                  {"pohozaev", res.pohozaev},
                                  {"mass_error_u", res.mass_error_u},
                                  {"mass_error_v", res.mass_error_v},
                                  {"nehari_gap", res.nehari_gap}}},
               {"seed", c.seed}};
  const bool ok = r.status == SolveStatus::Converged;
  return {ok ? kExitSuccess : kExitNotConverged, dump(j),
          ok ? std::string() : "solver did not converge: " + std::string(to_string(r.status))};
}

RunOutcome run_sweep(const RunConfig& c, unsigned jobs) {
  SweepOptions opts;
  opts.solver = c.solver;
  opts.grid = solver_spec(c);
  opts.jobs = jobs;
  opts.record_wall_time = c.timing;
  const std::vector<SweepRecord> records = sweep(c.problem, *c.axis, c.values, opts);
  if (c.format == OutputFormat::Csv) {
    std::ostringstream os;
    write_sweep_csv(os, records);
    return {kExitSuccess, os.str(), {}};
  }
  Json list = Json::array();
  for (const SweepRecord& r : records) list.push_back(record_json(r));
  return {kExitSuccess, dump(Json{{"axis", std::string(to_string(*c.axis))}, {"records", list}}),
          {}};
}

RunOutcome run_threshold(const RunConfig& c) {
  const ThresholdReport t = threshold_critical(c.problem, c.m_estimate);
  Json j = threshold_json(t);
  j["params"] = params_json(c.problem);
  return {kExitSuccess, dump(j), {}};
}

RunOutcome run_check(const RunConfig& c) {
  const GridPtr grid = solver_grid(c.problem, solver_spec(c));
  const SolveResult r = descend(c.problem, grid, c.solver);
  const IdentityCheck id = check_nonexistence_identity(r, c.problem);
  const bool converged = r.status == SolveStatus::Converged;
  const Json j{{"status", std::string(to_string(r.status))},
               {"energy", r.energy},
               {"lambda1", r.lambda1},
               {"lambda2", r.lambda2},
               {"pde_residual", r.pde_residual},
               {"pohozaev_residual", r.pohozaev_residual},
               {"iterations", r.iterations},
               {"params", params_json(c.problem)},
               {"identity", identity_json(id)},
               {"nonexistence_confirmed", !converged}};
  if (converged) {
    return {kExitError, dump(j), "critical run converged, which contradicts nonexistence"};
  }
  return {kExitNonexistence, dump(j),
          "no ground state: " + std::string(to_string(r.status)) + ", identity verdict " +
              std::string(to_string(id.verdict))};
}

}  // namespace

RunOutcome execute(const RunConfig& config, unsigned jobs) {
  switch (config.command) {
    case Command::Oracle: return run_oracle(config);
    case Command::Solve: return run_solve(config);
    case Command::Sweep: return run_sweep(config, jobs);
    case Command::Threshold: return run_threshold(config);
    case Command::Check: return run_check(config);
  }
  throw Error(ErrorKind::Misuse, "unknown command");
}

int run(const RunConfig& config, unsigned jobs) {
  RunOutcome outcome;
  try {
    outcome = execute(config, jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  if (config.path.empty()) {
    std::cout << outcome.artifact << std::flush;
  } else {
    std::ofstream out(config.path, std::ios::binary | std::ios::trunc);
    out << outcome.artifact;
    out.close();
    if (!out) {
      std::cerr << "error: cannot write " << config.path << '\n';
      return kExitError;
    }
  }
  if (!outcome.message.empty()) std::cerr << outcome.message << '\n';
  return outcome.exit_code;
}

}  // namespace nlsn::cli
