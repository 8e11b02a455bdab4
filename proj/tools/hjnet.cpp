// Command-line front end: validate problem configs, tabulate critical
// constants, run solves with verification, extract minimal-action values and
// minimizing curves, and sample stationary solutions.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hjnet/config.hpp"
#include "hjnet/hjnet.hpp"

namespace {

using namespace hjnet;

int log_level() {
  const char* env = std::getenv("HJNET_LOG");
  if (!env) return 1;
  std::string v(env);
  if (v == "quiet" || v == "0") return 0;
  if (v == "debug" || v == "2") return 2;
  return 1;
}

void info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << msg << '\n';
}
void debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << msg << '\n';
}

struct CommonOpts {
  std::string config_path;
  std::string grid_override;  // "n_s,dt,T"
  int reach = 0;
  int threads = 0;
  double tol = 0;
};

struct Problem {
  ProblemConfig cfg;
  Network net;
  std::vector<ArcHamiltonian> hams;
  std::vector<double> c_arc;
  FluxLimiter fl;
};

Problem assemble(const CommonOpts& o) {
  Problem p{load_config(o.config_path), Network{}, {}, {}, {}};
  if (!o.grid_override.empty()) {
    std::istringstream gs(o.grid_override);
    char comma;
    if (!(gs >> p.cfg.grid.n_s >> comma >> p.cfg.grid.dt >> comma >> p.cfg.grid.T))
      fail(errc::parse_error, "--grid expects n_s,dt,T");
  }
  if (o.reach > 0) p.cfg.grid.reach = o.reach;
  if (o.threads > 0) p.cfg.grid.threads = o.threads;
  if (o.tol > 0) p.cfg.tol_scale = o.tol;
  p.net = make_network(p.cfg);
  p.hams = make_hamiltonians(p.cfg, p.net);
  for (auto& h : p.hams) p.c_arc.push_back(critical_constant(h));
  p.fl = make_flux_limiter(p.cfg, p.net, p.c_arc);
  return p;
}

NetworkPoint parse_point(const Network& net, const std::string& text) {
  size_t comma = text.find(',');
  require(comma != std::string::npos, errc::parse_error, "point must be arc,s: '" + text + "'");
  NetworkPoint pt;
  pt.arc = net.arc_index(text.substr(0, comma));
  pt.s = std::stod(text.substr(comma + 1));
  return pt;
}

int cmd_validate(const CommonOpts& o, bool echo) {
  Problem p = assemble(o);
  for (const auto& h : p.hams) {
    auto rep = check_assumptions(h);
    require(rep.pass, errc::precondition_violated,
            "Hamiltonian on arc '" + h.arc_id + "' fails assumptions: " + rep.detail);
    auto comp = check_compatibility(h, reversed(h));
    require(comp.pass, errc::precondition_violated,
            "reversal compatibility broken on arc '" + h.arc_id + "'");
  }
  std::vector<ArcLagrangian> lags;
  for (const auto& h : p.hams) lags.emplace_back(h);
  validate_flux_limiter(p.net, p.c_arc, lags, p.fl);
  if (!p.cfg.datum.empty()) {
    auto u0 = make_datum(p.cfg, p.net);
    // vertex consistency is enforced by the solver; probe it cheaply here
    GridSpec probe = p.cfg.grid;
    probe.n_s = std::min(probe.n_s, 9);
    probe.T = probe.dt;
    NetworkLagrangian NL(p.net, p.hams, p.fl, 33);
    lax_oleinik(NL, probe, u0);
  }
  if (echo) echo_config(std::cout, p.cfg);
  info("validate: OK (" + std::to_string(p.net.arcs().size()) + " arcs, " +
       std::to_string(p.net.vertices().size()) + " vertices, m=" + std::to_string(p.net.m()) + ")");
  return 0;
}

int cmd_limits(const CommonOpts& o) {
  Problem p = assemble(o);
  std::cout << std::setprecision(12);
  for (size_t a = 0; a < p.net.arcs().size(); ++a)
    std::cout << "arc " << p.net.arc(static_cast<int>(a)).id << " c_gamma " << p.c_arc[a] << '\n';
  for (size_t v = 0; v < p.net.vertices().size(); ++v) {
    double cap = std::numeric_limits<double>::infinity();
    for (int a : p.net.incident_arcs(static_cast<int>(v))) cap = std::min(cap, p.c_arc[a]);
    std::cout << "vertex " << p.net.vertex(static_cast<int>(v)).id << " cap " << cap << '\n';
  }
  return 0;
}

int cmd_solve(const CommonOpts& o) {
  Problem p = assemble(o);
  NetworkLagrangian NL(p.net, p.hams, p.fl);
  auto u0 = make_datum(p.cfg, p.net);
  debug("solving on n_s=" + std::to_string(p.cfg.grid.n_s) +
        " dt=" + std::to_string(p.cfg.grid.dt) + " T=" + std::to_string(p.cfg.grid.T));
  ValueGrid vg = lax_oleinik(NL, p.cfg.grid, u0);

  std::string sol_path = p.cfg.solution_path.empty() ? "solution.csv" : p.cfg.solution_path;
  {
    std::ofstream out(sol_path);
    require(static_cast<bool>(out), errc::io_error, "cannot write '" + sol_path + "'");
    export_table(out, vg);
  }
  info("solve: wrote " + sol_path);

  for (const auto& m : p.cfg.minimizers) {
    NetworkPoint pt{p.net.arc_index(m.arc), m.s};
    int layer = static_cast<int>(std::llround(m.t / vg.grid.dt));
    layer = std::clamp(layer, 1, vg.layers() - 1);
    NetworkCurve c = backtrack_minimizer(NL, vg, pt, layer);
    std::ofstream out(m.path);
    require(static_cast<bool>(out), errc::io_error, "cannot write '" + m.path + "'");
    write_curve(out, p.net, c);
    info("solve: wrote minimizer " + m.path);
  }

  VerificationReport rep = run_verification(NL, vg, p.cfg.tol_scale);
  if (!p.cfg.report_path.empty()) {
    std::ofstream out(p.cfg.report_path);
    require(static_cast<bool>(out), errc::io_error, "cannot write '" + p.cfg.report_path + "'");
    rep.write(out);
  }
  rep.write(std::cout);
  return rep.all_pass() ? 0 : 2;
}

int cmd_minimal_action(const CommonOpts& o, const std::string& from, double at,
                       const std::string& to, double horizon, bool oracle,
                       const std::string& curve_out) {
  Problem p = assemble(o);
  NetworkLagrangian NL(p.net, p.hams, p.fl);
  NetworkPoint x = parse_point(p.net, from), y = parse_point(p.net, to);
  auto r = minimal_action(NL, p.cfg.grid, x, at, y, horizon);
  std::cout << std::setprecision(12) << "S = " << r.value << '\n';
  if (!curve_out.empty()) {
    std::ofstream out(curve_out);
    require(static_cast<bool>(out), errc::io_error, "cannot write '" + curve_out + "'");
    write_curve(out, p.net, r.minimizer);
    info("minimal-action: wrote " + curve_out);
  }
  if (oracle) {
    auto bf = brute_force_minimal_action(NL, p.cfg.grid, x, y, horizon - at);
    std::cout << "oracle = " << bf.value << '\n'
              << "gap = " << bf.value - r.value << '\n';
  }
  return 0;
}

int cmd_stationary(const CommonOpts& o, const std::string& arc_id, double level,
                   const std::string& out_path) {
  Problem p = assemble(o);
  int a = p.net.arc_index(arc_id);
  auto sol = stationary_solution(p.hams[a], level, p.cfg.grid.n_s);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    require(static_cast<bool>(file), errc::io_error, "cannot write '" + out_path + "'");
    os = &file;
  }
  *os << "s,sigma,U\n" << std::setprecision(12);
  for (size_t i = 0; i < sol.s.size(); ++i)
    *os << sol.s[i] << ',' << sol.sigma[i] << ',' << sol.u[i] << '\n';
  info("stationary: residual max " + std::to_string(sol.residual_max));
  return 0;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case errc::parse_error:
    case errc::io_error:
      return 3;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamilton-Jacobi equations on embedded networks"};
  app.require_subcommand(1);

  CommonOpts common;
  bool echo = false, oracle = false;
  std::string from, to, arc_id, curve_out = "minimizer.curve", stat_out;
  double at = 0, horizon = 1, level = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", common.config_path, "problem configuration file")->required();
    sub->add_option("--grid", common.grid_override, "override grid as n_s,dt,T");
    sub->add_option("--reach", common.reach, "override per-step reach in nodes");
    sub->add_option("--threads", common.threads, "worker threads (default: hardware)");
    sub->add_option("--tol", common.tol, "verification tolerance scale");
  };

  CLI::App* validate = app.add_subcommand("validate", "parse and validate a problem");
  add_common(validate);
  validate->add_flag("--echo", echo, "emit the parsed problem in canonical form");

  CLI::App* limits = app.add_subcommand("limits", "critical constants and vertex caps");
  add_common(limits);

  CLI::App* solve = app.add_subcommand("solve", "run the solver and the verification suite");
  add_common(solve);

  CLI::App* ma = app.add_subcommand("minimal-action", "minimal action between two points");
  add_common(ma);
  ma->add_option("--from", from, "start point as arc,s")->required();
  ma->add_option("--at", at, "start time");
  ma->add_option("--to", to, "end point as arc,s")->required();
  ma->add_option("--horizon", horizon, "end time")->required();
  ma->add_flag("--oracle", oracle, "also run the exhaustive oracle");
  ma->add_option("--out", curve_out, "minimizer curve output path");

  CLI::App* stat = app.add_subcommand("stationary", "sample a stationary solution");
  add_common(stat);
  stat->add_option("--arc", arc_id, "arc id")->required();
  stat->add_option("--level", level, "equation level a")->required();
  stat->add_option("--out", stat_out, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (common.threads == 0)
    common.threads = static_cast<int>(std::thread::hardware_concurrency());

  try {
    if (app.got_subcommand(validate)) return cmd_validate(common, echo);
    if (app.got_subcommand(limits)) return cmd_limits(common);
    if (app.got_subcommand(solve)) return cmd_solve(common);
    if (app.got_subcommand(ma))
      return cmd_minimal_action(common, from, at, to, horizon, oracle, curve_out);
    if (app.got_subcommand(stat)) return cmd_stationary(common, arc_id, level, stat_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
