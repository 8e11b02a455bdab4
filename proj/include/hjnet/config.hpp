#pragma once

// Problem configuration: a single human-editable text file with key-value
// sections describing the network, per-arc Hamiltonians, flux limiters,
// initial datum, grid, and output targets.
//
//   [vertices]            id x y [z ...]
//   [arcs]                id tail head x0 y0 x1 y1 ...
//   [hamiltonians]        <arc id|default> power{p=..., a=..., f=...} | table{...}
//   [flux_limiters]       <vertex id|default> <number|max>
//   [initial_datum]       <arc id|default> <expression in s>
//   [grid]                n_s/dt/T/reach/sub/max_speed/threads/tol <value>
//   [outputs]             solution <path> | report <path> |
//                         minimizer <arc,s> <t> <path>
//
// `max` resolves the limiter to the largest admissible value at that vertex,
// min over incident arcs of c_gamma. Lines starting with # are comments.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hjnet/action.hpp"
#include "hjnet/errors.hpp"
#include "hjnet/expr.hpp"
#include "hjnet/hamiltonian.hpp"
#include "hjnet/network.hpp"
#include "hjnet/solver.hpp"

namespace hjnet {

struct MinimizerRequest {
  std::string arc;
  double s = 0;
  double t = 0;
  std::string path;
};

struct ProblemConfig {
  std::vector<VertexSpec> vertices;
  std::vector<ArcSpec> arcs;
  std::map<std::string, std::string> hamiltonians;  // arc id or "default" -> spec
  std::map<std::string, std::string> limiters;      // vertex id or "default" -> number | "max"
  std::map<std::string, std::string> datum;         // arc id or "default" -> expression
  GridSpec grid;
  double tol_scale = 1.0;
  std::string solution_path;
  std::string report_path;
  std::vector<MinimizerRequest> minimizers;
};

namespace detail {

[[noreturn]] inline void cfg_fail(int line, const std::string& msg) {
  fail(errc::parse_error, "line " + std::to_string(line) + ": " + msg);
}

inline double to_number(const std::string& tok, int line) {
  try {
    size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    cfg_fail(line, "expected a number, got '" + tok + "'");
  }
}

// Splits "key=value, key=value, ..." with parenthesis-aware commas.
inline std::vector<std::pair<std::string, std::string>> split_fields(const std::string& body,
                                                                     int line) {
  std::vector<std::pair<std::string, std::string>> out;
  int depth = 0;
  std::string cur;
  auto flush = [&]() {
    size_t eq = cur.find('=');
    if (eq == std::string::npos) {
      if (cur.find_first_not_of(" \t") != std::string::npos)
        cfg_fail(line, "expected key=value in '" + cur + "'");
      return;
    }
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t");
      size_t e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    out.emplace_back(trim(cur.substr(0, eq)), trim(cur.substr(eq + 1)));
  };
  for (char c : body) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      flush();
      cur.clear();
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

}  // namespace detail

// Builds an ArcHamiltonian from a spec string like
// `power{p=2, a=1, f=cos(2*pi*s)}` or
// `table{s_count=1, mu_count=5, mu_min=-2, mu_max=2, values=1 0.3 0 0.3 1}`.
inline ArcHamiltonian parse_hamiltonian_spec(const std::string& text, const std::string& arc_id,
                                             int line = 0) {
  size_t brace = text.find('{');
  if (brace == std::string::npos || text.back() != '}')
    detail::cfg_fail(line, "Hamiltonian spec must be name{...}: '" + text + "'");
  std::string name = text.substr(0, brace);
  std::string body = text.substr(brace + 1, text.size() - brace - 2);
  auto fields = detail::split_fields(body, line);
  if (name == "power") {
    double p = 2;
    Expr a = Expr::parse("1"), f = Expr::parse("0");
    for (auto& [k, v] : fields) {
      if (k == "p")
        p = detail::to_number(v, line);
      else if (k == "a")
        a = Expr::parse(v);
      else if (k == "f")
        f = Expr::parse(v);
      else
        detail::cfg_fail(line, "unknown power field '" + k + "'");
    }
    return power_hamiltonian(p, a, f, arc_id);
  }
  if (name == "table") {
    int s_count = 1, mu_count = 0;
    double mu_min = 0, mu_max = 0;
    std::vector<double> values;
    for (auto& [k, v] : fields) {
      if (k == "s_count")
        s_count = static_cast<int>(detail::to_number(v, line));
      else if (k == "mu_count")
        mu_count = static_cast<int>(detail::to_number(v, line));
      else if (k == "mu_min")
        mu_min = detail::to_number(v, line);
      else if (k == "mu_max")
        mu_max = detail::to_number(v, line);
      else if (k == "values") {
        std::istringstream vs(v);
        double x;
        while (vs >> x) values.push_back(x);
      } else {
        detail::cfg_fail(line, "unknown table field '" + k + "'");
      }
    }
    return table_hamiltonian(s_count, mu_count, mu_min, mu_max, std::move(values), arc_id);
  }
  detail::cfg_fail(line, "unknown Hamiltonian family '" + name + "'");
}

inline ProblemConfig parse_config(std::istream& in) {
  ProblemConfig cfg;
  std::string line, section;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first.front() == '[') {
      if (first.back() != ']') detail::cfg_fail(ln, "malformed section header");
      section = first.substr(1, first.size() - 2);
      continue;
    }
    if (section == "vertices") {
      Vec pos;
      double x;
      while (ls >> x) pos.push_back(x);
      if (pos.size() < 1) detail::cfg_fail(ln, "vertex needs coordinates");
      cfg.vertices.push_back({first, pos});
    } else if (section == "arcs") {
      ArcSpec a;
      a.id = first;
      if (!(ls >> a.tail >> a.head)) detail::cfg_fail(ln, "arc needs tail and head ids");
      std::vector<double> flat;
      double x;
      while (ls >> x) flat.push_back(x);
      if (cfg.vertices.empty()) detail::cfg_fail(ln, "arcs must come after vertices");
      size_t dim = cfg.vertices[0].position.size();
      if (flat.size() < 2 * dim || flat.size() % dim != 0)
        detail::cfg_fail(ln, "arc polyline must list points of dimension " + std::to_string(dim));
      for (size_t i = 0; i < flat.size(); i += dim)
        a.polyline.push_back(Vec(flat.begin() + i, flat.begin() + i + dim));
      cfg.arcs.push_back(std::move(a));
    } else if (section == "hamiltonians") {
      std::string rest;
      std::getline(ls, rest);
      size_t b = rest.find_first_not_of(" \t");
      if (b == std::string::npos) detail::cfg_fail(ln, "missing Hamiltonian spec");
      rest = rest.substr(b);
      size_t e = rest.find_last_not_of(" \t");
      rest = rest.substr(0, e + 1);
      parse_hamiltonian_spec(rest, first, ln);  // validate eagerly
      cfg.hamiltonians[first] = rest;
    } else if (section == "flux_limiters") {
      std::string val;
      if (!(ls >> val)) detail::cfg_fail(ln, "missing limiter value");
      if (val != "max") detail::to_number(val, ln);
      cfg.limiters[first] = val;
    } else if (section == "initial_datum") {
      std::string rest;
      std::getline(ls, rest);
      size_t b = rest.find_first_not_of(" \t");
      if (b == std::string::npos) detail::cfg_fail(ln, "missing datum expression");
      rest = rest.substr(b);
      size_t e = rest.find_last_not_of(" \t");
      rest = rest.substr(0, e + 1);
      Expr::parse(rest);  // validate eagerly
      cfg.datum[first] = rest;
    } else if (section == "grid") {
      std::string val;
      if (!(ls >> val)) detail::cfg_fail(ln, "missing grid value");
      if (first == "n_s")
        cfg.grid.n_s = static_cast<int>(detail::to_number(val, ln));
      else if (first == "dt")
        cfg.grid.dt = detail::to_number(val, ln);
      else if (first == "T")
        cfg.grid.T = detail::to_number(val, ln);
      else if (first == "reach")
        cfg.grid.reach = static_cast<int>(detail::to_number(val, ln));
      else if (first == "sub")
        cfg.grid.sub = static_cast<int>(detail::to_number(val, ln));
      else if (first == "max_speed")
        cfg.grid.max_speed = detail::to_number(val, ln);
      else if (first == "threads")
        cfg.grid.threads = static_cast<int>(detail::to_number(val, ln));
      else if (first == "tol")
        cfg.tol_scale = detail::to_number(val, ln);
      else
        detail::cfg_fail(ln, "unknown grid key '" + first + "'");
    } else if (section == "outputs") {
      if (first == "solution") {
        if (!(ls >> cfg.solution_path)) detail::cfg_fail(ln, "solution needs a path");
      } else if (first == "report") {
        if (!(ls >> cfg.report_path)) detail::cfg_fail(ln, "report needs a path");
      } else if (first == "minimizer") {
        MinimizerRequest m;
        std::string pt;
        if (!(ls >> pt >> m.t >> m.path)) detail::cfg_fail(ln, "minimizer needs arc,s t path");
        size_t comma = pt.find(',');
        if (comma == std::string::npos) detail::cfg_fail(ln, "minimizer point must be arc,s");
        m.arc = pt.substr(0, comma);
        m.s = detail::to_number(pt.substr(comma + 1), ln);
        cfg.minimizers.push_back(std::move(m));
      } else {
        detail::cfg_fail(ln, "unknown output key '" + first + "'");
      }
    } else if (section.empty()) {
      detail::cfg_fail(ln, "data before any section header");
    } else {
      detail::cfg_fail(ln, "unknown section '" + section + "'");
    }
  }
  require(!cfg.vertices.empty(), errc::parse_error, "config has no vertices");
  require(!cfg.arcs.empty(), errc::parse_error, "config has no arcs");
  return cfg;
}

inline ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), errc::io_error, "cannot open '" + path + "'");
  try {
    return parse_config(in);
  } catch (const Error& e) {
    if (e.code() == errc::parse_error)
      fail(errc::parse_error, path + ": " + std::string(e.what()).substr(12));
    throw;
  }
}

// Canonical re-emission; parsing the output reproduces the config field for
// field.
inline void echo_config(std::ostream& os, const ProblemConfig& cfg) {
  os << std::setprecision(17);
  os << "[vertices]\n";
  for (const auto& v : cfg.vertices) {
    os << v.id;
    for (double x : v.position) os << ' ' << x;
    os << '\n';
  }
  os << "\n[arcs]\n";
  for (const auto& a : cfg.arcs) {
    os << a.id << ' ' << a.tail << ' ' << a.head;
    for (const auto& p : a.polyline)
      for (double x : p) os << ' ' << x;
    os << '\n';
  }
  os << "\n[hamiltonians]\n";
  for (const auto& [k, v] : cfg.hamiltonians) os << k << ' ' << v << '\n';
  os << "\n[flux_limiters]\n";
  for (const auto& [k, v] : cfg.limiters) os << k << ' ' << v << '\n';
  os << "\n[initial_datum]\n";
  for (const auto& [k, v] : cfg.datum) os << k << ' ' << v << '\n';
  os << "\n[grid]\n";
  os << "n_s " << cfg.grid.n_s << "\ndt " << cfg.grid.dt << "\nT " << cfg.grid.T << "\nreach "
     << cfg.grid.reach << "\nsub " << cfg.grid.sub;
  if (cfg.grid.max_speed > 0) os << "\nmax_speed " << cfg.grid.max_speed;
  if (cfg.grid.threads != 1) os << "\nthreads " << cfg.grid.threads;
  if (cfg.tol_scale != 1.0) os << "\ntol " << cfg.tol_scale;
  os << '\n';
  if (!cfg.solution_path.empty() || !cfg.report_path.empty() || !cfg.minimizers.empty()) {
    os << "\n[outputs]\n";
    if (!cfg.solution_path.empty()) os << "solution " << cfg.solution_path << '\n';
    if (!cfg.report_path.empty()) os << "report " << cfg.report_path << '\n';
    for (const auto& m : cfg.minimizers)
      os << "minimizer " << m.arc << ',' << m.s << ' ' << m.t << ' ' << m.path << '\n';
  }
}

inline bool same_problem(const ProblemConfig& a, const ProblemConfig& b) {
  if (a.vertices.size() != b.vertices.size() || a.arcs.size() != b.arcs.size()) return false;
  for (size_t i = 0; i < a.vertices.size(); ++i)
    if (a.vertices[i].id != b.vertices[i].id || a.vertices[i].position != b.vertices[i].position)
      return false;
  for (size_t i = 0; i < a.arcs.size(); ++i) {
    const auto& x = a.arcs[i];
    const auto& y = b.arcs[i];
    if (x.id != y.id || x.tail != y.tail || x.head != y.head || x.polyline != y.polyline)
      return false;
  }
  return a.hamiltonians == b.hamiltonians && a.limiters == b.limiters && a.datum == b.datum &&
         a.grid.n_s == b.grid.n_s && a.grid.dt == b.grid.dt && a.grid.T == b.grid.T &&
         a.grid.reach == b.grid.reach && a.grid.sub == b.grid.sub &&
         a.grid.max_speed == b.grid.max_speed && a.tol_scale == b.tol_scale &&
         a.solution_path == b.solution_path && a.report_path == b.report_path;
}

// --- problem assembly --------------------------------------------------------

inline Network make_network(const ProblemConfig& cfg) {
  return build_network(cfg.vertices, cfg.arcs);
}

inline std::string lookup_with_default(const std::map<std::string, std::string>& m,
                                       const std::string& key, const std::string& what) {
  auto it = m.find(key);
  if (it != m.end()) return it->second;
  it = m.find("default");
  require(it != m.end(), errc::parse_error, "no " + what + " for '" + key + "' and no default");
  return it->second;
}

inline std::vector<ArcHamiltonian> make_hamiltonians(const ProblemConfig& cfg,
                                                     const Network& net) {
  std::vector<ArcHamiltonian> out;
  for (const auto& arc : net.arcs())
    out.push_back(
        parse_hamiltonian_spec(lookup_with_default(cfg.hamiltonians, arc.id, "Hamiltonian"),
                               arc.id));
  return out;
}

inline FluxLimiter make_flux_limiter(const ProblemConfig& cfg, const Network& net,
                                     const std::vector<double>& c_arc) {
  FluxLimiter fl;
  fl.c.resize(net.vertices().size());
  for (size_t v = 0; v < net.vertices().size(); ++v) {
    std::string spec = lookup_with_default(cfg.limiters, net.vertex(static_cast<int>(v)).id,
                                           "flux limiter");
    if (spec == "max") {
      double cap = std::numeric_limits<double>::infinity();
      for (int a : net.incident_arcs(static_cast<int>(v))) cap = std::min(cap, c_arc[a]);
      fl.c[v] = cap;
    } else {
      fl.c[v] = detail::to_number(spec, 0);
    }
  }
  return fl;
}

inline std::vector<std::function<double(double)>> make_datum(const ProblemConfig& cfg,
                                                             const Network& net) {
  std::vector<std::function<double(double)>> out;
  for (const auto& arc : net.arcs()) {
    Expr e = Expr::parse(lookup_with_default(cfg.datum, arc.id, "initial datum"));
    out.push_back([e](double s) { return e(s); });
  }
  return out;
}

}  // namespace hjnet
