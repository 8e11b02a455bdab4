#pragma once

// Numerical verification that a computed value grid behaves like the unique
// solution: interior residuals of U_t + H(s, U') = 0, the flux-limiter
// inequalities at vertices, and cross-grid comparison. The continuum
// viscosity conditions quantify over test functions; every check here
// substitutes difference-quotient surrogates at grid scale, as stated in the
// report header.

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hjnet/action.hpp"
#include "hjnet/solver.hpp"

namespace hjnet {

struct CheckResult {
  std::string name;
  double worst = 0;      // positive means a violation by that much
  std::string location;  // where the worst value was seen
  bool pass = true;
  std::string note;
};

struct VerificationReport {
  std::string header;
  std::vector<CheckResult> checks;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  void write(std::ostream& os) const {
    os << header << '\n';
    for (const auto& c : checks)
      os << c.name << "  worst=" << c.worst << "  at=" << (c.location.empty() ? "-" : c.location)
         << "  " << (c.pass ? "PASS" : "FAIL") << (c.note.empty() ? "" : "  (" + c.note + ")")
         << '\n';
  }
  std::string text() const {
    std::ostringstream ss;
    write(ss);
    return ss.str();
  }
};

// Interior equation residuals. Smooth nodes (one-sided space slopes agree
// within the kink threshold) must satisfy |u_t + H(s, u')| within tolerance;
// kinked nodes fall back to the one-step dynamic-programming surrogate.
inline CheckResult check_interior(const NetworkLagrangian& NL, const ValueGrid& vg,
                                  double tol_scale = 1.0) {
  CheckResult res;
  res.name = "interior-residual";
  const Network& net = *vg.net;
  const double h = vg.grid.h(), dt = vg.grid.dt;
  const double kink_threshold = 10 * (h + dt);

  detail::Workspace W = detail::build_workspace(NL, vg.grid);
  std::vector<double> onestep(vg.map.total);
  const int K = vg.layers() - 1;
  for (int k = 1; k <= K; ++k) {
    detail::compute_layer(W, vg.u[k - 1], onestep, nullptr);
    for (size_t a = 0; a < net.arcs().size(); ++a) {
      const ArcHamiltonian& H = NL.hamiltonian(static_cast<int>(a));
      for (int i = 1; i + 1 < vg.grid.n_s; ++i) {
        double um = vg.value(k, static_cast<int>(a), i - 1);
        double u0 = vg.value(k, static_cast<int>(a), i);
        double up = vg.value(k, static_cast<int>(a), i + 1);
        double ul = vg.value(k - 1, static_cast<int>(a), i);
        if (!std::isfinite(um) || !std::isfinite(u0) || !std::isfinite(up) || !std::isfinite(ul))
          continue;
        double pm = (u0 - um) / h, pp = (up - u0) / h;
        double ut = (u0 - ul) / dt;
        double violation;
        std::string note;
        if (std::abs(pp - pm) <= kink_threshold) {
          double pbar = 0.5 * (pm + pp);
          double tol = tol_scale * 5 * (dt + h) * (1 + std::abs(pbar));
          violation = std::abs(ut + H.eval(i * h, pbar)) - tol;
        } else {
          // kinked: one-step DP surrogate. The grid is the scheme's fixed
          // point, so the defect is zero up to roundoff.
          double gid_val = vg.u[k][vg.map.node(static_cast<int>(a), i)];
          double tol = tol_scale * 1e-9 * (1 + std::abs(gid_val));
          violation = std::abs(gid_val - onestep[vg.map.node(static_cast<int>(a), i)]) - tol;
          note = "kink";
        }
        if (violation > res.worst) {
          res.worst = violation;
          std::ostringstream loc;
          loc << net.arc(static_cast<int>(a)).id << " s=" << i * h << " t=" << vg.time(k);
          res.location = loc.str();
          res.note = note;
        }
      }
    }
  }
  res.pass = res.worst <= 0;
  if (res.worst < 0) res.worst = 0;
  return res;
}

// Vertex subsolution surrogate: forward difference quotients of u(x, .) never
// exceed the flux limiter.
inline CheckResult check_vertex_subsolution(const ValueGrid& vg, const FluxLimiter& fl,
                                            double tol_scale = 1.0) {
  CheckResult res;
  res.name = "vertex-subsolution";
  const Network& net = *vg.net;
  const double dt = vg.grid.dt;
  const double tol = tol_scale * 2 * dt;
  for (int v = 0; v < static_cast<int>(net.vertices().size()); ++v) {
    for (int k = 0; k + 1 < vg.layers(); ++k) {
      double q = (vg.vertex_value(k + 1, v) - vg.vertex_value(k, v)) / dt;
      double violation = q - fl.at(v) - tol;
      if (violation > res.worst) {
        res.worst = violation;
        std::ostringstream loc;
        loc << net.vertex(v).id << " t=" << vg.time(k);
        res.location = loc.str();
      }
    }
  }
  res.pass = res.worst <= 0;
  if (res.worst < 0) res.worst = 0;
  return res;
}

// Vertex supersolution surrogate: wherever the backward quotient drops below
// the limiter, some incident arc must satisfy the constrained one-sided
// inequality u_t + H(1, u') >= 0 at the vertex.
inline CheckResult check_vertex_supersolution(const NetworkLagrangian& NL, const ValueGrid& vg,
                                              double tol_scale = 1.0) {
  CheckResult res;
  res.name = "vertex-supersolution";
  const Network& net = *vg.net;
  const double h = vg.grid.h(), dt = vg.grid.dt;
  const double tol_q = tol_scale * 2 * dt;
  long active = 0;
  for (int v = 0; v < static_cast<int>(net.vertices().size()); ++v) {
    for (int k = 1; k < vg.layers(); ++k) {
      double ux = vg.vertex_value(k, v);
      double q = (ux - vg.vertex_value(k - 1, v)) / dt;
      if (q >= NL.limiter(v) - tol_q) continue;  // clause not active
      ++active;
      double best = -std::numeric_limits<double>::infinity();
      for (auto [a, rev] : net.arcs_into(v)) {
        // one-sided derivative into the arc, in the orientation ending at v
        int inner = rev ? 1 : vg.grid.n_s - 2;
        double uin = vg.value(k, a, inner);
        double p = (ux - uin) / h;
        double Hval = rev ? NL.hamiltonian(a).eval(0.0, -p) : NL.hamiltonian(a).eval(1.0, p);
        best = std::max(best, q + Hval);
      }
      double tol = tol_scale * 5 * (dt + h) * (1 + std::abs(q));
      double violation = -best - tol;
      if (violation > res.worst) {
        res.worst = violation;
        std::ostringstream loc;
        loc << net.vertex(v).id << " t=" << vg.time(k);
        res.location = loc.str();
      }
    }
  }
  res.pass = res.worst <= 0;
  if (res.worst < 0) res.worst = 0;
  res.note = "clause active at " + std::to_string(active) + " vertex layers";
  return res;
}

// State-constrained surrogate at the right edge of a single-arc table with no
// data on the s = 1 face: the backward quotient plus H at the one-sided
// space derivative must be nonnegative there.
inline CheckResult check_right_edge_supersolution(const ArcHamiltonian& H,
                                                  const SingleArcValue& W,
                                                  double tol_scale = 1.0) {
  CheckResult res;
  res.name = "right-edge-supersolution";
  const double h = W.h(), dt = W.dt;
  const int last = W.n_s - 1;
  for (int k = 1; k < W.layers(); ++k) {
    double ut = (W.u[k][last] - W.u[k - 1][last]) / dt;
    double p = (W.u[k][last] - W.u[k][last - 1]) / h;
    double tol = tol_scale * 5 * (dt + h) * (1 + std::abs(p));
    double violation = -(ut + H.eval(1.0, p)) - tol;
    if (violation > res.worst) {
      res.worst = violation;
      std::ostringstream loc;
      loc << "s=1 t=" << k * dt;
      res.location = loc.str();
    }
  }
  res.pass = res.worst <= 0;
  if (res.worst < 0) res.worst = 0;
  return res;
}

// Compares two grids for the same problem on their common nodes. The finer
// grid must refine the coarser one by integer factors in space and time.
inline CheckResult cross_check(const ValueGrid& a, const ValueGrid& b, double tol) {
  CheckResult res;
  res.name = "cross-check";
  const ValueGrid& coarse = a.grid.n_s <= b.grid.n_s ? a : b;
  const ValueGrid& fine = a.grid.n_s <= b.grid.n_s ? b : a;
  require(coarse.net == fine.net, errc::grid_mismatch, "grids from different networks");
  int rs = (fine.grid.n_s - 1) / (coarse.grid.n_s - 1);
  require(rs * (coarse.grid.n_s - 1) == fine.grid.n_s - 1, errc::grid_mismatch,
          "space grids are not nested");
  double rt_real = coarse.grid.dt / fine.grid.dt;
  int rt = static_cast<int>(std::llround(rt_real));
  require(std::abs(rt_real - rt) < 1e-9 && rt >= 1, errc::grid_mismatch,
          "time grids are not nested");
  const Network& net = *coarse.net;
  int common_layers = std::min(coarse.layers(), (fine.layers() - 1) / rt + 1);
  for (int k = 0; k < common_layers; ++k)
    for (size_t arc = 0; arc < net.arcs().size(); ++arc)
      for (int i = 0; i < coarse.grid.n_s; ++i) {
        double d = std::abs(coarse.value(k, static_cast<int>(arc), i) -
                            fine.value(k * rt, static_cast<int>(arc), i * rs));
        if (d > res.worst) {
          res.worst = d;
          std::ostringstream loc;
          loc << net.arc(static_cast<int>(arc)).id << " s=" << i * coarse.grid.h()
              << " t=" << coarse.time(k);
          res.location = loc.str();
        }
      }
  res.pass = res.worst <= tol;
  return res;
}

// Runs the per-grid checks and merges the results in name order.
inline VerificationReport run_verification(const NetworkLagrangian& NL, const ValueGrid& vg,
                                           double tol_scale = 1.0) {
  VerificationReport rep;
  std::ostringstream hdr;
  hdr << "verification: difference-quotient surrogates at grid scale (n_s=" << vg.grid.n_s
      << ", dt=" << vg.grid.dt << "); continuum test-function conditions are not machine-checkable";
  rep.header = hdr.str();
  rep.checks.push_back(check_interior(NL, vg, tol_scale));
  rep.checks.push_back(check_vertex_subsolution(vg, NL.flux_limiter(), tol_scale));
  rep.checks.push_back(check_vertex_supersolution(NL, vg, tol_scale));
  return rep;
}

}  // namespace hjnet
