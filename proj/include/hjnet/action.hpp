#pragma once

// The Lagrangian on the tangent bundle of the network, the action functional
// over network curves, the admissible-curve reduction, and the lower-bound
// checks on closed loops and single-vertex excursions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "hjnet/curve.hpp"
#include "hjnet/errors.hpp"
#include "hjnet/hamiltonian.hpp"
#include "hjnet/network.hpp"

namespace hjnet {

class NetworkLagrangian {
 public:
  NetworkLagrangian(const Network& net, std::vector<ArcHamiltonian> hams, FluxLimiter fl,
                    int s_samples = 257)
      : net_(&net), hams_(std::move(hams)), fl_(std::move(fl)) {
    require(hams_.size() == net.arcs().size(), errc::precondition_violated,
            "one Hamiltonian per arc required");
    require(fl_.c.size() == net.vertices().size(), errc::precondition_violated,
            "one flux limiter value per vertex required");
    lags_.reserve(hams_.size());
    c_arc_.reserve(hams_.size());
    for (const auto& h : hams_) {
      lags_.emplace_back(h);
      c_arc_.push_back(critical_constant(h));
    }
    // m_L: the zero-velocity sections attain the fiber minima, since
    // min over lambda of L(s, .) equals -H(s, 0) by biconjugacy.
    m_L_ = std::numeric_limits<double>::infinity();
    M_ = -std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < hams_.size(); ++a) {
      int n = hams_[a].s_constant ? 1 : s_samples;
      for (int i = 0; i < n; ++i) {
        double s = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
        m_L_ = std::min(m_L_, -hams_[a].eval(s, 0.0));
        M_ = std::max(M_, lags_[a](s, 1.0));  // unit parameter speed
      }
    }
    for (double cx : fl_.c) m_L_ = std::min(m_L_, cx);
    ell_ = 2 * M_ / net.m();
  }

  const Network& network() const { return *net_; }
  const std::vector<ArcHamiltonian>& hamiltonians() const { return hams_; }
  const ArcHamiltonian& hamiltonian(int arc) const { return hams_[arc]; }
  const std::vector<ArcLagrangian>& lagrangians() const { return lags_; }
  const ArcLagrangian& lagrangian(int arc) const { return lags_[arc]; }
  const FluxLimiter& flux_limiter() const { return fl_; }
  double critical(int arc) const { return c_arc_[arc]; }
  const std::vector<double>& criticals() const { return c_arc_; }
  double limiter(int vertex) const { return fl_.at(vertex); }

  double m_L() const { return m_L_; }
  double M() const { return M_; }
  double ell() const { return ell_; }

  double arc_value(int arc, double s, double lambda) const { return lags_[arc](s, lambda); }

  // Flux limiter values at the two endpoints of an arc.
  double c_tail(int arc) const { return fl_.at(net_->arc(arc).tail); }
  double c_head(int arc) const { return fl_.at(net_->arc(arc).head); }

 private:
  const Network* net_;
  std::vector<ArcHamiltonian> hams_;
  std::vector<ArcLagrangian> lags_;
  FluxLimiter fl_;
  std::vector<double> c_arc_;
  double m_L_ = 0, M_ = 0, ell_ = 0;
};

// Modified Lagrangian of one arc under the network's flux limiter.
inline double modified_lagrangian(const NetworkLagrangian& NL, int arc, double s, double lambda) {
  return modified_lagrangian(NL.lagrangian(arc), NL.c_tail(arc), NL.c_head(arc), s, lambda);
}

// Three-case evaluation on the tangent bundle: arc pullback at interior
// points, minimum over incident oriented arcs with parallel tangent at a
// vertex, and the flux limiter value at zero velocity.
inline double eval_L(const NetworkLagrangian& NL, const NetworkPoint& x, const Vec& q,
                     double ang_tol = 1e-8) {
  const Network& net = NL.network();
  int v = net.vertex_at(x);
  if (v < 0) {
    double lam = net.pullback_velocity(x.arc, x.s, q, ang_tol);
    return NL.arc_value(x.arc, x.s, lam);
  }
  if (norm(q) == 0) return NL.limiter(v);
  double best = std::numeric_limits<double>::infinity();
  for (auto [a, rev] : net.arcs_into(v)) {
    Vec tau = net.arc(a).tangent_at(rev ? 0.0 : 1.0);
    if (rev)
      for (double& cmp : tau) cmp = -cmp;
    double t2 = dot(tau, tau);
    double lam = dot(q, tau) / t2;
    double r2 = dot(q, q) - lam * lam * t2;
    if (std::sqrt(std::max(0.0, r2)) > ang_tol * norm(q)) continue;
    double val = rev ? NL.arc_value(a, 0.0, -lam) : NL.arc_value(a, 1.0, lam);
    best = std::min(best, val);
  }
  require(best < std::numeric_limits<double>::infinity(), errc::not_tangent,
          "velocity not tangent to any arc at vertex '" + net.vertex(v).id + "'");
  return best;
}

inline double smallest_step(const NetworkCurve& c) {
  double m = std::numeric_limits<double>::infinity();
  for (const CurvePiece& p : c.pieces)
    if (p.kind == CurvePiece::Kind::move)
      for (size_t i = 1; i < p.t.size(); ++i) m = std::min(m, p.t[i] - p.t[i - 1]);
  return std::isfinite(m) ? m : c.pieces.front().t1() - c.pieces.front().t0();
}

// Action of a curve: midpoint quadrature per move step (velocity by forward
// difference), plus c_x times the duration of each dwell. substeps > 1
// refines each move step for the inequality checks; the curve itself is
// unchanged as a function.
inline double action(const NetworkLagrangian& NL, const NetworkCurve& curve, int substeps = 1) {
  const Network& net = NL.network();
  validate_curve(net, curve);
  NetworkCurve c = normalize_curve(net, curve);
  if (substeps > 1) c = refine_curve(c, smallest_step(c) / substeps);
  double total = 0;
  for (const CurvePiece& p : c.pieces) {
    if (p.kind == CurvePiece::Kind::dwell) {
      total += NL.limiter(p.vertex) * (p.t[1] - p.t[0]);
      continue;
    }
    for (size_t i = 1; i < p.t.size(); ++i) {
      double dt = p.t[i] - p.t[i - 1];
      double lam = (p.s[i] - p.s[i - 1]) / dt;
      double mid = 0.5 * (p.s[i] + p.s[i - 1]);
      total += dt * NL.arc_value(p.arc, mid, lam);
    }
  }
  return total;
}

namespace detail {

struct VertexSpan {
  double t0, t1;
  int vertex;
};

// Contact spans with the vertex set, in time order, for a normalized curve.
inline std::vector<VertexSpan> vertex_spans(const Network& net, const NetworkCurve& c) {
  std::vector<VertexSpan> spans;
  auto add = [&](double t0, double t1, int v) {
    if (!spans.empty() && spans.back().vertex == v && t0 <= spans.back().t1 + 1e-12) {
      spans.back().t1 = std::max(spans.back().t1, t1);
      return;
    }
    spans.push_back({t0, t1, v});
  };
  for (const CurvePiece& p : c.pieces) {
    if (p.kind == CurvePiece::Kind::dwell) {
      add(p.t[0], p.t[1], p.vertex);
    } else {
      int v0 = net.vertex_at({p.arc, p.s.front()});
      if (v0 >= 0) add(p.t.front(), p.t.front(), v0);
      int v1 = net.vertex_at({p.arc, p.s.back()});
      if (v1 >= 0) add(p.t.back(), p.t.back(), v1);
    }
  }
  return spans;
}

}  // namespace detail

// A curve is admissible when no two consecutive vertex contacts hit the same
// vertex with motion in between.
inline bool is_admissible(const Network& net, const NetworkCurve& curve) {
  NetworkCurve c = normalize_curve(net, curve);
  auto spans = detail::vertex_spans(net, c);
  for (size_t i = 1; i < spans.size(); ++i)
    if (spans[i].vertex == spans[i - 1].vertex && spans[i].t0 > spans[i - 1].t1) return false;
  return true;
}

// Partition times of an admissible curve: curve endpoints plus every vertex
// contact boundary.
inline std::vector<double> admissible_partition(const Network& net, const NetworkCurve& curve) {
  NetworkCurve c = normalize_curve(net, curve);
  std::set<double> ts{c.t_begin(), c.t_end()};
  for (const auto& sp : detail::vertex_spans(net, c)) {
    ts.insert(sp.t0);
    ts.insert(sp.t1);
  }
  return {ts.begin(), ts.end()};
}

// Replaces every maximal vertex-free excursion that leaves a vertex and
// returns to it by a dwell of the same duration. Endpoints are preserved and
// the action never increases.
inline NetworkCurve make_admissible(const NetworkLagrangian& NL, const NetworkCurve& curve) {
  const Network& net = NL.network();
  validate_curve(net, curve);
  NetworkCurve c = normalize_curve(net, curve);
  auto spans = detail::vertex_spans(net, c);

  // intervals to dwell: consecutive same-vertex contacts with a gap
  std::vector<detail::VertexSpan> repl;
  for (size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].vertex != spans[i - 1].vertex || spans[i].t0 <= spans[i - 1].t1) continue;
    if (!repl.empty() && repl.back().vertex == spans[i].vertex &&
        repl.back().t1 >= spans[i - 1].t1 - 1e-15)
      repl.back().t1 = spans[i].t0;
    else
      repl.push_back({spans[i - 1].t1, spans[i].t0, spans[i].vertex});
  }
  if (repl.empty()) return c;

  NetworkCurve out;
  size_t r = 0;
  auto push_dwell = [&](int v, double t0, double t1) {
    if (t1 - t0 <= 0) return;
    if (!out.pieces.empty() && out.pieces.back().kind == CurvePiece::Kind::dwell &&
        out.pieces.back().vertex == v) {
      out.pieces.back().t[1] = t1;
      return;
    }
    out.pieces.push_back(CurvePiece::make_dwell(v, t0, t1));
  };
  for (const CurvePiece& p : c.pieces) {
    while (r < repl.size() && repl[r].t1 <= p.t0() + 1e-15) ++r;
    if (r < repl.size() && p.t0() >= repl[r].t0 - 1e-15 && p.t1() <= repl[r].t1 + 1e-15) {
      push_dwell(repl[r].vertex, p.t0(), p.t1());
      continue;
    }
    if (p.kind == CurvePiece::Kind::dwell)
      push_dwell(p.vertex, p.t[0], p.t[1]);
    else
      out.pieces.push_back(p);
  }
  return out;
}

// --- lower-bound checks ------------------------------------------------------

// Empirical coercivity envelope: binned minima of L over sampled tangent
// states with |q| in each bin. L >= envelope holds on the fitting sample by
// construction; the envelope is a report, not an assertion about all states.
struct CoercivityEnvelope {
  std::vector<double> radius;  // bin centers in |q|
  std::vector<double> theta;   // min sampled L in the bin
};

inline CoercivityEnvelope coercivity_envelope(const NetworkLagrangian& NL, double q_max = 6.0,
                                              int bins = 12, int s_samples = 33) {
  CoercivityEnvelope env;
  env.radius.resize(bins);
  env.theta.assign(bins, std::numeric_limits<double>::infinity());
  const Network& net = NL.network();
  for (int b = 0; b < bins; ++b) env.radius[b] = q_max * (b + 0.5) / bins;
  for (size_t a = 0; a < net.arcs().size(); ++a) {
    for (int i = 0; i < s_samples; ++i) {
      double s = static_cast<double>(i) / (s_samples - 1);
      double speed = norm(net.arc(static_cast<int>(a)).tangent_at(s));
      for (int b = 0; b < bins; ++b) {
        // |q| = |lambda| * |gamma'(s)|
        double lam = env.radius[b] / speed;
        env.theta[b] = std::min({env.theta[b], NL.arc_value(static_cast<int>(a), s, lam),
                                 NL.arc_value(static_cast<int>(a), s, -lam)});
      }
    }
  }
  return env;
}

struct LoopBoundReport {
  double integral = 0;       // quadrature of the modified Lagrangian
  double bound = 0;          // (c_tail /\ c_head) * (b - a)
  double margin = 0;
  bool pass = false;
  StationarySolution certificate;  // smooth solution of H = -(c_tail /\ c_head)
};

// Closed parameter curves on one arc cost at least the smaller endpoint
// limiter per unit time, measured against the modified Lagrangian.
inline LoopBoundReport check_loop_lower_bound(const NetworkLagrangian& NL, int arc,
                                              const std::vector<double>& t,
                                              const std::vector<double>& s, int substeps = 8,
                                              double tol = 1e-6) {
  require(t.size() == s.size() && t.size() >= 2, errc::precondition_violated,
          "loop needs matching (t, s) grids");
  require(std::abs(s.front() - s.back()) <= 1e-12, errc::precondition_violated,
          "loop must close in parameter");
  for (double sv : s)
    require(sv >= 0 && sv <= 1, errc::off_network, "loop leaves [0,1]");
  const ArcLagrangian& L = NL.lagrangian(arc);
  double c0 = NL.c_tail(arc), c1 = NL.c_head(arc);
  LoopBoundReport rep;
  for (size_t i = 1; i < t.size(); ++i) {
    double dt = (t[i] - t[i - 1]) / substeps;
    double lam = (s[i] - s[i - 1]) / (t[i] - t[i - 1]);
    for (int k = 0; k < substeps; ++k) {
      double mid = s[i - 1] + lam * dt * (k + 0.5);
      rep.integral += dt * modified_lagrangian(L, c0, c1, mid, lam);
    }
  }
  rep.bound = std::min(c0, c1) * (t.back() - t.front());
  rep.margin = rep.integral - rep.bound;
  rep.pass = rep.margin >= -tol;
  rep.certificate = stationary_solution(NL.hamiltonian(arc), -std::min(c0, c1), 65);
  return rep;
}

struct ExcursionBoundReport {
  int vertex = -1;
  double action_value = 0;
  double bound = 0;
  double margin = 0;
  bool pass = false;
};

// Admissible curves meeting the vertex set in at most one vertex x satisfy
// action >= c_x (b-a) - ell * max(d(x, start), d(x, end)).
inline ExcursionBoundReport check_excursion_bound(const NetworkLagrangian& NL,
                                                  const NetworkCurve& curve, int substeps = 8,
                                                  double tol = 1e-6) {
  const Network& net = NL.network();
  require(is_admissible(net, curve), errc::precondition_violated, "curve not admissible");
  NetworkCurve c = normalize_curve(net, curve);
  std::set<int> touched;
  for (const auto& sp : detail::vertex_spans(net, c)) touched.insert(sp.vertex);
  require(touched.size() <= 1, errc::precondition_violated,
          "curve touches more than one vertex");

  std::vector<int> candidates;
  if (!touched.empty()) {
    candidates.push_back(*touched.begin());
  } else {
    // confined to one arc's interior: either endpoint vertex works
    int arc = c.pieces.front().arc;
    candidates = {net.arc(arc).tail, net.arc(arc).head};
  }
  double A = action(NL, c, substeps);
  double dur = c.t_end() - c.t_begin();
  NetworkPoint a = curve_start(net, c), b = curve_end(net, c);
  ExcursionBoundReport best;
  best.margin = -std::numeric_limits<double>::infinity();
  for (int x : candidates) {
    NetworkPoint px = net.point_at_vertex(x);
    double d = std::max(net.geodesic_distance(px, a), net.geodesic_distance(px, b));
    ExcursionBoundReport rep;
    rep.vertex = x;
    rep.action_value = A;
    rep.bound = NL.limiter(x) * dur - NL.ell() * d;
    rep.margin = A - rep.bound;
    rep.pass = rep.margin >= -tol;
    if (rep.margin > best.margin) best = rep;
  }
  return best;
}

}  // namespace hjnet
