#pragma once

// Per-arc Hamiltonians, their numerical Fenchel conjugates, critical
// constants, flux limiters and the stationary solutions of H(s, U') = a.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "hjnet/errors.hpp"
#include "hjnet/expr.hpp"
#include "hjnet/network.hpp"

namespace hjnet {

struct ArcHamiltonian {
  std::string arc_id;
  std::function<double(double, double)> eval;  // H(s, mu)
  std::string spec;                            // symbolic description, for reports
  bool s_constant = false;                     // H does not depend on s
  // Optional bracket [lo, hi] known to contain the conjugate maximizer for
  // a given (s, lambda). When absent an expanding bracket is used.
  std::function<std::pair<double, double>(double, double)> momentum_bracket;

  double operator()(double s, double mu) const { return eval(s, mu); }
};

// H for the reversed parametrization: H~(s, mu) = H(1-s, -mu).
inline ArcHamiltonian reversed(const ArcHamiltonian& h) {
  ArcHamiltonian r;
  r.arc_id = h.arc_id + "~";
  r.spec = h.spec.empty() ? "" : "reversed(" + h.spec + ")";
  r.s_constant = h.s_constant;
  auto base = h.eval;
  r.eval = [base](double s, double mu) { return base(1 - s, -mu); };
  return r;
}

namespace detail {

constexpr double kGolden = 0.618033988749894848;

// Maximize a concave function on [lo, hi] by golden-section search.
// Returns (argmax, max). width_tol is an absolute interval width target.
template <class F>
inline std::pair<double, double> golden_max(F&& f, double lo, double hi, double width_tol,
                                            int max_iter = 240) {
  double x1 = hi - kGolden * (hi - lo);
  double x2 = lo + kGolden * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < max_iter && (hi - lo) > width_tol; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace detail

struct LegendreResult {
  double value;
  double argmax;
};

// L(s, lambda) = max_mu (lambda*mu - H(s, mu)). The objective is concave in
// mu; the bracket is expanded by doubling until the discrete maximum over
// {lo, mid, hi} is interior, which superlinearity guarantees to terminate.
inline LegendreResult legendre_full(const ArcHamiltonian& H, double s, double lambda) {
  auto g = [&](double mu) { return lambda * mu - H.eval(s, mu); };
  double lo, hi;
  if (H.momentum_bracket) {
    auto b = H.momentum_bracket(s, lambda);
    lo = b.first;
    hi = b.second;
  } else {
    lo = -1 - 2 * std::abs(lambda);
    hi = 1 + 2 * std::abs(lambda);
  }
  double glo = g(lo), ghi = g(hi);
  double gmid = g(0.5 * (lo + hi));
  int expansions = 0;
  while (gmid < glo || gmid < ghi) {
    double w = hi - lo;
    if (glo > ghi)
      lo -= w;
    else
      hi += w;
    if (++expansions > 60 || hi - lo > 1e14)
      fail(errc::bracket_failure,
           "conjugate maximizer escapes at lambda=" + std::to_string(lambda) +
               " (Hamiltonian not superlinear?)");
    glo = g(lo);
    ghi = g(hi);
    gmid = g(0.5 * (lo + hi));
  }
  double width_tol = 1e-10 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  auto [mu, val] = detail::golden_max(g, lo, hi, width_tol);
  return {val, mu};
}

inline double legendre(const ArcHamiltonian& H, double s, double lambda) {
  return legendre_full(H, s, lambda).value;
}

// min over mu of H(s, .), by golden section on -H.
inline LegendreResult momentum_minimum(const ArcHamiltonian& H, double s) {
  auto r = legendre_full(H, s, 0.0);
  return {-r.value, r.argmax};
}

// c = -max_s min_mu H(s, mu), outer maximum on a uniform s grid with a local
// golden refinement around the best node.
inline double critical_constant(const ArcHamiltonian& H, int s_samples = 257) {
  if (H.s_constant) return -momentum_minimum(H, 0.5).value;
  double best = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < s_samples; ++i) {
    double s = static_cast<double>(i) / (s_samples - 1);
    double v = momentum_minimum(H, s).value;
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  double h = 1.0 / (s_samples - 1);
  double lo = std::max(0.0, best_i * h - h), hi = std::min(1.0, best_i * h + h);
  auto [s_ref, v_ref] =
      detail::golden_max([&](double s) { return momentum_minimum(H, s).value; }, lo, hi, 1e-10);
  (void)s_ref;
  return -std::max(best, v_ref);
}

// Lagrangian of one arc, evaluated as the numerical Fenchel conjugate of the
// paired Hamiltonian. An optional uniform (s, lambda) cache with bilinear
// interpolation can be attached for bulk evaluation.
class ArcLagrangian {
 public:
  ArcLagrangian() = default;
  explicit ArcLagrangian(ArcHamiltonian h) : H_(std::make_shared<ArcHamiltonian>(std::move(h))) {}

  const ArcHamiltonian& hamiltonian() const { return *H_; }
  const std::string& arc_id() const { return H_->arc_id; }
  bool s_constant() const { return H_->s_constant; }

  double operator()(double s, double lambda) const { return legendre(*H_, s, lambda); }
  LegendreResult full(double s, double lambda) const { return legendre_full(*H_, s, lambda); }

  void build_cache(int s_count, double lambda_min, double lambda_max, int lambda_count) {
    cache_ = std::make_shared<Cache>();
    cache_->s_count = H_->s_constant ? 1 : s_count;
    cache_->l_min = lambda_min;
    cache_->l_max = lambda_max;
    cache_->l_count = lambda_count;
    cache_->values.resize(static_cast<size_t>(cache_->s_count) * lambda_count);
    for (int i = 0; i < cache_->s_count; ++i) {
      double s = cache_->s_count == 1 ? 0.5 : static_cast<double>(i) / (cache_->s_count - 1);
      for (int j = 0; j < lambda_count; ++j) {
        double lam = lambda_min + (lambda_max - lambda_min) * j / (lambda_count - 1);
        cache_->values[static_cast<size_t>(i) * lambda_count + j] = legendre(*H_, s, lam);
      }
    }
  }

  bool has_cache() const { return cache_ != nullptr; }

  double cached(double s, double lambda) const {
    const Cache& c = *cache_;
    double lx = (lambda - c.l_min) / (c.l_max - c.l_min) * (c.l_count - 1);
    if (lx < 0 || lx > c.l_count - 1) return (*this)(s, lambda);  // outside: exact
    int j = std::min(static_cast<int>(lx), c.l_count - 2);
    double wl = lx - j;
    auto row = [&](int i) {
      const double* v = &c.values[static_cast<size_t>(i) * c.l_count];
      return (1 - wl) * v[j] + wl * v[j + 1];
    };
    if (c.s_count == 1) return row(0);
    double sx = std::clamp(s, 0.0, 1.0) * (c.s_count - 1);
    int i = std::min(static_cast<int>(sx), c.s_count - 2);
    double ws = sx - i;
    return (1 - ws) * row(i) + ws * row(i + 1);
  }

 private:
  struct Cache {
    int s_count = 0, l_count = 0;
    double l_min = 0, l_max = 0;
    std::vector<double> values;
  };
  std::shared_ptr<ArcHamiltonian> H_;
  std::shared_ptr<Cache> cache_;
};

// ---------------------------------------------------------------------------
// Builtin families

// power{p, a(s), f(s)}: H(s, mu) = a(s) |mu|^p / p - f(s), a > 0, p > 1.
inline ArcHamiltonian power_hamiltonian(double p, Expr a, Expr f, std::string arc_id = "") {
  require(p > 1, errc::parse_error, "power family needs p > 1");
  ArcHamiltonian H;
  H.arc_id = std::move(arc_id);
  H.spec = "power{p=" + std::to_string(p) + ", a=" + a.source() + ", f=" + f.source() + "}";
  H.s_constant = a.is_constant() && f.is_constant();
  H.eval = [p, a, f](double s, double mu) {
    return a(s) * std::pow(std::abs(mu), p) / p - f(s);
  };
  return H;
}

// Closed-form conjugate of the power family; used as an analytic oracle.
inline double power_conjugate(double p, double a_val, double f_val, double lambda) {
  double q = p / (p - 1);
  return std::pow(a_val, 1 - q) * std::pow(std::abs(lambda), q) / q + f_val;
}

// table{...}: sampled values on a uniform (s, mu) grid, bilinear in between.
// Outside the sampled momentum range the table continues quadratically so the
// conjugate stays finite.
inline ArcHamiltonian table_hamiltonian(int s_count, int mu_count, double mu_min, double mu_max,
                                        std::vector<double> values, std::string arc_id = "") {
  require(s_count >= 1 && mu_count >= 2, errc::parse_error, "table needs >= 2 momentum samples");
  require(static_cast<int>(values.size()) == s_count * mu_count, errc::parse_error,
          "table value count mismatch");
  ArcHamiltonian H;
  H.arc_id = std::move(arc_id);
  H.spec = "table{" + std::to_string(s_count) + "x" + std::to_string(mu_count) + "}";
  H.s_constant = s_count == 1;
  auto data = std::make_shared<std::vector<double>>(std::move(values));
  double dmu = (mu_max - mu_min) / (mu_count - 1);
  H.eval = [=](double s, double mu) {
    auto at = [&](int i, int j) { return (*data)[static_cast<size_t>(i) * mu_count + j]; };
    auto row = [&](double m, int i) {
      double x = (m - mu_min) / dmu;
      if (x <= 0) {
        double slope = (at(i, 1) - at(i, 0)) / dmu;
        double d = mu_min - m;
        return at(i, 0) - slope * d + d * d;
      }
      if (x >= mu_count - 1) {
        double slope = (at(i, mu_count - 1) - at(i, mu_count - 2)) / dmu;
        double d = m - mu_max;
        return at(i, mu_count - 1) + slope * d + d * d;
      }
      int j = std::min(static_cast<int>(x), mu_count - 2);
      double w = x - j;
      return (1 - w) * at(i, j) + w * at(i, j + 1);
    };
    if (s_count == 1) return row(mu, 0);
    double sx = std::clamp(s, 0.0, 1.0) * (s_count - 1);
    int i = std::min(static_cast<int>(sx), s_count - 2);
    double ws = sx - i;
    return (1 - ws) * row(mu, i) + ws * row(mu, i + 1);
  };
  return H;
}

// ---------------------------------------------------------------------------
// Flux limiters

struct FluxLimiter {
  std::vector<double> c;  // by vertex index
  double at(int vertex) const { return c.at(vertex); }
};

struct VertexMargin {
  int vertex;
  double cap;           // min over incident arcs of c_gamma
  double margin;        // cap - c_x
  double flusso_cap;    // min over incident arcs of min_s L(s, 0)
  double flusso_margin; // flusso_cap - c_x
};

struct FluxLimiterReport {
  std::vector<VertexMargin> vertices;
  bool pass = true;
};

// Checks c_x <= min over arcs ending at x of c_gamma, and the weaker derived
// bound c_x <= min_gamma min_s L_gamma(s, 0) as a cross-check. Throws
// LimiterTooLarge on violation.
inline FluxLimiterReport validate_flux_limiter(const Network& net,
                                               const std::vector<double>& c_arc,
                                               const std::vector<ArcLagrangian>& lags,
                                               const FluxLimiter& fl, double tol = 1e-9,
                                               int s_samples = 257) {
  require(fl.c.size() == net.vertices().size(), errc::precondition_violated,
          "flux limiter must cover every vertex");
  FluxLimiterReport rep;
  std::vector<double> minL0(net.arcs().size());
  for (size_t a = 0; a < net.arcs().size(); ++a) {
    double mv = std::numeric_limits<double>::infinity();
    int n = lags[a].s_constant() ? 1 : s_samples;
    for (int i = 0; i < n; ++i) {
      double s = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
      mv = std::min(mv, lags[a](s, 0.0));
    }
    minL0[a] = mv;
  }
  for (size_t v = 0; v < net.vertices().size(); ++v) {
    VertexMargin m;
    m.vertex = static_cast<int>(v);
    m.cap = std::numeric_limits<double>::infinity();
    m.flusso_cap = std::numeric_limits<double>::infinity();
    for (int a : net.incident_arcs(static_cast<int>(v))) {
      m.cap = std::min(m.cap, c_arc[a]);
      m.flusso_cap = std::min(m.flusso_cap, minL0[a]);
    }
    m.margin = m.cap - fl.at(static_cast<int>(v));
    m.flusso_margin = m.flusso_cap - fl.at(static_cast<int>(v));
    rep.vertices.push_back(m);
    if (m.margin < -tol) {
      rep.pass = false;
      fail(errc::limiter_too_large,
           "c_x at vertex '" + net.vertex(static_cast<int>(v)).id + "' exceeds the cap by " +
               std::to_string(-m.margin));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Stationary solutions of H(s, U') = a on (0,1)

struct StationarySolution {
  std::vector<double> s;
  std::vector<double> sigma;  // largest root of H(s, .) = a
  std::vector<double> u;      // integral of sigma by trapezoid rule
  double level = 0;
  double residual_max = 0;    // max |H(s, sigma) - a| over the grid
};

inline StationarySolution stationary_solution(const ArcHamiltonian& H, double a, int nodes = 257,
                                              double level_tol = 1e-9) {
  double c_gamma = critical_constant(H);
  if (a < -c_gamma - level_tol)
    fail(errc::level_below_minimum, "level " + std::to_string(a) + " is below -c_gamma = " +
                                        std::to_string(-c_gamma));
  StationarySolution out;
  out.level = a;
  out.s.resize(nodes);
  out.sigma.resize(nodes);
  out.u.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    double s = static_cast<double>(i) / (nodes - 1);
    out.s[i] = s;
    auto mn = momentum_minimum(H, s);
    double mu_min = mn.argmax;
    if (H.eval(s, mu_min) >= a) {
      // level touches the minimum (up to roundoff); rightmost root is there
      out.sigma[i] = mu_min;
    } else {
      double lo = mu_min, hi = std::max(1.0, std::abs(mu_min) * 2);
      int guard = 0;
      while (H.eval(s, hi) < a) {
        hi *= 2;
        require(++guard < 200, errc::bracket_failure, "no upper root bracket");
      }
      // bisection for the rightmost root: H < a on the left, >= a on the right
      for (int it = 0; it < 200 && (hi - lo) > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        if (H.eval(s, mid) < a)
          lo = mid;
        else
          hi = mid;
      }
      out.sigma[i] = hi;
    }
    out.residual_max = std::max(out.residual_max, std::abs(H.eval(s, out.sigma[i]) - a));
  }
  out.u[0] = 0;
  for (int i = 1; i < nodes; ++i)
    out.u[i] = out.u[i - 1] + 0.5 * (out.sigma[i - 1] + out.sigma[i]) * (out.s[i] - out.s[i - 1]);
  return out;
}

// ---------------------------------------------------------------------------

// Modified Lagrangian: equal to L off the endpoints; at s in {0,1} shifted so
// that the zero-velocity value becomes c_tail /\ c_head.
inline double modified_lagrangian(const ArcLagrangian& L, double c_tail, double c_head, double s,
                                  double lambda) {
  double v = L(s, lambda);
  if (s == 0.0 || s == 1.0) v += std::min(c_tail, c_head) - L(s, 0.0);
  return v;
}

struct CompatibilityReport {
  double max_mismatch = 0;
  double worst_s = 0, worst_mu = 0;
  bool pass = true;
};

// Checks H_rev(s, mu) = H_fwd(1-s, -mu) on a sample grid.
inline CompatibilityReport check_compatibility(const ArcHamiltonian& fwd,
                                               const ArcHamiltonian& rev, double tol = 1e-9,
                                               int s_samples = 33, int mu_samples = 41,
                                               double mu_range = 5.0) {
  CompatibilityReport rep;
  for (int i = 0; i < s_samples; ++i) {
    double s = static_cast<double>(i) / (s_samples - 1);
    for (int j = 0; j < mu_samples; ++j) {
      double mu = -mu_range + 2 * mu_range * j / (mu_samples - 1);
      double d = std::abs(rev.eval(s, mu) - fwd.eval(1 - s, -mu));
      if (d > rep.max_mismatch) {
        rep.max_mismatch = d;
        rep.worst_s = s;
        rep.worst_mu = mu;
      }
    }
  }
  rep.pass = rep.max_mismatch <= tol;
  return rep;
}

// Empirical local Lipschitz constant of H in the momentum over [-M, M].
// Reported only; nothing downstream depends on it quantitatively.
inline double momentum_lipschitz_estimate(const ArcHamiltonian& H, double M, int s_samples = 17,
                                          int mu_samples = 65) {
  double worst = 0;
  for (int i = 0; i < s_samples; ++i) {
    double s = static_cast<double>(i) / (s_samples - 1);
    double prev = H.eval(s, -M);
    double dmu = 2 * M / (mu_samples - 1);
    for (int j = 1; j < mu_samples; ++j) {
      double cur = H.eval(s, -M + j * dmu);
      worst = std::max(worst, std::abs(cur - prev) / dmu);
      prev = cur;
    }
  }
  return worst;
}

struct AssumptionsReport {
  double convexity_violation = 0;   // worst midpoint-convexity defect
  double superlinear_reached = 0;   // largest slope certified
  bool pass = true;
  std::string detail;
};

// Sampled checks of continuity/convexity/superlinearity. Superlinearity is
// certified at finitely many slopes by searching for a momentum where
// H(s, mu)/|mu| clears the slope for every sampled s.
inline AssumptionsReport check_assumptions(const ArcHamiltonian& H, double slope_target = 40.0,
                                           int s_samples = 17, int mu_samples = 33,
                                           double mu_range = 6.0) {
  AssumptionsReport rep;
  for (int i = 0; i < s_samples; ++i) {
    double s = static_cast<double>(i) / (s_samples - 1);
    for (int j = 0; j + 2 < mu_samples; ++j) {
      double m1 = -mu_range + 2 * mu_range * j / (mu_samples - 1);
      double m2 = -mu_range + 2 * mu_range * (j + 1) / (mu_samples - 1);
      double m3 = -mu_range + 2 * mu_range * (j + 2) / (mu_samples - 1);
      double lin = 0.5 * (H.eval(s, m1) + H.eval(s, m3));
      rep.convexity_violation = std::max(rep.convexity_violation, H.eval(s, m2) - lin);
    }
  }
  if (rep.convexity_violation > 1e-9) {
    rep.pass = false;
    rep.detail = "convexity defect " + std::to_string(rep.convexity_violation);
    return rep;
  }
  for (double slope : {1.0, slope_target / 4, slope_target}) {
    double mu = 1;
    bool ok = false;
    for (int it = 0; it < 60 && !ok; ++it, mu *= 2) {
      ok = true;
      for (int i = 0; i < s_samples && ok; ++i) {
        double s = static_cast<double>(i) / (s_samples - 1);
        if (H.eval(s, mu) / mu < slope || H.eval(s, -mu) / mu < slope) ok = false;
      }
    }
    if (!ok) {
      rep.pass = false;
      rep.detail = "superlinearity not certified at slope " + std::to_string(slope);
      return rep;
    }
    rep.superlinear_reached = slope;
  }
  return rep;
}

}  // namespace hjnet
