#pragma once

// Dynamic-programming solver: minimal action between network points, the
// Lax-Oleinik value grid driven by an initial datum, single-arc boundary
// value problems, and an exhaustive small-instance oracle.
//
// Scheme: semi-Lagrangian time stepping. Each layer is the pointwise minimum
// over one-step transitions whose foot points sit on a sub-node lattice
// (spacing h/sub) of the previous layer, read through linear interpolation.
// Transition costs use the midpoint state and the exact displacement/dt
// velocity. Crossing a vertex in one step is composed of two half-steps, each
// costed on its own arc; staying at a vertex costs the flux limiter per unit
// time. With sub = 1 the feet coincide with grid nodes and the scheme reduces
// to a pure node-hop DP.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "hjnet/action.hpp"
#include "hjnet/curve.hpp"
#include "hjnet/errors.hpp"
#include "hjnet/network.hpp"

namespace hjnet {

struct GridSpec {
  int n_s = 101;       // parameter nodes per arc (shared vertex nodes identified)
  double dt = 0.01;
  double T = 1.0;
  int reach = 8;       // max nodes traversed per step
  int sub = 32;        // sub-node foot lattice resolution
  double max_speed = 0;  // parameter-speed cap; 0 means reach * h / dt
  int threads = 1;

  double h() const { return 1.0 / (n_s - 1); }
  int layers() const { return std::max(1, static_cast<int>(std::llround(T / dt))); }
  // speed representable by a one-node hop per step
  double hop_speed() const { return h() / dt; }
  double speed_cap() const { return max_speed > 0 ? max_speed : reach * hop_speed(); }

  void validate() const {
    require(n_s >= 2, errc::precondition_violated, "grid needs n_s >= 2");
    require(dt > 0 && T > 0, errc::precondition_violated, "grid needs dt, T > 0");
    require(reach >= 1 && sub >= 1, errc::precondition_violated, "grid needs reach, sub >= 1");
  }
};

// Global node ids: vertices first, then the interior nodes of each arc.
struct NodeMap {
  int ns = 0, V = 0;
  std::vector<int> tails, heads, offset;
  int total = 0;

  void init(const Network& net, int n_s) {
    ns = n_s;
    V = static_cast<int>(net.vertices().size());
    const int A = static_cast<int>(net.arcs().size());
    tails.resize(A);
    heads.resize(A);
    offset.resize(A);
    int next = V;
    for (int a = 0; a < A; ++a) {
      tails[a] = net.arc(a).tail;
      heads[a] = net.arc(a).head;
      offset[a] = next;
      next += ns - 2;
    }
    total = next;
  }

  int node(int arc, int i) const {
    if (i == 0) return tails[arc];
    if (i == ns - 1) return heads[arc];
    return offset[arc] + i - 1;
  }
  bool is_vertex(int gid) const { return gid < V; }
};

struct Pred {
  enum Type : std::uint8_t { none, stay, move, transit };
  Type type = none;
  int arc = -1;    // move/transit: arc carrying the foot point
  int via = -1;    // transit: vertex crossed at mid-step
  double foot = 0; // foot position on `arc`, in node units
};

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class F>
inline void parallel_for(int n, int threads, F&& f) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 512) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    constexpr int chunk = 64;
    for (;;) {
      int begin = next.fetch_add(chunk);
      if (begin >= n) return;
      int end = std::min(n, begin + chunk);
      for (int i = begin; i < end; ++i) f(i);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

// Linear interpolation of a value layer along one arc, y in node units.
inline double interp_value(const std::vector<double>& u, const NodeMap& m, int arc,
                           double y_units) {
  int j = static_cast<int>(std::floor(y_units));
  double w = y_units - j;
  if (j < 0) {
    j = 0;
    w = 0;
  }
  if (j >= m.ns - 1) {
    j = m.ns - 2;
    w = 1;
  }
  if (w <= 1e-12) return u[m.node(arc, j)];
  if (w >= 1 - 1e-12) return u[m.node(arc, j + 1)];
  return (1 - w) * u[m.node(arc, j)] + w * u[m.node(arc, j + 1)];
}

struct ArcTables {
  bool s_const = false;
  std::vector<double> menu;                     // s_const: by k + kmax
  std::vector<double> full;                     // else: i * (2kmax+1) + (k+kmax)
  std::array<std::vector<double>, 2> approach;  // [end: 0 tail, 1 head][kh]
  std::array<std::vector<double>, 2> depart;
};

struct Workspace {
  const NetworkLagrangian* NL = nullptr;
  NodeMap map;
  int ns = 0, sigma = 1, kmax = 0, khmax = 0;
  double h = 0, hs = 0, dt = 0;
  std::vector<ArcTables> tables;
  std::vector<std::vector<std::pair<int, int>>> vertex_ends;  // per vertex: (arc, end)
  int threads = 1;

  double full_cost(int arc, int i, int k) const {
    const ArcTables& t = tables[arc];
    return t.s_const ? t.menu[k + kmax] : t.full[static_cast<size_t>(i) * (2 * kmax + 1) + k + kmax];
  }
};

inline Workspace build_workspace(const NetworkLagrangian& NL, const GridSpec& g) {
  g.validate();
  Workspace W;
  W.NL = &NL;
  const Network& net = NL.network();
  W.map.init(net, g.n_s);
  W.ns = g.n_s;
  W.sigma = g.sub;
  W.h = g.h();
  W.hs = W.h / g.sub;
  W.dt = g.dt;
  W.threads = g.threads;
  double cap = g.speed_cap();
  // round the menu up to whole node offsets so that delta-seeded sweeps can
  // always expand at the capped speed through exact-node feet
  long node_reach = std::max<long>(1, static_cast<long>(std::ceil(cap * g.dt / W.h - 1e-9)));
  W.kmax = static_cast<int>(std::min<long>(node_reach * g.sub,
                                           std::min<long>(static_cast<long>(g.reach) * g.sub,
                                                          static_cast<long>(g.n_s - 1) * g.sub)));
  W.kmax = std::max(W.kmax, 1);
  W.khmax = std::min<long>(node_reach * g.sub / 2, static_cast<long>(g.reach) * g.sub / 2);
  W.khmax = std::max(W.khmax, 1);

  const int A = static_cast<int>(net.arcs().size());
  W.tables.resize(A);
  for (int a = 0; a < A; ++a) {
    ArcTables& t = W.tables[a];
    const ArcLagrangian& L = NL.lagrangian(a);
    t.s_const = L.s_constant();
    const int m = 2 * W.kmax + 1;
    if (t.s_const) {
      t.menu.resize(m);
      for (int k = -W.kmax; k <= W.kmax; ++k)
        t.menu[k + W.kmax] = W.dt * L(0.5, k * W.hs / W.dt);
    } else {
      t.full.resize(static_cast<size_t>(g.n_s) * m);
      for (int i = 0; i < g.n_s; ++i) {
        double si = i * W.h;
        for (int k = -W.kmax; k <= W.kmax; ++k) {
          double lam = k * W.hs / W.dt;
          double mid = si - 0.5 * k * W.hs;
          // feet outside the arc are clipped away at use sites; cost rows
          // stay well defined by clamping the midpoint
          mid = std::clamp(mid, 0.0, 1.0);
          t.full[static_cast<size_t>(i) * m + k + W.kmax] = W.dt * L(mid, lam);
        }
      }
    }
    for (int end = 0; end < 2; ++end) {
      t.approach[end].resize(W.khmax + 1);
      t.depart[end].resize(W.khmax + 1);
      for (int kh = 0; kh <= W.khmax; ++kh) {
        double d = kh * W.hs;
        double mid = end == 1 ? 1 - d / 2 : d / 2;
        double v = 2 * d / W.dt;
        // motion toward the end has positive speed at the head, negative at
        // the tail; departures are the time reversals
        t.approach[end][kh] = 0.5 * W.dt * L(mid, end == 1 ? v : -v);
        t.depart[end][kh] = 0.5 * W.dt * L(mid, end == 1 ? -v : v);
      }
    }
  }

  W.vertex_ends.resize(net.vertices().size());
  for (int a = 0; a < A; ++a) {
    W.vertex_ends[net.arc(a).tail].emplace_back(a, 0);
    W.vertex_ends[net.arc(a).head].emplace_back(a, 1);
  }
  for (auto& v : W.vertex_ends) std::sort(v.begin(), v.end());
  return W;
}

// One DP step: next[n] = min over transitions of prev[foot] + cost.
inline void compute_layer(const Workspace& W, const std::vector<double>& prev,
                          std::vector<double>& next, std::vector<Pred>* preds) {
  const NetworkLagrangian& NL = *W.NL;
  const NodeMap& m = W.map;
  const int ns = W.ns, sigma = W.sigma;
  const int A = static_cast<int>(NL.network().arcs().size());

  // vertex targets: stay at the limiter rate, or arrive along an incident arc
  for (int x = 0; x < m.V; ++x) {
    double best = prev[x] + NL.limiter(x) * W.dt;
    Pred bp;
    bp.type = Pred::stay;
    for (auto [a, end] : W.vertex_ends[x]) {
      int ie = end == 1 ? ns - 1 : 0;
      for (int k = 1; k <= W.kmax; ++k) {
        double y = end == 1 ? (ns - 1) - static_cast<double>(k) / sigma
                            : static_cast<double>(k) / sigma;
        if (y < 0 || y > ns - 1) break;
        double v = interp_value(prev, m, a, y);
        if (!(v < kInf)) continue;
        double cand = v + W.full_cost(a, ie, end == 1 ? k : -k);
        if (cand < best) {
          best = cand;
          bp.type = Pred::move;
          bp.arc = a;
          bp.via = -1;
          bp.foot = y;
        }
      }
    }
    next[x] = best;
    if (preds) (*preds)[x] = bp;
  }

  // interior targets, data-parallel over all arcs
  const int interior_total = A * (ns - 2);
  parallel_for(interior_total, W.threads, [&](int idx) {
    const int a = idx / (ns - 2);
    const int i = 1 + idx % (ns - 2);
    const int gid = m.node(a, i);

    double best = W.full_cost(a, i, 0) + prev[gid];
    Pred bp;
    bp.type = Pred::move;
    bp.arc = a;
    bp.foot = i;

    const int klo = std::max(-W.kmax, (i - (ns - 1)) * sigma);
    const int khi = std::min(W.kmax, i * sigma);
    for (int k = klo; k <= khi; ++k) {
      if (k == 0) continue;
      double y = i - static_cast<double>(k) / sigma;
      double v = interp_value(prev, m, a, y);
      if (!(v < kInf)) continue;
      double cand = v + W.full_cost(a, i, k);
      if (cand < best) {
        best = cand;
        bp.type = Pred::move;
        bp.arc = a;
        bp.via = -1;
        bp.foot = y;
      }
    }

    // through a vertex at either end of this arc
    for (int end = 0; end < 2; ++end) {
      long dist = end == 1 ? static_cast<long>(ns - 1 - i) * sigma : static_cast<long>(i) * sigma;
      if (dist == 0 || dist > W.khmax) continue;
      int x = end == 1 ? m.heads[a] : m.tails[a];
      double dep = W.tables[a].depart[end][dist];
      for (auto [b, be] : W.vertex_ends[x]) {
        const auto& app = W.tables[b].approach[be];
        for (int kh = 0; kh <= W.khmax; ++kh) {
          double yb = be == 1 ? (ns - 1) - static_cast<double>(kh) / sigma
                              : static_cast<double>(kh) / sigma;
          if (yb < 0 || yb > ns - 1) break;
          double v = interp_value(prev, m, b, yb);
          if (!(v < kInf)) continue;
          double cand = v + app[kh] + dep;
          if (cand < best) {
            best = cand;
            bp.type = Pred::transit;
            bp.arc = b;
            bp.via = x;
            bp.foot = yb;
          }
        }
      }
    }

    next[gid] = best;
    if (preds) (*preds)[gid] = bp;
  });
}

}  // namespace detail

// Computed space-time value table with backtracking links.
struct ValueGrid {
  GridSpec grid;
  const Network* net = nullptr;
  NodeMap map;
  FluxLimiter limiter;                    // the limiter the grid was solved with
  std::string datum_note;                 // human-readable datum description
  std::vector<std::vector<double>> u;     // [layer][gid]
  std::vector<std::vector<Pred>> preds;   // [layer][gid]; layer 0 unused

  int layers() const { return static_cast<int>(u.size()); }
  double time(int layer) const { return layer * grid.dt; }
  double value(int layer, int arc, int i) const { return u[layer][map.node(arc, i)]; }
  double vertex_value(int layer, int v) const { return u[layer][v]; }
};

// Forward DP from a per-arc initial datum: the discrete Lax-Oleinik value.
inline ValueGrid lax_oleinik(const NetworkLagrangian& NL, const GridSpec& grid,
                             const std::vector<std::function<double(double)>>& u0, double T = -1) {
  const Network& net = NL.network();
  require(u0.size() == net.arcs().size(), errc::precondition_violated,
          "one initial datum per arc required");
  GridSpec g = grid;
  if (T > 0) g.T = T;
  detail::Workspace W = detail::build_workspace(NL, g);

  ValueGrid vg;
  vg.grid = g;
  vg.net = &net;
  vg.map = W.map;
  vg.limiter = NL.flux_limiter();
  vg.datum_note = "per-arc initial datum";
  const int K = g.layers();
  vg.u.assign(K + 1, std::vector<double>(W.map.total, 0.0));
  vg.preds.assign(K + 1, std::vector<Pred>(W.map.total));

  // initial layer; vertex values must agree across incident arcs
  std::vector<char> vset(W.map.V, 0);
  for (size_t a = 0; a < net.arcs().size(); ++a) {
    for (int i = 0; i < g.n_s; ++i) {
      double val = u0[a](i * g.h());
      int gid = W.map.node(static_cast<int>(a), i);
      if (W.map.is_vertex(gid)) {
        if (vset[gid] && std::abs(vg.u[0][gid] - val) > 1e-9)
          fail(errc::inconsistent_datum,
               "initial datum disagrees at vertex '" + net.vertex(gid).id + "' by " +
                   std::to_string(std::abs(vg.u[0][gid] - val)));
        vg.u[0][gid] = val;
        vset[gid] = 1;
      } else {
        vg.u[0][gid] = val;
      }
    }
  }

  for (int k = 1; k <= K; ++k)
    detail::compute_layer(W, vg.u[k - 1], vg.u[k], &vg.preds[k]);
  return vg;
}

inline int snap_to_node(const Network& net, const NodeMap& map, const NetworkPoint& p) {
  int v = net.vertex_at(p);
  if (v >= 0) return v;
  int i = static_cast<int>(std::llround(p.s * (map.ns - 1)));
  i = std::clamp(i, 0, map.ns - 1);
  return map.node(p.arc, i);
}

// Maximum |ds/dt| over the move steps of a curve.
inline double max_parameter_speed(const NetworkCurve& c) {
  double v = 0;
  for (const CurvePiece& p : c.pieces)
    if (p.kind == CurvePiece::Kind::move)
      for (size_t i = 1; i < p.t.size(); ++i)
        v = std::max(v, std::abs(p.s[i] - p.s[i - 1]) / (p.t[i] - p.t[i - 1]));
  return v;
}

namespace detail {

inline int shared_vertex(const Network& net, int arc_a, int arc_b);

// Reconstructs a minimizing curve by walking predecessor links backwards from
// a node. Fractional positions are continued by blending the feet of the two
// neighboring nodes when their transitions agree, otherwise by snapping to
// the nearer node's transition.
inline NetworkCurve backtrack(const Workspace& W, const ValueGrid& vg, int target_gid,
                              int last_layer, double t0) {
  const NodeMap& m = W.map;
  const Network& net = *vg.net;
  struct Seg {
    bool dwell;
    int arc_or_vertex;
    double ta, tb, sa, sb;
  };
  std::vector<Seg> segs;

  bool at_vertex = m.is_vertex(target_gid);
  int cur_arc = -1;
  double cur_y = 0;
  int cur_vertex = -1;
  if (at_vertex) {
    cur_vertex = target_gid;
  } else {
    for (size_t a = 0; a < m.offset.size(); ++a) {
      int lo = m.offset[a], hi = lo + m.ns - 2;
      if (target_gid >= lo && target_gid < hi) {
        cur_arc = static_cast<int>(a);
        cur_y = target_gid - lo + 1;
        break;
      }
    }
  }

  for (int k = last_layer; k >= 1; --k) {
    double tb = t0 + k * W.dt, ta = tb - W.dt;
    Pred p;
    if (at_vertex) {
      p = vg.preds[k][cur_vertex];
    } else {
      int j = static_cast<int>(std::floor(cur_y + 1e-12));
      double w = cur_y - j;
      if (j >= m.ns - 1) {
        j = m.ns - 2;
        w = 1;
      }
      const Pred& p1 = vg.preds[k][m.node(cur_arc, j)];
      const Pred& p2 = vg.preds[k][m.node(cur_arc, j + 1)];
      if (w <= 1e-9) {
        p = p1;
      } else if (w >= 1 - 1e-9) {
        p = p2;
      } else if (p1.type == Pred::move && p2.type == Pred::move && p1.arc == p2.arc &&
                 p1.arc == cur_arc) {
        p = p1;
        p.foot = (1 - w) * p1.foot + w * p2.foot;
      } else {
        p = w < 0.5 ? p1 : p2;
      }
    }

    switch (p.type) {
      case Pred::stay: {
        if (at_vertex) {
          segs.push_back({true, cur_vertex, ta, tb, 0, 0});
          break;
        }
        // snapped onto a vertex node that dwelled: leave the vertex over this
        // step and continue the walk from there
        int e = cur_y < 0.5 * (m.ns - 1) ? 0 : m.ns - 1;
        int x = e == 0 ? m.tails[cur_arc] : m.heads[cur_arc];
        segs.push_back({false, cur_arc, ta, tb, e == 0 ? 0.0 : 1.0, cur_y * W.h});
        at_vertex = true;
        cur_vertex = x;
        cur_arc = -1;
        break;
      }
      case Pred::move: {
        double end_s = at_vertex ? (net.arc(p.arc).head == cur_vertex ? 1.0 : 0.0)
                                 : cur_y * W.h;
        if (!at_vertex && p.arc != cur_arc) {
          // transition recorded at a vertex-adjacent node of another arc:
          // route through the shared vertex at mid-step
          int x = shared_vertex(net, p.arc, cur_arc);
          double xe_new = net.arc(cur_arc).head == x ? 1.0 : 0.0;
          double xe_old = net.arc(p.arc).head == x ? 1.0 : 0.0;
          segs.push_back({false, cur_arc, ta + W.dt / 2, tb, xe_new, end_s});
          segs.push_back({false, p.arc, ta, ta + W.dt / 2, p.foot * W.h, xe_old});
        } else {
          segs.push_back({false, p.arc, ta, tb, p.foot * W.h, end_s});
        }
        at_vertex = false;
        cur_arc = p.arc;
        cur_y = p.foot;
        cur_vertex = -1;
        break;
      }
      case Pred::transit: {
        double end_s = cur_y * W.h;
        double xe_target = net.arc(cur_arc).head == p.via ? 1.0 : 0.0;
        double xe_foot = net.arc(p.arc).head == p.via ? 1.0 : 0.0;
        segs.push_back({false, cur_arc, ta + W.dt / 2, tb, xe_target, end_s});
        segs.push_back({false, p.arc, ta, ta + W.dt / 2, p.foot * W.h, xe_foot});
        at_vertex = false;
        cur_arc = p.arc;
        cur_y = p.foot;
        cur_vertex = -1;
        break;
      }
      case Pred::none:
        fail(errc::precondition_violated, "backtracking hit an unreachable node");
    }
  }

  std::reverse(segs.begin(), segs.end());
  NetworkCurve c;
  for (const Seg& s : segs) {
    if (s.dwell) {
      if (!c.pieces.empty() && c.pieces.back().kind == CurvePiece::Kind::dwell &&
          c.pieces.back().vertex == s.arc_or_vertex)
        c.pieces.back().t[1] = s.tb;
      else
        c.pieces.push_back(CurvePiece::make_dwell(s.arc_or_vertex, s.ta, s.tb));
    } else {
      if (!c.pieces.empty() && c.pieces.back().kind == CurvePiece::Kind::move &&
          c.pieces.back().arc == s.arc_or_vertex &&
          std::abs(c.pieces.back().t.back() - s.ta) < 1e-12) {
        c.pieces.back().t.push_back(s.tb);
        c.pieces.back().s.push_back(s.sb);
      } else {
        c.pieces.push_back(
            CurvePiece::make_move(s.arc_or_vertex, {s.ta, s.tb}, {s.sa, s.sb}));
      }
    }
  }
  return c;
}

inline int shared_vertex(const Network& net, int arc_a, int arc_b) {
  const Arc& a = net.arc(arc_a);
  const Arc& b = net.arc(arc_b);
  if (a.tail == b.tail || a.tail == b.head) return a.tail;
  if (a.head == b.tail || a.head == b.head) return a.head;
  fail(errc::precondition_violated, "arcs share no vertex");
}

}  // namespace detail

struct MinimalActionResult {
  double value = 0;
  NetworkCurve minimizer;
  NetworkPoint snapped_from, snapped_to;
};

// Minimal action S(x, t, y, r): DP seeded at the node nearest to x at time t,
// swept to time r. The minimizer is backtracked, then passed through the
// admissible reduction so the returned curve is admissible.
inline MinimalActionResult minimal_action(const NetworkLagrangian& NL, const GridSpec& grid,
                                          const NetworkPoint& x, double t, const NetworkPoint& y,
                                          double r) {
  require(r > t, errc::bad_horizon, "minimal action needs r > t");
  const Network& net = NL.network();
  GridSpec g = grid;
  int K = std::max(1, static_cast<int>(std::llround((r - t) / grid.dt)));
  g.dt = (r - t) / K;
  g.T = r - t;
  detail::Workspace W = detail::build_workspace(NL, g);

  ValueGrid vg;
  vg.grid = g;
  vg.net = &net;
  vg.map = W.map;
  vg.limiter = NL.flux_limiter();
  vg.datum_note = "point source";
  vg.u.assign(K + 1, std::vector<double>(W.map.total, detail::kInf));
  vg.preds.assign(K + 1, std::vector<Pred>(W.map.total));

  int src = snap_to_node(net, W.map, x);
  int dst = snap_to_node(net, W.map, y);
  vg.u[0][src] = 0;
  for (int k = 1; k <= K; ++k)
    detail::compute_layer(W, vg.u[k - 1], vg.u[k], &vg.preds[k]);

  MinimalActionResult out;
  out.value = vg.u[K][dst];
  auto unsnap = [&](int gid, const NetworkPoint& orig) -> NetworkPoint {
    if (W.map.is_vertex(gid)) return net.point_at_vertex(gid);
    for (size_t a = 0; a < W.map.offset.size(); ++a) {
      int lo = W.map.offset[a], hi = lo + W.map.ns - 2;
      if (gid >= lo && gid < hi)
        return {static_cast<int>(a), (gid - lo + 1) * g.h()};
    }
    return orig;
  };
  out.snapped_from = unsnap(src, x);
  out.snapped_to = unsnap(dst, y);
  NetworkCurve raw = detail::backtrack(W, vg, dst, K, t);
  out.minimizer = make_admissible(NL, raw);
  return out;
}

struct ConvergenceReport {
  double coarse = 0, mid = 0, fine = 0;
  double order = 0;  // log2 of successive difference ratios
};

// Richardson-style convergence estimate for S from three nested grid levels.
inline ConvergenceReport minimal_action_convergence(const NetworkLagrangian& NL,
                                                    const GridSpec& grid, const NetworkPoint& x,
                                                    double t, const NetworkPoint& y, double r) {
  ConvergenceReport rep;
  GridSpec g = grid;
  rep.coarse = minimal_action(NL, g, x, t, y, r).value;
  g.n_s = 2 * g.n_s - 1;
  g.dt /= 2;
  rep.mid = minimal_action(NL, g, x, t, y, r).value;
  g.n_s = 2 * g.n_s - 1;
  g.dt /= 2;
  rep.fine = minimal_action(NL, g, x, t, y, r).value;
  double d1 = std::abs(rep.coarse - rep.mid), d2 = std::abs(rep.mid - rep.fine);
  rep.order = d2 > 0 ? std::log2(d1 / d2) : std::numeric_limits<double>::infinity();
  return rep;
}

// Backtrack the Lax-Oleinik minimizer reaching (p, at layer) from t = 0.
inline NetworkCurve backtrack_minimizer(const NetworkLagrangian& NL, const ValueGrid& vg,
                                        const NetworkPoint& p, int layer) {
  detail::Workspace W = detail::build_workspace(NL, vg.grid);
  int gid = snap_to_node(*vg.net, vg.map, p);
  NetworkCurve raw = detail::backtrack(W, vg, gid, layer, 0.0);
  return make_admissible(NL, raw);
}

// Largest absolute one-step DP defect over the stored grid. The scheme's
// fixed point makes this vanish identically up to floating-point noise.
inline double dpp_residual(const NetworkLagrangian& NL, const ValueGrid& vg) {
  detail::Workspace W = detail::build_workspace(NL, vg.grid);
  double worst = 0;
  std::vector<double> recomputed(vg.map.total);
  for (int k = 1; k < vg.layers(); ++k) {
    detail::compute_layer(W, vg.u[k - 1], recomputed, nullptr);
    for (int n = 0; n < vg.map.total; ++n) {
      double a = vg.u[k][n], b = recomputed[n];
      if (!(a < detail::kInf) && !(b < detail::kInf)) continue;
      worst = std::max(worst, std::abs(a - b));
    }
  }
  return worst;
}

// Writes `arc,s,t,u[,pred]` rows with 12 significant digits.
inline void export_table(std::ostream& os, const ValueGrid& vg, bool with_pred = false) {
  const Network& net = *vg.net;
  os << (with_pred ? "arc,s,t,u,pred\n" : "arc,s,t,u\n") << std::setprecision(12);
  for (int k = 0; k < vg.layers(); ++k)
    for (size_t a = 0; a < net.arcs().size(); ++a)
      for (int i = 0; i < vg.grid.n_s; ++i) {
        os << net.arc(static_cast<int>(a)).id << ',' << i * vg.grid.h() << ',' << vg.time(k)
           << ',' << vg.value(k, static_cast<int>(a), i);
        if (with_pred) {
          Pred p = vg.preds[k].empty() ? Pred{} : vg.preds[k][vg.map.node(static_cast<int>(a), i)];
          os << ',';
          if (k == 0 || p.type == Pred::none)
            os << '-';
          else if (p.type == Pred::stay)
            os << "stay";
          else
            os << net.arc(p.arc).id << ':' << p.foot * vg.grid.h();
        }
        os << '\n';
      }
}

// ---------------------------------------------------------------------------
// Single-arc boundary problems on Q = (0,1) x (0,T)

struct SingleArcValue {
  int n_s = 0;
  double dt = 0, T = 0;
  std::vector<std::vector<double>> u;  // [layer][node]
  double h() const { return 1.0 / (n_s - 1); }
  int layers() const { return static_cast<int>(u.size()); }
};

namespace detail {

// Shared sweep for the Dirichlet problems; `faces` selects which lateral
// faces re-inject the boundary datum every layer (bit 0: s=0, bit 1: s=1).
inline SingleArcValue single_arc_sweep(const ArcLagrangian& L,
                                       const std::function<double(double, double)>& g,
                                       const GridSpec& grid, int faces) {
  grid.validate();
  SingleArcValue out;
  out.n_s = grid.n_s;
  out.dt = grid.dt;
  out.T = grid.T;
  const int K = grid.layers();
  const int ns = grid.n_s;
  const double h = grid.h(), hs = h / grid.sub;
  const int sigma = grid.sub;
  long node_reach =
      std::max<long>(1, static_cast<long>(std::ceil(grid.speed_cap() * grid.dt / h - 1e-9)));
  long kmax = std::min<long>(node_reach * sigma, static_cast<long>(grid.reach) * sigma);

  const bool s_const = L.s_constant();
  const int menu = static_cast<int>(2 * kmax + 1);
  std::vector<double> cost;
  if (s_const) {
    cost.resize(menu);
    for (long k = -kmax; k <= kmax; ++k) cost[k + kmax] = grid.dt * L(0.5, k * hs / grid.dt);
  } else {
    cost.resize(static_cast<size_t>(ns) * menu);
    for (int i = 0; i < ns; ++i)
      for (long k = -kmax; k <= kmax; ++k)
        cost[static_cast<size_t>(i) * menu + k + kmax] =
            grid.dt * L(std::clamp(i * h - 0.5 * k * hs, 0.0, 1.0), k * hs / grid.dt);
  }
  auto C = [&](int i, long k) { return s_const ? cost[k + kmax] : cost[static_cast<size_t>(i) * menu + k + kmax]; };

  out.u.assign(K + 1, std::vector<double>(ns));
  for (int i = 0; i < ns; ++i) out.u[0][i] = g(i * h, 0.0);

  for (int k = 1; k <= K; ++k) {
    const std::vector<double>& up = out.u[k - 1];
    std::vector<double>& un = out.u[k];
    for (int i = 0; i < ns; ++i) {
      double best = C(i, 0) + up[i];
      long klo = std::max(-kmax, (static_cast<long>(i) - (ns - 1)) * sigma);
      long khi = std::min(kmax, static_cast<long>(i) * sigma);
      for (long kk = klo; kk <= khi; ++kk) {
        if (kk == 0) continue;
        double y = i - static_cast<double>(kk) / sigma;
        int j = static_cast<int>(std::floor(y));
        double w = y - j;
        if (j < 0) {
          j = 0;
          w = 0;
        }
        if (j >= ns - 1) {
          j = ns - 2;
          w = 1;
        }
        double v = w <= 1e-12 ? up[j] : (w >= 1 - 1e-12 ? up[j + 1] : (1 - w) * up[j] + w * up[j + 1]);
        double cand = v + C(i, kk);
        if (cand < best) best = cand;
      }
      un[i] = best;
    }
    double t = k * grid.dt;
    if (faces & 1) un[0] = std::min(un[0], g(0.0, t));
    if (faces & 2) un[ns - 1] = std::min(un[ns - 1], g(1.0, t));
  }
  return out;
}

}  // namespace detail

// Value with data on the whole parabolic boundary (initial face and both
// lateral faces).
inline SingleArcValue single_arc_value_V(const ArcLagrangian& L,
                                         const std::function<double(double, double)>& g,
                                         const GridSpec& grid) {
  return detail::single_arc_sweep(L, g, grid, 3);
}

// Value with data only on the initial face and the s=0 lateral face; the
// right edge is state-constrained.
inline SingleArcValue single_arc_value_W(const ArcLagrangian& L,
                                         const std::function<double(double, double)>& g,
                                         const GridSpec& grid) {
  return detail::single_arc_sweep(L, g, grid, 1);
}

// ---------------------------------------------------------------------------
// Exhaustive oracle on tiny instances

struct BruteForceOptions {
  int max_breakpoints = 2;
  int pos_stride = 0;   // candidate positions every this many nodes; 0 = auto
  int time_stride = 0;  // candidate breakpoint times every this many layers; 0 = auto
  long max_candidates = 200000;
};

namespace detail {

struct RouteLeg {
  int arc;
  int i0, i1;  // node indices, traversal i0 -> i1
  int nodes() const { return std::abs(i1 - i0); }
};

// Node-aligned geodesic route between two grid nodes.
inline std::vector<RouteLeg> node_route(const Network& net, const NodeMap& m, int gid_a,
                                        int gid_b) {
  auto to_point = [&](int gid) -> NetworkPoint {
    if (m.is_vertex(gid)) return net.point_at_vertex(gid);
    for (size_t a = 0; a < m.offset.size(); ++a) {
      int lo = m.offset[a], hi = lo + m.ns - 2;
      if (gid >= lo && gid < hi) return {static_cast<int>(a), (gid - lo + 1) * 1.0 / (m.ns - 1)};
    }
    fail(errc::precondition_violated, "bad node id");
  };
  GeodesicPath path;
  net.geodesic_distance(to_point(gid_a), to_point(gid_b), &path);
  std::vector<RouteLeg> legs;
  for (const auto& l : path.legs) {
    int i0 = static_cast<int>(std::llround(l.s0 * (m.ns - 1)));
    int i1 = static_cast<int>(std::llround(l.s1 * (m.ns - 1)));
    if (i0 == i1) continue;
    legs.push_back({l.arc, i0, i1});
  }
  return legs;
}

}  // namespace detail

struct BruteForceResult {
  double value = detail::kInf;
  long evaluated = 0;
};

// Exhaustive minimization over curves with at most `max_breakpoints` interior
// breakpoints on a coarse space-time lattice. Between waypoints the curve
// moves through the node route with near-uniform per-step node displacements
// and lands exactly on intermediate vertices, so every candidate is a chain
// of one-step DP transitions; the result is an upper bound for the DP value.
inline BruteForceResult brute_force_minimal_action(const NetworkLagrangian& NL,
                                                   const GridSpec& grid, const NetworkPoint& x,
                                                   const NetworkPoint& y, double T,
                                                   const BruteForceOptions& opt = {}) {
  const Network& net = NL.network();
  require(net.arcs().size() <= 3, errc::instance_too_large,
          "brute force oracle is limited to at most 3 arcs");
  require(opt.max_breakpoints <= 4, errc::instance_too_large,
          "brute force oracle is limited to at most 4 breakpoints");
  GridSpec g = grid;
  int K = std::max(1, static_cast<int>(std::llround(T / grid.dt)));
  g.dt = T / K;
  g.T = T;
  detail::Workspace W = detail::build_workspace(NL, g);
  const NodeMap& m = W.map;

  const int src = snap_to_node(net, m, x);
  const int dst = snap_to_node(net, m, y);

  // lattice strides: as given, or widened until the enumeration fits
  int pos_stride = opt.pos_stride > 0 ? opt.pos_stride : 4;
  int time_stride = opt.time_stride > 0 ? opt.time_stride : 2;
  if (opt.pos_stride == 0 || opt.time_stride == 0) {
    for (int guard = 0; guard < 16; ++guard) {
      double P = net.vertices().size() +
                 net.arcs().size() * std::max(0, (m.ns - 2) / pos_stride);
      double Tn = std::max(0, (K - 1) / time_stride);
      double count = 1;
      for (int q = 0; q < opt.max_breakpoints; ++q) count *= (Tn - q) / (q + 1) * P;
      if (count <= static_cast<double>(opt.max_candidates)) break;
      if (guard % 2 == 0)
        pos_stride *= 2;
      else
        time_stride *= 2;
    }
  }

  // candidate waypoint positions: vertices plus strided interior nodes
  std::vector<int> positions;
  for (int v = 0; v < m.V; ++v) positions.push_back(v);
  for (size_t a = 0; a < net.arcs().size(); ++a)
    for (int i = pos_stride; i < m.ns - 1; i += pos_stride)
      positions.push_back(m.node(static_cast<int>(a), i));
  // candidate breakpoint layers
  std::vector<int> times;
  for (int k = time_stride; k < K; k += time_stride) times.push_back(k);

  // cost of one step: target node gid at index (arc,i), from node j on arc
  auto step_cost = [&](int arc, int i_from, int i_to) {
    return W.full_cost(arc, i_to, (i_to - i_from) * W.sigma);
  };
  auto stay_cost = [&](int gid) {
    if (m.is_vertex(gid)) return NL.limiter(gid) * W.dt;
    for (size_t a = 0; a < m.offset.size(); ++a) {
      int lo = m.offset[a], hi = lo + m.ns - 2;
      if (gid >= lo && gid < hi) return W.full_cost(static_cast<int>(a), gid - lo + 1, 0);
    }
    fail(errc::precondition_violated, "bad node id");
  };

  // realize one segment: gid_a at layer ka -> gid_b at layer kb
  auto segment_cost = [&](int gid_a, int gid_b, int steps) -> double {
    if (steps <= 0) return gid_a == gid_b ? 0.0 : detail::kInf;
    if (gid_a == gid_b) {
      double c = 0;
      for (int s = 0; s < steps; ++s) c += stay_cost(gid_a);
      return c;
    }
    auto legs = detail::node_route(net, m, gid_a, gid_b);
    int total_nodes = 0;
    for (const auto& l : legs) total_nodes += l.nodes();
    if (total_nodes == 0) return detail::kInf;
    if (static_cast<int>(legs.size()) > steps) return detail::kInf;
    // allocate steps to legs proportionally, at least one per leg
    std::vector<int> alloc(legs.size(), 1);
    long left = steps - static_cast<long>(legs.size());
    for (size_t l = 0; l < legs.size() && left > 0; ++l) {
      long extra = std::min<long>(left, std::lround(static_cast<double>(legs[l].nodes()) * (steps - static_cast<int>(legs.size())) / total_nodes));
      alloc[l] += static_cast<int>(extra);
      left -= extra;
    }
    for (size_t l = 0; left > 0; l = (l + 1) % legs.size()) {
      ++alloc[l];
      --left;
    }
    double c = 0;
    for (size_t l = 0; l < legs.size(); ++l) {
      const auto& leg = legs[l];
      int D = leg.i1 - leg.i0;
      int n = alloc[l];
      int prev = leg.i0;
      for (int sstep = 1; sstep <= n; ++sstep) {
        int cum = leg.i0 + static_cast<int>(std::llround(static_cast<double>(D) * sstep / n));
        int delta = cum - prev;
        if (std::abs(delta) * W.sigma > W.kmax) return detail::kInf;
        if (delta == 0)
          c += stay_cost(m.node(leg.arc, prev));
        else
          c += step_cost(leg.arc, prev, cum);
        prev = cum;
      }
    }
    return c;
  };

  BruteForceResult out;
  const int P = static_cast<int>(positions.size());
  const int Tn = static_cast<int>(times.size());

  // enumerate breakpoint counts
  std::vector<int> tpick, ppick;
  for (int j = 0; j <= opt.max_breakpoints; ++j) {
    // rough candidate count guard
    double count = 1;
    for (int q = 0; q < j; ++q) count *= static_cast<double>(Tn - q) / (q + 1) * P;
    if (count > static_cast<double>(opt.max_candidates))
      fail(errc::instance_too_large, "brute force lattice too large; reduce breakpoints/strides");

    tpick.assign(j, 0);
    ppick.assign(j, 0);
    std::function<void(int, int)> rec_t = [&](int slot, int from) {
      if (slot == j) {
        // enumerate positions for each breakpoint
        std::function<void(int)> rec_p = [&](int pslot) {
          if (pslot == j) {
            double c = 0;
            int gid = src;
            int layer = 0;
            for (int b = 0; b < j && c < detail::kInf; ++b) {
              c += segment_cost(gid, positions[ppick[b]], times[tpick[b]] - layer);
              gid = positions[ppick[b]];
              layer = times[tpick[b]];
            }
            if (c < detail::kInf) c += segment_cost(gid, dst, K - layer);
            ++out.evaluated;
            if (c < out.value) out.value = c;
            return;
          }
          for (int p = 0; p < P; ++p) {
            ppick[pslot] = p;
            rec_p(pslot + 1);
          }
        };
        rec_p(0);
        return;
      }
      for (int ti = from; ti < Tn; ++ti) {
        tpick[slot] = ti;
        rec_t(slot + 1, ti + 1);
      }
    };
    rec_t(0, 0);
  }
  return out;
}

}  // namespace hjnet
