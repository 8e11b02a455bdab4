#pragma once

// Embedded network: arcs given as dense polylines over the parameter interval
// [0,1], vertices shared between arc endpoints, geodesic metric.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "hjnet/errors.hpp"

namespace hjnet {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double r = 0;
  for (size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
  return r;
}
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
inline double dist(const Vec& a, const Vec& b) {
  double r = 0;
  for (size_t i = 0; i < a.size(); ++i) r += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(r);
}

struct VertexSpec {
  std::string id;
  Vec position;
};

struct ArcSpec {
  std::string id;
  std::string tail;  // vertex at parameter 0
  std::string head;  // vertex at parameter 1
  std::vector<Vec> polyline;
};

struct BuildOptions {
  double vertex_snap_tol = 1e-9;
  // Interior proximity threshold as a fraction of the network diameter.
  double intersection_rel_tol = 1e-6;
  bool check_intersections = true;
};

// One oriented arc. Samples sit at s_i = i/(P-1); tangents are d(gamma)/ds by
// central differences, one-sided at the endpoints.
struct Arc {
  std::string id;
  int index = -1;
  int tail = -1;
  int head = -1;
  std::vector<Vec> pts;
  std::vector<Vec> tan;
  std::vector<double> cumlen;  // arclength from s=0 to s_i
  double speed_floor = 0;

  int samples() const { return static_cast<int>(pts.size()); }
  double length() const { return cumlen.back(); }

  Vec point_at(double s) const { return interp(pts, s); }
  Vec tangent_at(double s) const { return interp(tan, s); }

  double arclen_to(double s) const {
    const int n = samples();
    double x = std::clamp(s, 0.0, 1.0) * (n - 1);
    int j = std::min(static_cast<int>(x), n - 2);
    double w = x - j;
    return cumlen[j] + w * (cumlen[j + 1] - cumlen[j]);
  }
  double arclen_between(double s0, double s1) const {
    return std::abs(arclen_to(s1) - arclen_to(s0));
  }

 private:
  Vec interp(const std::vector<Vec>& a, double s) const {
    const int n = samples();
    double x = std::clamp(s, 0.0, 1.0) * (n - 1);
    int j = std::min(static_cast<int>(x), n - 2);
    double w = x - j;
    Vec r(a[j].size());
    for (size_t d = 0; d < r.size(); ++d) r[d] = (1 - w) * a[j][d] + w * a[j + 1][d];
    return r;
  }
};

struct Vertex {
  std::string id;
  Vec position;
};

// A point on the network in arc coordinates. Points with s in {0,1} are
// identified with the corresponding vertex, so equality is well defined
// across incident arcs.
struct NetworkPoint {
  int arc = -1;
  double s = 0;
};

struct GeodesicLeg {
  int arc;
  double s0, s1;  // traversal direction given by the order
};

struct GeodesicPath {
  std::vector<GeodesicLeg> legs;
  double length = 0;
};

class Network {
 public:
  static Network build(const std::vector<VertexSpec>& vertices,
                       const std::vector<ArcSpec>& arcs, const BuildOptions& opt = {});

  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const Arc& arc(int i) const { return arcs_[i]; }
  const Vertex& vertex(int i) const { return vertices_[i]; }

  int arc_index(const std::string& id) const {
    auto it = arc_by_id_.find(id);
    require(it != arc_by_id_.end(), errc::unknown_arc, "no arc named '" + id + "'");
    return it->second;
  }
  int vertex_index(const std::string& id) const {
    auto it = vertex_by_id_.find(id);
    require(it != vertex_by_id_.end(), errc::unknown_vertex, "no vertex named '" + id + "'");
    return it->second;
  }

  const std::vector<int>& incident_arcs(int vertex) const { return incidence_[vertex]; }

  // Arcs oriented to end at the given vertex: (arc index, reversed?).
  // Forward arcs whose head is x, plus the reversals of those with tail x.
  std::vector<std::pair<int, bool>> arcs_into(int vertex) const {
    std::vector<std::pair<int, bool>> out;
    for (int a : incidence_[vertex]) {
      if (arcs_[a].head == vertex) out.emplace_back(a, false);
      if (arcs_[a].tail == vertex) out.emplace_back(a, true);
    }
    return out;
  }

  double m() const { return m_; }
  double diameter() const { return diameter_; }
  double snap_tol() const { return snap_tol_; }

  // Vertex index of a point sitting at an arc endpoint, -1 for interior.
  int vertex_at(const NetworkPoint& p) const {
    check_point(p);
    if (p.s <= endpoint_tol_) return arcs_[p.arc].tail;
    if (p.s >= 1 - endpoint_tol_) return arcs_[p.arc].head;
    return -1;
  }

  bool same_point(const NetworkPoint& a, const NetworkPoint& b) const {
    int va = vertex_at(a), vb = vertex_at(b);
    if (va >= 0 || vb >= 0) return va == vb;
    return a.arc == b.arc && std::abs(a.s - b.s) <= endpoint_tol_;
  }

  Vec position(const NetworkPoint& p) const {
    check_point(p);
    return arcs_[p.arc].point_at(p.s);
  }

  NetworkPoint point_at_vertex(int vertex) const {
    require(!incidence_[vertex].empty(), errc::unknown_vertex, "isolated vertex");
    int a = incidence_[vertex].front();
    return {a, arcs_[a].tail == vertex ? 0.0 : 1.0};
  }

  double geodesic_distance(const NetworkPoint& x, const NetworkPoint& y,
                           GeodesicPath* path = nullptr) const;

  double vertex_distance(int v, int w) const { return vdist_[v][w]; }

  double pullback_velocity(int arc, double s, const Vec& q, double ang_tol = 1e-8) const {
    const Arc& a = arcs_.at(arc);
    Vec t = a.tangent_at(s);
    double t2 = dot(t, t);
    double lam = dot(q, t) / t2;
    // residual of q against the tangent line
    double r2 = dot(q, q) - lam * lam * t2;
    double qn = norm(q);
    if (qn > 0 && std::sqrt(std::max(0.0, r2)) > ang_tol * qn)
      fail(errc::not_tangent, "vector not tangent to arc '" + a.id + "' at s=" + std::to_string(s));
    return lam;
  }

  Arc reversed(int arc) const {
    const Arc& a = arcs_.at(arc);
    Arc r;
    r.id = a.id + "~";
    r.index = -1;
    r.tail = a.head;
    r.head = a.tail;
    const int n = a.samples();
    r.pts.resize(n);
    r.tan.resize(n);
    for (int i = 0; i < n; ++i) {
      r.pts[i] = a.pts[n - 1 - i];
      r.tan[i] = a.tan[n - 1 - i];
      for (double& c : r.tan[i]) c = -c;
    }
    r.cumlen.resize(n);
    r.cumlen[0] = 0;
    for (int i = 1; i < n; ++i) r.cumlen[i] = r.cumlen[i - 1] + dist(r.pts[i - 1], r.pts[i]);
    r.speed_floor = a.speed_floor;
    return r;
  }

 private:
  void check_point(const NetworkPoint& p) const {
    require(p.arc >= 0 && p.arc < static_cast<int>(arcs_.size()), errc::invalid_point,
            "arc index out of range");
    require(p.s >= -endpoint_tol_ && p.s <= 1 + endpoint_tol_, errc::invalid_point,
            "parameter outside [0,1]");
  }

  void compute_vertex_distances();

  std::vector<Arc> arcs_;
  std::vector<Vertex> vertices_;
  std::vector<std::vector<int>> incidence_;
  std::map<std::string, int> arc_by_id_;
  std::map<std::string, int> vertex_by_id_;
  std::vector<std::vector<double>> vdist_;
  std::vector<std::vector<int>> vnext_arc_;  // first arc on a shortest path v->w
  double m_ = 0;
  double diameter_ = 0;
  double snap_tol_ = 1e-9;
  double endpoint_tol_ = 1e-12;
};

inline Network Network::build(const std::vector<VertexSpec>& vspecs,
                              const std::vector<ArcSpec>& aspecs, const BuildOptions& opt) {
  require(!aspecs.empty(), errc::invalid_point, "network needs at least one arc");
  Network net;
  net.snap_tol_ = opt.vertex_snap_tol;
  for (const auto& v : vspecs) {
    require(net.vertex_by_id_.count(v.id) == 0, errc::parse_error,
            "duplicate vertex id '" + v.id + "'");
    net.vertex_by_id_[v.id] = static_cast<int>(net.vertices_.size());
    net.vertices_.push_back({v.id, v.position});
  }
  net.incidence_.resize(net.vertices_.size());

  for (const auto& spec : aspecs) {
    require(net.arc_by_id_.count(spec.id) == 0, errc::parse_error,
            "duplicate arc id '" + spec.id + "'");
    require(spec.polyline.size() >= 2, errc::degenerate_arc,
            "arc '" + spec.id + "' needs at least two polyline points");
    Arc a;
    a.id = spec.id;
    a.index = static_cast<int>(net.arcs_.size());
    a.tail = net.vertex_index(spec.tail);
    a.head = net.vertex_index(spec.head);
    if (a.tail == a.head)
      fail(errc::loop_arc, "arc '" + spec.id + "' has identical endpoints");
    require(dist(spec.polyline.front(), net.vertices_[a.tail].position) <= opt.vertex_snap_tol,
            errc::invalid_point, "arc '" + spec.id + "' does not start at vertex '" + spec.tail + "'");
    require(dist(spec.polyline.back(), net.vertices_[a.head].position) <= opt.vertex_snap_tol,
            errc::invalid_point, "arc '" + spec.id + "' does not end at vertex '" + spec.head + "'");
    a.pts = spec.polyline;
    a.pts.front() = net.vertices_[a.tail].position;
    a.pts.back() = net.vertices_[a.head].position;

    const int n = a.samples();
    const double ds = 1.0 / (n - 1);
    a.tan.resize(n);
    for (int i = 0; i < n; ++i) {
      int lo = std::max(0, i - 1), hi = std::min(n - 1, i + 1);
      Vec t(a.pts[i].size());
      for (size_t d = 0; d < t.size(); ++d)
        t[d] = (a.pts[hi][d] - a.pts[lo][d]) / ((hi - lo) * ds);
      a.tan[i] = std::move(t);
    }
    a.cumlen.resize(n);
    a.cumlen[0] = 0;
    for (int i = 1; i < n; ++i) {
      double seg = dist(a.pts[i - 1], a.pts[i]);
      if (seg == 0)
        fail(errc::degenerate_arc, "arc '" + spec.id + "' repeats a polyline point");
      a.cumlen[i] = a.cumlen[i - 1] + seg;
    }
    a.speed_floor = std::numeric_limits<double>::infinity();
    for (const Vec& t : a.tan) a.speed_floor = std::min(a.speed_floor, norm(t));
    if (a.speed_floor <= 0)
      fail(errc::degenerate_arc, "arc '" + spec.id + "' has vanishing tangent");

    net.incidence_[a.tail].push_back(a.index);
    net.incidence_[a.head].push_back(a.index);
    net.arc_by_id_[a.id] = a.index;
    net.arcs_.push_back(std::move(a));
  }

  net.m_ = std::numeric_limits<double>::infinity();
  for (const Arc& a : net.arcs_) net.m_ = std::min(net.m_, a.speed_floor);

  // connectivity over the vertex graph
  {
    std::vector<char> seen(net.vertices_.size(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int ai : net.incidence_[v]) {
        int w = net.arcs_[ai].tail == v ? net.arcs_[ai].head : net.arcs_[ai].tail;
        if (!seen[w]) {
          seen[w] = 1;
          q.push(w);
        }
      }
    }
    for (size_t v = 0; v < seen.size(); ++v)
      if (!seen[v])
        fail(errc::disconnected, "vertex '" + net.vertices_[v].id + "' is unreachable");
  }

  // bounding-box diameter, used to scale the proximity threshold
  {
    Vec lo = net.arcs_[0].pts[0], hi = lo;
    for (const Arc& a : net.arcs_)
      for (const Vec& p : a.pts)
        for (size_t d = 0; d < p.size(); ++d) {
          lo[d] = std::min(lo[d], p[d]);
          hi[d] = std::max(hi[d], p[d]);
        }
    double r = 0;
    for (size_t d = 0; d < lo.size(); ++d) r += (hi[d] - lo[d]) * (hi[d] - lo[d]);
    net.diameter_ = std::sqrt(r);
  }

  if (opt.check_intersections) {
    // Sample-based proximity scan. Samples close to a shared vertex are
    // exempt: arcs meeting there are legitimately close.
    const double thresh = opt.intersection_rel_tol * std::max(net.diameter_, 1e-300);
    for (size_t ia = 0; ia < net.arcs_.size(); ++ia) {
      const Arc& A = net.arcs_[ia];
      for (size_t ib = ia + 1; ib < net.arcs_.size(); ++ib) {
        const Arc& B = net.arcs_[ib];
        bool share_tail_a = (A.tail == B.tail || A.tail == B.head);
        bool share_head_a = (A.head == B.tail || A.head == B.head);
        const double excl = std::max(0.02, 4 * thresh / std::max(A.length(), B.length()));
        for (int i = 1; i + 1 < A.samples(); ++i) {
          double sa = static_cast<double>(i) / (A.samples() - 1);
          if ((share_tail_a && sa < excl) || (share_head_a && sa > 1 - excl)) continue;
          for (int j = 0; j < B.samples(); ++j) {
            double sb = static_cast<double>(j) / (B.samples() - 1);
            if ((B.tail == A.tail || B.tail == A.head) && sb < excl) continue;
            if ((B.head == A.tail || B.head == A.head) && sb > 1 - excl) continue;
            if (dist(A.pts[i], B.pts[j]) < thresh)
              fail(errc::interior_intersection,
                   "arcs '" + A.id + "' and '" + B.id + "' pass within tolerance of each other");
          }
        }
      }
    }
  }

  net.compute_vertex_distances();
  return net;
}

inline void Network::compute_vertex_distances() {
  const int V = static_cast<int>(vertices_.size());
  const double inf = std::numeric_limits<double>::infinity();
  vdist_.assign(V, std::vector<double>(V, inf));
  vnext_arc_.assign(V, std::vector<int>(V, -1));
  for (int src = 0; src < V; ++src) {
    auto& d = vdist_[src];
    std::vector<int> pred_arc(V, -1), pred_v(V, -1);
    d[src] = 0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(0.0, src);
    while (!pq.empty()) {
      auto [dv, v] = pq.top();
      pq.pop();
      if (dv > d[v]) continue;
      for (int ai : incidence_[v]) {
        int w = arcs_[ai].tail == v ? arcs_[ai].head : arcs_[ai].tail;
        double nd = dv + arcs_[ai].length();
        if (nd < d[w]) {
          d[w] = nd;
          pred_arc[w] = ai;
          pred_v[w] = v;
          pq.emplace(nd, w);
        }
      }
    }
    // first arc on the path src -> w, recovered by walking predecessors back
    for (int w = 0; w < V; ++w) {
      if (w == src || !(d[w] < inf)) continue;
      int cur = w;
      while (pred_v[cur] != src) cur = pred_v[cur];
      vnext_arc_[src][w] = pred_arc[cur];
    }
  }
}

inline double Network::geodesic_distance(const NetworkPoint& x, const NetworkPoint& y,
                                         GeodesicPath* path) const {
  check_point(x);
  check_point(y);
  if (path) *path = {};
  if (same_point(x, y)) {
    if (path && vertex_at(x) < 0) path->legs.push_back({x.arc, x.s, x.s});
    return 0;
  }

  const double inf = std::numeric_limits<double>::infinity();
  double best = inf;
  bool best_direct = false;
  int best_ex = -1, best_ey = -1;

  // direct trip inside one arc
  if (x.arc == y.arc) {
    best = arcs_[x.arc].arclen_between(x.s, y.s);
    best_direct = true;
  }
  // through a pair of endpoint vertices
  auto ends = [&](const NetworkPoint& p) {
    const Arc& a = arcs_[p.arc];
    return std::array<std::pair<int, double>, 2>{
        std::make_pair(a.tail, a.arclen_to(p.s)),
        std::make_pair(a.head, a.length() - a.arclen_to(p.s))};
  };
  for (auto [vx, offx] : ends(x))
    for (auto [vy, offy] : ends(y)) {
      double cand = offx + vdist_[vx][vy] + offy;
      if (cand < best - 1e-15) {
        best = cand;
        best_direct = false;
        best_ex = vx;
        best_ey = vy;
      }
    }

  if (path) {
    if (best_direct) {
      path->legs.push_back({x.arc, x.s, y.s});
    } else {
      const Arc& ax = arcs_[x.arc];
      if (vertex_at(x) < 0 || vertex_at(x) != best_ex)
        path->legs.push_back({x.arc, x.s, ax.tail == best_ex ? 0.0 : 1.0});
      int v = best_ex;
      while (v != best_ey) {
        int ai = vnext_arc_[v][best_ey];
        const Arc& a = arcs_[ai];
        bool fwd = a.tail == v;
        path->legs.push_back({ai, fwd ? 0.0 : 1.0, fwd ? 1.0 : 0.0});
        v = fwd ? a.head : a.tail;
      }
      const Arc& ay = arcs_[y.arc];
      if (vertex_at(y) < 0 || vertex_at(y) != best_ey)
        path->legs.push_back({y.arc, ay.tail == best_ey ? 0.0 : 1.0, y.s});
    }
    path->length = best;
  }
  return best;
}

inline Network build_network(const std::vector<VertexSpec>& vertices,
                             const std::vector<ArcSpec>& arcs, const BuildOptions& opt = {}) {
  return Network::build(vertices, arcs, opt);
}

}  // namespace hjnet
