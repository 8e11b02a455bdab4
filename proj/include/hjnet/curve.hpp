#pragma once

// Piecewise trajectories on the network: Move pieces follow one arc with a
// time grid and per-node parameters (linear in between); Dwell pieces sit at
// a vertex. Includes the text exchange format.

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hjnet/errors.hpp"
#include "hjnet/network.hpp"

namespace hjnet {

struct CurvePiece {
  enum class Kind { move, dwell };
  Kind kind = Kind::move;
  int arc = -1;            // move
  int vertex = -1;         // dwell
  std::vector<double> t;   // move: >=2 nodes; dwell: {t0, t1}
  std::vector<double> s;   // move only, parallel to t

  double t0() const { return t.front(); }
  double t1() const { return t.back(); }

  static CurvePiece make_move(int arc, std::vector<double> times, std::vector<double> params) {
    CurvePiece p;
    p.kind = Kind::move;
    p.arc = arc;
    p.t = std::move(times);
    p.s = std::move(params);
    return p;
  }
  static CurvePiece make_dwell(int vertex, double t0, double t1) {
    CurvePiece p;
    p.kind = Kind::dwell;
    p.vertex = vertex;
    p.t = {t0, t1};
    return p;
  }
};

struct NetworkCurve {
  std::vector<CurvePiece> pieces;

  bool empty() const { return pieces.empty(); }
  double t_begin() const { return pieces.front().t0(); }
  double t_end() const { return pieces.back().t1(); }
  double duration() const { return t_end() - t_begin(); }
};

inline NetworkPoint piece_start(const Network& net, const CurvePiece& p) {
  if (p.kind == CurvePiece::Kind::dwell) return net.point_at_vertex(p.vertex);
  return {p.arc, p.s.front()};
}
inline NetworkPoint piece_end(const Network& net, const CurvePiece& p) {
  if (p.kind == CurvePiece::Kind::dwell) return net.point_at_vertex(p.vertex);
  return {p.arc, p.s.back()};
}
inline NetworkPoint curve_start(const Network& net, const NetworkCurve& c) {
  return piece_start(net, c.pieces.front());
}
inline NetworkPoint curve_end(const Network& net, const NetworkCurve& c) {
  return piece_end(net, c.pieces.back());
}

// Position at an absolute time (clamped to the curve's time span).
inline NetworkPoint curve_position(const Network& net, const NetworkCurve& c, double t) {
  require(!c.pieces.empty(), errc::invalid_point, "empty curve");
  if (t <= c.t_begin()) return curve_start(net, c);
  for (const CurvePiece& p : c.pieces) {
    if (t > p.t1() + 1e-15) continue;
    if (p.kind == CurvePiece::Kind::dwell) return net.point_at_vertex(p.vertex);
    for (size_t i = 1; i < p.t.size(); ++i) {
      if (t > p.t[i] + 1e-15) continue;
      double w = (t - p.t[i - 1]) / (p.t[i] - p.t[i - 1]);
      w = std::clamp(w, 0.0, 1.0);
      return {p.arc, p.s[i - 1] + w * (p.s[i] - p.s[i - 1])};
    }
  }
  return curve_end(net, c);
}

// Structural validation; throws OffNetwork for pieces leaving the network and
// InvalidPoint for broken continuity or time grids.
inline void validate_curve(const Network& net, const NetworkCurve& c, double tol = 1e-9) {
  require(!c.pieces.empty(), errc::invalid_point, "empty curve");
  for (const CurvePiece& p : c.pieces) {
    if (p.kind == CurvePiece::Kind::move) {
      require(p.arc >= 0 && p.arc < static_cast<int>(net.arcs().size()), errc::off_network,
              "move piece on unknown arc");
      require(p.t.size() >= 2 && p.t.size() == p.s.size(), errc::invalid_point,
              "move piece needs matching time and parameter grids");
      for (double sv : p.s)
        require(sv >= -tol && sv <= 1 + tol, errc::off_network,
                "move piece leaves the arc parameter range");
      for (size_t i = 1; i < p.t.size(); ++i)
        require(p.t[i] > p.t[i - 1], errc::invalid_point, "time grid not increasing");
    } else {
      require(p.vertex >= 0 && p.vertex < static_cast<int>(net.vertices().size()),
              errc::off_network, "dwell at unknown vertex");
      require(p.t.size() == 2 && p.t[1] > p.t[0], errc::invalid_point, "bad dwell interval");
    }
  }
  for (size_t i = 1; i < c.pieces.size(); ++i) {
    require(std::abs(c.pieces[i].t0() - c.pieces[i - 1].t1()) <= tol, errc::invalid_point,
            "pieces not contiguous in time");
    NetworkPoint a = piece_end(net, c.pieces[i - 1]);
    NetworkPoint b = piece_start(net, c.pieces[i]);
    require(net.same_point(a, b) || dist(net.position(a), net.position(b)) <= tol,
            errc::invalid_point, "pieces not continuous in space");
  }
}

// Splits move pieces at interior time nodes sitting on a vertex and turns
// runs of constant-at-vertex nodes into dwell pieces, so vertex contact
// happens only at piece boundaries. The curve is unchanged as a function.
inline NetworkCurve normalize_curve(const Network& net, const NetworkCurve& c, double tol = 1e-9) {
  NetworkCurve out;
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
    if (p.kind == CurvePiece::Kind::dwell) {
      push_dwell(p.vertex, p.t[0], p.t[1]);
      continue;
    }
    auto at_vertex = [&](double sv) -> int {
      if (sv <= tol) return net.arc(p.arc).tail;
      if (sv >= 1 - tol) return net.arc(p.arc).head;
      return -1;
    };
    size_t i = 0;
    while (i + 1 < p.t.size()) {
      int v0 = at_vertex(p.s[i]);
      if (v0 >= 0 && at_vertex(p.s[i + 1]) == v0) {
        size_t j = i + 1;
        while (j + 1 < p.t.size() && at_vertex(p.s[j + 1]) == v0) ++j;
        push_dwell(v0, p.t[i], p.t[j]);
        i = j;
        continue;
      }
      size_t j = i + 1;  // extend while no interior vertex touch
      while (j + 1 < p.t.size() && at_vertex(p.s[j]) < 0) ++j;
      std::vector<double> ts(p.t.begin() + i, p.t.begin() + j + 1);
      std::vector<double> ss(p.s.begin() + i, p.s.begin() + j + 1);
      for (double& sv : ss) sv = std::clamp(sv, 0.0, 1.0);
      out.pieces.push_back(CurvePiece::make_move(p.arc, std::move(ts), std::move(ss)));
      i = j;
    }
  }
  return out;
}

// Inserts time nodes so every move step spans at most dt_max. Equal to the
// input as a function of time.
inline NetworkCurve refine_curve(const NetworkCurve& c, double dt_max) {
  NetworkCurve out;
  for (const CurvePiece& p : c.pieces) {
    if (p.kind == CurvePiece::Kind::dwell) {
      out.pieces.push_back(p);
      continue;
    }
    std::vector<double> ts, ss;
    ts.push_back(p.t[0]);
    ss.push_back(p.s[0]);
    for (size_t i = 1; i < p.t.size(); ++i) {
      double dt = p.t[i] - p.t[i - 1];
      int parts = std::max(1, static_cast<int>(std::ceil(dt / dt_max)));
      for (int k = 1; k <= parts; ++k) {
        double w = static_cast<double>(k) / parts;
        ts.push_back(p.t[i - 1] + w * dt);
        ss.push_back(p.s[i - 1] + w * (p.s[i] - p.s[i - 1]));
      }
    }
    out.pieces.push_back(CurvePiece::make_move(p.arc, std::move(ts), std::move(ss)));
  }
  return out;
}

// --- text exchange format ---------------------------------------------------

inline void write_curve(std::ostream& os, const Network& net, const NetworkCurve& c) {
  os << "curve\n" << std::setprecision(17);
  for (const CurvePiece& p : c.pieces) {
    if (p.kind == CurvePiece::Kind::dwell) {
      os << "dwell " << net.vertex(p.vertex).id << ' ' << p.t[0] << ' ' << (p.t[1] - p.t[0])
         << '\n';
    } else {
      os << "move " << net.arc(p.arc).id;
      for (size_t i = 0; i < p.t.size(); ++i) os << ' ' << p.t[i] << ' ' << p.s[i];
      os << '\n';
    }
  }
  os << "end\n";
}

inline NetworkCurve read_curve(std::istream& is, const Network& net) {
  NetworkCurve c;
  std::string line;
  bool started = false, done = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag.empty() || tag[0] == '#') continue;
    if (tag == "curve") {
      started = true;
      continue;
    }
    if (tag == "end") {
      done = true;
      break;
    }
    require(started, errc::parse_error, "curve data before 'curve' header");
    if (tag == "move") {
      std::string arc_id;
      require(static_cast<bool>(ls >> arc_id), errc::parse_error, "move needs an arc id");
      std::vector<double> ts, ss;
      double tv, sv;
      while (ls >> tv >> sv) {
        ts.push_back(tv);
        ss.push_back(sv);
      }
      require(ts.size() >= 2, errc::parse_error, "move needs at least two (t,s) pairs");
      c.pieces.push_back(CurvePiece::make_move(net.arc_index(arc_id), std::move(ts), std::move(ss)));
    } else if (tag == "dwell") {
      std::string vid;
      double t0, dur;
      require(static_cast<bool>(ls >> vid >> t0 >> dur), errc::parse_error,
              "dwell needs vertex, start, duration");
      c.pieces.push_back(CurvePiece::make_dwell(net.vertex_index(vid), t0, t0 + dur));
    } else {
      fail(errc::parse_error, "unknown curve record '" + tag + "'");
    }
  }
  require(done, errc::parse_error, "curve without 'end'");
  return c;
}

}  // namespace hjnet
