#pragma once

// Shared fixtures for the test suites: small networks and Hamiltonian sets.

#include <cmath>
#include <random>
#include <vector>

#include "hjnet/action.hpp"
#include "hjnet/hamiltonian.hpp"
#include "hjnet/network.hpp"

namespace hjtest {

using namespace hjnet;

inline std::vector<Vec> straight_polyline(const Vec& a, const Vec& b, int samples = 33) {
  std::vector<Vec> pts(samples);
  for (int i = 0; i < samples; ++i) {
    double w = static_cast<double>(i) / (samples - 1);
    Vec p(a.size());
    for (size_t d = 0; d < a.size(); ++d) p[d] = (1 - w) * a[d] + w * b[d];
    pts[i] = p;
  }
  return pts;
}

// one unit segment (0,0) -> (1,0)
inline Network segment_network() {
  return build_network({{"l", {0, 0}}, {"r", {1, 0}}},
                       {{"e", "l", "r", straight_polyline({0, 0}, {1, 0})}});
}

// star: center c, unit arms to (1,0), (0,1), (-1,0); arcs oriented c -> tip
inline Network star_network() {
  return build_network({{"c", {0, 0}}, {"a1", {1, 0}}, {"a2", {0, 1}}, {"a3", {-1, 0}}},
                       {{"e1", "c", "a1", straight_polyline({0, 0}, {1, 0})},
                        {"e2", "c", "a2", straight_polyline({0, 0}, {0, 1})},
                        {"e3", "c", "a3", straight_polyline({0, 0}, {-1, 0})}});
}

// two collinear unit arcs sharing vertex b
inline Network twoarc_network() {
  return build_network({{"a", {-1, 0}}, {"b", {0, 0}}, {"c", {1, 0}}},
                       {{"e1", "a", "b", straight_polyline({-1, 0}, {0, 0})},
                        {"e2", "b", "c", straight_polyline({0, 0}, {1, 0})}});
}

// unit square plus one diagonal: five arcs
inline Network square5_network() {
  return build_network(
      {{"A", {0, 0}}, {"B", {1, 0}}, {"C", {1, 1}}, {"D", {0, 1}}},
      {{"ab", "A", "B", straight_polyline({0, 0}, {1, 0})},
       {"bc", "B", "C", straight_polyline({1, 0}, {1, 1})},
       {"cd", "C", "D", straight_polyline({1, 1}, {0, 1})},
       {"da", "D", "A", straight_polyline({0, 1}, {0, 0})},
       {"ac", "A", "C", straight_polyline({0, 0}, {1, 1})}});
}

inline ArcHamiltonian quad_ham(const std::string& arc = "") {
  return power_hamiltonian(2, Expr::parse("1"), Expr::parse("0"), arc);
}

inline std::vector<ArcHamiltonian> quad_hams(const Network& net) {
  std::vector<ArcHamiltonian> hs;
  for (const auto& a : net.arcs()) hs.push_back(quad_ham(a.id));
  return hs;
}

inline FluxLimiter zero_limiter(const Network& net) {
  FluxLimiter fl;
  fl.c.assign(net.vertices().size(), 0.0);
  return fl;
}

inline FluxLimiter limiter_with(const Network& net, const std::string& vertex, double value,
                                double rest = 0.0) {
  FluxLimiter fl;
  fl.c.assign(net.vertices().size(), rest);
  fl.c[net.vertex_index(vertex)] = value;
  return fl;
}

}  // namespace hjtest
