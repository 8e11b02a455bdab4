#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hjnet {

enum class errc {
  loop_arc,
  disconnected,
  interior_intersection,
  degenerate_arc,
  unknown_arc,
  unknown_vertex,
  invalid_point,
  not_tangent,
  bracket_failure,
  level_below_minimum,
  limiter_too_large,
  off_network,
  bad_horizon,
  instance_too_large,
  inconsistent_datum,
  grid_mismatch,
  precondition_violated,
  parse_error,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::loop_arc: return "LoopArc";
    case errc::disconnected: return "Disconnected";
    case errc::interior_intersection: return "InteriorIntersection";
    case errc::degenerate_arc: return "DegenerateArc";
    case errc::unknown_arc: return "UnknownArc";
    case errc::unknown_vertex: return "UnknownVertex";
    case errc::invalid_point: return "InvalidPoint";
    case errc::not_tangent: return "NotTangent";
    case errc::bracket_failure: return "BracketFailure";
    case errc::level_below_minimum: return "LevelBelowMinimum";
    case errc::limiter_too_large: return "LimiterTooLarge";
    case errc::off_network: return "OffNetwork";
    case errc::bad_horizon: return "BadHorizon";
    case errc::instance_too_large: return "InstanceTooLarge";
    case errc::inconsistent_datum: return "InconsistentDatum";
    case errc::grid_mismatch: return "GridMismatch";
    case errc::precondition_violated: return "PreconditionViolated";
    case errc::parse_error: return "ParseError";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, errc code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace hjnet
