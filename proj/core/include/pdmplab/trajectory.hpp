#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pdmplab {

enum class EventTag { EnvJump, SpontaneousJump, BoundaryHit, Reset, Division };

std::string event_tag_name(EventTag tag);

struct Event {
  double t;
  EventTag tag;
  int env_before;
  int env_after;
};

// Time-stamped piecewise record of a simulated sample path. The continuous
// state is continuous across environment jumps and may be discontinuous only
// at reset/division events.
struct Trajectory {
  std::vector<double> times;               // strictly increasing
  std::vector<Eigen::VectorXd> states;     // state at times[i] (post-event)
  std::vector<int> env;                    // environment at times[i]+
  std::vector<Event> events;

  // Structural invariants: strictly increasing times, sorted events,
  // continuity across env jumps, boundary hits each followed by a reset.
  void validate(double continuity_tol = 1e-9) const;

  bool operator==(const Trajectory& other) const;
};

}  // namespace pdmplab
