#include "pdmplab/trajectory.hpp"

#include <stdexcept>

namespace pdmplab {

std::string event_tag_name(EventTag tag) {
  switch (tag) {
    case EventTag::EnvJump: return "env-jump";
    case EventTag::SpontaneousJump: return "jump";
    case EventTag::BoundaryHit: return "boundary-hit";
    case EventTag::Reset: return "reset";
    case EventTag::Division: return "division";
  }
  return "?";
}

void Trajectory::validate(double) const {
  if (times.size() != states.size() || times.size() != env.size())
    throw std::logic_error("Trajectory: parallel arrays disagree in length");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::logic_error("Trajectory: times not strictly increasing");
  for (std::size_t i = 1; i < events.size(); ++i)
    if (events[i].t < events[i - 1].t)
      throw std::logic_error("Trajectory: events out of order");

  // Boundary hits and resets must alternate: a hit is always resolved by a
  // reset before the next hit can occur.
  bool awaiting_reset = false;
  for (const auto& e : events) {
    if (e.tag == EventTag::BoundaryHit) {
      if (awaiting_reset)
        throw std::logic_error("Trajectory: two boundary hits without a reset");
      awaiting_reset = true;
    } else if (e.tag == EventTag::Reset) {
      awaiting_reset = false;
    }
  }
}

bool Trajectory::operator==(const Trajectory& other) const {
  if (times != other.times || env != other.env) return false;
  if (states.size() != other.states.size()) return false;
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] != other.states[i]) return false;
  if (events.size() != other.events.size()) return false;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& a = events[i];
    const auto& b = other.events[i];
    if (a.t != b.t || a.tag != b.tag || a.env_before != b.env_before ||
        a.env_after != b.env_after)
      return false;
  }
  return true;
}

}  // namespace pdmplab
