#pragma once

#include <iosfwd>
#include <string>

#include "pgraft/sampler.hpp"

namespace pgraft {

/// One JSON object per state, one per line, keys in this order:
///   step       integer, 0..S
///   state      array of numbers (shortest round-trip decimal form)
///   condition  "layout" or "target" for the Euler step taken from this state; null at s = S
///   score      layout similarity, present only where the scorer ran
void write_trajectory_jsonl(std::ostream& out, const Trajectory& trajectory);
std::string trajectory_jsonl(const Trajectory& trajectory);

/// Raw little-endian float32 states, row-major (S+1) x dim, no header.
void write_states_f32(std::ostream& out, const Trajectory& trajectory);

}  // namespace pgraft
