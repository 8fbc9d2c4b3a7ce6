/*
 * Core scalar types and error reporting shared by all patrol modules.
 *
 * All times in the system (edge weights, dwell times, departure times, the
 * discretization constant D) are integer Ticks, so every comparison and every
 * mod/ceil/floor in the discretization transform is exact. A configurable
 * tick->seconds factor lives in the environment document as metadata only.
 */
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace patrol {

// Non-negative integer count of the base time quantum.
using Tick = std::int64_t;

// Dense indices assigned on load; node order is the order of appearance in
// the environment document and doubles as the global tie-break order.
using NodeIndex = std::int32_t;
using AgentIndex = std::int32_t;

inline constexpr NodeIndex kNoNode = -1;

// Closed time interval [begin, end].
struct Window {
  Tick begin = 0;
  Tick end = 0;
};

enum class Errc {
  parse_error,
  not_strongly_connected,
  non_positive_weight,
  bad_phi,
  infeasible_degree,
  out_of_window,
  empty_window,
  no_nonzero_idleness,
  dead_end,
  invalid_d,
  invalid_input,
  length_mismatch,
  no_bijection,
  invalid_pair,
  missing_i_min,
  io_error,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Exact ceil/floor divisions on Ticks (callers guarantee divisor > 0).
inline Tick ceil_div(Tick numerator, Tick divisor) {
  return numerator >= 0 ? (numerator + divisor - 1) / divisor
                        : -((-numerator) / divisor);
}

inline Tick floor_div(Tick numerator, Tick divisor) {
  return numerator >= 0 ? numerator / divisor
                        : -((-numerator + divisor - 1) / divisor);
}

}  // namespace patrol
