#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace percohom {

/// Bad parameters: degenerate boxes, non-finite rates, ordering violations.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Input is well-formed but the requested quantity is undefined for it
/// (single point with a min-distance radius rule, empty obstacle set, ...).
class DegenerateInput : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class UnsupportedDimension : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative solver did not reach its tolerance. Carries the residual history
/// so callers can decide whether the failure was stagnation or slow decay.
class SolverFailure : public std::runtime_error {
  public:
    SolverFailure(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}

    const std::vector<double>& residual_history() const noexcept { return history_; }

  private:
    std::vector<double> history_;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument(msg);
}

} // namespace detail
} // namespace percohom
