#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace recf {

// Adaptive weights stopped being finite. Carries the update index at which
// the blow-up was detected so callers can report / exclude the run.
class divergence_error : public std::runtime_error {
public:
    divergence_error(std::size_t iteration, const std::string& what)
        : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}

    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

// A requested problem size exceeds a configured cap (e.g. moment matrices
// that would not fit in memory, or a dictionary growing past its limit).
class resource_limit_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration (unknown names, missing fields, invalid
// numeric ranges). Distinct from std::invalid_argument so the CLI can map
// it onto its own exit code.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace recf
