#pragma once

#include <stdexcept>

namespace fcs {

// Error categories; the CLI maps each to a distinct exit code.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct instability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct solve_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct dimension_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a Fano factor is requested for a phase with kappa_1 = 0.
struct quiet_phase_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fcs
