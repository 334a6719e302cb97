#pragma once

#include <stdexcept>

namespace hjfd {

/// Time step exceeds the monotone (CFL) limit of the requested advance.
struct CflViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The selected flux kind does not provide the capability an operation needs
/// (e.g. second derivatives for the curvature field).
struct UnsupportedOperation : std::logic_error {
    using std::logic_error::logic_error;
};

/// The trajectory lacks the per-step records an operation needs.
struct InsufficientTrajectory : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A search bracket does not contain the extremum it must enclose.
struct RangeTooSmall : std::domain_error {
    using std::domain_error::domain_error;
};

} // namespace hjfd
