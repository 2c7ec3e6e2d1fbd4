#pragma once

#include <stdexcept>

namespace mzrl {

// Count rate outside [1e-15, 0.1], the interval the optimality results
// are established on. Plain formula evaluation accepts all of (0,1);
// only the solver entry points throw this.
class SolverDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed, truncated or corrupt codeword-stream container.
class StreamError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Violation of the two-endpoint session contract (buffer underflow,
// count mismatch at session end, bad wire framing).
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mzrl
