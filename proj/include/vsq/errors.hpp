#pragma once

#include <stdexcept>
#include <string>

namespace vsq {

// Raised when a computation cannot produce a trustworthy number: singular step
// systems, blow-up guards, non-integrable resolvents where a limit is required.
// Invalid inputs raise std::invalid_argument (or std::domain_error) instead.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace vsq
