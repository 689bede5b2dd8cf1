#pragma once

#include <stdexcept>
#include <string>

namespace prnu {

// Bad or missing input data: unreadable files, malformed manifests,
// dimension mismatches, invalid parameter values.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical procedure failed to converge or hit a degenerate case
// (e.g. root bracket exhaustion, all pixels below the variance floor).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace prnu
