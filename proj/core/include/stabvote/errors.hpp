#pragma once

#include <stdexcept>
#include <string>

namespace stabvote {

// Input/domain problems: bad arguments, malformed files, size limits.
// CLI maps these to exit code 1.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation produced something that should be impossible (e.g. a
// Harper-inequality violation). CLI maps these to exit code 2.
struct InvariantError : std::logic_error {
    explicit InvariantError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace stabvote
