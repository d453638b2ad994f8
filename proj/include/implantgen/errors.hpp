#pragma once

#include <stdexcept>
#include <string>

namespace implantgen {

/// Bad user input: missing files, inconsistent shapes, invalid flags.
/// The CLI maps this to exit code 1.
class UserError : public std::runtime_error {
public:
    explicit UserError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Broken internal invariant (non-finite state, impossible branch).
/// The CLI maps this to exit code 2.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace implantgen
