#pragma once

#include <stdexcept>
#include <string>

namespace pep {

// Exit-code contract of the CLI: 2 parse, 3 unsupported field, 4 cap
// exceeded, 5 diagnostic failure.

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& m) : std::runtime_error(m) {}
};

struct UnsupportedFieldError : std::runtime_error {
    explicit UnsupportedFieldError(const std::string& m) : std::runtime_error(m) {}
};

struct CapError : std::runtime_error {
    explicit CapError(const std::string& m) : std::runtime_error(m) {}
};

struct DiagnosticError : std::runtime_error {
    explicit DiagnosticError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace pep
