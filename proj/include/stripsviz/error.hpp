#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace stripsviz {

// Every error raised by the library carries a short machine-readable code
// ("parse_error", "unsupported", "cap_exceeded", ...) that the CLI and the
// server copy verbatim into their JSON error payloads.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error("parse_error", message + " (line " + std::to_string(line) + ", column " +
                                   std::to_string(column) + ")"),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

// A PDDL requirement or construct outside the :strips + :typing subset.
class UnsupportedError : public Error {
public:
    UnsupportedError(std::string feature, const std::string& message)
        : Error("unsupported", message), feature_(std::move(feature)) {}

    const std::string& feature() const noexcept { return feature_; }

private:
    std::string feature_;
};

} // namespace stripsviz
