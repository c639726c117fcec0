#pragma once

#include <stdexcept>
#include <string>

namespace gazeprompt {

enum class ErrorCode {
    invalid_geometry,
    invalid_config,
    stream_order,
    under_sampled,
    no_layout,
    stale_fixation,
    protocol,
    unsupported_format,
    parse,
    io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Malformed input at a known position in a line-oriented file.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(ErrorCode::parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace gazeprompt
