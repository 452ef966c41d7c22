#pragma once

#include <stdexcept>
#include <string>

namespace maernav {

/// Error categories shared by the C++ core and the C API status codes.
enum class ErrorKind {
    Usage = 2,
    NotFound = 3,
    Config = 4,
    Parse = 5,
    Io = 6,
    State = 7,
    Domain = 8,
    Version = 9,
    Validation = 10,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class StateError : public Error {
public:
    explicit StateError(const std::string& what) : Error(ErrorKind::State, what) {}
};

class VersionError : public Error {
public:
    explicit VersionError(const std::string& what) : Error(ErrorKind::Version, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& what) : Error(ErrorKind::NotFound, what) {}
};

} // namespace maernav
