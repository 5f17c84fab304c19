#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wavescope {

/// Broad failure class; the CLI maps each one onto a process exit code.
enum class ErrorKind { Usage, Data, Transport, Numerical, Io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Malformed text input (wavelet names, CSV rows, config files).
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

/// Invalid data handed to a numerical routine (NaN, too short, empty).
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// Two spectra that cannot be combined. `field()` names the mismatch.
class IncompatibleError : public Error {
public:
    IncompatibleError(std::string field, const std::string& what)
        : Error(ErrorKind::Data, what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class TransportError : public Error {
public:
    explicit TransportError(const std::string& what) : Error(ErrorKind::Transport, what) {}
};

/// Fetched pages do not tile the requested window.
class IntegrityError : public Error {
public:
    IntegrityError(std::vector<std::string> missing, const std::string& what)
        : Error(ErrorKind::Data, what), missing_(std::move(missing)) {}
    const std::vector<std::string>& missing_dates() const noexcept { return missing_; }

private:
    std::vector<std::string> missing_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

inline int exit_code(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Usage: return 1;
    case ErrorKind::Data:
    case ErrorKind::Transport:
    case ErrorKind::Io: return 2;
    case ErrorKind::Numerical: return 3;
    }
    return 2;
}

} // namespace wavescope
