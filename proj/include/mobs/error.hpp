#pragma once

#include <stdexcept>
#include <string>

namespace mobs {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Argument outside the model's domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

/// Input data that cannot be processed (constant stack, one-class case set...).
class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& what) : Error("degenerate_input", what) {}
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error("config", field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error("numerical", what) {}
};

/// Stack file problems. The sub-kind distinguishes header, dimension and
/// payload failures.
class FormatError : public Error {
public:
    FormatError(const std::string& sub_kind, const std::string& what)
        : Error("format." + sub_kind, what) {}
};

}  // namespace mobs
