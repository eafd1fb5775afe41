#pragma once

#include <stdexcept>
#include <string>

namespace aim {

/// Vector length mismatch between operands.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid or inconsistent configuration (shapes, fractions, infeasible specs).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Point evaluated outside a problem's domain.
class DomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Training hit a non-finite loss and cannot continue.
class TrainingAborted : public std::runtime_error {
public:
    TrainingAborted(const std::string& what, std::string dump)
        : std::runtime_error(what), dump_(std::move(dump)) {}

    const std::string& dump() const noexcept { return dump_; }

private:
    std::string dump_;
};

} // namespace aim
