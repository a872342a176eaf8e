#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crimesim {

// Input/configuration problems map to CLI exit code 2, runtime and metric
// failures to exit code 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(std::string source, std::size_t line, const std::string& what)
        : InputError(source + ":" + std::to_string(line) + ": " + what),
          source_(std::move(source)), line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

class SimulationError : public Error {
public:
    using Error::Error;
};

class MetricError : public Error {
public:
    MetricError(std::string metric, const std::string& what)
        : Error(metric + ": " + what), metric_(std::move(metric)) {}

    const std::string& metric() const noexcept { return metric_; }

private:
    std::string metric_;
};

}  // namespace crimesim
