#pragma once

#include <stdexcept>
#include <string>

namespace mmenc {

/// Base class for all engine errors. The exit code follows the CLI contract:
/// 1 usage/config, 2 data, 3 numerical failure.
class Error : public std::runtime_error
{
public:
    Error(const std::string& what, int exit_code) : std::runtime_error(what), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

class ConfigError : public Error
{
public:
    explicit ConfigError(const std::string& what) : Error("configuration error: " + what, 1) {}
};

/// A stage was invoked before the artifacts it depends on exist.
class StageOrderError : public Error
{
public:
    explicit StageOrderError(const std::string& what) : Error("stage-order error: " + what, 1) {}
};

class DataError : public Error
{
public:
    explicit DataError(const std::string& what) : Error("data error: " + what, 2) {}
};

class NumericalError : public Error
{
public:
    explicit NumericalError(const std::string& what) : Error("numerical error: " + what, 3) {}
};

}  // namespace mmenc
