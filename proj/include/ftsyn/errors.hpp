#pragma once

#include <stdexcept>
#include <string>

namespace ftsyn {

// All recoverable failures are reported as typed exceptions; the C API
// translates them into error codes.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct EvalError : std::runtime_error {
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

struct AssemblyError : std::runtime_error {
    explicit AssemblyError(const std::string& what) : std::runtime_error(what) {}
};

struct ContractError : std::logic_error {
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

struct DivergenceError : std::runtime_error {
    int step;
    DivergenceError(const std::string& what, int step_index)
        : std::runtime_error(what), step(step_index) {}
};

struct UndecidedError : std::runtime_error {
    double bound_gap;
    UndecidedError(const std::string& what, double gap)
        : std::runtime_error(what), bound_gap(gap) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ftsyn
