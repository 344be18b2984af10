#pragma once

#include <stdexcept>
#include <string>

namespace stfem {

/// Error categories mapped to CLI exit codes (config 2, geometry 3, solver 4).
enum class ErrorKind { Config = 2, Geometry = 3, Solver = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void config_error(const std::string& msg) {
    throw Error(ErrorKind::Config, "config error: " + msg);
}
[[noreturn]] inline void geometry_error(const std::string& msg) {
    throw Error(ErrorKind::Geometry, "geometry error: " + msg);
}
[[noreturn]] inline void solver_error(const std::string& msg) {
    throw Error(ErrorKind::Solver, "solver error: " + msg);
}

} // namespace stfem
