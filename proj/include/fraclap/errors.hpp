#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fraclap {

// Exit-code contract shared by the library and the CLI:
//   0 success, 2 config error, 3 geometry error, 4 I/O error,
//   5 solver / quadrature non-convergence.
enum class ExitCode : int {
  ok = 0,
  config_error = 2,
  geometry_error = 3,
  io_error = 4,
  solver_error = 5,
};

class Error : public std::runtime_error {
public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

private:
  ExitCode code_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what)
      : Error(ExitCode::config_error, what) {}
};

class GeometryError : public Error {
public:
  explicit GeometryError(const std::string& what)
      : Error(ExitCode::geometry_error, what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what)
      : Error(ExitCode::io_error, what) {}
};

class SolverError : public Error {
public:
  SolverError(const std::string& what, std::vector<double> residual_history)
      : Error(ExitCode::solver_error, what),
        residual_history_(std::move(residual_history)) {}
  const std::vector<double>& residual_history() const noexcept {
    return residual_history_;
  }

private:
  std::vector<double> residual_history_;
};

// Quadrature tolerance failures carry the tolerance actually achieved.
class QuadratureError : public Error {
public:
  QuadratureError(const std::string& what, double achieved, double requested)
      : Error(ExitCode::solver_error, what),
        achieved_(achieved),
        requested_(requested) {}
  double achieved_tolerance() const noexcept { return achieved_; }
  double requested_tolerance() const noexcept { return requested_; }

private:
  double achieved_;
  double requested_;
};

}  // namespace fraclap
