#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cubesim {

/// Raised when a rollout produces a non-finite state.
class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(std::size_t step, const std::string& what)
      : std::runtime_error("simulation diverged at step " + std::to_string(step) + ": " + what),
        step_(step) {}

  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Raised by iterative solvers that must converge (the regularized convex QP).
class SolverNotConverged : public std::runtime_error {
 public:
  SolverNotConverged(int iterations, double residual)
      : std::runtime_error("contact solver did not converge after " + std::to_string(iterations) +
                           " iterations (residual " + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}

  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Malformed input file. `row` is 1-based over the file's lines, 0 when not row-specific.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string source, std::size_t row, const std::string& what)
      : std::runtime_error(source + (row ? ":" + std::to_string(row) : std::string()) + ": " + what),
        source_(std::move(source)),
        row_(row) {}

  const std::string& source() const { return source_; }
  std::size_t row() const { return row_; }

 private:
  std::string source_;
  std::size_t row_;
};

}  // namespace cubesim
