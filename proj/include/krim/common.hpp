#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace krim {

using Index = Eigen::Index;
using cx = std::complex<double>;

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Error hierarchy. Every error carries a short machine-readable category so the
// CLI can print a single "error:<category>:<message>" line.
class Error : public std::runtime_error {
public:
  Error(std::string category, std::string const &what)
    : std::runtime_error(what), category_(std::move(category)) {}
  std::string const &category() const noexcept { return category_; }

private:
  std::string category_;
};

// Caller passed something malformed (shapes, ranges, options).
struct InputError : Error {
  explicit InputError(std::string const &what) : Error("input", what) {}
};

// Data violates an assumption (duplicate coordinates, unsampled navigator band).
struct DataError : Error {
  explicit DataError(std::string const &what) : Error("data", what) {}
};

// Iterative method failed (non-convergence, non-finite iterate).
struct SolverError : Error {
  SolverError(std::string const &what, double residual = 0.0, int iteration = -1)
    : Error("solver", what), residual(residual), iteration(iteration) {}
  double residual;
  int iteration;
};

struct IoError : Error {
  explicit IoError(std::string const &what) : Error("io", what) {}
};

inline void require(bool cond, char const *msg) {
  if (!cond) { throw InputError(msg); }
}

} // namespace krim
