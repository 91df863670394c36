#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace cmx {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

struct Dims {
  Index dx = 0;  // dimension of x
  Index dg = 0;  // dimension of g(x)
  Index dy = 0;  // dimension of y

  void validate() const;
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite input to an oracle evaluation.
struct DomainError : Error {
  using Error::Error;
};

// Requested quantity not provided by the oracle (capability flag unset).
struct UnsupportedOracle : Error {
  using Error::Error;
};

// Invalid configuration detected before or while running.
struct ConfigError : Error {
  using Error::Error;
};

// NaN/Inf produced during optimization; message names the offending quantity.
struct NumericalFailure : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw DomainError(std::string("non-finite input: ") + what);
}

inline void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw DomainError(std::string("non-finite input: ") + what);
}

inline void Dims::validate() const {
  if (dx <= 0 || dg <= 0 || dy <= 0)
    throw ConfigError("Dims: all dimensions must be strictly positive");
}

}  // namespace cmx
