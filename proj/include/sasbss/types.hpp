// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace sasbss {

using cplx = std::complex<double>;

// Error taxonomy, mapped to CLI exit codes: config 2, data 3, numerical 4.
// Shape and domain violations count as data errors.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : DataError {
  using DataError::DataError;
};
struct DomainError : DataError {
  using DataError::DataError;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sasbss
