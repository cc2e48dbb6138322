// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "sasbss/types.hpp"

namespace sasbss {

// Random probe frequencies for characteristic-function sampling. Law:
// omega_j = (r_j / s) u_j with r_j = |N(0,1)|, u_j uniform on the complex
// unit sphere, and s the root-mean-energy scale of the data.
struct FrequencyDesign {
  Eigen::MatrixXcd omegas;   // M x J, one probe per column
  double radius_scale = 1.0; // the scale s the radii were divided by
  std::uint64_t seed = 0;

  int M() const { return static_cast<int>(omegas.rows()); }
  int J() const { return static_cast<int>(omegas.cols()); }
};

// Empirical characteristic function of a data cloud at J probes.
struct Sketch {
  Eigen::VectorXcd y;
  std::size_t T = 0;  // number of points summarized
};

// Draws the probe design from the data. The scale is estimated from an
// evenly strided subsample of at most `scale_subsample` points, so the
// result depends only on (data, J, seed). Throws DataError("degenerate data
// scale") when the data has no energy.
FrequencyDesign draw_frequencies(const Eigen::MatrixXcd& data, int J,
                                 std::uint64_t seed, int scale_subsample = 5000);

// y_j = (1/T) sum_t exp(i Re(omega_j* x_t)), accumulated in double
// precision in a single pass. Columns of `data` are the points.
Sketch compute_sketch(const Eigen::MatrixXcd& data, const FrequencyDesign& design);

// Default sketch size: ten probes per real free parameter of the mixture.
inline int default_sketch_size(int K, int M) { return 10 * K * (2 * M + 3); }

}  // namespace sasbss
