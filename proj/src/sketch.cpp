// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sasbss/sketch.hpp"

#include <cmath>

#include "sasbss/rng.hpp"

namespace sasbss {

FrequencyDesign draw_frequencies(const Eigen::MatrixXcd& data, int J,
                                 std::uint64_t seed, int scale_subsample) {
  const auto T = data.cols();
  const auto M = data.rows();
  if (T < 1) throw DataError("draw_frequencies: empty data");
  if (J < 1) throw DomainError("draw_frequencies: J must be >= 1");
  if (scale_subsample < 1) throw DomainError("draw_frequencies: bad subsample size");

  // Root-mean-energy per real dimension over a strided subsample.
  const auto n = std::min<Eigen::Index>(T, scale_subsample);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index t = (i * T) / n;
    acc += data.col(t).squaredNorm();
  }
  const double s = std::sqrt(acc / (static_cast<double>(n) * 2.0 * static_cast<double>(M)));
  if (!(s > 0.0)) throw DataError("degenerate data scale");

  Rng rng(seed);
  FrequencyDesign design;
  design.omegas.resize(M, J);
  design.radius_scale = s;
  design.seed = seed;
  Eigen::VectorXcd g(M);
  for (int j = 0; j < J; ++j) {
    const double r = std::abs(rng.normal());
    for (Eigen::Index m = 0; m < M; ++m) g(m) = rng.cnormal();
    const double gn = g.norm();
    design.omegas.col(j) = g * (r / (s * (gn > 0.0 ? gn : 1.0)));
  }
  return design;
}

Sketch compute_sketch(const Eigen::MatrixXcd& data, const FrequencyDesign& design) {
  const auto T = data.cols();
  const auto M = data.rows();
  if (T < 1) throw DataError("compute_sketch: empty data");
  if (M != design.omegas.rows())
    throw ShapeError("compute_sketch: data and design disagree on channels");

  const int J = design.J();
  Sketch sk;
  sk.y = Eigen::VectorXcd::Zero(J);
  sk.T = static_cast<std::size_t>(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto x = data.col(t);
    for (int j = 0; j < J; ++j) {
      // Re(omega_j* x_t)
      const double phase = design.omegas.col(j).dot(x).real();
      sk.y(j) += cplx(std::cos(phase), std::sin(phase));
    }
  }
  sk.y /= static_cast<double>(T);
  return sk;
}

}  // namespace sasbss
