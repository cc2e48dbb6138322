// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "sasbss/types.hpp"

namespace sasbss {

struct SdrSir {
  double sdr_db = 0.0;
  double sir_db = 0.0;
};

struct SourceScores {
  double sdr_db = 0.0;
  double sir_db = 0.0;
  double mer_db = std::numeric_limits<double>::quiet_NaN();  // NaN when no steering
};

// Projection-based decomposition of an estimated source image against the
// true images. s_target is the least-squares projection of the estimate onto
// the span of the L time shifts of truth k (all channels jointly, one
// coefficient set per estimate channel); e_interf adds the remaining truths'
// shift spans; e_artif is what is left. SDR and SIR are capped at +-100 dB.
// The Gram matrix depends only on the truths and is computed once.
class ImageProjector {
 public:
  ImageProjector(const std::vector<Eigen::MatrixXd>& truths, int filter_len = 32);

  SdrSir evaluate(const Eigen::MatrixXd& estimate, int target_index) const;

  int num_sources() const { return K_; }

 private:
  int K_ = 0;
  int M_ = 0;
  int L_ = 0;
  Eigen::Index N_ = 0;
  std::vector<Eigen::MatrixXd> truths_;
  Eigen::MatrixXd gram_;       // (K M L)^2
  Eigen::LDLT<Eigen::MatrixXd> full_solver_;  // gram + ridge
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> target_solvers_;
};

// Convenience wrapper building the projector for one evaluation.
SdrSir sdr_sir(const Eigen::MatrixXd& estimate, const std::vector<Eigen::MatrixXd>& truths,
               int target_index, int filter_len = 32);

// Mixing error ratio of estimated steering vectors (M x F, one column per
// frequency) against the truth: per frequency the energy ratio of the
// projection of a_hat onto span(a) versus its residual, in dB capped at
// +-100; the source score is the mean over frequencies with finite norms.
// Invariant to per-frequency rescaling and phase rotation of either vector.
double mer(const Eigen::MatrixXcd& a_hat, const Eigen::MatrixXcd& a_true);

}  // namespace sasbss
