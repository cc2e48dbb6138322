// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "sasbss/stable.hpp"
#include "sasbss/types.hpp"

namespace sasbss {

struct EmOptions {
  int K = 1;
  int n_restarts = 10;
  int max_iterations = 200;
  double loglik_tolerance = 1e-7;  // relative change per iteration
  std::uint64_t seed = 0;
  bool normalize_observations = false;  // Sawada variant: ||x_t|| = 1 features

  void validate() const;
};

struct EmResult {
  MixtureParams params;  // all alpha = 2, covariance convention a a* + s2 I
  double loglik = 0.0;   // final log-likelihood of the winning restart
  int best_restart = -1;
  std::vector<double> loglik_trace;  // per-iteration values of the winner
};

// EM for the mixture of circular complex Gaussians with rank-one-plus-
// diagonal covariances C_k = a_k a_k* + sigma2_k I (cov_scale = 1). The
// M-step is the exact one-factor PPCA update from the eigendecomposition of
// the weighted scatter. Runs n_restarts independent restarts and keeps the
// best final log-likelihood; restarts whose likelihood diverges are
// discarded.
EmResult em_fit(const Eigen::MatrixXcd& data, const EmOptions& opts);

// sum_t log sum_k pi_k N_c(x_t; 0, cov_scale (a_k a_k* + sigma2_k I)).
// Accepts any MixtureParams, including CL-OMPR output (alpha ignored).
double per_frequency_loglik(const Eigen::MatrixXcd& data, const MixtureParams& theta,
                            double cov_scale);

// Columns rescaled to unit norm; zero columns dropped. Exposed because the
// Sawada variant clusters in this feature space.
Eigen::MatrixXcd normalize_columns(const Eigen::MatrixXcd& data);

}  // namespace sasbss
