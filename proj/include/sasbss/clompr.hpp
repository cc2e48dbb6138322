// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "sasbss/sketch.hpp"
#include "sasbss/stable.hpp"
#include "sasbss/types.hpp"

namespace sasbss {

// One dictionary atom in unconstrained parameterization. sigma2 lives in log
// space; alpha is clamped to [0.2, 2] by the optimizer (heavier tails are
// numerically degenerate). alpha_locked pins alpha = 2 (CF-GMM mode).
struct AtomParams {
  Eigen::VectorXcd a;
  double alpha = 1.8;
  double log_sigma2 = 0.0;
  bool alpha_locked = false;

  double sigma2() const { return std::exp(log_sigma2); }
  int channels() const { return static_cast<int>(a.size()); }
};

struct FitOptions {
  int K = 1;
  int n_outer_iterations = 0;  // 0 selects the default 2K schedule
  int n_inits_per_atom = 5;
  int max_gradient_steps = 300;
  double tolerance = 1e-8;  // relative objective change
  std::uint64_t seed = 0;
  bool alpha_locked = false;  // CF-GMM mode: every atom keeps alpha = 2

  void validate() const;
};

// Number of real parameters an atom exposes to the optimizer:
// [Re a (M), Im a (M), alpha, log_sigma2].
inline int atom_param_count(int M) { return 2 * M + 2; }

// CF of the atom at every probe of the design; entries in (0, 1].
Eigen::VectorXd atom_cf_vector(const AtomParams& atom, const FrequencyDesign& design);

// Exact gradient of <cotangent, atom_cf_vector(atom)> with respect to
// (Re a, Im a, alpha, log_sigma2), packed in that order. The alpha slot is 0
// for locked atoms, and the g^alpha * log(g) term is taken as 0 at g = 0
// (its removable limit).
Eigen::VectorXd atom_gradient(const AtomParams& atom, const FrequencyDesign& design,
                              const Eigen::VectorXd& cotangent);

// min_{beta >= 0} ||target - atoms * beta||_2, Lawson-Hanson active set.
// KKT residual below 1e-8 relative to the problem scale.
Eigen::VectorXd nnls(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& target);

// Greedy moment matching of the mixture CF to the sketch (CL-OMPR): in each
// outer round a new atom is found by gradient-ascending its normalized
// correlation with the residual, the support is hard-thresholded back to K
// atoms by NNLS weight, and all parameters and weights are refined by a
// joint projected gradient descent on ||y - sum_k beta_k psi_k||^2 over the
// complex sketch stacked as 2J reals. Deterministic given the seed.
MixtureParams clompr_fit(const Sketch& sketch, const FrequencyDesign& design,
                         const FitOptions& opts);

// ||y - sum_k pi_k psi_k||_2 over the stacked complex sketch; diagnostic.
double sketch_residual(const Sketch& sketch, const FrequencyDesign& design,
                       const MixtureParams& theta);

}  // namespace sasbss
