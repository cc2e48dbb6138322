// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sasbss/types.hpp"

namespace sasbss {

// One component of the per-frequency observation model: a dominant source
// with steering vector `a` and characteristic exponent `alpha`, plus an
// isotropic Gaussian residual of scale parameter `sigma2`. The source scale
// is folded into `a`.
struct ComponentParams {
  Eigen::VectorXcd a;
  double alpha = 2.0;   // characteristic exponent, (0, 2]
  double sigma2 = 1.0;  // residual scale parameter, > 0
  double pi = 1.0;      // mixing weight, [0, 1]

  int channels() const { return static_cast<int>(a.size()); }
  void validate() const;  // throws DomainError on violation
};

struct MixtureParams {
  std::vector<ComponentParams> components;

  int size() const { return static_cast<int>(components.size()); }
  int channels() const {
    return components.empty() ? 0 : components.front().channels();
  }
  // All components share M, weights sum to 1 within 1e-9.
  void validate() const;
};

// Characteristic function of the scalar unit-scale symmetric alpha-stable
// law: exp(-|omega|^alpha). Equals 1 iff omega_abs == 0.
double sas_scalar_cf(double omega_abs, double alpha);

// CF of one mixture component at probe omega (length M):
//   exp(-|a* omega|^alpha - sigma2 * ||omega||^2).
// Real-valued by symmetry. sigma2 = 0 is accepted here (pure stable part);
// estimators keep sigma2 strictly positive.
double component_cf(const ComponentParams& params, const Eigen::VectorXcd& omega);

// Convex combination of the component CFs with the mixing weights.
double mixture_cf(const MixtureParams& theta, const Eigen::VectorXcd& omega);

// n iid draws of the isotropic complex SaS law of unit scale, i.e. with
// E exp(i Re(conj(omega) s)) = exp(-|omega|^alpha). Sub-Gaussian
// construction: s = sqrt(A) * g with A a totally skewed positive
// (alpha/2)-stable variate (Chambers-Mallows-Stuck) and g circular complex
// Gaussian with E|g|^2 = 4. At alpha = 2 the output is exactly circular
// Gaussian (A == 1).
std::vector<cplx> sample_sas_complex(double alpha, std::size_t n, std::uint64_t seed);

// Totally skewed positive stable variate with Laplace transform
// E exp(-lambda A) = exp(-lambda^a), 0 < a < 1 (Kanter's form of CMS).
// Exposed for tests.
double sample_positive_stable(double a, class Rng& rng);

// Log-density of the circular-symmetric complex Gaussian
// N_c(x; 0, C) with C = cov_scale * (a a* + sigma2 I), evaluated with the
// rank-one determinant/inverse identities (no matrix factorization).
double gaussian_logpdf(const Eigen::VectorXcd& x, const Eigen::VectorXcd& a,
                       double sigma2, double cov_scale);

// ---------------------------------------------------------------------------
// Synthetic draws from the mixture model, used by estimators' consumers and
// tests. Columns of `x` are observations.

struct MixtureDraws {
  Eigen::MatrixXcd x;       // M x T
  std::vector<int> labels;  // component index per column
};

// CF-convention draws: dominant source is unit-scale SaS(alpha_k) steered by
// a_k, residual per-channel complex Gaussian with E|e_m|^2 = 4*sigma2_k, so
// the population CF is exactly component_cf.
MixtureDraws sample_stable_mixture(const MixtureParams& theta, std::size_t T,
                                   std::uint64_t seed);

// Likelihood-convention draws: x ~ N_c(0, cov_scale * (a_k a_k* + sigma2_k I)).
MixtureDraws sample_gaussian_mixture(const MixtureParams& theta, std::size_t T,
                                     std::uint64_t seed, double cov_scale = 1.0);

}  // namespace sasbss
