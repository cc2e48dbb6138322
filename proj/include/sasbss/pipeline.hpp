// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sasbss/clompr.hpp"
#include "sasbss/gmm_em.hpp"
#include "sasbss/sketch.hpp"
#include "sasbss/stable.hpp"
#include "sasbss/stft.hpp"
#include "sasbss/types.hpp"

namespace sasbss {

enum class Method { Em, Sawada, CfGmm, CfAlpha, Oracle };

Method method_from_name(const std::string& name);  // em|sawada|cf-gmm|cf-alpha|oracle
std::string method_name(Method m);
bool method_needs_fit(Method m);

struct PipelineOptions {
  int K = 2;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: hardware concurrency
  int sketch_J = 0; // 0: default_sketch_size(K, M)
  EmOptions em;     // K and seed fields are overridden per bin
  FitOptions cf;
};

// Result of fitting one frequency bin. cluster_scale is the covariance
// convention the parameters were estimated under (1 for likelihood fits, 4
// for CF fits) and is what the Gaussian-approximate clustering uses.
struct FrequencyFit {
  int f = 0;
  MixtureParams theta;
  Method method = Method::Em;
  double cluster_scale = 1.0;
  double objective = std::numeric_limits<double>::quiet_NaN();  // CF residual
  double loglik = std::numeric_limits<double>::quiet_NaN();
  bool fallback = false;
};

// Fits every frequency bin independently (in parallel); failed bins fall
// back to a flagged single-component fit instead of aborting the run.
// Throws DataError("degenerate data scale") for an all-zero spectrogram.
std::vector<FrequencyFit> fit_all_frequencies(const Spectrogram& spec, Method method,
                                              const PipelineOptions& opts);

// Hard per-bin assignment; exactly one label per TF bin.
struct MaskSet {
  Eigen::MatrixXi labels;  // F x T, values in [0, K)
  int K = 0;
};

// z(f,t) = argmax_k log pi_k + log N_c(x; 0, cluster_scale (a a* + s2 I)),
// ties to the smallest k. Sawada fits classify the unit-normalized point.
MaskSet cluster(const Spectrogram& spec, const std::vector<FrequencyFit>& fits);

// Estimated image spectrograms y_k = 1[z = k] . x; they partition x
// bit-exactly.
std::vector<Spectrogram> apply_masks(const Spectrogram& spec, const MaskSet& masks);

// Ideal binary mask from the true images: the per-bin energy argmax.
MaskSet oracle_mask(const std::vector<Spectrogram>& truth);

// Per-frequency permutation minimizing the MSE to the true images,
// exhaustive over K! (refused for K > 8). permutations[f][k] is the estimate
// index assigned to true source k.
struct PermuteResult {
  std::vector<std::vector<int>> permutations;
  std::vector<Spectrogram> realigned;
};
PermuteResult oracle_permute(const std::vector<Spectrogram>& estimates,
                             const std::vector<Spectrogram>& truth);

struct SeparationOutput {
  std::vector<Eigen::MatrixXd> estimates;  // K stereo time signals
  std::vector<FrequencyFit> fits;          // empty for the oracle method
  MaskSet masks;
  std::vector<std::vector<int>> permutations;  // empty without truth
  Spectrogram mixture_spec;
};

// stft -> fit -> cluster -> mask -> (oracle permutation when truth images
// are given) -> istft. The oracle method requires truth.
SeparationOutput separate(const Eigen::MatrixXd& mixture, double sample_rate,
                          Method method, const PipelineOptions& opts,
                          const std::vector<Eigen::MatrixXd>* truth_images = nullptr,
                          int window_length = 1024, int hop = 256);

}  // namespace sasbss
