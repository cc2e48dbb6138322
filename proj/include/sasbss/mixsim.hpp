// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sasbss/stft.hpp"
#include "sasbss/types.hpp"

namespace sasbss {

// Anechoic stereo mixing: per source and channel a pure gain and an integer
// sample delay. One channel per source has delay 0; inter-channel gain
// ratios stay within 5 dB; delays within [0, 20] samples.
struct ChannelTap {
  double gain = 1.0;
  int delay = 0;
};

struct MixSpec {
  int K = 0;
  int M = 2;
  std::vector<std::array<ChannelTap, 2>> taps;  // taps[k][m]
  std::uint64_t seed = 0;

  void validate() const;
};

// Channel 1 fixed to gain 1 / delay 0; channel 2 gain log-uniform within
// +-5 dB, delay uniform in [0, 20]. K < 2 is rejected (a mixture needs at
// least two sources); explicit MixSpec structs may still carry K = 1.
MixSpec make_random_mixspec(int K, std::uint64_t seed);

void write_mixspec(const std::string& path, const MixSpec& spec);
MixSpec read_mixspec(const std::string& path);

struct MixResult {
  Eigen::MatrixXd mixture;               // 2 x N, exactly the sum of images
  std::vector<Eigen::MatrixXd> images;   // K stereo source images
};

// y_{k,m}[n] = gain_{km} * s_k[n - delay_{km}]; shorter sources are padded
// with zeros. When peak > 0, every image is scaled by a common factor so the
// mixture peak is `peak` and the mixture is re-accumulated afterwards, which
// keeps mixture == sum(images) exact.
MixResult gen_mixture(const std::vector<Eigen::VectorXd>& sources, const MixSpec& spec,
                      double peak = 0.0);

// True steering vector of source k at every one-sided bin of a length-W DFT:
// a_k(f) = [g_1 exp(-i 2 pi f d_1 / W), g_2 exp(-i 2 pi f d_2 / W)].
Eigen::MatrixXcd true_steering(const MixSpec& spec, int source, int window_length);

// Per-source alpha range for synthetic sources; lo == hi pins the exponent,
// otherwise each frequency band draws its own alpha uniformly in [lo, hi].
struct AlphaRange {
  double lo = 1.2;
  double hi = 1.6;
};

// Heavy-tailed synthetic test sources: iid unit-scale complex SaS STFT
// coefficients per band (per-band exponent), inverted to the time domain and
// peak-normalized to 0.5.
std::vector<Eigen::VectorXd> gen_synthetic_sources(int K, double duration_s,
                                                   double sample_rate,
                                                   const std::vector<AlphaRange>& alphas,
                                                   std::uint64_t seed,
                                                   int window_length = 1024,
                                                   int hop = 256);

// The spectral draw behind gen_synthetic_sources, exposed so its per-band
// law can be checked directly.
Spectrogram synth_source_spectrogram(Eigen::Index num_samples, double sample_rate,
                                     const AlphaRange& alpha, std::uint64_t seed,
                                     int window_length = 1024, int hop = 256);

}  // namespace sasbss
