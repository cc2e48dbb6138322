// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sasbss/types.hpp"

namespace sasbss {

// One-sided complex STFT tensor. channels[m] is F x T with
// F = window_length/2 + 1. num_samples remembers the analyzed signal length
// so the inverse can trim its padding exactly.
struct Spectrogram {
  std::vector<Eigen::MatrixXcd> channels;
  double sample_rate = 16000.0;
  int window_length = 1024;
  int hop = 256;
  Eigen::Index num_samples = 0;

  int num_channels() const { return static_cast<int>(channels.size()); }
  int num_bins() const {
    return channels.empty() ? 0 : static_cast<int>(channels.front().rows());
  }
  int num_frames() const {
    return channels.empty() ? 0 : static_cast<int>(channels.front().cols());
  }
  void validate() const;
};

// Periodic Hamming analysis with hop-divides-window framing and zero padding
// at both ends so every sample is covered by window/hop frames. Defaults are
// 64 ms windows at 16 kHz with 75% overlap.
Spectrogram stft(const Eigen::MatrixXd& signal, double sample_rate,
                 int window_length = 1024, int hop = 256);

// Weighted overlap-add inverse: synthesis re-applies the analysis window and
// normalizes by the summed squared window. Round-trips stft() below -60 dB.
// The imaginary parts of the DC and Nyquist bins are ignored (a real signal
// has none).
Eigen::MatrixXd istft(const Spectrogram& spec);

// Frame count the analysis produces for a given signal length.
Eigen::Index stft_num_frames(Eigen::Index num_samples, int window_length, int hop);

}  // namespace sasbss
