// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Dense>
#include <string>

#include "sasbss/types.hpp"

namespace sasbss {

struct WavData {
  Eigen::MatrixXd samples;  // channels x N, in [-1, 1)
  double sample_rate = 0.0;
};

// 16-bit PCM little-endian RIFF only, mono or stereo. Samples are scaled by
// 1/32768, so write followed by load is bit-identical.
WavData load_wav(const std::string& path);
void write_wav(const std::string& path, const Eigen::MatrixXd& samples, double rate);

}  // namespace sasbss
