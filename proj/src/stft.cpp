// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sasbss/stft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace sasbss {

namespace {

// FFTW plan creation is not thread safe; execution is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

Eigen::VectorXd periodic_hamming(int n) {
  Eigen::VectorXd w(n);
  for (int k = 0; k < n; ++k)
    w(k) = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * k / n);
  return w;
}

void check_geometry(int window_length, int hop) {
  if (window_length < 2 || window_length % 2 != 0)
    throw ConfigError("stft: window length must be even and >= 2");
  if (hop < 1 || window_length % hop != 0)
    throw ConfigError("stft: hop must divide the window length");
}

struct PlanGuard {
  fftw_plan plan = nullptr;
  ~PlanGuard() {
    if (plan) {
      std::lock_guard<std::mutex> lock(fftw_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

struct BufGuard {
  void* p = nullptr;
  ~BufGuard() {
    if (p) fftw_free(p);
  }
};

}  // namespace

void Spectrogram::validate() const {
  check_geometry(window_length, hop);
  if (channels.empty()) throw ShapeError("spectrogram has no channels");
  const auto F = channels.front().rows();
  const auto T = channels.front().cols();
  if (F != window_length / 2 + 1)
    throw ShapeError("spectrogram bin count does not match window length");
  for (const auto& c : channels)
    if (c.rows() != F || c.cols() != T)
      throw ShapeError("spectrogram channels disagree on shape");
  if (!(sample_rate > 0.0)) throw ConfigError("spectrogram sample rate must be > 0");
}

Eigen::Index stft_num_frames(Eigen::Index num_samples, int window_length, int hop) {
  check_geometry(window_length, hop);
  const Eigen::Index pad_left = window_length - hop;
  return (num_samples - 1 + pad_left) / hop + 1;
}

Spectrogram stft(const Eigen::MatrixXd& signal, double sample_rate,
                 int window_length, int hop) {
  check_geometry(window_length, hop);
  if (!(sample_rate > 0.0)) throw ConfigError("stft: sample rate must be > 0");
  const auto M = signal.rows();
  const auto N = signal.cols();
  if (M < 1) throw ShapeError("stft: no channels");
  if (N < window_length) throw DataError("stft: signal shorter than one window");

  const int W = window_length;
  const int F = W / 2 + 1;
  const Eigen::Index pad_left = W - hop;
  const Eigen::Index T = stft_num_frames(N, W, hop);
  const Eigen::VectorXd win = periodic_hamming(W);

  Spectrogram spec;
  spec.sample_rate = sample_rate;
  spec.window_length = W;
  spec.hop = hop;
  spec.num_samples = N;
  spec.channels.assign(M, Eigen::MatrixXcd(F, T));

  BufGuard inb{fftw_malloc(sizeof(double) * W)};
  BufGuard outb{fftw_malloc(sizeof(fftw_complex) * F)};
  auto* in = static_cast<double*>(inb.p);
  auto* out = static_cast<fftw_complex*>(outb.p);
  PlanGuard plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan.plan = fftw_plan_dft_r2c_1d(W, in, out, FFTW_ESTIMATE);
  }

  for (Eigen::Index m = 0; m < M; ++m) {
    for (Eigen::Index t = 0; t < T; ++t) {
      const Eigen::Index start = t * hop - pad_left;
      for (int k = 0; k < W; ++k) {
        const Eigen::Index n = start + k;
        in[k] = (n >= 0 && n < N) ? signal(m, n) * win(k) : 0.0;
      }
      fftw_execute(plan.plan);
      for (int f = 0; f < F; ++f)
        spec.channels[m](f, t) = cplx(out[f][0], out[f][1]);
    }
  }
  return spec;
}

Eigen::MatrixXd istft(const Spectrogram& spec) {
  spec.validate();
  const int W = spec.window_length;
  const int hop = spec.hop;
  const int F = W / 2 + 1;
  const auto M = static_cast<Eigen::Index>(spec.channels.size());
  const auto T = static_cast<Eigen::Index>(spec.num_frames());
  const Eigen::Index pad_left = W - hop;
  const Eigen::Index padded = (T - 1) * hop + W;
  Eigen::Index N = spec.num_samples;
  if (N <= 0) N = padded - 2 * pad_left;  // synthesized spectrograms
  if (N + pad_left > padded)
    throw ShapeError("istft: frame count too small for the declared length");

  const Eigen::VectorXd win = periodic_hamming(W);
  Eigen::VectorXd den = Eigen::VectorXd::Zero(padded);
  for (Eigen::Index t = 0; t < T; ++t)
    for (int k = 0; k < W; ++k) den(t * hop + k) += win(k) * win(k);

  BufGuard inb{fftw_malloc(sizeof(fftw_complex) * F)};
  BufGuard outb{fftw_malloc(sizeof(double) * W)};
  auto* in = static_cast<fftw_complex*>(inb.p);
  auto* out = static_cast<double*>(outb.p);
  PlanGuard plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan.plan = fftw_plan_dft_c2r_1d(W, in, out, FFTW_ESTIMATE);
  }

  Eigen::MatrixXd signal = Eigen::MatrixXd::Zero(M, N);
  Eigen::VectorXd acc(padded);
  for (Eigen::Index m = 0; m < M; ++m) {
    acc.setZero();
    for (Eigen::Index t = 0; t < T; ++t) {
      for (int f = 0; f < F; ++f) {
        const cplx v = spec.channels[m](f, t);
        in[f][0] = v.real();
        in[f][1] = (f == 0 || f == F - 1) ? 0.0 : v.imag();
      }
      fftw_execute(plan.plan);
      const Eigen::Index base = t * hop;
      for (int k = 0; k < W; ++k) acc(base + k) += win(k) * out[k] / W;
    }
    for (Eigen::Index n = 0; n < N; ++n) {
      const double d = den(n + pad_left);
      signal(m, n) = d > 0.0 ? acc(n + pad_left) / d : 0.0;
    }
  }
  return signal;
}

}  // namespace sasbss
