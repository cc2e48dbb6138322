// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sasbss/mixsim.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sasbss/rng.hpp"
#include "sasbss/stable.hpp"

namespace sasbss {

namespace {
constexpr double kMaxGainRatio = 1.7782794100389228;  // 10^(5/20)
constexpr int kMaxDelay = 20;
}  // namespace

void MixSpec::validate() const {
  if (M != 2) throw DomainError("mixspec: only stereo (M = 2) is supported");
  if (K < 1 || static_cast<int>(taps.size()) != K)
    throw DomainError("mixspec: tap table does not match K");
  for (const auto& t : taps) {
    const double g1 = t[0].gain, g2 = t[1].gain;
    if (!(g1 > 0.0) || !(g2 > 0.0)) throw DomainError("mixspec: gains must be > 0");
    const double ratio = std::max(g1 / g2, g2 / g1);
    if (ratio > kMaxGainRatio * (1.0 + 1e-12))
      throw DomainError("mixspec: inter-channel gain ratio exceeds 5 dB");
    for (int m = 0; m < 2; ++m)
      if (t[m].delay < 0 || t[m].delay > kMaxDelay)
        throw DomainError("mixspec: delay outside [0, 20] samples");
    if (t[0].delay != 0 && t[1].delay != 0)
      throw DomainError("mixspec: one channel per source must have zero delay");
  }
}

MixSpec make_random_mixspec(int K, std::uint64_t seed) {
  if (K < 2) throw DataError("mixspec: a mixture needs at least 2 sources");
  Rng rng(seed);
  MixSpec spec;
  spec.K = K;
  spec.seed = seed;
  spec.taps.resize(K);
  for (int k = 0; k < K; ++k) {
    spec.taps[k][0] = ChannelTap{1.0, 0};
    const double db = rng.uniform_in(-5.0, 5.0);
    const int delay = static_cast<int>(rng.below(kMaxDelay + 1));
    spec.taps[k][1] = ChannelTap{std::pow(10.0, db / 20.0), delay};
  }
  spec.validate();
  return spec;
}

void write_mixspec(const std::string& path, const MixSpec& spec) {
  spec.validate();
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw DataError("mixspec: cannot write " + path);
  f << "# sasbss mixspec v1\n";
  f << "K = " << spec.K << "\n";
  f << "M = " << spec.M << "\n";
  f << "seed = " << spec.seed << "\n";
  f << "# source <k> <gain1> <delay1> <gain2> <delay2>\n";
  f.precision(17);
  for (int k = 0; k < spec.K; ++k)
    f << "source " << (k + 1) << " " << spec.taps[k][0].gain << " "
      << spec.taps[k][0].delay << " " << spec.taps[k][1].gain << " "
      << spec.taps[k][1].delay << "\n";
  if (!f) throw DataError("mixspec: write failed for " + path);
}

MixSpec read_mixspec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("mixspec: cannot open " + path);
  MixSpec spec;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "K") {
      std::string eq;
      ss >> eq >> spec.K;
      spec.taps.resize(spec.K);
    } else if (key == "M") {
      std::string eq;
      ss >> eq >> spec.M;
    } else if (key == "seed") {
      std::string eq;
      ss >> eq >> spec.seed;
    } else if (key == "source") {
      int k = 0;
      ss >> k;
      if (k < 1 || k > static_cast<int>(spec.taps.size()))
        throw DataError("mixspec: source index out of range in " + path);
      auto& t = spec.taps[k - 1];
      ss >> t[0].gain >> t[0].delay >> t[1].gain >> t[1].delay;
    } else {
      throw DataError("mixspec: unknown key '" + key + "' in " + path);
    }
    if (ss.fail()) throw DataError("mixspec: malformed line in " + path);
  }
  spec.validate();
  return spec;
}

MixResult gen_mixture(const std::vector<Eigen::VectorXd>& sources, const MixSpec& spec,
                      double peak) {
  spec.validate();
  if (static_cast<int>(sources.size()) != spec.K)
    throw ShapeError("gen_mixture: source count does not match mixspec");
  Eigen::Index N = 0;
  for (const auto& s : sources) N = std::max(N, s.size());
  if (N == 0) throw DataError("gen_mixture: empty sources");

  MixResult res;
  res.images.resize(spec.K);
  auto render = [&](int k) {
    Eigen::MatrixXd img = Eigen::MatrixXd::Zero(2, N);
    const auto& s = sources[k];
    for (int m = 0; m < 2; ++m) {
      const auto& tap = spec.taps[k][m];
      for (Eigen::Index n = tap.delay; n < N; ++n) {
        const Eigen::Index j = n - tap.delay;
        if (j < s.size()) img(m, n) = tap.gain * s(j);
      }
    }
    return img;
  };
  for (int k = 0; k < spec.K; ++k) res.images[k] = render(k);

  res.mixture = Eigen::MatrixXd::Zero(2, N);
  for (const auto& img : res.images) res.mixture += img;

  if (peak > 0.0) {
    const double p = res.mixture.cwiseAbs().maxCoeff();
    if (p > 0.0) {
      const double c = peak / p;
      for (auto& img : res.images) img *= c;
      res.mixture.setZero();
      for (const auto& img : res.images) res.mixture += img;
    }
  }
  return res;
}

Eigen::MatrixXcd true_steering(const MixSpec& spec, int source, int window_length) {
  spec.validate();
  if (source < 0 || source >= spec.K) throw ShapeError("true_steering: bad source index");
  const int F = window_length / 2 + 1;
  Eigen::MatrixXcd a(2, F);
  for (int m = 0; m < 2; ++m) {
    const auto& tap = spec.taps[source][m];
    for (int f = 0; f < F; ++f) {
      const double phase = -2.0 * std::numbers::pi * f * tap.delay / window_length;
      a(m, f) = tap.gain * cplx(std::cos(phase), std::sin(phase));
    }
  }
  return a;
}

Spectrogram synth_source_spectrogram(Eigen::Index num_samples, double sample_rate,
                                     const AlphaRange& alpha, std::uint64_t seed,
                                     int window_length, int hop) {
  if (!(alpha.lo > 0.0) || !(alpha.hi <= 2.0) || alpha.lo > alpha.hi)
    throw DomainError("synthetic source: alpha range must lie in (0, 2]");
  const int F = window_length / 2 + 1;
  const Eigen::Index T = stft_num_frames(num_samples, window_length, hop);

  Spectrogram spec;
  spec.sample_rate = sample_rate;
  spec.window_length = window_length;
  spec.hop = hop;
  spec.num_samples = num_samples;
  spec.channels.assign(1, Eigen::MatrixXcd(F, T));

  Rng rng(seed);
  for (int f = 0; f < F; ++f) {
    const double a = (alpha.lo == alpha.hi) ? alpha.lo : rng.uniform_in(alpha.lo, alpha.hi);
    const auto coeffs =
        sample_sas_complex(a, static_cast<std::size_t>(T), rng.next_u64());
    for (Eigen::Index t = 0; t < T; ++t) spec.channels[0](f, t) = coeffs[t];
  }
  return spec;
}

std::vector<Eigen::VectorXd> gen_synthetic_sources(int K, double duration_s,
                                                   double sample_rate,
                                                   const std::vector<AlphaRange>& alphas,
                                                   std::uint64_t seed,
                                                   int window_length, int hop) {
  if (K < 1) throw DomainError("synthetic sources: K must be >= 1");
  if (alphas.size() != static_cast<std::size_t>(K))
    throw ShapeError("synthetic sources: alpha list does not match K");
  const auto N = static_cast<Eigen::Index>(std::llround(duration_s * sample_rate));
  if (N < window_length) throw DataError("synthetic sources: duration too short");

  std::vector<Eigen::VectorXd> out(K);
  for (int k = 0; k < K; ++k) {
    const Spectrogram spec =
        synth_source_spectrogram(N, sample_rate, alphas[static_cast<std::size_t>(k)],
                                 Rng::derive(seed, static_cast<std::uint64_t>(k)),
                                 window_length, hop);
    Eigen::MatrixXd sig = istft(spec);
    const double p = sig.cwiseAbs().maxCoeff();
    if (p > 0.0) sig *= 0.5 / p;
    out[k] = sig.row(0).transpose();
  }
  return out;
}

}  // namespace sasbss
