// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sasbss/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "sasbss/rng.hpp"

namespace sasbss {

Method method_from_name(const std::string& name) {
  if (name == "em") return Method::Em;
  if (name == "sawada") return Method::Sawada;
  if (name == "cf-gmm") return Method::CfGmm;
  if (name == "cf-alpha") return Method::CfAlpha;
  if (name == "oracle") return Method::Oracle;
  throw ConfigError("unknown method '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Em: return "em";
    case Method::Sawada: return "sawada";
    case Method::CfGmm: return "cf-gmm";
    case Method::CfAlpha: return "cf-alpha";
    case Method::Oracle: return "oracle";
  }
  return "?";
}

bool method_needs_fit(Method m) { return m != Method::Oracle; }

namespace {

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Index-stealing parallel loop; each index is an independent work unit so
// the merged result does not depend on scheduling.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::min(resolve_threads(threads), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Eigen::MatrixXcd bin_data(const Spectrogram& spec, int f) {
  const auto M = static_cast<Eigen::Index>(spec.channels.size());
  const auto T = static_cast<Eigen::Index>(spec.num_frames());
  Eigen::MatrixXcd x(M, T);
  for (Eigen::Index m = 0; m < M; ++m) x.row(m) = spec.channels[m].row(f);
  return x;
}

// Single-component probabilistic-PCA fit used when a bin's estimator fails.
// `scale` divides the covariance so the parameters live in the requesting
// method's clustering convention.
MixtureParams fallback_fit(const Eigen::MatrixXcd& x, double scale) {
  const int M = static_cast<int>(x.rows());
  ComponentParams c;
  c.alpha = 2.0;
  c.pi = 1.0;
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(M, M);
  for (Eigen::Index t = 0; t < x.cols(); ++t)
    S.noalias() += x.col(t) * x.col(t).adjoint();
  S /= std::max<Eigen::Index>(1, x.cols());
  const double tr = S.real().trace();
  if (tr > 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(S);
    const double lam1 = eig.eigenvalues()(M - 1);
    const double eps = 1e-8 * tr / M;
    const double s2 = (M > 1) ? std::max((tr - lam1) / (M - 1.0), eps)
                              : std::max(0.5 * lam1, eps);
    c.a = eig.eigenvectors().col(M - 1) * std::sqrt(std::max(lam1 - s2, eps) / scale);
    c.sigma2 = s2 / scale;
  } else {
    c.a = Eigen::VectorXcd::Zero(M);
    c.a(0) = 1.0;
    c.sigma2 = 1.0;
  }
  MixtureParams theta;
  theta.components.push_back(std::move(c));
  return theta;
}

double cf_cluster_scale() { return 4.0; }

}  // namespace

std::vector<FrequencyFit> fit_all_frequencies(const Spectrogram& spec, Method method,
                                              const PipelineOptions& opts) {
  spec.validate();
  if (!method_needs_fit(method))
    throw ConfigError("fit_all_frequencies: oracle method does not fit");
  bool any_energy = false;
  for (const auto& c : spec.channels)
    if (c.squaredNorm() > 0.0) {
      any_energy = true;
      break;
    }
  if (!any_energy) throw DataError("degenerate data scale");

  const int F = spec.num_bins();
  const int M = spec.num_channels();
  const bool cf_method = (method == Method::CfGmm || method == Method::CfAlpha);
  const double scale = cf_method ? cf_cluster_scale() : 1.0;
  const int J = opts.sketch_J > 0 ? opts.sketch_J : default_sketch_size(opts.K, M);

  std::vector<FrequencyFit> fits(F);
  parallel_for(F, opts.threads, [&](int f) {
    FrequencyFit fit;
    fit.f = f;
    fit.method = method;
    fit.cluster_scale = scale;
    const Eigen::MatrixXcd x = bin_data(spec, f);
    const std::uint64_t seed_f = Rng::derive(opts.seed, static_cast<std::uint64_t>(f));
    try {
      if (cf_method) {
        const FrequencyDesign design = draw_frequencies(x, J, Rng::derive(seed_f, 1));
        const Sketch sk = compute_sketch(x, design);
        FitOptions fo = opts.cf;
        fo.K = opts.K;
        fo.alpha_locked = (method == Method::CfGmm);
        fo.seed = Rng::derive(seed_f, 2);
        fit.theta = clompr_fit(sk, design, fo);
        fit.objective = sketch_residual(sk, design, fit.theta);
        fit.loglik = per_frequency_loglik(x, fit.theta, scale);
      } else {
        EmOptions eo = opts.em;
        eo.K = opts.K;
        eo.seed = seed_f;
        eo.normalize_observations = (method == Method::Sawada);
        const EmResult res = em_fit(x, eo);
        fit.theta = res.params;
        fit.loglik = res.loglik;
      }
    } catch (const DataError&) {
      fit.theta = fallback_fit(x, scale);
      fit.fallback = true;
    } catch (const NumericalError&) {
      fit.theta = fallback_fit(x, scale);
      fit.fallback = true;
    }
    fits[f] = std::move(fit);
  });
  return fits;
}

MaskSet cluster(const Spectrogram& spec, const std::vector<FrequencyFit>& fits) {
  spec.validate();
  const int F = spec.num_bins();
  const auto T = static_cast<Eigen::Index>(spec.num_frames());
  const auto M = static_cast<Eigen::Index>(spec.num_channels());
  if (static_cast<int>(fits.size()) != F)
    throw ShapeError("cluster: fits do not cover every frequency");

  MaskSet masks;
  masks.K = fits.empty() ? 0 : fits.front().theta.size();
  for (const auto& fit : fits) masks.K = std::max(masks.K, fit.theta.size());
  masks.labels.resize(F, T);

  Eigen::VectorXcd x(M);
  for (int f = 0; f < F; ++f) {
    const auto& fit = fits[f];
    const bool normalize = (fit.method == Method::Sawada);
    const int K = fit.theta.size();
    for (Eigen::Index t = 0; t < T; ++t) {
      for (Eigen::Index m = 0; m < M; ++m) x(m) = spec.channels[m](f, t);
      if (normalize) {
        const double n = x.norm();
        if (n > 0.0) x /= n;
      }
      int best_k = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < K; ++k) {
        const auto& c = fit.theta.components[k];
        if (!(c.pi > 0.0)) continue;
        const double lp = std::log(c.pi) +
                          gaussian_logpdf(x, c.a, c.sigma2, fit.cluster_scale);
        if (lp > best) {  // strict: ties keep the smallest k
          best = lp;
          best_k = k;
        }
      }
      masks.labels(f, t) = best_k;
    }
  }
  return masks;
}

std::vector<Spectrogram> apply_masks(const Spectrogram& spec, const MaskSet& masks) {
  spec.validate();
  const int F = spec.num_bins();
  const auto T = static_cast<Eigen::Index>(spec.num_frames());
  if (masks.labels.rows() != F || masks.labels.cols() != T)
    throw ShapeError("apply_masks: mask shape does not match spectrogram");

  std::vector<Spectrogram> images(masks.K, spec);
  for (int k = 0; k < masks.K; ++k)
    for (auto& c : images[k].channels) c.setZero();
  for (int f = 0; f < F; ++f)
    for (Eigen::Index t = 0; t < T; ++t) {
      const int k = masks.labels(f, t);
      if (k < 0 || k >= masks.K) throw ShapeError("apply_masks: label out of range");
      for (std::size_t m = 0; m < spec.channels.size(); ++m)
        images[k].channels[m](f, t) = spec.channels[m](f, t);
    }
  return images;
}

MaskSet oracle_mask(const std::vector<Spectrogram>& truth) {
  if (truth.empty()) throw ShapeError("oracle_mask: no truth images");
  const int K = static_cast<int>(truth.size());
  const int F = truth.front().num_bins();
  const auto T = static_cast<Eigen::Index>(truth.front().num_frames());
  for (const auto& s : truth)
    if (s.num_bins() != F || s.num_frames() != T ||
        s.channels.size() != truth.front().channels.size())
      throw ShapeError("oracle_mask: truth images disagree on shape");

  MaskSet masks;
  masks.K = K;
  masks.labels.resize(F, T);
  for (int f = 0; f < F; ++f)
    for (Eigen::Index t = 0; t < T; ++t) {
      int best_k = 0;
      double best = -1.0;
      for (int k = 0; k < K; ++k) {
        double e = 0.0;
        for (const auto& c : truth[k].channels) e += std::norm(c(f, t));
        if (e > best) {  // strict: ties keep the smallest k
          best = e;
          best_k = k;
        }
      }
      masks.labels(f, t) = best_k;
    }
  return masks;
}

PermuteResult oracle_permute(const std::vector<Spectrogram>& estimates,
                             const std::vector<Spectrogram>& truth) {
  const int K = static_cast<int>(estimates.size());
  if (K == 0 || truth.size() != estimates.size())
    throw ShapeError("oracle_permute: estimate/truth count mismatch");
  if (K > 8) throw DataError("oracle_permute: refusing K > 8 (K! permutations)");
  const int F = estimates.front().num_bins();
  const auto T = static_cast<Eigen::Index>(estimates.front().num_frames());
  const auto M = estimates.front().channels.size();
  for (const auto& s : estimates)
    if (s.num_bins() != F || s.num_frames() != T || s.channels.size() != M)
      throw ShapeError("oracle_permute: estimates disagree on shape");
  for (const auto& s : truth)
    if (s.num_bins() != F || s.num_frames() != T || s.channels.size() != M)
      throw ShapeError("oracle_permute: truth shape mismatch");

  PermuteResult res;
  res.permutations.assign(F, std::vector<int>(K));
  res.realigned.assign(K, estimates.front());

  Eigen::MatrixXd cost(K, K);
  std::vector<int> perm(K), best_perm(K);
  for (int f = 0; f < F; ++f) {
    // cost(i, j) = || est_i - truth_j ||^2 at this frequency
    for (int i = 0; i < K; ++i)
      for (int j = 0; j < K; ++j) {
        double c = 0.0;
        for (std::size_t m = 0; m < M; ++m)
          c += (estimates[i].channels[m].row(f) - truth[j].channels[m].row(f))
                   .squaredNorm();
        cost(i, j) = c;
      }
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (int k = 0; k < K; ++k) c += cost(perm[k], k);
      if (c < best) {  // strict: ties keep the lexicographically first
        best = c;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    res.permutations[f] = best_perm;
    for (int k = 0; k < K; ++k)
      for (std::size_t m = 0; m < M; ++m)
        res.realigned[k].channels[m].row(f) = estimates[best_perm[k]].channels[m].row(f);
  }
  return res;
}

SeparationOutput separate(const Eigen::MatrixXd& mixture, double sample_rate,
                          Method method, const PipelineOptions& opts,
                          const std::vector<Eigen::MatrixXd>* truth_images,
                          int window_length, int hop) {
  SeparationOutput out;
  out.mixture_spec = stft(mixture, sample_rate, window_length, hop);

  std::vector<Spectrogram> truth_specs;
  if (truth_images) {
    for (const auto& y : *truth_images)
      truth_specs.push_back(stft(y, sample_rate, window_length, hop));
  }

  if (method == Method::Oracle) {
    if (!truth_images) throw ConfigError("oracle method requires truth images");
    out.masks = oracle_mask(truth_specs);
  } else {
    out.fits = fit_all_frequencies(out.mixture_spec, method, opts);
    out.masks = cluster(out.mixture_spec, out.fits);
  }

  std::vector<Spectrogram> images = apply_masks(out.mixture_spec, out.masks);
  if (truth_images && method != Method::Oracle) {
    PermuteResult pr = oracle_permute(images, truth_specs);
    images = std::move(pr.realigned);
    out.permutations = std::move(pr.permutations);
  }

  out.estimates.reserve(images.size());
  for (const auto& img : images) out.estimates.push_back(istft(img));
  return out;
}

}  // namespace sasbss
