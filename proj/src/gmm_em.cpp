// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sasbss/gmm_em.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "sasbss/rng.hpp"

namespace sasbss {

void EmOptions::validate() const {
  if (K < 1) throw DomainError("EmOptions: K must be >= 1");
  if (n_restarts < 1) throw DomainError("EmOptions: need at least one restart");
  if (max_iterations < 1) throw DomainError("EmOptions: need at least one iteration");
  if (!(loglik_tolerance > 0.0)) throw DomainError("EmOptions: tolerance must be > 0");
}

Eigen::MatrixXcd normalize_columns(const Eigen::MatrixXcd& data) {
  std::vector<Eigen::Index> keep;
  keep.reserve(data.cols());
  for (Eigen::Index t = 0; t < data.cols(); ++t)
    if (data.col(t).norm() > 0.0) keep.push_back(t);
  Eigen::MatrixXcd out(data.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto c = data.col(keep[i]);
    out.col(static_cast<Eigen::Index>(i)) = c / c.norm();
  }
  return out;
}

namespace {

struct Component {
  Eigen::VectorXcd a;
  double sigma2 = 1.0;
  double pi = 1.0;
  // cached density terms
  double na2 = 0.0;
  double logdet = 0.0;
};

void refresh_cache(Component& c, int M) {
  c.na2 = c.a.squaredNorm();
  c.logdet = (M - 1.0) * std::log(c.sigma2) + std::log(c.sigma2 + c.na2);
}

// log N_c(x; 0, a a* + s2 I) with shared precomputation
double logpdf_cached(const Component& c, const Eigen::VectorXcd& x, double xn2, int M) {
  const double ax2 = std::norm(c.a.dot(x));
  const double quad = (xn2 - ax2 / (c.sigma2 + c.na2)) / c.sigma2;
  return -M * std::log(std::numbers::pi) - c.logdet - quad;
}

struct RunResult {
  std::vector<Component> comps;
  double loglik = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  bool ok = false;
};

RunResult run_em(const Eigen::MatrixXcd& x, const EmOptions& opts, std::uint64_t seed) {
  const int M = static_cast<int>(x.rows());
  const auto T = x.cols();
  const int K = opts.K;
  Rng rng(seed);

  Eigen::VectorXd xn2(T);
  for (Eigen::Index t = 0; t < T; ++t) xn2(t) = x.col(t).squaredNorm();
  const double mean_energy = xn2.mean();

  RunResult res;
  res.comps.resize(K);
  for (auto& c : res.comps) {
    // steer towards a random data point of nonzero energy
    Eigen::Index t = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(T)));
    for (int tries = 0; tries < 32 && xn2(t) == 0.0; ++tries)
      t = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(T)));
    c.a = x.col(t) * 0.7;
    c.sigma2 = std::max(0.5 * mean_energy / M, 1e-12);
    c.pi = 1.0 / K;
    refresh_cache(c, M);
  }

  Eigen::MatrixXd gamma(K, T);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    // E-step
    double ll = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      double lmax = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < K; ++k) {
        const auto& c = res.comps[k];
        const double lp = (c.pi > 0.0)
                              ? std::log(c.pi) + logpdf_cached(c, x.col(t), xn2(t), M)
                              : -std::numeric_limits<double>::infinity();
        gamma(k, t) = lp;
        lmax = std::max(lmax, lp);
      }
      double z = 0.0;
      for (int k = 0; k < K; ++k) z += std::exp(gamma(k, t) - lmax);
      ll += lmax + std::log(z);
      for (int k = 0; k < K; ++k)
        gamma(k, t) = std::exp(gamma(k, t) - lmax) / z;
    }
    if (!std::isfinite(ll)) return res;  // diverged, discard
    res.trace.push_back(ll);

    // M-step: weighted scatter + exact one-factor PPCA update
    for (int k = 0; k < K; ++k) {
      auto& c = res.comps[k];
      const double nk = gamma.row(k).sum();
      if (!(nk > 1e-12 * static_cast<double>(T))) return res;  // collapsed
      Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(M, M);
      for (Eigen::Index t = 0; t < T; ++t)
        S.noalias() += gamma(k, t) * (x.col(t) * x.col(t).adjoint());
      S /= nk;
      const double tr = S.real().trace();
      if (!(tr > 0.0)) return res;

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(S);
      if (eig.info() != Eigen::Success) return res;
      const double lam1 = eig.eigenvalues()(M - 1);
      const double eps = 1e-8 * tr / M;
      double s2;
      if (M > 1)
        s2 = std::max((tr - lam1) / (M - 1.0), eps);
      else
        s2 = std::max(0.5 * lam1, eps);  // M = 1: split evenly, PPCA unidentifiable
      c.a = eig.eigenvectors().col(M - 1) * std::sqrt(std::max(lam1 - s2, eps));
      c.sigma2 = s2;
      c.pi = nk / static_cast<double>(T);
      refresh_cache(c, M);
    }

    if (iter > 0) {
      const double change = std::abs(ll - prev_ll) / std::max(1.0, std::abs(ll));
      if (change < opts.loglik_tolerance) {
        prev_ll = ll;
        break;
      }
    }
    prev_ll = ll;
  }

  // score the final parameters
  double final_ll = 0.0;
  for (Eigen::Index t = 0; t < T; ++t) {
    double lmax = -std::numeric_limits<double>::infinity();
    std::vector<double> lp(K);
    for (int k = 0; k < K; ++k) {
      const auto& c = res.comps[k];
      lp[k] = (c.pi > 0.0) ? std::log(c.pi) + logpdf_cached(c, x.col(t), xn2(t), M)
                           : -std::numeric_limits<double>::infinity();
      lmax = std::max(lmax, lp[k]);
    }
    double z = 0.0;
    for (int k = 0; k < K; ++k) z += std::exp(lp[k] - lmax);
    final_ll += lmax + std::log(z);
  }
  if (!std::isfinite(final_ll)) return res;
  res.trace.push_back(final_ll);
  res.loglik = final_ll;
  res.ok = true;
  return res;
}

}  // namespace

EmResult em_fit(const Eigen::MatrixXcd& data, const EmOptions& opts) {
  opts.validate();
  if (data.cols() < 1) throw DataError("em_fit: empty data");

  Eigen::MatrixXcd x;
  if (opts.normalize_observations) {
    x = normalize_columns(data);
    if (x.cols() < 1) throw DataError("em_fit: no nonzero observations to normalize");
  } else {
    x = data;
  }

  EmResult best;
  bool have = false;
  for (int r = 0; r < opts.n_restarts; ++r) {
    const RunResult run = run_em(x, opts, Rng::derive(opts.seed, static_cast<std::uint64_t>(r)));
    if (!run.ok) continue;
    if (!have || run.loglik > best.loglik) {
      best.loglik = run.loglik;
      best.best_restart = r;
      best.loglik_trace = run.trace;
      best.params.components.clear();
      for (const auto& c : run.comps) {
        ComponentParams p;
        p.a = c.a;
        p.alpha = 2.0;
        p.sigma2 = c.sigma2;
        p.pi = c.pi;
        best.params.components.push_back(std::move(p));
      }
      have = true;
    }
  }
  if (!have) throw NumericalError("em_fit: every restart collapsed or diverged");

  // weights can drift from 1 by accumulated rounding; renormalize exactly
  double wsum = 0.0;
  for (const auto& c : best.params.components) wsum += c.pi;
  for (auto& c : best.params.components) c.pi /= wsum;
  best.params.validate();
  return best;
}

double per_frequency_loglik(const Eigen::MatrixXcd& data, const MixtureParams& theta,
                            double cov_scale) {
  theta.validate();
  if (data.cols() == 0) return 0.0;
  if (data.rows() != theta.channels())
    throw ShapeError("per_frequency_loglik: data and theta disagree on channels");
  const int K = theta.size();
  double total = 0.0;
  std::vector<double> lp(K);
  for (Eigen::Index t = 0; t < data.cols(); ++t) {
    double lmax = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      const auto& c = theta.components[k];
      lp[k] = (c.pi > 0.0)
                  ? std::log(c.pi) + gaussian_logpdf(data.col(t), c.a, c.sigma2, cov_scale)
                  : -std::numeric_limits<double>::infinity();
      lmax = std::max(lmax, lp[k]);
    }
    double z = 0.0;
    for (int k = 0; k < K; ++k) z += std::exp(lp[k] - lmax);
    total += lmax + std::log(z);
  }
  return total;
}

}  // namespace sasbss
