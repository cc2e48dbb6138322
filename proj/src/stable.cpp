// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sasbss/stable.hpp"

#include <cmath>
#include <numbers>

#include "sasbss/rng.hpp"

namespace sasbss {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !(alpha <= 2.0) || !std::isfinite(alpha))
    throw DomainError("alpha must lie in (0, 2], got " + std::to_string(alpha));
}

}  // namespace

void ComponentParams::validate() const {
  check_alpha(alpha);
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw DomainError("sigma2 must be > 0, got " + std::to_string(sigma2));
  if (!(pi >= 0.0 && pi <= 1.0))
    throw DomainError("pi must lie in [0, 1], got " + std::to_string(pi));
  if (!a.allFinite()) throw DomainError("steering vector has non-finite entries");
  if (!(a.norm() > 0.0)) throw DomainError("steering vector must be nonzero");
}

void MixtureParams::validate() const {
  if (components.empty()) throw DomainError("mixture has no components");
  const int M = components.front().channels();
  double wsum = 0.0;
  for (const auto& c : components) {
    c.validate();
    if (c.channels() != M)
      throw ShapeError("mixture components disagree on channel count");
    wsum += c.pi;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw DomainError("mixture weights sum to " + std::to_string(wsum));
}

double sas_scalar_cf(double omega_abs, double alpha) {
  check_alpha(alpha);
  if (!(omega_abs >= 0.0) || !std::isfinite(omega_abs))
    throw DomainError("|omega| must be finite and nonnegative");
  return std::exp(-std::pow(omega_abs, alpha));
}

double component_cf(const ComponentParams& params, const Eigen::VectorXcd& omega) {
  check_alpha(params.alpha);
  if (params.sigma2 < 0.0) throw DomainError("sigma2 must be nonnegative");
  if (omega.size() != params.a.size())
    throw ShapeError("omega dimension does not match steering vector");
  const double g = std::abs(params.a.dot(omega));  // |a* omega|
  return std::exp(-std::pow(g, params.alpha) -
                  params.sigma2 * omega.squaredNorm());
}

double mixture_cf(const MixtureParams& theta, const Eigen::VectorXcd& omega) {
  theta.validate();
  double acc = 0.0;
  for (const auto& c : theta.components) acc += c.pi * component_cf(c, omega);
  return acc;
}

double sample_positive_stable(double a, Rng& rng) {
  // Kanter: A = sin(a th) / sin(th)^(1/a) * (sin((1-a) th) / W)^((1-a)/a),
  // th ~ U(0, pi), W ~ Exp(1); Laplace transform exp(-lambda^a).
  const double th = std::numbers::pi * rng.uniform_open();
  const double w = rng.exponential();
  const double ratio = (1.0 - a) / a;
  return std::sin(a * th) * std::pow(std::sin(th), -1.0 / a) *
         std::pow(std::sin((1.0 - a) * th) / w, ratio);
}

std::vector<cplx> sample_sas_complex(double alpha, std::size_t n, std::uint64_t seed) {
  check_alpha(alpha);
  if (n == 0) throw DomainError("sample count must be >= 1");
  Rng rng(seed);
  std::vector<cplx> out(n);
  if (alpha == 2.0) {
    for (auto& s : out) s = 2.0 * rng.cnormal();
    return out;
  }
  const double half = 0.5 * alpha;
  for (auto& s : out) {
    const double A = sample_positive_stable(half, rng);
    s = 2.0 * std::sqrt(A) * rng.cnormal();
  }
  return out;
}

double gaussian_logpdf(const Eigen::VectorXcd& x, const Eigen::VectorXcd& a,
                       double sigma2, double cov_scale) {
  if (!(sigma2 > 0.0)) throw DomainError("sigma2 must be > 0");
  if (!(cov_scale > 0.0)) throw DomainError("cov_scale must be > 0");
  if (x.size() != a.size()) throw ShapeError("x and a dimensions differ");
  const auto M = static_cast<double>(x.size());
  const double na2 = a.squaredNorm();
  // det(aa* + s2 I) = s2^(M-1) * (s2 + |a|^2); Sherman-Morrison for the
  // quadratic form.
  const double logdet = M * std::log(cov_scale) + (M - 1.0) * std::log(sigma2) +
                        std::log(sigma2 + na2);
  const double ax2 = std::norm(a.dot(x));
  const double quad =
      (x.squaredNorm() - ax2 / (sigma2 + na2)) / (sigma2 * cov_scale);
  return -M * std::log(std::numbers::pi) - logdet - quad;
}

namespace {

int draw_label(const MixtureParams& theta, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  const int K = theta.size();
  for (int k = 0; k < K; ++k) {
    cum += theta.components[k].pi;
    if (u < cum) return k;
  }
  return K - 1;
}

}  // namespace

MixtureDraws sample_stable_mixture(const MixtureParams& theta, std::size_t T,
                                   std::uint64_t seed) {
  theta.validate();
  const int M = theta.channels();
  Rng rng(seed);
  MixtureDraws d;
  d.x.resize(M, static_cast<Eigen::Index>(T));
  d.labels.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const int k = draw_label(theta, rng);
    const auto& c = theta.components[k];
    cplx s;
    if (c.alpha == 2.0) {
      s = 2.0 * rng.cnormal();
    } else {
      const double A = sample_positive_stable(0.5 * c.alpha, rng);
      s = 2.0 * std::sqrt(A) * rng.cnormal();
    }
    const double es = 2.0 * std::sqrt(c.sigma2);  // E|e_m|^2 = 4 sigma2
    for (int m = 0; m < M; ++m)
      d.x(m, static_cast<Eigen::Index>(t)) = c.a(m) * s + es * rng.cnormal();
    d.labels[t] = k;
  }
  return d;
}

MixtureDraws sample_gaussian_mixture(const MixtureParams& theta, std::size_t T,
                                     std::uint64_t seed, double cov_scale) {
  theta.validate();
  if (!(cov_scale > 0.0)) throw DomainError("cov_scale must be > 0");
  const int M = theta.channels();
  const double root = std::sqrt(cov_scale);
  Rng rng(seed);
  MixtureDraws d;
  d.x.resize(M, static_cast<Eigen::Index>(T));
  d.labels.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const int k = draw_label(theta, rng);
    const auto& c = theta.components[k];
    const cplx s = rng.cnormal();
    const double sig = std::sqrt(c.sigma2);
    for (int m = 0; m < M; ++m)
      d.x(m, static_cast<Eigen::Index>(t)) = root * (c.a(m) * s + sig * rng.cnormal());
    d.labels[t] = k;
  }
  return d;
}

}  // namespace sasbss
