// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sasbss/metrics.hpp"

#include <cmath>

namespace sasbss {

namespace {

constexpr double kDbCap = 100.0;

double ratio_db(double num, double den) {
  if (!(num > 0.0)) return -kDbCap;
  if (!(den > 0.0)) return kDbCap;
  const double db = 10.0 * std::log10(num / den);
  return std::min(kDbCap, std::max(-kDbCap, db));
}

// Linear correlation <u, shift(v, d)> = sum_n u[n] v[n - d] with zero padding
// outside [0, N); d may be negative.
double shifted_dot(const Eigen::VectorXd& u, const Eigen::VectorXd& v, int d) {
  const Eigen::Index N = u.size();
  if (d >= 0) {
    const Eigen::Index len = N - d;
    if (len <= 0) return 0.0;
    return u.segment(d, len).dot(v.segment(0, len));
  }
  const Eigen::Index len = N + d;
  if (len <= 0) return 0.0;
  return u.segment(0, len).dot(v.segment(-d, len));
}

}  // namespace

ImageProjector::ImageProjector(const std::vector<Eigen::MatrixXd>& truths,
                               int filter_len) {
  if (truths.empty()) throw ShapeError("sdr_sir: no reference sources");
  if (filter_len < 1) throw DomainError("sdr_sir: filter length must be >= 1");
  K_ = static_cast<int>(truths.size());
  M_ = static_cast<int>(truths.front().rows());
  N_ = truths.front().cols();
  L_ = filter_len;
  for (const auto& y : truths)
    if (y.rows() != M_ || y.cols() != N_)
      throw ShapeError("sdr_sir: reference sources disagree on shape");
  truths_ = truths;

  // Regressors are the L shifts of every truth channel (zero padded), so the
  // Gram matrix is built from linear cross-correlations:
  //   <shift(u, t), shift(v, t')> = corr_{uv}[t' - t].
  const int cols = K_ * M_ * L_;
  gram_.resize(cols, cols);
  for (int k1 = 0; k1 < K_; ++k1)
    for (int m1 = 0; m1 < M_; ++m1)
      for (int k2 = 0; k2 < K_; ++k2)
        for (int m2 = 0; m2 < M_; ++m2) {
          if (k2 * M_ + m2 < k1 * M_ + m1) continue;  // symmetric
          const Eigen::VectorXd u = truths_[k1].row(m1).transpose();
          const Eigen::VectorXd v = truths_[k2].row(m2).transpose();
          Eigen::VectorXd corr(2 * L_ - 1);
          for (int d = -(L_ - 1); d <= L_ - 1; ++d)
            corr(d + L_ - 1) = shifted_dot(u, v, d);
          for (int t1 = 0; t1 < L_; ++t1)
            for (int t2 = 0; t2 < L_; ++t2) {
              const int r = (k1 * M_ + m1) * L_ + t1;
              const int c = (k2 * M_ + m2) * L_ + t2;
              gram_(r, c) = corr(t2 - t1 + L_ - 1);
              gram_(c, r) = gram_(r, c);
            }
        }

  const double ridge = 1e-10 * gram_.trace();
  Eigen::MatrixXd reg = gram_;
  reg.diagonal().array() += ridge;
  full_solver_.compute(reg);

  target_solvers_.resize(K_);
  const int tcols = M_ * L_;
  for (int k = 0; k < K_; ++k) {
    Eigen::MatrixXd gk = gram_.block(k * tcols, k * tcols, tcols, tcols);
    gk.diagonal().array() += 1e-10 * gk.trace();
    target_solvers_[k].compute(gk);
  }
}

SdrSir ImageProjector::evaluate(const Eigen::MatrixXd& estimate, int target_index) const {
  if (estimate.rows() != M_ || estimate.cols() != N_)
    throw ShapeError("sdr_sir: estimate shape does not match references");
  if (target_index < 0 || target_index >= K_)
    throw ShapeError("sdr_sir: bad target index");

  const int cols = K_ * M_ * L_;
  const int tcols = M_ * L_;
  const int toff = target_index * tcols;

  double s_target2 = 0.0, e_interf2 = 0.0, e_artif2 = 0.0;
  for (int mc = 0; mc < M_; ++mc) {
    const Eigen::VectorXd e = estimate.row(mc).transpose();
    Eigen::VectorXd b(cols);
    for (int k = 0; k < K_; ++k)
      for (int m = 0; m < M_; ++m) {
        const Eigen::VectorXd v = truths_[k].row(m).transpose();
        for (int t = 0; t < L_; ++t)
          b((k * M_ + m) * L_ + t) = shifted_dot(e, v, t);
      }

    const Eigen::VectorXd c_all = full_solver_.solve(b);
    const Eigen::VectorXd c_tgt_small =
        target_solvers_[target_index].solve(b.segment(toff, tcols));
    Eigen::VectorXd c_tgt = Eigen::VectorXd::Zero(cols);
    c_tgt.segment(toff, tcols) = c_tgt_small;

    const double en2 = e.squaredNorm();
    s_target2 += c_tgt.dot(gram_ * c_tgt);
    const Eigen::VectorXd diff = c_all - c_tgt;
    e_interf2 += std::max(0.0, diff.dot(gram_ * diff));
    e_artif2 += std::max(0.0, en2 - 2.0 * c_all.dot(b) + c_all.dot(gram_ * c_all));
  }

  // e_interf and e_artif are orthogonal by construction, so the distortion
  // energy is their sum; this keeps SIR >= SDR structurally.
  SdrSir out;
  out.sdr_db = ratio_db(s_target2, e_interf2 + e_artif2);
  out.sir_db = ratio_db(s_target2, e_interf2);
  return out;
}

SdrSir sdr_sir(const Eigen::MatrixXd& estimate, const std::vector<Eigen::MatrixXd>& truths,
               int target_index, int filter_len) {
  return ImageProjector(truths, filter_len).evaluate(estimate, target_index);
}

double mer(const Eigen::MatrixXcd& a_hat, const Eigen::MatrixXcd& a_true) {
  if (a_hat.rows() != a_true.rows() || a_hat.cols() != a_true.cols())
    throw ShapeError("mer: steering matrices disagree on shape");
  const auto F = a_hat.cols();
  double acc = 0.0;
  Eigen::Index counted = 0;
  for (Eigen::Index f = 0; f < F; ++f) {
    const auto ah = a_hat.col(f);
    const auto at = a_true.col(f);
    const double nt2 = at.squaredNorm();
    const double nh2 = ah.squaredNorm();
    if (!(nt2 > 0.0) || !(nh2 > 0.0)) continue;
    const double proj2 = std::norm(at.dot(ah)) / nt2;  // ||P_a a_hat||^2
    const double resid2 = std::max(0.0, nh2 - proj2);
    acc += ratio_db(proj2, resid2 > 1e-20 * nh2 ? resid2 : 0.0);
    ++counted;
  }
  if (counted == 0) throw DataError("mer: no frequency with nonzero steering");
  return acc / static_cast<double>(counted);
}

}  // namespace sasbss
