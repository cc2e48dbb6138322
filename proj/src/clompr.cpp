// Copyright 2026 The sasbss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sasbss/clompr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "sasbss/rng.hpp"

namespace sasbss {

namespace {

constexpr double kAlphaLo = 0.2;
constexpr double kAlphaHi = 2.0;

struct ProbeSet {
  Eigen::MatrixXcd W;   // M x J
  Eigen::VectorXd wn2;  // squared probe norms
};

ProbeSet make_probes(const FrequencyDesign& design, double scale) {
  ProbeSet p;
  p.W = scale * design.omegas;
  p.wn2 = p.W.colwise().squaredNorm().transpose();
  return p;
}

struct CfEval {
  Eigen::VectorXcd u;   // a* omega_j
  Eigen::VectorXd u2;   // |u|^2
  Eigen::VectorXd gpw;  // |u|^alpha
  Eigen::VectorXd psi;  // CF values
};

void eval_cf(const ProbeSet& p, const Eigen::VectorXcd& a, double alpha,
             double sigma2, CfEval& e) {
  e.u = (a.adjoint() * p.W).transpose();
  e.u2 = e.u.cwiseAbs2();
  if (alpha == 2.0)
    e.gpw = e.u2;
  else
    e.gpw = e.u2.array().pow(0.5 * alpha).matrix();
  e.psi = (-e.gpw.array() - sigma2 * p.wn2.array()).exp().matrix();
}

// Gradient of <cot, psi> wrt [Re a, Im a, alpha, log_sigma2]; alpha slot is
// zero for locked atoms and at |a*omega| = 0 (removable limit).
Eigen::VectorXd grad_cot(const ProbeSet& p, const Eigen::VectorXcd& a, double alpha,
                         double sigma2, bool locked, const CfEval& e,
                         const Eigen::VectorXd& cot) {
  const int M = static_cast<int>(a.size());
  const int J = static_cast<int>(p.wn2.size());
  Eigen::VectorXd grad(2 * M + 2);

  const Eigen::ArrayXd common = cot.array() * e.psi.array();
  const double dv = -sigma2 * (common * p.wn2.array()).sum();

  double dalpha = 0.0;
  Eigen::VectorXcd h(J);
  const bool quadratic = (alpha == 2.0);
  for (int j = 0; j < J; ++j) {
    const double u2 = e.u2(j);
    double q;
    if (u2 > 0.0) {
      if (!locked) dalpha += common(j) * (-0.5 * e.gpw(j) * std::log(u2));
      q = -alpha * common(j) * (quadratic ? 1.0 : std::pow(u2, 0.5 * alpha - 1.0));
    } else {
      q = quadratic ? -alpha * common(j) : 0.0;
    }
    h(j) = q * std::conj(e.u(j));
  }
  const Eigen::VectorXcd da = p.W * h;
  grad.head(M) = da.real();
  grad.segment(M, M) = da.imag();
  grad(2 * M) = dalpha;
  grad(2 * M + 1) = dv;
  return grad;
}

void check_atom(const AtomParams& atom, const FrequencyDesign& design) {
  if (atom.a.size() != design.omegas.rows())
    throw ShapeError("atom and design disagree on channel count");
  if (atom.alpha_locked && atom.alpha != 2.0)
    throw DomainError("locked atom must have alpha = 2");
  if (!(atom.alpha >= kAlphaLo && atom.alpha <= kAlphaHi))
    throw DomainError("atom alpha outside [0.2, 2]");
}

}  // namespace

void FitOptions::validate() const {
  if (K < 1) throw DomainError("FitOptions: K must be >= 1");
  if (n_outer_iterations < 0) throw DomainError("FitOptions: bad outer iteration count");
  if (n_inits_per_atom < 1) throw DomainError("FitOptions: need at least one init");
  if (max_gradient_steps < 1) throw DomainError("FitOptions: need at least one step");
  if (!(tolerance > 0.0)) throw DomainError("FitOptions: tolerance must be > 0");
}

Eigen::VectorXd atom_cf_vector(const AtomParams& atom, const FrequencyDesign& design) {
  check_atom(atom, design);
  const ProbeSet p = make_probes(design, 1.0);
  CfEval e;
  eval_cf(p, atom.a, atom.alpha, atom.sigma2(), e);
  return e.psi;
}

Eigen::VectorXd atom_gradient(const AtomParams& atom, const FrequencyDesign& design,
                              const Eigen::VectorXd& cotangent) {
  check_atom(atom, design);
  if (cotangent.size() != design.J())
    throw ShapeError("cotangent length does not match design");
  const ProbeSet p = make_probes(design, 1.0);
  CfEval e;
  eval_cf(p, atom.a, atom.alpha, atom.sigma2(), e);
  return grad_cot(p, atom.a, atom.alpha, atom.sigma2(), atom.alpha_locked, e,
                  cotangent);
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& atoms, const Eigen::VectorXd& target) {
  const auto n = atoms.rows();
  const auto k = atoms.cols();
  if (k == 0) return Eigen::VectorXd();
  if (target.size() != n) throw ShapeError("nnls: matrix and target disagree");

  Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
  std::vector<bool> passive(k, false);
  Eigen::VectorXd w = atoms.transpose() * target;
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  const double tol = 1e-10 * scale;

  const int max_outer = 30 + 10 * static_cast<int>(k);
  for (int outer = 0; outer < max_outer; ++outer) {
    // Most positive dual among free variables.
    int cand = -1;
    double best = tol;
    for (Eigen::Index j = 0; j < k; ++j)
      if (!passive[j] && w(j) > best) {
        best = w(j);
        cand = static_cast<int>(j);
      }
    if (cand < 0) break;
    passive[cand] = true;

    for (int inner = 0; inner < max_outer; ++inner) {
      std::vector<int> idx;
      for (Eigen::Index j = 0; j < k; ++j)
        if (passive[j]) idx.push_back(static_cast<int>(j));
      Eigen::MatrixXd Ap(n, idx.size());
      for (std::size_t c = 0; c < idx.size(); ++c) Ap.col(c) = atoms.col(idx[c]);
      const Eigen::VectorXd z = Ap.colPivHouseholderQr().solve(target);

      double zmin = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < z.size(); ++c) zmin = std::min(zmin, z(c));
      if (zmin > 0.0) {
        x.setZero();
        for (std::size_t c = 0; c < idx.size(); ++c) x(idx[c]) = z(c);
        break;
      }
      // Step back to the feasible boundary and release blocking variables.
      double step = 1.0;
      for (std::size_t c = 0; c < idx.size(); ++c)
        if (z(c) <= 0.0) {
          const double xi = x(idx[c]);
          step = std::min(step, xi / (xi - z(c)));
        }
      for (std::size_t c = 0; c < idx.size(); ++c) {
        const int j = idx[c];
        x(j) += step * (z(c) - x(j));
        if (x(j) <= 1e-14 * scale && z(c) <= 0.0) {
          x(j) = 0.0;
          passive[j] = false;
        }
      }
    }
    w = atoms.transpose() * (target - atoms * x);
  }
  return x;
}

namespace {

// Internal atom in normalized coordinates: probes are pre-multiplied by the
// design's radius scale so steering vectors, alpha and log sigma2 all live on
// O(1) scales; alpha is optimized through a sigmoid onto [0.2, 2].
struct IAtom {
  Eigen::VectorXcd a;
  double ua = 0.0;  // sigmoid-space alpha (ignored when locked)
  double v = 0.0;   // log sigma2
  int birth = 0;
};

double alpha_of(const IAtom& at, bool locked) {
  if (locked) return 2.0;
  return kAlphaLo + (kAlphaHi - kAlphaLo) / (1.0 + std::exp(-at.ua));
}

double alpha_chain(const IAtom& at, bool locked) {
  if (locked) return 0.0;
  const double s = 1.0 / (1.0 + std::exp(-at.ua));
  return (kAlphaHi - kAlphaLo) * s * (1.0 - s);
}

// packed layout per atom: [Re a, Im a, ua, v]
void pack(const IAtom& at, Eigen::Ref<Eigen::VectorXd> out) {
  const int M = static_cast<int>(at.a.size());
  out.head(M) = at.a.real();
  out.segment(M, M) = at.a.imag();
  out(2 * M) = at.ua;
  out(2 * M + 1) = at.v;
}

void unpack(const Eigen::Ref<const Eigen::VectorXd>& in, IAtom& at) {
  const int M = static_cast<int>(at.a.size());
  for (int m = 0; m < M; ++m) at.a(m) = cplx(in(m), in(M + m));
  at.ua = in(2 * M);
  at.v = in(2 * M + 1);
}

struct Objective {
  const ProbeSet& probes;
  const Eigen::VectorXd& rey;  // Re of sketch
  double tail;                 // ||Im y||^2, constant part of Eq. objective
  bool locked;

  void eval_atom(const IAtom& at, CfEval& e) const {
    eval_cf(probes, at.a, alpha_of(at, locked), std::exp(at.v), e);
  }

  // gradient wrt packed coords (sigmoid chain applied to the alpha slot)
  Eigen::VectorXd grad_atom(const IAtom& at, const CfEval& e,
                            const Eigen::VectorXd& cot) const {
    Eigen::VectorXd g = grad_cot(probes, at.a, alpha_of(at, locked), std::exp(at.v),
                                 locked, e, cot);
    const int M = static_cast<int>(at.a.size());
    g(2 * M) *= alpha_chain(at, locked);
    return g;
  }
};

// Gradient ascent with adaptive backtracking on the normalized correlation
// h = <psi, rho> / ||psi||. Returns the achieved h, NaN when the trajectory
// left the finite domain.
double ascend_correlation(const Objective& obj, const Eigen::VectorXd& rho,
                          const FitOptions& opts, IAtom& atom) {
  const int M = static_cast<int>(atom.a.size());
  const int dim = atom_param_count(M);
  CfEval e;
  obj.eval_atom(atom, e);
  double n2 = e.psi.squaredNorm();
  double q = e.psi.dot(rho);
  if (!(n2 > 0.0) || !std::isfinite(q))
    return std::numeric_limits<double>::quiet_NaN();
  double h = q / std::sqrt(n2);

  Eigen::VectorXd z(dim), zc(dim);
  pack(atom, z);
  IAtom cand = atom;
  double step = 0.25;
  for (int it = 0; it < opts.max_gradient_steps; ++it) {
    const double nrm = std::sqrt(n2);
    const Eigen::VectorXd cot = (rho - (q / n2) * e.psi) / nrm;
    const Eigen::VectorXd g = obj.grad_atom(atom, e, cot);
    if (g.norm() < 1e-14) break;

    bool accepted = false;
    while (step >= 1e-14) {
      zc = z + step * g;
      unpack(zc, cand);
      CfEval ec;
      obj.eval_atom(cand, ec);
      const double cn2 = ec.psi.squaredNorm();
      const double cq = ec.psi.dot(rho);
      const double ch = (cn2 > 0.0) ? cq / std::sqrt(cn2)
                                    : std::numeric_limits<double>::quiet_NaN();
      if (std::isfinite(ch) && ch > h) {
        const double gain = (ch - h) / std::max(std::abs(h), 1e-12);
        atom = cand;
        z = zc;
        e = ec;
        n2 = cn2;
        q = cq;
        h = ch;
        step = std::min(step * 1.6, 4.0);
        accepted = true;
        if (gain < opts.tolerance) return h;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return h;
}

Eigen::MatrixXd stack_atoms(const Objective& obj, const std::vector<IAtom>& atoms,
                            int J) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * J, static_cast<Eigen::Index>(atoms.size()));
  CfEval e;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    obj.eval_atom(atoms[k], e);
    A.col(static_cast<Eigen::Index>(k)).head(J) = e.psi;
  }
  return A;
}

// Projected joint descent of all atom parameters and weights on
// ||y - sum_k beta_k psi_k||^2. Only steps that strictly decrease the
// objective are accepted, so the objective is non-increasing by
// construction.
void joint_descent(const Objective& obj, const FitOptions& opts,
                   std::vector<IAtom>& atoms, Eigen::VectorXd& beta) {
  const int K = static_cast<int>(atoms.size());
  if (K == 0) return;
  const int M = static_cast<int>(atoms[0].a.size());
  const int apc = atom_param_count(M);
  const int J = static_cast<int>(obj.rey.size());
  const int dim = K * apc + K;

  std::vector<CfEval> evals(K);
  auto model_eval = [&](const std::vector<IAtom>& at, const Eigen::VectorXd& b,
                        std::vector<CfEval>& ev) -> double {
    Eigen::VectorXd model = Eigen::VectorXd::Zero(J);
    for (int k = 0; k < K; ++k) {
      obj.eval_atom(at[k], ev[k]);
      model += b(k) * ev[k].psi;
    }
    const double f = (obj.rey - model).squaredNorm() + obj.tail;
    return f;
  };

  double F = model_eval(atoms, beta, evals);
  if (!std::isfinite(F)) return;

  Eigen::VectorXd z(dim), zc(dim), g(dim);
  for (int k = 0; k < K; ++k) pack(atoms[k], z.segment(k * apc, apc));
  z.tail(K) = beta;

  std::vector<IAtom> cand = atoms;
  Eigen::VectorXd cbeta = beta;
  std::vector<CfEval> cevals(K);

  double step = 0.1;
  for (int it = 0; it < opts.max_gradient_steps; ++it) {
    // rho = Re y - sum beta psi
    Eigen::VectorXd model = Eigen::VectorXd::Zero(J);
    for (int k = 0; k < K; ++k) model += beta(k) * evals[k].psi;
    const Eigen::VectorXd rho = obj.rey - model;
    for (int k = 0; k < K; ++k) {
      const Eigen::VectorXd cot = (-2.0 * beta(k)) * rho;
      g.segment(k * apc, apc) = obj.grad_atom(atoms[k], evals[k], cot);
      g(K * apc + k) = -2.0 * evals[k].psi.dot(rho);
    }
    if (g.norm() < 1e-14) break;

    bool accepted = false;
    while (step >= 1e-16) {
      zc = z - step * g;
      for (int k = 0; k < K; ++k) {
        unpack(zc.segment(k * apc, apc), cand[k]);
        cbeta(k) = std::max(0.0, zc(K * apc + k));
      }
      const double Fc = model_eval(cand, cbeta, cevals);
      if (std::isfinite(Fc) && Fc < F) {
        const double drop = (F - Fc) / std::max(F, 1e-300);
        atoms = cand;
        beta = cbeta;
        evals = cevals;
        for (int k = 0; k < K; ++k) zc(K * apc + k) = cbeta(k);
        z = zc;
        F = Fc;
        step = std::min(step * 1.6, 4.0);
        accepted = true;
        if (drop < opts.tolerance) return;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
}

}  // namespace

MixtureParams clompr_fit(const Sketch& sketch, const FrequencyDesign& design,
                         const FitOptions& opts) {
  opts.validate();
  const int J = design.J();
  if (static_cast<int>(sketch.y.size()) != J)
    throw ShapeError("clompr_fit: sketch and design disagree on J");
  if (!(sketch.y.norm() > 0.0)) throw DataError("clompr_fit: all-zero sketch");

  const int M = design.M();
  const double s = design.radius_scale;
  const ProbeSet probes = make_probes(design, s);

  const Eigen::VectorXd rey = sketch.y.real();
  const Eigen::VectorXd imy = sketch.y.imag();
  Eigen::VectorXd target(2 * J);
  target.head(J) = rey;
  target.tail(J) = imy;

  Objective obj{probes, rey, imy.squaredNorm(), opts.alpha_locked};

  const int K = opts.K;
  const int n_outer = opts.n_outer_iterations > 0 ? opts.n_outer_iterations : 2 * K;
  const double ua0 = std::log((1.8 - kAlphaLo) / (kAlphaHi - 1.8));  // alpha = 1.8
  const double v0 = std::log(0.1);

  Rng rng(opts.seed);
  std::vector<IAtom> support;
  Eigen::VectorXd beta;
  Eigen::VectorXd rho = rey;
  int births = 0;

  for (int outer = 0; outer < n_outer; ++outer) {
    // (i) pick the best of n random inits ascended on normalized correlation
    IAtom best;
    double best_h = -std::numeric_limits<double>::infinity();
    bool found = false;
    for (int init = 0; init < opts.n_inits_per_atom; ++init) {
      IAtom cand;
      cand.a.resize(M);
      for (int m = 0; m < M; ++m) cand.a(m) = rng.cnormal();
      cand.ua = ua0;
      cand.v = v0;
      const double h = ascend_correlation(obj, rho, opts, cand);
      if (std::isfinite(h) && h > best_h) {
        best_h = h;
        best = cand;
        found = true;
      }
    }
    if (!found)
      throw NumericalError("clompr_fit: every atom initialization diverged");
    best.birth = births++;
    support.push_back(best);

    // (iii) hard thresholding back to K atoms by NNLS weight
    if (static_cast<int>(support.size()) > K) {
      const Eigen::VectorXd w = nnls(stack_atoms(obj, support, J), target);
      std::vector<int> order(support.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        if (w(i) != w(j)) return w(i) > w(j);
        return support[i].birth < support[j].birth;  // ties keep older atoms
      });
      order.resize(K);
      std::sort(order.begin(), order.end());
      std::vector<IAtom> kept;
      kept.reserve(K);
      for (int i : order) kept.push_back(support[i]);
      support.swap(kept);
    }

    // (iv) re-solve the weights
    beta = nnls(stack_atoms(obj, support, J), target);

    // (v) joint refinement of atoms and weights
    joint_descent(obj, opts, support, beta);

    // (vi) residual update
    Eigen::VectorXd model = Eigen::VectorXd::Zero(J);
    CfEval e;
    for (std::size_t k = 0; k < support.size(); ++k) {
      obj.eval_atom(support[k], e);
      model += beta(static_cast<Eigen::Index>(k)) * e.psi;
    }
    rho = rey - model;
  }

  const double wsum = beta.sum();
  if (!(wsum > 0.0))
    throw NumericalError("clompr_fit: weight step assigned no mass to any atom");

  MixtureParams out;
  out.components.resize(support.size());
  for (std::size_t k = 0; k < support.size(); ++k) {
    auto& c = out.components[k];
    c.a = s * support[k].a;
    c.alpha = alpha_of(support[k], opts.alpha_locked);
    c.sigma2 = s * s * std::exp(support[k].v);
    c.pi = beta(static_cast<Eigen::Index>(k)) / wsum;
  }
  std::stable_sort(out.components.begin(), out.components.end(),
                   [](const ComponentParams& x, const ComponentParams& y) {
                     return x.pi > y.pi;
                   });
  out.validate();
  return out;
}

double sketch_residual(const Sketch& sketch, const FrequencyDesign& design,
                       const MixtureParams& theta) {
  const int J = design.J();
  if (static_cast<int>(sketch.y.size()) != J)
    throw ShapeError("sketch_residual: sketch and design disagree on J");
  Eigen::VectorXd model = Eigen::VectorXd::Zero(J);
  for (const auto& c : theta.components) {
    for (int j = 0; j < J; ++j) model(j) += c.pi * component_cf(c, design.omegas.col(j));
  }
  const double re = (sketch.y.real() - model).squaredNorm();
  const double im = sketch.y.imag().squaredNorm();
  return std::sqrt(re + im);
}

}  // namespace sasbss
