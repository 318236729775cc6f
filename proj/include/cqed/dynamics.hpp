#pragma once

// Lindblad superoperator, steady state and time propagation.
//
// Operators are vectorized by column-major stacking, vec(A X B) = (B^T kron A) vec(X),
// so the trace functional is the row vector vec(I)^T.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "cqed/error.hpp"
#include "cqed/hilbert.hpp"

namespace cqed {

inline CVector vectorize(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

inline CMatrix unvectorize(const CVector& v, int dim) {
  detail::require(v.size() == static_cast<Eigen::Index>(dim) * dim, "unvectorize: size mismatch");
  return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}

/// Trace-one Hermitian positive-semidefinite matrix.
class DensityState {
public:
  /// Validates and wraps a density matrix; tolerances match the invariants
  /// documented for steady states.
  explicit DensityState(CMatrix m, double tol = 1e-10) : m_(std::move(m)) {
    detail::require(m_.rows() == m_.cols(), "DensityState: matrix must be square");
    const double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol) throw NumericalError("DensityState: matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
    const double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > tol) throw NumericalError("DensityState: trace is " + std::to_string(tr));
  }

  static DensityState pure(const CVector& psi) {
    const CVector n = psi / psi.norm();
    return DensityState(n * n.adjoint());
  }

  const CMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  Complex expect(const CMatrix& op) const { return (op * m_).trace(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m_ + m_.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  /// Total population with the field in its highest Fock level.
  double top_fock_population(const HilbertSpace& space) const {
    const int n = space.n_max();
    return m_(space.index(n, 0), space.index(n, 0)).real() + m_(space.index(n, 1), space.index(n, 1)).real();
  }

private:
  CMatrix m_;
};

class Liouvillian {
public:
  Liouvillian(const SystemParams& params, const HilbertSpace& space)
      : params_(params), space_(space), ops_(build_operators(space)) {
    params.validate();
    const int d = space.dim();
    const CMatrix id = CMatrix::Identity(d, d);
    const CMatrix h = hamiltonian(params, ops_);
    CMatrix l = -kI * (Eigen::kroneckerProduct(id, h).eval() - Eigen::kroneckerProduct(h.transpose(), id).eval());
    auto add_dissipator = [&](const CMatrix& c) {
      const CMatrix cdc = c.adjoint() * c;
      l += Eigen::kroneckerProduct(c.conjugate(), c).eval();
      l -= 0.5 * Eigen::kroneckerProduct(id, cdc).eval();
      l -= 0.5 * Eigen::kroneckerProduct(cdc.transpose(), id).eval();
    };
    if (params.kappa > 0) add_dissipator(std::sqrt(2.0 * params.kappa) * ops_.a.matrix());
    if (params.gamma > 0) add_dissipator(std::sqrt(2.0 * params.gamma) * ops_.sigma_minus.matrix());
    l_ = std::move(l);
  }

  const CMatrix& superoperator() const { return l_; }
  const SystemParams& params() const { return params_; }
  const HilbertSpace& space() const { return space_; }
  const Operators& operators() const { return ops_; }

  CMatrix apply(const CMatrix& rho) const { return unvectorize(l_ * vectorize(rho), space_.dim()); }

  /// max |(tr o L)_j|; vanishes for a trace-preserving generator.
  double trace_defect() const {
    const int d = space_.dim();
    const CVector tr = vectorize(CMatrix::Identity(d, d));
    return (tr.transpose() * l_).cwiseAbs().maxCoeff();
  }

private:
  SystemParams params_;
  HilbertSpace space_;
  Operators ops_;
  CMatrix l_;
};

inline Liouvillian build_liouvillian(const SystemParams& params, const HilbertSpace& space) {
  return Liouvillian(params, space);
}

/// Null vector of L normalized to unit trace: one row of L is replaced by the
/// trace constraint and the system solved densely.
inline DensityState steady_state(const Liouvillian& l) {
  const int d = l.space().dim();
  const auto& sup = l.superoperator();
  if (l.trace_defect() > 1e-10 * std::max(1.0, sup.cwiseAbs().maxCoeff()))
    throw NumericalError("steady_state: Liouvillian is not trace preserving");

  CMatrix a = sup;
  CVector b = CVector::Zero(static_cast<Eigen::Index>(d) * d);
  // The first row of L is linearly dependent on the others through the trace identity.
  a.row(0) = vectorize(CMatrix::Identity(d, d)).transpose();
  b(0) = 1.0;

  Eigen::FullPivLU<CMatrix> lu(a);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible())
    throw NumericalError("steady_state: null space of L is not one-dimensional (rank " + std::to_string(lu.rank()) + ")");
  CVector x = lu.solve(b);

  CMatrix rho = unvectorize(x, d);
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();

  const double scale = sup.cwiseAbs().maxCoeff();
  const double residual = (sup * vectorize(rho)).cwiseAbs().maxCoeff();
  if (residual > 1e-10 * std::max(1.0, scale))
    throw NumericalError("steady_state: residual " + std::to_string(residual) + " exceeds tolerance");
  return DensityState(rho, 1e-9);
}

/// exp(L t) for fixed t, reusable on many inputs.
class Propagator {
public:
  Propagator(const Liouvillian& l, double t) : dim_(l.space().dim()), t_(t) {
    detail::require(t >= 0 && std::isfinite(t), "Propagator: duration must be finite and >= 0");
    const CMatrix lt = l.superoperator() * t;
    u_ = lt.exp();
    if (!u_.allFinite()) throw NumericalError("Propagator: matrix exponential failed at t=" + std::to_string(t));
  }

  double duration() const { return t_; }
  const CMatrix& matrix() const { return u_; }

  CMatrix apply(const CMatrix& m) const {
    detail::require(m.rows() == dim_ && m.cols() == dim_, "Propagator: input has wrong dimension");
    return unvectorize(u_ * vectorize(m), dim_);
  }
  CVector apply_vec(const CVector& v) const { return u_ * v; }

private:
  int dim_;
  double t_;
  CMatrix u_;
};

/// Propagators keyed by step length; lookups are thread safe.
class PropagatorCache {
public:
  explicit PropagatorCache(const Liouvillian& l) : l_(l) {}

  const Propagator& get(double t) {
    std::lock_guard lock(mu_);
    auto it = cache_.find(t);
    if (it == cache_.end()) it = cache_.emplace(t, std::make_unique<Propagator>(l_, t)).first;
    return *it->second;
  }

private:
  const Liouvillian& l_;
  std::mutex mu_;
  std::map<double, std::unique_ptr<Propagator>> cache_;
};

/// exp(L t) applied to an arbitrary operator (regression seeds need not be states).
inline CMatrix evolve(const Liouvillian& l, const CMatrix& rho0, double t) {
  detail::require(t >= 0, "evolve: t must be >= 0");
  if (t == 0) return rho0;
  return Propagator(l, t).apply(rho0);
}

}  // namespace cqed
