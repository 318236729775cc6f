#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "cqed/hilbert.hpp"
#include "support/oracles.hpp"

using namespace cqed;

namespace {

SystemParams fig2_params(double dc = 0.0) {
  SystemParams p;
  p.kappa = 1.0;
  p.g = 10.0;
  p.gamma = 3.0;
  p.delta_c = dc;
  p.delta_a = dc;
  p.eta = 0.1;
  return p;
}

SystemParams experimental(double dc) {
  const double w = 2 * std::numbers::pi;
  SystemParams p;
  p.g = 11.5 * w;
  p.kappa = 1.3 * w;
  p.gamma = 3.0 * w;
  p.delta_c = 0.0;
  p.delta_a = 8.5 * w;
  p.eta = 0.1 * p.kappa;
  return p.with_laser_detuning(dc);
}

}  // namespace

TEST(HilbertSpace, RejectsTooSmallTruncation) {
  EXPECT_THROW(HilbertSpace(1), InvalidArgument);
  EXPECT_EQ(HilbertSpace(2).dim(), 6);
  EXPECT_EQ(HilbertSpace(6).index(3, 1), 7);
}

TEST(Operators, LadderMatrixElement) {
  const auto ops = build_operators(HilbertSpace(2));
  const HilbertSpace s(2);
  EXPECT_NEAR(ops.a.matrix()(s.index(1, 0), s.index(2, 0)).real(), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(ops.a.matrix()(s.index(1, 1), s.index(2, 1)).real(), 1.41421356, 1e-8);
}

TEST(Operators, AnnihilatesVacuum) {
  for (int n_max : {2, 4, 7}) {
    const HilbertSpace s(n_max);
    const auto ops = build_operators(s);
    for (int q = 0; q < 2; ++q) {
      CVector v = CVector::Zero(s.dim());
      v(s.index(0, q)) = 1.0;
      EXPECT_EQ((ops.a.matrix() * v).norm(), 0.0);
    }
  }
}

TEST(Operators, CommutatorIsIdentityBelowTruncation) {
  const HilbertSpace s(4);
  const auto ops = build_operators(s);
  const CMatrix comm = (ops.a * ops.a_dag - ops.a_dag * ops.a).matrix();
  for (int n = 0; n <= 3; ++n)
    for (int q = 0; q < 2; ++q)
      for (int m = 0; m <= 3; ++m)
        for (int r = 0; r < 2; ++r) {
          const Complex expected = (n == m && q == r) ? 1.0 : 0.0;
          EXPECT_NEAR(std::abs(comm(s.index(n, q), s.index(m, r)) - expected), 0.0, 1e-14);
        }
}

TEST(Operators, MatchesElementwiseConstruction) {
  const HilbertSpace s(5);
  const auto ops = build_operators(s);
  EXPECT_LT((ops.a.matrix() - oracle::field_a(5)).norm(), 1e-15);
  EXPECT_LT((ops.sigma_minus.matrix() - oracle::atom_lower(5)).norm(), 1e-15);
}

TEST(Operators, MismatchedSpacesRejected) {
  const auto a = build_operators(HilbertSpace(3)).a;
  const auto b = build_operators(HilbertSpace(4)).a;
  EXPECT_THROW((void)(a * b), InvalidArgument);
}

TEST(Hamiltonian, MatchesElementwiseOracle) {
  const SystemParams p{1.7, 0.4, 0.9, -2.3, 0.8, 0.35};
  const HilbertSpace s(6);
  const CMatrix h = hamiltonian(p, build_operators(s));
  const CMatrix ref = oracle::hamiltonian({p.g, p.kappa, p.gamma, p.delta_c, p.delta_a, p.eta}, 6);
  EXPECT_LT((h - ref).norm(), 1e-13);
  EXPECT_LT((h - h.adjoint()).norm(), 1e-15);
}

TEST(Hamiltonian, EffectiveHasDampingOnDiagonal) {
  const SystemParams p{1.0, 0.5, 0.25, 0.0, 0.0, 0.0};
  const HilbertSpace s(3);
  const CMatrix heff = effective_hamiltonian(p, build_operators(s));
  EXPECT_NEAR(heff(s.index(2, 1), s.index(2, 1)).imag(), -(2 * 0.5 + 0.25), 1e-15);
}

TEST(SystemParams, ValidationRejectsNegativeRates) {
  SystemParams p = fig2_params();
  p.kappa = -1;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = fig2_params();
  p.g = std::nan("");
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(SystemParams, LaserMoveKeepsAtomCavityDetuning) {
  const SystemParams p = experimental(0.0);
  const double delta = p.atom_cavity_detuning();
  EXPECT_NEAR(delta, -8.5 * 2 * std::numbers::pi, 1e-12);
  const SystemParams q = p.with_laser_detuning(-5.0);
  EXPECT_DOUBLE_EQ(q.atom_cavity_detuning(), delta);
  EXPECT_DOUBLE_EQ(q.delta_c, -5.0);
}

TEST(SystemParams, EmptyCavityPhotonNumber) {
  const double eta = SystemParams::eta_for_empty_cavity_photons(0.01, 2.0);
  EXPECT_DOUBLE_EQ(eta, 0.2);
  EXPECT_NEAR(fig2_params().empty_cavity_photons(), 0.01, 1e-15);
}

TEST(DressedLevels, ResonantSplittingIsPlusMinusSqrtNG) {
  const SystemParams p = fig2_params();
  const auto [lo1, hi1] = dressed_levels(p, 1);
  EXPECT_NEAR(lo1.energy, -10.0, 1e-12);
  EXPECT_NEAR(hi1.energy, 10.0, 1e-12);
  const auto [lo2, hi2] = dressed_levels(p, 2);
  EXPECT_NEAR(lo2.energy, -10.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(hi2.energy, 10.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(lo1.cavity_weight, 0.5, 1e-12);
  // Equal mixture: the linewidth is the mean of the bare widths 2 kappa and 2 gamma.
  EXPECT_NEAR(lo1.linewidth, p.kappa + p.gamma, 1e-12);
}

TEST(DressedLevels, MatchExactBlockDiagonalization) {
  const SystemParams p = experimental(-7.0);
  const HilbertSpace s(4);
  SystemParams undriven = p;
  undriven.eta = 0.0;
  const CMatrix h = hamiltonian(undriven, build_operators(s));
  for (int n = 1; n <= 3; ++n) {
    Eigen::Matrix2cd block;
    block << h(s.index(n, 0), s.index(n, 0)), h(s.index(n, 0), s.index(n - 1, 1)),
        h(s.index(n - 1, 1), s.index(n, 0)), h(s.index(n - 1, 1), s.index(n - 1, 1));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
    const auto [lo, hi] = dressed_levels(p, n);
    EXPECT_NEAR(lo.energy, es.eigenvalues()(0), 1e-10);
    EXPECT_NEAR(hi.energy, es.eigenvalues()(1), 1e-10);
    EXPECT_NEAR(lo.cavity_weight, std::norm(es.eigenvectors()(0, 0)), 1e-10);
  }
}

TEST(DressedLevels, ExperimentalLowerLevelLifetime) {
  // Lifetime of |1,-> in ns at the experimental coupling and atom-cavity detuning.
  const auto [lo, hi] = dressed_levels(experimental(normal_mode_resonance(experimental(0), Branch::lower)), 1);
  const double lifetime_ns = 1e3 / lo.linewidth;
  EXPECT_GE(lifetime_ns, 25.0);
  EXPECT_LE(lifetime_ns, 45.0);
  (void)hi;
}

TEST(DressedLevels, RejectsZeroCouplingAndBadN) {
  SystemParams p = fig2_params();
  EXPECT_THROW(dressed_levels(p, 0), InvalidArgument);
  p.g = 0;
  EXPECT_THROW(dressed_levels(p, 1), InvalidArgument);
  EXPECT_THROW(check_level_fits(7, HilbertSpace(6)), InvalidArgument);
  EXPECT_NO_THROW(check_level_fits(6, HilbertSpace(6)));
}

TEST(Resonances, ResonantTwoPhotonAtPlusMinusGOverSqrt2) {
  const SystemParams p = fig2_params();
  EXPECT_NEAR(two_photon_resonance(p, Branch::lower), -10.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(two_photon_resonance(p, Branch::upper), 10.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(normal_mode_resonance(p, Branch::lower), -10.0, 1e-12);
}

TEST(Resonances, DetunedTwoPhotonZeroesTheLevelEnergy) {
  // At the returned laser detuning the lower 2-excitation level is degenerate
  // with the 2-photon ground state in the rotating frame (energy 0).
  const SystemParams p = experimental(0.0);
  const double dc = two_photon_resonance(p, Branch::lower);
  EXPECT_NEAR(dc / (2 * std::numbers::pi), -10.53, 0.01);
  const auto [lo, hi] = dressed_levels(p.with_laser_detuning(dc), 2);
  EXPECT_NEAR(lo.energy, 0.0, 1e-10);
  const double dn = normal_mode_resonance(p, Branch::lower);
  EXPECT_NEAR(dressed_levels(p.with_laser_detuning(dn), 1).first.energy, 0.0, 1e-10);
  (void)hi;
}
