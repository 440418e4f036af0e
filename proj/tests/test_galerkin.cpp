#include <gtest/gtest.h>

#include "oracles.hpp"
#include "quadspec/galerkin.hpp"
#include "quadspec/random.hpp"
#include "quadspec/report.hpp"

using namespace quadspec;

namespace {

const cplx I(0.0, 1.0);

QuadraticForm one_dim(double xx, double xixi, double xxi, double im_xx = 0.0, double im_xixi = 0.0) {
  RMatrix re(2, 2), im(2, 2);
  re << xx, xxi, xxi, xixi;
  im << im_xx, 0.0, 0.0, im_xixi;
  return QuadraticForm(1, re, im);
}

QuadraticForm harmonic() { return one_dim(-1.0, -1.0, 0.0); }
QuadraticForm minus_x2() { return one_dim(-1.0, 0.0, 0.0); }

std::vector<double> uniform_times(double t1, double dt) {
  std::vector<double> t;
  for (int k = 0; k * dt <= t1 + 1e-12; ++k) t.push_back(k * dt);
  return t;
}

}  // namespace

TEST(HermiteBasis, SizeIsBinomial) {
  EXPECT_EQ(HermiteBasis(1, 10).size(), 11);
  EXPECT_EQ(HermiteBasis(2, 10).size(), 66);
  EXPECT_EQ(HermiteBasis(3, 10).size(), 286);
  EXPECT_EQ(HermiteBasis(4, 3).size(), 35);
}

TEST(HermiteBasis, GradedOrderAndPrefixStability) {
  const HermiteBasis b(2, 4);
  EXPECT_EQ(b[0], (HermiteBasis::Index{0, 0, 0, 0}));
  EXPECT_EQ(b[1], (HermiteBasis::Index{1, 0, 0, 0}));
  EXPECT_EQ(b[2], (HermiteBasis::Index{0, 1, 0, 0}));
  EXPECT_EQ(b[3], (HermiteBasis::Index{2, 0, 0, 0}));
  const HermiteBasis big(2, 9);
  for (int i = 0; i < b.size(); ++i) EXPECT_EQ(b[i], big[i]);
  for (int i = 0; i < big.size(); ++i) EXPECT_EQ(big.find(big[i]), i);
  EXPECT_EQ(b.find({5, 0, 0, 0}), -1);
}

TEST(HermiteBasis, RejectsBadArguments) {
  EXPECT_THROW(HermiteBasis(0, 3), DimensionError);
  EXPECT_THROW(HermiteBasis(5, 3), DimensionError);
  EXPECT_THROW(HermiteBasis(1, -1), DimensionError);
}

TEST(WeylMatrix, HarmonicIsDiagonal) {
  const CMatrix M = weyl_matrix(harmonic(), 12).dense();
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) {
      const cplx expected = i == j ? cplx(-(2.0 * i + 1.0)) : cplx(0.0);
      EXPECT_NEAR(std::abs(M(i, j) - expected), 0.0, 1e-13);
    }
}

TEST(WeylMatrix, MinusXSquaredEntries) {
  const CMatrix M = weyl_matrix(minus_x2(), 10).dense();
  for (int g = 0; g <= 10; ++g) EXPECT_NEAR(std::abs(M(g, g) + (2.0 * g + 1.0) / 2.0), 0.0, 1e-13);
  for (int g = 0; g + 2 <= 10; ++g) {
    const double off = -std::sqrt((g + 1.0) * (g + 2.0)) / 2.0;
    EXPECT_NEAR(std::abs(M(g, g + 2) - off), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(M(g + 2, g) - off), 0.0, 1e-13);
  }
  EXPECT_NEAR(std::abs(M(0, 1)), 0.0, 1e-15);
}

TEST(WeylMatrix, MixedTermIsAntisymmetricBand) {
  // x xi with Q_{x xi} = Q_{xi x} = 1/2: (a^2 - a+^2) / (2i)
  const CMatrix M = weyl_matrix(one_dim(0.0, 0.0, 0.5), 10).dense();
  for (int g = 0; g <= 10; ++g) EXPECT_NEAR(std::abs(M(g, g)), 0.0, 1e-14);
  for (int g = 0; g + 2 <= 10; ++g) {
    const double s = std::sqrt((g + 1.0) * (g + 2.0)) / 2.0;
    EXPECT_NEAR(std::abs(M(g, g + 2) + I * s), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(M(g + 2, g) - I * s), 0.0, 1e-13);
  }
}

TEST(WeylMatrix, BandStructureInOneDimension) {
  random::Rng rng(41);
  const CMatrix M = weyl_matrix(random::form(rng, 1), 14).dense();
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (std::abs(i - j) != 0 && std::abs(i - j) != 2) EXPECT_EQ(M(i, j), cplx(0.0));
}

TEST(WeylMatrix, AgreesWithTensorGridOracle) {
  random::Rng rng(42);
  const std::pair<int, int> cases[] = {{1, 12}, {2, 8}, {3, 5}};
  for (const auto& [n, N] : cases)
    for (int trial = 0; trial < 3; ++trial) {
      const QuadraticForm q = random::form(rng, n);
      const CMatrix M = weyl_matrix(q, N).dense();
      const oracle::Grid grid(n, N + 1);
      const HermiteBasis basis(n, N);
      const CMatrix ref = grid.compress(grid.quadratic(q.matrix()), basis);
      EXPECT_LT((M - ref).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + ref.cwiseAbs().maxCoeff())) << "n = " << n;
    }
}

TEST(WeylMatrix, RealSymbolGivesHermitianImaginaryGivesSkew) {
  random::Rng rng(43);
  const RMatrix S = random::symmetric(rng, 4);
  const RMatrix Z = RMatrix::Zero(4, 4);
  const CMatrix H = weyl_matrix(QuadraticForm(2, S, Z), 8).dense();
  const CMatrix K = weyl_matrix(QuadraticForm(2, Z, S), 8).dense();
  EXPECT_LT((H - H.adjoint()).norm(), 1e-12 * H.norm());
  EXPECT_LT((K + K.adjoint()).norm(), 1e-12 * K.norm());
}

TEST(WeylMatrix, DissipativeFormsGiveDissipativeMatrices) {
  random::Rng rng(44);
  for (int n = 1; n <= 3; ++n)
    for (int trial = 0; trial < 3; ++trial) {
      const QuadraticForm q = random::dissipative_form(rng, n, trial == 0 ? 1 : -1);
      const CMatrix M = weyl_matrix(q, n == 3 ? 6 : 10).dense();
      const CMatrix herm = (M + M.adjoint()) / 2.0;
      Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
      EXPECT_LE(es.eigenvalues().maxCoeff(), 1e-10 * (1.0 + M.norm()));
    }
}

TEST(WeylMatrix, EnforcesBounds) {
  EXPECT_THROW(weyl_matrix(harmonic(), 61), DimensionError);
  EXPECT_THROW(weyl_matrix(harmonic(), 1), PreconditionError);
  random::Rng rng(45);
  EXPECT_THROW(weyl_matrix(random::form(rng, 4), 4), DimensionError);
}

TEST(SortedEigenvalues, RealPartDescendingThenAbsImag) {
  CMatrix D = CMatrix::Zero(5, 5);
  D.diagonal() << cplx(-1.0, -2.0), cplx(-1.0, 0.5), cplx(0.0, 0.0), cplx(-1.0, 2.0), cplx(-1.0 + 1e-12, -0.5);
  const auto v = sorted_eigenvalues(D);
  const cplx expected[] = {{0.0, 0.0}, {-1.0, 0.5}, {-1.0, -0.5}, {-1.0, 2.0}, {-1.0, -2.0}};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(std::abs(v[i] - expected[i]), 0.0, 1e-11) << i;
}

TEST(ParityBlocks, BlockwiseSpectrumEqualsDenseSpectrum) {
  random::Rng rng(40);
  for (int n = 1; n <= 2; ++n) {
    const GalerkinOperator G = weyl_matrix(random::form(rng, n), n == 1 ? 15 : 7);
    const auto blocks = parity_blocks(G);
    EXPECT_EQ(blocks[0].rows() + blocks[1].rows(), G.dim);
    const auto a = galerkin_eigenvalues(G);
    for (const cplx& z : sorted_eigenvalues(G.dense())) {
      double best = kInf;
      for (const cplx& w : a) best = std::min(best, std::abs(z - w));
      EXPECT_LT(best, 1e-9 * (1.0 + std::abs(z)));
    }
    EXPECT_EQ(a.size(), static_cast<std::size_t>(G.dim));
  }
}

TEST(NumericalSpectrum, HarmonicIsExact) {
  const ConvergedEigenvalues c = numerical_spectrum(harmonic(), 40, 10, 10);
  ASSERT_EQ(c.values.size(), 10u);
  EXPECT_TRUE(c.warnings.empty());
  for (int k = 0; k < 10; ++k) EXPECT_NEAR(std::abs(c.values[k].value + (2.0 * k + 1.0)), 0.0, 1e-10);
}

TEST(NumericalSpectrum, KfpTopEigenvalues) {
  // frozen from the symbolic lattice of kfp_form(1): -1/2 + (-1/2 + i sqrt3/2) k1 + (-1/2 - i sqrt3/2) k2
  const double h = std::sqrt(3.0) / 2.0;
  const cplx expected[] = {{-0.5, 0.0}, {-1.0, h}, {-1.0, -h}, {-1.5, 0.0}, {-1.5, 2 * h}, {-1.5, -2 * h}};
  const ConvergedEigenvalues c = numerical_spectrum(kfp_form(1.0), 30, 10, 6);
  ASSERT_EQ(c.values.size(), 6u);
  // conjugate pairs may come out in either order
  for (const cplx& e : expected) {
    double best = kInf;
    for (const auto& v : c.values) best = std::min(best, std::abs(v.value - e));
    EXPECT_LT(best, 1e-4) << e;
  }
}

TEST(NumericalSpectrum, ImaginaryFormStaysOnImaginaryAxis) {
  const ConvergedEigenvalues c = numerical_spectrum(one_dim(0.0, 0.0, 0.0, 1.0), 30, 10, 4);
  for (const auto& v : c.values) EXPECT_NEAR(v.value.real(), 0.0, 1e-10);
}

TEST(NumericalSpectrum, WarnsWhenTooFewConverge) {
  const ConvergedEigenvalues c = numerical_spectrum(minus_x2(), 10, 2, 5);
  EXPECT_LT(c.values.size(), 5u);
  EXPECT_FALSE(c.warnings.empty());
}

TEST(NumericalSpectrum, RejectsBadArguments) {
  EXPECT_THROW(numerical_spectrum(harmonic(), 10, 0, 3), PreconditionError);
  EXPECT_THROW(numerical_spectrum(harmonic(), 3, 1, 10), PreconditionError);
}

TEST(ExpmAction, MatchesDenseExponential) {
  random::Rng rng(46);
  for (int n = 1; n <= 2; ++n) {
    const GalerkinOperator G = weyl_matrix(random::dissipative_form(rng, n), n == 1 ? 20 : 8);
    CVector v = CVector::Random(G.dim).normalized();
    for (double t : {0.0, 0.3, 1.5}) {
      const CVector ref = CMatrix(t * G.dense()).exp() * v;
      EXPECT_LT((expm_action(G.M, t, v) - ref).norm(), 1e-8 * (1.0 + ref.norm()));
    }
  }
}

TEST(ExpmAction, MatchesTaylorOracleOnSmallMatrix) {
  const GalerkinOperator G = weyl_matrix(kfp_form(1.0), 3);
  const CVector v = CVector::Ones(G.dim).normalized();
  const CVector ref = oracle::expm_taylor(CMatrix(0.7 * G.dense())) * v;
  EXPECT_LT((expm_action(G.M, 0.7, v) - ref).norm(), 1e-10);
}

TEST(NormCurve, HarmonicDecaysAsExpMinusT) {
  const auto curve = semigroup_norm_curve(harmonic(), 20, uniform_times(8.0, 0.5));
  EXPECT_EQ(curve.front().norm, 1.0);
  for (const auto& s : curve) EXPECT_NEAR(s.norm, std::exp(-s.t), 1e-10 * (1.0 + std::exp(-s.t)));
}

TEST(NormCurve, DissipativeIsContractionAndNonincreasing) {
  random::Rng rng(47);
  for (int n = 1; n <= 2; ++n) {
    const auto curve = semigroup_norm_curve(random::dissipative_form(rng, n), n == 1 ? 20 : 8, uniform_times(4.0, 0.25));
    for (std::size_t i = 1; i < curve.size(); ++i) {
      EXPECT_LE(curve[i].norm, 1.0 + 1e-10);
      EXPECT_LE(curve[i].norm, curve[i - 1].norm + 1e-10);
    }
  }
}

TEST(NormCurve, RejectsNegativeTimesAndOverflow) {
  EXPECT_THROW(semigroup_norm_curve(harmonic(), 10, {-1.0}), PreconditionError);
  EXPECT_THROW(semigroup_norm_curve(harmonic(), 60, {1e3}), Error);
}

TEST(NormCurve, MinusXSquaredOnlyApproachesOneAsNGrows) {
  // -x^2 generates a contraction whose true norm is 1 for all t; truncation
  // lets it decay, more slowly on finer bases.
  const std::vector<double> times = {0.0, 1.0, 2.0, 5.0};
  const auto coarse = semigroup_norm_curve(minus_x2(), 20, times);
  const auto fine = semigroup_norm_curve(minus_x2(), 60, times);
  for (std::size_t i = 1; i < times.size(); ++i) {
    EXPECT_LE(fine[i].norm, 1.0 + 1e-12);
    EXPECT_LE(fine[i].norm, fine[i - 1].norm + 1e-12);
    EXPECT_GT(fine[i].norm, coarse[i].norm);
  }
}

TEST(DecayFit, RecoversExactExponential) {
  std::vector<NormSample> curve;
  for (double t : uniform_times(8.0, 0.5)) curve.push_back({t, 3.0 * std::exp(-0.75 * t)});
  const DecayFit f = decay_fit(curve, 3.0, 8.0);
  EXPECT_NEAR(f.rate, 0.75, 1e-12);
  EXPECT_NEAR(f.intercept, std::log(3.0), 1e-12);
  EXPECT_EQ(f.samples, 11);
}

TEST(DecayFit, HarmonicAndImaginaryRates) {
  const auto times = uniform_times(8.0, 0.5);
  EXPECT_NEAR(decay_fit(semigroup_norm_curve(harmonic(), 20, times), 2.0, 6.0).rate, 1.0, 1e-6);
  const QuadraticForm imag = one_dim(0.0, 0.0, 0.0, 1.0, 1.0);
  EXPECT_NEAR(decay_fit(semigroup_norm_curve(imag, 20, times), 2.0, 6.0).rate, 0.0, 1e-6);
}

TEST(DecayFit, NeedsFiveSamples) {
  std::vector<NormSample> curve = {{0.0, 1.0}, {1.0, 0.5}, {2.0, 0.25}, {3.0, 0.125}};
  EXPECT_THROW(decay_fit(curve, 0.0, 3.0), PreconditionError);
  curve.push_back({4.0, 0.0});
  EXPECT_THROW(decay_fit(curve, 0.0, 4.0), PreconditionError);
}

TEST(WeightMatrix, LinearWeightMatchesGridOracle) {
  random::Rng rng(48);
  for (int n = 1; n <= 2; ++n) {
    const RMatrix W = random::definite(rng, n, 1);
    const int N = n == 1 ? 10 : 6;
    const HermiteBasis basis(n, N);
    const oracle::Grid grid(n, N + 1);
    const CMatrix id = CMatrix::Identity(grid.size, grid.size);
    const CMatrix ref = grid.compress(id + grid.quadratic(W.cast<cplx>()), basis);
    const CMatrix got(weight_matrix(W, basis, 1));
    EXPECT_LT((got - ref).cwiseAbs().maxCoeff(), 1e-12 * ref.cwiseAbs().maxCoeff());
  }
}

TEST(WeightMatrix, SquaredWeightMatchesMoyalOracle) {
  // ((1 + w)^2)^w = (1 + w^w)^2 + c with the Moyal constant c
  random::Rng rng(49);
  for (int n = 1; n <= 2; ++n) {
    const RMatrix W = random::definite(rng, n, 1);
    const int N = n == 1 ? 10 : 6;
    const HermiteBasis basis(n, N);
    const oracle::Grid grid(n, N + 2);
    const CMatrix A = CMatrix::Identity(grid.size, grid.size) + grid.quadratic(W.cast<cplx>());
    const double c = oracle::moyal_square_constant(W);
    const CMatrix ref = grid.compress(A * A, basis) + c * CMatrix::Identity(basis.size(), basis.size());
    const CMatrix got(weight_matrix(W, basis, 2));
    EXPECT_LT((got - ref).cwiseAbs().maxCoeff(), 1e-11 * ref.cwiseAbs().maxCoeff()) << "n = " << n;
  }
}

TEST(WeightMatrix, HarmonicSquareHasUnitConstant) {
  EXPECT_DOUBLE_EQ(oracle::moyal_square_constant(RMatrix::Identity(2, 2)), 1.0);
  const HermiteBasis basis(1, 8);
  const CMatrix got(weight_matrix(RMatrix::Identity(2, 2), basis, 2));
  // (1 + x^2 + xi^2)^2 on phi_g: (2g + 2)^2 + 1
  for (int g = 0; g <= 8; ++g) EXPECT_NEAR(got(g, g).real(), (2.0 * g + 2.0) * (2.0 * g + 2.0) + 1.0, 1e-12);
  EXPECT_THROW(weight_matrix(RMatrix::Identity(2, 2), basis, 3), PreconditionError);
}

TEST(PrimedWeight, IdentitySplitGivesUnitWeight) {
  const QuadraticForm q = harmonic();
  const SymplecticSplit sp = split(q, analyze_singular_space(q));
  EXPECT_TRUE(primed_weight(sp).isIdentity(1e-14));
}

TEST(Smoothing, HarmonicStabilizes) {
  const QuadraticForm q = harmonic();
  const SymplecticSplit sp = split(q, analyze_singular_space(q));
  const SmoothingTable t = smoothing_diagnostic(q, sp, 20, 10, 0.5, 1);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_TRUE(t.rows[0].stabilized);
  EXPECT_TRUE(t.rows[1].stabilized);
  // phi_0 decays by e^{-t} and carries weight 1 + 1
  EXPECT_NEAR(t.rows[0].value_fine, 2.0 * std::exp(-0.5), 1e-12);
}

TEST(Smoothing, KfpStabilizesForSmoothVectors) {
  const QuadraticForm q = kfp_form(1.0);
  const SymplecticSplit sp = split(q, analyze_singular_space(q));
  const SmoothingTable t = smoothing_diagnostic(q, sp, 20, 6, 0.2, 1);
  EXPECT_TRUE(t.rows[0].stabilized);
  EXPECT_TRUE(t.rows[1].stabilized);
}

TEST(Smoothing, NoTimeMeansNoSmoothing) {
  const QuadraticForm q = harmonic();
  const SymplecticSplit sp = split(q, analyze_singular_space(q));
  const SmoothingTable t = smoothing_diagnostic(q, sp, 20, 20, 0.0, 1);
  EXPECT_TRUE(t.rows[0].stabilized);
  EXPECT_FALSE(t.rows[2].stabilized);
}

TEST(Smoothing, RejectsBadArguments) {
  const QuadraticForm q = harmonic();
  const SymplecticSplit sp = split(q, analyze_singular_space(q));
  EXPECT_THROW(smoothing_diagnostic(q, sp, 10, 2, -0.1, 1), PreconditionError);
  EXPECT_THROW(smoothing_diagnostic(q, sp, 10, 2, 0.1, 3), PreconditionError);
}
