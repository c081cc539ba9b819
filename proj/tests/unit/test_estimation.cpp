#include <gtest/gtest.h>

#include <cmath>

#include "predtrig/errors.hpp"
#include "predtrig/estimation.hpp"
#include "predtrig/harness.hpp"
#include "support/oracle.hpp"

using namespace predtrig;

namespace {

constexpr double kTol = 1e-12;

Matrix inverse2(const Matrix& m) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return Matrix{{m(1, 1) / det, -m(0, 1) / det}, {-m(1, 0) / det, m(0, 0) / det}};
}

}  // namespace

TEST(KalmanFilter, ScalarStepMatchesHandComputation) {
  const auto s = oracle::example1();
  const ModelProvider model = oracle::model(s);
  const FilterState f0 = FilterState::initial(oracle::prior(s));
  const GaussianBelief pred = kf_predict(f0, model);
  EXPECT_NEAR(pred.mean[0], 0.98, kTol);
  EXPECT_NEAR(pred.cov(0, 0), 1.0604, kTol);
  const FilterState f1 = kf_update(pred, std::vector<double>{1.0}, model, 1);
  EXPECT_NEAR(f1.gain(0, 0), 0.9138228197, 1e-10);
  EXPECT_NEAR(f1.posterior.cov(0, 0), 0.09138228197, 1e-11);
  EXPECT_NEAR(f1.posterior.mean[0], 0.98 + 0.9138228197 * 0.02, 1e-10);
  EXPECT_EQ(f1.k, 1u);
}

TEST(KalmanFilter, Example2PredictFromSteadyState) {
  const auto s = oracle::example2();
  const ModelProvider model = oracle::model(s);
  FilterState f;
  f.k = 10;
  f.posterior = {{0.0}, Matrix::scalar(0.063948)};
  EXPECT_NEAR(kf_predict(f, model).cov(0, 0), 0.17737708, 1e-12);
}

TEST(KalmanFilter, AgreesWithScalarOracleAlongTrajectory) {
  const auto s = oracle::example2();
  const ModelProvider model = oracle::model(s);
  RngStream rng(3, 0);
  const Trajectory traj = simulate_trajectory(model, oracle::prior(s), 100, rng);
  FilterState f = FilterState::initial(oracle::prior(s));
  oracle::ScalarKf o{s.x0_mean, s.x0_var};
  for (std::size_t k = 1; k <= 100; ++k) {
    f = kf_update(kf_predict(f, model), traj.measurement(k), model, k);
    o = oracle::kf_step(s, o, traj.measurement(k)[0]);
    ASSERT_NEAR(f.posterior.mean[0], o.mean, 1e-10 * (1.0 + std::abs(o.mean)));
    ASSERT_NEAR(f.posterior.cov(0, 0), o.var, 1e-13);
  }
}

TEST(KalmanFilterProperty, TwoDimensionalUpdateMatchesExplicitInverse) {
  oracle::Gen gen(31);
  for (int trial = 0; trial < 100; ++trial) {
    const ModelProvider model = [&] {
      Matrix a = gen.matrix(2, 2, 0.6);
      return ModelProvider::lti(a, gen.matrix(2, 2), gen.spd(2, 0.1), gen.spd(2, 0.1));
    }();
    const Matrix pm = gen.spd(2, 0.2);
    const CovarianceUpdate upd = covariance_update(model, 1, pm);
    const Matrix h = model.H(1);
    const Matrix s = congruence(h, pm) + model.R(1);
    const Matrix l = multiply(multiply(pm, h.transpose()), inverse2(s));
    const Matrix post = multiply(Matrix::identity(2) - multiply(l, h), pm);
    EXPECT_LE(oracle::max_abs_diff(upd.gain, l), 1e-9 * (1.0 + frobenius_norm(l)));
    EXPECT_LE(oracle::max_abs_diff(upd.posterior, post), 1e-9 * (1.0 + frobenius_norm(post)));
    EXPECT_EQ(upd.posterior, upd.posterior.transpose());
  }
}

TEST(KalmanFilter, ZeroMeasurementNoiseIsAccepted) {
  const ModelProvider model = ModelProvider::lti(Matrix::scalar(1.0), Matrix::scalar(1.0),
                                                 Matrix::scalar(0.1), Matrix::scalar(0.0));
  const CovarianceUpdate upd = covariance_update(model, 1, Matrix::scalar(0.5));
  EXPECT_NEAR(upd.gain(0, 0), 1.0, kTol);
  EXPECT_NEAR(upd.posterior(0, 0), 0.0, kTol);
}

TEST(KalmanFilter, SingularInnovationRejected) {
  const ModelProvider model = ModelProvider::lti(Matrix::identity(2), Matrix{{1, 0}, {1, 0}},
                                                 Matrix::identity(2), Matrix(2, 2));
  EXPECT_THROW(covariance_update(model, 1, Matrix::identity(2)), NumericError);
}

TEST(OpenLoop, ZeroStepsAndLyapunovLimit) {
  const auto s = oracle::example1();
  const ModelProvider model = oracle::model(s);
  const Matrix p = Matrix::scalar(0.3);
  EXPECT_EQ(open_loop_covariance(model, 4, 0, p), p);
  EXPECT_NEAR(open_loop_covariance(model, 0, 7, p)(0, 0), oracle::open_loop(s, 0.3, 7), 1e-13);
  // q / (1 - a^2)
  EXPECT_NEAR(open_loop_covariance(model, 0, 5000, p)(0, 0), 2.5252525252525, 1e-9);
}

TEST(OpenLoop, PredictMSteps) {
  const auto s = oracle::example1();
  const ModelProvider model = oracle::model(s);
  FilterState f;
  f.k = 3;
  f.posterior = {{2.0}, Matrix::scalar(0.05)};
  const GaussianBelief b = predict_m_steps(f, model, 3);
  EXPECT_NEAR(b.mean[0], 2.0 * std::pow(0.98, 3), kTol);
  EXPECT_NEAR(b.cov(0, 0), oracle::open_loop(s, 0.05, 3), kTol);
}

TEST(VarianceSchedule, ConvergesToRiccatiFixedPoint) {
  for (const auto& s : {oracle::example1(), oracle::example2()}) {
    const VarianceSchedule sched(oracle::model(s), oracle::prior(s), 300);
    EXPECT_NEAR(sched.posterior(300)(0, 0), oracle::riccati_posterior(s), 1e-12);
    EXPECT_EQ(sched.posterior(0)(0, 0), s.x0_var);
    EXPECT_THROW(sched.posterior(301), RangeError);
    EXPECT_THROW(sched.prior(0), RangeError);
  }
  EXPECT_THROW(variance_schedule(oracle::model(oracle::example1()),
                                 oracle::prior(oracle::example1()), 0),
               RangeError);
}

TEST(VarianceScheduleProperty, CovariancesIndependentOfMeasurements) {
  // The schedule and the running filter agree bitwise for any realization.
  oracle::Gen gen(32);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t nx = gen.size(1, 3), ny = gen.size(1, 2);
    const ModelProvider model = gen.model(nx, ny);
    const Prior prior{Vector(nx, 0.5), gen.spd(nx, 0.2)};
    const VarianceSchedule sched(model, prior, 40);
    for (std::uint64_t seed : {1u, 2u}) {
      RngStream rng(seed + 100 * static_cast<std::uint64_t>(trial), 0);
      const Trajectory traj = simulate_trajectory(model, prior, 40, rng);
      FilterState f = FilterState::initial(prior);
      for (std::size_t k = 1; k <= 40; ++k) {
        f = kf_update(kf_predict(f, model), traj.measurement(k), model, k);
        ASSERT_EQ(f.posterior.cov, sched.posterior(k));
        ASSERT_EQ(f.prior.cov, sched.prior(k));
      }
    }
  }
}

TEST(RemoteEstimator, StepSemantics) {
  const ModelProvider model = oracle::model(oracle::example2());
  RemoteState r = RemoteState::initial(oracle::prior(oracle::example2()));
  EXPECT_EQ(r.estimate[0], 1.0);
  r = remote_step(r, false, std::nullopt, model);
  EXPECT_EQ(r.k, 1u);
  EXPECT_DOUBLE_EQ(r.estimate[0], 1.1);
  EXPECT_EQ(r.last_transmit, 0u);
  r = remote_step(r, true, Vector{0.25}, model);
  EXPECT_EQ(r.estimate[0], 0.25);
  EXPECT_EQ(r.last_transmit, 2u);
  EXPECT_THROW(remote_step(r, true, std::nullopt, model), Error);
  EXPECT_THROW(remote_step(r, false, Vector{1.0}, model), Error);
}
