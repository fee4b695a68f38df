#include <mpcert/errors.hpp>
#include <mpcert/systems.hpp>

#include <gtest/gtest.h>

#include <cmath>

#include "test_helpers.hpp"

namespace mpcert {
namespace {

using testing::mat;
using testing::vec;

TEST(Zoh, ZeroDynamicsGivesIntegrator) {
  const auto sys = zoh_discretize_linear(Matrix::Zero(2, 2), Matrix::Identity(2, 2), 0.25);
  EXPECT_LE((sys.A - Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LE((sys.B_u - 0.25 * Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(Zoh, ScalarClosedForm) {
  for (double a : {-2.0, -0.3, 0.7, 1.5}) {
    const double b = 1.7, T = 0.4;
    const auto sys = zoh_discretize_linear(mat({{a}}), mat({{b}}), T);
    const double ea = std::exp(a * T);
    EXPECT_NEAR(sys.A(0, 0), ea, 1e-10 * ea);
    const double bu = std::expm1(a * T) * b / a;
    EXPECT_NEAR(sys.B_u(0, 0), bu, 1e-10 * std::abs(bu));
  }
}

TEST(Zoh, PendulumLipschitzConstant) {
  EXPECT_NEAR(spectral_norm(testing::pendulum_surrogate().A), 1.041, 5e-4);
}

TEST(Zoh, RejectsBadInput) {
  EXPECT_THROW(zoh_discretize_linear(Matrix::Zero(2, 3), Matrix::Zero(2, 1), 0.1),
               ValidationError);
  EXPECT_THROW(zoh_discretize_linear(Matrix::Zero(2, 2), Matrix::Zero(3, 1), 0.1),
               ValidationError);
  EXPECT_THROW(zoh_discretize_linear(Matrix::Zero(2, 2), Matrix::Zero(2, 1), 0.0),
               ValidationError);
}

TEST(Zoh, MatchesRk4OfLinearizedField) {
  const PendulumParams p{};
  const auto [a_c, b_c] = pendulum_linearization(p);
  const auto sys = zoh_discretize_linear(a_c, b_c, p.step);
  const auto field = [a_c = a_c, b_c = b_c](const Vector& x, const Vector& u) {
    return Vector(a_c * x + b_c * u);
  };
  const auto rk = rk4_plant("linearized", field, 2, 1, p.step, kDefaultSubsteps);
  Lcg64 rng(23);
  for (int i = 0; i < 500; ++i) {
    const Vector x = testing::random_vector(rng, 2);
    const Vector u = testing::random_vector(rng, 1);
    EXPECT_LE((rk(x, u) - sys.step(x, u)).norm(), 1e-10);
  }
}

TEST(Pendulum, OriginIsEquilibrium) {
  const auto g = pendulum_plant(PendulumParams{});
  EXPECT_EQ(g(Vector::Zero(2), Vector::Zero(1)).norm(), 0.0);
}

TEST(Pendulum, AgreesWithSurrogateNearOrigin) {
  const auto g = pendulum_plant(PendulumParams{});
  const auto f = testing::pendulum_surrogate();
  Lcg64 rng(29);
  for (int i = 0; i < 200; ++i) {
    const Vector x = testing::random_vector(rng, 2, -1e-6, 1e-6);
    const Vector u = testing::random_vector(rng, 1, -1e-6, 1e-6);
    EXPECT_LE((g(x, u) - f.step(x, u)).norm(), 1e-12);
  }
}

TEST(Pendulum, SubstepRefinementIsConverged) {
  const auto g100 = pendulum_plant(PendulumParams{}, 100);
  const auto g200 = pendulum_plant(PendulumParams{}, 200);
  Lcg64 rng(31);
  for (int i = 0; i < 200; ++i) {
    const Vector x = testing::random_in_unit_ball(rng, 2);
    const Vector u = testing::random_vector(rng, 1);
    EXPECT_LT((g100(x, u) - g200(x, u)).norm(), 1e-12);
  }
}

TEST(Presets, KnownNames) {
  const auto p = make_preset("pendulum");
  EXPECT_EQ(p.plant.name(), "pendulum");
  const auto lin = make_preset("pendulum-linear");
  const Vector x = vec({0.3, -0.2});
  const Vector u = vec({0.5});
  EXPECT_EQ(lin.plant(x, u), lin.surrogate.step(x, u));
  EXPECT_THROW(make_preset("cartpole"), ValidationError);
}

TEST(PlantModel, RejectsNonZeroOrigin) {
  auto shifted = [](const Vector& x, const Vector&) { return Vector(x.array() + 1.0); };
  EXPECT_THROW(PlantModel("bad", shifted, 2, 1, ControlSet::unconstrained()),
               ValidationError);
}

TEST(ClampControl, Examples) {
  EXPECT_EQ(clamp_control(vec({2.5}), ControlSet::unconstrained()), vec({2.5}));
  const auto box = ControlSet::symmetric_box(1, 1.0);
  EXPECT_EQ(clamp_control(vec({2.0}), box), vec({1.0}));
  EXPECT_EQ(clamp_control(vec({0.0}), box), vec({0.0}));
  EXPECT_EQ(clamp_control(vec({-3.0}), box), vec({-1.0}));
  EXPECT_THROW(ControlSet::box(vec({0.5}), vec({1.0})), ValidationError);
}

TEST(Region, Membership) {
  EXPECT_TRUE(Region::all().contains(vec({1e9, -1e9})));
  EXPECT_TRUE(Region::ball(1.0).contains(vec({0.6, 0.8})));
  EXPECT_FALSE(Region::ball(1.0).contains(vec({0.8, 0.8})));
  EXPECT_TRUE(Region::box(vec({1, 2})).contains(vec({-1, 2})));
  EXPECT_FALSE(Region::box(vec({1, 2})).contains(vec({-1.1, 0})));
}

class MismatchTest : public ::testing::Test {
 protected:
  LinearSystem sys = testing::pendulum_surrogate();
  PlantModel f = linear_plant(sys, "f");
  ControlSet controls = ControlSet::symmetric_box(1, 1.0);
};

TEST_F(MismatchTest, IdenticalModelsGiveZero) {
  const auto est = estimate_mismatch(f, f, Region::ball(1.0), controls, 5, 1);
  EXPECT_EQ(est.p_bar, 0.0);
  EXPECT_GT(est.samples_used, 0u);
  EXPECT_TRUE(est.is_lower_estimate);
}

TEST_F(MismatchTest, LinearPerturbationApproachesSupremum) {
  const double c = 0.37;
  const auto g = PlantModel(
      "g", [this, c](const Vector& x, const Vector& u) { return Vector(sys.step(x, u) + c * x); },
      2, 1, ControlSet::unconstrained());
  for (int grid : {3, 4, 7}) {
    const auto est = estimate_mismatch(f, g, Region::ball(1.0), controls, grid, 9);
    EXPECT_GE(est.p_bar, c * (1.0 - 1.0 / grid));
    // Ratio c|x| / |x| at u = 0 may round one ulp above c.
    EXPECT_LE(est.p_bar, c * (1.0 + 4e-16));
  }
}

TEST_F(MismatchTest, PendulumMismatchOnSmallBall) {
  const auto g = pendulum_plant(PendulumParams{});
  const double radius = 1e-3;
  const auto est = estimate_mismatch(f, g, Region::ball(radius), controls, 9, 42);
  // |sin a - a| <= |a|^3 / 6 gives |f - g| <= g_ratio r^3 / 6 per unit time
  // at worst over the ball; relative to |x| that is at most g_ratio r^2 / 6.
  EXPECT_LE(est.p_bar, 0.5 * radius * radius / 6.0 + 1e-9);
  EXPECT_LE(est.p_bar, 8.4e-8);
  EXPECT_GT(est.p_bar, 0.0);
}

TEST_F(MismatchTest, RefinedGridNeverLowersEstimate) {
  const auto g = pendulum_plant(PendulumParams{});
  for (int grid : {3, 5, 8}) {
    const auto coarse = estimate_mismatch(f, g, Region::ball(0.5), controls, grid, 4);
    const auto fine = estimate_mismatch(f, g, Region::ball(0.5), controls, 2 * grid - 1, 4);
    EXPECT_GE(fine.p_bar, coarse.p_bar - 1e-15);
  }
}

TEST_F(MismatchTest, BoxRegionAndErrors) {
  const auto g = pendulum_plant(PendulumParams{});
  const auto est = estimate_mismatch(f, g, Region::box(vec({0.1, 0.1})), controls, 5, 3);
  EXPECT_GT(est.p_bar, 0.0);
  EXPECT_THROW(estimate_mismatch(f, g, Region::all(), controls, 5, 3), UnsupportedRegionError);
  EXPECT_THROW(estimate_mismatch(f, g, Region::ball(1), ControlSet::unconstrained(), 5, 3),
               UnsupportedRegionError);
  EXPECT_THROW(estimate_mismatch(f, g, Region::ball(1), controls, 1, 3), ValidationError);
}

TEST_F(MismatchTest, DeterministicForSeed) {
  const auto g = pendulum_plant(PendulumParams{});
  const auto a = estimate_mismatch(f, g, Region::ball(0.2), controls, 5, 77);
  const auto b = estimate_mismatch(f, g, Region::ball(0.2), controls, 5, 77);
  EXPECT_EQ(a.p_bar, b.p_bar);
  EXPECT_EQ(a.max_state, b.max_state);
}

TEST(Lcg64, ReproducibleStream) {
  Lcg64 a(123), b(123);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  Lcg64 c(0);
  EXPECT_EQ(c.next_u64(), Lcg64::kIncrement);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

}  // namespace
}  // namespace mpcert
