/*=========================================================================
 *
 *  Copyright The scoliotrack Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *         http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#include "scoliotrack/error.hpp"
#include "scoliotrack/registration.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace scoliotrack;

namespace {

constexpr double pi = std::numbers::pi;

LandmarkSet
sample_set()
{
  return { "s", { 200, 80 }, { 150, 420 }, { 260, 410 }, { 205, 500 }, { { 200, 80 }, { 203, 300 }, { 205, 500 } } };
}

} // namespace

TEST(Registration, IdenticalSetsGiveIdentity)
{
  const LandmarkSet s = sample_set();
  const RegistrationReport r = estimate_rigid(s, s);
  EXPECT_DOUBLE_EQ(r.transform.scale, 1.0);
  EXPECT_NEAR(r.transform.angle, 0.0, 1e-15);
  EXPECT_NEAR(r.residual_left, 0.0, 1e-12);
  EXPECT_NEAR(r.residual_right, 0.0, 1e-12);
  EXPECT_NEAR(r.psis_distance_sum, 0.0, 1e-9);
  EXPECT_EQ(r.c7_error, 0.0);
  ASSERT_TRUE(r.decomposition.has_value());
}

TEST(Registration, RecoversInverseOfScaleTwoAndThirtyDegrees)
{
  const LandmarkSet target = sample_set();
  const LandmarkSet source = oracle::similarity_image(target, 2.0, pi / 6, target.c7, { 0, 0 });
  const RegistrationReport r = estimate_rigid(source, target);
  EXPECT_NEAR(r.transform.scale, 0.5, 1e-9);
  EXPECT_NEAR(r.transform.angle, -pi / 6, 1e-9);
  EXPECT_NEAR(r.psis_distance_sum, 0.0, 1e-9);
  EXPECT_NEAR(r.residual_left, 0.0, 1e-9);
}

TEST(Registration, DecompositionByHand)
{
  // Target: left PSIS straight down, right PSIS at 45 degrees down-right.
  // Source: left PSIS at 135 degrees, right PSIS straight down.
  const AngleDecomposition d = compute_rotation_angle({ 0, 10 }, { 10, 10 }, { -10, 10 }, { 0, 10 });
  EXPECT_NEAR(d.theta_a, pi / 2, 1e-15);
  EXPECT_NEAR(d.theta_c, 3 * pi / 4, 1e-15);
  EXPECT_NEAR(d.theta_d, -pi / 4, 1e-15);
  EXPECT_NEAR(d.theta_ab, pi / 4, 1e-15);
  EXPECT_NEAR(d.theta_cd, pi / 4, 1e-15);
  EXPECT_NEAR(d.theta, -pi / 4, 1e-15);

  // Spread differs: target 90 degrees, source 60 degrees.
  const AngleDecomposition e = compute_rotation_angle({ -10, 10 }, { 10, 10 }, { -5, 8.660254037844386 }, { 5, 8.660254037844386 });
  EXPECT_NEAR(e.theta_ab, pi / 2, 1e-12);
  EXPECT_NEAR(e.theta_cd, pi / 3, 1e-12);
  EXPECT_NEAR(e.theta, 0.0, 1e-12); // symmetric pairs: bisectors already agree
}

TEST(Registration, BisectorEqualizesAngularErrors)
{
  std::mt19937_64 rng(21);
  for (int i = 0; i < 100; ++i)
  {
    const LandmarkSet s = oracle::random_landmarks(rng);
    const LandmarkSet t = oracle::random_landmarks(rng);
    const RegistrationReport r = estimate_rigid(s, t);
    const RegistrationResiduals res = registration_residuals(s, t, r.transform);
    EXPECT_NEAR(r.residual_left, r.residual_right, 1e-9);
    EXPECT_NEAR(res.angular_left, -res.angular_right, 1e-9);
    EXPECT_LE(res.c7_error, 1e-12);

    const auto [el, er] = oracle::angular_errors(s, t, r.transform.angle);
    EXPECT_NEAR(std::abs(el), r.residual_left, 1e-9);
    EXPECT_NEAR(std::abs(er), r.residual_right, 1e-9);
  }
}

TEST(Registration, MatchesGridMinimaxOnAFewPairs)
{
  std::mt19937_64 rng(77);
  for (int i = 0; i < 10; ++i)
  {
    const LandmarkSet s = oracle::random_landmarks(rng);
    const LandmarkSet t = oracle::similarity_image(oracle::random_landmarks(rng), 1.0, std::uniform_real_distribution<>(-3, 3)(rng), { 250, 300 }, { 0, 0 });
    const double closed = estimate_rigid(s, t).transform.angle;
    const double grid = oracle::grid_minimax_angle(s, t, 1e-4);
    EXPECT_LE(std::abs(oracle::wrap(closed - grid)), 1e-4);
  }
}

TEST(Registration, DegenerateInputsThrow)
{
  LandmarkSet s = sample_set();
  LandmarkSet zero_trunk = s;
  zero_trunk.psis_left = { 150, 80 };
  zero_trunk.psis_right = { 250, 80 }; // midpoint on C7
  EXPECT_THROW(estimate_rigid(zero_trunk, s), RegistrationError);
  EXPECT_THROW(estimate_rigid(s, zero_trunk), RegistrationError);

  LandmarkSet on_c7 = s;
  on_c7.psis_left = on_c7.c7;
  EXPECT_THROW(estimate_rigid(on_c7, s), RegistrationError);

  LandmarkSet collinear = s;
  collinear.psis_left = { 200, 300 };
  collinear.psis_right = { 200, 400 }; // both straight below C7
  EXPECT_THROW(estimate_rigid(collinear, s), RegistrationError);
}

TEST(Registration, TransformPinsC7AndPreservesShape)
{
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i)
  {
    const LandmarkSet s = oracle::random_landmarks(rng);
    const LandmarkSet t = oracle::random_landmarks(rng);
    const RigidTransform tr = estimate_rigid(s, t).transform;
    EXPECT_LE(distance(tr.apply(s.c7), t.c7), 1e-12);
    EXPECT_NEAR(tr.determinant(), tr.scale * tr.scale, 1e-12 * tr.scale * tr.scale);
    const LandmarkSet mapped = apply_to_landmarks(tr, s, "t");
    EXPECT_EQ(mapped.spine.size(), s.spine.size());
    EXPECT_NEAR(distance(mapped.psis_left, mapped.psis_right), tr.scale * distance(s.psis_left, s.psis_right), 1e-9);
  }
}

TEST(LeastSquares, ExactOnSimilarityData)
{
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<> coord(-200, 200), sc(0.25, 4), ang(-pi, pi);
  for (int i = 0; i < 50; ++i)
  {
    const double s = sc(rng), a = ang(rng);
    const Point2 shift{ coord(rng), coord(rng) };
    std::vector<std::pair<Point2, Point2>> pairs;
    for (int k = 0; k < 6; ++k)
    {
      const Point2 p{ coord(rng), coord(rng) };
      pairs.emplace_back(p, oracle::similarity_point(p, s, a, { 0, 0 }, shift));
    }
    const RigidTransform t = estimate_similarity_lsq(pairs);
    EXPECT_NEAR(t.scale / s, 1.0, 1e-9);
    EXPECT_NEAR(oracle::wrap(t.angle - a), 0.0, 1e-9);
    EXPECT_LE(squared_residual(t, pairs), 1e-12);
  }
}

TEST(LeastSquares, RejectsTooFewOrCoincidentPoints)
{
  const std::vector<std::pair<Point2, Point2>> one{ { { 1, 1 }, { 2, 2 } } };
  EXPECT_THROW(estimate_similarity_lsq(one), RegistrationError);
  const std::vector<std::pair<Point2, Point2>> same{ { { 1, 1 }, { 2, 2 } }, { { 1, 1 }, { 5, 2 } } };
  EXPECT_THROW(estimate_similarity_lsq(same), RegistrationError);
}

TEST(LeastSquares, BeatsNearbyTransformsOnNoisyData)
{
  std::mt19937_64 rng(12);
  std::normal_distribution<> noise(0.0, 3.0);
  for (int i = 0; i < 5; ++i)
  {
    const LandmarkSet t = oracle::random_landmarks(rng);
    LandmarkSet s = oracle::similarity_image(t, 1.3, 0.2, { 0, 0 }, { 15, -8 });
    s.psis_left.x += noise(rng);
    s.ic.y += noise(rng);
    const auto pairs = landmark_pairs(s, t);
    const RigidTransform est = estimate_similarity_lsq(pairs);
    const double best = oracle::squared_residual(est.scale, est.angle, est.pivot, est.anchor, pairs);
    EXPECT_LE(best, oracle::grid_min_residual(est.scale, est.angle, est.pivot, est.anchor, pairs, 1e-3, 1e-3, 0.05) *
                      (1 + 1e-12));
  }
}

TEST(Registration, MethodsAgreeOnExactData)
{
  const LandmarkSet t = sample_set();
  const LandmarkSet s = oracle::similarity_image(t, 0.7, -0.4, { 100, 100 }, { 30, 12 });
  const RegistrationReport a = register_landmarks(s, t, RegistrationMethod::Angle);
  const RegistrationReport l = register_landmarks(s, t, RegistrationMethod::LeastSquares);
  EXPECT_NEAR(a.psis_distance_sum, 0.0, 1e-9);
  EXPECT_NEAR(l.psis_distance_sum, 0.0, 1e-9);
  EXPECT_NEAR(a.transform.scale, l.transform.scale, 1e-9);
  EXPECT_NEAR(oracle::wrap(a.transform.angle - l.transform.angle), 0.0, 1e-9);
  EXPECT_FALSE(l.decomposition.has_value());
}

TEST(Registration, MethodNames)
{
  EXPECT_EQ(parse_method("angle"), RegistrationMethod::Angle);
  EXPECT_EQ(parse_method("lsq"), RegistrationMethod::LeastSquares);
  EXPECT_THROW(parse_method("warp"), InvalidArgument);
  EXPECT_EQ(to_string(RegistrationMethod::LeastSquares), "lsq");
}
