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
#pragma once

#include "scoliotrack/geometry.hpp"
#include "scoliotrack/landmarks.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scoliotrack {

// Landmark-driven rigid registration of two diagnoses of the same patient.
//
// The estimator keeps the back's shape: it only rescales (so that the trunk,
// C7 to PSIS midpoint, has the target's length), rotates about C7, and moves
// the source C7 onto the target C7. The rotation is chosen in closed form so
// that the bisector of the source's PSIS pair (seen from C7) lines up with the
// target's; that makes the two angular PSIS errors equal in magnitude and the
// larger of them as small as any rotation can make it.
//
// Angles are measured with atan2 directly on raster coordinates (y down), so a
// positive angle turns +x towards +y, i.e. clockwise on screen. The estimator
// never flips that convention; only display code should.

/// Pieces of the closed-form rotation, all in (-pi, pi].
struct AngleDecomposition
{
  double theta_a = 0.0;  ///< direction of target left PSIS (from C7)
  double theta_c = 0.0;  ///< direction of source left PSIS (from C7)
  double theta_d = 0.0;  ///< theta_a - theta_c
  double theta_ab = 0.0; ///< angle swept from target right PSIS to target left PSIS
  double theta_cd = 0.0; ///< angle swept from source right PSIS to source left PSIS
  double theta = 0.0;    ///< theta_d - (theta_ab - theta_cd) / 2
};

enum class RegistrationMethod
{
  Angle,
  LeastSquares
};

std::string_view to_string(RegistrationMethod m);
/// Accepts "angle" and "lsq"; anything else throws InvalidArgument.
RegistrationMethod parse_method(std::string_view name);

struct RegistrationResiduals
{
  double psis_distance_sum = 0.0; ///< |T(L_s) - L_t| + |T(R_s) - R_t|
  double angular_left = 0.0;      ///< signed angle at target C7 from target left PSIS to mapped source left PSIS
  double angular_right = 0.0;     ///< same for the right PSIS
  double c7_error = 0.0;          ///< |T(C7_s) - C7_t|
};

struct RegistrationReport
{
  RegistrationMethod method = RegistrationMethod::Angle;
  RigidTransform transform;
  std::optional<AngleDecomposition> decomposition; ///< angle method only
  double residual_left = 0.0;                      ///< |angular error| at the left PSIS
  double residual_right = 0.0;
  double psis_distance_sum = 0.0;
  double c7_error = 0.0;
};

Point2 psis_midpoint(Point2 left, Point2 right);
double trunk_length(Point2 c7, Point2 mid);

/// d_t / d_s. Throws RegistrationError unless d_s > 0.
double scale_factor(double d_s, double d_t);

/// PSIS positions relative to C7: {left - c7, right - c7}.
std::pair<Point2, Point2> center_at_c7(const LandmarkSet & set);

/// atan2 direction of v from u = (1, 0), in (-pi, pi]. Throws RegistrationError on (0, 0).
double signed_angle(Point2 v);

/// Angle that rotates `from` onto the direction of `to`, in (-pi, pi].
double signed_angle_between(Point2 from, Point2 to);

/// Closed-form rotation from target vectors (a, b) and source vectors (c, d),
/// each pair being (left PSIS, right PSIS) relative to C7.
AngleDecomposition compute_rotation_angle(Point2 a, Point2 b, Point2 c, Point2 d);

/// Angle-minimization estimate mapping `source` onto `target`. Throws
/// RegistrationError on a zero trunk length, a PSIS coincident with C7, or a
/// PSIS pair subtending less than 1e-6 rad at C7.
RegistrationReport estimate_rigid(const LandmarkSet & source, const LandmarkSet & target);

/// Least-squares similarity over point pairs (source, target), minimizing
/// sum |s R p + t - q|^2 in closed form. Needs at least two pairs and source
/// points that are not all coincident (RegistrationError otherwise).
RigidTransform estimate_similarity_lsq(std::span<const std::pair<Point2, Point2>> pairs);

/// LSAE over the four landmark correspondences, with the same residual report.
RegistrationReport estimate_lsq(const LandmarkSet & source, const LandmarkSet & target);

RegistrationReport register_landmarks(const LandmarkSet & source, const LandmarkSet & target,
                                      RegistrationMethod method);

std::vector<Point2> apply_to_points(const RigidTransform & t, std::span<const Point2> points);

/// Every landmark and spine point mapped through `t`, relabelled with `frame`.
LandmarkSet apply_to_landmarks(const RigidTransform & t, const LandmarkSet & set, std::string frame);

RegistrationResiduals registration_residuals(const LandmarkSet & source, const LandmarkSet & target,
                                             const RigidTransform & t);

/// Sum of squared distances |t(p) - q|^2 over the pairs.
double squared_residual(const RigidTransform & t, std::span<const std::pair<Point2, Point2>> pairs);

/// The four (source, target) landmark correspondences: C7, left PSIS, right PSIS, IC.
std::vector<std::pair<Point2, Point2>> landmark_pairs(const LandmarkSet & source, const LandmarkSet & target);

} // namespace scoliotrack
