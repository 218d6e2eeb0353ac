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
#include "scoliotrack/registration.hpp"

#include "scoliotrack/error.hpp"

#include <cmath>
#include <string>

namespace scoliotrack {

namespace {

constexpr double kMinSubtendedAngle = 1e-6;

void
check_psis_geometry(const LandmarkSet & set, const char * role)
{
  const auto [left, right] = center_at_c7(set);
  if (norm(left) == 0.0 || norm(right) == 0.0)
    throw RegistrationError(std::string(role) + " landmarks are degenerate: a PSIS coincides with C7");
  if (std::abs(signed_angle_between(right, left)) < kMinSubtendedAngle)
    throw RegistrationError(std::string(role) +
                            " landmarks are degenerate: the PSIS pair subtends less than 1e-6 rad at C7");
}

RegistrationReport
make_report(RegistrationMethod method, const RigidTransform & t, const LandmarkSet & source,
            const LandmarkSet & target)
{
  const RegistrationResiduals r = registration_residuals(source, target, t);
  RegistrationReport report;
  report.method = method;
  report.transform = t;
  report.residual_left = std::abs(r.angular_left);
  report.residual_right = std::abs(r.angular_right);
  report.psis_distance_sum = r.psis_distance_sum;
  report.c7_error = r.c7_error;
  return report;
}

} // namespace

std::string_view
to_string(RegistrationMethod m)
{
  return m == RegistrationMethod::Angle ? "angle" : "lsq";
}

RegistrationMethod
parse_method(std::string_view name)
{
  if (name == "angle")
    return RegistrationMethod::Angle;
  if (name == "lsq")
    return RegistrationMethod::LeastSquares;
  throw InvalidArgument("unknown registration method '" + std::string(name) + "' (expected angle or lsq)");
}

Point2
psis_midpoint(Point2 left, Point2 right)
{
  return { (left.x + right.x) / 2.0, (left.y + right.y) / 2.0 };
}

double
trunk_length(Point2 c7, Point2 mid)
{
  return distance(c7, mid);
}

double
scale_factor(double d_s, double d_t)
{
  if (!(d_s > 0.0))
    throw RegistrationError("degenerate landmarks: source trunk length is zero");
  return d_t / d_s;
}

std::pair<Point2, Point2>
center_at_c7(const LandmarkSet & set)
{
  return { set.psis_left - set.c7, set.psis_right - set.c7 };
}

double
signed_angle(Point2 v)
{
  if (v.x == 0.0 && v.y == 0.0)
    throw RegistrationError("angle of a zero vector is undefined");
  // atan2(cross(u, v), dot(u, v)) with u = (1, 0)
  return normalize_angle(std::atan2(v.y, v.x));
}

double
signed_angle_between(Point2 from, Point2 to)
{
  if ((from.x == 0.0 && from.y == 0.0) || (to.x == 0.0 && to.y == 0.0))
    throw RegistrationError("angle between vectors is undefined for a zero vector");
  return normalize_angle(std::atan2(cross(from, to), dot(from, to)));
}

AngleDecomposition
compute_rotation_angle(Point2 a, Point2 b, Point2 c, Point2 d)
{
  AngleDecomposition r;
  r.theta_a = signed_angle(a);
  r.theta_c = signed_angle(c);
  r.theta_d = normalize_angle(r.theta_a - r.theta_c);
  r.theta_ab = signed_angle_between(b, a);
  r.theta_cd = signed_angle_between(d, c);
  // Wrapping the spread difference first keeps the bisector on the shorter arc.
  r.theta = normalize_angle(r.theta_d - normalize_angle(r.theta_ab - r.theta_cd) / 2.0);
  return r;
}

RegistrationReport
estimate_rigid(const LandmarkSet & source, const LandmarkSet & target)
{
  const double d_s = trunk_length(source.c7, psis_midpoint(source.psis_left, source.psis_right));
  const double d_t = trunk_length(target.c7, psis_midpoint(target.psis_left, target.psis_right));
  const double scale = scale_factor(d_s, d_t);
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw RegistrationError("degenerate landmarks: target trunk length is zero");

  check_psis_geometry(source, "source");
  check_psis_geometry(target, "target");

  const auto [a, b] = center_at_c7(target);
  const auto [c, d] = center_at_c7(source);
  const AngleDecomposition angles = compute_rotation_angle(a, b, c, d);

  const RigidTransform t{ scale, angles.theta, source.c7, target.c7 };
  RegistrationReport report = make_report(RegistrationMethod::Angle, t, source, target);
  report.decomposition = angles;
  return report;
}

RigidTransform
estimate_similarity_lsq(std::span<const std::pair<Point2, Point2>> pairs)
{
  if (pairs.size() < 2)
    throw RegistrationError("least-squares similarity needs at least two point pairs");

  const double n = static_cast<double>(pairs.size());
  Point2 p_mean{}, q_mean{};
  for (const auto & [p, q] : pairs)
  {
    p_mean = p_mean + p;
    q_mean = q_mean + q;
  }
  p_mean = p_mean * (1.0 / n);
  q_mean = q_mean * (1.0 / n);

  double spread = 0.0, sum_dot = 0.0, sum_cross = 0.0;
  for (const auto & [p, q] : pairs)
  {
    const Point2 pc = p - p_mean;
    const Point2 qc = q - q_mean;
    spread += dot(pc, pc);
    sum_dot += dot(pc, qc);
    sum_cross += cross(pc, qc);
  }
  if (spread <= 1e-18 * (1.0 + dot(p_mean, p_mean)))
    throw RegistrationError("least-squares similarity is rank deficient: source points coincide");

  // Optimal linear part [[a, -b], [b, a]] of the centred problem.
  const double a = sum_dot / spread;
  const double b = sum_cross / spread;
  const double scale = std::hypot(a, b);
  if (!(scale > 0.0))
    throw RegistrationError("least-squares similarity collapses the source onto a point");
  return { scale, std::atan2(b, a), p_mean, q_mean };
}

RegistrationReport
estimate_lsq(const LandmarkSet & source, const LandmarkSet & target)
{
  const auto pairs = landmark_pairs(source, target);
  return make_report(RegistrationMethod::LeastSquares, estimate_similarity_lsq(pairs), source, target);
}

RegistrationReport
register_landmarks(const LandmarkSet & source, const LandmarkSet & target, RegistrationMethod method)
{
  return method == RegistrationMethod::Angle ? estimate_rigid(source, target) : estimate_lsq(source, target);
}

std::vector<Point2>
apply_to_points(const RigidTransform & t, std::span<const Point2> points)
{
  std::vector<Point2> out;
  out.reserve(points.size());
  for (const auto & p : points)
    out.push_back(t.apply(p));
  return out;
}

LandmarkSet
apply_to_landmarks(const RigidTransform & t, const LandmarkSet & set, std::string frame)
{
  LandmarkSet out;
  out.frame = std::move(frame);
  out.c7 = t.apply(set.c7);
  out.psis_left = t.apply(set.psis_left);
  out.psis_right = t.apply(set.psis_right);
  out.ic = t.apply(set.ic);
  out.spine = apply_to_points(t, set.spine);
  return out;
}

RegistrationResiduals
registration_residuals(const LandmarkSet & source, const LandmarkSet & target, const RigidTransform & t)
{
  const Point2 left = t.apply(source.psis_left);
  const Point2 right = t.apply(source.psis_right);
  const Point2 c7 = t.apply(source.c7);

  RegistrationResiduals r;
  r.psis_distance_sum = distance(left, target.psis_left) + distance(right, target.psis_right);
  r.c7_error = distance(c7, target.c7);

  auto angular = [&](Point2 mapped, Point2 wanted) {
    const Point2 u = wanted - target.c7;
    const Point2 v = mapped - target.c7;
    if ((u.x == 0.0 && u.y == 0.0) || (v.x == 0.0 && v.y == 0.0))
      return 0.0;
    return normalize_angle(std::atan2(cross(u, v), dot(u, v)));
  };
  r.angular_left = angular(left, target.psis_left);
  r.angular_right = angular(right, target.psis_right);
  return r;
}

double
squared_residual(const RigidTransform & t, std::span<const std::pair<Point2, Point2>> pairs)
{
  double sum = 0.0;
  for (const auto & [p, q] : pairs)
  {
    const Point2 e = t.apply(p) - q;
    sum += dot(e, e);
  }
  return sum;
}

std::vector<std::pair<Point2, Point2>>
landmark_pairs(const LandmarkSet & source, const LandmarkSet & target)
{
  return { { source.c7, target.c7 },
           { source.psis_left, target.psis_left },
           { source.psis_right, target.psis_right },
           { source.ic, target.ic } };
}

} // namespace scoliotrack
