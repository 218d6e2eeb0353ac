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
// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "scoliotrack/compositing.hpp"
#include "scoliotrack/examstore.hpp"
#include "scoliotrack/fixtures.hpp"
#include "scoliotrack/landmarks.hpp"
#include "scoliotrack/pipeline.hpp"
#include "scoliotrack/png_io.hpp"
#include "scoliotrack/registration.hpp"
#include "scoliotrack/segmentation.hpp"

#include "support/oracles.hpp"
#include "support/tempdir.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace scoliotrack;

namespace {

constexpr double pi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double
seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void
report(bool ok, const std::string & name, const std::string & detail)
{
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok)
    ++failures;
}

std::string
fmt(double v)
{
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

/// Worst relative error of pairwise distances against uniform scaling, and of det against scale^2.
struct TopologyCheck
{
  std::mt19937_64 rng{ 4242 };
  double worst_distance = 0.0;
  double worst_det = 0.0;
  int transforms = 0;

  void operator()(const RigidTransform & t)
  {
    std::uniform_real_distribution<> coord(-500, 1000);
    std::vector<Point2> cloud, mapped;
    for (int i = 0; i < 10; ++i)
    {
      cloud.push_back({ coord(rng), coord(rng) });
      mapped.push_back(t.apply(cloud.back()));
    }
    const auto before = oracle::pairwise_distances(cloud);
    const auto after = oracle::pairwise_distances(mapped);
    for (std::size_t k = 0; k < before.size(); ++k)
      worst_distance = std::max(worst_distance, std::abs(after[k] / (t.scale * before[k]) - 1.0));
    worst_det = std::max(worst_det, std::abs(t.determinant() / (t.scale * t.scale) - 1.0));
    ++transforms;
  }
};

void
exact_recovery(TopologyCheck & topo)
{
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<> sigma(0.25, 4.0), phi(-pi, pi), shift(-80, 80);
  double worst_scale = 0.0, worst_angle = 0.0;
  int thrown = 0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 1000; ++i)
  {
    const LandmarkSet target = oracle::random_landmarks(rng);
    const double s = sigma(rng);
    double a = phi(rng);
    if (a == -pi)
      a = 0.0;
    const LandmarkSet source = oracle::similarity_image(target, s, a, target.c7, { shift(rng), shift(rng) });
    try
    {
      const RegistrationReport r = estimate_rigid(source, target);
      worst_scale = std::max(worst_scale, std::abs(r.transform.scale * s - 1.0));
      worst_angle = std::max(worst_angle, std::abs(oracle::wrap(r.transform.angle + a)));
      topo(r.transform);
    }
    catch (const std::exception &)
    {
      ++thrown;
    }
  }
  const double elapsed = seconds_since(t0);
  report(thrown == 0 && worst_scale <= 1e-9 && worst_angle <= 1e-9 && elapsed <= 5.0, "exact-recovery",
         "1000 sets, max scale err " + fmt(worst_scale) + ", max angle err " + fmt(worst_angle) + " rad, " +
           fmt(elapsed) + " s, " + std::to_string(thrown) + " errors");
}

void
bisector_oracle(TopologyCheck & topo)
{
  std::mt19937_64 rng(777);
  double worst = 0.0;
  int thrown = 0;
  const auto t0 = Clock::now();
  for (int i = 0; i < 200; ++i)
  {
    const LandmarkSet source = oracle::random_landmarks(rng);
    const double spin = std::uniform_real_distribution<>(-pi, pi)(rng);
    const LandmarkSet target = oracle::similarity_image(oracle::random_landmarks(rng), 1.0, spin, { 250, 300 }, {});
    try
    {
      const RegistrationReport r = estimate_rigid(source, target);
      const double grid = oracle::grid_minimax_angle(source, target, 1e-5);
      // Compare the achieved minimax cost, then the argument itself.
      const auto [el, er] = oracle::angular_errors(source, target, r.transform.angle);
      const auto [gl, gr] = oracle::angular_errors(source, target, grid);
      const double cost_gap = std::max(std::abs(el), std::abs(er)) - std::max(std::abs(gl), std::abs(gr));
      worst = std::max({ worst, std::abs(oracle::wrap(r.transform.angle - grid)), cost_gap });
      topo(r.transform);
    }
    catch (const std::exception &)
    {
      ++thrown;
    }
  }
  const double elapsed = seconds_since(t0);
  report(thrown == 0 && worst <= 1e-4 && elapsed <= 60.0, "bisector-oracle",
         "200 pairs, max |closed - grid| " + fmt(worst) + " rad, " + fmt(elapsed) + " s");
}

void
lsae_correctness()
{
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<> coord(-300, 300), sc(0.25, 4), ang(-pi, pi);
  double worst_exact = 0.0;
  for (int i = 0; i < 200; ++i)
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
    worst_exact = std::max({ worst_exact, std::abs(t.scale / s - 1.0), std::abs(oracle::wrap(t.angle - a)) });
  }

  std::normal_distribution<> noise(0.0, 4.0);
  int beaten = 0;
  for (int i = 0; i < 50; ++i)
  {
    const LandmarkSet t = oracle::random_landmarks(rng);
    LandmarkSet s = oracle::similarity_image(t, sc(rng), ang(rng), t.c7, { coord(rng), coord(rng) });
    for (Point2 * p : { &s.c7, &s.psis_left, &s.psis_right, &s.ic })
    {
      p->x += noise(rng);
      p->y += noise(rng);
    }
    const auto pairs = landmark_pairs(s, t);
    const RigidTransform est = estimate_similarity_lsq(pairs);
    const double closed = oracle::squared_residual(est.scale, est.angle, est.pivot, est.anchor, pairs);
    const double grid = oracle::grid_min_residual(est.scale, est.angle, est.pivot, est.anchor, pairs, 1e-3, 1e-3, 0.05);
    if (closed > grid * (1 + 1e-12))
      ++beaten;
  }
  report(worst_exact <= 1e-9 && beaten == 0, "lsae-correctness",
         "noiseless max err " + fmt(worst_exact) + ", " + std::to_string(beaten) + "/50 noisy instances beaten by grid");
}

void
end_to_end_detection()
{
  int ok = 0, total = 0, bad_dims = 0;
  double worst = 0.0;
  std::string first_failure;
  auto score = [&](const LandmarkSet & got, const LandmarkSet & want) {
    return std::max({ distance(got.c7, want.c7), distance(got.ic, want.ic), distance(got.psis_left, want.psis_left),
                      distance(got.psis_right, want.psis_right) });
  };
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
  {
    ++total;
    const auto fx = fixtures::make_rgb_fixture(seed * 1009);
    if (fx.sfsl.width() != 494 || fx.sfsl.height() != 755 || fx.fd.width() != 494 || fx.fd.height() != 678)
      ++bad_dims;
    try
    {
      const double err = score(detect_sfsl_landmarks(fx.sfsl, fx.fd), fx.truth);
      worst = std::max(worst, err);
      ok += err <= 2.0;
    }
    catch (const std::exception & e)
    {
      if (first_failure.empty())
        first_failure = e.what();
    }
  }
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
  {
    ++total;
    const auto fx = fixtures::make_xray_fixture(seed * 7919);
    try
    {
      const double err = score(detect_xray_landmarks(fx.xray), fx.truth);
      worst = std::max(worst, err);
      ok += err <= 2.0;
    }
    catch (const std::exception & e)
    {
      if (first_failure.empty())
        first_failure = e.what();
    }
  }
  report(ok == total && bad_dims == 0, "end-to-end-detection",
         std::to_string(ok) + "/" + std::to_string(total) + " exams within 2 px (20 RGB, 10 X-ray), worst " +
           fmt(worst) + " px" + (first_failure.empty() ? "" : ", first error: " + first_failure));
}

RasterImage
random_image(std::mt19937_64 & rng, int w, int h)
{
  RasterImage img(w, h, PixelFormat::Rgb8);
  std::uniform_int_distribution<int> v(0, 255);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(x, y, c) = static_cast<std::uint8_t>(v(rng));
  return img;
}

void
blending_identities()
{
  std::mt19937_64 rng(99);
  bool ends = true;
  int worst_sym = 0;
  for (int i = 0; i < 20; ++i)
  {
    const RasterImage s = random_image(rng, 37, 23), t = random_image(rng, 37, 23);
    ends = ends && alpha_blend(s, t, 0.0) == t && alpha_blend(s, t, 1.0) == s;
    const double a = std::uniform_real_distribution<>(0, 1)(rng);
    const RasterImage ab = alpha_blend(s, t, a), ba = alpha_blend(t, s, 1 - a);
    for (int y = 0; y < 23; ++y)
      for (int x = 0; x < 37; ++x)
        for (int c = 0; c < 3; ++c)
          worst_sym = std::max(worst_sym, std::abs(int(ab.at(x, y, c)) - int(ba.at(x, y, c))));
  }
  RasterImage lo(1, 1, PixelFormat::Gray8), hi(1, 1, PixelFormat::Gray8);
  lo.at(0, 0) = 100;
  hi.at(0, 0) = 200;
  const int mid = alpha_blend(lo, hi, 0.5).at(0, 0);
  report(ends && mid == 150 && worst_sym <= 1, "blending-identities",
         std::string("alpha 0/1 exact: ") + (ends ? "yes" : "no") + ", blend(100,200,0.5)=" + std::to_string(mid) +
           ", max symmetry diff " + std::to_string(worst_sym));
}

void
threshold_fidelity()
{
  struct Case
  {
    const char * name;
    const ThresholdBand * band;
    ColorTriple lo, hi;
  };
  const Case cases[] = {
    { "sfsl_spine", &bands::sfsl_spine, hsv(12, 130, 195), hsv(180, 255, 230) },
    { "fd_vertical_line", &bands::fd_vertical_line, hsv(97, 141, 225), hsv(97, 141, 225) },
    { "xray_landmark", &bands::xray_landmark, rgb(255, 0, 0), rgb(255, 0, 0) },
  };
  int probes = 0, wrong = 0;
  std::string detail;
  std::uint8_t ColorTriple::*channels[] = { &ColorTriple::c0, &ColorTriple::c1, &ColorTriple::c2 };
  for (const auto & c : cases)
  {
    auto probe = [&](ColorTriple v, bool expect) {
      ++probes;
      bool got = band_contains(*c.band, v);
      if (c.band->space == ColorSpace::Rgb)
      {
        RasterImage px(1, 1, PixelFormat::Rgb8, { v.c0, v.c1, v.c2 });
        got = got && band_threshold(px, *c.band).get(0, 0);
      }
      if (got != expect)
      {
        ++wrong;
        if (detail.empty())
          detail = std::string(" first miss in ") + c.name;
      }
    };
    if (!(c.band->lower == c.lo && c.band->upper == c.hi))
    {
      ++wrong;
      detail = std::string(" ") + c.name + " bounds differ from the calibrated table";
    }
    probe(c.lo, true);
    probe(c.hi, true);
    for (auto ch : channels)
    {
      if (c.lo.*ch > 0)
      {
        ColorTriple v = c.lo;
        --(v.*ch);
        probe(v, false);
      }
      if (c.hi.*ch < 255)
      {
        ColorTriple v = c.hi;
        ++(v.*ch);
        probe(v, false);
      }
    }
  }
  // The exact FD line colour, as an RGB pixel, must land in its HSV band.
  RasterImage line(1, 1, PixelFormat::Rgb8, { 101, 196, 225 });
  ++probes;
  if (!band_threshold(line, bands::fd_vertical_line).get(0, 0))
    ++wrong;
  report(wrong == 0, "threshold-fidelity",
         std::to_string(probes - wrong) + "/" + std::to_string(probes) + " probes classified as expected" + detail);
}

void
performance_budget()
{
  oracle::TempDir dir("accept");
  const auto a = fixtures::make_rgb_fixture(501);
  const auto b = fixtures::make_rgb_fixture(502, 501);
  StoreManifest m;
  PatientRecord p;
  p.patient_id = "P1";
  const std::pair<const char *, const fixtures::RgbFixture *> exams[] = { { "E1", &a }, { "E2", &b } };
  for (const auto & [id, fx] : exams)
  {
    std::filesystem::create_directories(dir.path() / "P1" / id);
    ExamRecord e;
    e.exam_id = id;
    e.date = id[1] == '1' ? "2020-03-01" : "2020-09-01";
    e.modality = Modality::Rgb;
    e.files = { { "sfsl", std::string("P1/") + id + "/sfsl.png" }, { "fd", std::string("P1/") + id + "/fd.png" } };
    write_png(dir.path() / e.files["sfsl"], fx->sfsl);
    write_png(dir.path() / e.files["fd"], fx->fd);
    p.exams.push_back(e);
  }
  m.patients.push_back(p);
  save_manifest(dir.path(), m);

  // Timed: read PNGs, detect both exams, register, blend, encode.
  const auto t0 = Clock::now();
  bool ok = true;
  try
  {
    FollowupEngine engine(dir.path(), load_store(dir.path()));
    const RasterImage out = engine.blend("P1", "E2", { "E1" }, 0.5, true);
    write_png(dir.path() / "followup.png", out);
    ok = engine.registrations_run() == 1;
  }
  catch (const std::exception & e)
  {
    std::printf("  error: %s\n", e.what());
    ok = false;
  }
  const double elapsed = seconds_since(t0);
  report(ok && elapsed < 2.0, "performance-budget", "register-and-blend from PNGs in " + fmt(elapsed) + " s");
}

void
pair_enumeration()
{
  auto count = [](int n) {
    PatientRecord p;
    p.patient_id = "P";
    for (int i = 0; i < n; ++i)
    {
      ExamRecord e;
      e.exam_id = "E" + std::to_string(i);
      p.exams.push_back(e);
    }
    return registrable_pairs(p).size();
  };
  const std::size_t four = count(4), sixteen = count(16);
  report(four == 6 && sixteen == 120, "pair-enumeration",
         "N=4 -> " + std::to_string(four) + ", N=16 -> " + std::to_string(sixteen));
}

} // namespace

int
main()
{
  TopologyCheck topo;
  exact_recovery(topo);
  bisector_oracle(topo);
  report(topo.transforms == 1200 && topo.worst_distance <= 1e-9 && topo.worst_det <= 1e-9, "topology-preservation",
         std::to_string(topo.transforms) + " transforms, max distance ratio err " + fmt(topo.worst_distance) +
           ", max det err " + fmt(topo.worst_det));
  lsae_correctness();
  end_to_end_detection();
  blending_identities();
  threshold_fidelity();
  performance_budget();
  pair_enumeration();
  std::printf("%s\n", failures == 0 ? "ALL PASS" : (std::to_string(failures) + " FAILED").c_str());
  return failures == 0 ? 0 : 1;
}
