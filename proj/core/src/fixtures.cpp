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
#include "scoliotrack/fixtures.hpp"

#include "scoliotrack/error.hpp"
#include "scoliotrack/json_io.hpp"
#include "scoliotrack/png_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace fs = std::filesystem;

namespace scoliotrack::fixtures {

Rng::Rng(std::uint64_t seed)
  : engine_(seed)
{}

std::uint64_t
Rng::next()
{
  return engine_();
}

int
Rng::uniform_int(int lo, int hi)
{
  const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo + 1);
  return lo + static_cast<int>(next() % span);
}

double
Rng::uniform(double lo, double hi)
{
  const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::uint64_t
derive_seed(std::uint64_t seed, std::uint64_t index)
{
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

void
put(RasterImage & img, int x, int y, ColorTriple c)
{
  if (!img.contains(x, y))
    return;
  img.at(x, y, 0) = c.c0;
  img.at(x, y, 1) = c.c1;
  img.at(x, y, 2) = c.c2;
}

void
disc(RasterImage & img, PixelCoord c, int r, ColorTriple color)
{
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (dx * dx + dy * dy <= r * r)
        put(img, c.x + dx, c.y + dy, color);
}

void
plus_dot(RasterImage & img, PixelCoord c, ColorTriple color)
{
  put(img, c.x, c.y, color);
  put(img, c.x - 1, c.y, color);
  put(img, c.x + 1, c.y, color);
  put(img, c.x, c.y - 1, color);
  put(img, c.x, c.y + 1, color);
}

void
segment(RasterImage & img, Point2 a, Point2 b, ColorTriple color)
{
  const int n = std::max(1, static_cast<int>(std::ceil(distance(a, b))));
  for (int i = 0; i <= n; ++i)
  {
    const double u = static_cast<double>(i) / n;
    const PixelCoord p = round_to_pixel(a + (b - a) * u);
    put(img, p.x, p.y, color);
  }
}

std::uint8_t
clamp8(double v)
{
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

double
smooth(double a, double b, double u)
{
  const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * std::clamp(u, 0.0, 1.0));
  return a + (b - a) * w;
}

// Half-width of the back as a fraction of the shoulder half-width, t running
// from the top (0) to the bottom (1) of the silhouette. Never exceeds 1, and
// reaches 1 on the shoulder plateau, so the box width is exact.
double
profile(double t, double waist, double hips)
{
  if (t < 0.04)
    return smooth(0.35, 1.0, t / 0.04);
  if (t <= 0.25)
    return 1.0;
  if (t <= 0.55)
    return smooth(1.0, waist, (t - 0.25) / 0.30);
  if (t <= 0.85)
    return smooth(waist, hips, (t - 0.55) / 0.30);
  return smooth(hips, hips - 0.06, (t - 0.85) / 0.15);
}

struct Silhouette
{
  int left = 0;   // bbox min x
  int top = 0;    // bbox min y
  int width = 0;  // even; bbox spans width + 1 columns
  int height = 0; // rows
  double waist = 0.8;
  double hips = 0.9;

  int center_x() const { return left + width / 2; }
  int bottom() const { return top + height - 1; }
  double t_of(int y) const { return static_cast<double>(y - top) / (height - 1); }
  int y_of(double t) const { return top + static_cast<int>(std::lround(t * (height - 1))); }
  int half_width(int y) const
  {
    return static_cast<int>(std::floor(profile(t_of(y), waist, hips) * (width / 2) + 1e-9));
  }
};

void
paint_skin(RasterImage & img, const Silhouette & s, Rng & rng)
{
  for (int y = s.top; y <= s.bottom(); ++y)
  {
    const int hw = s.half_width(y);
    for (int x = s.center_x() - hw; x <= s.center_x() + hw; ++x)
    {
      // Darker towards the flanks, a little grain everywhere.
      const double edge = std::abs(x - s.center_x()) / static_cast<double>(std::max(hw, 1));
      const double shade = 1.0 - 0.18 * edge * edge;
      put(img, x, y,
          rgb(clamp8(205 * shade + rng.uniform_int(-5, 5)), clamp8(160 * shade + rng.uniform_int(-5, 5)),
              clamp8(135 * shade + rng.uniform_int(-5, 5))));
    }
  }
}

struct Body
{
  int height = 640;
  int top = 60;
  int width = 290;
  int left = 102;
  double waist = 0.8;
  double hips = 0.9;
  double curve_amplitude = 0.0;
  double curve_cycles = 1.0;
  double fd_ratio = 0.9;
};

Body
make_body(std::uint64_t seed)
{
  Rng rng(seed);
  Body b;
  b.height = rng.uniform_int(610, 670);
  b.top = rng.uniform_int(40, kSfslHeight - b.height - 40);
  b.width = 2 * rng.uniform_int(130, 160);
  b.left = (kSfslWidth - b.width) / 2 + rng.uniform_int(-20, 20);
  b.waist = rng.uniform(0.74, 0.84);
  b.hips = rng.uniform(0.86, 0.95);
  b.curve_amplitude = rng.uniform(-18.0, 18.0);
  b.curve_cycles = rng.uniform(0.6, 1.4);
  b.fd_ratio = rng.uniform(0.86, 0.92);
  return b;
}

} // namespace

RgbFixture
make_rgb_fixture(std::uint64_t seed, std::uint64_t body_seed)
{
  Rng rng(derive_seed(seed, 0x5f5));
  const Body body = make_body(body_seed != 0 ? body_seed : derive_seed(seed, 0xb0d));

  // Same back, slightly different framing per exam.
  Silhouette s;
  s.height = body.height + rng.uniform_int(-10, 10);
  s.top = std::clamp(body.top + rng.uniform_int(-8, 8), 10, kSfslHeight - s.height - 10);
  s.width = body.width;
  s.left = std::clamp(body.left + rng.uniform_int(-8, 8), 10, kSfslWidth - s.width - 11);
  s.waist = body.waist;
  s.hips = body.hips;

  RgbFixture fx{ RasterImage(kSfslWidth, kSfslHeight, PixelFormat::Rgb8),
                 RasterImage(kFdWidth, kFdHeight, PixelFormat::Rgb8),
                 {} };
  paint_skin(fx.sfsl, s, rng);

  // Landmarks.
  LandmarkSet & truth = fx.truth;
  truth.frame = "sfsl";
  const PixelCoord c7{ s.center_x() + rng.uniform_int(-3, 3), s.y_of(rng.uniform(0.08, 0.12)) };
  const PixelCoord ic{ s.center_x() + rng.uniform_int(-6, 6), s.y_of(rng.uniform(0.86, 0.91)) };
  const int psis_y = s.y_of(rng.uniform(0.70, 0.75));
  const int base_x = (c7.x + ic.x) / 2;
  const PixelCoord psis_l{ base_x - static_cast<int>(std::lround(s.width * rng.uniform(0.12, 0.16))),
                           psis_y + rng.uniform_int(-4, 4) };
  const PixelCoord psis_r{ base_x + static_cast<int>(std::lround(s.width * rng.uniform(0.12, 0.16))),
                           psis_y + rng.uniform_int(-4, 4) };

  std::vector<PixelCoord> dots;
  const double amp = body.curve_amplitude + rng.uniform(-3.0, 3.0);
  for (int y = c7.y; y < ic.y - 3; y += 7)
  {
    const double u = static_cast<double>(y - c7.y) / (ic.y - c7.y);
    const double x = c7.x + (ic.x - c7.x) * u + amp * std::sin(std::numbers::pi * body.curve_cycles * u);
    dots.push_back({ static_cast<int>(std::lround(x)), y });
  }
  dots.push_back(ic);

  // Physician's own PSIS ticks: off-band navy, ignored by detection.
  disc(fx.sfsl, psis_l, 3, rgb(40, 40, 160));
  disc(fx.sfsl, psis_r, 3, rgb(40, 40, 160));
  for (const auto d : dots)
    plus_dot(fx.sfsl, d, kSpineDot);

  truth.c7 = to_point(c7);
  truth.ic = to_point(ic);
  truth.psis_left = to_point(psis_l);
  truth.psis_right = to_point(psis_r);
  for (const auto d : dots)
    truth.spine.push_back(to_point(d));

  // FD: the same back, smaller.
  Silhouette f;
  f.height = static_cast<int>(std::lround((s.height - 1) * body.fd_ratio)) + 1;
  const double scale = static_cast<double>(s.height - 1) / (f.height - 1); // FD -> SFSL
  f.width = 2 * static_cast<int>(std::lround(s.width / scale / 2.0));
  f.top = rng.uniform_int(15, kFdHeight - f.height - 15);
  f.left = std::clamp((kFdWidth - f.width) / 2 + rng.uniform_int(-30, 30), 40, kFdWidth - f.width - 40);
  f.waist = s.waist;
  f.hips = s.hips;
  paint_skin(fx.fd, f, rng);

  const auto to_fd = [&](Point2 p) {
    return Point2{ f.left + (p.x - s.left) / scale, f.top + (p.y - s.top) / scale };
  };

  // Numeric annotations: red, no blue, some on the back, some in the margin.
  const int blocks = rng.uniform_int(3, 5);
  for (int i = 0; i < blocks; ++i)
  {
    const bool margin = (i % 2 == 1);
    const int bw = rng.uniform_int(12, 24);
    const int bh = rng.uniform_int(6, 10);
    int x0, y0;
    if (margin)
    {
      x0 = rng.uniform_int(2, f.left - bw - 8);
      y0 = rng.uniform_int(5, kFdHeight - bh - 5);
    }
    else
    {
      x0 = f.center_x() + rng.uniform_int(12, 40) * (rng.uniform_int(0, 1) ? 1 : -1) - bw / 2;
      y0 = f.y_of(rng.uniform(0.30, 0.55));
    }
    for (int y = y0; y < y0 + bh; ++y)
      for (int x = x0; x < x0 + bw; ++x)
        if ((x + y) % 3 != 0)
          put(fx.fd, x, y, kFdScript);
  }

  for (std::size_t i = 0; i + 1 < dots.size(); ++i)
    segment(fx.fd, to_fd(to_point(dots[i])), to_fd(to_point(dots[i + 1])), rgb(200, 0, 0));

  const int line_x = f.center_x();
  for (int y = 0; y < kFdHeight; ++y)
    put(fx.fd, line_x, y, kFdLine);

  disc(fx.fd, round_to_pixel(to_fd(truth.psis_left)), 4, kFdMarker);
  disc(fx.fd, round_to_pixel(to_fd(truth.psis_right)), 4, kFdMarker);
  return fx;
}

XrayFixture
make_xray_fixture(std::uint64_t seed, std::uint64_t body_seed)
{
  Rng rng(derive_seed(seed, 0x7a7));
  Rng body_rng(body_seed != 0 ? body_seed : derive_seed(seed, 0xb0d));
  const int w = body_rng.uniform_int(kXrayWidthMin, kXrayWidthMax);
  const int h = body_rng.uniform_int(kXrayHeightMin, kXrayHeightMax);
  const double curve = body_rng.uniform(-40.0, 40.0);

  XrayFixture fx{ RasterImage(w, h, PixelFormat::Rgb8), {} };
  RasterImage & img = fx.xray;

  const double cx = w / 2.0 + rng.uniform(-20.0, 20.0);
  const double body_half = w * rng.uniform(0.30, 0.36);
  auto spine_x = [&](double y) { return cx + curve * std::sin(std::numbers::pi * y / h); };
  for (int y = 0; y < h; ++y)
  {
    const double sx = spine_x(y);
    const bool vertebra_gap = (y / 40) % 2 == 0 && y % 40 < 6;
    for (int x = 0; x < w; ++x)
    {
      double v = 25.0;
      const double d = std::abs(x - cx) / body_half;
      if (d < 1.0)
        v += 70.0 * std::sqrt(1.0 - d * d);
      if (std::abs(x - sx) < 28.0 && !vertebra_gap)
        v += 90.0;
      v += rng.uniform_int(-6, 6);
      const std::uint8_t g = clamp8(v);
      img.at(x, y, 0) = g;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = g;
    }
  }

  LandmarkSet & truth = fx.truth;
  truth.frame = "xray";
  const auto at_row = [&](double frac, int jitter) {
    const int y = static_cast<int>(std::lround(h * frac)) + rng.uniform_int(-jitter, jitter);
    return PixelCoord{ static_cast<int>(std::lround(spine_x(y))) + rng.uniform_int(-6, 6), y };
  };
  const PixelCoord c7 = at_row(0.12, 20);
  const PixelCoord ic = at_row(0.78, 20);
  const int psis_y = static_cast<int>(std::lround(h * 0.66));
  const int spread_l = static_cast<int>(std::lround(w * rng.uniform(0.08, 0.12)));
  const int spread_r = static_cast<int>(std::lround(w * rng.uniform(0.08, 0.12)));
  const int mid_x = static_cast<int>(std::lround(spine_x(psis_y)));
  const PixelCoord psis_l{ mid_x - spread_l, psis_y + rng.uniform_int(-15, 15) };
  const PixelCoord psis_r{ mid_x + spread_r, psis_y + rng.uniform_int(-15, 15) };

  const PixelCoord marks[] = { c7, psis_l, psis_r, ic };
  for (const auto m : marks)
    disc(img, m, rng.uniform_int(12, 16), kXrayMark);

  // Stray red specks, far from the marks and far smaller.
  const int specks = rng.uniform_int(5, 15);
  for (int i = 0; i < specks; ++i)
  {
    const PixelCoord p{ rng.uniform_int(2, w - 3), rng.uniform_int(2, h - 3) };
    if (std::any_of(std::begin(marks), std::end(marks),
                    [&](PixelCoord m) { return std::abs(m.x - p.x) < 40 && std::abs(m.y - p.y) < 40; }))
      continue;
    const int n = rng.uniform_int(1, 6);
    for (int k = 0; k < n; ++k)
      put(img, p.x + k % 3, p.y + k / 3, kXrayMark);
  }

  truth.c7 = to_point(c7);
  truth.psis_left = to_point(psis_l);
  truth.psis_right = to_point(psis_r);
  truth.ic = to_point(ic);
  return fx;
}

namespace {

// Proleptic Gregorian date from days since 1970-01-01.
std::string
iso_day(long days)
{
  days += 719468;
  const long era = (days >= 0 ? days : days - 146096) / 146097;
  const long doe = days - era * 146097;
  const long yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const long mp = (5 * doy + 2) / 153;
  const long d = doy - (153 * mp + 2) / 5 + 1;
  const long m = mp < 10 ? mp + 3 : mp - 9;
  const long y = yoe + era * 400 + (m <= 2 ? 1 : 0);
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04ld-%02ld-%02ld", y, m, d);
  return buf;
}

std::string
numbered(const char * prefix, int n, int digits)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, digits, n);
  return buf;
}

} // namespace

StoreManifest
generate_fixture_store(const fs::path & out, std::uint64_t seed, int patient_count)
{
  if (patient_count < 0)
    throw InvalidArgument("patient count must be non-negative");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out))
    throw StoreError(out.string() + ": cannot create store directory" + (ec ? ": " + ec.message() : ""));

  StoreManifest manifest;
  manifest.extra = Json{ { "generator", { { "tool", "scoliotrack gen-fixtures" }, { "seed", seed } } } };

  for (int p = 0; p < patient_count; ++p)
  {
    const std::uint64_t patient_seed = derive_seed(seed, static_cast<std::uint64_t>(p));
    Rng rng(patient_seed);
    PatientRecord patient;
    patient.patient_id = numbered("P", p + 1, 3);

    const int n_rgb = rng.uniform_int(2, 4);
    const int n_xray = rng.uniform_int(1, 2);
    std::vector<Modality> order(static_cast<std::size_t>(n_rgb), Modality::Rgb);
    order.insert(order.end(), static_cast<std::size_t>(n_xray), Modality::Xray);
    for (std::size_t i = order.size() - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i)))]);

    long day = 16436 + rng.uniform_int(0, 1500); // from 2015-01-01
    for (std::size_t e = 0; e < order.size(); ++e)
    {
      ExamRecord exam;
      exam.exam_id = numbered("E", static_cast<int>(e) + 1, 2);
      exam.date = iso_day(day);
      exam.modality = order[e];
      day += rng.uniform_int(30, 200);

      const fs::path rel = fs::path(patient.patient_id) / exam.exam_id;
      fs::create_directories(out / rel, ec);
      if (ec)
        throw StoreError((out / rel).string() + ": " + ec.message());

      const std::uint64_t exam_seed = derive_seed(patient_seed, 100 + e);
      LandmarkSet truth;
      if (exam.modality == Modality::Rgb)
      {
        auto fx = make_rgb_fixture(exam_seed, patient_seed);
        exam.files["sfsl"] = (rel / "sfsl.png").generic_string();
        exam.files["fd"] = (rel / "fd.png").generic_string();
        write_png(out / exam.files["sfsl"], fx.sfsl);
        write_png(out / exam.files["fd"], fx.fd);
        truth = std::move(fx.truth);
      }
      else
      {
        auto fx = make_xray_fixture(exam_seed, patient_seed);
        exam.files["xray"] = (rel / "xray.png").generic_string();
        write_png(out / exam.files["xray"], fx.xray);
        truth = std::move(fx.truth);
      }
      truth.frame = exam.exam_id + "/" + exam.display_role();
      write_json_file(out / rel / "truth.json", landmarks_to_json(truth));
      patient.exams.push_back(std::move(exam));
    }
    manifest.patients.push_back(std::move(patient));
  }
  save_manifest(out, manifest);
  return manifest;
}

} // namespace scoliotrack::fixtures
