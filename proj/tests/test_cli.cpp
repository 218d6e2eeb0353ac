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
#include "scoliotrack/compositing.hpp"
#include "scoliotrack/examstore.hpp"
#include "scoliotrack/json_io.hpp"
#include "scoliotrack/png_io.hpp"

#include "support/stores.hpp"
#include "support/tempdir.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace scoliotrack;
namespace fs = std::filesystem;

namespace {

struct CliRun
{
  int code = -1;
  std::string out;
  std::string err;
};

std::string
slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliRun
cli(const fs::path & scratch, const std::string & args)
{
  const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = std::string("env -u SCOLIOTRACK_STORE '") + SCOLIOTRACK_CLI + "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string
store_arg(const fs::path & root)
{
  return "--store '" + root.string() + "' ";
}

} // namespace

TEST(Cli, UsageErrorsExitFour)
{
  oracle::TempDir dir("cli");
  EXPECT_EQ(cli(dir, "").code, 4);
  EXPECT_EQ(cli(dir, "frobnicate").code, 4);
  EXPECT_EQ(cli(dir, "detect --exam E1").code, 4);
  EXPECT_EQ(cli(dir, "report --patient P1").code, 4); // no store
  EXPECT_EQ(cli(dir, "--help").code, 0);
}

TEST(Cli, GenFixturesIsDeterministic)
{
  oracle::TempDir dir("cli");
  const CliRun a = cli(dir, "gen-fixtures --out '" + (dir.path() / "a").string() + "' --seed 5 --count 1");
  const CliRun b = cli(dir, "gen-fixtures --out '" + (dir.path() / "b").string() + "' --seed 5 --count 1");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  const StoreManifest m = load_store(dir.path() / "a");
  ASSERT_EQ(m.patients.size(), 1u);
  for (const auto & e : m.patients[0].exams)
    for (const auto & [role, rel] : e.files)
      EXPECT_EQ(slurp(dir.path() / "a" / rel), slurp(dir.path() / "b" / rel)) << rel;
  EXPECT_EQ(slurp(dir.path() / "a/manifest.json"), slurp(dir.path() / "b/manifest.json"));
  const RasterImage sfsl = read_png(dir.path() / "a" / m.patients[0].exams[0].files.begin()->second);
  EXPECT_GT(sfsl.width(), 0);
}

TEST(Cli, DetectMatchesGroundTruthAndCaches)
{
  oracle::TempDir dir("cli");
  const fs::path root = dir.path() / "store";
  ASSERT_EQ(cli(dir, "gen-fixtures --out '" + root.string() + "' --seed 21 --count 1").code, 0);
  const StoreManifest m = load_store(root);
  const auto & patient = m.patients[0];
  for (const auto & e : patient.exams)
  {
    const CliRun r = cli(dir, store_arg(root) + "detect --patient " + patient.patient_id + " --exam " + e.exam_id);
    ASSERT_EQ(r.code, 0) << r.err;
    const LandmarkSet got = landmarks_from_json(Json::parse(r.out));
    const LandmarkSet want = landmarks_from_json(read_json_file(exam_directory(root, patient.patient_id, e) / "truth.json"));
    EXPECT_LE(distance(got.c7, want.c7), 2.0) << e.exam_id;
    EXPECT_LE(distance(got.ic, want.ic), 2.0) << e.exam_id;
    EXPECT_LE(distance(got.psis_left, want.psis_left), 2.0) << e.exam_id;
    EXPECT_LE(distance(got.psis_right, want.psis_right), 2.0) << e.exam_id;
    EXPECT_EQ(got.frame, e.exam_id + (e.modality == Modality::Xray ? "/xray" : "/sfsl"));
    EXPECT_TRUE(fs::exists(landmark_cache_path(root, patient.patient_id, e)));
  }

  const auto & first = patient.exams[0];
  const fs::path dbg = dir.path() / "debug";
  const CliRun r =
    cli(dir, store_arg(root) + "detect --patient P001 --exam " + first.exam_id + " --debug-masks '" + dbg.string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(fs::is_empty(dbg));
}

TEST(Cli, CorruptImageExitsTwoAndNamesFile)
{
  oracle::TempDir dir("cli");
  const fs::path root = dir.path() / "store";
  ASSERT_EQ(cli(dir, "gen-fixtures --out '" + root.string() + "' --seed 4 --count 1").code, 0);
  const ExamRecord e = load_store(root).patients[0].exams[0];
  const std::string role = e.modality == Modality::Xray ? "xray" : "sfsl";
  std::ofstream(root / e.files.at(role), std::ios::binary | std::ios::trunc) << "\x89PNG garbage";
  const CliRun r = cli(dir, store_arg(root) + "detect --patient P001 --exam " + e.exam_id);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(fs::path(e.files.at(role)).filename().string()), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("load_image"), std::string::npos) << r.err;
}

TEST(Cli, RegisterRecoversPlantedTransform)
{
  oracle::TempDir dir("cli");
  const fs::path root = dir.path() / "store";
  oracle::make_exact_pair_store(root, 2.5, 2.0);

  const CliRun a = cli(dir, store_arg(root) + "register --patient P1 --source E2 --target E1 --method angle");
  ASSERT_EQ(a.code, 0) << a.err;
  const Json ja = Json::parse(a.out);
  EXPECT_NEAR(ja["transform"]["scale"].get<double>(), 1 / 2.5, 1e-6);
  EXPECT_NEAR(ja["transform"]["angle"].get<double>(), -2.0, 1e-6);
  EXPECT_NEAR(ja["psis_distance_sum"].get<double>(), 0.0, 1e-6);
  EXPECT_TRUE(fs::exists(root / ja["registered_image"].get<std::string>()));

  const CliRun l = cli(dir, store_arg(root) + "register --patient P1 --source E2 --target E1 --method lsq");
  ASSERT_EQ(l.code, 0) << l.err;
  EXPECT_NEAR(Json::parse(l.out)["psis_distance_sum"].get<double>(), 0.0, 1e-6);

  const CliRun same = cli(dir, store_arg(root) + "register --patient P1 --source E1 --target E1");
  ASSERT_EQ(same.code, 0) << same.err;
  const Json js = Json::parse(same.out);
  EXPECT_DOUBLE_EQ(js["transform"]["scale"].get<double>(), 1.0);
  EXPECT_EQ(read_png(root / js["registered_image"].get<std::string>()), read_png(root / "P1/E1/sfsl.png"));

  EXPECT_EQ(cli(dir, store_arg(root) + "register --patient P1 --source E2 --target E1 --method warp").code, 4);
  EXPECT_EQ(cli(dir, store_arg(root) + "register --patient P7 --source E2 --target E1").code, 4);
}

TEST(Cli, DegenerateLandmarksExitThree)
{
  oracle::TempDir dir("cli");
  const fs::path root = dir.path() / "store";
  const auto pair = oracle::make_exact_pair_store(root, 1.0, 0.0);
  LandmarkSet flat = pair.source;
  flat.psis_right = flat.c7;
  write_landmark_cache(root, "P1", load_store(root).patients[0].exams[1], flat);
  EXPECT_EQ(cli(dir, store_arg(root) + "register --patient P1 --source E2 --target E1").code, 3);
}

TEST(Cli, BlendOutputs)
{
  oracle::TempDir dir("cli");
  const fs::path root = dir.path() / "store";
  oracle::make_exact_pair_store(root, 1.1, 0.2);
  const std::string common = store_arg(root) + "blend --patient P1 --target E1 --sources E2 ";

  const fs::path zero = dir.path() / "zero.png";
  const CliRun r0 = cli(dir, common + "--alpha 0 --out '" + zero.string() + "'");
  ASSERT_EQ(r0.code, 0) << r0.err;
  EXPECT_EQ(read_png(zero), read_png(root / "P1/E1/sfsl.png"));

  const fs::path half = dir.path() / "half.png";
  ASSERT_EQ(cli(dir, common + "--alpha 0.5 --out '" + half.string() + "'").code, 0);
  const CliRun reg = cli(dir, store_arg(root) + "register --patient P1 --source E2 --target E1");
  const RasterImage registered = read_png(root / Json::parse(reg.out)["registered_image"].get<std::string>());
  EXPECT_EQ(read_png(half), alpha_blend(registered, read_png(root / "P1/E1/sfsl.png"), 0.5));

  const fs::path marked = dir.path() / "marked.png";
  ASSERT_EQ(cli(dir, common + "--alpha 0.5 --overlay landmarks --out '" + marked.string() + "'").code, 0);
  EXPECT_NE(read_png(marked), read_png(half));

  EXPECT_EQ(cli(dir, common + "--alpha 1.5 --out '" + half.string() + "'").code, 4);
  EXPECT_EQ(cli(dir, common + "--overlay stars --out '" + half.string() + "'").code, 4);
  EXPECT_EQ(cli(dir, store_arg(root) + "blend --patient P1 --target E1 --sources E1 --out x.png").code, 4);
}

TEST(Cli, ReportCountsPairsAndShapes)
{
  oracle::TempDir dir("cli");
  const fs::path root = dir.path() / "store";
  oracle::make_exact_pair_store(root, 1.0, 0.0);
  const CliRun r = cli(dir, store_arg(root) + "report --patient P1");
  ASSERT_EQ(r.code, 0) << r.err;
  const Json doc = Json::parse(r.out);
  EXPECT_EQ(doc["pair_count"], 1);
  EXPECT_EQ(doc["exam_count"], 2);

  const CliRun shapes = cli(dir, store_arg(root) + "report --patient P1 --exam E1");
  ASSERT_EQ(shapes.code, 0) << shapes.err;
  const Json sd = Json::parse(shapes.out);
  ASSERT_FALSE(sd["largest_components"].empty());
  EXPECT_GE(sd["largest_components"][0]["area"].get<int>(), 20);
}
