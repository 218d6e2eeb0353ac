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
#include "scoliotrack/examstore.hpp"

#include "scoliotrack/error.hpp"
#include "scoliotrack/png_io.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <set>

namespace fs = std::filesystem;

namespace scoliotrack {

namespace {

constexpr std::array kIdentifyingKeys{ "name",       "patient_name", "first_name", "last_name", "surname",
                                       "address",    "birth_date",   "birthdate",  "date_of_birth", "dob",
                                       "phone",      "email" };

class FieldPath
{
public:
  explicit FieldPath(std::string origin)
    : origin_(std::move(origin))
  {}

  [[noreturn]] void fail(const std::string & field, const std::string & what) const
  {
    throw StoreError(origin_ + ": " + field + ": " + what);
  }

private:
  std::string origin_;
};

bool
is_leap(int y)
{
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

bool
valid_iso_day(const std::string & s)
{
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    return false;
  for (std::size_t i : { 0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u })
    if (s[i] < '0' || s[i] > '9')
      return false;
  const int y = std::stoi(s.substr(0, 4));
  const int m = std::stoi(s.substr(5, 2));
  const int d = std::stoi(s.substr(8, 2));
  static constexpr int days[] = { 31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31 };
  if (m < 1 || m > 12 || d < 1)
    return false;
  return d <= days[m - 1] + ((m == 2 && is_leap(y)) ? 1 : 0);
}

bool
safe_component(const std::string & s)
{
  return !s.empty() && s != "." && s != ".." && s.find_first_of("/\\") == std::string::npos;
}

bool
safe_relative(const std::string & s)
{
  const fs::path p(s);
  if (s.empty() || p.is_absolute() || p.has_root_name())
    return false;
  return std::none_of(p.begin(), p.end(), [](const fs::path & part) { return part == ".."; });
}

void
reject_identifying(const Json & obj, const FieldPath & where, const std::string & field)
{
  for (const char * key : kIdentifyingKeys)
    if (obj.contains(key))
      where.fail(field + "." + key, "identifying fields are not accepted in the store");
}

Json
unknown_fields(const Json & obj, std::initializer_list<const char *> known)
{
  Json extra = Json::object();
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::none_of(known.begin(), known.end(), [&](const char * k) { return it.key() == k; }))
      extra[it.key()] = it.value();
  return extra;
}

std::vector<std::string>
required_roles(Modality m)
{
  return m == Modality::Rgb ? std::vector<std::string>{ "sfsl", "fd" } : std::vector<std::string>{ "xray" };
}

std::string
get_string(const Json & obj, const char * key, const FieldPath & where, const std::string & field)
{
  if (!obj.contains(key))
    where.fail(field + "." + key, "missing");
  if (!obj[key].is_string())
    where.fail(field + "." + key, "must be a string");
  return obj[key].get<std::string>();
}

Json
fingerprint_json(const FileFingerprint & f)
{
  return Json{ { "size", f.size }, { "mtime_ns", f.mtime_ns } };
}

} // namespace

std::string_view
to_string(Modality m)
{
  return m == Modality::Rgb ? "RGB" : "XRAY";
}

const ExamRecord *
PatientRecord::find_exam(std::string_view exam_id) const
{
  for (const auto & e : exams)
    if (e.exam_id == exam_id)
      return &e;
  return nullptr;
}

const PatientRecord *
StoreManifest::find_patient(std::string_view patient_id) const
{
  for (const auto & p : patients)
    if (p.patient_id == patient_id)
      return &p;
  return nullptr;
}

Json
manifest_to_json(const StoreManifest & manifest)
{
  Json patients = Json::array();
  for (const auto & p : manifest.patients)
  {
    Json exams = Json::array();
    for (const auto & e : p.exams)
    {
      Json files = Json::object();
      for (const auto & [role, path] : e.files)
        files[role] = path;
      Json exam = e.extra.is_object() ? e.extra : Json::object();
      exam["exam_id"] = e.exam_id;
      exam["date"] = e.date;
      exam["modality"] = std::string(to_string(e.modality));
      exam["files"] = std::move(files);
      exams.push_back(std::move(exam));
    }
    Json patient = p.extra.is_object() ? p.extra : Json::object();
    patient["patient_id"] = p.patient_id;
    patient["exams"] = std::move(exams);
    patients.push_back(std::move(patient));
  }
  Json doc = manifest.extra.is_object() ? manifest.extra : Json::object();
  doc["patients"] = std::move(patients);
  return doc;
}

StoreManifest
manifest_from_json(const Json & doc, const fs::path & root)
{
  const FieldPath where(root.empty() ? std::string("manifest") : (root / "manifest.json").string());
  if (!doc.is_object())
    where.fail("<root>", "manifest must be a JSON object");

  StoreManifest manifest;
  manifest.extra = unknown_fields(doc, { "patients" });
  if (!doc.contains("patients"))
    return manifest;
  if (!doc["patients"].is_array())
    where.fail("patients", "must be an array");

  std::set<std::string> patient_ids;
  for (std::size_t i = 0; i < doc["patients"].size(); ++i)
  {
    const Json & pj = doc["patients"][i];
    const std::string pf = "patients[" + std::to_string(i) + "]";
    if (!pj.is_object())
      where.fail(pf, "must be an object");
    reject_identifying(pj, where, pf);

    PatientRecord patient;
    patient.patient_id = get_string(pj, "patient_id", where, pf);
    if (!safe_component(patient.patient_id))
      where.fail(pf + ".patient_id", "must be a non-empty single path component");
    if (!patient_ids.insert(patient.patient_id).second)
      where.fail(pf + ".patient_id", "duplicate patient id '" + patient.patient_id + "'");
    patient.extra = unknown_fields(pj, { "patient_id", "exams" });

    const Json exams = pj.contains("exams") ? pj["exams"] : Json::array();
    if (!exams.is_array())
      where.fail(pf + ".exams", "must be an array");

    std::set<std::string> exam_ids;
    for (std::size_t k = 0; k < exams.size(); ++k)
    {
      const Json & ej = exams[k];
      const std::string ef = pf + ".exams[" + std::to_string(k) + "]";
      if (!ej.is_object())
        where.fail(ef, "must be an object");
      reject_identifying(ej, where, ef);

      ExamRecord exam;
      exam.exam_id = get_string(ej, "exam_id", where, ef);
      if (!safe_component(exam.exam_id))
        where.fail(ef + ".exam_id", "must be a non-empty single path component");
      if (!exam_ids.insert(exam.exam_id).second)
        where.fail(ef + ".exam_id", "duplicate exam id '" + exam.exam_id + "'");

      exam.date = get_string(ej, "date", where, ef);
      if (!valid_iso_day(exam.date))
        where.fail(ef + ".date", "'" + exam.date + "' is not an ISO-8601 day (YYYY-MM-DD)");
      if (!patient.exams.empty() && exam.date < patient.exams.back().date)
        where.fail(ef + ".date", "exam dates must be non-decreasing within a patient");

      const std::string modality = get_string(ej, "modality", where, ef);
      if (modality == "RGB")
        exam.modality = Modality::Rgb;
      else if (modality == "XRAY")
        exam.modality = Modality::Xray;
      else
        where.fail(ef + ".modality", "must be \"RGB\" or \"XRAY\", got '" + modality + "'");

      if (!ej.contains("files") || !ej["files"].is_object())
        where.fail(ef + ".files", "missing or not an object");
      for (auto it = ej["files"].begin(); it != ej["files"].end(); ++it)
      {
        if (!it.value().is_string())
          where.fail(ef + ".files." + it.key(), "must be a string path");
        exam.files[it.key()] = it.value().get<std::string>();
      }
      for (const auto & role : required_roles(exam.modality))
      {
        const auto f = exam.files.find(role);
        if (f == exam.files.end())
          where.fail(ef + ".files." + role, "missing for a " + modality + " exam");
        if (!safe_relative(f->second))
          where.fail(ef + ".files." + role, "path '" + f->second + "' must stay under the store root");
        if (!root.empty() && !fs::exists(root / f->second))
          where.fail(ef + ".files." + role, "image file " + (root / f->second).string() + " does not exist");
      }
      exam.extra = unknown_fields(ej, { "exam_id", "date", "modality", "files" });
      patient.exams.push_back(std::move(exam));
    }
    manifest.patients.push_back(std::move(patient));
  }
  return manifest;
}

StoreManifest
load_store(const fs::path & root)
{
  if (!fs::is_directory(root))
    throw StoreError(root.string() + ": store root is not a directory");
  const fs::path manifest_path = root / "manifest.json";
  if (!fs::exists(manifest_path))
    return {};

  StoreManifest manifest = manifest_from_json(read_json_file(manifest_path), root);
  for (auto & patient : manifest.patients)
  {
    for (auto & exam : patient.exams)
    {
      const fs::path cache = landmark_cache_path(root, patient.patient_id, exam);
      if (!fs::exists(cache))
        continue;
      try
      {
        exam.cached_landmarks = landmarks_from_json(read_json_file(cache));
      }
      catch (const Error &)
      {
        // An unreadable cache is a cache miss; detection will rewrite it.
      }
    }
  }
  return manifest;
}

void
save_manifest(const fs::path & root, const StoreManifest & manifest)
{
  const Json doc = manifest_to_json(manifest);
  manifest_from_json(doc, root); // same validation as on load
  fs::create_directories(root);
  write_json_file(root / "manifest.json", doc);
}

std::vector<std::pair<std::string, std::string>>
registrable_pairs(const PatientRecord & patient)
{
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < patient.exams.size(); ++i)
    for (std::size_t j = i + 1; j < patient.exams.size(); ++j)
      pairs.emplace_back(patient.exams[i].exam_id, patient.exams[j].exam_id);
  return pairs;
}

fs::path
exam_directory(const fs::path & root, const std::string & patient_id, const ExamRecord & exam)
{
  return root / patient_id / exam.exam_id;
}

fs::path
landmark_cache_path(const fs::path & root, const std::string & patient_id, const ExamRecord & exam)
{
  return exam_directory(root, patient_id, exam) / "landmarks.json";
}

FileFingerprint
fingerprint_of(const fs::path & path)
{
  std::error_code ec;
  FileFingerprint f;
  f.size = fs::file_size(path, ec);
  if (ec)
    return {};
  const auto t = fs::last_write_time(path, ec);
  if (ec)
    return {};
  f.mtime_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t.time_since_epoch()).count();
  return f;
}

namespace {

RasterImage
load_role(const fs::path & root, const ExamRecord & exam, const std::string & role)
{
  const auto it = exam.files.find(role);
  if (it == exam.files.end())
    throw DetectionError("load_image", "exam " + exam.exam_id + " has no '" + role + "' image");
  try
  {
    return read_png(root / it->second);
  }
  catch (const ImageIoError & e)
  {
    throw DetectionError("load_image", e.what());
  }
}

} // namespace

LandmarkSet
detect_exam_landmarks(const fs::path & root, const ExamRecord & exam, const DetectionConfig & config,
                      DetectionTrace * trace)
{
  if (exam.modality == Modality::Rgb)
  {
    const RasterImage sfsl = to_rgb(load_role(root, exam, "sfsl"));
    const RasterImage fd = to_rgb(load_role(root, exam, "fd"));
    return detect_sfsl_landmarks(sfsl, fd, config, exam.exam_id + "/sfsl", trace);
  }
  const RasterImage xray = to_rgb(load_role(root, exam, "xray"));
  return detect_xray_landmarks(xray, config, exam.exam_id + "/xray", trace);
}

RasterImage
load_display_image(const fs::path & root, const ExamRecord & exam)
{
  return to_rgb(load_role(root, exam, exam.display_role()));
}

LandmarkCache::LandmarkCache(fs::path root, DetectionConfig config)
  : root_(std::move(root))
  , config_(std::move(config))
{
  detector_ = [this](const fs::path & r, const ExamRecord & exam) { return detect_exam_landmarks(r, exam, config_); };
}

void
LandmarkCache::set_detector(Detector detector)
{
  detector_ = std::move(detector);
}

std::mutex &
LandmarkCache::exam_mutex(const std::string & key)
{
  std::lock_guard lock(table_mutex_);
  auto & slot = exam_mutexes_[key];
  if (!slot)
    slot = std::make_unique<std::mutex>();
  return *slot;
}

std::optional<LandmarkSet>
LandmarkCache::read_fresh(const std::string & patient_id, const ExamRecord & exam) const
{
  const fs::path cache = landmark_cache_path(root_, patient_id, exam);
  if (!fs::exists(cache))
    return std::nullopt;
  try
  {
    const Json doc = read_json_file(cache);
    if (!doc.contains("source_fingerprint"))
      return std::nullopt;
    const Json & recorded = doc["source_fingerprint"];
    for (const auto & [role, rel] : exam.files)
    {
      if (!recorded.contains(role))
        return std::nullopt;
      const FileFingerprint now = fingerprint_of(root_ / rel);
      if (recorded[role] != fingerprint_json(now))
        return std::nullopt;
    }
    return landmarks_from_json(doc);
  }
  catch (const Error &)
  {
    return std::nullopt;
  }
  catch (const Json::exception &)
  {
    return std::nullopt;
  }
}

LandmarkSet
LandmarkCache::get_or_detect(const std::string & patient_id, const ExamRecord & exam)
{
  std::lock_guard lock(exam_mutex(patient_id + "/" + exam.exam_id));
  if (auto cached = read_fresh(patient_id, exam))
    return *std::move(cached);

  // Fingerprints are taken before detection so an image rewritten mid-run reads as stale next time.
  Json fingerprints = Json::object();
  for (const auto & [role, rel] : exam.files)
    fingerprints[role] = fingerprint_json(fingerprint_of(root_ / rel));

  LandmarkSet set;
  try
  {
    ++detections_;
    set = detector_(root_, exam);
  }
  catch (const DetectionError & e)
  {
    std::string detail = e.what();
    if (detail.rfind(e.stage() + ": ", 0) == 0)
      detail.erase(0, e.stage().size() + 2);
    throw DetectionError(e.stage(), "exam " + patient_id + "/" + exam.exam_id + ": " + detail);
  }

  Json doc = landmarks_to_json(set);
  doc["source_fingerprint"] = std::move(fingerprints);
  const fs::path cache = landmark_cache_path(root_, patient_id, exam);
  fs::create_directories(cache.parent_path());
  write_json_file(cache, doc);
  return set;
}

std::string
LandmarkCache::landmark_fingerprint(const std::string & patient_id, const ExamRecord & exam) const
{
  const fs::path cache = landmark_cache_path(root_, patient_id, exam);
  if (!read_fresh(patient_id, exam))
    return {};
  const Json doc = read_json_file(cache);
  return std::to_string(std::hash<std::string>{}(doc.dump()));
}

void
write_landmark_cache(const fs::path & root, const std::string & patient_id, const ExamRecord & exam,
                     const LandmarkSet & set)
{
  Json fingerprints = Json::object();
  for (const auto & [role, rel] : exam.files)
    fingerprints[role] = fingerprint_json(fingerprint_of(root / rel));
  Json doc = landmarks_to_json(set);
  doc["source_fingerprint"] = std::move(fingerprints);
  const fs::path cache = landmark_cache_path(root, patient_id, exam);
  fs::create_directories(cache.parent_path());
  write_json_file(cache, doc);
}

LandmarkSet
get_or_detect_landmarks(const fs::path & root, const std::string & patient_id, const ExamRecord & exam,
                        const DetectionConfig & config)
{
  LandmarkCache cache(root, config);
  return cache.get_or_detect(patient_id, exam);
}

} // namespace scoliotrack
