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

#include "scoliotrack/image.hpp"
#include "scoliotrack/json_io.hpp"
#include "scoliotrack/landmarks.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace scoliotrack {

// On-disk layout:
//
//   <root>/manifest.json
//   <root>/<patient_id>/<exam_id>/sfsl.png, fd.png      (RGB exams)
//   <root>/<patient_id>/<exam_id>/xray.png              (XRAY exams)
//   <root>/<patient_id>/<exam_id>/landmarks.json        (detection cache)
//
// manifest.json:
//   {"patients": [{"patient_id": "...",
//                  "exams": [{"exam_id": "...", "date": "YYYY-MM-DD", "modality": "RGB"|"XRAY",
//                             "files": {"sfsl": "P1/E1/sfsl.png", "fd": "..."} }]}]}
//
// File paths are relative to the root. Keys the schema does not know are kept
// and written back untouched, except identifying ones (names, addresses,
// birth dates), which are refused.

enum class Modality
{
  Rgb,
  Xray
};

std::string_view to_string(Modality m);

struct ExamRecord
{
  std::string exam_id;
  std::string date; ///< ISO-8601 day
  Modality modality = Modality::Rgb;
  std::map<std::string, std::string> files; ///< role ("sfsl", "fd", "xray") -> path relative to root
  std::optional<LandmarkSet> cached_landmarks;
  Json extra = Json::object();

  /// Role of the image shown to physicians: "sfsl" or "xray".
  std::string display_role() const { return modality == Modality::Rgb ? "sfsl" : "xray"; }
};

struct PatientRecord
{
  std::string patient_id;
  std::vector<ExamRecord> exams;
  Json extra = Json::object();

  const ExamRecord * find_exam(std::string_view exam_id) const;
};

struct StoreManifest
{
  std::vector<PatientRecord> patients;
  Json extra = Json::object();

  const PatientRecord * find_patient(std::string_view patient_id) const;
};

/// Reads <root>/manifest.json, validates it and attaches any cached
/// landmarks. A root without a manifest is an empty store. Throws StoreError
/// naming the path and field on malformed input or a missing image file.
StoreManifest load_store(const std::filesystem::path & root);

/// Validates and writes <root>/manifest.json (atomically).
void save_manifest(const std::filesystem::path & root, const StoreManifest & manifest);

Json manifest_to_json(const StoreManifest & manifest);
/// `root` is used for existence checks only when non-empty.
StoreManifest manifest_from_json(const Json & doc, const std::filesystem::path & root = {});

/// Every unordered pair (earlier, later) of a patient's exams: N(N-1)/2 of them.
std::vector<std::pair<std::string, std::string>> registrable_pairs(const PatientRecord & patient);

std::filesystem::path exam_directory(const std::filesystem::path & root, const std::string & patient_id,
                                     const ExamRecord & exam);
std::filesystem::path landmark_cache_path(const std::filesystem::path & root, const std::string & patient_id,
                                          const ExamRecord & exam);

/// Size and modification time of an image, the freshness key of the landmark cache.
struct FileFingerprint
{
  std::uintmax_t size = 0;
  std::int64_t mtime_ns = 0;

  friend bool operator==(const FileFingerprint &, const FileFingerprint &) = default;
};

FileFingerprint fingerprint_of(const std::filesystem::path & path);

/// Runs the modality's detector on the exam's images (SFSL+FD or radiograph).
/// Unreadable images surface as DetectionError with stage "load_image".
LandmarkSet detect_exam_landmarks(const std::filesystem::path & root, const ExamRecord & exam,
                                  const DetectionConfig & config = {}, DetectionTrace * trace = nullptr);

/// Loads the exam's display image (SFSL or radiograph) as RGB.
RasterImage load_display_image(const std::filesystem::path & root, const ExamRecord & exam);

/// Landmark cache over a store root. A cached landmarks.json is served while
/// every source image keeps the fingerprint recorded beside it; otherwise the
/// detector runs again and the file is rewritten. Calls for the same exam are
/// serialized; different exams proceed in parallel.
class LandmarkCache
{
public:
  using Detector = std::function<LandmarkSet(const std::filesystem::path & root, const ExamRecord & exam)>;

  explicit LandmarkCache(std::filesystem::path root, DetectionConfig config = {});

  /// Replaces the detector (tests use this to count or fail detections).
  void set_detector(Detector detector);

  /// Throws DetectionError (message prefixed with the exam id) on failure.
  LandmarkSet get_or_detect(const std::string & patient_id, const ExamRecord & exam);

  /// Fingerprint string of the landmarks currently cached for an exam, or
  /// empty when nothing fresh is cached. Changes whenever detection reruns.
  std::string landmark_fingerprint(const std::string & patient_id, const ExamRecord & exam) const;

  std::size_t detections_run() const noexcept { return detections_.load(); }
  const std::filesystem::path & root() const noexcept { return root_; }

private:
  std::mutex & exam_mutex(const std::string & key);
  std::optional<LandmarkSet> read_fresh(const std::string & patient_id, const ExamRecord & exam) const;

  std::filesystem::path root_;
  DetectionConfig config_;
  Detector detector_;
  std::atomic<std::size_t> detections_{ 0 };
  std::mutex table_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> exam_mutexes_;
};

/// Records `set` as the fresh cached landmarks of an exam, fingerprinted
/// against the exam's current image files.
void write_landmark_cache(const std::filesystem::path & root, const std::string & patient_id, const ExamRecord & exam,
                          const LandmarkSet & set);

/// One-shot convenience over LandmarkCache.
LandmarkSet get_or_detect_landmarks(const std::filesystem::path & root, const std::string & patient_id,
                                    const ExamRecord & exam, const DetectionConfig & config = {});

} // namespace scoliotrack
