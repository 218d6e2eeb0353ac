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

#include "scoliotrack/compositing.hpp"
#include "scoliotrack/examstore.hpp"
#include "scoliotrack/json_io.hpp"
#include "scoliotrack/registration.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace scoliotrack {

struct RegisteredImage
{
  RegistrationReport report;
  RasterImage image; ///< source resampled into the target frame
};

/// Estimates the source->target transform from the landmarks and resamples
/// the source once, into a target_width x target_height frame.
RegisteredImage register_image(const RasterImage & source, const LandmarkSet & source_landmarks,
                               const LandmarkSet & target_landmarks, int target_width, int target_height,
                               RegistrationMethod method);

/// Follow-up composite: sources folded over the target in the given order,
/// then the target's landmarks drawn on top when `overlay` is set.
RasterImage compose_followup(const RasterImage & target, std::span<const RasterImage> registered_sources, double alpha,
                             const LandmarkSet * overlay, const OverlayPalette & palette = {});

/// Store-backed pipeline used by the CLI and the service: landmark cache,
/// pairwise registrations cached by (patient, source, target, method, landmark
/// fingerprints), and follow-up blends. Safe for concurrent use.
class FollowupEngine
{
public:
  FollowupEngine(std::filesystem::path root, StoreManifest manifest, ToolConfig config = {});

  const StoreManifest & manifest() const noexcept { return manifest_; }
  const std::filesystem::path & root() const noexcept { return root_; }
  const ToolConfig & config() const noexcept { return config_; }

  /// Throw NotFoundError.
  const PatientRecord & patient(std::string_view patient_id) const;
  const ExamRecord & exam(std::string_view patient_id, std::string_view exam_id) const;

  LandmarkSet landmarks(const std::string & patient_id, const std::string & exam_id);

  struct Registration
  {
    RegistrationReport report;
    RasterImage registered;
    LandmarkSet registered_landmarks;
  };

  std::shared_ptr<const Registration> register_pair(const std::string & patient_id, const std::string & source_id,
                                                    const std::string & target_id, RegistrationMethod method);

  /// Sources are folded in exam-date order. Throws InvalidArgument on alpha
  /// outside [0, 1] or a target listed among the sources.
  RasterImage blend(const std::string & patient_id, const std::string & target_id,
                    const std::vector<std::string> & source_ids, double alpha, bool overlay,
                    RegistrationMethod method = RegistrationMethod::Angle);

  /// Estimations actually performed (cache misses).
  std::size_t registrations_run() const noexcept { return registrations_.load(); }
  LandmarkCache & landmark_cache() noexcept { return landmarks_; }

private:
  using Key = std::tuple<std::string, std::string, std::string, int, std::string, std::string>;

  std::filesystem::path root_;
  StoreManifest manifest_;
  ToolConfig config_;
  LandmarkCache landmarks_;
  std::atomic<std::size_t> registrations_{ 0 };

  std::mutex table_mutex_;
  std::map<Key, std::shared_ptr<const Registration>> registrations_cache_;
  std::map<std::string, std::unique_ptr<std::mutex>> pair_mutexes_;
};

} // namespace scoliotrack
