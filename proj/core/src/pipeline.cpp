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
#include "scoliotrack/pipeline.hpp"

#include "scoliotrack/error.hpp"

#include <algorithm>

namespace scoliotrack {

RegisteredImage
register_image(const RasterImage & source, const LandmarkSet & source_landmarks, const LandmarkSet & target_landmarks,
               int target_width, int target_height, RegistrationMethod method)
{
  RegisteredImage out{ register_landmarks(source_landmarks, target_landmarks, method),
                       RasterImage(target_width, target_height, source.format()) };
  out.image = resample_nearest(source, out.report.transform, target_width, target_height);
  return out;
}

RasterImage
compose_followup(const RasterImage & target, std::span<const RasterImage> registered_sources, double alpha,
                 const LandmarkSet * overlay, const OverlayPalette & palette)
{
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidArgument("blending alpha must lie in [0, 1], got " + std::to_string(alpha));
  RasterImage out = render_followup(target, registered_sources, alpha);
  if (overlay)
    out = overlay_landmarks(out, *overlay, palette);
  return out;
}

FollowupEngine::FollowupEngine(std::filesystem::path root, StoreManifest manifest, ToolConfig config)
  : root_(std::move(root))
  , manifest_(std::move(manifest))
  , config_(std::move(config))
  , landmarks_(root_, config_.detection)
{}

const PatientRecord &
FollowupEngine::patient(std::string_view patient_id) const
{
  const PatientRecord * p = manifest_.find_patient(patient_id);
  if (!p)
    throw NotFoundError("patient", std::string(patient_id));
  return *p;
}

const ExamRecord &
FollowupEngine::exam(std::string_view patient_id, std::string_view exam_id) const
{
  const ExamRecord * e = patient(patient_id).find_exam(exam_id);
  if (!e)
    throw NotFoundError("exam", std::string(patient_id) + "/" + std::string(exam_id));
  return *e;
}

LandmarkSet
FollowupEngine::landmarks(const std::string & patient_id, const std::string & exam_id)
{
  return landmarks_.get_or_detect(patient_id, exam(patient_id, exam_id));
}

std::shared_ptr<const FollowupEngine::Registration>
FollowupEngine::register_pair(const std::string & patient_id, const std::string & source_id,
                              const std::string & target_id, RegistrationMethod method)
{
  const ExamRecord & source = exam(patient_id, source_id);
  const ExamRecord & target = exam(patient_id, target_id);

  // Landmarks first, so the fingerprints below describe what we register with.
  const LandmarkSet source_lm = landmarks_.get_or_detect(patient_id, source);
  const LandmarkSet target_lm = landmarks_.get_or_detect(patient_id, target);
  const Key key{ patient_id,
                 source_id,
                 target_id,
                 static_cast<int>(method),
                 landmarks_.landmark_fingerprint(patient_id, source),
                 landmarks_.landmark_fingerprint(patient_id, target) };

  std::mutex * pair_mutex;
  {
    std::lock_guard lock(table_mutex_);
    if (auto it = registrations_cache_.find(key); it != registrations_cache_.end())
      return it->second;
    auto & slot = pair_mutexes_[patient_id + "/" + source_id + "->" + target_id];
    if (!slot)
      slot = std::make_unique<std::mutex>();
    pair_mutex = slot.get();
  }

  std::lock_guard pair_lock(*pair_mutex);
  {
    std::lock_guard lock(table_mutex_);
    if (auto it = registrations_cache_.find(key); it != registrations_cache_.end())
      return it->second;
  }

  const RasterImage target_img = load_display_image(root_, target);
  const RasterImage source_img = load_display_image(root_, source);
  ++registrations_;
  RegisteredImage reg =
    register_image(source_img, source_lm, target_lm, target_img.width(), target_img.height(), method);

  LandmarkSet mapped = apply_to_landmarks(reg.report.transform, source_lm, target_lm.frame);
  auto result = std::make_shared<const Registration>(
    Registration{ std::move(reg.report), std::move(reg.image), std::move(mapped) });

  std::lock_guard lock(table_mutex_);
  registrations_cache_[key] = result;
  return result;
}

RasterImage
FollowupEngine::blend(const std::string & patient_id, const std::string & target_id,
                      const std::vector<std::string> & source_ids, double alpha, bool overlay,
                      RegistrationMethod method)
{
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidArgument("blending alpha must lie in [0, 1], got " + std::to_string(alpha));
  if (std::find(source_ids.begin(), source_ids.end(), target_id) != source_ids.end())
    throw InvalidArgument("target exam '" + target_id + "' cannot also be a source");

  const PatientRecord & p = patient(patient_id);
  const ExamRecord & target = exam(patient_id, target_id);
  std::vector<const ExamRecord *> sources;
  for (const auto & id : source_ids)
    sources.push_back(&exam(patient_id, id));
  // Chronological fold; manifest order already is chronological, ties keep it.
  const auto position = [&](const ExamRecord * e) { return e - p.exams.data(); };
  std::stable_sort(sources.begin(), sources.end(),
                   [&](const ExamRecord * a, const ExamRecord * b) { return position(a) < position(b); });

  std::vector<RasterImage> registered;
  for (const ExamRecord * s : sources)
    registered.push_back(register_pair(patient_id, s->exam_id, target_id, method)->registered);

  const RasterImage target_img = load_display_image(root_, target);
  LandmarkSet target_lm;
  if (overlay)
    target_lm = landmarks_.get_or_detect(patient_id, target);
  return compose_followup(target_img, registered, alpha, overlay ? &target_lm : nullptr, config_.palette);
}

} // namespace scoliotrack
