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

#include <stdexcept>
#include <string>

namespace scoliotrack {

/// Root of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a precondition (bad channel index, alpha out of range, ...).
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// PNG decode/encode failure; carries the offending path.
class ImageIoError : public Error
{
public:
  ImageIoError(std::string path, const std::string & what)
    : Error(path + ": " + what)
    , path_(std::move(path))
  {}

  const std::string & path() const noexcept { return path_; }

private:
  std::string path_;
};

/// Landmark detection failed. `stage()` names the pipeline step that gave up,
/// e.g. "spine_threshold", "fd_psis", "xray_components".
class DetectionError : public Error
{
public:
  DetectionError(std::string stage, const std::string & what)
    : Error(stage + ": " + what)
    , stage_(std::move(stage))
  {}

  const std::string & stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

/// Landmarks are too degenerate to estimate a transform from.
class RegistrationError : public Error
{
public:
  using Error::Error;
};

/// Malformed manifest, missing file, or any other store-level inconsistency.
class StoreError : public Error
{
public:
  using Error::Error;
};

/// A patient or exam id that the store does not know. `kind()` is "patient" or "exam".
class NotFoundError : public Error
{
public:
  NotFoundError(std::string kind, const std::string & id)
    : Error("unknown " + kind + " '" + id + "'")
    , kind_(std::move(kind))
  {}

  const std::string & kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

} // namespace scoliotrack
