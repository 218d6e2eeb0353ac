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

#include "scoliotrack/json_io.hpp"
#include "scoliotrack/pipeline.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>

namespace scoliotrack {

// HTTP facade over a store. Routes:
//
//   GET  /patients
//   GET  /patients/{id}/exams
//   GET  /patients/{id}/exams/{eid}/landmarks
//   POST /register      {"patient", "source_exam", "target_exam", "method"}
//   GET  /blend?patient=&target=&sources=a,b&alpha=&overlay=none|landmarks&method=
//
// Errors are JSON: {"status", "code", "message", "stage"} with status one of
// 400, 404, 422, 500. Anything else under GET is looked up in the static
// directory, when one is configured.

struct ServiceOptions
{
  std::filesystem::path store;
  std::string host = "127.0.0.1";
  int port = 8080; ///< 0 picks a free port
  std::filesystem::path static_dir;
  ToolConfig config;
};

/// Fills unset fields from SCOLIOTRACK_STORE, SCOLIOTRACK_HOST,
/// SCOLIOTRACK_PORT and SCOLIOTRACK_STATIC_DIR.
ServiceOptions apply_environment(ServiceOptions options);

struct ServiceResponse
{
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

class Service
{
public:
  /// Loads the store snapshot; throws StoreError on a bad store.
  explicit Service(ServiceOptions options);
  ~Service();

  Service(const Service &) = delete;
  Service & operator=(const Service &) = delete;

  /// Routing without sockets. `query` holds decoded query parameters.
  ServiceResponse handle(const std::string & method, const std::string & path,
                         const std::map<std::string, std::string> & query = {}, const std::string & body = {});

  /// Binds the configured host and port; returns the bound port.
  int bind();
  /// Serves until stop(). Requires bind().
  void listen();
  void stop();
  void wait_until_ready() const;

  FollowupEngine & engine() noexcept { return *engine_; }
  const ServiceOptions & options() const noexcept { return options_; }

private:
  struct Http;

  ServiceOptions options_;
  std::unique_ptr<FollowupEngine> engine_;
  std::unique_ptr<Http> http_;
};

} // namespace scoliotrack
