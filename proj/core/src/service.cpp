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
#include "scoliotrack/service.hpp"

#include "scoliotrack/error.hpp"
#include "scoliotrack/png_io.hpp"

#include <httplib.h>

#include <cmath>
#include <cstdlib>
#include <optional>
#include <sstream>

namespace scoliotrack {

namespace {

struct ApiError
{
  int status;
  std::string code;
  std::string message;
  std::optional<std::string> stage;
};

ServiceResponse
json_response(int status, const Json & doc)
{
  return { status, "application/json", doc.dump() };
}

ServiceResponse
error_response(const ApiError & e)
{
  return json_response(e.status, Json{ { "status", e.status },
                                       { "code", e.code },
                                       { "message", e.message },
                                       { "stage", e.stage ? Json(*e.stage) : Json(nullptr) } });
}

std::vector<std::string>
split_path(const std::string & path)
{
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/'))
    if (!part.empty())
      parts.push_back(part);
  return parts;
}

std::vector<std::string>
split_list(const std::string & s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(item);
  return out;
}

const std::string &
required(const std::map<std::string, std::string> & query, const char * key)
{
  const auto it = query.find(key);
  if (it == query.end() || it->second.empty())
    throw ApiError{ 400, "missing_parameter", std::string("query parameter '") + key + "' is required", {} };
  return it->second;
}

double
parse_alpha(const std::string & text)
{
  double v = 0.0;
  std::size_t used = 0;
  try
  {
    v = std::stod(text, &used);
  }
  catch (const std::exception &)
  {
    used = 0;
  }
  if (used != text.size() || text.empty() || !std::isfinite(v))
    throw ApiError{ 400, "bad_alpha", "alpha must be a number, got '" + text + "'", {} };
  if (v < 0.0 || v > 1.0)
    throw ApiError{ 400, "alpha_out_of_range", "alpha must lie in [0, 1], got " + text, {} };
  return v;
}

RegistrationMethod
method_or_400(const std::string & name)
{
  try
  {
    return parse_method(name);
  }
  catch (const InvalidArgument & e)
  {
    throw ApiError{ 400, "bad_method", e.what(), {} };
  }
}

Json
patient_summary(const PatientRecord & p)
{
  Json doc = p.extra;
  doc["patient_id"] = p.patient_id;
  doc["exam_count"] = p.exams.size();
  return doc;
}

Json
exam_summary(const ExamRecord & e)
{
  Json doc = e.extra;
  doc["exam_id"] = e.exam_id;
  doc["date"] = e.date;
  doc["modality"] = std::string(to_string(e.modality));
  doc["files"] = e.files;
  return doc;
}

} // namespace

ServiceOptions
apply_environment(ServiceOptions options)
{
  const auto env = [](const char * name) -> std::optional<std::string> {
    const char * v = std::getenv(name);
    return v && *v ? std::optional<std::string>(v) : std::nullopt;
  };
  if (options.store.empty())
    if (auto v = env("SCOLIOTRACK_STORE"))
      options.store = *v;
  if (auto v = env("SCOLIOTRACK_HOST"); v && options.host == ServiceOptions{}.host)
    options.host = *v;
  if (auto v = env("SCOLIOTRACK_PORT"); v && options.port == ServiceOptions{}.port)
    options.port = std::atoi(v->c_str());
  if (options.static_dir.empty())
    if (auto v = env("SCOLIOTRACK_STATIC_DIR"))
      options.static_dir = *v;
  return options;
}

struct Service::Http
{
  httplib::Server server;
  int port = -1;
};

Service::Service(ServiceOptions options)
  : options_(std::move(options))
  , http_(std::make_unique<Http>())
{
  if (options_.store.empty())
    throw StoreError("no store root given (flag or SCOLIOTRACK_STORE)");
  engine_ = std::make_unique<FollowupEngine>(options_.store, load_store(options_.store), options_.config);

  auto & srv = http_->server;
  if (!options_.static_dir.empty() && !srv.set_mount_point("/", options_.static_dir.string()))
    throw StoreError(options_.static_dir.string() + ": static directory does not exist");

  const auto adapt = [this](const httplib::Request & req, httplib::Response & res) {
    std::map<std::string, std::string> query;
    for (const auto & [k, v] : req.params)
      query.emplace(k, v);
    const ServiceResponse r = handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  srv.Get(".*", adapt);
  srv.Post(".*", adapt);
}

Service::~Service()
{
  stop();
}

ServiceResponse
Service::handle(const std::string & method, const std::string & path, const std::map<std::string, std::string> & query,
                const std::string & body)
{
  try
  {
    const auto parts = split_path(path);
    FollowupEngine & eng = *engine_;

    if (method == "GET" && parts.size() == 1 && parts[0] == "patients")
    {
      Json list = Json::array();
      for (const auto & p : eng.manifest().patients)
        list.push_back(patient_summary(p));
      return json_response(200, list);
    }
    if (method == "GET" && parts.size() == 3 && parts[0] == "patients" && parts[2] == "exams")
    {
      Json list = Json::array();
      for (const auto & e : eng.patient(parts[1]).exams)
        list.push_back(exam_summary(e));
      return json_response(200, list);
    }
    if (method == "GET" && parts.size() == 5 && parts[0] == "patients" && parts[2] == "exams" &&
        parts[4] == "landmarks")
      return json_response(200, landmarks_to_json(eng.landmarks(parts[1], parts[3])));

    if (method == "POST" && parts.size() == 1 && parts[0] == "register")
    {
      Json req;
      try
      {
        req = Json::parse(body);
      }
      catch (const Json::parse_error & e)
      {
        throw ApiError{ 400, "bad_request", std::string("request body is not JSON: ") + e.what(), {} };
      }
      const auto field = [&](const char * key, const char * fallback) -> std::string {
        if (req.is_object() && req.contains(key) && req[key].is_string())
          return req[key].get<std::string>();
        if (fallback)
          return fallback;
        throw ApiError{ 400, "bad_request", std::string("field '") + key + "' (string) is required", {} };
      };
      const std::string patient = field("patient", nullptr);
      const std::string source = field("source_exam", nullptr);
      const std::string target = field("target_exam", nullptr);
      const RegistrationMethod m = method_or_400(field("method", "angle"));
      return json_response(200, report_to_json(eng.register_pair(patient, source, target, m)->report));
    }

    if (method == "GET" && parts.size() == 1 && parts[0] == "blend")
    {
      const std::string & patient = required(query, "patient");
      const std::string & target = required(query, "target");
      const auto sources = query.count("sources") ? split_list(query.at("sources")) : std::vector<std::string>{};
      const double alpha = query.count("alpha") ? parse_alpha(query.at("alpha")) : 0.5;
      const std::string overlay = query.count("overlay") ? query.at("overlay") : "none";
      if (overlay != "none" && overlay != "landmarks")
        throw ApiError{ 400, "bad_overlay", "overlay must be 'none' or 'landmarks'", {} };
      const RegistrationMethod m = method_or_400(query.count("method") ? query.at("method") : "angle");
      const RasterImage img = eng.blend(patient, target, sources, alpha, overlay == "landmarks", m);
      const auto png = encode_png(img);
      return { 200, "image/png", std::string(png.begin(), png.end()) };
    }

    throw ApiError{ 404, "not_found", "no route for " + method + " " + path, {} };
  }
  catch (const ApiError & e)
  {
    return error_response(e);
  }
  catch (const NotFoundError & e)
  {
    return error_response({ 404, e.kind() + "_not_found", e.what(), {} });
  }
  catch (const DetectionError & e)
  {
    return error_response({ 422, "detection_failed", e.what(), e.stage() });
  }
  catch (const RegistrationError & e)
  {
    return error_response({ 422, "registration_failed", e.what(), {} });
  }
  catch (const InvalidArgument & e)
  {
    return error_response({ 400, "bad_request", e.what(), {} });
  }
  catch (const std::exception & e)
  {
    return error_response({ 500, "internal_error", e.what(), {} });
  }
}

int
Service::bind()
{
  auto & srv = http_->server;
  if (options_.port == 0)
    http_->port = srv.bind_to_any_port(options_.host);
  else
    http_->port = srv.bind_to_port(options_.host, options_.port) ? options_.port : -1;
  if (http_->port < 0)
    throw Error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  return http_->port;
}

void
Service::listen()
{
  http_->server.listen_after_bind();
}

void
Service::stop()
{
  if (http_ && http_->server.is_running())
    http_->server.stop();
}

void
Service::wait_until_ready() const
{
  http_->server.wait_until_ready();
}

} // namespace scoliotrack
