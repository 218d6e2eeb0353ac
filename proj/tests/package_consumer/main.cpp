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
#include <scoliotrack/registration.hpp>

#include <cmath>
#include <cstdio>

int
main()
{
  using namespace scoliotrack;
  const LandmarkSet t{ "t", { 200, 80 }, { 150, 400 }, { 250, 400 }, { 200, 480 }, {} };
  const RegistrationReport r = estimate_rigid(t, t);
  std::printf("scale %.3f angle %.3f\n", r.transform.scale, r.transform.angle);
  return std::abs(r.transform.scale - 1.0) < 1e-12 && std::abs(r.transform.angle) < 1e-12 ? 0 : 1;
}
