// Copyright 2026 The CommCorr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COMMCORR_UTIL_JSON_KEYS_H_
#define COMMCORR_UTIL_JSON_KEYS_H_

#include <set>
#include <string>

#include <nlohmann/json.hpp>

namespace commcorr::util {

// Throws std::invalid_argument naming every key of `j` not in `allowed`.
void RejectUnknownKeys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::string& where);

}  // namespace commcorr::util

#endif  // COMMCORR_UTIL_JSON_KEYS_H_
