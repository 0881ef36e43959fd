// Copyright 2026 The ctnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <initializer_list>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ctnet/error.hpp"

namespace ctnet::detail {

/// Throws ConfigError naming the first key of `j` not listed in `keys`.
inline void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> keys,
                           const std::string& where)
{
    if (!j.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (auto k : keys) {
            known = known || k == key;
        }
        if (!known) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

/// Reads `key` into `out` when present; a type mismatch is a ConfigError.
template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out, const std::string& where)
{
    if (auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(where + "." + key + ": wrong type");
        }
    }
}

}  // namespace ctnet::detail
