// Copyright 2026 The qfilab Authors
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

// JSON state file:
//   { "cutoff": int, "entries": [ {"na": int, "nb": int, "re": float, "im": float}, ... ] }
// Entries are written in canonical (N, n_a) order so golden files are stable.

#pragma once

#include <string>

#include "json.hpp"
#include "qfilab/errors.hpp"
#include "qfilab/fock.hpp"

namespace qfilab {

inline nlohmann::json state_to_json(const TwoModeState &state) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto &e : state.entries()) {
        entries.push_back({{"na", e.key.na}, {"nb", e.key.nb}, {"re", e.value.real()},
                           {"im", e.value.imag()}});
    }
    return {{"cutoff", state.cutoff()}, {"entries", std::move(entries)}};
}

inline std::string write_state_json(const TwoModeState &state) {
    return state_to_json(state).dump(2) + "\n";
}

inline TwoModeState state_from_json(const nlohmann::json &doc, const StateOptions &options = {}) {
    try {
        if (!doc.is_object() || !doc.contains("cutoff") || !doc.contains("entries")) {
            throw ValidationError("state file needs \"cutoff\" and \"entries\"");
        }
        const auto &cutoff = doc.at("cutoff");
        if (!cutoff.is_number_integer()) {
            throw ValidationError("\"cutoff\" must be an integer");
        }
        const auto &list = doc.at("entries");
        if (!list.is_array()) {
            throw ValidationError("\"entries\" must be an array");
        }
        std::vector<Entry> entries;
        entries.reserve(list.size());
        for (const auto &item : list) {
            if (!item.at("na").is_number_integer() || !item.at("nb").is_number_integer()) {
                throw ValidationError("\"na\" and \"nb\" must be integers");
            }
            const double re = item.at("re").get<double>();
            const double im = item.contains("im") ? item.at("im").get<double>() : 0.0;
            entries.push_back({item.at("na").get<int>(), item.at("nb").get<int>(), cplx{re, im}});
        }
        return make_state(entries, cutoff.get<int>(), options);
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string("malformed state file: ") + e.what());
    }
}

inline TwoModeState read_state_json(const std::string &text, const StateOptions &options = {}) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError(std::string("state file is not valid JSON: ") + e.what());
    }
    return state_from_json(doc, options);
}

}  // namespace qfilab
