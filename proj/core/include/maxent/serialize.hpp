/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <maxent/solver.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace maxent {

/// Malformed or unsupported stored summary.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kSummaryFormatVersion = 1;

/// JSON document: schema, statistics (clauses as labels, targets, values), factorization nodes.
/// Doubles are written in shortest round-trip form, so values reload bit-exactly.
std::string serialize_summary(const Summary& summary);
Summary load_summary(const std::string& document);

void save_summary_file(const Summary& summary, const std::filesystem::path& path);
Summary load_summary_file(const std::filesystem::path& path);

/// Attribute domains and which attribute sets carry multi-dimensional statistics.
std::string summary_schema_json(const Summary& summary);

}  // namespace maxent
