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

// Internal JSON helpers shared by the core and service targets. Not installed.

#pragma once

#include <maxent/ingest.hpp>
#include <maxent/model.hpp>

#include "json.hpp"

namespace maxent::detail {

using json = nlohmann::json;

/// Resolves a JSON label (string, or number for numeric domains) to a value index.
ValueIndex resolve_value(const AttributeMeta& meta, const json& value);

json clause_to_json(const Schema& schema, AttrId attr, const Clause& clause);
/// Parses {attr, op: eq|range|in, value}; writes the attribute into `attr`.
Clause clause_from_json(const Schema& schema, const json& j, AttrId& attr);

json predicate_to_json(const Schema& schema, const Predicate& pred);
Predicate predicate_from_json(const Schema& schema, const json& clauses);

json schema_config_to_json_value(const SchemaConfig& config);
SchemaConfig schema_config_from_json_value(const json& j);

}  // namespace maxent::detail
