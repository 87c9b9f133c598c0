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

#include <maxent/model.hpp>
#include <maxent/solver.hpp>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace maxent {

/// A query the engine refuses (oversized group-by, repeated attributes, malformed JSON).
class QueryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QueryAnswer {
    double expectation = 0.0;
    std::uint64_t rounded = 0;
    double elapsed_ms = 0.0;
};

/// Round half up after clamping at 0.
std::uint64_t round_estimate(double expectation);

/// n * P[zero-set] / P, zeroing every 1D variable whose value the predicate rejects.
QueryAnswer answer_count(const Summary& summary, const Predicate& predicate);

/// Point expectation through mixed partial derivatives of P (test path).
double answer_point_via_derivatives(const Summary& summary, std::span<const ValueIndex> point);

inline constexpr std::uint64_t kDefaultGroupCap = 100000;

struct GroupByQuery {
    std::vector<AttrId> attributes;
    Predicate filter;  // arity 0 means no filter
    bool include_zero_groups = true;
    std::uint64_t cap = kDefaultGroupCap;
};

struct GroupRow {
    std::vector<ValueIndex> values;  // parallel to GroupByQuery::attributes
    QueryAnswer answer;
};

/// One count per cell of the group-by cross product, values restricted by the filter.
/// Throws QueryError when the cross product exceeds the cap.
std::vector<GroupRow> answer_groupby(const Summary& summary, const GroupByQuery& query);

/// Probability that the tuple occurs at least once: 1 - (1 - E/n)^n.
double marginal_probability(const Summary& summary, std::span<const ValueIndex> tuple);

/// Equi-join size estimate: sum over join values d of E_left[q_left, A = d] * E_right[q_right, A = d].
double answer_join_count(const Summary& left, const Summary& right, const std::string& join_attribute,
                         const Predicate& q_left, const Predicate& q_right);

/// Parsed query JSON: {clauses: [{attr, op, value}], groupBy: [...], includeZeroGroups: bool}.
struct QueryRequest {
    Predicate predicate;
    std::vector<AttrId> group_by;
    bool include_zero_groups = true;
};

QueryRequest parse_query_json(const Schema& schema, const std::string& json_text);
std::string query_request_to_json(const Schema& schema, const QueryRequest& request);
std::string answer_to_json(const QueryAnswer& answer);
std::string groupby_to_json(const Schema& schema, const std::vector<AttrId>& attributes,
                            const std::vector<GroupRow>& rows, double elapsed_ms);

}  // namespace maxent
