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

#include <maxent/query.hpp>

#include "json_codec.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace maxent {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double expectation_of(const Summary& summary, const Predicate& predicate) {
    const auto& ev = summary.evaluator();
    const double p = ev.value();
    if (!(p > 0.0)) throw ModelError("polynomial evaluates to zero; the model is degenerate");
    const auto zero = ZeroSet::from_predicate(predicate, summary.statistics().domain_sizes());
    return summary.n() * (ev.evaluate(zero) / p);
}

}  // namespace

std::uint64_t round_estimate(double expectation) {
    if (!(expectation > 0.0)) return 0;
    return static_cast<std::uint64_t>(std::floor(expectation + 0.5));
}

QueryAnswer answer_count(const Summary& summary, const Predicate& predicate) {
    const auto t0 = Clock::now();
    QueryAnswer a;
    // Correction terms cancel in floating point, which can leave a tiny negative count.
    a.expectation = std::max(0.0, expectation_of(summary, predicate));
    a.rounded = round_estimate(a.expectation);
    a.elapsed_ms = ms_since(t0);
    return a;
}

double answer_point_via_derivatives(const Summary& summary, std::span<const ValueIndex> point) {
    const auto& stats = summary.statistics();
    const auto& ev = summary.evaluator();
    const auto m = stats.arity();
    if (point.size() != m) throw SchemaError("point query must fix every attribute");
    if (m > 30) throw QueryError("derivative path supports at most 30 attributes");
    const double p = ev.value();
    if (!(p > 0.0)) throw ModelError("polynomial evaluates to zero; the model is degenerate");

    std::vector<StatId> vars(m);
    double scale = 1.0;
    for (AttrId a = 0; a < m; ++a) {
        if (point[a] >= stats.domain_sizes()[a]) throw DomainError("point value outside the domain");
        vars[a] = stats.one_d_stat(a, point[a]);
        scale *= ev.alpha(vars[a]);
    }
    if (scale == 0.0) return 0.0;

    // Mixed partial of a multilinear polynomial: signed sum over the {0,1} corners.
    std::vector<double> alpha = ev.alpha();
    double mixed = 0.0;
    const std::uint64_t corners = std::uint64_t{1} << m;
    for (std::uint64_t c = 0; c < corners; ++c) {
        int ones = 0;
        for (AttrId a = 0; a < m; ++a) {
            const bool one = (c >> a) & 1U;
            alpha[vars[a]] = one ? 1.0 : 0.0;
            ones += one ? 1 : 0;
        }
        const double v = ev.evaluate_with(alpha);
        mixed += ((m - ones) % 2 == 0) ? v : -v;
    }
    return summary.n() * scale * mixed / p;
}

std::vector<GroupRow> answer_groupby(const Summary& summary, const GroupByQuery& query) {
    const auto& stats = summary.statistics();
    const auto m = stats.arity();
    Predicate base = query.filter.arity() == 0 ? Predicate(m) : query.filter;
    if (base.arity() != m) throw SchemaError("group-by filter arity does not match the summary");

    std::uint64_t need = 1;
    std::vector<bool> seen(m, false);
    for (auto a : query.attributes) {
        if (a >= m) throw SchemaError("group-by attribute out of range");
        if (seen[a]) throw QueryError("group-by attributes must be distinct");
        seen[a] = true;
        const std::uint64_t n = stats.domain_sizes()[a];
        need = (n != 0 && need > UINT64_MAX / n) ? UINT64_MAX : need * n;
    }
    if (need > query.cap)
        throw QueryError("group-by needs " + std::to_string(need) + " cells, above the cap of " +
                         std::to_string(query.cap));

    // Values per group attribute that survive the filter.
    std::vector<std::vector<ValueIndex>> values;
    for (auto a : query.attributes) {
        std::vector<ValueIndex> vs;
        const auto& c = base.clause(a);
        for (ValueIndex v = 0; v < stats.domain_sizes()[a]; ++v)
            if (c.accepts(v)) vs.push_back(v);
        values.push_back(std::move(vs));
    }

    std::vector<GroupRow> rows;
    for (const auto& vs : values)
        if (vs.empty()) return rows;
    std::vector<std::size_t> pos(values.size(), 0);
    while (true) {
        Predicate p = base;
        GroupRow row;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const auto v = values[i][pos[i]];
            p.set(query.attributes[i], Clause::point(v));
            row.values.push_back(v);
        }
        row.answer = answer_count(summary, p);
        if (query.include_zero_groups || row.answer.rounded > 0) rows.push_back(std::move(row));
        std::size_t i = values.size();
        while (i > 0) {
            if (++pos[i - 1] < values[i - 1].size()) break;
            pos[i - 1] = 0;
            --i;
        }
        if (i == 0) break;
    }
    return rows;
}

double marginal_probability(const Summary& summary, std::span<const ValueIndex> tuple) {
    const auto m = summary.statistics().arity();
    if (tuple.size() != m) throw SchemaError("marginal probability needs a full tuple");
    Predicate p(m);
    for (AttrId a = 0; a < m; ++a) p.set(a, Clause::point(tuple[a]));
    const double n = summary.n();
    if (n <= 0.0) return 0.0;
    const double q = std::clamp(answer_count(summary, p).expectation / n, 0.0, 1.0);
    return -std::expm1(n * std::log1p(-q));
}

double answer_join_count(const Summary& left, const Summary& right, const std::string& join_attribute,
                         const Predicate& q_left, const Predicate& q_right) {
    const auto la = left.schema().find(join_attribute);
    const auto ra = right.schema().find(join_attribute);
    if (!la || !ra) throw SchemaError("join attribute '" + join_attribute + "' missing from a summary");
    const auto& ld = left.schema()[*la];
    const auto& rd = right.schema()[*ra];
    if (ld.labels() != rd.labels()) throw SchemaError("join attribute '" + join_attribute + "' domains differ");
    Predicate ql = q_left.arity() == 0 ? Predicate(left.schema().size()) : q_left;
    Predicate qr = q_right.arity() == 0 ? Predicate(right.schema().size()) : q_right;
    if (ql.arity() != left.schema().size() || qr.arity() != right.schema().size())
        throw SchemaError("join predicate arity does not match its summary");

    const Clause lc = ql.clause(*la), rc = qr.clause(*ra);
    double total = 0.0;
    for (ValueIndex d = 0; d < ld.size(); ++d) {
        if (!lc.accepts(d) || !rc.accepts(d)) continue;
        ql.set(*la, Clause::point(d));
        qr.set(*ra, Clause::point(d));
        const double l = expectation_of(left, ql);
        if (l == 0.0) continue;
        total += l * expectation_of(right, qr);
    }
    return total;
}

QueryRequest parse_query_json(const Schema& schema, const std::string& json_text) {
    using detail::json;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw QueryError(std::string("malformed query JSON: ") + e.what());
    }
    if (!j.is_object()) throw QueryError("query must be a JSON object");
    QueryRequest r;
    try {
        r.predicate = detail::predicate_from_json(schema, j.contains("clauses") ? j.at("clauses") : json());
        if (j.contains("groupBy")) {
            for (const auto& g : j.at("groupBy")) r.group_by.push_back(schema.index_of(g.get<std::string>()));
        }
        r.include_zero_groups = j.value("includeZeroGroups", true);
    } catch (const json::exception& e) {
        throw QueryError(std::string("malformed query: ") + e.what());
    } catch (const ConfigError& e) {
        throw QueryError(e.what());
    }
    return r;
}

std::string query_request_to_json(const Schema& schema, const QueryRequest& request) {
    using detail::json;
    json groups = json::array();
    for (auto a : request.group_by) groups.push_back(schema[a].name());
    return json{{"clauses", detail::predicate_to_json(schema, request.predicate)},
                {"groupBy", std::move(groups)},
                {"includeZeroGroups", request.include_zero_groups}}
        .dump();
}

std::string answer_to_json(const QueryAnswer& answer) {
    return detail::json{{"expectation", answer.expectation}, {"rounded", answer.rounded}, {"elapsedMs", answer.elapsed_ms}}
        .dump();
}

std::string groupby_to_json(const Schema& schema, const std::vector<AttrId>& attributes,
                            const std::vector<GroupRow>& rows, double elapsed_ms) {
    using detail::json;
    json names = json::array();
    for (auto a : attributes) names.push_back(schema[a].name());
    json out_rows = json::array();
    for (const auto& r : rows) {
        json group = json::object();
        for (std::size_t i = 0; i < attributes.size(); ++i)
            group[schema[attributes[i]].name()] = schema[attributes[i]].label(r.values[i]);
        out_rows.push_back(json{{"group", std::move(group)},
                                {"expectation", r.answer.expectation},
                                {"rounded", r.answer.rounded}});
    }
    return json{{"groupBy", std::move(names)}, {"rows", std::move(out_rows)}, {"elapsedMs", elapsed_ms}}.dump();
}

}  // namespace maxent
