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

#include <maxent/serialize.hpp>

#include <maxent/ingest.hpp>

#include "json_codec.hpp"

#include <fstream>
#include <sstream>

namespace maxent {

namespace {

using detail::json;

const char* kind_tag(NodeKind k) {
    switch (k) {
        case NodeKind::variable: return "var";
        case NodeKind::correction: return "corr";
        case NodeKind::sum1d: return "sum1d";
        case NodeKind::sum: return "sum";
        case NodeKind::product: return "prod";
    }
    return "sum";
}

NodeKind kind_from_tag(const std::string& t) {
    if (t == "var") return NodeKind::variable;
    if (t == "corr") return NodeKind::correction;
    if (t == "sum1d") return NodeKind::sum1d;
    if (t == "sum") return NodeKind::sum;
    if (t == "prod") return NodeKind::product;
    throw FormatError("unknown polynomial node kind '" + t + "'");
}

json diagnostics_json(const SolveDiagnostics& d) {
    json trace = json::array();
    for (const auto& s : d.trace) trace.push_back(json::array({s.sweep, s.max_residual, s.dual}));
    return json{{"sweeps", d.sweeps},
                {"max_residual", d.max_residual},
                {"converged", d.converged},
                {"initial_dual", d.initial_dual},
                {"trace", std::move(trace)}};
}

SolveDiagnostics diagnostics_from_json(const json& j) {
    SolveDiagnostics d;
    d.sweeps = j.at("sweeps").get<std::size_t>();
    d.max_residual = j.at("max_residual").get<double>();
    d.converged = j.at("converged").get<bool>();
    d.initial_dual = j.at("initial_dual").get<double>();
    for (const auto& t : j.at("trace"))
        d.trace.push_back({t.at(0).get<std::size_t>(), t.at(1).get<double>(), t.at(2).get<double>()});
    return d;
}

}  // namespace

std::string serialize_summary(const Summary& summary) {
    const auto& schema = summary.schema();
    const auto& stats = summary.statistics();
    json statistics = json::array();
    for (const auto& s : stats.all()) {
        statistics.push_back(json{{"id", s.id},
                                  {"kind", s.is_one_d() ? "1d" : "multi"},
                                  {"clauses", detail::predicate_to_json(schema, s.predicate)},
                                  {"target", s.target},
                                  {"alpha", summary.alpha()[s.id]}});
    }
    json nodes = json::array();
    for (const auto& n : summary.polynomial().nodes()) {
        json jn{{"k", kind_tag(n.kind)}};
        switch (n.kind) {
            case NodeKind::variable:
                jn["s"] = n.stat;
                jn["a"] = n.attr;
                jn["v"] = n.value;
                break;
            case NodeKind::correction:
                jn["s"] = n.stat;
                jn["g"] = n.group;
                break;
            case NodeKind::sum1d:
                jn["a"] = n.attr;
                jn["c"] = n.children;
                break;
            default: jn["c"] = n.children;
        }
        nodes.push_back(std::move(jn));
    }
    json doc{{"format", "maxent-summary"},
             {"version", kSummaryFormatVersion},
             {"n", summary.n()},
             {"schema", detail::schema_config_to_json_value(schema_to_config(schema))},
             {"statistics", std::move(statistics)},
             {"polynomial", {{"nodes", std::move(nodes)}}},
             {"diagnostics", diagnostics_json(summary.diagnostics())}};
    return doc.dump();
}

Summary load_summary(const std::string& document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("summary document does not parse: ") + e.what());
    }
    try {
        if (!doc.is_object() || doc.value("format", std::string()) != "maxent-summary")
            throw FormatError("not a summary document");
        const int version = doc.at("version").get<int>();
        if (version != kSummaryFormatVersion)
            throw FormatError("unsupported summary format version " + std::to_string(version) + " (expected " +
                              std::to_string(kSummaryFormatVersion) + ")");
        Schema schema = resolve_schema(detail::schema_config_from_json_value(doc.at("schema")));
        StatisticSet stats(schema);
        std::vector<double> alpha;
        for (const auto& js : doc.at("statistics")) {
            const auto id = js.at("id").get<StatId>();
            if (id != stats.size()) throw FormatError("statistics are not stored in id order");
            const auto pred = detail::predicate_from_json(schema, js.at("clauses"));
            const double target = js.at("target").get<double>();
            if (js.at("kind").get<std::string>() == "1d") {
                const auto attrs = pred.constrained();
                if (attrs.size() != 1 || pred.clause(attrs[0]).kind() != Clause::Kind::point)
                    throw FormatError("1D statistic " + std::to_string(id) + " is not a point clause");
                stats.add_one_d(attrs[0], pred.clause(attrs[0]).lo(), target);
            } else {
                stats.add_multi(pred, target);
            }
            alpha.push_back(js.at("alpha").get<double>());
        }
        std::vector<PolyNode> nodes;
        for (const auto& jn : doc.at("polynomial").at("nodes")) {
            PolyNode n;
            n.kind = kind_from_tag(jn.at("k").get<std::string>());
            if (jn.contains("s")) n.stat = jn.at("s").get<StatId>();
            if (jn.contains("a")) n.attr = jn.at("a").get<AttrId>();
            if (jn.contains("v")) n.value = jn.at("v").get<ValueIndex>();
            if (jn.contains("g")) n.group = jn.at("g").get<std::uint32_t>();
            if (jn.contains("c")) n.children = jn.at("c").get<std::vector<NodeId>>();
            nodes.push_back(std::move(n));
        }
        auto poly = std::make_shared<const CompressedPolynomial>(
            CompressedPolynomial::from_nodes(std::move(nodes), stats.size()));
        const double n = doc.at("n").get<double>();
        Summary s(std::move(schema), std::move(stats), n, std::move(poly), std::move(alpha));
        if (doc.contains("diagnostics")) s.set_diagnostics(diagnostics_from_json(doc.at("diagnostics")));
        return s;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed summary document: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("malformed summary document: ") + e.what());
    } catch (const DomainError& e) {
        throw FormatError(std::string("malformed summary document: ") + e.what());
    } catch (const SchemaError& e) {
        throw FormatError(std::string("malformed summary document: ") + e.what());
    }
}

void save_summary_file(const Summary& summary, const std::filesystem::path& path) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write " + tmp);
        out << serialize_summary(summary);
        if (!out) throw FormatError("write to " + tmp + " failed");
    }
    std::filesystem::rename(tmp, path);
}

Summary load_summary_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return load_summary(buf.str());
}

std::string summary_schema_json(const Summary& summary) {
    const auto& schema = summary.schema();
    const auto& stats = summary.statistics();
    json attrs = json::array();
    for (AttrId a = 0; a < schema.size(); ++a) {
        const auto& m = schema[a];
        attrs.push_back(json{{"name", m.name()},
                             {"kind", m.kind() == AttributeKind::numeric ? "numeric" : "categorical"},
                             {"domain", m.labels()},
                             {"oneDStatistics", stats.one_d(a).size()}});
    }
    json groups = json::array();
    for (const auto& g : stats.groups()) {
        json names = json::array();
        for (auto a : g.attributes) names.push_back(schema[a].name());
        groups.push_back(json{{"attributes", std::move(names)}, {"statistics", g.members.size()}});
    }
    return json{{"n", summary.n()},
                {"attributes", std::move(attrs)},
                {"pairs", std::move(groups)},
                {"statistics", stats.size()}}
        .dump();
}

}  // namespace maxent
