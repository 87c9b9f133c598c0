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

// Command line front end: build, query, groupby, update, eval, serve.

#include <maxent/evalkit.hpp>
#include <maxent/ingest.hpp>
#include <maxent/maintenance.hpp>
#include <maxent/pipeline.hpp>
#include <maxent/query.hpp>
#include <maxent/serialize.hpp>
#include <maxent/service.hpp>
#include <maxent/synthetic.hpp>

#include "CLI11.hpp"
#include "json.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace maxent;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Either a file path or inline JSON text.
std::string json_arg(const std::string& arg) {
    if (!arg.empty() && (arg.front() == '{' || arg.front() == '[')) return arg;
    return slurp(arg);
}

/// Tool config file: {"schema": {...}, "build": {...}, "maintenance": {...}, "serve": {...}}; all optional.
struct ToolConfig {
    json doc = json::object();

    BuildConfig build() const { return parse_build_config(doc.contains("build") ? doc["build"].dump() : "{}"); }
    std::optional<SchemaConfig> schema() const {
        if (!doc.contains("schema")) return std::nullopt;
        return parse_schema_config(doc["schema"].dump());
    }
    RebuildPolicy policy() const {
        RebuildPolicy p;
        if (!doc.contains("maintenance")) return p;
        const auto& m = doc["maintenance"];
        const auto kind = m.value("policy", std::string("update_threshold"));
        if (kind == "manual")
            p.kind = RebuildPolicy::Kind::manual;
        else if (kind != "update_threshold")
            throw ConfigError("unknown rebuild policy '" + kind + "'");
        p.threshold = m.value("rebuild_threshold", p.threshold);
        return p;
    }
    SolverConfig maintenance_solver() const {
        if (doc.contains("maintenance") && doc["maintenance"].contains("solver"))
            return parse_solver_config(doc["maintenance"]["solver"].dump());
        return {};
    }
    std::string host() const { return doc.contains("serve") ? doc["serve"].value("host", "127.0.0.1") : "127.0.0.1"; }
    int port() const { return doc.contains("serve") ? doc["serve"].value("port", 8080) : 8080; }
};

ToolConfig load_tool_config(const std::string& path) {
    ToolConfig c;
    if (path.empty()) return c;
    try {
        c.doc = json::parse(slurp(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!c.doc.is_object()) throw ConfigError(path + ": config must be a JSON object");
    return c;
}

fs::path data_dir(const std::string& flag) { return flag.empty() ? SummaryRegistry::default_data_dir() : fs::path(flag); }

// A summary named by file path, or by id in the data directory.
Summary resolve_summary(const std::string& ref, const std::string& dir) {
    if (fs::is_regular_file(ref)) {
        // Registry documents wrap the summary together with its metadata.
        const auto doc = json::parse(slurp(ref));
        if (doc.is_object() && doc.contains("summary") && doc.contains("meta")) return load_summary(doc["summary"].dump());
        return load_summary(doc.dump());
    }
    SummaryRegistry registry(data_dir(dir));
    auto e = registry.find(ref);
    if (!e) throw ConfigError("no summary file or id '" + ref + "'");
    return *e->live->snapshot();
}

SchemaConfig schema_for(const std::string& flag, const ToolConfig& cfg) {
    if (!flag.empty()) return parse_schema_config(json_arg(flag));
    if (auto s = cfg.schema()) return *s;
    throw ConfigError("a schema is required (--schema or \"schema\" in --config)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Maximum-entropy summaries for approximate counting queries"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, dir;
    app.add_option("--config", config_path, "Tool config JSON file")->check(CLI::ExistingFile);
    app.add_option("--data-dir", dir, "Summary directory (default $MAXENT_DATA_DIR or ./maxent-data)");

    // build
    auto* build = app.add_subcommand("build", "Build a summary from a CSV file");
    std::string csv, schema_arg, out, name, id;
    std::string report_path;
    build->add_option("--data", csv, "CSV file with a header row")->required()->check(CLI::ExistingFile);
    build->add_option("--schema", schema_arg, "Schema config file or inline JSON");
    build->add_option("--out", out, "Write the summary document here instead of registering it");
    build->add_option("--name", name, "Display name");
    build->add_option("--id", id, "Summary id (default: next free number)");
    build->add_option("--report", report_path, "Write the build report JSON here");

    // query
    auto* query = app.add_subcommand("query", "Answer a count query");
    std::string summary_ref, query_arg;
    query->add_option("--summary", summary_ref, "Summary file or id")->required();
    query->add_option("--query", query_arg, "Query JSON file or inline JSON")->required();

    // groupby
    auto* groupby = app.add_subcommand("groupby", "Answer a group-by count query");
    std::uint64_t cap = kDefaultGroupCap;
    groupby->add_option("--summary", summary_ref, "Summary file or id")->required();
    groupby->add_option("--query", query_arg, "Query JSON with groupBy, file or inline")->required();
    groupby->add_option("--cap", cap, "Maximum number of cells");

    // update
    auto* update = app.add_subcommand("update", "Apply tuple inserts/deletes to a stored summary");
    std::string updates_arg;
    bool no_refresh = false;
    update->add_option("--summary", summary_ref, "Summary id, or summary file (rewritten in place)")->required();
    update->add_option("--updates", updates_arg, "Update JSON file or inline JSON")->required();
    update->add_flag("--no-refresh", no_refresh, "Only record the deltas; skip re-solving");

    // eval
    auto* eval = app.add_subcommand("eval", "Benchmark against sampling baselines");
    std::size_t rows = 100000;
    std::uint64_t seed = 7;
    double rate = 0.01;
    std::vector<std::string> templates;
    std::string eval_json;
    bool traces = false;
    eval->add_option("--data", csv, "CSV file (default: synthetic data)")->check(CLI::ExistingFile);
    eval->add_option("--schema", schema_arg, "Schema config for --data");
    eval->add_option("--rows", rows, "Synthetic row count");
    eval->add_option("--seed", seed, "Query-set seed");
    eval->add_option("--rate", rate, "Sample rate for the baselines");
    eval->add_option("--template", templates, "Comma-separated attribute names; repeatable");
    eval->add_option("--json", eval_json, "Write the full report JSON here");
    eval->add_flag("--traces", traces, "Include per-query traces in the JSON report");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string host;
    int port = -1;
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port (0 picks a free one)");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = load_tool_config(config_path);

        if (*build) {
            BuildRequest req{name, csv, schema_for(schema_arg, cfg), cfg.build()};
            auto loaded = load_csv(req.dataset, req.schema);
            std::cerr << "read " << loaded.report.rows_read << " rows, dropped " << loaded.report.dropped
                      << ", clamped " << loaded.report.clamped << "\n";
            if (!out.empty()) {
                BuildReport rep;
                auto s = build_summary(loaded.dataset, req.config, &rep);
                save_summary_file(s, out);
                const auto rj = build_report_json(rep, s.schema());
                if (!report_path.empty()) std::ofstream(report_path) << rj;
                std::cout << json{{"summary", out}, {"n", s.n()}, {"statistics", s.statistics().size()},
                                  {"converged", rep.solve.converged}, {"maxResidual", rep.solve.max_residual}}
                                 .dump()
                          << "\n";
                return 0;
            }
            SummaryRegistry registry(data_dir(dir), cfg.policy(), cfg.maintenance_solver());
            BuildReport rep;
            auto s = build_summary(loaded.dataset, req.config, &rep);
            if (!report_path.empty()) std::ofstream(report_path) << build_report_json(rep, s.schema());
            SummaryMetadata meta;
            meta.id = id;
            meta.name = name.empty() ? fs::path(csv).stem().string() : name;
            meta.source = fs::absolute(csv).string();
            meta.source_hash = fnv1a_hex(slurp(csv));
            meta.config = build_config_to_json(req.config);
            meta.schema_config = schema_config_to_json(schema_to_config(loaded.dataset.schema()));
            const double n = s.n();
            const auto stats = s.statistics().size();
            const auto new_id = registry.add(std::move(s), std::move(meta), std::move(loaded.dataset));
            std::cout << json{{"id", new_id}, {"n", n}, {"statistics", stats}, {"converged", rep.solve.converged},
                              {"maxResidual", rep.solve.max_residual}}
                             .dump()
                      << "\n";
            return 0;
        }

        if (*query) {
            const auto s = resolve_summary(summary_ref, dir);
            const auto q = parse_query_json(s.schema(), json_arg(query_arg));
            if (!q.group_by.empty()) throw QueryError("query has groupBy; use the groupby subcommand");
            std::cout << answer_to_json(answer_count(s, q.predicate)) << "\n";
            return 0;
        }

        if (*groupby) {
            const auto s = resolve_summary(summary_ref, dir);
            const auto q = parse_query_json(s.schema(), json_arg(query_arg));
            GroupByQuery g{q.group_by, q.predicate, q.include_zero_groups, cap};
            const auto t0 = std::chrono::steady_clock::now();
            const auto rows_out = answer_groupby(s, g);
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            std::cout << groupby_to_json(s.schema(), g.attributes, rows_out, ms) << "\n";
            return 0;
        }

        if (*update) {
            const auto body = json_arg(updates_arg);
            if (fs::is_regular_file(summary_ref)) {
                auto s = load_summary_file(summary_ref);
                for (const auto& d : parse_update_json(s.schema(), body)) apply_update(s, d);
                if (!no_refresh) update_params(s, cfg.maintenance_solver());
                save_summary_file(s, summary_ref);
                std::cout << json{{"n", s.n()}, {"pending", no_refresh}}.dump() << "\n";
                return 0;
            }
            SummaryRegistry registry(data_dir(dir), cfg.policy(), cfg.maintenance_solver());
            auto e = registry.find(summary_ref);
            if (!e) throw ConfigError("no summary file or id '" + summary_ref + "'");
            for (const auto& d : parse_update_json(e->live->snapshot()->schema(), body)) e->live->apply_update(d);
            if (no_refresh) {
                std::cerr << "deltas are not persisted without a refresh\n";
            } else {
                e->live->maintain();
                registry.persist(summary_ref);
            }
            std::cout << status_to_json(e->live->status()) << "\n";
            return 0;
        }

        if (*eval) {
            Dataset ds;
            if (!csv.empty())
                ds = load_csv(csv, schema_for(schema_arg, cfg)).dataset;
            else
                ds = make_synthetic({.rows = rows});
            BenchmarkSpec spec;
            spec.seed = seed;
            for (const auto& t : templates) {
                std::vector<AttrId> attrs;
                std::stringstream ss(t);
                for (std::string part; std::getline(ss, part, ',');) attrs.push_back(ds.schema().index_of(part));
                spec.templates.push_back(attrs);
            }
            if (spec.templates.empty()) {
                for (AttrId a = 0; a < ds.arity(); ++a)
                    for (AttrId b = a + 1; b < ds.arity(); ++b) spec.templates.push_back({a, b});
            }
            auto with2d = cfg.build();
            auto no2d = with2d;
            no2d.selection.pair_budget = 0;
            const auto s2 = build_summary(ds, with2d);
            const auto s0 = build_summary(ds, no2d);
            const auto uniform = uniform_sample(ds, rate, seed);
            std::vector<AttrId> strata{0};
            if (ds.arity() > 2) strata.push_back(2);
            const auto strat = stratified_sample(ds, strata, rate, seed);
            std::vector<Method> methods{
                {"MaxEnt-2D", [&](const Predicate& p) { return answer_count(s2, p).expectation; }},
                {"MaxEnt-No2D", [&](const Predicate& p) { return answer_count(s0, p).expectation; }},
                {"Uniform", [&](const Predicate& p) { return sample_estimate(uniform, p); }},
                {"Stratified", [&](const Predicate& p) { return sample_estimate(strat, p); }},
            };
            const auto report = run_benchmark(ds, methods, spec);
            std::cout << report_to_table(report, ds.schema());
            if (!eval_json.empty()) std::ofstream(eval_json) << report_to_json(report, ds.schema(), traces);
            return 0;
        }

        if (*serve) {
            SummaryRegistry registry(data_dir(dir), cfg.policy(), cfg.maintenance_solver());
            for (const auto& err : registry.load_errors()) std::cerr << "skipped " << err << "\n";
            // Block the signals before any server thread starts so only sigwait sees them.
            sigset_t set;
            sigemptyset(&set);
            sigaddset(&set, SIGINT);
            sigaddset(&set, SIGTERM);
            pthread_sigmask(SIG_BLOCK, &set, nullptr);
            Server server(registry);
            const auto h = host.empty() ? cfg.host() : host;
            const int p = port < 0 ? cfg.port() : port;
            const int bound = server.start(h, p);
            std::cerr << "serving " << registry.size() << " summaries from " << data_dir(dir).string() << " on " << h
                      << ":" << bound << "\n";
            int sig = 0;
            sigwait(&set, &sig);
            server.stop();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
