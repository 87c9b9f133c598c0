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

#include <maxent/pipeline.hpp>

#include "json_codec.hpp"

#include <chrono>

namespace maxent {

BuildConfig parse_build_config(const std::string& json_text) {
    using detail::json;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("build config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("build config must be an object");
    BuildConfig c;
    if (j.contains("selection")) c.selection = parse_selection_config(j.at("selection").dump());
    if (j.contains("solver")) c.solver = parse_solver_config(j.at("solver").dump());
    const auto builder = j.value("builder", std::string("optimized"));
    if (builder == "optimized")
        c.method = BuildMethod::optimized;
    else if (builder == "naive")
        c.method = BuildMethod::naive;
    else
        throw ConfigError("unknown builder '" + builder + "'");
    return c;
}

std::string build_config_to_json(const BuildConfig& config) {
    using detail::json;
    json j;
    j["selection"] = json::parse(selection_config_to_json(config.selection));
    j["solver"] = json{{"threshold", config.solver.threshold},
                       {"max_sweeps", config.solver.max_sweeps},
                       {"init", config.solver.init},
                       {"warm_start", config.solver.warm_start}};
    j["builder"] = config.method == BuildMethod::naive ? "naive" : "optimized";
    return j.dump(2);
}

Summary build_summary(const Dataset& ds, const BuildConfig& config, BuildReport* report) {
    using Clock = std::chrono::steady_clock;
    auto ms = [](Clock::time_point a, Clock::time_point b) {
        return std::chrono::duration<double, std::milli>(b - a).count();
    };
    const auto t0 = Clock::now();
    auto selected = select_statistics(ds, config.selection);
    const auto t1 = Clock::now();
    Summary summary(ds.schema(), std::move(selected.statistics), static_cast<double>(ds.size()), config.method,
                    config.solver.init);
    const auto t2 = Clock::now();
    SolverConfig sc = config.solver;
    sc.warm_start = false;
    auto diag = solve(summary, sc);
    const auto t3 = Clock::now();
    if (report) {
        report->selection = std::move(selected.report);
        report->solve = std::move(diag);
        report->size = summary.polynomial().size_report();
        report->select_ms = ms(t0, t1);
        report->build_ms = ms(t1, t2);
        report->solve_ms = ms(t2, t3);
    }
    return summary;
}

std::string build_report_json(const BuildReport& report, const Schema& schema) {
    using detail::json;
    json trace = json::array();
    for (const auto& s : report.solve.trace)
        trace.push_back(json{{"sweep", s.sweep}, {"max_residual", s.max_residual}, {"dual", s.dual}});
    return json{{"selection", json::parse(selection_report_json(report.selection, schema))},
                {"solve",
                 {{"sweeps", report.solve.sweeps},
                  {"max_residual", report.solve.max_residual},
                  {"converged", report.solve.converged},
                  {"initial_dual", report.solve.initial_dual},
                  {"trace", std::move(trace)}}},
                {"polynomial",
                 {{"one_d_refs", report.size.one_d_refs},
                  {"correction_terms", report.size.correction_terms},
                  {"nodes", report.size.nodes},
                  {"top_level_terms", report.size.top_level_terms},
                  {"groups", report.size.groups}}},
                {"timings_ms", {{"select", report.select_ms}, {"build", report.build_ms}, {"solve", report.solve_ms}}}}
        .dump(2);
}

}  // namespace maxent
