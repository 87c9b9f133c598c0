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
#include <maxent/polynomial.hpp>
#include <maxent/select.hpp>
#include <maxent/solver.hpp>

#include <string>

namespace maxent {

struct BuildConfig {
    SelectionConfig selection;
    SolverConfig solver;
    BuildMethod method = BuildMethod::optimized;
};

/// {"selection": {...}, "solver": {...}, "builder": "optimized" | "naive"}; all sections optional.
BuildConfig parse_build_config(const std::string& json_text);
std::string build_config_to_json(const BuildConfig& config);

struct BuildReport {
    SelectionReport selection;
    SolveDiagnostics solve;
    SizeReport size;
    double select_ms = 0.0;
    double build_ms = 0.0;
    double solve_ms = 0.0;
};

/// Statistics selection, polynomial construction and solve.
Summary build_summary(const Dataset& ds, const BuildConfig& config, BuildReport* report = nullptr);

std::string build_report_json(const BuildReport& report, const Schema& schema);

}  // namespace maxent
