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

#include <memory>
#include <string>
#include <vector>

namespace maxent {

enum class BuildMethod { optimized, naive };

struct SolverConfig {
    double threshold = 1e-6;
    std::size_t max_sweeps = 30;
    double init = 1.0;
    bool warm_start = false;
};

SolverConfig parse_solver_config(const std::string& json_text);

struct SweepRecord {
    std::size_t sweep = 0;
    double max_residual = 0.0;
    double dual = 0.0;
};

struct SolveDiagnostics {
    std::size_t sweeps = 0;
    double max_residual = 0.0;
    bool converged = false;
    double initial_dual = 0.0;
    std::vector<SweepRecord> trace;
};

/// The queryable artifact: polynomial, one value per statistic, the statistics, n and schema.
class Summary {
public:
    Summary() = default;
    /// Builds P and initializes values: `init` everywhere, 0 for statistics with s = 0.
    Summary(Schema schema, StatisticSet stats, double n, BuildMethod method = BuildMethod::optimized,
            double init = 1.0);
    /// Reassembles a stored summary.
    Summary(Schema schema, StatisticSet stats, double n, std::shared_ptr<const CompressedPolynomial> poly,
            std::vector<double> alpha);

    const Schema& schema() const noexcept { return schema_; }
    const StatisticSet& statistics() const noexcept { return stats_; }
    double n() const noexcept { return n_; }
    const CompressedPolynomial& polynomial() const { return ev_.polynomial(); }
    const Evaluator& evaluator() const noexcept { return ev_; }
    Evaluator& evaluator() noexcept { return ev_; }
    const std::vector<double>& alpha() const noexcept { return ev_.alpha(); }

    void set_target(StatId j, double s) { stats_.set_target(j, s); }
    void set_n(double n) { n_ = n; }

    const SolveDiagnostics& diagnostics() const noexcept { return diag_; }
    void set_diagnostics(SolveDiagnostics d) { diag_ = std::move(d); }

    /// Initial values for the current targets.
    std::vector<double> initial_alpha(double init = 1.0) const;

private:
    Schema schema_;
    StatisticSet stats_;
    double n_ = 0.0;
    Evaluator ev_;
    SolveDiagnostics diag_;
};

/// n * alpha_j * dP/dalpha_j / P.
double expected_count(const Summary& summary, StatId j);

/// One coordinate step; commits and returns the new value.
double update_alpha(Summary& summary, StatId j);

/// Coordinate sweeps until the max residual drops below the threshold or the sweep budget
/// runs out. Non-convergence is reported in the diagnostics, not thrown.
SolveDiagnostics solve(Summary& summary, const SolverConfig& config = {});

/// sum_j s_j ln(alpha_j) - n ln(P), with 0 ln 0 = 0.
double dual_value(const Summary& summary);

struct Residuals {
    std::vector<double> per_statistic;
    double max = 0.0;
};

Residuals constraint_residuals(const Summary& summary);

}  // namespace maxent
