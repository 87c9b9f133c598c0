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

#include <maxent/solver.hpp>

#include "json_codec.hpp"

#include <cmath>

namespace maxent {

SolverConfig parse_solver_config(const std::string& json_text) {
    SolverConfig c;
    try {
        const auto j = detail::json::parse(json_text);
        if (!j.is_object()) throw ConfigError("solver config must be an object");
        c.threshold = j.value("threshold", c.threshold);
        c.max_sweeps = j.value("max_sweeps", c.max_sweeps);
        c.init = j.value("init", c.init);
        c.warm_start = j.value("warm_start", c.warm_start);
    } catch (const detail::json::exception& e) {
        throw ConfigError(std::string("solver config: ") + e.what());
    }
    if (!(c.threshold > 0.0)) throw ConfigError("solver threshold must be positive");
    if (c.max_sweeps == 0) throw ConfigError("solver max_sweeps must be at least 1");
    if (!(c.init > 0.0)) throw ConfigError("solver init must be positive");
    return c;
}

namespace {

std::shared_ptr<const CompressedPolynomial> build(const StatisticSet& stats, BuildMethod method) {
    return std::make_shared<const CompressedPolynomial>(method == BuildMethod::naive ? build_compressed_naive(stats)
                                                                                     : build_compressed_optimized(stats));
}

}  // namespace

Summary::Summary(Schema schema, StatisticSet stats, double n, BuildMethod method, double init)
    : schema_(std::move(schema)), stats_(std::move(stats)), n_(n) {
    ev_ = Evaluator(build(stats_, method), initial_alpha(init));
}

Summary::Summary(Schema schema, StatisticSet stats, double n, std::shared_ptr<const CompressedPolynomial> poly,
                 std::vector<double> alpha)
    : schema_(std::move(schema)), stats_(std::move(stats)), n_(n), ev_(std::move(poly), std::move(alpha)) {
    if (ev_.polynomial().statistic_count() != stats_.size())
        throw ConfigError("polynomial and statistic set disagree on the statistic count");
}

std::vector<double> Summary::initial_alpha(double init) const {
    std::vector<double> a(stats_.size(), init);
    for (StatId j = 0; j < stats_.size(); ++j)
        if (stats_[j].target == 0.0) a[j] = 0.0;
    return a;
}

double expected_count(const Summary& summary, StatId j) {
    const auto& ev = summary.evaluator();
    const double p = ev.value();
    if (!(p > 0.0)) throw ModelError("polynomial evaluates to zero; the model is degenerate");
    const double alpha = ev.alpha(j);
    if (alpha == 0.0) return 0.0;
    const auto [b, a] = ev.partial(j);
    (void)b;
    return summary.n() * alpha * a / p;
}

double update_alpha(Summary& summary, StatId j) {
    auto& ev = summary.evaluator();
    const double s = summary.statistics()[j].target;
    const double n = summary.n();
    double next = ev.alpha(j);
    if (s <= 0.0) {
        next = 0.0;
    } else if (s >= n) {
        // Every other statistic of the block is 0; any positive value satisfies the constraint.
        if (next <= 0.0) next = 1.0;
    } else {
        const auto [b, a] = ev.partial(j);
        if (!(a > 0.0))
            throw ModelError("statistic " + std::to_string(j) + " has target " + std::to_string(s) +
                             " but no tuple of the model can satisfy it");
        if (!(b > 0.0))
            throw ModelError("statistic " + std::to_string(j) + " must hold every tuple but its target is below n");
        next = s * b / ((n - s) * a);
    }
    ev.set_alpha(j, next);
    return next;
}

double dual_value(const Summary& summary) {
    const double p = summary.evaluator().value();
    if (!(p > 0.0)) throw ModelError("polynomial evaluates to zero; the model is degenerate");
    double psi = 0.0;
    const auto& stats = summary.statistics();
    for (StatId j = 0; j < stats.size(); ++j) {
        const double s = stats[j].target;
        if (s == 0.0) continue;
        psi += s * std::log(summary.evaluator().alpha(j));
    }
    return psi - summary.n() * std::log(p);
}

Residuals constraint_residuals(const Summary& summary) {
    Residuals r;
    const auto& stats = summary.statistics();
    r.per_statistic.resize(stats.size());
    for (StatId j = 0; j < stats.size(); ++j) {
        r.per_statistic[j] = std::abs(stats[j].target - expected_count(summary, j));
        r.max = std::max(r.max, r.per_statistic[j]);
    }
    return r;
}

SolveDiagnostics solve(Summary& summary, const SolverConfig& config) {
    if (!(config.threshold > 0.0) || config.max_sweeps == 0) throw ConfigError("invalid solver config");
    if (!config.warm_start) {
        summary.evaluator().assign(summary.initial_alpha(config.init));
    } else {
        // Statistics that gained mass since the last solve start from the initial value again.
        const auto& stats = summary.statistics();
        for (StatId j = 0; j < stats.size(); ++j)
            if (stats[j].target > 0.0 && summary.evaluator().alpha(j) == 0.0) summary.evaluator().set_alpha(j, config.init);
    }
    SolveDiagnostics d;
    d.initial_dual = dual_value(summary);
    d.max_residual = constraint_residuals(summary).max;
    if (d.max_residual < config.threshold) {
        d.converged = true;
        summary.set_diagnostics(d);
        return d;
    }
    const auto order = summary.statistics().sweep_order();
    for (std::size_t sweep = 1; sweep <= config.max_sweeps; ++sweep) {
        for (auto j : order) update_alpha(summary, j);
        d.sweeps = sweep;
        d.max_residual = constraint_residuals(summary).max;
        d.trace.push_back({sweep, d.max_residual, dual_value(summary)});
        if (d.max_residual < config.threshold) {
            d.converged = true;
            break;
        }
    }
    summary.set_diagnostics(d);
    return d;
}

}  // namespace maxent
