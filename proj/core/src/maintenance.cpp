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

#include <maxent/maintenance.hpp>

#include "json_codec.hpp"

namespace maxent {

namespace {

void check_tuple(const StatisticSet& stats, const TupleDelta& delta) {
    if (delta.sign != 1 && delta.sign != -1) throw UpdateRejected("delta sign must be +1 or -1");
    if (delta.tuple.size() != stats.arity()) throw UpdateRejected("tuple arity does not match the summary");
    for (AttrId a = 0; a < stats.arity(); ++a)
        if (delta.tuple[a] >= stats.domain_sizes()[a]) throw UpdateRejected("tuple value outside the domain");
}

void check_delete(const StatisticSet& stats, double n, const std::vector<StatId>& matched) {
    if (n < 1.0) throw UpdateRejected("delete would make n negative");
    for (auto j : matched)
        if (stats[j].target < 1.0)
            throw UpdateRejected("delete would make statistic " + std::to_string(j) + " negative");
}

}  // namespace

void apply_update(StatisticSet& stats, double& n, const TupleDelta& delta) {
    check_tuple(stats, delta);
    const auto matched = stats.matching(delta.tuple);
    if (delta.sign < 0) check_delete(stats, n, matched);
    for (auto j : matched) stats.set_target(j, stats[j].target + delta.sign);
    n += delta.sign;
}

void apply_update(Summary& summary, const TupleDelta& delta) {
    StatisticSet stats = summary.statistics();
    double n = summary.n();
    apply_update(stats, n, delta);
    for (StatId j = 0; j < stats.size(); ++j) summary.set_target(j, stats[j].target);
    summary.set_n(n);
}

SolveDiagnostics update_params(Summary& summary, SolverConfig config) {
    config.warm_start = true;
    return solve(summary, config);
}

bool time_to_rebuild(const RebuildPolicy& policy, std::size_t updates_since_rebuild) {
    if (policy.kind == RebuildPolicy::Kind::manual) return false;
    return updates_since_rebuild >= policy.threshold;
}

Summary rebuild(const Dataset& ds, const BuildConfig& config) { return build_summary(ds, config); }

std::vector<TupleDelta> parse_update_json(const Schema& schema, const std::string& json_text) {
    using detail::json;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw UpdateRejected(std::string("malformed update JSON: ") + e.what());
    }
    json list;
    if (j.is_array())
        list = j;
    else if (j.is_object() && j.contains("updates"))
        list = j.at("updates");
    else
        list = json::array({j});
    std::vector<TupleDelta> out;
    try {
        for (const auto& u : list) {
            if (!u.is_object() || !u.contains("tuple") || !u.at("tuple").is_object())
                throw UpdateRejected("update needs a 'tuple' object");
            TupleDelta d;
            const auto op = u.value("op", std::string("insert"));
            if (op == "insert")
                d.sign = 1;
            else if (op == "delete")
                d.sign = -1;
            else
                throw UpdateRejected("unknown update op '" + op + "'");
            d.tuple.assign(schema.size(), 0);
            std::vector<bool> seen(schema.size(), false);
            for (const auto& [name, value] : u.at("tuple").items()) {
                const auto a = schema.index_of(name);
                d.tuple[a] = detail::resolve_value(schema[a], value);
                seen[a] = true;
            }
            for (AttrId a = 0; a < schema.size(); ++a)
                if (!seen[a]) throw UpdateRejected("update tuple lacks attribute '" + schema[a].name() + "'");
            out.push_back(std::move(d));
        }
    } catch (const json::exception& e) {
        throw UpdateRejected(std::string("malformed update: ") + e.what());
    } catch (const DomainError& e) {
        throw UpdateRejected(e.what());
    } catch (const SchemaError& e) {
        throw UpdateRejected(e.what());
    }
    return out;
}

std::string status_to_json(const MaintenanceStatus& s) {
    using detail::json;
    return json{{"updatesSinceRebuild", s.updates_since_rebuild},
                {"pending", s.pending},
                {"solving", s.solving},
                {"rebuilds", s.rebuilds},
                {"n", s.n},
                {"lastSolve",
                 {{"sweeps", s.last_solve.sweeps},
                  {"maxResidual", s.last_solve.max_residual},
                  {"converged", s.last_solve.converged}}}}
        .dump();
}

struct LiveSummary::SolveGuard {
    std::atomic<bool>& flag;
    explicit SolveGuard(std::atomic<bool>& f) : flag(f) {
        if (flag.exchange(true)) throw BusyError("a solve or rebuild is already running");
    }
    ~SolveGuard() { flag.store(false); }
};

LiveSummary::LiveSummary(Summary initial, RebuildPolicy policy, SolverConfig solver)
    : pending_stats_(initial.statistics()), pending_n_(initial.n()), policy_(policy), solver_(solver) {
    if (policy_.kind == RebuildPolicy::Kind::update_threshold && policy_.threshold == 0)
        throw ConfigError("rebuild threshold must be at least 1");
    snapshot_ = std::make_shared<const Summary>(std::move(initial));
}

void LiveSummary::attach_dataset(Dataset ds, BuildConfig config) {
    std::lock_guard lock(mu_);
    dataset_ = std::move(ds);
    build_config_ = std::move(config);
}

bool LiveSummary::has_dataset() const {
    std::lock_guard lock(mu_);
    return dataset_.has_value();
}

std::shared_ptr<const Summary> LiveSummary::snapshot() const {
    std::lock_guard lock(mu_);
    return snapshot_;
}

void LiveSummary::apply_update(const TupleDelta& delta) {
    std::lock_guard lock(mu_);
    check_tuple(pending_stats_, delta);
    if (delta.sign < 0) {
        check_delete(pending_stats_, pending_n_, pending_stats_.matching(delta.tuple));
        if (dataset_ && !dataset_->remove_one(delta.tuple)) throw UpdateRejected("tuple to delete is not in the data");
    } else if (dataset_) {
        dataset_->append(delta.tuple);
    }
    maxent::apply_update(pending_stats_, pending_n_, delta);
    if (rebuilding_) rebuild_log_.push_back(delta);
    ++version_;
    ++counter_;
}

SolveDiagnostics LiveSummary::update_params() {
    SolveGuard guard(busy_);
    std::unique_lock lock(mu_);
    if (version_ == solved_version_) return snapshot_->diagnostics();
    Summary work = *snapshot_;
    for (StatId j = 0; j < pending_stats_.size(); ++j) work.set_target(j, pending_stats_[j].target);
    work.set_n(pending_n_);
    const auto version = version_;
    lock.unlock();

    auto diag = maxent::update_params(work, solver_);

    lock.lock();
    snapshot_ = std::make_shared<const Summary>(std::move(work));
    solved_version_ = version;
    return diag;
}

bool LiveSummary::time_to_rebuild() const {
    std::lock_guard lock(mu_);
    return maxent::time_to_rebuild(policy_, counter_);
}

void LiveSummary::rebuild() {
    SolveGuard guard(busy_);
    std::unique_lock lock(mu_);
    if (!dataset_) throw ConfigError("rebuild needs the source data attached");
    const Dataset data = *dataset_;
    const BuildConfig config = build_config_;
    rebuilding_ = true;
    rebuild_log_.clear();
    const auto version = version_;
    lock.unlock();

    std::optional<Summary> fresh;
    try {
        fresh.emplace(maxent::rebuild(data, config));
    } catch (...) {
        lock.lock();
        rebuilding_ = false;
        throw;
    }

    lock.lock();
    rebuilding_ = false;
    StatisticSet stats = fresh->statistics();
    double n = fresh->n();
    for (const auto& d : rebuild_log_) maxent::apply_update(stats, n, d);
    rebuild_log_.clear();
    pending_stats_ = std::move(stats);
    pending_n_ = n;
    snapshot_ = std::make_shared<const Summary>(std::move(*fresh));
    // Deltas that arrived mid-rebuild stay pending for the next refresh.
    solved_version_ = version;
    counter_ = version_ - version;
    ++rebuilds_;
}

void LiveSummary::maintain() {
    bool rebuild_now = false;
    {
        std::lock_guard lock(mu_);
        rebuild_now = dataset_.has_value() && maxent::time_to_rebuild(policy_, counter_);
    }
    if (rebuild_now)
        rebuild();
    else
        update_params();
}

std::optional<double> LiveSummary::exact_count(const Predicate& predicate) const {
    std::lock_guard lock(mu_);
    if (!dataset_) return std::nullopt;
    if (predicate.arity() != dataset_->arity()) throw SchemaError("predicate arity does not match the data");
    double count = 0.0;
    std::vector<ValueIndex> row(dataset_->arity());
    for (std::size_t r = 0; r < dataset_->size(); ++r) {
        for (AttrId a = 0; a < row.size(); ++a) row[a] = dataset_->at(r, a);
        if (predicate.matches(row)) count += 1.0;
    }
    return count;
}

MaintenanceStatus LiveSummary::status() const {
    std::lock_guard lock(mu_);
    MaintenanceStatus s;
    s.updates_since_rebuild = counter_;
    s.pending = version_ != solved_version_;
    s.solving = busy_.load();
    s.rebuilds = rebuilds_;
    s.last_solve = snapshot_->diagnostics();
    s.n = pending_n_;
    return s;
}

}  // namespace maxent
