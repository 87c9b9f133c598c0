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
#include <maxent/pipeline.hpp>
#include <maxent/solver.hpp>

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace maxent {

/// A delete that would drive a count below zero, or a malformed tuple.
class UpdateRejected : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A maintenance operation that conflicts with a solve or rebuild in flight.
class BusyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TupleDelta {
    std::vector<ValueIndex> tuple;
    int sign = +1;  // +1 insert, -1 delete
};

/// s_j += sign for every statistic the tuple satisfies, and n += sign. Predicates are untouched.
void apply_update(StatisticSet& stats, double& n, const TupleDelta& delta);
void apply_update(Summary& summary, const TupleDelta& delta);

/// Warm-start solve against the current targets.
SolveDiagnostics update_params(Summary& summary, SolverConfig config = {});

struct RebuildPolicy {
    enum class Kind { update_threshold, manual };
    Kind kind = Kind::update_threshold;
    std::size_t threshold = 1000;  // B
};

bool time_to_rebuild(const RebuildPolicy& policy, std::size_t updates_since_rebuild);

/// Fresh statistics, polynomial and parameters from the data.
Summary rebuild(const Dataset& ds, const BuildConfig& config);

/// {tuple: {attr: label, ...}, op: insert|delete}, an array of those, or {updates: [...]}.
std::vector<TupleDelta> parse_update_json(const Schema& schema, const std::string& json_text);

struct MaintenanceStatus {
    std::size_t updates_since_rebuild = 0;
    bool pending = false;  // targets changed since the last solve
    bool solving = false;
    std::size_t rebuilds = 0;
    SolveDiagnostics last_solve;
    double n = 0.0;
};

std::string status_to_json(const MaintenanceStatus& status);

/// A summary under maintenance. One writer at a time; readers take immutable snapshots
/// and never see a half-solved state.
class LiveSummary {
public:
    explicit LiveSummary(Summary initial, RebuildPolicy policy = {}, SolverConfig solver = {});

    /// Keeps a private copy of the data so rebuild() can rerun the pipeline; it receives every delta.
    void attach_dataset(Dataset ds, BuildConfig config);
    bool has_dataset() const;

    std::shared_ptr<const Summary> snapshot() const;

    /// Applies the delta to the pending targets immediately. Throws UpdateRejected.
    void apply_update(const TupleDelta& delta);

    /// Warm-start solve over every delta applied since the last solve, then swaps the snapshot.
    /// No-op when nothing is pending. Throws BusyError if a solve or rebuild is running.
    SolveDiagnostics update_params();

    bool time_to_rebuild() const;

    /// Reruns the full pipeline on the attached data and swaps the snapshot; resets the counter.
    void rebuild();

    /// Rebuilds when the policy says so (and data is attached), otherwise refreshes parameters.
    void maintain();

    /// Exact count from the attached data, if any.
    std::optional<double> exact_count(const Predicate& predicate) const;

    MaintenanceStatus status() const;

private:
    struct SolveGuard;

    mutable std::mutex mu_;
    std::shared_ptr<const Summary> snapshot_;
    StatisticSet pending_stats_;
    double pending_n_ = 0.0;
    std::uint64_t version_ = 0;
    std::uint64_t solved_version_ = 0;
    std::size_t counter_ = 0;
    std::size_t rebuilds_ = 0;
    RebuildPolicy policy_;
    SolverConfig solver_;
    std::optional<Dataset> dataset_;
    BuildConfig build_config_;
    bool rebuilding_ = false;
    std::vector<TupleDelta> rebuild_log_;
    std::atomic<bool> busy_{false};
};

}  // namespace maxent
