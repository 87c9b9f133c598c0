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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace maxent {

struct SampleSummary {
    enum class Kind { uniform, stratified };
    Kind kind = Kind::uniform;
    double rate = 1.0;
    std::uint64_t seed = 0;
    std::vector<AttrId> strata;
    Dataset rows;
    std::vector<double> scale;  // per sampled row
};

/// Bernoulli(rate) row selection; every kept row carries scale 1 / rate.
SampleSummary uniform_sample(const Dataset& ds, double rate, std::uint64_t seed);
/// Per nonempty stratum, max(1, round(rate * size)) rows without replacement,
/// each scaled by stratum size / sampled rows.
SampleSummary stratified_sample(const Dataset& ds, std::vector<AttrId> strata, double rate, std::uint64_t seed);

/// Sum of scale factors over sampled rows that satisfy the predicate.
double sample_estimate(const SampleSummary& sample, const Predicate& predicate);

/// |t - e| / (t + e); 0 when both are 0.
double relative_error(double truth, double estimate);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

/// Positives are estimates that round to at least 1.
PrecisionRecall precision_recall_f(std::span<const double> light_estimates, std::span<const double> null_estimates);

struct Method {
    std::string name;
    std::function<double(const Predicate&)> estimate;
};

struct BenchmarkSpec {
    std::vector<std::vector<AttrId>> templates;  // attribute sets queried with point values
    std::size_t heavy = 100;
    std::size_t light = 100;
    std::size_t null = 200;
    std::uint64_t seed = 7;
};

struct QueryTrace {
    std::vector<ValueIndex> values;
    double truth = 0.0;
    double estimate = 0.0;
    double ms = 0.0;
};

struct MethodResult {
    std::string name;
    double heavy_error = 0.0;
    double light_error = 0.0;
    PrecisionRecall prf;
    double mean_ms = 0.0;
    double p95_ms = 0.0;
    std::vector<QueryTrace> heavy, light, null;
};

struct TemplateReport {
    std::vector<AttrId> attributes;
    std::size_t heavy = 0, light = 0, null = 0;
    std::vector<MethodResult> methods;
};

struct MethodSummary {
    std::string name;
    double mean_heavy_error = 0.0;
    double mean_light_error = 0.0;
    double mean_f = 0.0;
    double p95_ms = 0.0;
};

struct ExperimentReport {
    std::uint64_t seed = 0;
    std::vector<TemplateReport> templates;
    std::vector<MethodSummary> summary;  // one per method, averaged over templates
    std::vector<std::string> warnings;

    const MethodSummary& method(const std::string& name) const;
};

/// Picks heavy (largest), light (smallest nonzero) and null (absent) value tuples per template
/// from exact counts, then times and scores every method on them.
ExperimentReport run_benchmark(const Dataset& ds, const std::vector<Method>& methods, const BenchmarkSpec& spec);

std::string report_to_json(const ExperimentReport& report, const Schema& schema, bool traces = false);
std::string report_to_table(const ExperimentReport& report, const Schema& schema);

/// Exact count by scanning the data.
double exact_count(const Dataset& ds, const Predicate& predicate);

}  // namespace maxent
