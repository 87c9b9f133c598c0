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

#include <maxent/evalkit.hpp>

#include "json_codec.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace maxent {

SampleSummary uniform_sample(const Dataset& ds, double rate, std::uint64_t seed) {
    if (!(rate > 0.0) || rate > 1.0) throw ConfigError("sample rate must be in (0, 1]");
    SampleSummary s{SampleSummary::Kind::uniform, rate, seed, {}, Dataset(ds.schema()), {}};
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(rate);
    for (std::size_t r = 0; r < ds.size(); ++r) {
        if (rate < 1.0 && !keep(rng)) continue;
        s.rows.append(ds.row(r));
        s.scale.push_back(1.0 / rate);
    }
    return s;
}

SampleSummary stratified_sample(const Dataset& ds, std::vector<AttrId> strata, double rate, std::uint64_t seed) {
    if (!(rate > 0.0) || rate > 1.0) throw ConfigError("sample rate must be in (0, 1]");
    if (strata.empty()) throw ConfigError("stratified sample needs at least one attribute");
    for (auto a : strata)
        if (a >= ds.arity()) throw SchemaError("stratum attribute out of range");
    SampleSummary s{SampleSummary::Kind::stratified, rate, seed, strata, Dataset(ds.schema()), {}};

    std::map<std::vector<ValueIndex>, std::vector<std::size_t>> groups;  // ordered for determinism
    std::vector<ValueIndex> key(strata.size());
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (std::size_t i = 0; i < strata.size(); ++i) key[i] = ds.at(r, strata[i]);
        groups[key].push_back(r);
    }
    std::mt19937_64 rng(seed);
    for (auto& [k, rows] : groups) {
        const auto size = rows.size();
        const auto take = std::min<std::size_t>(
            size, std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(rate * static_cast<double>(size)))));
        // Partial Fisher-Yates.
        for (std::size_t i = 0; i < take; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, size - 1);
            std::swap(rows[i], rows[pick(rng)]);
        }
        std::sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take));
        const double scale = static_cast<double>(size) / static_cast<double>(take);
        for (std::size_t i = 0; i < take; ++i) {
            s.rows.append(ds.row(rows[i]));
            s.scale.push_back(scale);
        }
    }
    return s;
}

double sample_estimate(const SampleSummary& sample, const Predicate& predicate) {
    double est = 0.0;
    std::vector<ValueIndex> row(sample.rows.arity());
    for (std::size_t r = 0; r < sample.rows.size(); ++r) {
        for (AttrId a = 0; a < row.size(); ++a) row[a] = sample.rows.at(r, a);
        if (predicate.matches(row)) est += sample.scale[r];
    }
    return est;
}

double exact_count(const Dataset& ds, const Predicate& predicate) {
    double c = 0.0;
    std::vector<ValueIndex> row(ds.arity());
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (AttrId a = 0; a < row.size(); ++a) row[a] = ds.at(r, a);
        if (predicate.matches(row)) c += 1.0;
    }
    return c;
}

double relative_error(double truth, double estimate) {
    const double den = truth + estimate;
    if (den == 0.0) return 0.0;
    return std::abs(truth - estimate) / den;
}

PrecisionRecall precision_recall_f(std::span<const double> light_estimates, std::span<const double> null_estimates) {
    auto positive = [](double e) { return e >= 0.5; };  // rounds to at least 1
    const auto tp = static_cast<double>(std::count_if(light_estimates.begin(), light_estimates.end(), positive));
    const auto fp = static_cast<double>(std::count_if(null_estimates.begin(), null_estimates.end(), positive));
    PrecisionRecall r;
    r.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    r.recall = light_estimates.empty() ? 0.0 : tp / static_cast<double>(light_estimates.size());
    r.f = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

const MethodSummary& ExperimentReport::method(const std::string& name) const {
    for (const auto& m : summary)
        if (m.name == name) return m;
    throw std::out_of_range("no method named " + name);
}

namespace {

struct TemplateValues {
    std::vector<std::pair<std::vector<ValueIndex>, double>> heavy, light, null;
};

TemplateValues pick_values(const Dataset& ds, const std::vector<AttrId>& attrs, const BenchmarkSpec& spec,
                           std::vector<std::string>& warnings) {
    const auto& schema = ds.schema();
    std::vector<std::uint64_t> radix(attrs.size());
    std::uint64_t space = 1;
    for (std::size_t i = attrs.size(); i-- > 0;) {
        radix[i] = space;
        const std::uint64_t n = schema[attrs[i]].size();
        if (space > (std::uint64_t{1} << 40) / std::max<std::uint64_t>(n, 1))
            throw ConfigError("benchmark template domain too large");
        space *= n;
    }
    auto decode = [&](std::uint64_t code) {
        std::vector<ValueIndex> v(attrs.size());
        for (std::size_t i = 0; i < attrs.size(); ++i) {
            v[i] = static_cast<ValueIndex>(code / radix[i]);
            code %= radix[i];
        }
        return v;
    };

    // Codes are mixed-radix in attribute order, so code order is lexicographic tuple order.
    std::unordered_map<std::uint64_t, double> counts;
    for (std::size_t r = 0; r < ds.size(); ++r) {
        std::uint64_t code = 0;
        for (std::size_t i = 0; i < attrs.size(); ++i) code += radix[i] * ds.at(r, attrs[i]);
        counts[code] += 1.0;
    }
    std::vector<std::pair<std::uint64_t, double>> groups(counts.begin(), counts.end());
    std::sort(groups.begin(), groups.end());

    TemplateValues tv;
    auto by_heavy = groups;
    std::stable_sort(by_heavy.begin(), by_heavy.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    const std::size_t nh = std::min(spec.heavy, by_heavy.size());
    std::set<std::uint64_t> used;
    for (std::size_t i = 0; i < nh; ++i) {
        tv.heavy.emplace_back(decode(by_heavy[i].first), by_heavy[i].second);
        used.insert(by_heavy[i].first);
    }
    auto by_light = groups;
    std::stable_sort(by_light.begin(), by_light.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    for (const auto& g : by_light) {
        if (tv.light.size() >= spec.light) break;
        if (used.count(g.first)) continue;
        tv.light.emplace_back(decode(g.first), g.second);
    }
    if (tv.heavy.size() < spec.heavy || tv.light.size() < spec.light)
        warnings.push_back("template has only " + std::to_string(groups.size()) + " groups; heavy/light sets shrunk");

    const std::uint64_t absent = space - groups.size();
    std::vector<std::uint64_t> nulls;
    std::mt19937_64 rng(spec.seed);
    if (absent <= 2 * spec.null) {
        for (std::uint64_t c = 0; c < space; ++c)
            if (!counts.count(c)) nulls.push_back(c);
        std::shuffle(nulls.begin(), nulls.end(), rng);
        if (nulls.size() > spec.null) nulls.resize(spec.null);
        if (nulls.size() < spec.null)
            warnings.push_back("template has only " + std::to_string(nulls.size()) + " absent tuples; null set shrunk");
    } else {
        std::uniform_int_distribution<std::uint64_t> pick(0, space - 1);
        std::set<std::uint64_t> chosen;
        while (chosen.size() < spec.null) {
            const auto c = pick(rng);
            if (!counts.count(c)) chosen.insert(c);
        }
        nulls.assign(chosen.begin(), chosen.end());
    }
    std::sort(nulls.begin(), nulls.end());
    for (auto c : nulls) tv.null.emplace_back(decode(c), 0.0);
    return tv;
}

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
    return v[std::min(idx, v.size() - 1)];
}

}  // namespace

ExperimentReport run_benchmark(const Dataset& ds, const std::vector<Method>& methods, const BenchmarkSpec& spec) {
    using Clock = std::chrono::steady_clock;
    ExperimentReport report;
    report.seed = spec.seed;
    const auto m = ds.arity();
    std::vector<std::vector<double>> all_ms(methods.size());
    for (const auto& attrs : spec.templates) {
        for (auto a : attrs)
            if (a >= m) throw SchemaError("benchmark template attribute out of range");
        const auto tv = pick_values(ds, attrs, spec, report.warnings);
        TemplateReport tr;
        tr.attributes = attrs;
        tr.heavy = tv.heavy.size();
        tr.light = tv.light.size();
        tr.null = tv.null.size();
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const auto& method = methods[mi];
            MethodResult res;
            res.name = method.name;
            std::vector<double> times;
            auto run = [&](const auto& values, std::vector<QueryTrace>& out) {
                for (const auto& [vals, truth] : values) {
                    Predicate p(m);
                    for (std::size_t i = 0; i < attrs.size(); ++i) p.set(attrs[i], Clause::point(vals[i]));
                    const auto t0 = Clock::now();
                    const double est = method.estimate(p);
                    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
                    out.push_back({vals, truth, est, ms});
                    times.push_back(ms);
                }
            };
            run(tv.heavy, res.heavy);
            run(tv.light, res.light);
            run(tv.null, res.null);
            auto mean_error = [](const std::vector<QueryTrace>& t) {
                if (t.empty()) return 0.0;
                double s = 0.0;
                for (const auto& q : t) s += relative_error(q.truth, q.estimate);
                return s / static_cast<double>(t.size());
            };
            res.heavy_error = mean_error(res.heavy);
            res.light_error = mean_error(res.light);
            std::vector<double> le, ne;
            for (const auto& q : res.light) le.push_back(q.estimate);
            for (const auto& q : res.null) ne.push_back(q.estimate);
            res.prf = precision_recall_f(le, ne);
            res.mean_ms = times.empty() ? 0.0 : std::accumulate(times.begin(), times.end(), 0.0) / times.size();
            res.p95_ms = percentile(times, 0.95);
            all_ms[mi].insert(all_ms[mi].end(), times.begin(), times.end());
            tr.methods.push_back(std::move(res));
        }
        report.templates.push_back(std::move(tr));
    }
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        MethodSummary s;
        s.name = methods[mi].name;
        const double k = static_cast<double>(std::max<std::size_t>(report.templates.size(), 1));
        for (const auto& t : report.templates) {
            s.mean_heavy_error += t.methods[mi].heavy_error / k;
            s.mean_light_error += t.methods[mi].light_error / k;
            s.mean_f += t.methods[mi].prf.f / k;
        }
        s.p95_ms = percentile(all_ms[mi], 0.95);
        report.summary.push_back(s);
    }
    return report;
}

std::string report_to_json(const ExperimentReport& report, const Schema& schema, bool traces) {
    using detail::json;
    auto trace_json = [&](const std::vector<QueryTrace>& ts) {
        json arr = json::array();
        for (const auto& t : ts) arr.push_back(json{{"values", t.values}, {"truth", t.truth}, {"estimate", t.estimate}, {"ms", t.ms}});
        return arr;
    };
    json templates = json::array();
    for (const auto& t : report.templates) {
        json names = json::array();
        for (auto a : t.attributes) names.push_back(schema[a].name());
        json methods = json::array();
        for (const auto& m : t.methods) {
            json jm{{"name", m.name},
                    {"heavy_error", m.heavy_error},
                    {"light_error", m.light_error},
                    {"precision", m.prf.precision},
                    {"recall", m.prf.recall},
                    {"f", m.prf.f},
                    {"mean_ms", m.mean_ms},
                    {"p95_ms", m.p95_ms}};
            if (traces) {
                jm["heavy"] = trace_json(m.heavy);
                jm["light"] = trace_json(m.light);
                jm["null"] = trace_json(m.null);
            }
            methods.push_back(std::move(jm));
        }
        templates.push_back(json{{"attributes", std::move(names)},
                                 {"heavy", t.heavy},
                                 {"light", t.light},
                                 {"null", t.null},
                                 {"methods", std::move(methods)}});
    }
    json summary = json::array();
    for (const auto& s : report.summary)
        summary.push_back(json{{"name", s.name},
                               {"mean_heavy_error", s.mean_heavy_error},
                               {"mean_light_error", s.mean_light_error},
                               {"mean_f", s.mean_f},
                               {"p95_ms", s.p95_ms}});
    return json{{"seed", report.seed}, {"templates", std::move(templates)}, {"summary", std::move(summary)}, {"warnings", report.warnings}}
        .dump(2);
}

std::string report_to_table(const ExperimentReport& report, const Schema& schema) {
    std::ostringstream out;
    char line[256];
    for (const auto& t : report.templates) {
        out << "template";
        for (auto a : t.attributes) out << ' ' << schema[a].name();
        out << "  (heavy " << t.heavy << ", light " << t.light << ", null " << t.null << ")\n";
        std::snprintf(line, sizeof line, "  %-18s %10s %10s %9s %9s %9s %9s\n", "method", "heavy_err", "light_err",
                      "precision", "recall", "F", "p95_ms");
        out << line;
        for (const auto& m : t.methods) {
            std::snprintf(line, sizeof line, "  %-18s %10.4f %10.4f %9.4f %9.4f %9.4f %9.4f\n", m.name.c_str(),
                          m.heavy_error, m.light_error, m.prf.precision, m.prf.recall, m.prf.f, m.p95_ms);
            out << line;
        }
    }
    out << "mean over templates\n";
    for (const auto& s : report.summary) {
        std::snprintf(line, sizeof line, "  %-18s heavy_err %.4f  light_err %.4f  F %.4f  p95_ms %.4f\n", s.name.c_str(),
                      s.mean_heavy_error, s.mean_light_error, s.mean_f, s.p95_ms);
        out << line;
    }
    for (const auto& w : report.warnings) out << "warning: " << w << '\n';
    return out.str();
}

}  // namespace maxent
