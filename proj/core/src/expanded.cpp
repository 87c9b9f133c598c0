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

#include <maxent/expanded.hpp>

namespace maxent {

ExpandedModel build_expanded(const StatisticSet& stats, std::uint64_t cap) {
    const auto& dom = stats.domain_sizes();
    std::uint64_t space = 1;
    for (auto n : dom) {
        if (n == 0) return ExpandedModel{};
        if (space > cap / n) throw ConfigError("expanded model exceeds the tuple cap");
        space *= n;
    }
    ExpandedModel model;
    model.monomials_.reserve(space);
    std::vector<ValueIndex> t(dom.size(), 0);
    for (std::uint64_t i = 0; i < space; ++i) {
        model.monomials_.push_back({t, stats.matching(t)});
        for (std::size_t a = dom.size(); a-- > 0;) {
            if (++t[a] < dom[a]) break;
            t[a] = 0;
        }
    }
    return model;
}

double ExpandedModel::evaluate(std::span<const double> alpha) const {
    double total = 0.0;
    for (const auto& m : monomials_) {
        double p = 1.0;
        for (auto j : m.stats) p *= alpha[j];
        total += p;
    }
    return total;
}

double ExpandedModel::evaluate(std::span<const double> alpha, const Predicate& filter) const {
    double total = 0.0;
    for (const auto& m : monomials_) {
        if (!filter.matches(m.tuple)) continue;
        double p = 1.0;
        for (auto j : m.stats) p *= alpha[j];
        total += p;
    }
    return total;
}

double ExpandedModel::expectation(std::span<const double> alpha, const Predicate& filter, double n) const {
    const double p = evaluate(alpha);
    if (p <= 0.0) throw ModelError("expanded polynomial is not positive");
    return n * evaluate(alpha, filter) / p;
}

}  // namespace maxent
