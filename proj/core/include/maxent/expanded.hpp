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
#include <span>
#include <vector>

namespace maxent {

/// Brute-force P: one monomial per tuple of the full domain. Test oracle only.
class ExpandedModel {
public:
    struct Monomial {
        std::vector<ValueIndex> tuple;
        std::vector<StatId> stats;  // statistics the tuple satisfies, ascending
    };

    const std::vector<Monomial>& monomials() const noexcept { return monomials_; }
    std::size_t size() const noexcept { return monomials_.size(); }

    /// Sum over all monomials of the product of their variables.
    double evaluate(std::span<const double> alpha) const;
    /// Same sum restricted to tuples satisfying `filter`.
    double evaluate(std::span<const double> alpha, const Predicate& filter) const;
    /// n * (sum over matching tuples) / P.
    double expectation(std::span<const double> alpha, const Predicate& filter, double n) const;

private:
    friend ExpandedModel build_expanded(const StatisticSet&, std::uint64_t);
    std::vector<Monomial> monomials_;
};

/// Enumerates every tuple; throws ConfigError when the tuple space exceeds `cap`.
ExpandedModel build_expanded(const StatisticSet& stats, std::uint64_t cap = 1000000);

}  // namespace maxent
