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
#include <vector>

namespace maxent {

/// Inclusive empty region over one attribute pair.
struct EmptyRegion {
    AttrId first = 0, second = 0;
    ValueIndex lo1 = 0, hi1 = 0, lo2 = 0, hi2 = 0;
};

/// Four categorical attributes A..D. (A, B) and (C, D) are correlated along a noisy
/// diagonal and each pair has rectangular regions with no tuples; a small uniform
/// background keeps the remaining cells populated with light counts.
struct SyntheticConfig {
    std::size_t rows = 100000;
    std::vector<std::uint32_t> domains = {32, 32, 24, 16};
    double background = 0.03;  // share of rows drawn uniformly over allowed cells
    double spread = 2.5;       // diagonal noise, in buckets
    std::uint64_t seed = 2024;
    std::vector<EmptyRegion> empty = {
        {0, 1, 0, 9, 18, 31},  {0, 1, 20, 31, 0, 9}, {0, 1, 12, 17, 12, 15},
        {2, 3, 0, 7, 9, 15},   {2, 3, 15, 23, 0, 5},
    };
};

bool in_empty_region(const SyntheticConfig& config, const std::vector<ValueIndex>& tuple);

Dataset make_synthetic(const SyntheticConfig& config = {});

}  // namespace maxent
