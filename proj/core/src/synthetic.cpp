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

#include <maxent/synthetic.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace maxent {

bool in_empty_region(const SyntheticConfig& config, const std::vector<ValueIndex>& t) {
    for (const auto& r : config.empty)
        if (t[r.first] >= r.lo1 && t[r.first] <= r.hi1 && t[r.second] >= r.lo2 && t[r.second] <= r.hi2) return true;
    return false;
}

Dataset make_synthetic(const SyntheticConfig& config) {
    if (config.domains.size() != 4) throw ConfigError("synthetic data has exactly four attributes");
    std::vector<AttributeMeta> attrs;
    const char* names[] = {"A", "B", "C", "D"};
    for (std::size_t a = 0; a < 4; ++a) {
        if (config.domains[a] == 0 || config.domains[a] > 64) throw ConfigError("synthetic domains must be in [1, 64]");
        std::vector<std::string> labels;
        for (std::uint32_t v = 0; v < config.domains[a]; ++v) labels.push_back(names[a] + std::to_string(v));
        attrs.push_back(AttributeMeta::categorical(names[a], std::move(labels)));
    }
    Dataset ds{Schema(std::move(attrs))};

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, config.spread);
    const auto& d = config.domains;
    // Skewed leading attribute of each pair: weight ~ 1 / (1 + v / 4).
    auto skewed = [&](std::uint32_t n) {
        std::vector<double> w(n);
        for (std::uint32_t v = 0; v < n; ++v) w[v] = 1.0 / (1.0 + v / 4.0);
        return std::discrete_distribution<std::uint32_t>(w.begin(), w.end());
    };
    auto lead_a = skewed(d[0]);
    auto lead_c = skewed(d[2]);
    auto follow = [&](std::uint32_t x, std::uint32_t nx, std::uint32_t ny) {
        const double centre = (static_cast<double>(x) + 0.5) * ny / nx;
        const long y = std::lround(centre + noise(rng) - 0.5);
        return static_cast<ValueIndex>(std::clamp<long>(y, 0, static_cast<long>(ny) - 1));
    };

    std::vector<ValueIndex> t(4);
    while (ds.size() < config.rows) {
        if (unit(rng) < config.background) {
            for (std::size_t a = 0; a < 4; ++a) t[a] = std::uniform_int_distribution<ValueIndex>(0, d[a] - 1)(rng);
        } else {
            t[0] = lead_a(rng);
            t[1] = follow(t[0], d[0], d[1]);
            t[2] = lead_c(rng);
            t[3] = follow(t[2], d[2], d[3]);
        }
        if (in_empty_region(config, t)) continue;
        ds.append(t);
    }
    return ds;
}

}  // namespace maxent
