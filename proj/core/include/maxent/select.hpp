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

#include <maxent/ingest.hpp>
#include <maxent/matrix.hpp>
#include <maxent/model.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace maxent {

enum class PairMode { correlation, cover };

struct PairScore {
    AttrId first = 0;
    AttrId second = 0;
    double score = 0.0;
};

struct PairSelection {
    PairMode mode = PairMode::correlation;
    std::vector<PairScore> pairs;
};

/// Greedy by descending score; a pair enters only if it brings an attribute not yet covered.
PairSelection select_pairs_correlation(std::vector<PairScore> scores, std::size_t budget);
/// Maximizes covered attributes, then summed score. Exhaustive for small inputs, greedy otherwise.
PairSelection select_pairs_cover(std::vector<PairScore> scores, std::size_t budget);

/// Inclusive index rectangle [lx, ux] x [ly, uy] over matrix positions.
struct Rect {
    std::size_t lx = 0, ux = 0, ly = 0, uy = 0;

    std::size_t height() const noexcept { return ux - lx + 1; }
    std::size_t width() const noexcept { return uy - ly + 1; }
    std::size_t cells() const noexcept { return height() * width(); }
    bool intersects(const Rect& o) const noexcept {
        return lx <= o.ux && o.lx <= ux && ly <= o.uy && o.ly <= uy;
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

struct RectStat {
    Rect rect;
    double count = 0.0;
};

double rect_sum(const CountMatrix& m, const Rect& r);
/// Sum of squared deviations from the rectangle mean.
double rect_sse(const CountMatrix& m, const Rect& r);

/// The `budget` largest cells, ties row-major.
std::vector<RectStat> heuristic_large(const CountMatrix& m, std::size_t budget);
/// Zero cells first (row-major), remaining budget as in heuristic_large.
std::vector<RectStat> heuristic_zero(const CountMatrix& m, std::size_t budget);

/// rows splits the row range [lx, ux]; cols splits [ly, uy].
enum class Axis { rows, cols };

/// Split position m: children cover [lo, m] and [m + 1, hi] along `axis`.
/// Minimizes sqrt(SSE_left + SSE_right), smallest m on ties. Throws std::invalid_argument
/// when the rectangle has a single index along `axis`.
std::size_t kd_split(const CountMatrix& m, const Rect& rect, Axis axis);

struct KDNode {
    Rect rect;
    std::size_t depth = 0;
    std::optional<Axis> axis;  // set on internal nodes
    std::size_t split = 0;
    int left = -1;
    int right = -1;
    double sse = 0.0;
    double count = 0.0;

    bool is_leaf() const noexcept { return left < 0; }
};

struct KDTree {
    std::vector<KDNode> nodes;  // nodes[0] is the root

    std::vector<RectStat> leaves() const;
};

/// Splits the leaf with the largest SSE first, alternating axis by depth. Produces
/// exactly min(budget, cells) leaves.
KDTree build_kd_tree(const CountMatrix& m, std::size_t budget);

/// (1 / #leaves) * sqrt(sum of squared deviations from each leaf mean).
double kd_error(const std::vector<RectStat>& leaves, const CountMatrix& m);
double kd_error(const std::vector<Rect>& leaves, const CountMatrix& m);

struct Permutations {
    std::vector<std::size_t> rows;  // rows[position] = original row index
    std::vector<std::size_t> cols;
};

Permutations sugi_sort(const CountMatrix& m, std::size_t max_iter = 20);
Permutations twod_sort(const CountMatrix& m, std::size_t max_iter = 20);

enum class Heuristic { large, zero, composite };
enum class SortKind { none, sugi, twod };

struct SelectionConfig {
    PairMode mode = PairMode::correlation;
    Heuristic heuristic = Heuristic::composite;
    std::size_t pair_budget = 2;   // B_a
    std::size_t stat_budget = 16;  // B_s
    SortKind sort = SortKind::none;
    std::size_t max_iter = 20;
};

SelectionConfig parse_selection_config(const std::string& json_text);
std::string selection_config_to_json(const SelectionConfig& config);

struct PairReport {
    AttrId first = 0;
    AttrId second = 0;
    double chi2 = 0.0;
    std::size_t statistics = 0;
    double kd_error_unsorted = 0.0;
    double kd_error_sorted = 0.0;
};

struct SelectionReport {
    SelectionConfig config;
    std::vector<PairScore> candidates;
    PairSelection selection;
    std::vector<PairReport> pairs;
};

struct SelectionResult {
    StatisticSet statistics;
    SelectionReport report;
};

/// Chi-squared score for every attribute pair, in (first, second) lexicographic order.
std::vector<PairScore> score_pairs(const Dataset& ds);

/// Converts rectangles over a (possibly permuted) matrix into statistics on the pair.
/// Positions are mapped back through the permutations so predicates keep original labels.
std::vector<StatId> add_rect_statistics(StatisticSet& stats, const ContingencyMatrix& m,
                                        const std::vector<RectStat>& rects);

/// Full 1D set plus 2D statistics for the chosen pairs.
SelectionResult select_statistics(const Dataset& ds, const SelectionConfig& config);

std::string selection_report_json(const SelectionReport& report, const Schema& schema);

}  // namespace maxent
