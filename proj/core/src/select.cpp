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

#include <maxent/select.hpp>

#include "json_codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace maxent {

namespace {

void rank_scores(std::vector<PairScore>& scores) {
    std::stable_sort(scores.begin(), scores.end(), [](const PairScore& a, const PairScore& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
}

std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
        if (c > static_cast<double>(cap)) return cap + 1;
    }
    return static_cast<std::size_t>(std::llround(c));
}

constexpr std::size_t kExhaustiveCoverLimit = 20000;

}  // namespace

PairSelection select_pairs_correlation(std::vector<PairScore> scores, std::size_t budget) {
    rank_scores(scores);
    PairSelection out{PairMode::correlation, {}};
    std::set<AttrId> covered;
    for (const auto& p : scores) {
        if (out.pairs.size() >= budget) break;
        if (covered.count(p.first) && covered.count(p.second)) continue;
        covered.insert(p.first);
        covered.insert(p.second);
        out.pairs.push_back(p);
    }
    return out;
}

PairSelection select_pairs_cover(std::vector<PairScore> scores, std::size_t budget) {
    rank_scores(scores);
    PairSelection out{PairMode::cover, {}};
    const std::size_t k = std::min(budget, scores.size());
    if (k == 0) return out;

    if (binomial_capped(scores.size(), k, kExhaustiveCoverLimit) <= kExhaustiveCoverLimit) {
        std::vector<std::size_t> idx(k);
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<std::size_t> best;
        std::size_t best_cover = 0;
        double best_sum = -1.0;
        while (true) {
            std::set<AttrId> attrs;
            double sum = 0.0;
            for (auto i : idx) {
                attrs.insert(scores[i].first);
                attrs.insert(scores[i].second);
                sum += scores[i].score;
            }
            if (attrs.size() > best_cover || (attrs.size() == best_cover && sum > best_sum)) {
                best = idx;
                best_cover = attrs.size();
                best_sum = sum;
            }
            // next combination in lexicographic order
            std::size_t pos = k;
            while (pos > 0 && idx[pos - 1] == scores.size() - k + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
        }
        for (auto i : best) out.pairs.push_back(scores[i]);
        return out;
    }

    std::set<AttrId> covered;
    std::vector<bool> used(scores.size(), false);
    for (std::size_t round = 0; round < k; ++round) {
        std::size_t pick = scores.size();
        int pick_new = -1;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (used[i]) continue;
            const int fresh = static_cast<int>(!covered.count(scores[i].first)) +
                              static_cast<int>(!covered.count(scores[i].second));
            if (fresh > pick_new) {
                pick_new = fresh;
                pick = i;
            }
        }
        used[pick] = true;
        covered.insert(scores[pick].first);
        covered.insert(scores[pick].second);
        out.pairs.push_back(scores[pick]);
    }
    rank_scores(out.pairs);
    return out;
}

double rect_sum(const CountMatrix& m, const Rect& r) {
    double s = 0.0;
    for (std::size_t x = r.lx; x <= r.ux; ++x)
        for (std::size_t y = r.ly; y <= r.uy; ++y) s += m(x, y);
    return s;
}

double rect_sse(const CountMatrix& m, const Rect& r) {
    const double mean = rect_sum(m, r) / static_cast<double>(r.cells());
    double sse = 0.0;
    for (std::size_t x = r.lx; x <= r.ux; ++x)
        for (std::size_t y = r.ly; y <= r.uy; ++y) {
            const double d = m(x, y) - mean;
            sse += d * d;
        }
    return sse;
}

namespace {

std::vector<RectStat> top_cells(const CountMatrix& m, std::size_t budget, std::vector<bool>* taken) {
    std::vector<std::size_t> order(m.cells());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return m.data()[a] > m.data()[b]; });
    std::vector<RectStat> out;
    for (auto c : order) {
        if (out.size() >= budget) break;
        if (taken && (*taken)[c]) continue;
        const std::size_t x = c / m.cols(), y = c % m.cols();
        out.push_back({Rect{x, x, y, y}, m(x, y)});
    }
    return out;
}

}  // namespace

std::vector<RectStat> heuristic_large(const CountMatrix& m, std::size_t budget) {
    return top_cells(m, budget, nullptr);
}

std::vector<RectStat> heuristic_zero(const CountMatrix& m, std::size_t budget) {
    std::vector<RectStat> out;
    std::vector<bool> taken(m.cells(), false);
    for (std::size_t c = 0; c < m.cells() && out.size() < budget; ++c) {
        if (m.data()[c] != 0.0) continue;
        const std::size_t x = c / m.cols(), y = c % m.cols();
        out.push_back({Rect{x, x, y, y}, 0.0});
        taken[c] = true;
    }
    if (out.size() < budget) {
        auto rest = top_cells(m, budget - out.size(), &taken);
        out.insert(out.end(), rest.begin(), rest.end());
    }
    return out;
}

std::size_t kd_split(const CountMatrix& m, const Rect& rect, Axis axis) {
    const std::size_t lo = axis == Axis::rows ? rect.lx : rect.ly;
    const std::size_t hi = axis == Axis::rows ? rect.ux : rect.uy;
    if (hi <= lo) throw std::invalid_argument("kd_split: rectangle has a single index along the split axis");
    std::size_t best = lo;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t s = lo; s < hi; ++s) {
        Rect a = rect, b = rect;
        if (axis == Axis::rows) {
            a.ux = s;
            b.lx = s + 1;
        } else {
            a.uy = s;
            b.ly = s + 1;
        }
        const double obj = std::sqrt(rect_sse(m, a) + rect_sse(m, b));
        if (obj < best_obj) {
            best_obj = obj;
            best = s;
        }
    }
    return best;
}

std::vector<RectStat> KDTree::leaves() const {
    std::vector<RectStat> out;
    for (const auto& n : nodes)
        if (n.is_leaf()) out.push_back({n.rect, n.count});
    return out;
}

KDTree build_kd_tree(const CountMatrix& m, std::size_t budget) {
    KDTree tree;
    if (m.cells() == 0) return tree;
    const Rect whole{0, m.rows() - 1, 0, m.cols() - 1};
    tree.nodes.push_back(KDNode{whole, 0, std::nullopt, 0, -1, -1, rect_sse(m, whole), rect_sum(m, whole)});
    const std::size_t target = std::min(std::max<std::size_t>(budget, 1), m.cells());
    std::size_t leaves = 1;
    while (leaves < target) {
        // Largest SSE first; earliest node on ties. 1x1 leaves cannot be split.
        int pick = -1;
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            const auto& n = tree.nodes[i];
            if (!n.is_leaf() || n.rect.cells() == 1) continue;
            if (pick < 0 || n.sse > tree.nodes[pick].sse) pick = static_cast<int>(i);
        }
        if (pick < 0) break;
        KDNode node = tree.nodes[pick];
        Axis axis = node.depth % 2 == 0 ? Axis::rows : Axis::cols;
        if ((axis == Axis::rows ? node.rect.height() : node.rect.width()) < 2)
            axis = axis == Axis::rows ? Axis::cols : Axis::rows;
        const std::size_t s = kd_split(m, node.rect, axis);
        Rect a = node.rect, b = node.rect;
        if (axis == Axis::rows) {
            a.ux = s;
            b.lx = s + 1;
        } else {
            a.uy = s;
            b.ly = s + 1;
        }
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(KDNode{a, node.depth + 1, std::nullopt, 0, -1, -1, rect_sse(m, a), rect_sum(m, a)});
        tree.nodes.push_back(KDNode{b, node.depth + 1, std::nullopt, 0, -1, -1, rect_sse(m, b), rect_sum(m, b)});
        auto& parent = tree.nodes[pick];
        parent.axis = axis;
        parent.split = s;
        parent.left = left;
        parent.right = left + 1;
        ++leaves;
    }
    return tree;
}

double kd_error(const std::vector<Rect>& leaves, const CountMatrix& m) {
    if (leaves.empty()) return 0.0;
    double sse = 0.0;
    for (const auto& r : leaves) sse += rect_sse(m, r);
    return std::sqrt(sse) / static_cast<double>(leaves.size());
}

double kd_error(const std::vector<RectStat>& leaves, const CountMatrix& m) {
    std::vector<Rect> rects;
    rects.reserve(leaves.size());
    for (const auto& l : leaves) rects.push_back(l.rect);
    return kd_error(rects, m);
}

namespace {

/// Stable reorder of `perm` by key; returns true if the order changed.
template <typename KeyFn>
bool reorder(std::vector<std::size_t>& perm, KeyFn key) {
    std::vector<std::pair<double, std::size_t>> keyed;
    keyed.reserve(perm.size());
    for (std::size_t pos = 0; pos < perm.size(); ++pos) keyed.emplace_back(key(pos), pos);
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    bool changed = false;
    std::vector<std::size_t> next(perm.size());
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        next[i] = perm[keyed[i].second];
        changed |= keyed[i].second != i;
    }
    perm = std::move(next);
    return changed;
}

template <typename RowKey, typename ColKey>
Permutations alternate(const CountMatrix& m, std::size_t max_iter, RowKey row_key, ColKey col_key) {
    Permutations p;
    p.rows.resize(m.rows());
    p.cols.resize(m.cols());
    std::iota(p.rows.begin(), p.rows.end(), 0);
    std::iota(p.cols.begin(), p.cols.end(), 0);
    for (std::size_t it = 0; it < std::max<std::size_t>(max_iter, 1); ++it) {
        bool changed = reorder(p.rows, [&](std::size_t pos) { return row_key(p, p.rows[pos]); });
        changed |= reorder(p.cols, [&](std::size_t pos) { return col_key(p, p.cols[pos]); });
        if (!changed) break;
    }
    return p;
}

}  // namespace

Permutations sugi_sort(const CountMatrix& m, std::size_t max_iter) {
    constexpr double kNoZeros = std::numeric_limits<double>::infinity();
    auto row_key = [&](const Permutations& p, std::size_t row) {
        double sum = 0.0;
        std::size_t zeros = 0;
        for (std::size_t y = 0; y < p.cols.size(); ++y)
            if (m(row, p.cols[y]) == 0.0) {
                sum += static_cast<double>(y + 1);
                ++zeros;
            }
        return zeros ? sum / static_cast<double>(zeros) : kNoZeros;
    };
    auto col_key = [&](const Permutations& p, std::size_t col) {
        double sum = 0.0;
        std::size_t zeros = 0;
        for (std::size_t x = 0; x < p.rows.size(); ++x)
            if (m(p.rows[x], col) == 0.0) {
                sum += static_cast<double>(x + 1);
                ++zeros;
            }
        return zeros ? sum / static_cast<double>(zeros) : kNoZeros;
    };
    return alternate(m, max_iter, row_key, col_key);
}

Permutations twod_sort(const CountMatrix& m, std::size_t max_iter) {
    auto row_key = [&](const Permutations& p, std::size_t row) {
        double sum = 0.0;
        for (std::size_t y = 0; y < p.cols.size(); ++y) sum += static_cast<double>(y + 1) * m(row, p.cols[y]);
        return sum;
    };
    auto col_key = [&](const Permutations& p, std::size_t col) {
        double sum = 0.0;
        for (std::size_t x = 0; x < p.rows.size(); ++x) sum += static_cast<double>(x + 1) * m(p.rows[x], col);
        return sum;
    };
    return alternate(m, max_iter, row_key, col_key);
}

namespace {

const char* mode_name(PairMode m) { return m == PairMode::cover ? "cover" : "correlation"; }
const char* heuristic_name(Heuristic h) {
    switch (h) {
        case Heuristic::large: return "large";
        case Heuristic::zero: return "zero";
        case Heuristic::composite: return "composite";
    }
    return "composite";
}
const char* sort_name(SortKind s) {
    switch (s) {
        case SortKind::none: return "none";
        case SortKind::sugi: return "sugi";
        case SortKind::twod: return "2d";
    }
    return "none";
}

detail::json config_json(const SelectionConfig& c) {
    return detail::json{{"mode", mode_name(c.mode)},           {"heuristic", heuristic_name(c.heuristic)},
                        {"pair_budget", c.pair_budget},        {"stat_budget", c.stat_budget},
                        {"sort", sort_name(c.sort)},           {"max_iter", c.max_iter}};
}

}  // namespace

SelectionConfig parse_selection_config(const std::string& json_text) {
    detail::json j;
    try {
        j = detail::json::parse(json_text);
    } catch (const detail::json::exception& e) {
        throw ConfigError(std::string("selection config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("selection config must be an object");
    SelectionConfig c;
    try {
        const auto mode = j.value("mode", std::string("correlation"));
        if (mode == "correlation")
            c.mode = PairMode::correlation;
        else if (mode == "cover")
            c.mode = PairMode::cover;
        else
            throw ConfigError("unknown pair mode '" + mode + "'");
        const auto h = j.value("heuristic", std::string("composite"));
        if (h == "large")
            c.heuristic = Heuristic::large;
        else if (h == "zero")
            c.heuristic = Heuristic::zero;
        else if (h == "composite")
            c.heuristic = Heuristic::composite;
        else
            throw ConfigError("unknown heuristic '" + h + "'");
        const auto s = j.value("sort", std::string("none"));
        if (s == "none")
            c.sort = SortKind::none;
        else if (s == "sugi")
            c.sort = SortKind::sugi;
        else if (s == "2d")
            c.sort = SortKind::twod;
        else
            throw ConfigError("unknown sort '" + s + "'");
        c.pair_budget = j.value("pair_budget", c.pair_budget);
        c.stat_budget = j.value("stat_budget", c.stat_budget);
        c.max_iter = j.value("max_iter", c.max_iter);
    } catch (const detail::json::exception& e) {
        throw ConfigError(std::string("selection config: ") + e.what());
    }
    if (c.stat_budget == 0 && c.pair_budget > 0) throw ConfigError("stat_budget must be at least 1");
    if (c.max_iter == 0) throw ConfigError("max_iter must be at least 1");
    return c;
}

std::string selection_config_to_json(const SelectionConfig& config) { return config_json(config).dump(2); }

std::vector<PairScore> score_pairs(const Dataset& ds) {
    std::vector<PairScore> out;
    const auto m = static_cast<AttrId>(ds.arity());
    for (AttrId a = 0; a < m; ++a)
        for (AttrId b = a + 1; b < m; ++b) out.push_back({a, b, chi_squared(contingency_matrix(ds, a, b))});
    return out;
}

std::vector<StatId> add_rect_statistics(StatisticSet& stats, const ContingencyMatrix& m,
                                        const std::vector<RectStat>& rects) {
    std::vector<StatId> ids;
    const auto rows = static_cast<std::uint32_t>(m.rows());
    const auto cols = static_cast<std::uint32_t>(m.cols());
    for (const auto& r : rects) {
        ValueSet xs(rows), ys(cols);
        for (std::size_t x = r.rect.lx; x <= r.rect.ux; ++x) xs.insert(static_cast<std::uint32_t>(m.row_permutation()[x]));
        for (std::size_t y = r.rect.ly; y <= r.rect.uy; ++y) ys.insert(static_cast<std::uint32_t>(m.col_permutation()[y]));
        Predicate p(stats.arity());
        p.set(m.first(), Clause::from_values(xs));
        p.set(m.second(), Clause::from_values(ys));
        ids.push_back(stats.add_multi(std::move(p), r.count));
    }
    return ids;
}

SelectionResult select_statistics(const Dataset& ds, const SelectionConfig& config) {
    SelectionResult result{compute_1d_statistics(ds), {}};
    auto& report = result.report;
    report.config = config;
    if (config.pair_budget == 0 || ds.arity() < 2) {
        report.selection.mode = config.mode;
        return result;
    }
    report.candidates = score_pairs(ds);
    report.selection = config.mode == PairMode::cover ? select_pairs_cover(report.candidates, config.pair_budget)
                                                      : select_pairs_correlation(report.candidates, config.pair_budget);

    for (const auto& pair : report.selection.pairs) {
        auto cm = contingency_matrix(ds, pair.first, pair.second);
        PairReport pr{pair.first, pair.second, pair.score, 0, 0.0, 0.0};
        pr.kd_error_unsorted = kd_error(build_kd_tree(cm.original(), config.stat_budget).leaves(), cm.original());
        if (config.sort != SortKind::none) {
            auto p = config.sort == SortKind::sugi ? sugi_sort(cm.original(), config.max_iter)
                                                   : twod_sort(cm.original(), config.max_iter);
            cm.set_permutations(std::move(p.rows), std::move(p.cols));
        }
        const CountMatrix view = cm.view();
        pr.kd_error_sorted = kd_error(build_kd_tree(view, config.stat_budget).leaves(), view);

        std::vector<RectStat> rects;
        switch (config.heuristic) {
            case Heuristic::large: rects = heuristic_large(view, config.stat_budget); break;
            case Heuristic::zero: rects = heuristic_zero(view, config.stat_budget); break;
            case Heuristic::composite: rects = build_kd_tree(view, config.stat_budget).leaves(); break;
        }
        pr.statistics = add_rect_statistics(result.statistics, cm, rects).size();
        report.pairs.push_back(pr);
    }
    return result;
}

std::string selection_report_json(const SelectionReport& report, const Schema& schema) {
    using detail::json;
    json candidates = json::array();
    for (const auto& c : report.candidates)
        candidates.push_back(json{{"pair", {schema[c.first].name(), schema[c.second].name()}}, {"chi2", c.score}});
    json pairs = json::array();
    for (const auto& p : report.pairs)
        pairs.push_back(json{{"pair", {schema[p.first].name(), schema[p.second].name()}},
                             {"chi2", p.chi2},
                             {"statistics", p.statistics},
                             {"kd_error_unsorted", p.kd_error_unsorted},
                             {"kd_error_sorted", p.kd_error_sorted}});
    return json{{"config", config_json(report.config)},
                {"mode", mode_name(report.selection.mode)},
                {"candidates", std::move(candidates)},
                {"selected", std::move(pairs)}}
        .dump(2);
}

}  // namespace maxent
