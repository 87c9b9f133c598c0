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

#include <maxent/polynomial.hpp>

#include <algorithm>
#include <bit>
#include <functional>
#include <set>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace maxent {

namespace {

using GroupKey = std::vector<std::uint32_t>;
using Members = std::vector<StatId>;

/// Per-statistic value sets of its constrained attributes, plus a running intersection.
class ConflictChecker {
public:
    explicit ConflictChecker(const StatisticSet& stats) : stats_(stats), domain_(stats.domain_sizes()) {}

    struct State {
        std::vector<ValueSet> sets;  // empty ValueSet (universe 0) = unconstrained
    };

    State initial() const {
        State s;
        s.sets.resize(domain_.size());
        return s;
    }

    bool compatible(const State& s, StatId j) const {
        const auto& st = stats_[j];
        for (auto a : st.attributes) {
            if (s.sets[a].universe() == 0) continue;
            if (!s.sets[a].intersects(stats_.value_set(j, a))) return false;
        }
        return true;
    }

    State with(const State& s, StatId j) const {
        State out = s;
        for (auto a : stats_[j].attributes) {
            auto vs = stats_.value_set(j, a);
            if (out.sets[a].universe() == 0)
                out.sets[a] = std::move(vs);
            else
                out.sets[a] &= vs;
        }
        return out;
    }

private:
    const StatisticSet& stats_;
    std::vector<std::uint32_t> domain_;
};

/// One statistic from each group in `key`, all attributes sharing at least one value.
void inner_dfs(const ConflictChecker& cc, const StatsByGroup& by_group, const GroupKey& key, std::size_t pos,
               const ConflictChecker::State& state, Members& chosen, std::vector<Members>& out) {
    if (pos == key.size()) {
        out.push_back(chosen);
        return;
    }
    for (auto j : by_group[key[pos]]) {
        if (!cc.compatible(state, j)) continue;
        chosen.push_back(j);
        inner_dfs(cc, by_group, key, pos + 1, cc.with(state, j), chosen, out);
        chosen.pop_back();
    }
}

std::vector<Members> inner_groups(const StatisticSet& stats, const StatsByGroup& by_group, const GroupKey& key) {
    ConflictChecker cc(stats);
    std::vector<Members> out;
    Members chosen;
    inner_dfs(cc, by_group, key, 0, cc.initial(), chosen, out);
    std::sort(out.begin(), out.end());
    return out;
}

struct OuterSearch {
    const ConflictChecker& cc;
    const StatsByGroup& by_group;
    std::vector<std::uint32_t> order;  // nonempty group indices
    GroupKey key;
    Members chosen;
    std::vector<std::uint32_t> skipped;
    std::map<GroupKey, std::vector<Members>> out;

    void run(std::size_t pos, const ConflictChecker::State& state) {
        if (pos == order.size()) {
            if (chosen.size() < 2) return;
            for (auto g : skipped)
                for (auto j : by_group[g])
                    if (cc.compatible(state, j)) return;  // extendable, not maximal
            out[key].push_back(chosen);
            return;
        }
        const auto g = order[pos];
        for (auto j : by_group[g]) {
            if (!cc.compatible(state, j)) continue;
            key.push_back(g);
            chosen.push_back(j);
            run(pos + 1, cc.with(state, j));
            key.pop_back();
            chosen.pop_back();
        }
        skipped.push_back(g);
        run(pos + 1, state);
        skipped.pop_back();
    }
};

}  // namespace

StatsByGroup stats_by_group(const StatisticSet& stats) {
    StatsByGroup out;
    for (const auto& g : stats.groups()) out.push_back(g.members);
    return out;
}

std::map<std::vector<std::uint32_t>, std::vector<std::vector<StatId>>>
find_no_conflict_groups(const StatisticSet& stats, const StatsByGroup& by_group, bool outer) {
    std::map<GroupKey, std::vector<Members>> out;
    if (!outer) {
        GroupKey key;
        for (std::uint32_t g = 0; g < by_group.size(); ++g)
            if (!by_group[g].empty()) key.push_back(g);
        if (key.empty()) return out;
        auto groups = inner_groups(stats, by_group, key);
        if (!groups.empty()) out[key] = std::move(groups);
        return out;
    }
    ConflictChecker cc(stats);
    OuterSearch search{cc, by_group, {}, {}, {}, {}, {}};
    for (std::uint32_t g = 0; g < by_group.size(); ++g)
        if (!by_group[g].empty()) search.order.push_back(g);
    search.run(0, cc.initial());
    for (auto& [k, v] : search.out) std::sort(v.begin(), v.end());
    return std::move(search.out);
}

StatsByGroup conflict_reduce(const StatisticSet& stats, const StatsByGroup& by_group) {
    // A statistic sits in a conflict-free group of size >= 2 iff it has a compatible
    // partner in another group (every subset of a conflict-free group is conflict-free).
    ConflictChecker cc(stats);
    StatsByGroup out(by_group.size());
    for (std::size_t g = 0; g < by_group.size(); ++g)
        for (auto j : by_group[g]) {
            const auto state = cc.with(cc.initial(), j);
            bool partnered = false;
            for (std::size_t h = 0; h < by_group.size() && !partnered; ++h) {
                if (h == g) continue;
                for (auto k : by_group[h])
                    if (cc.compatible(state, k)) {
                        partnered = true;
                        break;
                    }
            }
            if (partnered) out[g].push_back(j);
        }
    return out;
}

namespace {

struct ValueSetKey {
    AttrId attr;
    ValueSet values;
    bool operator==(const ValueSetKey&) const = default;
};
struct ValueSetKeyHash {
    std::size_t operator()(const ValueSetKey& k) const noexcept { return k.values.hash() * 31 + k.attr; }
};

/// Orders group-index keys by size, then lexicographically.
struct KeyOrder {
    bool operator()(const GroupKey& a, const GroupKey& b) const {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    }
};

using TermCatalog = std::map<GroupKey, std::set<Members>, KeyOrder>;

}  // namespace

class PolynomialBuilder {
public:
    explicit PolynomialBuilder(const StatisticSet& stats) : stats_(stats) {
        if (stats.arity() == 0) throw ConfigError("polynomial needs at least one attribute");
        if (stats.arity() > 64) throw ConfigError("at most 64 attributes are supported");
        if (stats.groups().size() > 64) throw ConfigError("at most 64 statistic groups are supported");
        for (AttrId a = 0; a < stats.arity(); ++a)
            for (auto id : stats.one_d(a))
                if (id == kNoStat)
                    throw ConfigError("attribute " + std::to_string(a) + " lacks a complete set of 1D statistics");
        group_of_.assign(stats.size(), 0);
        for (std::uint32_t g = 0; g < stats.groups().size(); ++g)
            for (auto j : stats.groups()[g].members) group_of_[j] = g;
        var_.assign(stats.size(), kNoNode);
    }

    NodeId variable(StatId j) {
        if (var_[j] != kNoNode) return var_[j];
        const auto& st = stats_[j];
        PolyNode n;
        n.stat = j;
        if (st.is_one_d()) {
            n.kind = NodeKind::variable;
            n.attr = st.attributes[0];
            n.value = st.predicate.clause(n.attr).lo();
        } else {
            n.kind = NodeKind::correction;
            n.group = group_of_[j];
        }
        return var_[j] = push(std::move(n));
    }

    NodeId sum1d(AttrId attr, const ValueSet& values) {
        ValueSetKey key{attr, values};
        if (auto it = sum1d_.find(key); it != sum1d_.end()) return it->second;
        PolyNode n;
        n.kind = NodeKind::sum1d;
        n.attr = attr;
        for (auto v : values.members()) n.children.push_back(variable(stats_.one_d_stat(attr, v)));
        const auto id = push(std::move(n));
        sum1d_.emplace(std::move(key), id);
        return id;
    }

    NodeId full_sum(AttrId attr) { return sum1d(attr, ValueSet(stats_.domain_sizes()[attr], true)); }

    NodeId product(std::vector<NodeId> children) {
        if (children.size() == 1) return children.front();
        PolyNode n;
        n.kind = NodeKind::product;
        n.children = std::move(children);
        return push(std::move(n));
    }

    NodeId sum(std::vector<NodeId> children) {
        if (children.size() == 1) return children.front();
        PolyNode n;
        n.kind = NodeKind::sum;
        n.children = std::move(children);
        return push(std::move(n));
    }

    /// Term of a conflict-free group: compatible 1D sums over the covered attributes times corrections.
    NodeId term(const Members& group) {
        const auto m = stats_.arity();
        std::vector<ValueSet> sets(m);
        for (auto j : group)
            for (auto a : stats_[j].attributes) {
                auto vs = stats_.value_set(j, a);
                if (sets[a].universe() == 0)
                    sets[a] = std::move(vs);
                else
                    sets[a] &= vs;
            }
        std::vector<NodeId> factors;
        for (AttrId a = 0; a < m; ++a)
            if (sets[a].universe() != 0) {
                if (sets[a].empty()) throw std::logic_error("term built for a conflicting group");
                factors.push_back(sum1d(a, sets[a]));
            }
        for (auto j : group) factors.push_back(variable(j));
        return product(std::move(factors));
    }

    CompressedPolynomial build(const TermCatalog& catalog) {
        const auto m = stats_.arity();
        std::vector<NodeId> top;
        {
            std::vector<NodeId> part_i;
            for (AttrId a = 0; a < m; ++a) part_i.push_back(full_sum(a));
            top.push_back(product(std::move(part_i)));
        }
        for (const auto& [key, groups] : catalog) {
            if (groups.empty()) continue;
            std::vector<bool> covered(m, false);
            for (auto g : key)
                for (auto a : stats_.groups()[g].attributes) covered[a] = true;
            std::vector<NodeId> factors;
            for (AttrId a = 0; a < m; ++a)
                if (!covered[a]) factors.push_back(full_sum(a));
            std::vector<NodeId> terms;
            for (const auto& g : groups) terms.push_back(term(g));
            factors.push_back(sum(std::move(terms)));
            top.push_back(product(std::move(factors)));
        }
        PolyNode root;
        root.kind = NodeKind::sum;
        root.children = std::move(top);
        push(std::move(root));
        return finish();
    }

    CompressedPolynomial finish(bool strict = true) {
        CompressedPolynomial p;
        p.nodes_ = std::move(nodes_);
        p.finalize(stats_.size(), strict);
        return p;
    }

private:
    NodeId push(PolyNode n) {
        nodes_.push_back(std::move(n));
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    const StatisticSet& stats_;
    std::vector<std::uint32_t> group_of_;
    std::vector<NodeId> var_;
    std::vector<PolyNode> nodes_;
    std::unordered_map<ValueSetKey, NodeId, ValueSetKeyHash> sum1d_;
};

void CompressedPolynomial::finalize(std::size_t statistic_count, bool strict) {
    if (nodes_.empty()) throw ConfigError("polynomial has no nodes");
    var_node_.assign(statistic_count, kNoNode);
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        auto& n = nodes_[id];
        n.attr_mask = 0;
        n.group_mask = 0;
        switch (n.kind) {
            case NodeKind::variable:
            case NodeKind::correction:
                if (n.stat >= statistic_count) throw ConfigError("polynomial node references an unknown statistic");
                if (!n.children.empty()) throw ConfigError("leaf node with children");
                if (var_node_[n.stat] != kNoNode) throw ConfigError("statistic has two leaf nodes");
                var_node_[n.stat] = id;
                if (n.kind == NodeKind::variable) {
                    if (n.attr >= 64) throw ConfigError("attribute index out of range");
                    n.attr_mask = std::uint64_t{1} << n.attr;
                } else {
                    if (n.group >= 64) throw ConfigError("group index out of range");
                    n.group_mask = std::uint64_t{1} << n.group;
                }
                break;
            case NodeKind::sum1d:
            case NodeKind::sum:
            case NodeKind::product:
                if (n.children.empty()) throw ConfigError("inner node without children");
                for (auto c : n.children) {
                    if (c >= id) throw ConfigError("polynomial nodes are not in topological order");
                    if (n.kind == NodeKind::sum1d &&
                        (nodes_[c].kind != NodeKind::variable || nodes_[c].attr != n.attr))
                        throw ConfigError("1D sum over a foreign node");
                    n.attr_mask |= nodes_[c].attr_mask;
                    n.group_mask |= nodes_[c].group_mask;
                }
                break;
        }
    }
    for (std::size_t j = 0; j < statistic_count && strict; ++j)
        if (var_node_[j] == kNoNode) throw ConfigError("statistic " + std::to_string(j) + " has no leaf node");

    std::vector<std::vector<NodeId>> parents(nodes_.size());
    for (NodeId id = 0; id < nodes_.size(); ++id)
        for (auto c : nodes_[id].children) parents[c].push_back(id);
    ancestors_.assign(statistic_count, {});
    std::vector<std::uint32_t> seen(nodes_.size(), 0);
    for (StatId j = 0; j < statistic_count; ++j) {
        if (var_node_[j] == kNoNode) continue;
        const auto mark = j + 1;
        std::vector<NodeId> stack{var_node_[j]};
        auto& anc = ancestors_[j];
        while (!stack.empty()) {
            const auto id = stack.back();
            stack.pop_back();
            for (auto p : parents[id])
                if (seen[p] != mark) {
                    seen[p] = mark;
                    anc.push_back(p);
                    stack.push_back(p);
                }
        }
        std::sort(anc.begin(), anc.end());
    }

    term_keys_.clear();
    for (auto t : nodes_.back().children) {
        std::vector<std::uint32_t> key;
        for (std::uint64_t m = nodes_[t].group_mask; m != 0; m &= m - 1)
            key.push_back(static_cast<std::uint32_t>(std::countr_zero(m)));
        term_keys_.push_back(std::move(key));
    }
}

CompressedPolynomial CompressedPolynomial::from_nodes(std::vector<PolyNode> nodes, std::size_t statistic_count) {
    CompressedPolynomial p;
    p.nodes_ = std::move(nodes);
    p.finalize(statistic_count);
    return p;
}

SizeReport CompressedPolynomial::size_report() const {
    SizeReport r;
    r.nodes = nodes_.size();
    if (nodes_.empty()) return r;
    r.top_level_terms = nodes_.back().kind == NodeKind::sum ? nodes_.back().children.size() : 1;
    std::vector<std::uint64_t> mult(nodes_.size(), 0);
    mult.back() = 1;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        const auto& n = nodes_[i];
        for (auto c : n.children) mult[c] += mult[i];
        if (n.kind == NodeKind::variable) r.one_d_refs += mult[i];
        if (n.kind == NodeKind::correction) r.correction_terms += mult[i];
        if (n.kind == NodeKind::product &&
            std::any_of(n.children.begin(), n.children.end(),
                        [&](NodeId c) { return nodes_[c].kind == NodeKind::correction; }))
            r.groups += mult[i];
    }
    return r;
}

namespace {

/// Calls fn(combination) for every k-subset of [0, n), lexicographically.
template <typename Fn>
void for_each_combination(std::uint32_t n, std::uint32_t k, Fn fn) {
    if (k == 0 || k > n) return;
    std::vector<std::uint32_t> idx(k);
    for (std::uint32_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        fn(idx);
        std::uint32_t pos = k;
        while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
        if (pos == 0) return;
        ++idx[pos - 1];
        for (std::uint32_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

CompressedPolynomial build_compressed_naive(const StatisticSet& stats) {
    PolynomialBuilder builder(stats);
    const auto by_group = stats_by_group(stats);
    const auto groups = static_cast<std::uint32_t>(by_group.size());
    TermCatalog catalog;
    for (std::uint32_t k = 1; k <= groups; ++k)
        for_each_combination(groups, k, [&](const GroupKey& idx) {
            auto found = inner_groups(stats, by_group, idx);
            if (found.empty()) return;
            auto& slot = catalog[idx];
            for (auto& g : found) slot.insert(std::move(g));
        });
    return builder.build(catalog);
}

CompressedPolynomial build_compressed_optimized(const StatisticSet& stats) {
    PolynomialBuilder builder(stats);
    const auto by_group = stats_by_group(stats);
    TermCatalog catalog;
    for (std::uint32_t g = 0; g < by_group.size(); ++g)
        for (auto j : by_group[g]) catalog[GroupKey{g}].insert(Members{j});

    const auto reduced = conflict_reduce(stats, by_group);
    const auto maximal = find_no_conflict_groups(stats, reduced, /*outer=*/true);
    for (const auto& [key, groups] : maximal) {
        const auto k = static_cast<std::uint32_t>(key.size());
        // Every projection of a maximal group onto >= 2 of its pairs; repeats dedup in the set.
        for (std::uint32_t sub = 2; sub <= k; ++sub)
            for_each_combination(k, sub, [&](const GroupKey& pick) {
                GroupKey proj_key;
                for (auto p : pick) proj_key.push_back(key[p]);
                auto& slot = catalog[proj_key];
                for (const auto& g : groups) {
                    Members proj;
                    for (auto p : pick) proj.push_back(g[p]);
                    slot.insert(std::move(proj));
                }
            });
    }
    return builder.build(catalog);
}

CompressedPolynomial build_term(const StatisticSet& stats, const std::vector<StatId>& group) {
    PolynomialBuilder builder(stats);
    ConflictChecker cc(stats);
    auto state = cc.initial();
    for (auto j : group) {
        if (stats[j].is_one_d()) throw ConfigError("term groups hold multi-dimensional statistics only");
        if (!cc.compatible(state, j)) throw ConfigError("term group is not conflict-free");
        state = cc.with(state, j);
    }
    builder.term(group);
    return builder.finish(/*strict=*/false);
}

ZeroSet::ZeroSet(std::vector<std::uint32_t> domain_sizes) {
    allowed_.reserve(domain_sizes.size());
    for (auto n : domain_sizes) allowed_.emplace_back(n, true);
}

ZeroSet ZeroSet::from_predicate(const Predicate& pred, const std::vector<std::uint32_t>& domain_sizes) {
    if (pred.arity() != domain_sizes.size()) throw SchemaError("query arity does not match the summary");
    ZeroSet z(domain_sizes);
    for (auto a : pred.constrained()) {
        if (!pred.clause(a).fits(domain_sizes[a])) throw DomainError("query clause outside the attribute domain");
        z.restrict(a, pred.clause(a).to_value_set(domain_sizes[a]));
    }
    return z;
}

void ZeroSet::restrict(AttrId attr, const ValueSet& allowed) {
    if (attr >= 64 || attr >= allowed_.size()) throw SchemaError("zero-set attribute out of range");
    allowed_[attr] &= allowed;
    mask_ |= std::uint64_t{1} << attr;
}

double pairwise_sum(std::span<const double> values) {
    if (values.empty()) return 0.0;
    if (values.size() == 1) return values[0];
    const auto half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

/// Per-thread memo for one evaluation pass, invalidated by bumping the generation.
struct Scratch {
    std::vector<double> value;
    std::vector<std::uint32_t> stamp;
    std::uint32_t generation = 0;

    void begin(std::size_t nodes) {
        if (value.size() < nodes) {
            value.resize(nodes);
            stamp.resize(nodes, 0);
        }
        if (++generation == 0) {
            std::fill(stamp.begin(), stamp.end(), 0);
            generation = 1;
        }
    }
    bool has(NodeId id) const { return stamp[id] == generation; }
    void put(NodeId id, double v) {
        value[id] = v;
        stamp[id] = generation;
    }
};

thread_local Scratch tls_scratch;

/// Value of an inner or leaf node given a child accessor. One formula for every path so
/// cached and uncached evaluation agree bit for bit.
template <typename Child>
double combine(const PolyNode& n, std::span<const double> alpha, const ZeroSet* zero, Child&& child) {
    switch (n.kind) {
        case NodeKind::variable:
            if (zero && !zero->allows(n.attr, n.value)) return 0.0;
            return alpha[n.stat];
        case NodeKind::correction: return alpha[n.stat] - 1.0;
        case NodeKind::sum1d:
        case NodeKind::sum: {
            double s = 0.0;
            for (auto c : n.children) s += child(c);
            return s;
        }
        case NodeKind::product: {
            double p = 1.0;
            for (auto c : n.children) p *= child(c);
            return p;
        }
    }
    return 0.0;
}

}  // namespace

Evaluator::Evaluator(std::shared_ptr<const CompressedPolynomial> poly, std::vector<double> alpha)
    : poly_(std::move(poly)), alpha_(std::move(alpha)) {
    if (!poly_) throw std::invalid_argument("Evaluator needs a polynomial");
    if (alpha_.size() != poly_->statistic_count()) throw std::invalid_argument("Evaluator: wrong number of values");
    recompute_all();
}

double Evaluator::root_sum(std::span<const double> term_values) const { return pairwise_sum(term_values); }

void Evaluator::recompute_all() {
    const auto& nodes = poly_->nodes();
    cache_.assign(nodes.size(), 0.0);
    const NodeId root = poly_->root();
    for (NodeId id = 0; id < nodes.size(); ++id) {
        const auto& n = nodes[id];
        if (id == root && n.kind == NodeKind::sum) {
            std::vector<double> tv;
            tv.reserve(n.children.size());
            for (auto c : n.children) tv.push_back(cache_[c]);
            cache_[id] = root_sum(tv);
        } else {
            cache_[id] = combine(n, alpha_, nullptr, [&](NodeId c) { return cache_[c]; });
        }
    }
}

void Evaluator::assign(std::vector<double> alpha) {
    if (alpha.size() != alpha_.size()) throw std::invalid_argument("Evaluator: wrong number of values");
    alpha_ = std::move(alpha);
    recompute_all();
}

double Evaluator::evaluate(const ZeroSet& zero) const {
    if (zero.empty()) return value();
    const auto& nodes = poly_->nodes();
    auto& sc = tls_scratch;
    sc.begin(nodes.size());
    const auto mask = zero.mask();
    std::function<double(NodeId)> get = [&](NodeId id) -> double {
        const auto& n = nodes[id];
        if ((n.attr_mask & mask) == 0) return cache_[id];
        if (sc.has(id)) return sc.value[id];
        const double v = combine(n, alpha_, &zero, get);
        sc.put(id, v);
        return v;
    };
    const auto& root = nodes.back();
    if (root.kind != NodeKind::sum) return get(poly_->root());
    std::vector<double> tv;
    tv.reserve(root.children.size());
    for (auto c : root.children) tv.push_back(get(c));
    return root_sum(tv);
}

double Evaluator::evaluate_parallel(const ZeroSet& zero, unsigned threads) const {
    const auto& nodes = poly_->nodes();
    const auto& root = nodes.back();
    if (threads <= 1 || root.kind != NodeKind::sum || root.children.size() < 2) return evaluate(zero);
    const auto mask = zero.mask();
    std::vector<double> tv(root.children.size(), 0.0);
    threads = std::min<unsigned>(threads, static_cast<unsigned>(root.children.size()));
    auto worker = [&](unsigned t) {
        auto& sc = tls_scratch;
        sc.begin(nodes.size());
        std::function<double(NodeId)> get = [&](NodeId id) -> double {
            const auto& n = nodes[id];
            if ((n.attr_mask & mask) == 0) return cache_[id];
            if (sc.has(id)) return sc.value[id];
            const double v = combine(n, alpha_, &zero, get);
            sc.put(id, v);
            return v;
        };
        for (std::size_t i = t; i < root.children.size(); i += threads) tv[i] = get(root.children[i]);
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker, t);
    worker(0);
    for (auto& th : pool) th.join();
    return root_sum(tv);
}

double Evaluator::evaluate_uncached(const ZeroSet& zero) const { return evaluate_with(alpha_, &zero); }

double Evaluator::evaluate_with(std::span<const double> alpha, const ZeroSet* zero) const {
    if (alpha.size() != alpha_.size()) throw std::invalid_argument("Evaluator: wrong number of values");
    const auto& nodes = poly_->nodes();
    std::vector<double> vals(nodes.size(), 0.0);
    const NodeId root = poly_->root();
    for (NodeId id = 0; id < nodes.size(); ++id) {
        const auto& n = nodes[id];
        if (id == root && n.kind == NodeKind::sum) {
            std::vector<double> tv;
            tv.reserve(n.children.size());
            for (auto c : n.children) tv.push_back(vals[c]);
            vals[id] = root_sum(tv);
        } else {
            vals[id] = combine(n, alpha, zero, [&](NodeId c) { return vals[c]; });
        }
    }
    return vals.back();
}

double Evaluator::value_with(StatId j, double v) const {
    const NodeId leaf = poly_->leaf_of(j);
    if (leaf == kNoNode) return value();
    const auto& nodes = poly_->nodes();
    auto& sc = tls_scratch;
    sc.begin(nodes.size());
    sc.put(leaf, nodes[leaf].kind == NodeKind::correction ? v - 1.0 : v);
    auto get = [&](NodeId c) { return sc.has(c) ? sc.value[c] : cache_[c]; };
    const NodeId root = poly_->root();
    for (auto id : poly_->ancestors(j)) {
        const auto& n = nodes[id];
        if (id == root && n.kind == NodeKind::sum) {
            std::vector<double> tv;
            tv.reserve(n.children.size());
            for (auto c : n.children) tv.push_back(get(c));
            sc.put(id, root_sum(tv));
        } else {
            sc.put(id, combine(n, alpha_, nullptr, get));
        }
    }
    return sc.value[root];
}

std::pair<double, double> Evaluator::partial(StatId j) const {
    const double b = value_with(j, 0.0);
    const double a = value_with(j, 1.0) - b;
    return {b, a};
}

void Evaluator::set_alpha(StatId j, double v) {
    alpha_.at(j) = v;
    const NodeId leaf = poly_->leaf_of(j);
    if (leaf == kNoNode) return;
    const auto& nodes = poly_->nodes();
    cache_[leaf] = combine(nodes[leaf], alpha_, nullptr, [&](NodeId c) { return cache_[c]; });
    const NodeId root = poly_->root();
    for (auto id : poly_->ancestors(j)) {
        const auto& n = nodes[id];
        if (id == root && n.kind == NodeKind::sum) {
            std::vector<double> tv;
            tv.reserve(n.children.size());
            for (auto c : n.children) tv.push_back(cache_[c]);
            cache_[id] = root_sum(tv);
        } else {
            cache_[id] = combine(n, alpha_, nullptr, [&](NodeId c) { return cache_[c]; });
        }
    }
}

}  // namespace maxent
