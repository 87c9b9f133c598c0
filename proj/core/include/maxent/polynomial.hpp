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
#include <maxent/value_set.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace maxent {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

enum class NodeKind {
    variable,    // alpha_j
    correction,  // alpha_j - 1
    sum1d,       // sum of 1D variables of one attribute; children are variable nodes
    sum,
    product,
};

struct PolyNode {
    NodeKind kind = NodeKind::sum;
    StatId stat = kNoStat;    // variable / correction
    AttrId attr = 0;          // sum1d and variable nodes
    ValueIndex value = 0;     // variable nodes
    std::uint32_t group = 0;  // correction nodes: index into StatisticSet::groups()
    std::vector<NodeId> children;
    std::uint64_t attr_mask = 0;   // attributes whose 1D variables appear below
    std::uint64_t group_mask = 0;  // statistic groups whose corrections appear below
};

/// Members per statistic group, indexed like StatisticSet::groups().
using StatsByGroup = std::vector<std::vector<StatId>>;

StatsByGroup stats_by_group(const StatisticSet& stats);

/// Inner mode: groups taking exactly one statistic from every nonempty entry of `by_group`.
/// Outer mode: every maximal conflict-free group with at least two members.
/// A group is conflict-free when, for every attribute, its members' clauses share a value.
/// Result keyed by group-index set; each entry's groups sorted by member ids.
std::map<std::vector<std::uint32_t>, std::vector<std::vector<StatId>>>
find_no_conflict_groups(const StatisticSet& stats, const StatsByGroup& by_group, bool outer);

/// Drops statistics that belong to no conflict-free group of size >= 2.
StatsByGroup conflict_reduce(const StatisticSet& stats, const StatsByGroup& by_group);

struct SizeReport {
    std::uint64_t one_d_refs = 0;        // 1D variable leaves, counted as in the expanded tree
    std::uint64_t correction_terms = 0;  // correction leaves, counted the same way
    std::size_t nodes = 0;               // distinct DAG nodes
    std::size_t top_level_terms = 0;
    std::size_t groups = 0;              // conflict-free group terms
};

/// Expression DAG for P. Children always precede their parents, so node order is a
/// topological order; the root is the last node.
class CompressedPolynomial {
public:
    CompressedPolynomial() = default;

    /// Rebuilds derived indexes from a raw node list (used when loading a stored summary).
    static CompressedPolynomial from_nodes(std::vector<PolyNode> nodes, std::size_t statistic_count);

    const std::vector<PolyNode>& nodes() const noexcept { return nodes_; }
    const PolyNode& node(NodeId id) const { return nodes_.at(id); }
    NodeId root() const noexcept { return static_cast<NodeId>(nodes_.size() - 1); }
    std::size_t statistic_count() const noexcept { return var_node_.size(); }

    /// Children of the root: the 1D product first, then one term per group-index key.
    const std::vector<NodeId>& terms() const { return nodes_.back().children; }
    /// Group-index key per top-level term (empty for the 1D product).
    const std::vector<std::vector<std::uint32_t>>& term_keys() const noexcept { return term_keys_; }

    /// Leaf node of a statistic's variable (variable node for 1D, correction node otherwise);
    /// kNoNode for statistics a stand-alone term does not reference.
    NodeId leaf_of(StatId j) const { return var_node_.at(j); }
    /// Nodes containing statistic j strictly above its leaf, ascending (topological).
    const std::vector<NodeId>& ancestors(StatId j) const { return ancestors_.at(j); }

    SizeReport size_report() const;

private:
    friend class PolynomialBuilder;
    friend CompressedPolynomial build_term(const StatisticSet&, const std::vector<StatId>&);
    void finalize(std::size_t statistic_count, bool strict = true);

    std::vector<PolyNode> nodes_;
    std::vector<NodeId> var_node_;
    std::vector<std::vector<NodeId>> ancestors_;
    std::vector<std::vector<std::uint32_t>> term_keys_;
};

CompressedPolynomial build_compressed_naive(const StatisticSet& stats);
CompressedPolynomial build_compressed_optimized(const StatisticSet& stats);

/// Stand-alone polynomial whose root is the term of one conflict-free group:
/// per covered attribute, the sum of 1D variables compatible with the group, times
/// the corrections of its members.
CompressedPolynomial build_term(const StatisticSet& stats, const std::vector<StatId>& group);

/// Per-attribute allowed value sets derived from a query; 1D variables outside are zeroed.
class ZeroSet {
public:
    ZeroSet() = default;
    explicit ZeroSet(std::vector<std::uint32_t> domain_sizes);
    static ZeroSet from_predicate(const Predicate& pred, const std::vector<std::uint32_t>& domain_sizes);

    void restrict(AttrId attr, const ValueSet& allowed);
    bool allows(AttrId attr, ValueIndex v) const noexcept {
        return !((mask_ >> attr) & 1U) || allowed_[attr].contains(v);
    }
    std::uint64_t mask() const noexcept { return mask_; }
    bool empty() const noexcept { return mask_ == 0; }

private:
    std::vector<ValueSet> allowed_;
    std::uint64_t mask_ = 0;
};

/// Solved values plus a full-value cache over a shared polynomial. Const members are
/// safe for concurrent callers; set_alpha/assign are single-writer.
class Evaluator {
public:
    Evaluator() = default;
    Evaluator(std::shared_ptr<const CompressedPolynomial> poly, std::vector<double> alpha);

    const CompressedPolynomial& polynomial() const { return *poly_; }
    std::shared_ptr<const CompressedPolynomial> polynomial_ptr() const { return poly_; }
    const std::vector<double>& alpha() const noexcept { return alpha_; }
    double alpha(StatId j) const { return alpha_.at(j); }

    /// P at the current assignment (cached).
    double value() const noexcept { return cache_.back(); }
    double cached(NodeId id) const { return cache_.at(id); }

    /// P with the zero-set applied; untouched subterms reuse cached values.
    double evaluate(const ZeroSet& zero) const;
    /// Same result computed from scratch without consulting the cache.
    double evaluate_uncached(const ZeroSet& zero) const;
    /// Top-level terms evaluated on `threads` workers; bit-identical to evaluate().
    double evaluate_parallel(const ZeroSet& zero, unsigned threads) const;

    /// Full recomputation under an arbitrary assignment (oracle path).
    double evaluate_with(std::span<const double> alpha, const ZeroSet* zero = nullptr) const;

    /// (B, A) with P = alpha_j * A + B at the current assignment.
    std::pair<double, double> partial(StatId j) const;
    /// P with alpha_j replaced by v, everything else at the current assignment.
    double value_with(StatId j, double v) const;

    void set_alpha(StatId j, double v);
    void assign(std::vector<double> alpha);

private:
    double node_value(const PolyNode& n, std::span<const double> vals, std::span<const double> alpha,
                      const ZeroSet* zero) const;
    double root_sum(std::span<const double> term_values) const;
    void recompute_all();

    std::shared_ptr<const CompressedPolynomial> poly_;
    std::vector<double> alpha_;
    std::vector<double> cache_;
};

/// (B, A) with P = alpha_j * A + B.
inline std::pair<double, double> partial_value(const Evaluator& ev, StatId j) { return ev.partial(j); }

/// Pairwise (tree) summation; fixed association for a given length.
double pairwise_sum(std::span<const double> values);

}  // namespace maxent
