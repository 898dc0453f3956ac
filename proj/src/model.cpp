#include "bnorder/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace bnorder {

void validate_specs(const Specs& specs) {
    std::set<std::string> names;
    for (const auto& s : specs) {
        if (s.cardinality < 2)
            throw std::invalid_argument("variable '" + s.name + "' has cardinality < 2");
        if (!names.insert(s.name).second)
            throw std::invalid_argument("duplicate variable name '" + s.name + "'");
    }
}

NodeOrdering::NodeOrdering(std::vector<Var> order) : order_(std::move(order)) {
    const std::size_t n = order_.size();
    rank_.assign(n, n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        Var v = order_[pos];
        if (v >= n || rank_[v] != n)
            throw std::invalid_argument("node ordering is not a permutation of 0..n-1");
        rank_[v] = pos;
    }
}

NodeOrdering NodeOrdering::identity(std::size_t n) {
    std::vector<Var> order(n);
    std::iota(order.begin(), order.end(), Var{0});
    return NodeOrdering(std::move(order));
}

std::size_t NodeOrdering::position(Var v) const {
    if (v >= rank_.size()) throw UnknownVariable(v);
    return rank_[v];
}

Scope NodeOrdering::predecessors(Var v) const {
    Scope out(order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(position(v)));
    std::sort(out.begin(), out.end());
    return out;
}

const Scope& OrderedDag::parents(Var v) const {
    if (v >= parents_.size()) throw UnknownVariable(v);
    return parents_[v];
}

std::size_t OrderedDag::num_edges() const {
    std::size_t e = 0;
    for (const auto& p : parents_) e += p.size();
    return e;
}

OrderedDag validate_dag(const Specs& specs, const NodeOrdering& ordering,
                        std::vector<Scope> parents) {
    const std::size_t n = specs.size();
    if (ordering.size() != n)
        throw std::invalid_argument("ordering length does not match number of variables");
    if (parents.size() > n) throw UnknownVariable(parents.size() - 1);
    parents.resize(n);
    for (Var child = 0; child < n; ++child) {
        auto& pa = parents[child];
        for (Var p : pa) {
            if (p >= n) throw UnknownVariable(p);
            if (!ordering.precedes(p, child)) throw OrderViolation(child, p);
        }
        std::sort(pa.begin(), pa.end(), [&](Var a, Var b) {
            return ordering.position(a) < ordering.position(b);
        });
        if (std::adjacent_find(pa.begin(), pa.end()) != pa.end())
            throw std::invalid_argument("duplicate parent of variable " + std::to_string(child));
    }
    OrderedDag dag;
    dag.ordering_ = ordering;
    dag.parents_ = std::move(parents);
    return dag;
}

OrderedDag empty_dag(const Specs& specs, const NodeOrdering& ordering) {
    return validate_dag(specs, ordering, std::vector<Scope>(specs.size()));
}

OrderedDag complete_dag(const Specs& specs, const NodeOrdering& ordering) {
    std::vector<Scope> parents(specs.size());
    for (Var v = 0; v < specs.size(); ++v) parents[v] = ordering.predecessors(v);
    return validate_dag(specs, ordering, std::move(parents));
}

std::size_t num_free_parameters(const Specs& specs, const OrderedDag& dag) {
    std::size_t total = 0;
    for (Var v = 0; v < dag.size(); ++v)
        total += (specs.at(v).cardinality - 1) * state_space_size(specs, dag.parents(v));
    return total;
}

std::size_t state_space_size(const Specs& specs, std::span<const Var> scope, std::size_t limit) {
    std::size_t cells = 1;
    for (Var v : scope) {
        if (v >= specs.size()) throw UnknownVariable(v);
        const std::size_t c = specs[v].cardinality;
        if (cells > limit / c)
            throw StateSpaceTooLarge("state space over " + std::to_string(scope.size()) +
                                     " variables exceeds " + std::to_string(limit) + " cells");
        cells *= c;
    }
    return cells;
}

std::size_t family_config_index(const Specs& specs, std::span<const Var> scope,
                                std::span<const std::size_t> assignment) {
    if (assignment.size() != scope.size())
        throw OutOfRange("assignment length does not match scope length");
    std::size_t index = 0;
    for (std::size_t k = 0; k < scope.size(); ++k) {
        if (scope[k] >= specs.size()) throw UnknownVariable(scope[k]);
        const std::size_t card = specs[scope[k]].cardinality;
        if (assignment[k] >= card)
            throw OutOfRange("state " + std::to_string(assignment[k]) + " out of range for '" +
                             specs[scope[k]].name + "'");
        index = index * card + assignment[k];
    }
    return index;
}

std::vector<std::size_t> family_config_decode(const Specs& specs, std::span<const Var> scope,
                                              std::size_t index) {
    if (index >= state_space_size(specs, scope))
        throw OutOfRange("configuration index " + std::to_string(index) + " out of range");
    std::vector<std::size_t> assignment(scope.size());
    for (std::size_t k = scope.size(); k-- > 0;) {
        const std::size_t card = specs[scope[k]].cardinality;
        assignment[k] = index % card;
        index /= card;
    }
    return assignment;
}

std::vector<std::size_t> scope_strides(const Specs& specs, std::span<const Var> table,
                                       std::span<const Var> sub) {
    std::vector<std::size_t> table_strides(table.size());
    std::size_t stride = 1;
    for (std::size_t k = table.size(); k-- > 0;) {
        table_strides[k] = stride;
        stride *= specs.at(table[k]).cardinality;
    }
    std::vector<std::size_t> out(sub.size(), 0);
    for (std::size_t j = 0; j < sub.size(); ++j) {
        auto it = std::find(table.begin(), table.end(), sub[j]);
        if (it != table.end()) out[j] = table_strides[static_cast<std::size_t>(it - table.begin())];
    }
    return out;
}

AssignmentCounter::AssignmentCounter(std::vector<std::size_t> cardinalities)
    : cards_(std::move(cardinalities)), values_(cards_.size(), 0) {}

bool AssignmentCounter::next() {
    for (std::size_t k = cards_.size(); k-- > 0;) {
        if (++values_[k] < cards_[k]) return true;
        values_[k] = 0;
    }
    return false;
}

std::vector<std::size_t> cardinalities_of(const Specs& specs, std::span<const Var> scope) {
    std::vector<std::size_t> out;
    out.reserve(scope.size());
    for (Var v : scope) {
        if (v >= specs.size()) throw UnknownVariable(v);
        out.push_back(specs[v].cardinality);
    }
    return out;
}

Cpt::Cpt(Var child, std::size_t child_cardinality, Scope parents,
         std::vector<std::size_t> parent_cardinalities, std::vector<double> table,
         std::vector<bool> defined)
    : child_(child), child_card_(child_cardinality), parents_(std::move(parents)),
      parent_cards_(std::move(parent_cardinalities)), table_(std::move(table)),
      defined_(std::move(defined)) {
    if (child_card_ < 1) throw std::invalid_argument("CPT child cardinality must be positive");
    if (parent_cards_.size() != parents_.size())
        throw std::invalid_argument("CPT parent cardinalities do not match parents");
    std::size_t rows = 1;
    for (std::size_t c : parent_cards_) rows *= c;
    if (defined_.size() != rows || table_.size() != rows * child_card_)
        throw std::invalid_argument("CPT of variable " + std::to_string(child_) +
                                    " has the wrong shape");
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = table_.data() + r * child_card_;
        if (!defined_[r]) {
            std::fill(row, row + child_card_, 1.0 / static_cast<double>(child_card_));
            continue;
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < child_card_; ++k) {
            if (!(row[k] >= 0.0) || !std::isfinite(row[k]))
                throw std::invalid_argument("CPT of variable " + std::to_string(child_) +
                                            " has a negative or non-finite entry");
            sum += row[k];
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("CPT row " + std::to_string(r) + " of variable " +
                                        std::to_string(child_) + " does not sum to 1");
    }
}

std::span<const double> Cpt::row(std::size_t r) const {
    if (r >= num_rows()) throw OutOfRange("CPT row out of range");
    return {table_.data() + r * child_card_, child_card_};
}

BayesNet::BayesNet(Specs specs, OrderedDag dag, std::vector<Cpt> cpts)
    : specs_(std::move(specs)), dag_(std::move(dag)), cpts_(std::move(cpts)) {
    validate_specs(specs_);
    if (dag_.size() != specs_.size() || cpts_.size() != specs_.size())
        throw std::invalid_argument("network components disagree on the number of variables");
    for (Var v = 0; v < specs_.size(); ++v) {
        const Cpt& c = cpts_[v];
        if (c.child() != v || c.child_cardinality() != specs_[v].cardinality ||
            c.parents() != dag_.parents(v) ||
            c.parent_cardinalities() != cardinalities_of(specs_, dag_.parents(v)))
            throw std::invalid_argument("CPT of variable " + std::to_string(v) +
                                        " does not match the graph");
    }
}

Dataset::Dataset(Specs specs, std::vector<std::uint32_t> cells)
    : specs_(std::move(specs)), cells_(std::move(cells)) {
    validate_specs(specs_);
    const std::size_t n = specs_.size();
    if (n == 0) {
        if (!cells_.empty()) throw std::invalid_argument("dataset without variables has cells");
        return;
    }
    if (cells_.size() % n != 0) throw std::invalid_argument("dataset cells are not a whole number of rows");
    for (std::size_t k = 0; k < cells_.size(); ++k) {
        if (cells_[k] >= specs_[k % n].cardinality)
            throw OutOfRange("row " + std::to_string(k / n) + ": state " +
                             std::to_string(cells_[k]) + " out of range for '" +
                             specs_[k % n].name + "'");
    }
}

std::uint64_t CountTable::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

Scope sorted_unique(Scope s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

bool is_subset(const Scope& a, const Scope& b) {
    const Scope sa = sorted_unique(a), sb = sorted_unique(b);
    return std::includes(sb.begin(), sb.end(), sa.begin(), sa.end());
}

bool disjoint(const Scope& a, const Scope& b) {
    for (Var v : a)
        if (std::find(b.begin(), b.end(), v) != b.end()) return false;
    return true;
}

Scope set_union(const Scope& a, const Scope& b) {
    Scope out = a;
    out.insert(out.end(), b.begin(), b.end());
    return sorted_unique(std::move(out));
}

Scope set_difference(const Scope& a, const Scope& b) {
    Scope out;
    for (Var v : sorted_unique(a))
        if (std::find(b.begin(), b.end(), v) == b.end()) out.push_back(v);
    return out;
}

}  // namespace bnorder
