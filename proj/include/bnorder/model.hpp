#pragma once

// Core domain types: discrete variables, a fixed node ordering, DAGs whose
// edges respect that ordering, conditional probability tables, networks and
// complete datasets.
//
// Every dense table in the library uses the same addressing convention: the
// cells of a scope (v_0, ..., v_k) are laid out row-major with the LAST scope
// variable varying fastest.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bnorder/errors.hpp"

namespace bnorder {

using Var = std::size_t;
using Scope = std::vector<Var>;

struct VariableSpec {
    std::string name;
    std::size_t cardinality = 2;

    friend bool operator==(const VariableSpec&, const VariableSpec&) = default;
};

using Specs = std::vector<VariableSpec>;

// Throws std::invalid_argument on a cardinality < 2 or a repeated name.
void validate_specs(const Specs& specs);

class NodeOrdering {
public:
    NodeOrdering() = default;
    explicit NodeOrdering(std::vector<Var> order);

    static NodeOrdering identity(std::size_t n);

    const std::vector<Var>& order() const { return order_; }
    std::size_t size() const { return order_.size(); }
    std::size_t position(Var v) const;
    bool precedes(Var a, Var b) const { return position(a) < position(b); }

    // Variables strictly before v, ascending by variable index.
    Scope predecessors(Var v) const;

    friend bool operator==(const NodeOrdering& a, const NodeOrdering& b) {
        return a.order_ == b.order_;
    }

private:
    std::vector<Var> order_;
    std::vector<std::size_t> rank_;
};

// A DAG whose edges all point forward in a node ordering. Parent lists are
// kept sorted by ordering position, which is also the CPT row layout.
class OrderedDag {
public:
    OrderedDag() = default;

    const NodeOrdering& ordering() const { return ordering_; }
    std::size_t size() const { return parents_.size(); }
    const Scope& parents(Var v) const;
    std::size_t num_edges() const;

    friend bool operator==(const OrderedDag& a, const OrderedDag& b) {
        return a.ordering_ == b.ordering_ && a.parents_ == b.parents_;
    }

private:
    friend OrderedDag validate_dag(const Specs&, const NodeOrdering&, std::vector<Scope>);

    NodeOrdering ordering_;
    std::vector<Scope> parents_;
};

// Returns the DAG iff every parent precedes its child. Parent sets are
// re-sorted by ordering position; duplicates are rejected.
OrderedDag validate_dag(const Specs& specs, const NodeOrdering& ordering,
                        std::vector<Scope> parents);

OrderedDag empty_dag(const Specs& specs, const NodeOrdering& ordering);
OrderedDag complete_dag(const Specs& specs, const NodeOrdering& ordering);

// Σ_v (|X_v| - 1) · Π_{p ∈ pa(v)} |X_p|, from full cardinalities.
std::size_t num_free_parameters(const Specs& specs, const OrderedDag& dag);

// Number of cells in the dense table over `scope`. Throws StateSpaceTooLarge
// if the product overflows `limit`.
std::size_t state_space_size(const Specs& specs, std::span<const Var> scope,
                             std::size_t limit = SIZE_MAX);

std::size_t family_config_index(const Specs& specs, std::span<const Var> scope,
                                std::span<const std::size_t> assignment);
std::vector<std::size_t> family_config_decode(const Specs& specs, std::span<const Var> scope,
                                              std::size_t index);

// For each variable of `sub`, its stride inside the dense layout of `table`
// (0 when the variable is absent from `table`). Summing state·stride over an
// assignment of `sub` addresses the corresponding cell of `table`.
std::vector<std::size_t> scope_strides(const Specs& specs, std::span<const Var> table,
                                       std::span<const Var> sub);

// Odometer over the cells of a scope in ascending dense index order.
class AssignmentCounter {
public:
    explicit AssignmentCounter(std::vector<std::size_t> cardinalities);

    const std::vector<std::size_t>& values() const { return values_; }
    // Advances to the next assignment; returns false after the last one.
    bool next();

private:
    std::vector<std::size_t> cards_;
    std::vector<std::size_t> values_;
};

std::vector<std::size_t> cardinalities_of(const Specs& specs, std::span<const Var> scope);

class Cpt {
public:
    // `table` holds num_rows() × child cardinality entries. Rows flagged
    // undefined are replaced by uniform rows.
    Cpt(Var child, std::size_t child_cardinality, Scope parents,
        std::vector<std::size_t> parent_cardinalities, std::vector<double> table,
        std::vector<bool> defined);

    Var child() const { return child_; }
    std::size_t child_cardinality() const { return child_card_; }
    const Scope& parents() const { return parents_; }
    const std::vector<std::size_t>& parent_cardinalities() const { return parent_cards_; }
    std::size_t num_rows() const { return defined_.size(); }
    std::span<const double> row(std::size_t r) const;
    bool defined(std::size_t r) const { return defined_.at(r); }
    const std::vector<double>& table() const { return table_; }

private:
    Var child_;
    std::size_t child_card_;
    Scope parents_;
    std::vector<std::size_t> parent_cards_;
    std::vector<double> table_;
    std::vector<bool> defined_;
};

class BayesNet {
public:
    BayesNet(Specs specs, OrderedDag dag, std::vector<Cpt> cpts);

    const Specs& specs() const { return specs_; }
    const OrderedDag& dag() const { return dag_; }
    const NodeOrdering& ordering() const { return dag_.ordering(); }
    const Cpt& cpt(Var v) const { return cpts_.at(v); }
    const std::vector<Cpt>& cpts() const { return cpts_; }
    std::size_t size() const { return specs_.size(); }

private:
    Specs specs_;
    OrderedDag dag_;
    std::vector<Cpt> cpts_;
};

// Complete categorical data: `num_rows()` records of state indices, stored
// row-major.
class Dataset {
public:
    Dataset(Specs specs, std::vector<std::uint32_t> cells);

    const Specs& specs() const { return specs_; }
    std::size_t num_vars() const { return specs_.size(); }
    std::size_t num_rows() const { return num_vars() == 0 ? 0 : cells_.size() / num_vars(); }
    std::span<const std::uint32_t> row(std::size_t r) const {
        return {cells_.data() + r * num_vars(), num_vars()};
    }
    std::uint32_t at(std::size_t r, Var v) const { return cells_[r * num_vars() + v]; }
    const std::vector<std::uint32_t>& cells() const { return cells_; }

private:
    Specs specs_;
    std::vector<std::uint32_t> cells_;
};

// Marginal counts n(x_A). The scope is kept in ascending variable order.
struct CountTable {
    Scope scope;
    std::vector<std::size_t> cardinalities;
    std::vector<std::uint64_t> counts;

    std::uint64_t total() const;
};

// Scope helpers. Sets are represented as vectors sorted ascending.
Scope sorted_unique(Scope s);
bool is_subset(const Scope& a, const Scope& b);
bool disjoint(const Scope& a, const Scope& b);
Scope set_union(const Scope& a, const Scope& b);
Scope set_difference(const Scope& a, const Scope& b);

}  // namespace bnorder
