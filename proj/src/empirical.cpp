#include "bnorder/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bnorder {

namespace {

std::size_t dot(const std::vector<std::size_t>& values, const std::vector<std::size_t>& strides) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < values.size(); ++k) idx += values[k] * strides[k];
    return idx;
}

void check_family(const Specs& specs, Var i, const Scope& pa) {
    if (i >= specs.size()) throw UnknownVariable(i);
    for (Var p : pa) {
        if (p >= specs.size()) throw UnknownVariable(p);
        if (p == i) throw ScopeOverlap("a variable cannot be its own parent");
    }
    if (sorted_unique(pa).size() != pa.size())
        throw std::invalid_argument("parent set has repeated variables");
}

}  // namespace

EmpiricalContext::EmpiricalContext(Dataset data) : data_(std::move(data)) {}

std::size_t EmpiricalContext::cache_size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

std::shared_ptr<const CountTable> EmpiricalContext::counts(const Scope& scope) const {
    const Scope key = sorted_unique(scope);
    if (key.size() != scope.size()) throw std::invalid_argument("count scope has repeated variables");
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    // Reuse the smallest cached superset when it has fewer cells than rows.
    const CountTable* best = nullptr;
    for (const auto& [cached_scope, table] : cache_) {
        if (cached_scope.size() <= key.size()) continue;
        if (!std::includes(cached_scope.begin(), cached_scope.end(), key.begin(), key.end()))
            continue;
        if (!best || table->counts.size() < best->counts.size()) best = table.get();
    }
    auto table = std::make_shared<const CountTable>(
        best && best->counts.size() < data_.num_rows() ? marginalize_counts(specs(), *best, key)
                                                       : tally_counts(data_, key));
    cache_.emplace(key, table);
    return table;
}

CountTable tally_counts(const Dataset& data, const Scope& scope) {
    CountTable out;
    out.scope = sorted_unique(scope);
    const Specs& specs = data.specs();
    out.cardinalities = cardinalities_of(specs, out.scope);
    out.counts.assign(state_space_size(specs, out.scope, kMaxCountCells), 0);
    const auto strides = scope_strides(specs, out.scope, out.scope);
    for (std::size_t r = 0; r < data.num_rows(); ++r) {
        const auto row = data.row(r);
        std::size_t idx = 0;
        for (std::size_t k = 0; k < out.scope.size(); ++k) idx += row[out.scope[k]] * strides[k];
        ++out.counts[idx];
    }
    return out;
}

CountTable marginalize_counts(const Specs& specs, const CountTable& source, const Scope& scope) {
    CountTable out;
    out.scope = sorted_unique(scope);
    if (!is_subset(out.scope, source.scope))
        throw std::invalid_argument("count marginalization target is not a sub-scope");
    out.cardinalities = cardinalities_of(specs, out.scope);
    out.counts.assign(state_space_size(specs, out.scope), 0);
    const auto strides = scope_strides(specs, out.scope, source.scope);
    AssignmentCounter cell(source.cardinalities);
    std::size_t idx = 0;
    do {
        out.counts[dot(cell.values(), strides)] += source.counts[idx++];
    } while (cell.next());
    return out;
}

CountTable marginal_counts(const EmpiricalContext& ctx, const Scope& scope) {
    return *ctx.counts(scope);
}

Cpt mle_cpt(const EmpiricalContext& ctx, Var i, const Scope& pa) {
    const Specs& specs = ctx.specs();
    check_family(specs, i, pa);
    Scope family = pa;
    family.push_back(i);
    const auto table = ctx.counts(family);
    const auto strides = scope_strides(specs, table->scope, family);

    const std::size_t card = specs[i].cardinality;
    const auto parent_cards = cardinalities_of(specs, pa);
    const std::size_t rows = state_space_size(specs, pa);
    std::vector<double> probs(rows * card, 0.0);
    std::vector<bool> defined(rows, false);

    AssignmentCounter cell(cardinalities_of(specs, family));
    std::vector<std::uint64_t> family_counts(rows * card);
    std::size_t idx = 0;
    do {
        family_counts[idx++] = table->counts[dot(cell.values(), strides)];
    } while (cell.next());

    for (std::size_t r = 0; r < rows; ++r) {
        std::uint64_t n_row = 0;
        for (std::size_t k = 0; k < card; ++k) n_row += family_counts[r * card + k];
        if (n_row == 0) continue;
        defined[r] = true;
        for (std::size_t k = 0; k < card; ++k)
            probs[r * card + k] =
                static_cast<double>(family_counts[r * card + k]) / static_cast<double>(n_row);
    }
    return Cpt(i, card, pa, parent_cards, std::move(probs), std::move(defined));
}

JointTable empirical_joint(const EmpiricalContext& ctx) {
    const Specs& specs = ctx.specs();
    Scope all(specs.size());
    for (Var v = 0; v < all.size(); ++v) all[v] = v;
    state_space_size(specs, all, kMaxJointCells);
    if (ctx.num_rows() == 0) throw std::invalid_argument("empirical distribution of an empty dataset");
    const auto table = ctx.counts(all);
    const double n = static_cast<double>(ctx.num_rows());
    std::vector<double> probs(table->counts.size());
    for (std::size_t x = 0; x < probs.size(); ++x)
        probs[x] = static_cast<double>(table->counts[x]) / n;
    return JointTable(specs, std::move(probs));
}

double empirical_cce(const EmpiricalContext& ctx, Var i, const Scope& s, const Scope& c) {
    const Specs& specs = ctx.specs();
    if (i >= specs.size()) throw UnknownVariable(i);
    for (Var v : s)
        if (v >= specs.size()) throw UnknownVariable(v);
    for (Var v : c)
        if (v >= specs.size()) throw UnknownVariable(v);
    const Scope is{i};
    if (!disjoint(is, s) || !disjoint(is, c) || !disjoint(s, c))
        throw ScopeOverlap("cross entropy scopes must be disjoint");
    if (s.empty() || ctx.num_rows() == 0) return 0.0;

    const Scope isc = set_union(set_union(is, s), c);
    const auto n_isc = ctx.counts(isc);
    const auto n_c = ctx.counts(c);
    const auto n_ic = ctx.counts(set_union(is, c));
    const auto n_sc = ctx.counts(set_union(s, c));
    const auto to_c = scope_strides(specs, n_c->scope, isc);
    const auto to_ic = scope_strides(specs, n_ic->scope, isc);
    const auto to_sc = scope_strides(specs, n_sc->scope, isc);

    double sum = 0.0;
    AssignmentCounter cell(n_isc->cardinalities);
    std::size_t idx = 0;
    do {
        const std::uint64_t n = n_isc->counts[idx++];
        if (n == 0) continue;
        const auto& x = cell.values();
        const double numer = static_cast<double>(n) * static_cast<double>(n_c->counts[dot(x, to_c)]);
        const double denom = static_cast<double>(n_ic->counts[dot(x, to_ic)]) *
                             static_cast<double>(n_sc->counts[dot(x, to_sc)]);
        sum += static_cast<double>(n) * std::log(numer / denom);
    } while (cell.next());
    return clamp_nonnegative(sum / static_cast<double>(ctx.num_rows()),
                             "empirical conditional cross entropy");
}

double family_log_likelihood(const EmpiricalContext& ctx, Var i, const Scope& pa) {
    const Specs& specs = ctx.specs();
    const Cpt cpt = mle_cpt(ctx, i, pa);
    Scope family = pa;
    family.push_back(i);
    const auto table = ctx.counts(family);
    const auto strides = scope_strides(specs, table->scope, family);

    const std::size_t card = specs[i].cardinality;
    double ll = 0.0;
    AssignmentCounter cell(cardinalities_of(specs, family));
    std::size_t idx = 0;
    do {
        const std::uint64_t n = table->counts[dot(cell.values(), strides)];
        if (n > 0) ll += static_cast<double>(n) * std::log(cpt.row(idx / card)[idx % card]);
        ++idx;
    } while (cell.next());
    return ll;
}

double log_likelihood(const EmpiricalContext& ctx, const OrderedDag& dag) {
    if (dag.size() != ctx.specs().size())
        throw std::invalid_argument("graph and dataset disagree on the number of variables");
    double ll = 0.0;
    for (Var v = 0; v < dag.size(); ++v) ll += family_log_likelihood(ctx, v, dag.parents(v));
    return ll;
}

double log_likelihood_ratio(const EmpiricalContext& ctx, Var i, const Scope& pa_old,
                            const Scope& pa_new) {
    if (!is_subset(pa_old, pa_new)) throw NotNested("old parent set is not contained in the new one");
    const double ll_old = family_log_likelihood(ctx, i, sorted_unique(pa_old));
    const double ll_new = family_log_likelihood(ctx, i, sorted_unique(pa_new));
    // both sides are O(N); round-off scales with their magnitude
    const double tolerance = kEntropyClamp * std::max(1.0, std::abs(ll_old));
    return clamp_nonnegative(ll_new - ll_old, "log-likelihood ratio", tolerance);
}

std::size_t dof_delta(const Specs& specs, Var i, const Scope& pa_old, const Scope& pa_new) {
    if (!is_subset(pa_old, pa_new)) throw NotNested("old parent set is not contained in the new one");
    if (i >= specs.size()) throw UnknownVariable(i);
    const Scope old_set = sorted_unique(pa_old), new_set = sorted_unique(pa_new);
    return (specs[i].cardinality - 1) *
           (state_space_size(specs, new_set) - state_space_size(specs, old_set));
}

}  // namespace bnorder
