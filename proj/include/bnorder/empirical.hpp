#pragma once

// Finite-data estimation from a complete dataset: marginal counts, maximum
// likelihood CPTs, the saturated empirical distribution, the empirical
// conditional cross entropy and (log-)likelihood ratios of nested families.

#include <map>
#include <memory>
#include <mutex>

#include "bnorder/exact.hpp"
#include "bnorder/model.hpp"

namespace bnorder {

inline constexpr std::size_t kMaxCountCells = std::size_t{1} << 24;

// Dataset plus a memo of count tables keyed by sorted scope. Safe for
// concurrent queries; the cache is internally synchronised.
class EmpiricalContext {
public:
    explicit EmpiricalContext(Dataset data);

    const Dataset& data() const { return data_; }
    const Specs& specs() const { return data_.specs(); }
    std::size_t num_rows() const { return data_.num_rows(); }

    std::shared_ptr<const CountTable> counts(const Scope& scope) const;
    std::size_t cache_size() const;

private:
    Dataset data_;
    mutable std::mutex mutex_;
    mutable std::map<Scope, std::shared_ptr<const CountTable>> cache_;
};

// Direct tally over the rows; `scope` is sorted before counting.
CountTable tally_counts(const Dataset& data, const Scope& scope);

// Sums a count table down to a sub-scope (sorted).
CountTable marginalize_counts(const Specs& specs, const CountTable& source, const Scope& scope);

CountTable marginal_counts(const EmpiricalContext& ctx, const Scope& scope);

// p̂(x_i | x_pa) = n(x_i, x_pa) / n(x_pa). The CPT keeps `pa` in the order
// given; unobserved parent configurations are marked undefined.
Cpt mle_cpt(const EmpiricalContext& ctx, Var i, const Scope& pa);

JointTable empirical_joint(const EmpiricalContext& ctx);

// (1/N) Σ n(x_i, x_S, x_C) log[ n(x_i,x_S,x_C) n(x_C) / (n(x_i,x_C) n(x_S,x_C)) ].
// Evaluated from integer counts without materialising p̂.
double empirical_cce(const EmpiricalContext& ctx, Var i, const Scope& s, const Scope& c);

// Σ n(x_i, x_pa) log p̂(x_i | x_pa), evaluated through mle_cpt.
double family_log_likelihood(const EmpiricalContext& ctx, Var i, const Scope& pa);

double log_likelihood(const EmpiricalContext& ctx, const OrderedDag& dag);

// log L(p̂_g') − log L(p̂_g) for graphs differing only in the parents of i.
double log_likelihood_ratio(const EmpiricalContext& ctx, Var i, const Scope& pa_old,
                            const Scope& pa_new);

// (|X_i| − 1)·(Π_{pa_new} |X_p| − Π_{pa_old} |X_p|).
std::size_t dof_delta(const Specs& specs, Var i, const Scope& pa_old, const Scope& pa_new);

}  // namespace bnorder
