#pragma once

// Exact algebra over a dense joint distribution P(X): marginals, KL
// divergence, (conditional) cross entropy, the KL-minimising projection onto
// a DAG, the per-node KL decomposition, and ancestral sampling.
//
// All quantities are in nats. Cells with zero probability contribute 0
// (0·log 0 = 0). Sums run in ascending cell order in double precision.

#include <cstdint>
#include <vector>

#include "bnorder/model.hpp"

namespace bnorder {

inline constexpr std::size_t kMaxJointCells = std::size_t{1} << 22;

// Negative results of magnitude up to this are treated as round-off and
// clamped to 0; anything more negative is reported as a bug.
inline constexpr double kEntropyClamp = 1e-12;

class JointTable {
public:
    // Entries must be nonnegative and sum to 1 within 1e-12.
    JointTable(Specs specs, std::vector<double> probs);

    const Specs& specs() const { return specs_; }
    std::size_t num_vars() const { return specs_.size(); }
    const std::vector<double>& probs() const { return probs_; }
    double operator[](std::size_t cell) const { return probs_[cell]; }
    std::size_t size() const { return probs_.size(); }

private:
    Specs specs_;
    std::vector<double> probs_;
};

// Dense probability table over an arbitrary (ordered) scope.
struct ProbTable {
    Scope scope;
    std::vector<std::size_t> cardinalities;
    std::vector<double> probs;
};

// Throws UndefinedCptRow when a reachable row is undefined, unless
// `allow_undefined_rows` is set, in which case the stored uniform row is used.
JointTable joint_from_bayesnet(const BayesNet& net, bool allow_undefined_rows = false);

// Sums P over the complement of `scope`. The result is laid out in the order
// the scope is given, last variable fastest.
ProbTable marginalize(const JointTable& p, const Scope& scope);

// P_g(X_v | X_pa) = P(X_v | X_pa) for every node; rows with P(x_pa) = 0 are
// marked undefined.
BayesNet project_to_dag(const JointTable& p, const OrderedDag& dag);

// Σ p log(p/q). Returns +infinity when P puts mass where Q has none.
double kl_divergence(const JointTable& p, const JointTable& q);

// H_P(X_A, X_B | X_C). An empty C gives the unconditional cross entropy
// (mutual information). Throws ScopeOverlap unless A, B, C are disjoint.
double conditional_cross_entropy(const JointTable& p, const Scope& a, const Scope& b,
                                 const Scope& c);

struct KlDecomposition {
    double total = 0.0;
    std::vector<double> per_node;
};

// per_node[i] = H_P(X_i, R_i | X_pa(i)) with R_i the predecessors of i that are
// not parents; the total equals K(P, project_to_dag(P, dag)).
KlDecomposition kl_decomposed(const JointTable& p, const OrderedDag& dag);

// E_P[log p(x_i | x_pa)], the expected family log-likelihood of i given pa.
double expected_family_log_likelihood(const JointTable& p, Var i, const Scope& pa);

// KL reduction obtained by enlarging i's parent set from pa_old to pa_new,
// computed as a difference of expected family log-likelihoods. Throws
// NotNested unless pa_old ⊆ pa_new.
double delta_kl(const JointTable& p, Var i, const Scope& pa_old, const Scope& pa_new);

// Draws n_rows i.i.d. records, visiting nodes in ordering order. Deterministic
// for a fixed seed. Reaching an undefined CPT row throws UndefinedCptRow unless
// `allow_undefined_rows` is set (the stored uniform row is then used).
Dataset ancestral_sample(const BayesNet& net, std::size_t n_rows, std::uint64_t seed,
                         bool allow_undefined_rows = false);

// Clamps tiny negative round-off to zero; throws InternalConsistencyError for
// anything more negative than `tolerance`.
double clamp_nonnegative(double value, const char* what, double tolerance = kEntropyClamp);

}  // namespace bnorder
