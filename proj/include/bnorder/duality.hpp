#pragma once

// Executable checks that the independence-test view and the score view of
// structure learning compute the same numbers: per-identity verifiers and a
// harness that runs both searches side by side and compares their traces.

#include <string>
#include <vector>

#include "bnorder/empirical.hpp"
#include "bnorder/exact.hpp"
#include "bnorder/scoring.hpp"
#include "bnorder/search.hpp"

namespace bnorder {

struct IdentityReport {
    std::string identity;
    std::size_t instances = 0;
    double max_discrepancy = 0.0;
    double tolerance = 0.0;
    bool pass = true;

    void record(double lhs, double rhs);
    void merge(const IdentityReport& other);
};

struct DualSearchReport {
    std::string rule;
    EvaluatorKind evaluator = EvaluatorKind::empirical;
    std::vector<Scope> test_parents;   // independence-test engine
    std::vector<Scope> score_parents;  // score engine
    bool structures_equal = false;
    bool steps_equal = false;
    std::size_t steps_compared = 0;
    double max_step_discrepancy = 0.0;
    double tolerance = 0.0;
    SearchTrace test_trace;
    SearchTrace score_trace;

    bool pass() const {
        return structures_equal && steps_equal && max_step_discrepancy <= tolerance;
    }
};

// Each node's KL term, Σ_{x_I} p(x_I) log[p(x_i | x_{I-1}) / p(x_i | x_pa)],
// summed directly over the node and its predecessors, against the
// conditional cross entropy H(X_i, R_i | X_pa) reported by kl_decomposed.
IdentityReport verify_kl_identity(const JointTable& p, const OrderedDag& dag, double tol);

// Sum of per-node terms against K(P, P_g) evaluated on the full joint.
IdentityReport verify_kl_total(const JointTable& p, const OrderedDag& dag, double tol);

// (1/N) log-likelihood ratio against the empirical conditional cross entropy.
IdentityReport verify_llr_identity(const EmpiricalContext& ctx, Var i, const Scope& pa_old,
                                   const Scope& pa_new, double tol);

// Bayesian independence test against the local log Bayes factor.
IdentityReport verify_bayes_identity(const EmpiricalContext& ctx, Var i, const Scope& s,
                                     const Scope& c, const DirichletPrior& prior, double tol);

DualSearchReport dual_search(const EmpiricalContext& ctx, const NodeOrdering& ordering,
                             const DecisionRule& rule, double tol,
                             const SearchConfig& config = {});
DualSearchReport dual_search(const JointTable& p, const NodeOrdering& ordering,
                             const DecisionRule& rule, double tol,
                             const SearchConfig& config = {});

// Compares two finished searches step by step.
DualSearchReport compare_searches(const LearnResult& test_engine, const LearnResult& score_engine,
                                  double tol);

// Global oracle: among all order-consistent DAGs whose projection is within
// epsilon of P in KL (evaluated on the full joint), one with the fewest edges
// (first in enumeration order).
OrderedDag min_edge_dag_within_kl(const JointTable& p, const NodeOrdering& ordering,
                                  double epsilon);

}  // namespace bnorder
