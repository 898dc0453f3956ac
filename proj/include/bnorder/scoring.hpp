#pragma once

// Decision-grade scores and tests on top of the empirical estimators:
// deviance / chi-squared, AIC, the Cooper-Herskovits Dirichlet marginal
// likelihood, local Bayes factors and the matching Bayesian independence
// test, plus the decision rules that turn any of them into a verdict.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>

#include "bnorder/empirical.hpp"
#include "bnorder/exact.hpp"

namespace bnorder {

struct DirichletPrior {
    enum class Kind { uniform_alpha, equivalent_sample_size };

    Kind kind = Kind::uniform_alpha;
    // Per-cell pseudo-count (uniform_alpha) or total equivalent sample size
    // split evenly over a family's child × parent-configuration cells.
    double alpha = 1.0;

    static DirichletPrior uniform(double alpha);
    static DirichletPrior equivalent_sample_size(double ess);

    double cell_alpha(std::size_t child_cardinality, std::size_t parent_configs) const;
};

struct EpsilonRule {
    double epsilon = 0.0;  // nats
};

struct ChiSquaredRule {
    double alpha_level = 0.05;
};

struct AicRule {};

struct BayesFactorRule {
    DirichletPrior prior;
    double log_threshold = 0.0;
};

using DecisionRule = std::variant<EpsilonRule, ChiSquaredRule, AicRule, BayesFactorRule>;

enum class RuleKind { epsilon, chi_squared, aic, bayes_factor };

RuleKind rule_kind(const DecisionRule& rule);
std::string rule_name(const DecisionRule& rule);
// Throws std::invalid_argument for out-of-range parameters.
void validate_rule(const DecisionRule& rule);

struct TestOutcome {
    double statistic = 0.0;
    double threshold_used = 0.0;
    std::size_t dof = 0;
    bool independent = true;
    double p_value = std::numeric_limits<double>::quiet_NaN();  // chi-squared only
};

struct DevianceDifference {
    double statistic = 0.0;
    std::size_t dof = 0;
};

// 2 · log-likelihood ratio and the parameter-count difference.
DevianceDifference deviance_difference(const EmpiricalContext& ctx, Var i, const Scope& pa_old,
                                       const Scope& pa_new);

// Upper tail of the chi-squared law with k degrees of freedom.
double chi2_sf(double x, std::size_t k);

// lnΓ(x) for x > 0.
double log_gamma(double x);

// −2 log L + 2 · free parameters; lower is better.
double aic_score(const EmpiricalContext& ctx, const OrderedDag& dag);
double aic_family(const EmpiricalContext& ctx, Var i, const Scope& pa);

// Cooper-Herskovits closed form for one family:
// Σ_j [ lnΓ(α_j) − lnΓ(α_j + n_j) + Σ_k lnΓ(α_jk + n_jk) − lnΓ(α_jk) ].
double ch_family_log_marginal(const EmpiricalContext& ctx, Var i, const Scope& pa,
                              const DirichletPrior& prior);

// Posterior mean CPT under the Dirichlet prior: (α_jk + n_jk) / (α_j + n_j).
// Every row is defined. `pa` keeps the order given.
Cpt posterior_mean_cpt(const EmpiricalContext& ctx, Var i, const Scope& pa,
                       const DirichletPrior& prior);

// Log marginal likelihood of the whole graph, the sum of its family terms.
double ch_log_marginal(const EmpiricalContext& ctx, const OrderedDag& dag,
                       const DirichletPrior& prior);

// Log marginal-likelihood ratio of two graphs differing only in i's parents,
// under a uniform structure prior. Positive favours pa_new.
double log_bayes_factor(const EmpiricalContext& ctx, Var i, const Scope& pa_old,
                        const Scope& pa_new, const DirichletPrior& prior);

// Log posterior odds of "i depends on S given C" against "i ⫫ S | C", built
// from two marginal likelihoods over the family {i} ∪ S ∪ C that share a
// Dirichlet model of the (S ∪ C) marginal.
double bayes_independence_test(const EmpiricalContext& ctx, Var i, const Scope& s, const Scope& c,
                               const DirichletPrior& prior);

// Verdict from a cross entropy H in nats. `sample_size` is absent for exact
// distributions, where only the epsilon rule applies.
TestOutcome apply_cross_entropy_rule(const DecisionRule& rule, double cross_entropy,
                                     std::optional<std::size_t> sample_size, std::size_t dof);
TestOutcome apply_bayes_rule(const DecisionRule& rule, double log_bayes_factor);

TestOutcome evaluate_rule(const DecisionRule& rule, const EmpiricalContext& ctx, Var i,
                          const Scope& s, const Scope& c);
// Exact distributions: epsilon rule only, with the threshold floored at
// kExactEpsilonFloor. Other rules throw RuleInputMismatch.
TestOutcome evaluate_rule(const DecisionRule& rule, const JointTable& p, Var i, const Scope& s,
                          const Scope& c);

inline constexpr double kExactEpsilonFloor = 1e-12;

}  // namespace bnorder
