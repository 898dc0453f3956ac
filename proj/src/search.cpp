#include "bnorder/search.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace bnorder {

namespace {

// Scores this close are treated as ties and resolved by variable index, so
// that engines computing the same quantity along different summation paths
// make the same choice.
bool clearly_greater(double a, double b) {
    return a > b + 1e-12 * std::max(1.0, std::abs(b));
}

TestOutcome trivially_independent() {
    TestOutcome out;
    out.independent = true;
    return out;
}

// All subsets of `pool` with 1..max_size elements, in lexicographic order.
std::vector<Scope> candidate_sets(const Scope& pool, std::size_t max_size) {
    std::vector<Scope> out;
    Scope current;
    std::function<void(std::size_t)> extend = [&](std::size_t start) {
        for (std::size_t k = start; k < pool.size(); ++k) {
            current.push_back(pool[k]);
            out.push_back(current);
            if (current.size() < max_size) extend(k + 1);
            current.pop_back();
        }
    };
    extend(0);
    return out;
}

}  // namespace

std::string to_string(EvaluatorKind kind) {
    return kind == EvaluatorKind::exact ? "exact" : "empirical";
}

std::string to_string(Framing framing) {
    return framing == Framing::independence_test ? "independence-test" : "score";
}

std::string to_string(SearchPhase phase) {
    return phase == SearchPhase::grow ? "grow" : "thin";
}

std::string to_string(StepAction action) {
    switch (action) {
        case StepAction::guard: return "guard";
        case StepAction::add: return "add";
        case StepAction::thin_test: return "thin-test";
    }
    return "unknown";
}

double NodeEvaluator::selection_score(const DecisionRule& rule, Var i, const Scope& s,
                                      const Scope& c) const {
    if (rule_kind(rule) == RuleKind::bayes_factor) return test(rule, i, s, c).statistic;
    return statistic(i, s, c);
}

double ExactEvaluator::statistic(Var i, const Scope& s, const Scope& c) const {
    if (framing_ == Framing::independence_test) return conditional_cross_entropy(p_, {i}, s, c);
    if (!disjoint(s, c) || std::find(s.begin(), s.end(), i) != s.end())
        throw ScopeOverlap("test scopes must be disjoint");
    return delta_kl(p_, i, c, set_union(c, s));
}

TestOutcome ExactEvaluator::test(const DecisionRule& rule, Var i, const Scope& s,
                                 const Scope& c) const {
    if (framing_ == Framing::independence_test) return evaluate_rule(rule, p_, i, s, c);
    validate_rule(rule);
    const auto* eps = std::get_if<EpsilonRule>(&rule);
    if (!eps)
        throw RuleInputMismatch(rule_name(rule) + " rule is not defined on an exact distribution");
    if (s.empty()) return trivially_independent();
    return apply_cross_entropy_rule(EpsilonRule{std::max(eps->epsilon, kExactEpsilonFloor)},
                                    statistic(i, s, c), std::nullopt, 0);
}

double EmpiricalEvaluator::statistic(Var i, const Scope& s, const Scope& c) const {
    if (framing_ == Framing::independence_test) return empirical_cce(ctx_, i, s, c);
    if (!disjoint(s, c) || std::find(s.begin(), s.end(), i) != s.end())
        throw ScopeOverlap("test scopes must be disjoint");
    if (ctx_.num_rows() == 0) return 0.0;
    return log_likelihood_ratio(ctx_, i, c, set_union(c, s)) / static_cast<double>(ctx_.num_rows());
}

TestOutcome EmpiricalEvaluator::test(const DecisionRule& rule, Var i, const Scope& s,
                                     const Scope& c) const {
    if (framing_ == Framing::independence_test) return evaluate_rule(rule, ctx_, i, s, c);
    validate_rule(rule);
    if (!disjoint(s, c) || std::find(s.begin(), s.end(), i) != s.end())
        throw ScopeOverlap("test scopes must be disjoint");
    if (s.empty()) return trivially_independent();

    const Scope pa_old = sorted_unique(c);
    const Scope pa_new = set_union(c, s);
    TestOutcome out;
    switch (rule_kind(rule)) {
        case RuleKind::epsilon:
            return apply_cross_entropy_rule(rule, statistic(i, s, c), ctx_.num_rows(),
                                            dof_delta(specs(), i, pa_old, pa_new));
        case RuleKind::chi_squared: {
            const auto dev = deviance_difference(ctx_, i, pa_old, pa_new);
            out.statistic = dev.statistic;
            out.dof = dev.dof;
            out.threshold_used = std::get<ChiSquaredRule>(rule).alpha_level;
            out.p_value = dev.dof == 0 ? 1.0 : chi2_sf(dev.statistic, dev.dof);
            out.independent = out.p_value >= out.threshold_used;
            return out;
        }
        case RuleKind::aic: {
            // keep the smaller family unless the larger one has strictly lower AIC
            const auto dev = deviance_difference(ctx_, i, pa_old, pa_new);
            out.statistic = dev.statistic;
            out.dof = dev.dof;
            out.threshold_used = 2.0 * static_cast<double>(dev.dof);
            out.independent = aic_family(ctx_, i, pa_new) >= aic_family(ctx_, i, pa_old);
            return out;
        }
        case RuleKind::bayes_factor: {
            const auto& bayes = std::get<BayesFactorRule>(rule);
            return apply_bayes_rule(rule, log_bayes_factor(ctx_, i, pa_old, pa_new, bayes.prior));
        }
    }
    return out;
}

NodeSearch grow_parents(const NodeEvaluator& eval, const NodeOrdering& ordering, Var i,
                        const DecisionRule& rule, const SearchConfig& config) {
    if (config.max_subset_size < 1 || config.max_subset_size > 3)
        throw std::invalid_argument("candidate subset size must be between 1 and 3");
    NodeSearch out;
    Scope remainder = ordering.predecessors(i);
    while (!remainder.empty()) {
        const TestOutcome guard = eval.test(rule, i, remainder, out.parents);
        out.steps.push_back({i, SearchPhase::grow, StepAction::guard, remainder, guard.statistic,
                             guard.dof, guard.independent, out.parents});
        if (guard.independent) break;

        const auto candidates = candidate_sets(remainder, config.max_subset_size);
        const Scope* best = nullptr;
        double best_score = 0.0;
        for (const Scope& cand : candidates) {
            const double score = eval.selection_score(rule, i, cand, out.parents);
            if (!best || clearly_greater(score, best_score)) {
                best = &cand;
                best_score = score;
            }
        }

        if (config.stop_when_candidate_independent) {
            const TestOutcome own = eval.test(rule, i, *best, out.parents);
            if (own.independent) {
                out.steps.push_back({i, SearchPhase::grow, StepAction::add, *best, best_score,
                                     own.dof, true, out.parents});
                break;
            }
        }
        out.parents = set_union(out.parents, *best);
        remainder = set_difference(remainder, *best);
        out.steps.push_back({i, SearchPhase::grow, StepAction::add, *best, best_score,
                             dof_delta(eval.specs(), i, set_difference(out.parents, *best),
                                       out.parents),
                             false, out.parents});
    }
    return out;
}

NodeSearch thin_parents(const NodeEvaluator& eval, Var i, const Scope& parents,
                        const DecisionRule& rule) {
    NodeSearch out;
    out.parents = sorted_unique(parents);
    bool removed = true;
    while (removed) {
        removed = false;
        for (Var y : out.parents) {
            const Scope rest = set_difference(out.parents, {y});
            const TestOutcome t = eval.test(rule, i, {y}, rest);
            out.steps.push_back({i, SearchPhase::thin, StepAction::thin_test, {y}, t.statistic,
                                 t.dof, t.independent, t.independent ? rest : out.parents});
            if (t.independent) {
                out.parents = rest;
                removed = true;
                break;
            }
        }
    }
    return out;
}

LearnResult learn_structure(const NodeEvaluator& eval, const NodeOrdering& ordering,
                            const DecisionRule& rule, const SearchConfig& config) {
    const Specs& specs = eval.specs();
    if (ordering.size() != specs.size())
        throw std::invalid_argument("ordering length does not match number of variables");
    SearchTrace trace;
    trace.rule = rule_name(rule);
    trace.evaluator = eval.kind();
    trace.framing = eval.framing();
    trace.per_node.resize(specs.size());
    std::vector<Scope> parents(specs.size());
    for (Var v : ordering.order()) {
        NodeSearch grown = grow_parents(eval, ordering, v, rule, config);
        NodeSearch thinned = thin_parents(eval, v, grown.parents, rule);
        auto& steps = trace.per_node[v];
        steps = std::move(grown.steps);
        steps.insert(steps.end(), thinned.steps.begin(), thinned.steps.end());
        parents[v] = std::move(thinned.parents);
    }
    return {validate_dag(specs, ordering, std::move(parents)), std::move(trace)};
}

Scope exhaustive_parents(const NodeEvaluator& eval, const NodeOrdering& ordering, Var i,
                         const DecisionRule& rule) {
    const Scope preds = ordering.predecessors(i);
    if (preds.size() > kMaxExhaustivePredecessors)
        throw TooManyPredecessors("exhaustive search over " + std::to_string(preds.size()) +
                                  " predecessors");
    std::vector<Scope> subsets{Scope{}};
    for (const Scope& s : candidate_sets(preds, preds.size())) subsets.push_back(s);
    std::stable_sort(subsets.begin(), subsets.end(),
                     [](const Scope& a, const Scope& b) { return a.size() < b.size(); });
    for (const Scope& pa : subsets) {
        const Scope rest = set_difference(preds, pa);
        if (rest.empty() || eval.test(rule, i, rest, pa).independent) return pa;
    }
    return preds;
}

OrderedDag recover_from_distribution(const JointTable& p, const NodeOrdering& ordering,
                                     double epsilon) {
    ExactEvaluator eval(p);
    return learn_structure(eval, ordering, EpsilonRule{epsilon}).dag;
}

Scope replay_parents(const std::vector<SearchStep>& steps) {
    Scope parents;
    for (const auto& step : steps) {
        if (step.action == StepAction::add && !step.independent)
            parents = set_union(parents, step.candidate);
        else if (step.action == StepAction::thin_test && step.independent)
            parents = set_difference(parents, step.candidate);
    }
    return parents;
}

}  // namespace bnorder
