#include "bnorder/scoring.hpp"

#include <algorithm>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace bnorder {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t dot(const std::vector<std::size_t>& values, const std::vector<std::size_t>& strides) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < values.size(); ++k) idx += values[k] * strides[k];
    return idx;
}

// One Dirichlet-multinomial block: lnΓ(Σα) − lnΓ(Σα + Σn) + Σ_k [lnΓ(α + n_k) − lnΓ(α)].
double dirichlet_block(const std::uint64_t* counts, std::size_t cells, double cell_alpha) {
    double total_alpha = cell_alpha * static_cast<double>(cells);
    std::uint64_t total = 0;
    double sum = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
        if (counts[k] == 0) continue;
        total += counts[k];
        sum += log_gamma(cell_alpha + static_cast<double>(counts[k])) - log_gamma(cell_alpha);
    }
    if (total == 0) return 0.0;
    return sum + log_gamma(total_alpha) - log_gamma(total_alpha + static_cast<double>(total));
}

void check_disjoint(Var i, const Scope& s, const Scope& c) {
    const Scope is{i};
    if (!disjoint(is, s) || !disjoint(is, c) || !disjoint(s, c))
        throw ScopeOverlap("test scopes must be disjoint");
}

}  // namespace

DirichletPrior DirichletPrior::uniform(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("Dirichlet prior alpha must be positive");
    return {Kind::uniform_alpha, alpha};
}

DirichletPrior DirichletPrior::equivalent_sample_size(double ess) {
    if (!(ess > 0.0) || !std::isfinite(ess)) throw std::invalid_argument("equivalent sample size must be positive");
    return {Kind::equivalent_sample_size, ess};
}

double DirichletPrior::cell_alpha(std::size_t child_cardinality, std::size_t parent_configs) const {
    if (!(alpha > 0.0)) throw std::invalid_argument("Dirichlet prior alpha must be positive");
    if (kind == Kind::uniform_alpha) return alpha;
    return alpha / static_cast<double>(child_cardinality * parent_configs);
}

RuleKind rule_kind(const DecisionRule& rule) {
    return std::visit(overloaded{[](const EpsilonRule&) { return RuleKind::epsilon; },
                                 [](const ChiSquaredRule&) { return RuleKind::chi_squared; },
                                 [](const AicRule&) { return RuleKind::aic; },
                                 [](const BayesFactorRule&) { return RuleKind::bayes_factor; }},
                      rule);
}

std::string rule_name(const DecisionRule& rule) {
    switch (rule_kind(rule)) {
        case RuleKind::epsilon: return "ci-epsilon";
        case RuleKind::chi_squared: return "chi2";
        case RuleKind::aic: return "aic";
        case RuleKind::bayes_factor: return "bayes";
    }
    return "unknown";
}

void validate_rule(const DecisionRule& rule) {
    std::visit(overloaded{
                   [](const EpsilonRule& r) {
                       if (!(r.epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
                   },
                   [](const ChiSquaredRule& r) {
                       if (!(r.alpha_level > 0.0 && r.alpha_level < 1.0))
                           throw std::invalid_argument("significance level must lie in (0,1)");
                   },
                   [](const AicRule&) {},
                   [](const BayesFactorRule& r) {
                       if (!(r.prior.alpha > 0.0))
                           throw std::invalid_argument("prior alpha must be positive");
                       if (!std::isfinite(r.log_threshold))
                           throw std::invalid_argument("log threshold must be finite");
                   }},
               rule);
}

DevianceDifference deviance_difference(const EmpiricalContext& ctx, Var i, const Scope& pa_old,
                                       const Scope& pa_new) {
    return {2.0 * log_likelihood_ratio(ctx, i, pa_old, pa_new),
            dof_delta(ctx.specs(), i, pa_old, pa_new)};
}

double chi2_sf(double x, std::size_t k) {
    if (k == 0) throw DomainError("chi-squared degrees of freedom must be positive");
    if (std::isnan(x)) throw DomainError("chi-squared statistic is NaN");
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * static_cast<double>(k), 0.5 * x);
}

double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma requires x > 0");
    return boost::math::lgamma(x);
}

double aic_family(const EmpiricalContext& ctx, Var i, const Scope& pa) {
    const Specs& specs = ctx.specs();
    const double params =
        static_cast<double>((specs.at(i).cardinality - 1) * state_space_size(specs, pa));
    return -2.0 * family_log_likelihood(ctx, i, pa) + 2.0 * params;
}

double aic_score(const EmpiricalContext& ctx, const OrderedDag& dag) {
    return -2.0 * log_likelihood(ctx, dag) +
           2.0 * static_cast<double>(num_free_parameters(ctx.specs(), dag));
}

double ch_family_log_marginal(const EmpiricalContext& ctx, Var i, const Scope& pa,
                              const DirichletPrior& prior) {
    const Specs& specs = ctx.specs();
    if (i >= specs.size()) throw UnknownVariable(i);
    if (std::find(pa.begin(), pa.end(), i) != pa.end())
        throw ScopeOverlap("a variable cannot be its own parent");
    Scope family = sorted_unique(pa);
    family.push_back(i);
    const std::size_t card = specs[i].cardinality;
    const std::size_t configs = state_space_size(specs, sorted_unique(pa));
    const double a = prior.cell_alpha(card, configs);
    if (ctx.num_rows() == 0) return 0.0;

    // regroup counts as [parent config][child state]
    const auto table = ctx.counts(family);
    const auto strides = scope_strides(specs, table->scope, family);
    std::vector<std::uint64_t> n(configs * card);
    AssignmentCounter cell(cardinalities_of(specs, family));
    std::size_t idx = 0;
    do {
        n[idx++] = table->counts[dot(cell.values(), strides)];
    } while (cell.next());

    double total = 0.0;
    for (std::size_t j = 0; j < configs; ++j) total += dirichlet_block(&n[j * card], card, a);
    return total;
}

Cpt posterior_mean_cpt(const EmpiricalContext& ctx, Var i, const Scope& pa,
                       const DirichletPrior& prior) {
    const Specs& specs = ctx.specs();
    if (i >= specs.size()) throw UnknownVariable(i);
    const std::size_t card = specs[i].cardinality;
    const std::size_t configs = state_space_size(specs, pa);
    const double a = prior.cell_alpha(card, configs);
    // counts over family in the given parent order, child last
    Scope family = pa;
    family.push_back(i);
    const auto counts = ctx.counts(family);
    const auto strides = scope_strides(specs, counts->scope, family);
    std::vector<double> table(configs * card, 0.0);
    AssignmentCounter cell(cardinalities_of(specs, family));
    std::size_t idx = 0;
    do {
        table[idx++] = a + static_cast<double>(counts->counts[dot(cell.values(), strides)]);
    } while (cell.next());
    for (std::size_t r = 0; r < configs; ++r) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < card; ++k) row_sum += table[r * card + k];
        for (std::size_t k = 0; k < card; ++k) table[r * card + k] /= row_sum;
    }
    return Cpt(i, card, pa, cardinalities_of(specs, pa), std::move(table),
               std::vector<bool>(configs, true));
}

double ch_log_marginal(const EmpiricalContext& ctx, const OrderedDag& dag,
                       const DirichletPrior& prior) {
    double total = 0.0;
    for (Var v = 0; v < dag.size(); ++v) total += ch_family_log_marginal(ctx, v, dag.parents(v), prior);
    return total;
}

double log_bayes_factor(const EmpiricalContext& ctx, Var i, const Scope& pa_old,
                        const Scope& pa_new, const DirichletPrior& prior) {
    if (!is_subset(pa_old, pa_new)) throw NotNested("old parent set is not contained in the new one");
    return ch_family_log_marginal(ctx, i, pa_new, prior) -
           ch_family_log_marginal(ctx, i, pa_old, prior);
}

double bayes_independence_test(const EmpiricalContext& ctx, Var i, const Scope& s, const Scope& c,
                               const DirichletPrior& prior) {
    const Specs& specs = ctx.specs();
    if (i >= specs.size()) throw UnknownVariable(i);
    check_disjoint(i, s, c);
    if (ctx.num_rows() == 0 || s.empty()) return 0.0;

    const Scope sc = set_union(s, c);
    const Scope cs = sorted_unique(c);
    const Scope family = set_union(sc, {i});
    const std::size_t card = specs[i].cardinality;
    const std::size_t q_dep = state_space_size(specs, sc);
    const std::size_t q_ind = state_space_size(specs, cs);

    // Tally the family once and route every cell into the three tables the
    // two hypotheses need: n(x_i | x_SC), n(x_i | x_C) and the shared n(x_SC).
    const auto joint = ctx.counts(family);
    const auto to_sc = scope_strides(specs, sc, family);
    const auto to_c = scope_strides(specs, cs, family);
    const auto to_i = scope_strides(specs, Scope{i}, family);
    std::vector<std::uint64_t> dep(q_dep * card, 0), ind(q_ind * card, 0), shared(q_dep, 0);
    AssignmentCounter cell(joint->cardinalities);
    std::size_t idx = 0;
    do {
        const std::uint64_t n = joint->counts[idx++];
        if (n == 0) continue;
        const auto& x = cell.values();
        const std::size_t k = dot(x, to_i);
        const std::size_t j_sc = dot(x, to_sc);
        dep[j_sc * card + k] += n;
        ind[dot(x, to_c) * card + k] += n;
        shared[j_sc] += n;
    } while (cell.next());

    // The (S ∪ C) marginal is modelled identically under both hypotheses.
    const double shared_term = dirichlet_block(shared.data(), shared.size(), 1.0);

    double dependent = shared_term;
    const double a_dep = prior.cell_alpha(card, q_dep);
    for (std::size_t j = 0; j < q_dep; ++j) dependent += dirichlet_block(&dep[j * card], card, a_dep);

    double independent = shared_term;
    const double a_ind = prior.cell_alpha(card, q_ind);
    for (std::size_t j = 0; j < q_ind; ++j)
        independent += dirichlet_block(&ind[j * card], card, a_ind);

    return dependent - independent;
}

TestOutcome apply_cross_entropy_rule(const DecisionRule& rule, double cross_entropy,
                                     std::optional<std::size_t> sample_size, std::size_t dof) {
    TestOutcome out;
    out.dof = dof;
    switch (rule_kind(rule)) {
        case RuleKind::epsilon: {
            out.statistic = cross_entropy;
            out.threshold_used = std::get<EpsilonRule>(rule).epsilon;
            out.independent = cross_entropy <= out.threshold_used;
            return out;
        }
        case RuleKind::chi_squared: {
            if (!sample_size) throw RuleInputMismatch("chi-squared rule needs finite data");
            out.statistic = 2.0 * static_cast<double>(*sample_size) * cross_entropy;
            out.threshold_used = std::get<ChiSquaredRule>(rule).alpha_level;
            out.p_value = dof == 0 ? 1.0 : chi2_sf(out.statistic, dof);
            out.independent = out.p_value >= out.threshold_used;
            return out;
        }
        case RuleKind::aic: {
            if (!sample_size) throw RuleInputMismatch("AIC rule needs finite data");
            out.statistic = 2.0 * static_cast<double>(*sample_size) * cross_entropy;
            out.threshold_used = 2.0 * static_cast<double>(dof);
            out.independent = out.statistic <= out.threshold_used;
            return out;
        }
        case RuleKind::bayes_factor:
            break;
    }
    throw RuleInputMismatch("Bayes-factor rule needs a marginal-likelihood statistic");
}

TestOutcome apply_bayes_rule(const DecisionRule& rule, double log_bf) {
    const auto* bayes = std::get_if<BayesFactorRule>(&rule);
    if (!bayes) throw RuleInputMismatch("not a Bayes-factor rule");
    TestOutcome out;
    out.statistic = log_bf;
    out.threshold_used = bayes->log_threshold;
    out.independent = log_bf <= bayes->log_threshold;
    return out;
}

TestOutcome evaluate_rule(const DecisionRule& rule, const EmpiricalContext& ctx, Var i,
                          const Scope& s, const Scope& c) {
    validate_rule(rule);
    if (const auto* bayes = std::get_if<BayesFactorRule>(&rule))
        return apply_bayes_rule(rule, bayes_independence_test(ctx, i, s, c, bayes->prior));
    const double h = empirical_cce(ctx, i, s, c);
    const std::size_t dof = dof_delta(ctx.specs(), i, c, set_union(c, s));
    return apply_cross_entropy_rule(rule, h, ctx.num_rows(), dof);
}

TestOutcome evaluate_rule(const DecisionRule& rule, const JointTable& p, Var i, const Scope& s,
                          const Scope& c) {
    validate_rule(rule);
    const auto* eps = std::get_if<EpsilonRule>(&rule);
    if (!eps)
        throw RuleInputMismatch(rule_name(rule) + " rule is not defined on an exact distribution");
    const double h = conditional_cross_entropy(p, {i}, s, c);
    return apply_cross_entropy_rule(EpsilonRule{std::max(eps->epsilon, kExactEpsilonFloor)}, h,
                                    std::nullopt, 0);
}

}  // namespace bnorder
