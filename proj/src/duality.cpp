#include "bnorder/duality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace bnorder {

namespace {

// Node i's KL term as a direct expectation over (x_pa, x_rest, x_i) cells,
// with every marginal accumulated here from the joint.
double direct_node_term(const JointTable& p, const OrderedDag& dag, Var i) {
    const Specs& specs = p.specs();
    const Scope preds = dag.ordering().predecessors(i);
    const Scope pa = sorted_unique(dag.parents(i));

    const std::size_t card = specs[i].cardinality;
    const std::size_t pred_cells = state_space_size(specs, preds);
    const std::size_t pa_cells = state_space_size(specs, pa);
    std::vector<double> p_pred_child(pred_cells * card, 0.0), p_pred(pred_cells, 0.0);
    std::vector<double> p_pa_child(pa_cells * card, 0.0), p_pa(pa_cells, 0.0);

    const std::size_t n = specs.size();
    std::vector<std::size_t> cards(n);
    for (Var v = 0; v < n; ++v) cards[v] = specs[v].cardinality;
    AssignmentCounter cell(cards);
    std::size_t idx = 0;
    do {
        const double px = p[idx++];
        if (px == 0.0) continue;
        const auto& x = cell.values();
        std::size_t j_pred = 0, j_pa = 0;
        for (Var v : preds) j_pred = j_pred * cards[v] + x[v];
        for (Var v : pa) j_pa = j_pa * cards[v] + x[v];
        p_pred_child[j_pred * card + x[i]] += px;
        p_pred[j_pred] += px;
        p_pa_child[j_pa * card + x[i]] += px;
        p_pa[j_pa] += px;
    } while (cell.next());

    // walk the predecessor configurations again to pair them with pa configurations
    std::vector<std::size_t> pa_pos;
    for (Var v : pa)
        pa_pos.push_back(static_cast<std::size_t>(std::find(preds.begin(), preds.end(), v) - preds.begin()));
    std::vector<std::size_t> pred_cards;
    for (Var v : preds) pred_cards.push_back(cards[v]);

    double sum = 0.0;
    AssignmentCounter pred_cell(pred_cards);
    std::size_t j_pred = 0;
    do {
        const auto& y = pred_cell.values();
        std::size_t j_pa = 0;
        for (std::size_t k = 0; k < pa.size(); ++k) j_pa = j_pa * cards[pa[k]] + y[pa_pos[k]];
        for (std::size_t s = 0; s < card; ++s) {
            const double joint = p_pred_child[j_pred * card + s];
            if (joint <= 0.0) continue;
            const double full_cond = joint / p_pred[j_pred];
            const double pa_cond = p_pa_child[j_pa * card + s] / p_pa[j_pa];
            sum += joint * std::log(full_cond / pa_cond);
        }
        ++j_pred;
    } while (pred_cell.next());
    return sum;
}

double step_discrepancy(const SearchStep& a, const SearchStep& b) {
    if (std::isinf(a.statistic) && std::isinf(b.statistic) && a.statistic == b.statistic) return 0.0;
    return std::abs(a.statistic - b.statistic);
}

}  // namespace

void IdentityReport::record(double lhs, double rhs) {
    ++instances;
    const double d = std::abs(lhs - rhs);
    if (std::isnan(d)) {
        max_discrepancy = std::numeric_limits<double>::infinity();
    } else {
        max_discrepancy = std::max(max_discrepancy, d);
    }
    pass = max_discrepancy <= tolerance;
}

void IdentityReport::merge(const IdentityReport& other) {
    if (identity.empty()) identity = other.identity;
    instances += other.instances;
    max_discrepancy = std::max(max_discrepancy, other.max_discrepancy);
    tolerance = std::max(tolerance, other.tolerance);
    pass = pass && other.pass && max_discrepancy <= tolerance;
}

IdentityReport verify_kl_identity(const JointTable& p, const OrderedDag& dag, double tol) {
    IdentityReport report{"kl-term = conditional cross entropy", 0, 0.0, tol, true};
    const KlDecomposition decomposition = kl_decomposed(p, dag);
    for (Var i = 0; i < dag.size(); ++i)
        report.record(decomposition.per_node[i], direct_node_term(p, dag, i));
    return report;
}

IdentityReport verify_kl_total(const JointTable& p, const OrderedDag& dag, double tol) {
    IdentityReport report{"sum of kl-terms = kl divergence", 0, 0.0, tol, true};
    const JointTable projected = joint_from_bayesnet(project_to_dag(p, dag), true);
    report.record(kl_decomposed(p, dag).total, kl_divergence(p, projected));
    return report;
}

IdentityReport verify_llr_identity(const EmpiricalContext& ctx, Var i, const Scope& pa_old,
                                   const Scope& pa_new, double tol) {
    IdentityReport report{"log-likelihood ratio / N = empirical cross entropy", 0, 0.0, tol, true};
    if (!is_subset(pa_old, pa_new)) throw NotNested("old parent set is not contained in the new one");
    const double n = static_cast<double>(ctx.num_rows());
    const double llr = ctx.num_rows() == 0 ? 0.0 : log_likelihood_ratio(ctx, i, pa_old, pa_new) / n;
    report.record(llr, empirical_cce(ctx, i, set_difference(pa_new, pa_old), sorted_unique(pa_old)));
    return report;
}

IdentityReport verify_bayes_identity(const EmpiricalContext& ctx, Var i, const Scope& s,
                                     const Scope& c, const DirichletPrior& prior, double tol) {
    IdentityReport report{"bayesian independence test = log bayes factor", 0, 0.0, tol, true};
    const double test = bayes_independence_test(ctx, i, s, c, prior);
    report.record(test, log_bayes_factor(ctx, i, c, set_union(c, s), prior));
    return report;
}

DualSearchReport compare_searches(const LearnResult& test_engine, const LearnResult& score_engine,
                                  double tol) {
    DualSearchReport report;
    report.rule = test_engine.trace.rule;
    report.evaluator = test_engine.trace.evaluator;
    report.tolerance = tol;
    const std::size_t n = test_engine.dag.size();
    report.structures_equal = score_engine.dag.size() == n;
    report.steps_equal = report.structures_equal;
    for (Var v = 0; v < n; ++v) {
        report.test_parents.push_back(sorted_unique(test_engine.dag.parents(v)));
        if (v < score_engine.dag.size())
            report.score_parents.push_back(sorted_unique(score_engine.dag.parents(v)));
    }
    if (report.structures_equal) report.structures_equal = report.test_parents == report.score_parents;

    const auto& a = test_engine.trace.per_node;
    const auto& b = score_engine.trace.per_node;
    if (a.size() != b.size()) report.steps_equal = false;
    for (std::size_t v = 0; v < std::min(a.size(), b.size()); ++v) {
        if (a[v].size() != b[v].size()) report.steps_equal = false;
        for (std::size_t k = 0; k < std::min(a[v].size(), b[v].size()); ++k) {
            const SearchStep& x = a[v][k];
            const SearchStep& y = b[v][k];
            ++report.steps_compared;
            if (x.phase != y.phase || x.action != y.action || x.candidate != y.candidate ||
                x.independent != y.independent || x.parents_after != y.parents_after ||
                x.dof != y.dof)
                report.steps_equal = false;
            report.max_step_discrepancy = std::max(report.max_step_discrepancy, step_discrepancy(x, y));
        }
    }
    report.test_trace = test_engine.trace;
    report.score_trace = score_engine.trace;
    return report;
}

DualSearchReport dual_search(const EmpiricalContext& ctx, const NodeOrdering& ordering,
                             const DecisionRule& rule, double tol, const SearchConfig& config) {
    const EmpiricalEvaluator tests(ctx, Framing::independence_test);
    const EmpiricalEvaluator scores(ctx, Framing::score);
    return compare_searches(learn_structure(tests, ordering, rule, config),
                            learn_structure(scores, ordering, rule, config), tol);
}

DualSearchReport dual_search(const JointTable& p, const NodeOrdering& ordering,
                             const DecisionRule& rule, double tol, const SearchConfig& config) {
    const ExactEvaluator tests(p, Framing::independence_test);
    const ExactEvaluator scores(p, Framing::score);
    return compare_searches(learn_structure(tests, ordering, rule, config),
                            learn_structure(scores, ordering, rule, config), tol);
}

OrderedDag min_edge_dag_within_kl(const JointTable& p, const NodeOrdering& ordering,
                                  double epsilon) {
    const Specs& specs = p.specs();
    const std::size_t n = specs.size();
    std::vector<Scope> preds(n);
    std::size_t free_edges = 0;
    for (Var v = 0; v < n; ++v) {
        preds[v] = ordering.predecessors(v);
        free_edges += preds[v].size();
    }
    if (free_edges > 20) throw TooManyPredecessors("graph enumeration over more than 2^20 DAGs");

    std::optional<OrderedDag> best;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free_edges); ++mask) {
        std::vector<Scope> parents(n);
        std::size_t bit = 0;
        for (Var v = 0; v < n; ++v)
            for (Var u : preds[v])
                if (mask >> bit++ & 1U) parents[v].push_back(u);
        const std::size_t edges = static_cast<std::size_t>(__builtin_popcountll(mask));
        if (best && edges >= best->num_edges()) continue;
        OrderedDag dag = validate_dag(specs, ordering, std::move(parents));
        const JointTable projected = joint_from_bayesnet(project_to_dag(p, dag), true);
        if (kl_divergence(p, projected) <= epsilon) best = std::move(dag);
    }
    return *best;  // the complete graph always qualifies
}

}  // namespace bnorder
