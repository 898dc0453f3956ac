#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "bnorder/duality.hpp"
#include "oracles.hpp"

using namespace bnorder;

namespace {

Specs binary(std::size_t n) {
    Specs s;
    for (std::size_t v = 0; v < n; ++v) s.push_back({"x" + std::to_string(v), 2});
    return s;
}

EmpiricalContext copy_data() { return EmpiricalContext(Dataset(binary(2), {0, 0, 0, 0, 1, 1, 1, 1})); }

BayesNet chain_net() {
    const Specs s = binary(3);
    const OrderedDag g = validate_dag(s, NodeOrdering::identity(3), {{}, {0}, {1}});
    return BayesNet(s, g,
                    {Cpt(0, 2, {}, {}, {0.4, 0.6}, {true}), Cpt(1, 2, {0}, {2}, {0.8, 0.2, 0.1, 0.9}, {true, true}),
                     Cpt(2, 2, {1}, {2}, {0.7, 0.3, 0.2, 0.8}, {true, true})});
}

std::vector<DecisionRule> all_rules() {
    return {EpsilonRule{0.01}, ChiSquaredRule{0.05}, AicRule{}, BayesFactorRule{DirichletPrior::uniform(1.0), 0.0}};
}

}  // namespace

TEST_CASE("IdentityReport bookkeeping") {
    IdentityReport r{"x", 0, 0.0, 1e-10, true};
    r.record(1.0, 1.0 + 1e-12);
    CHECK(r.pass);
    r.record(1.0, 1.1);
    CHECK_FALSE(r.pass);
    CHECK(r.instances == 2);
    IdentityReport nan_case{"y", 0, 0.0, 1.0, true};
    nan_case.record(std::nan(""), 0.0);
    CHECK_FALSE(nan_case.pass);
}

TEST_CASE("verify_kl_identity examples") {
    const JointTable corr(binary(2), {0.5, 0.0, 0.0, 0.5});
    const auto id = NodeOrdering::identity(2);
    const auto r = verify_kl_identity(corr, empty_dag(binary(2), id), 1e-12);
    CHECK(r.pass);
    CHECK(kl_decomposed(corr, empty_dag(binary(2), id)).per_node[1] == doctest::Approx(std::log(2.0)));
    const auto full = verify_kl_identity(corr, complete_dag(binary(2), id), 1e-12);
    CHECK(full.pass);
    CHECK(full.max_discrepancy == 0.0);
}

TEST_CASE("kl identity and total on random instances") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 3;
        const Specs s = oracle::random_specs(rng, n, 3);
        const NodeOrdering o = oracle::random_ordering(rng, n);
        const JointTable p = oracle::random_joint(rng, s, trial % 4 == 0 ? 0.25 : 0.0);
        const OrderedDag g = oracle::random_dag(rng, s, o);
        CHECK(verify_kl_identity(p, g, 1e-10).pass);
        CHECK(verify_kl_total(p, g, 1e-10).pass);
    }
}

TEST_CASE("verify_llr_identity examples") {
    const auto r = verify_llr_identity(copy_data(), 1, {}, {0}, 1e-12);
    CHECK(r.pass);
    const EmpiricalContext constant(Dataset(binary(2), {0, 0, 0, 1, 0, 1, 0, 0}));
    CHECK(verify_llr_identity(constant, 1, {}, {0}, 1e-12).pass);
    CHECK_THROWS_AS(verify_llr_identity(copy_data(), 1, {0}, {}, 1e-12), NotNested);
}

TEST_CASE("verify_bayes_identity examples") {
    const auto prior = DirichletPrior::uniform(1.0);
    CHECK(verify_bayes_identity(copy_data(), 1, {0}, {}, prior, 1e-12).pass);
    CHECK(verify_bayes_identity(EmpiricalContext(Dataset(binary(2), {})), 1, {0}, {}, prior, 0.0).pass);
    CHECK_THROWS_AS(verify_bayes_identity(copy_data(), 1, {1}, {}, prior, 1e-12), ScopeOverlap);
}

TEST_CASE("dual_search examples") {
    const EmpiricalContext ctx = copy_data();
    const auto r = dual_search(ctx, NodeOrdering::identity(2), EpsilonRule{0.1}, 1e-10);
    CHECK(r.pass());
    CHECK(r.test_parents[1] == Scope{0});
    CHECK(r.score_parents[1] == Scope{0});

    const JointTable p = joint_from_bayesnet(chain_net());
    const auto e = dual_search(p, NodeOrdering::identity(3), EpsilonRule{1e-9}, 1e-10);
    CHECK(e.pass());
    CHECK(e.test_parents[2] == Scope{1});
    for (Var v = 0; v < 3; ++v)
        CHECK(e.test_parents[v] == exhaustive_parents(ExactEvaluator(p), NodeOrdering::identity(3), v, EpsilonRule{1e-9}));
}

TEST_CASE("dual_search on random data under every rule") {
    std::mt19937_64 rng(5);
    for (const DecisionRule& rule : all_rules()) {
        for (int trial = 0; trial < 15; ++trial) {
            const std::size_t n = 2 + trial % 4;
            const Specs s = oracle::random_specs(rng, n, 3);
            const NodeOrdering o = oracle::random_ordering(rng, n);
            const OrderedDag g = oracle::random_dag(rng, s, o);
            const BayesNet net = oracle::random_net(rng, s, g);
            const EmpiricalContext ctx(ancestral_sample(net, 50 + 30 * trial, rng()));
            const auto r = dual_search(ctx, o, rule, 1e-10);
            CHECK_MESSAGE(r.pass(), rule_name(rule), " trial ", trial);
        }
    }
}

TEST_CASE("compare_searches flags divergent engines") {
    const EmpiricalContext ctx = copy_data();
    const auto a = learn_structure(EmpiricalEvaluator(ctx), NodeOrdering::identity(2), EpsilonRule{0.1});
    const auto b = learn_structure(EmpiricalEvaluator(ctx), NodeOrdering::identity(2), EpsilonRule{0.9});
    const auto r = compare_searches(a, b, 1e-10);
    CHECK_FALSE(r.structures_equal);
    CHECK_FALSE(r.pass());
}

TEST_CASE("global minimal-edge dag equals per-node exhaustive search") {
    std::mt19937_64 rng(7);
    int checked = 0;
    while (checked < 25) {
        const Specs s = binary(4);
        const NodeOrdering o = oracle::random_ordering(rng, 4);
        const OrderedDag g = oracle::random_dag(rng, s, o);
        const JointTable p = joint_from_bayesnet(oracle::random_net(rng, s, g, 0.2));
        bool faithful = true;
        for (Var v = 0; v < 4; ++v)
            for (Var u : g.parents(v))
                if (conditional_cross_entropy(p, {v}, {u}, set_difference(sorted_unique(g.parents(v)), {u})) < 1e-7)
                    faithful = false;
        if (!faithful) continue;
        ++checked;
        const double eps = 1e-9;
        const OrderedDag global = min_edge_dag_within_kl(p, o, eps);
        const ExactEvaluator eval(p);
        for (Var v = 0; v < 4; ++v)
            CHECK(sorted_unique(global.parents(v)) == exhaustive_parents(eval, o, v, EpsilonRule{eps}));
    }
}
