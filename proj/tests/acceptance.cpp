// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "bnorder/cli.hpp"
#include "bnorder/duality.hpp"
#include "bnorder/io.hpp"
#include "oracles.hpp"

using namespace bnorder;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

Specs binary(std::size_t n) {
    Specs s;
    for (std::size_t v = 0; v < n; ++v) s.push_back({"x" + std::to_string(v), 2});
    return s;
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// A random variable of the ordering and nested parent sets drawn from its predecessors.
struct NestedPair {
    Var i;
    Scope pa_old;
    Scope pa_new;
};

NestedPair random_nested(std::mt19937_64& rng, const NodeOrdering& o, std::size_t n) {
    Var i = o.order()[std::uniform_int_distribution<std::size_t>(1, n - 1)(rng)];
    const Scope pred = o.predecessors(i);
    Scope pa_new = oracle::random_subset(rng, pred);
    if (pa_new.empty()) pa_new.push_back(pred.front());
    Scope pa_old = oracle::random_subset(rng, pa_new);
    if (pa_old.size() == pa_new.size()) pa_old.pop_back();
    return {i, pa_old, pa_new};
}

bool true_dependences_generic(const JointTable& p, const OrderedDag& g) {
    for (Var v = 0; v < g.size(); ++v) {
        const Scope pa = sorted_unique(g.parents(v));
        for (Var u : pa)
            if (conditional_cross_entropy(p, {v}, {u}, set_difference(pa, {u})) < 1e-7) return false;
    }
    return true;
}

Verdict kl_identity() {
    std::mt19937_64 rng(101);
    IdentityReport lib{"kl", 0, 0.0, 1e-10, true};
    double oracle_gap = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 3;
        const Specs s = oracle::random_specs(rng, n, 3);
        const NodeOrdering o = oracle::random_ordering(rng, n);
        const JointTable p = oracle::random_joint(rng, s, trial % 5 == 0 ? 0.3 : 0.0);
        const OrderedDag g = oracle::random_dag(rng, s, o);
        lib.merge(verify_kl_identity(p, g, 1e-10));
        const KlDecomposition kl = kl_decomposed(p, g);
        for (Var v = 0; v < n; ++v) {
            const Scope pa = sorted_unique(g.parents(v));
            const Scope rest = set_difference(o.predecessors(v), pa);
            const double ref = rest.empty() ? 0.0 : oracle::cce(p, {v}, rest, pa);
            oracle_gap = std::max(oracle_gap, std::abs(ref - kl.per_node[v]));
        }
    }
    return {lib.pass && oracle_gap <= 1e-10,
            std::to_string(lib.instances) + " node terms, max gap " + fmt("%.3g", lib.max_discrepancy) +
                ", oracle gap " + fmt("%.3g", oracle_gap)};
}

Verdict llr_identity() {
    std::mt19937_64 rng(202);
    IdentityReport lib{"llr", 0, 0.0, 1e-10, true};
    double oracle_gap = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + trial % 4;
        const Specs s = oracle::random_specs(rng, n, 3);
        const NodeOrdering o = oracle::random_ordering(rng, n);
        const std::size_t rows = std::uniform_int_distribution<std::size_t>(1, 500)(rng);
        const EmpiricalContext ctx(oracle::random_dataset(rng, s, rows));
        const NestedPair q = random_nested(rng, o, n);
        lib.merge(verify_llr_identity(ctx, q.i, q.pa_old, q.pa_new, 1e-10));
        const double ref = (oracle::family_loglik(ctx.data(), q.i, q.pa_new) -
                            oracle::family_loglik(ctx.data(), q.i, q.pa_old)) /
                           static_cast<double>(rows);
        oracle_gap = std::max(oracle_gap, std::abs(ref - empirical_cce(ctx, q.i, set_difference(q.pa_new, q.pa_old),
                                                                         q.pa_old)));
    }
    return {lib.pass && oracle_gap <= 1e-10,
            std::to_string(lib.instances) + " instances, max gap " + fmt("%.3g", lib.max_discrepancy) +
                ", oracle gap " + fmt("%.3g", oracle_gap)};
}

Verdict bayes_identity() {
    std::mt19937_64 rng(303);
    IdentityReport lib{"bayes", 0, 0.0, 1e-10, true};
    for (double alpha : {0.5, 1.0, 2.0}) {
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t n = 2 + trial % 4;
            const Specs s = oracle::random_specs(rng, n, 3);
            const NodeOrdering o = oracle::random_ordering(rng, n);
            const std::size_t rows = std::uniform_int_distribution<std::size_t>(0, 300)(rng);
            const EmpiricalContext ctx(oracle::random_dataset(rng, s, rows));
            const NestedPair q = random_nested(rng, o, n);
            lib.merge(verify_bayes_identity(ctx, q.i, set_difference(q.pa_new, q.pa_old), q.pa_old,
                                            DirichletPrior::uniform(alpha), 1e-10));
        }
    }
    double polya_gap = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 3;
        const Specs s = oracle::random_specs(rng, n, 3);
        const std::size_t rows = std::uniform_int_distribution<std::size_t>(0, 12)(rng);
        const EmpiricalContext ctx(oracle::random_dataset(rng, s, rows));
        const double alpha = trial % 3 == 0 ? 0.5 : trial % 3 == 1 ? 1.0 : 2.0;
        const Var i = n - 1;
        Scope all(n - 1);
        for (Var v = 0; v + 1 < n; ++v) all[v] = v;
        const Scope pa = oracle::random_subset(rng, all);
        polya_gap = std::max(polya_gap, std::abs(ch_family_log_marginal(ctx, i, pa, DirichletPrior::uniform(alpha)) -
                                                 oracle::polya_log_marginal(ctx.data(), i, pa, alpha)));
    }
    const EmpiricalContext copy(Dataset(binary(2), {0, 0, 0, 0, 1, 1, 1, 1}));
    const double bf = log_bayes_factor(copy, 1, {}, {0}, DirichletPrior::uniform(1.0));
    const double example_gap = std::abs(bf - std::log(10.0 / 3.0));
    return {lib.pass && polya_gap <= 1e-9 && example_gap <= 1e-12,
            std::to_string(lib.instances) + " instances, max gap " + fmt("%.3g", lib.max_discrepancy) +
                ", polya gap " + fmt("%.3g", polya_gap) + ", example gap " + fmt("%.3g", example_gap)};
}

Verdict dual_search_equivalence() {
    const std::vector<DecisionRule> rules{EpsilonRule{0.01}, ChiSquaredRule{0.05}, AicRule{},
                                          BayesFactorRule{DirichletPrior::uniform(1.0), 0.0}};
    std::mt19937_64 rng(404);
    std::size_t runs = 0, failures = 0;
    double worst = 0.0;
    auto tally = [&](const DualSearchReport& r) {
        ++runs;
        if (!r.pass()) ++failures;
        worst = std::max(worst, r.max_step_discrepancy);
    };
    for (const DecisionRule& rule : rules) {
        for (int trial = 0; trial < 60; ++trial) {
            const std::size_t n = 2 + trial % 4;
            const Specs s = oracle::random_specs(rng, n, 3);
            const NodeOrdering o = oracle::random_ordering(rng, n);
            const BayesNet net = oracle::random_net(rng, s, oracle::random_dag(rng, s, o));
            const std::size_t rows = std::uniform_int_distribution<std::size_t>(20, 500)(rng);
            const EmpiricalContext ctx(ancestral_sample(net, rows, rng()));
            SearchConfig config;
            config.max_subset_size = 1 + trial % 2;
            tally(dual_search(ctx, o, rule, 1e-10, config));
        }
    }
    // exact distributions admit only the epsilon rule
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + trial % 3;
        const Specs s = oracle::random_specs(rng, n, 3);
        const NodeOrdering o = oracle::random_ordering(rng, n);
        const JointTable p = trial % 2 ? oracle::random_joint(rng, s)
                                       : joint_from_bayesnet(oracle::random_net(rng, s, oracle::random_dag(rng, s, o)));
        tally(dual_search(p, o, EpsilonRule{trial % 3 == 0 ? 1e-9 : 0.01}, 1e-10));
    }
    return {failures == 0, std::to_string(runs) + " searches, " + std::to_string(failures) +
                               " mismatches, max step gap " + fmt("%.3g", worst)};
}

Verdict exact_recovery() {
    std::mt19937_64 rng(505);
    int checked = 0, excluded = 0, wrong = 0;
    while (checked < 60) {
        const std::size_t n = 2 + (checked + excluded) % 3;
        const Specs s = binary(n);
        const NodeOrdering o = oracle::random_ordering(rng, n);
        const OrderedDag g = oracle::random_dag(rng, s, o);
        const JointTable p = joint_from_bayesnet(oracle::random_net(rng, s, g, 0.1));
        if (!true_dependences_generic(p, g)) {
            ++excluded;
            continue;
        }
        ++checked;
        if (!(recover_from_distribution(p, o, 1e-9) == g)) ++wrong;
    }
    const double rate = static_cast<double>(excluded) / (checked + excluded);
    return {wrong == 0 && rate < 0.10, std::to_string(checked) + " nets, " + std::to_string(wrong) +
                                           " wrong, exclusion rate " + fmt("%.3f", rate)};
}

Verdict chi2_machinery() {
    double grid_gap = 0.0;
    int points = 0;
    for (int k : {1, 2, 3, 5, 10}) {
        for (double q : {0.3, 1.0, 2.5, 6.0}) {
            const double x = q * k;
            grid_gap = std::max(grid_gap, std::abs(chi2_sf(x, k) - oracle::chi2_sf_quadrature(x, k)));
            ++points;
        }
    }
    std::mt19937_64 rng(606);
    const DecisionRule rule = ChiSquaredRule{0.05};
    int rejections = 0;
    double p_sum = 0.0;
    const int datasets = 500;
    for (int t = 0; t < datasets; ++t) {
        const EmpiricalContext ctx(oracle::random_dataset(rng, binary(2), 500));
        const TestOutcome out = evaluate_rule(rule, ctx, 1, {0}, {});
        rejections += !out.independent;
        p_sum += out.p_value;
    }
    const double rate = static_cast<double>(rejections) / datasets;
    const double mean_p = p_sum / datasets;
    return {grid_gap <= 1e-8 && rate >= 0.02 && rate <= 0.09 && mean_p >= 0.42 && mean_p <= 0.58,
            std::to_string(points) + " grid points, max gap " + fmt("%.3g", grid_gap) + ", null rejection rate " +
                fmt("%.3f", rate) + ", mean p " + fmt("%.3f", mean_p)};
}

Verdict decomposability() {
    std::mt19937_64 rng(707);
    int exact_mismatches = 0;
    double oracle_gap = 0.0;
    for (int trial = 0; trial < 80; ++trial) {
        const std::size_t n = 2 + trial % 4;
        const Specs s = oracle::random_specs(rng, n, 3);
        const NodeOrdering o = oracle::random_ordering(rng, n);
        const OrderedDag g = oracle::random_dag(rng, s, o);
        const EmpiricalContext ctx(oracle::random_dataset(rng, s, 1 + trial * 5));
        const DirichletPrior prior = trial % 2 ? DirichletPrior::uniform(1.0) : DirichletPrior::equivalent_sample_size(4.0);
        double ll = 0.0, ml = 0.0, ref = 0.0;
        for (Var v = 0; v < n; ++v) {
            ll += family_log_likelihood(ctx, v, g.parents(v));
            ml += ch_family_log_marginal(ctx, v, g.parents(v), prior);
            ref += oracle::family_loglik(ctx.data(), v, g.parents(v));
        }
        if (ll != log_likelihood(ctx, g)) ++exact_mismatches;
        if (ml != ch_log_marginal(ctx, g, prior)) ++exact_mismatches;
        oracle_gap = std::max(oracle_gap, std::abs(ref - ll) / std::max(1.0, std::abs(ref)));
    }
    return {exact_mismatches == 0 && oracle_gap <= 1e-12,
            "80 instances, " + std::to_string(exact_mismatches) + " inexact sums, oracle rel gap " +
                fmt("%.3g", oracle_gap)};
}

int run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    return cli_main(args, out, err);
}

Verdict cli_end_to_end() {
    const fs::path fx(BNORDER_FIXTURES);
    const fs::path dir = fs::temp_directory_path() / "bnorder_acceptance";
    fs::create_directories(dir);
    int recovered = 0;
    for (int seed = 1; seed <= 5; ++seed) {
        const fs::path data = dir / ("chain_" + std::to_string(seed) + ".csv");
        const fs::path model = dir / ("learned_" + std::to_string(seed) + ".json");
        if (run_cli({"sample", "--model", (fx / "chain_model.json").string(), "--n", "2000", "--seed",
                     std::to_string(seed), "--out", data.string()}) != kExitOk)
            continue;
        if (run_cli({"learn", "--data", data.string(), "--order", "x0,x1,x2", "--method", "chi2", "--alpha", "0.01",
                     "--out", model.string()}) != kExitOk)
            continue;
        const ModelDocument learned = read_model(model);
        const OrderedDag& g = learned.net.dag();
        if (g.parents(0).empty() && g.parents(1) == Scope{0} && g.parents(2) == Scope{1}) ++recovered;
    }
    const std::string copy = (fx / "copy.csv").string();
    const std::string chain = (fx / "chain_500.csv").string();
    const std::string dist = (fx / "chain_dist.json").string();
    const std::vector<std::vector<std::string>> verifies{
        {"verify", "--data", copy, "--order", "file-order", "--method", "ci-epsilon", "--epsilon", "0.1"},
        {"verify", "--data", copy, "--order", "file-order", "--method", "bayes"},
        {"verify", "--data", chain, "--order", "file-order", "--method", "ci-epsilon", "--epsilon", "0.01"},
        {"verify", "--data", chain, "--order", "file-order", "--method", "chi2", "--alpha", "0.01"},
        {"verify", "--data", chain, "--order", "file-order", "--method", "aic"},
        {"verify", "--data", chain, "--order", "file-order", "--method", "bayes"},
        {"verify", "--dist", dist, "--order", "file-order", "--method", "ci-epsilon", "--epsilon", "1e-9"},
    };
    int verify_ok = 0;
    for (const auto& args : verifies) verify_ok += run_cli(args) == kExitOk;
    return {recovered >= 4 && verify_ok == static_cast<int>(verifies.size()),
            std::to_string(recovered) + "/5 seeds recovered, verify exit 0 on " + std::to_string(verify_ok) + "/" +
                std::to_string(verifies.size()) + " fixture runs"};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_seconds;
        std::function<Verdict()> run;
    };
    const std::vector<Criterion> criteria{
        {"1 kl / cross-entropy identity", 10, kl_identity},
        {"2 finite-data likelihood-ratio identity", 10, llr_identity},
        {"3 bayesian identity", 60, bayes_identity},
        {"4 dual-search structural equivalence", 60, dual_search_equivalence},
        {"5 exact recovery", 30, exact_recovery},
        {"6 chi-squared machinery", 60, chi2_machinery},
        {"7 decomposability", 60, decomposability},
        {"8 end-to-end cli", 60, cli_end_to_end},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.budget_seconds) {
            v.pass = false;
            v.detail += ", over time budget";
        }
        std::printf("%s criterion %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), secs);
        failed += !v.pass;
    }
    return failed == 0 ? 0 : 1;
}
