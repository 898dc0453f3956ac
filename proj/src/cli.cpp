#include "bnorder/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "bnorder/duality.hpp"
#include "bnorder/empirical.hpp"
#include "bnorder/exact.hpp"
#include "bnorder/io.hpp"
#include "bnorder/scoring.hpp"
#include "bnorder/search.hpp"

namespace bnorder {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string join_names(const Specs& specs, const Scope& scope) {
    std::string out;
    for (Var v : scope) {
        if (!out.empty()) out += ',';
        out += specs[v].name;
    }
    return out.empty() ? "-" : out;
}

NodeOrdering parse_ordering(const std::string& text, const Specs& specs) {
    if (text == "file-order") return NodeOrdering::identity(specs.size());
    std::map<std::string, Var> index;
    for (Var v = 0; v < specs.size(); ++v) index[specs[v].name] = v;
    std::vector<Var> order;
    std::stringstream in(text);
    std::string name;
    while (std::getline(in, name, ',')) {
        const auto it = index.find(name);
        if (it == index.end()) throw UsageError("--order names unknown variable '" + name + "'");
        order.push_back(it->second);
    }
    if (order.size() != specs.size())
        throw UsageError("--order must list each of the " + std::to_string(specs.size()) +
                         " variables exactly once");
    try {
        return NodeOrdering(order);
    } catch (const std::exception& e) {
        throw UsageError(std::string("--order: ") + e.what());
    }
}

struct RuleOptions {
    std::string method;
    std::optional<double> epsilon;
    std::optional<double> alpha;
    double prior_alpha = 1.0;
};

void add_rule_options(CLI::App* cmd, RuleOptions& opts) {
    cmd->add_option("--method", opts.method, "ci-epsilon | chi2 | aic | bayes")
        ->required()
        ->check(CLI::IsMember({"ci-epsilon", "chi2", "aic", "bayes"}));
    cmd->add_option("--epsilon", opts.epsilon, "cross-entropy threshold in nats (ci-epsilon)");
    cmd->add_option("--alpha", opts.alpha, "significance level (chi2)");
    cmd->add_option("--prior-alpha", opts.prior_alpha, "Dirichlet pseudo-count per cell (bayes)")
        ->capture_default_str();
}

DecisionRule make_rule(const RuleOptions& opts) {
    DecisionRule rule;
    if (opts.method == "ci-epsilon") {
        if (!opts.epsilon) throw UsageError("--method ci-epsilon requires --epsilon");
        rule = EpsilonRule{*opts.epsilon};
    } else if (opts.method == "chi2") {
        if (!opts.alpha) throw UsageError("--method chi2 requires --alpha");
        rule = ChiSquaredRule{*opts.alpha};
    } else if (opts.method == "aic") {
        rule = AicRule{};
    } else {
        rule = BayesFactorRule{DirichletPrior::uniform(opts.prior_alpha), 0.0};
    }
    try {
        validate_rule(rule);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return rule;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

Dataset load_data_for_model(const std::string& path, const ModelDocument& model) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError(CsvError::Kind::io, 0, "cannot open " + path);
    return encode_dataset_csv(in, model.net.specs(), model.labels);
}

// ---- learn ------------------------------------------------------------------

struct LearnOptions {
    std::string data, order = "file-order", trace, out, framing = "test";
    RuleOptions rule;
    std::size_t max_subset = 1;
    bool stop_early = false;
    bool allow_constant = false;
};

int run_learn(const LearnOptions& o, std::ostream& out) {
    const DecisionRule rule = make_rule(o.rule);
    ParsedDataset parsed = parse_dataset_csv(std::filesystem::path(o.data), {o.allow_constant});
    const Specs specs = parsed.data.specs();
    const NodeOrdering ordering = parse_ordering(o.order, specs);
    const EmpiricalContext ctx(std::move(parsed.data));
    const EmpiricalEvaluator eval(ctx, o.framing == "score" ? Framing::score : Framing::independence_test);
    SearchConfig config;
    config.max_subset_size = o.max_subset;
    config.stop_when_candidate_independent = o.stop_early;
    const LearnResult result = learn_structure(eval, ordering, rule, config);

    std::vector<Cpt> cpts;
    const bool bayes = rule_kind(rule) == RuleKind::bayes_factor;
    for (Var v = 0; v < specs.size(); ++v) {
        const Scope& pa = result.dag.parents(v);
        cpts.push_back(bayes ? posterior_mean_cpt(ctx, v, pa, DirichletPrior::uniform(o.rule.prior_alpha))
                             : mle_cpt(ctx, v, pa));
    }
    auto file = open_out(o.out);
    write_model(file, {BayesNet(specs, result.dag, std::move(cpts)), parsed.labels});
    if (!o.trace.empty()) {
        auto trace = open_out(o.trace);
        trace << to_json(result.trace, specs).dump(2) << '\n';
    }
    for (Var v : ordering.order())
        out << specs[v].name << " <- " << join_names(specs, result.dag.parents(v)) << '\n';
    return kExitOk;
}

// ---- sample -----------------------------------------------------------------

struct SampleOptions {
    std::string model, out;
    std::size_t n = 0;
    std::uint64_t seed = 1;
};

int run_sample(const SampleOptions& o) {
    const ModelDocument doc = read_model(std::filesystem::path(o.model));
    const Dataset data = ancestral_sample(doc.net, o.n, o.seed, true);
    auto file = open_out(o.out);
    write_dataset_csv(file, data, doc.labels);
    return kExitOk;
}

// ---- score ------------------------------------------------------------------

struct ScoreOptions {
    std::string data, model, score;
    double prior_alpha = 1.0;
};

int run_score(const ScoreOptions& o, std::ostream& out) {
    if (!(o.prior_alpha > 0.0)) throw UsageError("--prior-alpha must be positive");
    const ModelDocument model = read_model(std::filesystem::path(o.model));
    const EmpiricalContext ctx(load_data_for_model(o.data, model));
    const OrderedDag& dag = model.net.dag();
    double value = 0.0;
    if (o.score == "loglik")
        value = log_likelihood(ctx, dag);
    else if (o.score == "aic")
        value = aic_score(ctx, dag);
    else
        value = ch_log_marginal(ctx, dag, DirichletPrior::uniform(o.prior_alpha));
    out << fmt(value) << '\n';
    return kExitOk;
}

// ---- verify -----------------------------------------------------------------

struct VerifyOptions {
    std::string data, dist, order = "file-order", report;
    RuleOptions rule;
    std::size_t instances = 20;
    double tol = 1e-10;
    std::uint64_t seed = 1;
    bool allow_constant = false;
};

Scope random_subset(const Scope& pool, std::mt19937_64& rng) {
    Scope out;
    std::bernoulli_distribution coin(0.5);
    for (Var v : pool)
        if (coin(rng)) out.push_back(v);
    return out;
}

OrderedDag random_dag(const Specs& specs, const NodeOrdering& ordering, std::mt19937_64& rng) {
    std::vector<Scope> parents(specs.size());
    for (Var v = 0; v < specs.size(); ++v) parents[v] = random_subset(ordering.predecessors(v), rng);
    return validate_dag(specs, ordering, std::move(parents));
}

void print_identity(std::ostream& out, const IdentityReport& r) {
    out << (r.pass ? "ok   " : "FAIL ") << r.identity << ": " << r.instances
        << " instances, max discrepancy " << fmt(r.max_discrepancy) << " (tol " << fmt(r.tolerance)
        << ")\n";
}

void print_dual(std::ostream& out, const DualSearchReport& r, const Specs& specs) {
    out << (r.pass() ? "ok   " : "FAIL ") << "dual search [" << r.rule << ", " << to_string(r.evaluator)
        << "]: structures " << (r.structures_equal ? "equal" : "differ") << ", steps "
        << (r.steps_equal ? "equal" : "differ") << " (" << r.steps_compared
        << " compared), max step discrepancy " << fmt(r.max_step_discrepancy) << '\n';
    for (Var v = 0; v < r.test_parents.size(); ++v)
        out << "     " << specs[v].name << " <- " << join_names(specs, r.test_parents[v]) << '\n';
}

int run_verify(const VerifyOptions& o, std::ostream& out) {
    if (o.data.empty() == o.dist.empty()) throw UsageError("verify needs exactly one of --data or --dist");
    if (!(o.tol >= 0.0)) throw UsageError("--tol must be non-negative");
    const DecisionRule rule = make_rule(o.rule);
    std::mt19937_64 rng(o.seed);

    std::vector<IdentityReport> identities;
    DualSearchReport dual;
    Specs specs;

    auto kl_checks = [&](const JointTable& p, const NodeOrdering& ordering) {
        IdentityReport terms{"kl-term = conditional cross entropy", 0, 0.0, o.tol, true};
        IdentityReport totals{"sum of kl-terms = kl divergence", 0, 0.0, o.tol, true};
        for (std::size_t k = 0; k < o.instances; ++k) {
            const OrderedDag dag = random_dag(p.specs(), ordering, rng);
            terms.merge(verify_kl_identity(p, dag, o.tol));
            totals.merge(verify_kl_total(p, dag, o.tol));
        }
        identities.push_back(terms);
        identities.push_back(totals);
    };

    if (!o.data.empty()) {
        ParsedDataset parsed = parse_dataset_csv(std::filesystem::path(o.data), {o.allow_constant});
        specs = parsed.data.specs();
        const NodeOrdering ordering = parse_ordering(o.order, specs);
        const EmpiricalContext ctx(std::move(parsed.data));
        const DirichletPrior prior = DirichletPrior::uniform(o.rule.prior_alpha);

        IdentityReport llr{"log-likelihood ratio / N = empirical cross entropy", 0, 0.0, o.tol, true};
        IdentityReport bayes{"bayesian independence test = log bayes factor", 0, 0.0, o.tol, true};
        std::uniform_int_distribution<std::size_t> pick(0, specs.size() - 1);
        for (std::size_t k = 0; k < o.instances; ++k) {
            const Var i = pick(rng);
            const Scope preds = ordering.predecessors(i);
            const Scope pa_old = random_subset(preds, rng);
            const Scope s = random_subset(set_difference(preds, pa_old), rng);
            llr.merge(verify_llr_identity(ctx, i, pa_old, set_union(pa_old, s), o.tol));
            bayes.merge(verify_bayes_identity(ctx, i, s, pa_old, prior, o.tol));
        }
        identities.push_back(llr);
        identities.push_back(bayes);

        Scope all(specs.size());
        for (Var v = 0; v < all.size(); ++v) all[v] = v;
        bool joint_fits = true;
        try {
            state_space_size(specs, all, kMaxJointCells);
        } catch (const StateSpaceTooLarge&) {
            joint_fits = false;
        }
        if (joint_fits) kl_checks(empirical_joint(ctx), ordering);
        dual = dual_search(ctx, ordering, rule, o.tol);
    } else {
        if (rule_kind(rule) != RuleKind::epsilon)
            throw UsageError("an exact distribution admits only --method ci-epsilon");
        const DistributionDocument doc = read_distribution(std::filesystem::path(o.dist));
        specs = doc.dist.specs();
        const NodeOrdering ordering = parse_ordering(o.order, specs);
        kl_checks(doc.dist, ordering);
        dual = dual_search(doc.dist, ordering, rule, o.tol);
    }

    bool pass = dual.pass();
    for (const IdentityReport& r : identities) {
        print_identity(out, r);
        pass = pass && r.pass;
    }
    print_dual(out, dual, specs);

    if (!o.report.empty()) {
        nlohmann::ordered_json j;
        j["pass"] = pass;
        j["identities"] = nlohmann::ordered_json::array();
        for (const IdentityReport& r : identities) j["identities"].push_back(to_json(r));
        j["dual_search"] = to_json(dual, specs);
        auto file = open_out(o.report);
        file << j.dump(2) << '\n';
    }
    return pass ? kExitOk : kExitVerificationFailed;
}

// ---- recover ----------------------------------------------------------------

struct RecoverOptions {
    std::string dist, order = "file-order", out;
    double epsilon = 0.0;
};

int run_recover(const RecoverOptions& o, std::ostream& out) {
    if (!(o.epsilon >= 0.0)) throw UsageError("--epsilon must be non-negative");
    const DistributionDocument doc = read_distribution(std::filesystem::path(o.dist));
    const Specs& specs = doc.dist.specs();
    const NodeOrdering ordering = parse_ordering(o.order, specs);
    const OrderedDag dag = recover_from_distribution(doc.dist, ordering, o.epsilon);
    auto file = open_out(o.out);
    write_model(file, {project_to_dag(doc.dist, dag), doc.labels});
    for (Var v : ordering.order()) out << specs[v].name << " <- " << join_names(specs, dag.parents(v)) << '\n';
    return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Structure learning for discrete Bayesian networks under a fixed node ordering", "bnorder"};
    app.require_subcommand(1);

    LearnOptions learn;
    auto* learn_cmd = app.add_subcommand("learn", "learn a network from a CSV dataset");
    learn_cmd->add_option("--data", learn.data, "dataset CSV")->required();
    learn_cmd->add_option("--order", learn.order, "comma-separated variable names, or file-order")
        ->capture_default_str();
    add_rule_options(learn_cmd, learn.rule);
    learn_cmd->add_option("--trace", learn.trace, "write the search trace as JSON");
    learn_cmd->add_option("--out", learn.out, "model JSON to write")->required();
    learn_cmd->add_option("--framing", learn.framing, "test | score")
        ->check(CLI::IsMember({"test", "score"}))
        ->capture_default_str();
    learn_cmd->add_option("--max-subset", learn.max_subset, "largest candidate set tried per growth step")
        ->check(CLI::Range(1, 3))
        ->capture_default_str();
    learn_cmd->add_flag("--stop-early", learn.stop_early,
                        "stop growing once the best candidate tests independent");
    learn_cmd->add_flag("--allow-constant", learn.allow_constant, "keep constant columns");

    SampleOptions sample;
    auto* sample_cmd = app.add_subcommand("sample", "draw records from a model");
    sample_cmd->add_option("--model", sample.model, "model JSON")->required();
    sample_cmd->add_option("--n", sample.n, "number of records")->required();
    sample_cmd->add_option("--seed", sample.seed, "random seed")->capture_default_str();
    sample_cmd->add_option("--out", sample.out, "CSV to write")->required();

    ScoreOptions score;
    auto* score_cmd = app.add_subcommand("score", "score a model against a dataset");
    score_cmd->add_option("--data", score.data, "dataset CSV")->required();
    score_cmd->add_option("--model", score.model, "model JSON")->required();
    score_cmd->add_option("--score", score.score, "loglik | aic | bde")
        ->required()
        ->check(CLI::IsMember({"loglik", "aic", "bde"}));
    score_cmd->add_option("--prior-alpha", score.prior_alpha, "Dirichlet pseudo-count per cell (bde)")
        ->capture_default_str();

    VerifyOptions verify;
    auto* verify_cmd = app.add_subcommand("verify", "check the test/score identities on a dataset or distribution");
    auto* data_opt = verify_cmd->add_option("--data", verify.data, "dataset CSV");
    auto* dist_opt = verify_cmd->add_option("--dist", verify.dist, "distribution JSON");
    data_opt->excludes(dist_opt);
    verify_cmd->add_option("--order", verify.order, "comma-separated variable names, or file-order")
        ->capture_default_str();
    add_rule_options(verify_cmd, verify.rule);
    verify_cmd->add_option("--instances", verify.instances, "random identity instances")->capture_default_str();
    verify_cmd->add_option("--tol", verify.tol, "absolute tolerance")->capture_default_str();
    verify_cmd->add_option("--seed", verify.seed, "seed for instance generation")->capture_default_str();
    verify_cmd->add_option("--report", verify.report, "write a JSON report");
    verify_cmd->add_flag("--allow-constant", verify.allow_constant, "keep constant columns");

    RecoverOptions recover;
    auto* recover_cmd = app.add_subcommand("recover", "minimal network for an exact distribution");
    recover_cmd->add_option("--dist", recover.dist, "distribution JSON")->required();
    recover_cmd->add_option("--order", recover.order, "comma-separated variable names, or file-order")
        ->capture_default_str();
    recover_cmd->add_option("--epsilon", recover.epsilon, "cross-entropy threshold in nats")->required();
    recover_cmd->add_option("--out", recover.out, "model JSON to write")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*learn_cmd) return run_learn(learn, out);
        if (*sample_cmd) return run_sample(sample);
        if (*score_cmd) return run_score(score, out);
        if (*verify_cmd) return run_verify(verify, out);
        if (*recover_cmd) return run_recover(recover, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace bnorder
