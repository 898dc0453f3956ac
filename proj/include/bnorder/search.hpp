#pragma once

// Greedy grow/thin parent selection under a fixed node ordering. The same
// search runs on an exact distribution or on data, and either as a sequence
// of conditional-independence tests or as a sequence of local score
// comparisons; the evaluator supplies the numbers, the rule the verdicts.

#include <optional>
#include <string>
#include <vector>

#include "bnorder/empirical.hpp"
#include "bnorder/exact.hpp"
#include "bnorder/scoring.hpp"

namespace bnorder {

enum class EvaluatorKind { exact, empirical };

// How an evaluator computes its statistics: as (conditional) cross entropies,
// or as score differences between nested families.
enum class Framing { independence_test, score };

std::string to_string(EvaluatorKind kind);
std::string to_string(Framing framing);

class NodeEvaluator {
public:
    virtual ~NodeEvaluator() = default;

    virtual EvaluatorKind kind() const = 0;
    virtual Framing framing() const = 0;
    virtual const Specs& specs() const = 0;
    // Number of records; empty for an exact distribution.
    virtual std::optional<std::size_t> sample_size() const = 0;

    // Strength of the dependence of i on S given C, in nats.
    virtual double statistic(Var i, const Scope& s, const Scope& c) const = 0;
    // Rule verdict for X_i ⫫ X_S | X_C.
    virtual TestOutcome test(const DecisionRule& rule, Var i, const Scope& s,
                             const Scope& c) const = 0;

    // Quantity maximised when choosing which candidate to add: the statistic,
    // or the log Bayes factor under a Bayes rule.
    double selection_score(const DecisionRule& rule, Var i, const Scope& s, const Scope& c) const;
};

class ExactEvaluator final : public NodeEvaluator {
public:
    explicit ExactEvaluator(const JointTable& p, Framing framing = Framing::independence_test)
        : p_(p), framing_(framing) {}

    EvaluatorKind kind() const override { return EvaluatorKind::exact; }
    Framing framing() const override { return framing_; }
    const Specs& specs() const override { return p_.specs(); }
    std::optional<std::size_t> sample_size() const override { return std::nullopt; }
    double statistic(Var i, const Scope& s, const Scope& c) const override;
    TestOutcome test(const DecisionRule& rule, Var i, const Scope& s, const Scope& c) const override;

private:
    const JointTable& p_;
    Framing framing_;
};

class EmpiricalEvaluator final : public NodeEvaluator {
public:
    explicit EmpiricalEvaluator(const EmpiricalContext& ctx,
                                Framing framing = Framing::independence_test)
        : ctx_(ctx), framing_(framing) {}

    EvaluatorKind kind() const override { return EvaluatorKind::empirical; }
    Framing framing() const override { return framing_; }
    const Specs& specs() const override { return ctx_.specs(); }
    std::optional<std::size_t> sample_size() const override { return ctx_.num_rows(); }
    double statistic(Var i, const Scope& s, const Scope& c) const override;
    TestOutcome test(const DecisionRule& rule, Var i, const Scope& s, const Scope& c) const override;

private:
    const EmpiricalContext& ctx_;
    Framing framing_;
};

struct SearchConfig {
    // Candidate sets scored during growth contain 1..max_subset_size variables.
    std::size_t max_subset_size = 1;
    // Stop growing when the best candidate's own test accepts independence,
    // instead of adding it while the remainder test still rejects.
    bool stop_when_candidate_independent = false;
};

enum class SearchPhase { grow, thin };

enum class StepAction {
    guard,      // test of the whole remainder given the current parents
    add,        // best candidate moved into the parent set
    thin_test,  // removal test for one parent
};

std::string to_string(SearchPhase phase);
std::string to_string(StepAction action);

struct SearchStep {
    Var node = 0;
    SearchPhase phase = SearchPhase::grow;
    StepAction action = StepAction::guard;
    Scope candidate;
    double statistic = 0.0;
    std::size_t dof = 0;
    bool independent = false;
    Scope parents_after;
};

struct SearchTrace {
    std::string rule;
    EvaluatorKind evaluator = EvaluatorKind::exact;
    Framing framing = Framing::independence_test;
    // Indexed by variable; each list is in execution order.
    std::vector<std::vector<SearchStep>> per_node;
};

struct NodeSearch {
    Scope parents;  // ascending variable index
    std::vector<SearchStep> steps;
};

struct LearnResult {
    OrderedDag dag;
    SearchTrace trace;
};

NodeSearch grow_parents(const NodeEvaluator& eval, const NodeOrdering& ordering, Var i,
                        const DecisionRule& rule, const SearchConfig& config = {});

NodeSearch thin_parents(const NodeEvaluator& eval, Var i, const Scope& parents,
                        const DecisionRule& rule);

LearnResult learn_structure(const NodeEvaluator& eval, const NodeOrdering& ordering,
                            const DecisionRule& rule, const SearchConfig& config = {});

// Smallest predecessor subset (ties: lexicographically smallest) given which
// the rule accepts independence of i from the remaining predecessors.
inline constexpr std::size_t kMaxExhaustivePredecessors = 12;
Scope exhaustive_parents(const NodeEvaluator& eval, const NodeOrdering& ordering, Var i,
                         const DecisionRule& rule);

OrderedDag recover_from_distribution(const JointTable& p, const NodeOrdering& ordering,
                                     double epsilon);

// Rebuilds a node's parent set from its steps.
Scope replay_parents(const std::vector<SearchStep>& steps);

}  // namespace bnorder
