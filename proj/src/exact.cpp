#include "bnorder/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace bnorder {

namespace {

void require_vars(const Specs& specs, const Scope& scope) {
    for (Var v : scope)
        if (v >= specs.size()) throw UnknownVariable(v);
}

Scope concat(const Scope& a, const Scope& b) {
    Scope out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

std::size_t dot(const std::vector<std::size_t>& values, const std::vector<std::size_t>& strides) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < values.size(); ++k) idx += values[k] * strides[k];
    return idx;
}

}  // namespace

double clamp_nonnegative(double value, const char* what, double tolerance) {
    if (value >= 0.0) return value;
    if (value >= -tolerance) return 0.0;
    throw InternalConsistencyError(std::string(what) + " evaluated to " + std::to_string(value));
}

JointTable::JointTable(Specs specs, std::vector<double> probs)
    : specs_(std::move(specs)), probs_(std::move(probs)) {
    validate_specs(specs_);
    Scope all(specs_.size());
    for (Var v = 0; v < all.size(); ++v) all[v] = v;
    const std::size_t cells = state_space_size(specs_, all, kMaxJointCells);
    if (probs_.size() != cells)
        throw std::invalid_argument("joint table has " + std::to_string(probs_.size()) +
                                    " cells, expected " + std::to_string(cells));
    long double total = 0.0L;
    for (double p : probs_) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw std::invalid_argument("joint table has a negative or non-finite entry");
        total += p;
    }
    if (std::abs(static_cast<double>(total) - 1.0) > 1e-12)
        throw std::invalid_argument("joint table does not sum to 1");
}

ProbTable marginalize(const JointTable& p, const Scope& scope) {
    const Specs& specs = p.specs();
    require_vars(specs, scope);
    if (sorted_unique(scope).size() != scope.size())
        throw std::invalid_argument("marginalization scope has repeated variables");

    ProbTable out;
    out.scope = scope;
    out.cardinalities = cardinalities_of(specs, scope);
    out.probs.assign(state_space_size(specs, scope), 0.0);

    Scope all(specs.size());
    for (Var v = 0; v < all.size(); ++v) all[v] = v;
    // stride of every variable inside the output layout (0 when summed out)
    const std::vector<std::size_t> strides = scope_strides(specs, scope, all);

    AssignmentCounter cell(cardinalities_of(specs, all));
    std::size_t idx = 0;
    do {
        out.probs[dot(cell.values(), strides)] += p[idx++];
    } while (cell.next());
    return out;
}

JointTable joint_from_bayesnet(const BayesNet& net, bool allow_undefined_rows) {
    const Specs& specs = net.specs();
    Scope all(specs.size());
    for (Var v = 0; v < all.size(); ++v) all[v] = v;
    const std::size_t cells = state_space_size(specs, all, kMaxJointCells);

    const auto& order = net.ordering().order();
    std::vector<std::vector<std::size_t>> parent_strides(specs.size());
    for (Var v = 0; v < specs.size(); ++v) {
        const Scope& pa = net.dag().parents(v);
        // row index of the CPT: parents row-major, last parent fastest
        parent_strides[v] = scope_strides(specs, pa, pa);
    }

    std::vector<double> probs(cells, 0.0);
    AssignmentCounter cell(cardinalities_of(specs, all));
    std::size_t idx = 0;
    do {
        const auto& x = cell.values();
        double prob = 1.0;
        for (Var v : order) {
            const Cpt& cpt = net.cpt(v);
            const Scope& pa = cpt.parents();
            std::size_t r = 0;
            for (std::size_t k = 0; k < pa.size(); ++k) r += x[pa[k]] * parent_strides[v][k];
            if (!cpt.defined(r) && !allow_undefined_rows) throw UndefinedCptRow(v, r);
            prob *= cpt.row(r)[x[v]];
            if (prob == 0.0) break;
        }
        probs[idx++] = prob;
    } while (cell.next());
    return JointTable(specs, std::move(probs));
}

BayesNet project_to_dag(const JointTable& p, const OrderedDag& dag) {
    const Specs& specs = p.specs();
    if (dag.size() != specs.size())
        throw std::invalid_argument("graph and distribution disagree on the number of variables");
    std::vector<Cpt> cpts;
    cpts.reserve(specs.size());
    for (Var v = 0; v < specs.size(); ++v) {
        const Scope& pa = dag.parents(v);
        Scope family = pa;
        family.push_back(v);
        const ProbTable joint = marginalize(p, family);
        const std::size_t card = specs[v].cardinality;
        const std::size_t rows = joint.probs.size() / card;
        std::vector<double> table(joint.probs.size(), 0.0);
        std::vector<bool> defined(rows, false);
        for (std::size_t r = 0; r < rows; ++r) {
            double row_sum = 0.0;
            for (std::size_t k = 0; k < card; ++k) row_sum += joint.probs[r * card + k];
            if (row_sum <= 0.0) continue;
            defined[r] = true;
            for (std::size_t k = 0; k < card; ++k)
                table[r * card + k] = joint.probs[r * card + k] / row_sum;
        }
        cpts.emplace_back(v, card, pa, cardinalities_of(specs, pa), std::move(table),
                          std::move(defined));
    }
    return BayesNet(specs, dag, std::move(cpts));
}

double kl_divergence(const JointTable& p, const JointTable& q) {
    if (p.size() != q.size() || p.num_vars() != q.num_vars())
        throw std::invalid_argument("KL divergence between tables of different shape");
    for (Var v = 0; v < p.num_vars(); ++v)
        if (p.specs()[v].cardinality != q.specs().at(v).cardinality)
            throw std::invalid_argument("KL divergence between tables of different shape");
    double sum = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x) {
        if (p[x] <= 0.0) continue;
        if (q[x] <= 0.0) return std::numeric_limits<double>::infinity();
        sum += p[x] * std::log(p[x] / q[x]);
    }
    return clamp_nonnegative(sum, "KL divergence");
}

double conditional_cross_entropy(const JointTable& p, const Scope& a, const Scope& b,
                                 const Scope& c) {
    const Specs& specs = p.specs();
    require_vars(specs, a);
    require_vars(specs, b);
    require_vars(specs, c);
    if (!disjoint(a, b) || !disjoint(a, c) || !disjoint(b, c))
        throw ScopeOverlap("cross entropy scopes must be disjoint");
    if (a.empty() || b.empty()) return 0.0;

    const Scope u = concat(concat(a, b), c);
    const Scope ac = concat(a, c);
    const Scope bc = concat(b, c);
    const ProbTable p_u = marginalize(p, u);
    const ProbTable p_ac = marginalize(p, ac);
    const ProbTable p_bc = marginalize(p, bc);
    const ProbTable p_c = marginalize(p, c);

    const auto s_ac = scope_strides(specs, ac, u);
    const auto s_bc = scope_strides(specs, bc, u);
    const auto s_c = scope_strides(specs, c, u);

    double sum = 0.0;
    AssignmentCounter cell(p_u.cardinalities);
    std::size_t idx = 0;
    do {
        const double pu = p_u.probs[idx++];
        if (pu <= 0.0) continue;
        const auto& x = cell.values();
        const double pac = p_ac.probs[dot(x, s_ac)];
        const double pbc = p_bc.probs[dot(x, s_bc)];
        const double pc = p_c.probs[dot(x, s_c)];
        sum += pu * std::log((pu * pc) / (pac * pbc));
    } while (cell.next());
    return clamp_nonnegative(sum, "conditional cross entropy");
}

KlDecomposition kl_decomposed(const JointTable& p, const OrderedDag& dag) {
    if (dag.size() != p.num_vars())
        throw std::invalid_argument("graph and distribution disagree on the number of variables");
    KlDecomposition out;
    out.per_node.resize(dag.size(), 0.0);
    for (Var i = 0; i < dag.size(); ++i) {
        const Scope pa = sorted_unique(dag.parents(i));
        const Scope rest = set_difference(dag.ordering().predecessors(i), pa);
        out.per_node[i] = conditional_cross_entropy(p, {i}, rest, pa);
        out.total += out.per_node[i];
    }
    return out;
}

double expected_family_log_likelihood(const JointTable& p, Var i, const Scope& pa) {
    Scope family = pa;
    family.push_back(i);
    const ProbTable joint = marginalize(p, family);
    const std::size_t card = p.specs().at(i).cardinality;
    double sum = 0.0;
    for (std::size_t r = 0; r * card < joint.probs.size(); ++r) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < card; ++k) row_sum += joint.probs[r * card + k];
        for (std::size_t k = 0; k < card; ++k) {
            const double pj = joint.probs[r * card + k];
            if (pj > 0.0) sum += pj * std::log(pj / row_sum);
        }
    }
    return sum;
}

double delta_kl(const JointTable& p, Var i, const Scope& pa_old, const Scope& pa_new) {
    if (!is_subset(pa_old, pa_new)) throw NotNested("old parent set is not contained in the new one");
    if (std::find(pa_new.begin(), pa_new.end(), i) != pa_new.end())
        throw ScopeOverlap("a variable cannot be its own parent");
    const double gain = expected_family_log_likelihood(p, i, sorted_unique(pa_new)) -
                        expected_family_log_likelihood(p, i, sorted_unique(pa_old));
    return clamp_nonnegative(gain, "KL reduction");
}

Dataset ancestral_sample(const BayesNet& net, std::size_t n_rows, std::uint64_t seed,
                         bool allow_undefined_rows) {
    const Specs& specs = net.specs();
    const std::size_t n = specs.size();
    std::vector<std::vector<std::size_t>> parent_strides(n);
    for (Var v = 0; v < n; ++v) {
        const Scope& pa = net.dag().parents(v);
        parent_strides[v] = scope_strides(specs, pa, pa);
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::uint32_t> cells(n_rows * n);
    for (std::size_t r = 0; r < n_rows; ++r) {
        std::uint32_t* x = cells.data() + r * n;
        for (Var v : net.ordering().order()) {
            const Cpt& cpt = net.cpt(v);
            const Scope& pa = cpt.parents();
            std::size_t row = 0;
            for (std::size_t k = 0; k < pa.size(); ++k) row += x[pa[k]] * parent_strides[v][k];
            if (!cpt.defined(row) && !allow_undefined_rows) throw UndefinedCptRow(v, row);
            const auto probs = cpt.row(row);
            const double u = unit(rng);
            double cumulative = 0.0;
            std::size_t state = probs.size();
            std::size_t last_positive = 0;
            for (std::size_t k = 0; k < probs.size(); ++k) {
                if (probs[k] > 0.0) last_positive = k;
                cumulative += probs[k];
                if (u < cumulative && probs[k] > 0.0) {
                    state = k;
                    break;
                }
            }
            if (state == probs.size()) state = last_positive;  // rounding at the top end
            x[v] = static_cast<std::uint32_t>(state);
        }
    }
    return Dataset(specs, std::move(cells));
}

}  // namespace bnorder
