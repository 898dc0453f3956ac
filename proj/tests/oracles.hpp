#pragma once

// Test-only reference implementations and random instance generators. The
// oracles here are written independently of the library's summation paths:
// they evaluate everything from raw rows or raw cells with their own indexing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "bnorder/empirical.hpp"
#include "bnorder/exact.hpp"
#include "bnorder/model.hpp"

namespace oracle {

using bnorder::Scope;
using bnorder::Specs;
using bnorder::Var;

inline std::vector<std::size_t> decode_all(const Specs& specs, std::size_t cell) {
    std::vector<std::size_t> x(specs.size());
    for (std::size_t v = specs.size(); v-- > 0;) {
        x[v] = cell % specs[v].cardinality;
        cell /= specs[v].cardinality;
    }
    return x;
}

inline std::vector<std::size_t> key_of(const std::vector<std::size_t>& x, const Scope& scope) {
    std::vector<std::size_t> k;
    for (Var v : scope) k.push_back(x[v]);
    return k;
}

// H(A, B | C) from a joint, with marginals held in ordered maps keyed by the
// assignment tuples.
inline double cce(const bnorder::JointTable& p, const Scope& a, const Scope& b, const Scope& c) {
    using Key = std::vector<std::size_t>;
    std::map<Key, double> pabc, pac, pbc, pc;
    Scope ac = a, bc = b, abc = a;
    ac.insert(ac.end(), c.begin(), c.end());
    bc.insert(bc.end(), c.begin(), c.end());
    abc.insert(abc.end(), b.begin(), b.end());
    abc.insert(abc.end(), c.begin(), c.end());
    for (std::size_t cell = 0; cell < p.size(); ++cell) {
        const auto x = decode_all(p.specs(), cell);
        pabc[key_of(x, abc)] += p[cell];
        pac[key_of(x, ac)] += p[cell];
        pbc[key_of(x, bc)] += p[cell];
        pc[key_of(x, c)] += p[cell];
    }
    double sum = 0.0;
    for (const auto& [k, v] : pabc) {
        if (v <= 0.0) continue;
        std::vector<std::size_t> x(p.specs().size());
        std::size_t pos = 0;
        for (Var u : abc) x[u] = k[pos++];
        sum += v * std::log(v * pc[key_of(x, c)] / (pac[key_of(x, ac)] * pbc[key_of(x, bc)]));
    }
    return sum;
}

// Same quantity from data rows, counting with maps.
inline double data_cce(const bnorder::Dataset& d, Var i, const Scope& s, const Scope& c) {
    using Key = std::vector<std::size_t>;
    std::map<Key, double> nisc, nic, nsc, nc;
    Scope ic{i}, sc = s, isc{i};
    ic.insert(ic.end(), c.begin(), c.end());
    sc.insert(sc.end(), c.begin(), c.end());
    isc.insert(isc.end(), s.begin(), s.end());
    isc.insert(isc.end(), c.begin(), c.end());
    for (std::size_t r = 0; r < d.num_rows(); ++r) {
        std::vector<std::size_t> x(d.row(r).begin(), d.row(r).end());
        nisc[key_of(x, isc)] += 1;
        nic[key_of(x, ic)] += 1;
        nsc[key_of(x, sc)] += 1;
        nc[key_of(x, c)] += 1;
    }
    double sum = 0.0;
    for (const auto& [k, n] : nisc) {
        std::vector<std::size_t> x(d.num_vars());
        std::size_t pos = 0;
        for (Var u : isc) x[u] = k[pos++];
        sum += n * std::log(n * nc[key_of(x, c)] / (nic[key_of(x, ic)] * nsc[key_of(x, sc)]));
    }
    return sum / static_cast<double>(d.num_rows());
}

// Σ_rows log p̂(x_i | x_pa) with p̂ from map counts.
inline double family_loglik(const bnorder::Dataset& d, Var i, const Scope& pa) {
    using Key = std::vector<std::size_t>;
    std::map<Key, double> joint, parent;
    Scope fam = pa;
    fam.push_back(i);
    for (std::size_t r = 0; r < d.num_rows(); ++r) {
        std::vector<std::size_t> x(d.row(r).begin(), d.row(r).end());
        joint[key_of(x, fam)] += 1;
        parent[key_of(x, pa)] += 1;
    }
    double sum = 0.0;
    for (std::size_t r = 0; r < d.num_rows(); ++r) {
        std::vector<std::size_t> x(d.row(r).begin(), d.row(r).end());
        sum += std::log(joint[key_of(x, fam)] / parent[key_of(x, pa)]);
    }
    return sum;
}

// Sequential predictive (Pólya urn) product for one family with a uniform
// per-cell pseudo-count, processing rows in data order.
inline double polya_log_marginal(const bnorder::Dataset& d, Var i, const Scope& pa, double alpha) {
    using Key = std::vector<std::size_t>;
    std::map<Key, double> seen_joint, seen_parent;
    Scope fam = pa;
    fam.push_back(i);
    const double r_i = static_cast<double>(d.specs()[i].cardinality);
    double log_prob = 0.0;
    for (std::size_t r = 0; r < d.num_rows(); ++r) {
        std::vector<std::size_t> x(d.row(r).begin(), d.row(r).end());
        const Key kj = key_of(x, fam), kp = key_of(x, pa);
        log_prob += std::log((alpha + seen_joint[kj]) / (alpha * r_i + seen_parent[kp]));
        seen_joint[kj] += 1;
        seen_parent[kp] += 1;
    }
    return log_prob;
}

// χ²_k upper tail by composite Simpson quadrature. With x = u², the density
// becomes 2u·f(u²), which is smooth at 0 for every k ≥ 1.
inline double chi2_sf_quadrature(double x, int k) {
    if (x <= 0.0) return 1.0;
    const double half_k = 0.5 * k;
    const double log_norm = -half_k * std::log(2.0) - std::lgamma(half_k);
    auto g = [&](double u) {
        if (u == 0.0) return k == 1 ? 2.0 * std::exp(log_norm) : 0.0;
        const double t = u * u;
        return 2.0 * u * std::exp(log_norm + (half_k - 1.0) * std::log(t) - 0.5 * t);
    };
    const double upper = std::sqrt(x);
    const int n = 20000;
    const double h = upper / n;
    double s = g(0.0) + g(upper);
    for (int j = 1; j < n; ++j) s += g(j * h) * (j % 2 ? 4.0 : 2.0);
    return 1.0 - s * h / 3.0;
}

// ---- random instances -------------------------------------------------------

inline Specs random_specs(std::mt19937_64& rng, std::size_t n, std::size_t max_card) {
    std::uniform_int_distribution<std::size_t> card(2, max_card);
    Specs specs;
    for (std::size_t v = 0; v < n; ++v) specs.push_back({"v" + std::to_string(v), card(rng)});
    return specs;
}

inline bnorder::NodeOrdering random_ordering(std::mt19937_64& rng, std::size_t n) {
    std::vector<Var> order(n);
    for (Var v = 0; v < n; ++v) order[v] = v;
    std::shuffle(order.begin(), order.end(), rng);
    return bnorder::NodeOrdering(order);
}

inline bnorder::OrderedDag random_dag(std::mt19937_64& rng, const Specs& specs,
                                      const bnorder::NodeOrdering& ordering, double edge_prob = 0.5) {
    std::bernoulli_distribution coin(edge_prob);
    std::vector<Scope> parents(specs.size());
    for (Var v = 0; v < specs.size(); ++v)
        for (Var u : ordering.predecessors(v))
            if (coin(rng)) parents[v].push_back(u);
    return bnorder::validate_dag(specs, ordering, std::move(parents));
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k, double floor = 0.0) {
    std::gamma_distribution<double> gamma(1.0, 1.0);
    std::vector<double> w(k);
    double total = 0.0;
    for (double& x : w) {
        x = gamma(rng) + floor;
        total += x;
    }
    for (double& x : w) x /= total;
    return w;
}

// Strictly positive rows bounded away from 0 by `floor` (relative weight).
inline bnorder::BayesNet random_net(std::mt19937_64& rng, const Specs& specs, const bnorder::OrderedDag& dag,
                                    double floor = 0.0) {
    std::vector<bnorder::Cpt> cpts;
    for (Var v = 0; v < specs.size(); ++v) {
        const Scope& pa = dag.parents(v);
        std::size_t rows = 1;
        std::vector<std::size_t> cards;
        for (Var p : pa) {
            rows *= specs[p].cardinality;
            cards.push_back(specs[p].cardinality);
        }
        std::vector<double> table;
        for (std::size_t r = 0; r < rows; ++r) {
            const auto row = random_simplex(rng, specs[v].cardinality, floor);
            table.insert(table.end(), row.begin(), row.end());
        }
        cpts.emplace_back(v, specs[v].cardinality, pa, cards, std::move(table), std::vector<bool>(rows, true));
    }
    return bnorder::BayesNet(specs, dag, std::move(cpts));
}

inline bnorder::JointTable random_joint(std::mt19937_64& rng, const Specs& specs, double zero_prob = 0.0) {
    std::size_t cells = 1;
    for (const auto& s : specs) cells *= s.cardinality;
    std::gamma_distribution<double> gamma(1.0, 1.0);
    std::bernoulli_distribution zero(zero_prob);
    std::vector<double> w(cells);
    double total = 0.0;
    for (double& x : w) {
        x = zero(rng) ? 0.0 : gamma(rng);
        total += x;
    }
    if (total == 0.0) {
        w[0] = 1.0;
        total = 1.0;
    }
    for (double& x : w) x /= total;
    // fold the rounding residue into the largest cell
    long double s = 0.0L;
    for (double x : w) s += x;
    auto big = std::max_element(w.begin(), w.end());
    *big += static_cast<double>(1.0L - s);
    return bnorder::JointTable(specs, std::move(w));
}

inline bnorder::Dataset random_dataset(std::mt19937_64& rng, const Specs& specs, std::size_t rows) {
    std::vector<std::uint32_t> cells;
    for (std::size_t r = 0; r < rows; ++r)
        for (const auto& s : specs)
            cells.push_back(static_cast<std::uint32_t>(std::uniform_int_distribution<std::size_t>(0, s.cardinality - 1)(rng)));
    return bnorder::Dataset(specs, std::move(cells));
}

inline Scope random_subset(std::mt19937_64& rng, const Scope& pool) {
    std::bernoulli_distribution coin(0.5);
    Scope out;
    for (Var v : pool)
        if (coin(rng)) out.push_back(v);
    return out;
}

}  // namespace oracle
