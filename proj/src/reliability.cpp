#include "sprel/reliability.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace sprel {

EvalTrace evaluate(const Instance& instance, const std::vector<bool>& mask) {
    const int m = instance.m();
    if (static_cast<int>(mask.size()) != m) {
        throw std::invalid_argument("evaluate: mask has length " + std::to_string(mask.size()) + ", expected " +
                                    std::to_string(m));
    }
    const auto nodes = static_cast<std::size_t>(2 * m);
    EvalTrace t;
    t.Y.assign(nodes, 0.0);
    t.Omega.assign(nodes, 1.0);
    t.OmegaBar.assign(nodes, 1.0);
    for (int e = 1; e <= m; ++e) {
        t.Y[static_cast<std::size_t>(e)] = mask[static_cast<std::size_t>(e - 1)] ? instance.p(e) : 0.0;
    }
    for (const auto& s : instance.seq.steps) {
        const double yj = t.Y[static_cast<std::size_t>(s.left_id)];
        const double yk = t.Y[static_cast<std::size_t>(s.right_id)];
        const double either = 1.0 - (1.0 - yj) * (1.0 - yk);
        const auto i = static_cast<std::size_t>(s.result_id);
        if (s.kind == CompositionKind::Parallel) {
            t.Y[i] = either;
            t.Omega[i] = 1.0;
        } else {
            // yj*yk/either rewritten as 1/(1/yj + 1/yk - 1): every rounded
            // operation is then monotone, so the computed value never drops
            // when an operand grows. Any zero operand gives 0.
            t.Y[i] = (yj == 0.0 || yk == 0.0) ? 0.0 : 1.0 / (1.0 / yj + 1.0 / yk - 1.0);
            t.Omega[i] = either;
        }
        t.OmegaBar[i] = t.OmegaBar[i - 1] * t.Omega[i];
    }
    const auto root = static_cast<std::size_t>(2 * m - 1);
    t.R = t.Y[root] * t.OmegaBar[root];
    return t;
}

namespace {

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

double oracle_reliability(const Instance& instance, const std::vector<bool>& mask) {
    const int m = instance.m();
    if (m > kOracleReliabilityMaxEdges) {
        throw std::runtime_error("oracle_reliability: refusing m=" + std::to_string(m) + " (limit " +
                                 std::to_string(kOracleReliabilityMaxEdges) + " edges)");
    }
    if (static_cast<int>(mask.size()) != m) {
        throw std::invalid_argument("oracle_reliability: mask length mismatch");
    }
    const ConcreteGraph g = materialize(instance.seq);
    // Edges with effective probability 0 or 1 have a single live state; only
    // the uncertain ones are enumerated.
    std::vector<ConcreteEdge> always_up;
    std::vector<ConcreteEdge> uncertain;
    std::vector<double> up_prob;
    for (const auto& ce : g.edges) {
        const double q = mask[static_cast<std::size_t>(ce.edge_id - 1)] ? instance.p(ce.edge_id) : 0.0;
        if (q >= 1.0) {
            always_up.push_back(ce);
        } else if (q > 0.0) {
            uncertain.push_back(ce);
            up_prob.push_back(q);
        }
    }
    const auto k = uncertain.size();
    std::vector<int> parent(static_cast<std::size_t>(g.n));
    auto find = [&](int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            auto& up = parent[static_cast<std::size_t>(a)];
            up = parent[static_cast<std::size_t>(up)];  // path halving
            a = up;
        }
        return a;
    };
    KahanSum total;
    for (std::uint64_t state = 0; state < (std::uint64_t{1} << k); ++state) {
        double prob = 1.0;
        for (std::size_t b = 0; b < k; ++b) {
            prob *= (state >> b) & 1U ? up_prob[b] : 1.0 - up_prob[b];
        }
        std::iota(parent.begin(), parent.end(), 0);
        int components = g.n;
        auto join = [&](const ConcreteEdge& ce) {
            const int a = find(ce.u);
            const int b = find(ce.v);
            if (a != b) {
                parent[static_cast<std::size_t>(a)] = b;
                --components;
            }
        };
        for (const auto& ce : always_up) {
            join(ce);
        }
        for (std::size_t b = 0; b < k; ++b) {
            if ((state >> b) & 1U) {
                join(uncertain[b]);
            }
        }
        if (components == 1) {
            total.add(prob);
        }
    }
    return total.sum;
}

bool mask_feasible(const Instance& instance, const std::vector<bool>& mask, double tol) {
    int selected = 0;
    for (bool b : mask) {
        selected += b ? 1 : 0;
    }
    if (selected > instance.budget()) {
        return false;
    }
    for (const auto& row : instance.extra_rows) {
        double lhs = 0.0;
        for (const auto& [edge, coef] : row.terms) {
            lhs += mask[static_cast<std::size_t>(edge - 1)] ? coef : 0.0;
        }
        if (lhs > row.rhs + tol) {
            return false;
        }
    }
    return true;
}

OracleOptimum oracle_optimize(const Instance& instance) {
    const int m = instance.m();
    if (m > kOracleOptimizeMaxEdges) {
        throw std::runtime_error("oracle_optimize: refusing m=" + std::to_string(m) + " (limit " +
                                 std::to_string(kOracleOptimizeMaxEdges) + " edges)");
    }
    OracleOptimum best;
    bool found = false;
    std::vector<bool> mask(static_cast<std::size_t>(m));
    // Edge 1 is the most significant bit, so counting order is bitstring order.
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << m); ++v) {
        for (int e = 1; e <= m; ++e) {
            mask[static_cast<std::size_t>(e - 1)] = (v >> (m - e)) & 1U;
        }
        if (!mask_feasible(instance, mask)) {
            continue;
        }
        const double r = evaluate(instance, mask).R;
        if (!found || r > best.reliability) {
            best = {mask, r};
            found = true;
        }
    }
    if (!found) {
        throw std::runtime_error("oracle_optimize: no mask satisfies the side constraints");
    }
    return best;
}

}  // namespace sprel
