#pragma once

#include <vector>

#include "sprel/spgraph.hpp"

namespace sprel::testing {

inline Instance make_instance(const std::vector<double>& p, const std::vector<Composition>& steps,
                              double alpha = 1.0) {
    Instance inst;
    for (std::size_t i = 0; i < p.size(); ++i) {
        inst.edges.push_back({static_cast<int>(i) + 1, p[i]});
    }
    inst.seq.m = static_cast<int>(p.size());
    inst.seq.steps = steps;
    inst.alpha = alpha;
    return inst;
}

inline Instance series_pair(double a, double b) {
    return make_instance({a, b}, {{3, CompositionKind::Series, 1, 2}});
}

inline Instance parallel_pair(double a, double b) {
    return make_instance({a, b}, {{3, CompositionKind::Parallel, 1, 2}});
}

// Edges 1 and 2 in series, closed by edge 3 in parallel: a 3-cycle.
inline Instance triangle(double a, double b, double c, double alpha = 1.0) {
    return make_instance({a, b, c}, {{4, CompositionKind::Series, 1, 2}, {5, CompositionKind::Parallel, 4, 3}},
                         alpha);
}

inline std::vector<bool> ones(int m) { return std::vector<bool>(static_cast<std::size_t>(m), true); }

inline std::vector<bool> mask_of(unsigned bits, int m) {
    std::vector<bool> mask(static_cast<std::size_t>(m));
    for (int e = 0; e < m; ++e) {
        mask[static_cast<std::size_t>(e)] = ((bits >> e) & 1U) != 0;
    }
    return mask;
}

}  // namespace sprel::testing
