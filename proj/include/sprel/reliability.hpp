#pragma once

#include <vector>

#include "sprel/spgraph.hpp"

namespace sprel {

/// Per-node state of the reduction pass. Vectors are indexed by node id,
/// entry 0 unused, so Y[i] is the value of node i in 1..2m-1.
struct EvalTrace {
    std::vector<double> Y;
    std::vector<double> Omega;
    std::vector<double> OmegaBar;
    double R = 0.0;
};

/// Linear-time reliability of the subgraph selected by `mask` (edges with
/// mask[e-1] == false get elementary reliability 0).
EvalTrace evaluate(const Instance& instance, const std::vector<bool>& mask);

/// Reliability with every edge present.
inline double reliability(const Instance& instance) {
    return evaluate(instance, std::vector<bool>(static_cast<std::size_t>(instance.m()), true)).R;
}

constexpr int kOracleReliabilityMaxEdges = 25;
constexpr int kOracleOptimizeMaxEdges = 20;

/// Brute-force all-terminal reliability: sums the probability of every edge
/// state vector whose up-edges connect all materialized vertices.
double oracle_reliability(const Instance& instance, const std::vector<bool>& mask);

struct OracleOptimum {
    std::vector<bool> mask;
    double reliability = 0.0;
};

/// Enumerates every mask satisfying the cardinality and side rows and keeps
/// the best; ties go to the lexicographically smallest bitstring.
/// Throws std::runtime_error when no mask is feasible.
OracleOptimum oracle_optimize(const Instance& instance);

/// True when mask satisfies sum X <= budget and every extra row.
bool mask_feasible(const Instance& instance, const std::vector<bool>& mask, double tol = 1e-9);

}  // namespace sprel
