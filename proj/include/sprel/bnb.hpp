#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sprel/envelopes.hpp"
#include "sprel/lp.hpp"
#include "sprel/model.hpp"
#include "sprel/reliability.hpp"
#include "sprel/spgraph.hpp"

namespace sprel {

struct Limits {
    double time_seconds = 0.0;  // 0 = no limit
    long max_nodes = 0;         // 0 = no limit
};

enum class Termination : std::uint8_t { Optimal, Infeasible, TimeLimit, NodeLimit };

const char* to_string(Termination t);

struct SolveResult {
    std::vector<bool> incumbent;  // all false when nothing feasible was found
    double incumbent_reliability = 0.0;
    double best_bound = 0.0;
    double gap = 0.0;
    double root_bound = 0.0;
    long nodes = 0;
    long lp_iterations = 0;
    std::map<std::string, long> cuts;  // rows added to node LPs, by family
    double wall_seconds = 0.0;
    Termination termination = Termination::Optimal;

    bool solved() const { return termination == Termination::Optimal || termination == Termination::Infeasible; }
    long total_cuts() const;
};

/// What the tree saw at one node, after its last LP solve.
struct NodeReport {
    int id = 0;
    int depth = 0;
    std::vector<Fix> fixed;
    bool lp_feasible = true;
    double lp_value = 0.0;  // last LP objective (meaningless when infeasible)
    double incumbent = 0.0;
    int cuts_added = 0;
    std::string outcome;  // pruned | infeasible | integral | branched | leaf
};

struct SolveOptions {
    RelaxationConfig relax;
    Limits limits;
    lp::Options lp;
    double integrality_tol = 1e-6;
    double prune_tol = 1e-9;  // prune when bound <= incumbent + prune_tol
    double gap_tol = 1e-6;
    std::ostream* log = nullptr;  // key=value line per node
    std::function<void(const NodeReport&)> on_node;
};

SolveResult solve(const Instance& instance, const SolveOptions& options);

/// Edge sets each variable depends on, for the per-variable Benders cuts.
/// Indexed by node id; Omega and OmegaBar entries are empty where the
/// variable is constant.
struct DependencySets {
    std::vector<std::vector<int>> y;
    std::vector<std::vector<int>> omega;
    std::vector<std::vector<int>> omega_bar;
};

DependencySets dependency_sets(const Instance& instance);

/// R <= R(x) + sum_{x_e=0} X_e, plus the same form for every Y_i, Omega_i
/// and OmegaBar_i over its dependency set when `per_variable` is set.
std::vector<LinearCut> benders_upper_cuts(const Instance& instance, const VarMap& vars, const DependencySets& deps,
                                          const std::vector<bool>& mask, const EvalTrace& trace, bool per_variable,
                                          bool omega);

/// R >= R(x) - sum_{x_e=1} (1 - X_e), and the per-variable analogues.
std::vector<LinearCut> benders_lower_cuts(const Instance& instance, const VarMap& vars, const DependencySets& deps,
                                          const std::vector<bool>& mask, const EvalTrace& trace, bool per_variable,
                                          bool omega);

/// Tangent cuts of the series envelopes violated by more than `tol` at the
/// LP point. `bounds` supplies the U values; a cut is Local when its U
/// differs from `global`.
std::vector<LinearCut> tangent_cuts(const Instance& instance, const VarMap& vars, const std::vector<double>& primal,
                                    const BoundSet& bounds, const BoundSet& global, double tol);

/// Free edge whose value is closest to 0.5 among those farther than `tol`
/// from integral (ties: smallest id); 0 when X is integral.
int most_fractional(const std::vector<double>& x, const std::vector<Fix>& fixed, double tol);

std::string to_json(const SolveResult& result);

}  // namespace sprel
