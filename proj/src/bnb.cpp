#include "sprel/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <unordered_map>

#include <json.hpp>

namespace sprel {

const char* to_string(Termination t) {
    switch (t) {
        case Termination::Optimal: return "optimal";
        case Termination::Infeasible: return "infeasible";
        case Termination::TimeLimit: return "time_limit";
        case Termination::NodeLimit: return "node_limit";
    }
    return "?";
}

long SolveResult::total_cuts() const {
    long total = 0;
    for (const auto& [family, count] : cuts) {
        total += count;
    }
    return total;
}

DependencySets dependency_sets(const Instance& instance) {
    const auto& seq = instance.seq;
    DependencySets d;
    d.y = all_supports(seq);
    const auto n = static_cast<std::size_t>(2 * seq.m);
    d.omega.assign(n, {});
    d.omega_bar.assign(n, {});
    std::vector<int> chain;
    for (const auto& s : seq.steps) {
        const auto i = static_cast<std::size_t>(s.result_id);
        if (s.kind == CompositionKind::Series) {
            d.omega[i] = d.y[i];
            std::vector<int> merged;
            std::set_union(chain.begin(), chain.end(), d.y[i].begin(), d.y[i].end(), std::back_inserter(merged));
            chain = std::move(merged);
        }
        d.omega_bar[i] = chain;
    }
    return d;
}

namespace {

using Clock = std::chrono::steady_clock;

// Skips variables that have no column of their own, so one cut per column.
template <typename Emit>
void for_each_cut_variable(const Instance& instance, const VarMap& vars, const DependencySets& deps, bool omega,
                           Emit&& emit) {
    for (const auto& s : instance.seq.steps) {
        const int i = s.result_id;
        const auto si = static_cast<std::size_t>(i);
        emit(var_y(i), deps.y[si]);
        if (s.kind != CompositionKind::Series) {
            continue;
        }
        if (omega) {
            emit(var_omega(i), deps.omega[si]);
        }
        const Affine& ob = vars.at(var_omega_bar(i));
        if (ob.column != vars.at(var_omega(i)).column) {
            emit(var_omega_bar(i), deps.omega_bar[si]);
        }
    }
}

double trace_value(const VarRef& v, const EvalTrace& t) {
    const auto i = static_cast<std::size_t>(v.index);
    switch (v.kind) {
        case VarKind::Y: return t.Y[i];
        case VarKind::Omega: return t.Omega[i];
        case VarKind::OmegaBar: return t.OmegaBar[i];
        case VarKind::R: return t.R;
        case VarKind::X: break;
    }
    return 0.0;
}

LinearCut upper_cut(VarRef z, double value, const std::vector<int>& edges, const std::vector<bool>& mask,
                    CutFamily family) {
    LinearCut c;
    c.terms.emplace_back(z, 1.0);
    for (int e : edges) {
        if (!mask[static_cast<std::size_t>(e - 1)]) {
            c.terms.emplace_back(var_x(e), -1.0);
        }
    }
    c.rhs = value;
    c.family = family;
    return c;
}

// z >= value - sum_{on} (1 - X_e)  <=>  z - sum_{on} X_e >= value - |on|
LinearCut lower_cut(VarRef z, double value, const std::vector<int>& edges, const std::vector<bool>& mask,
                    CutFamily family) {
    LinearCut c;
    c.terms.emplace_back(z, 1.0);
    int on = 0;
    for (int e : edges) {
        if (mask[static_cast<std::size_t>(e - 1)]) {
            c.terms.emplace_back(var_x(e), -1.0);
            ++on;
        }
    }
    c.sense = RowSense::GreaterEqual;
    c.rhs = value - on;
    c.family = family;
    return c;
}

std::vector<int> all_edges(int m) {
    std::vector<int> e(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        e[static_cast<std::size_t>(i)] = i + 1;
    }
    return e;
}

}  // namespace

std::vector<LinearCut> benders_upper_cuts(const Instance& instance, const VarMap& vars, const DependencySets& deps,
                                          const std::vector<bool>& mask, const EvalTrace& trace, bool per_variable,
                                          bool omega) {
    std::vector<LinearCut> out;
    out.push_back(upper_cut(var_r(), trace.R, all_edges(instance.m()), mask, CutFamily::BendersUpper));
    if (per_variable) {
        for_each_cut_variable(instance, vars, deps, omega, [&](VarRef v, const std::vector<int>& edges) {
            out.push_back(upper_cut(v, trace_value(v, trace), edges, mask, CutFamily::PerVariable));
        });
    }
    return out;
}

std::vector<LinearCut> benders_lower_cuts(const Instance& instance, const VarMap& vars, const DependencySets& deps,
                                          const std::vector<bool>& mask, const EvalTrace& trace, bool per_variable,
                                          bool omega) {
    std::vector<LinearCut> out;
    out.push_back(lower_cut(var_r(), trace.R, all_edges(instance.m()), mask, CutFamily::BendersLower));
    if (per_variable) {
        for_each_cut_variable(instance, vars, deps, omega, [&](VarRef v, const std::vector<int>& edges) {
            out.push_back(lower_cut(v, trace_value(v, trace), edges, mask, CutFamily::PerVariable));
        });
    }
    return out;
}

std::vector<LinearCut> tangent_cuts(const Instance& instance, const VarMap& vars, const std::vector<double>& primal,
                                    const BoundSet& bounds, const BoundSet& global, double tol) {
    std::vector<LinearCut> out;
    for (const auto& s : instance.seq.steps) {
        if (s.kind != CompositionKind::Series) {
            continue;
        }
        const auto j = static_cast<std::size_t>(s.left_id);
        const auto k = static_cast<std::size_t>(s.right_id);
        const double ux = bounds.y_hi[j];
        const double uy = bounds.y_hi[k];
        const double xs = std::clamp(vars.value(var_y(s.left_id), primal), 0.0, ux);
        const double ys = std::clamp(vars.value(var_y(s.right_id), primal), 0.0, uy);
        if (xs == 0.0 && ys == 0.0) {
            continue;  // the default rows already force Y_i <= 0 here
        }
        const double target = vars.value(var_y(s.result_id), primal);
        if (target <= f3_envelope(xs, ys, ux, uy) + tol) {
            continue;
        }
        const Plane plane = f3_tangent_cut(xs, ys, ux, uy);
        if (!numerically_safe(plane)) {
            continue;
        }
        const bool local = ux != global.y_hi[j] || uy != global.y_hi[k];
        out.push_back(plane_cut(var_y(s.result_id), var_y(s.left_id), var_y(s.right_id), plane,
                                local ? CutScope::Local : CutScope::Global, CutFamily::Tangent));
    }
    return out;
}

int most_fractional(const std::vector<double>& x, const std::vector<Fix>& fixed, double tol) {
    int best = 0;
    double best_dist = 0.0;
    for (std::size_t e = 0; e < x.size(); ++e) {
        if (fixed[e] != Fix::Free) {
            continue;
        }
        const double frac = std::abs(x[e] - std::round(x[e]));
        if (frac <= tol) {
            continue;
        }
        const double dist = std::abs(x[e] - 0.5);
        // Distances within rounding of each other count as a tie.
        if (best == 0 || dist < best_dist - 1e-12) {
            best = static_cast<int>(e) + 1;
            best_dist = dist;
        }
    }
    return best;
}

std::string to_json(const SolveResult& r) {
    nlohmann::ordered_json j;
    j["termination"] = to_string(r.termination);
    j["incumbent"] = format_mask(r.incumbent);
    j["incumbent_reliability"] = r.incumbent_reliability;
    j["best_bound"] = r.best_bound;
    j["gap"] = r.gap;
    j["root_bound"] = r.root_bound;
    j["nodes"] = r.nodes;
    j["lp_iterations"] = r.lp_iterations;
    j["cuts"] = r.cuts;
    j["total_cuts"] = r.total_cuts();
    j["wall_seconds"] = r.wall_seconds;
    return j.dump(2);
}

// ---------------------------------------------------------------------------

namespace {

struct PoolCut {
    LinearCut cut;
    lp::Row row;
};

struct TreeNode {
    int id = 0;
    int depth = 0;
    std::vector<Fix> fixed;
    double bound = 1.0;
    std::vector<int> pool_rows;
    std::vector<LinearCut> local_cuts;
    lp::Basis basis;
    bool has_basis = false;
};

// Rows of a node LP beyond the static block.
struct ExtraRow {
    int pool = -1;
    int local = -1;  // index into the node's inheritable local cuts
};

struct QueueKey {
    double bound;
    int depth;
    int id;
};

struct QueueOrder {
    bool operator()(const QueueKey& a, const QueueKey& b) const {
        if (a.bound != b.bound) {
            return a.bound < b.bound;
        }
        if (a.depth != b.depth) {
            return a.depth < b.depth;
        }
        return a.id > b.id;
    }
};

class Tree {
public:
    Tree(const Instance& instance, const SolveOptions& options)
        : inst_(instance),
          opt_(options),
          global_(propagate_bounds(instance, std::vector<Fix>(static_cast<std::size_t>(instance.m()), Fix::Free))),
          base_(build_relaxation(instance, global_, options.relax)),
          deps_(dependency_sets(instance)),
          start_(Clock::now()) {}

    SolveResult run();

private:
    const VarMap& vars() const { return base_.vars; }
    bool improved() const { return opt_.relax.cut_mode == CutMode::ImprovedEnvelopeCuts; }
    double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

    void process(TreeNode node);
    void consider_incumbent(const std::vector<bool>& mask, const EvalTrace& trace);
    void round_heuristic(const std::vector<double>& x);
    std::vector<double> x_values(const std::vector<double>& primal) const;
    void report(const TreeNode& node, bool feasible, double value, int cuts, const char* outcome);
    void push(TreeNode node);

    const Instance& inst_;
    const SolveOptions& opt_;
    BoundSet global_;
    Relaxation base_;
    DependencySets deps_;
    Clock::time_point start_;

    std::vector<PoolCut> pool_;
    std::priority_queue<QueueKey, std::vector<QueueKey>, QueueOrder> queue_;
    std::unordered_map<int, TreeNode> open_;
    int next_id_ = 0;

    std::vector<bool> incumbent_;
    double incumbent_value_ = -std::numeric_limits<double>::infinity();
    std::vector<bool> last_rounding_;

    SolveResult result_;
};

std::vector<double> Tree::x_values(const std::vector<double>& primal) const {
    std::vector<double> x(static_cast<std::size_t>(inst_.m()));
    for (int e = 1; e <= inst_.m(); ++e) {
        x[static_cast<std::size_t>(e - 1)] = vars().value(var_x(e), primal);
    }
    return x;
}

void Tree::consider_incumbent(const std::vector<bool>& mask, const EvalTrace& trace) {
    if (trace.R <= incumbent_value_ || !mask_feasible(inst_, mask)) {
        return;
    }
    incumbent_ = mask;
    incumbent_value_ = trace.R;
    for (auto& c : benders_lower_cuts(inst_, vars(), deps_, mask, trace, true, opt_.relax.omega_benders)) {
        if (auto row = to_lp_row(c, vars())) {
            pool_.push_back({std::move(c), std::move(*row)});
        }
    }
}

// Greedy rounding: take edges by decreasing LP value while the mask stays
// feasible. Reliability never drops when an edge is added.
void Tree::round_heuristic(const std::vector<double>& x) {
    std::vector<int> order(x.size());
    for (std::size_t e = 0; e < x.size(); ++e) {
        order[e] = static_cast<int>(e);
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return x[static_cast<std::size_t>(a)] > x[static_cast<std::size_t>(b)];
    });
    std::vector<bool> mask(x.size(), false);
    for (int e : order) {
        mask[static_cast<std::size_t>(e)] = true;
        if (!mask_feasible(inst_, mask)) {
            mask[static_cast<std::size_t>(e)] = false;
        }
    }
    if (mask == last_rounding_) {
        return;
    }
    last_rounding_ = mask;
    consider_incumbent(mask, evaluate(inst_, mask));
}

void Tree::report(const TreeNode& node, bool feasible, double value, int cuts, const char* outcome) {
    if (opt_.log != nullptr) {
        *opt_.log << "node=" << node.id << " depth=" << node.depth << " bound=" << (feasible ? value : 0.0)
                  << " incumbent=" << std::max(incumbent_value_, 0.0) << " cuts=" << cuts << " outcome=" << outcome
                  << '\n';
    }
    if (opt_.on_node) {
        opt_.on_node(NodeReport{node.id, node.depth, node.fixed, feasible, value, incumbent_value_, cuts, outcome});
    }
}

void Tree::push(TreeNode node) {
    queue_.push({node.bound, node.depth, node.id});
    open_.emplace(node.id, std::move(node));
}

void Tree::process(TreeNode node) {
    const RelaxationConfig& cfg = opt_.relax;
    const BoundSet local = improved() ? propagate_bounds(inst_, node.fixed) : global_;
    lp::Problem prob = base_.lp;
    if (improved()) {
        apply_bounds(prob, vars(), local, node.fixed);
    } else {
        apply_fixings(prob, vars(), node.fixed);
    }
    const int base_rows = prob.num_rows();
    std::vector<ExtraRow> extras;
    std::vector<LinearCut> local_cuts;
    std::vector<char> in_lp(pool_.size(), 0);
    for (int id : node.pool_rows) {
        prob.rows.push_back(pool_[static_cast<std::size_t>(id)].row);
        extras.push_back({id, -1});
        in_lp[static_cast<std::size_t>(id)] = 1;
    }
    for (auto& c : node.local_cuts) {
        if (auto row = to_lp_row(c, vars())) {
            prob.rows.push_back(std::move(*row));
            extras.push_back({-1, static_cast<int>(local_cuts.size())});
            local_cuts.push_back(std::move(c));
        }
    }
    int cuts_added = 0;
    auto count = [&](const LinearCut& c) {
        ++result_.cuts[to_string(c.family)];
        ++cuts_added;
    };
    if (improved()) {
        for (auto& c : refresh_local_rows(inst_, vars(), node.fixed, local, global_, cfg, nullptr)) {
            if (auto row = to_lp_row(c, vars())) {
                prob.rows.push_back(std::move(*row));
                extras.push_back({-1, -1});
                count(c);
            }
        }
    }
    lp::Simplex simplex(prob, node.has_basis ? &node.basis : nullptr, opt_.lp);

    // Adds a row to the live LP; pooled rows become visible to other nodes.
    auto add_cut = [&](LinearCut c, std::optional<int> pool_id) {
        std::optional<lp::Row> row;
        if (pool_id) {
            row = pool_[static_cast<std::size_t>(*pool_id)].row;
        } else {
            row = to_lp_row(c, vars());
        }
        if (!row) {
            return;
        }
        count(pool_id ? pool_[static_cast<std::size_t>(*pool_id)].cut : c);
        simplex.add_rows(std::span<const lp::Row>(&*row, 1));
        prob.rows.push_back(*row);
        if (pool_id) {
            extras.push_back({*pool_id, -1});
            in_lp[static_cast<std::size_t>(*pool_id)] = 1;
        } else if (c.scope == CutScope::Global) {
            pool_.push_back({std::move(c), *row});
            in_lp.resize(pool_.size(), 0);
            in_lp.back() = 1;
            extras.push_back({static_cast<int>(pool_.size()) - 1, -1});
        } else {
            extras.push_back({-1, static_cast<int>(local_cuts.size())});
            local_cuts.push_back(std::move(c));
        }
    };

    lp::Solution sol;
    double value = node.bound;
    int rounds = 0;
    std::set<std::vector<bool>> benders_seen;
    bool force_branch = false;
    while (true) {
        sol = simplex.solve();
        result_.lp_iterations += sol.iterations;
        if (sol.status == lp::Status::Infeasible) {
            report(node, false, 0.0, cuts_added, "infeasible");
            return;
        }
        if (sol.status != lp::Status::Optimal) {
            force_branch = true;  // keep the parent bound and split
            break;
        }
        // Pruning uses the dual bound, which stays valid when the simplex
        // stops within its tolerances short of the true optimum.
        value = lp::lagrangian_bound(prob, sol.duals);
        if (node.id == 0 && benders_seen.empty()) {
            result_.root_bound = value;
        }
        const double bound = std::min(value, node.bound);
        if (bound <= incumbent_value_ + opt_.prune_tol) {
            report(node, true, value, cuts_added, "pruned");
            return;
        }
        const std::vector<double> x = x_values(sol.primal);
        if (most_fractional(x, node.fixed, opt_.integrality_tol) == 0) {
            std::vector<bool> mask(x.size());
            for (std::size_t e = 0; e < x.size(); ++e) {
                mask[e] = x[e] > 0.5;
            }
            const EvalTrace trace = evaluate(inst_, mask);
            consider_incumbent(mask, trace);
            const bool feasible = mask_feasible(inst_, mask);
            if (feasible && value <= trace.R + opt_.prune_tol) {
                report(node, true, value, cuts_added, "integral");
                return;
            }
            if (!feasible || !benders_seen.insert(mask).second) {
                force_branch = true;  // the LP keeps returning this point; split instead
                break;
            }
            for (auto& c : benders_upper_cuts(inst_, vars(), deps_, mask, trace, true, cfg.omega_benders)) {
                if (c.family == CutFamily::BendersUpper || violation(c, vars(), sol.primal) > opt_.prune_tol) {
                    add_cut(std::move(c), std::nullopt);
                }
            }
            continue;
        }
        round_heuristic(x);
        if (value <= incumbent_value_ + opt_.prune_tol) {
            report(node, true, value, cuts_added, "pruned");
            return;
        }
        if (rounds >= cfg.max_rounds) {
            break;
        }
        struct Candidate {
            double violation;
            int pool;
            LinearCut cut;
        };
        std::vector<Candidate> cand;
        in_lp.resize(pool_.size(), 0);  // the incumbent update may have grown the pool
        for (std::size_t id = 0; id < pool_.size(); ++id) {
            if (in_lp[id] != 0) {
                continue;
            }
            const double v = violation(pool_[id].cut, vars(), sol.primal);
            if (v > cfg.violation_tol) {
                cand.push_back({v, static_cast<int>(id), {}});
            }
        }
        if (cfg.cut_mode != CutMode::WithoutCuts) {
            for (auto& c : tangent_cuts(inst_, vars(), sol.primal, local, global_, cfg.violation_tol)) {
                const double v = violation(c, vars(), sol.primal);
                cand.push_back({v, -1, std::move(c)});
            }
        }
        if (improved()) {
            for (auto& c : fixed_edge_cuts(inst_, vars(), local, &sol.primal)) {
                const double v = violation(c, vars(), sol.primal);
                if (v > cfg.violation_tol) {
                    cand.push_back({v, -1, std::move(c)});
                }
            }
        }
        if (cand.empty()) {
            break;
        }
        std::stable_sort(cand.begin(), cand.end(),
                         [](const Candidate& a, const Candidate& b) { return a.violation > b.violation; });
        if (static_cast<int>(cand.size()) > cfg.max_cuts_per_node) {
            cand.resize(static_cast<std::size_t>(cfg.max_cuts_per_node));
        }
        for (auto& c : cand) {
            add_cut(std::move(c.cut), c.pool >= 0 ? std::optional<int>(c.pool) : std::nullopt);
        }
        ++rounds;
    }

    const double bound = std::min(value, node.bound);
    int branch_edge = 0;
    if (!force_branch) {
        branch_edge = most_fractional(x_values(sol.primal), node.fixed, opt_.integrality_tol);
    }
    if (branch_edge == 0) {
        for (std::size_t e = 0; e < node.fixed.size(); ++e) {
            if (node.fixed[e] == Fix::Free) {
                branch_edge = static_cast<int>(e) + 1;
                break;
            }
        }
    }
    if (branch_edge == 0) {
        // Every edge is fixed: the node holds a single point.
        std::vector<bool> mask(node.fixed.size());
        for (std::size_t e = 0; e < mask.size(); ++e) {
            mask[e] = node.fixed[e] == Fix::One;
        }
        consider_incumbent(mask, evaluate(inst_, mask));
        report(node, true, value, cuts_added, "leaf");
        return;
    }
    report(node, true, value, cuts_added, "branched");

    TreeNode child;
    child.depth = node.depth + 1;
    child.bound = bound;
    const lp::Basis& b = sol.basis;
    const bool basis_ok = b.columns.size() == static_cast<std::size_t>(prob.num_vars()) &&
                          b.rows.size() == static_cast<std::size_t>(base_rows) + extras.size();
    if (basis_ok) {
        child.has_basis = true;
        child.basis.columns = b.columns;
        child.basis.rows.assign(b.rows.begin(), b.rows.begin() + base_rows);
    }
    // Pooled rows first, then local ones, as process() lays them out.
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t r = 0; r < extras.size(); ++r) {
            const ExtraRow& ex = extras[r];
            const lp::VarStatus st = basis_ok ? b.rows[static_cast<std::size_t>(base_rows) + r] : lp::VarStatus::Basic;
            bool keep = false;
            if (pass == 0 && ex.pool >= 0) {
                keep = st != lp::VarStatus::Basic;  // inactive global rows stay in the pool only
                if (keep) {
                    child.pool_rows.push_back(ex.pool);
                }
            } else if (pass == 1 && ex.local >= 0) {
                keep = true;
                child.local_cuts.push_back(local_cuts[static_cast<std::size_t>(ex.local)]);
            }
            if (keep && basis_ok) {
                child.basis.rows.push_back(st);
            }
        }
    }
    for (Fix f : {Fix::Zero, Fix::One}) {
        TreeNode c = child;
        c.id = next_id_++;
        c.fixed = node.fixed;
        c.fixed[static_cast<std::size_t>(branch_edge - 1)] = f;
        push(std::move(c));
    }
}

SolveResult Tree::run() {
    const int m = inst_.m();
    const ConcreteGraph g = materialize(inst_.seq);
    round_heuristic(std::vector<double>(static_cast<std::size_t>(m), 1.0));
    auto finish = [&](Termination t, double bound) {
        result_.termination = t;
        result_.incumbent = incumbent_.empty() ? std::vector<bool>(static_cast<std::size_t>(m), false) : incumbent_;
        result_.incumbent_reliability = std::max(incumbent_value_, 0.0);
        result_.best_bound = std::max(bound, result_.incumbent_reliability);
        result_.gap = (result_.best_bound - result_.incumbent_reliability) /
                      std::max(result_.incumbent_reliability, 1e-12);
        result_.wall_seconds = elapsed();
        return result_;
    };
    if (inst_.budget() < g.n - 1) {
        // No feasible edge set spans the vertices.
        result_.root_bound = 0.0;
        return finish(Termination::Infeasible, 0.0);
    }

    TreeNode root;
    root.id = next_id_++;
    root.fixed.assign(static_cast<std::size_t>(m), Fix::Free);
    root.bound = 1.0;
    push(std::move(root));
    while (!queue_.empty()) {
        if (opt_.limits.time_seconds > 0.0 && elapsed() >= opt_.limits.time_seconds) {
            break;
        }
        if (opt_.limits.max_nodes > 0 && result_.nodes >= opt_.limits.max_nodes) {
            break;
        }
        const QueueKey key = queue_.top();
        queue_.pop();
        auto it = open_.find(key.id);
        TreeNode node = std::move(it->second);
        open_.erase(it);
        if (node.bound <= incumbent_value_ + opt_.prune_tol) {
            continue;
        }
        ++result_.nodes;
        process(std::move(node));
    }
    if (queue_.empty()) {
        return finish(incumbent_.empty() ? Termination::Infeasible : Termination::Optimal, incumbent_value_);
    }
    double bound = incumbent_value_;
    while (!queue_.empty()) {
        if (queue_.top().bound > incumbent_value_ + opt_.prune_tol) {
            bound = std::max(bound, queue_.top().bound);
        }
        queue_.pop();
    }
    const bool by_time = opt_.limits.time_seconds > 0.0 && elapsed() >= opt_.limits.time_seconds;
    SolveResult r = finish(by_time ? Termination::TimeLimit : Termination::NodeLimit, bound);
    if (r.gap <= opt_.gap_tol) {
        r.termination = Termination::Optimal;
    }
    return r;
}

}  // namespace

SolveResult solve(const Instance& instance, const SolveOptions& options) {
    const auto problems = validate(instance);
    if (!problems.empty()) {
        throw ValidationError("invalid instance: " + problems.front().rule);
    }
    Tree tree(instance, options);
    return tree.run();
}

}  // namespace sprel
