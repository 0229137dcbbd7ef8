#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace sprel::lp {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense : std::uint8_t { LessEqual, Equal };

struct Row {
    std::vector<std::pair<int, double>> coeffs;  // (column, coefficient)
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
};

/// maximize c'x  s.t.  rows,  lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be +inf.
struct Problem {
    std::vector<double> objective;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<Row> rows;

    int num_vars() const { return static_cast<int>(objective.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }
    int add_var(double lo, double hi, double cost = 0.0);
};

enum class Status : std::uint8_t { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(Status s);

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper };

/// Simplex basis: one status per structural column and one per row slack.
/// A basis for fewer rows than the problem has is accepted; the missing rows
/// start with their slack basic.
struct Basis {
    std::vector<VarStatus> columns;
    std::vector<VarStatus> rows;
};

struct Solution {
    Status status = Status::IterationLimit;
    std::vector<double> primal;
    double objective = 0.0;
    std::vector<double> duals;  // one per row
    Basis basis;
    int iterations = 0;
};

struct Options {
    double feasibility_tol = 1e-7;
    double optimality_tol = 1e-7;
    double pivot_tol = 1e-10;
    int bland_after_degenerate = 1000;
    int max_iterations = 0;  // 0 picks a size-based default
    int refactor_interval = 100;
};

/// Dense-tableau bounded-variable simplex. Keeps its tableau between calls so
/// rows can be appended and the problem re-solved from the current basis.
class Simplex {
public:
    explicit Simplex(const Problem& problem, const Basis* warm = nullptr, Options options = {});

    Solution solve();

    /// Appends rows; their slacks enter the basis. Call solve() afterwards.
    void add_rows(std::span<const Row> rows);

    int num_rows() const { return m_; }
    int num_vars() const { return n_; }

private:
    double& tab(int r, int c) { return tab_[static_cast<std::size_t>(r) * stride_ + static_cast<std::size_t>(c)]; }
    double tab(int r, int c) const { return tab_[static_cast<std::size_t>(r) * stride_ + static_cast<std::size_t>(c)]; }
    bool fixed(int j) const { return up_[static_cast<std::size_t>(j)] - lo_[static_cast<std::size_t>(j)] <= 0.0; }
    double infeasibility(int r) const;
    bool proves_infeasible(const std::vector<double>& weights) const;

    void refactor();
    void compute_reduced_costs();
    void pivot(int r, int q);
    void maybe_refactor();
    void move_basics(int q, double delta);
    void note_step(double step);

    bool make_dual_feasible();
    Status dual_phase();
    Status primal_phase(bool phase_one);
    Solution extract(Status status) const;

    Options opt_;
    int n_ = 0;
    int m_ = 0;
    int ncols_ = 0;
    std::size_t stride_ = 0;
    std::vector<Row> rows_;
    std::vector<double> tab_;
    std::vector<double> cost_, lo_, up_, x_, d_;
    std::vector<int> head_;
    std::vector<int> nz_;  // scratch: nonzero columns of the pivot row
    std::vector<VarStatus> status_;
    int iterations_ = 0;
    int iteration_limit_ = 0;
    int degenerate_ = 0;
    int since_refactor_ = 0;
    bool bland_ = false;
};

Solution solve(const Problem& problem, const Basis* warm = nullptr, const Options& options = {});

/// Appends `cuts` to `problem` and re-solves from `previous.basis` (the new
/// slacks start basic, so this is a dual simplex warm start).
Solution add_rows_and_resolve(Problem& problem, const Solution& previous, std::span<const Row> cuts,
                              const Options& options = {});

/// max over rows of the constraint violation of x, recomputed from the data.
double max_row_violation(const Problem& problem, const std::vector<double>& x);
double max_bound_violation(const Problem& problem, const std::vector<double>& x);

/// Upper bound on the optimum implied by any row multipliers: b'y plus the
/// best bound-constrained value of (c - A'y)'x. Multipliers of <= rows are
/// clamped at 0, so the result is valid even for an inexact solve.
double lagrangian_bound(const Problem& problem, const std::vector<double>& duals);

}  // namespace sprel::lp
