#include "sprel/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sprel::lp {

int Problem::add_var(double lo, double hi, double cost) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    return num_vars() - 1;
}

const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::IterationLimit: return "iteration_limit";
    }
    return "unknown";
}

namespace {

constexpr double kDegenerateStep = 1e-12;
constexpr double kSingularPivot = 1e-9;

}  // namespace

Simplex::Simplex(const Problem& p, const Basis* warm, Options options)
    : opt_(options), n_(p.num_vars()), m_(p.num_rows()), rows_(p.rows) {
    if (static_cast<int>(p.lower.size()) != n_ || static_cast<int>(p.upper.size()) != n_) {
        throw std::invalid_argument("lp: bound vectors do not match the objective length");
    }
    ncols_ = n_ + m_;
    stride_ = static_cast<std::size_t>(ncols_);
    cost_.assign(static_cast<std::size_t>(ncols_), 0.0);
    lo_.assign(static_cast<std::size_t>(ncols_), 0.0);
    up_.assign(static_cast<std::size_t>(ncols_), kInf);
    for (int j = 0; j < n_; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (!std::isfinite(p.lower[sj]) || std::isnan(p.upper[sj]) || p.lower[sj] > p.upper[sj] ||
            !std::isfinite(p.objective[sj])) {
            throw std::invalid_argument("lp: bad bounds or cost on column " + std::to_string(j));
        }
        cost_[sj] = p.objective[sj];
        lo_[sj] = p.lower[sj];
        up_[sj] = p.upper[sj];
    }
    for (int i = 0; i < m_; ++i) {
        if (rows_[static_cast<std::size_t>(i)].sense == Sense::Equal) {
            up_[static_cast<std::size_t>(n_ + i)] = 0.0;
        }
    }
    status_.assign(static_cast<std::size_t>(ncols_), VarStatus::AtLower);
    const bool warm_ok = warm != nullptr && static_cast<int>(warm->columns.size()) == n_ &&
                         static_cast<int>(warm->rows.size()) <= m_;
    for (int j = 0; j < n_; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (warm_ok) {
            status_[sj] = warm->columns[sj];
        } else {
            // Start dual feasible where the bounds allow it.
            status_[sj] = (cost_[sj] > 0.0 && std::isfinite(up_[sj])) ? VarStatus::AtUpper : VarStatus::AtLower;
        }
    }
    for (int i = 0; i < m_; ++i) {
        const auto si = static_cast<std::size_t>(i);
        status_[static_cast<std::size_t>(n_ + i)] =
            (warm_ok && si < warm->rows.size()) ? warm->rows[si] : VarStatus::Basic;
    }
    x_.assign(static_cast<std::size_t>(ncols_), 0.0);
    head_.assign(static_cast<std::size_t>(m_), -1);
    iteration_limit_ = opt_.max_iterations > 0 ? opt_.max_iterations : 20000 + 50 * (m_ + ncols_);
    refactor();
}

double Simplex::infeasibility(int r) const {
    const auto h = static_cast<std::size_t>(head_[static_cast<std::size_t>(r)]);
    if (x_[h] < lo_[h] - opt_.feasibility_tol) {
        return lo_[h] - x_[h];
    }
    if (x_[h] > up_[h] + opt_.feasibility_tol) {
        return x_[h] - up_[h];
    }
    return 0.0;
}

// Rebuilds B^-1 [A I] from the original rows for the columns currently marked
// basic. Columns that turn out dependent are made nonbasic and the uncovered
// rows take their slack, so any status vector yields a valid basis.
// Combines the tableau rows with `weights` into y'(Ax + s) = y'b in the
// original data and checks that no point of the column boxes reaches y'b.
bool Simplex::proves_infeasible(const std::vector<double>& weights) const {
    std::vector<double> y(static_cast<std::size_t>(m_), 0.0);
    for (int i = 0; i < m_; ++i) {
        const double w = weights[static_cast<std::size_t>(i)];
        if (w == 0.0) {
            continue;
        }
        for (int k = 0; k < m_; ++k) {
            y[static_cast<std::size_t>(k)] += w * tab(i, n_ + k);
        }
    }
    std::vector<double> coef(static_cast<std::size_t>(ncols_), 0.0);
    double rhs = 0.0;
    double scale = 1.0;
    for (int k = 0; k < m_; ++k) {
        const double yk = y[static_cast<std::size_t>(k)];
        if (yk == 0.0) {
            continue;
        }
        const Row& row = rows_[static_cast<std::size_t>(k)];
        for (const auto& [c, v] : row.coeffs) {
            coef[static_cast<std::size_t>(c)] += yk * v;
        }
        coef[static_cast<std::size_t>(n_ + k)] = yk;
        rhs += yk * row.rhs;
        scale += std::abs(yk) * (1.0 + std::abs(row.rhs));
    }
    double lo = 0.0;
    double hi = 0.0;
    for (int j = 0; j < ncols_; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        const double c = coef[sj];
        if (c > 0.0) {
            lo += c * lo_[sj];
            hi += c * up_[sj];
        } else if (c < 0.0) {
            lo += c * up_[sj];
            hi += c * lo_[sj];
        }
    }
    const double tol = opt_.feasibility_tol * scale;
    return rhs > hi + tol || rhs < lo - tol;
}

void Simplex::refactor() {
    tab_.assign(static_cast<std::size_t>(m_) * stride_, 0.0);
    std::vector<double> rhs(static_cast<std::size_t>(m_), 0.0);
    for (int i = 0; i < m_; ++i) {
        const auto& row = rows_[static_cast<std::size_t>(i)];
        for (const auto& [c, v] : row.coeffs) {
            tab(i, c) += v;
        }
        tab(i, n_ + i) = 1.0;
        rhs[static_cast<std::size_t>(i)] = row.rhs;
    }
    // Basic slacks first: their columns are still unit vectors, so each
    // elimination touches a single row.
    std::vector<int> candidates;
    for (int j = n_; j < ncols_; ++j) {
        if (status_[static_cast<std::size_t>(j)] == VarStatus::Basic) {
            candidates.push_back(j);
        }
    }
    for (int j = 0; j < n_; ++j) {
        if (status_[static_cast<std::size_t>(j)] == VarStatus::Basic) {
            candidates.push_back(j);
        }
    }
    std::vector<bool> row_done(static_cast<std::size_t>(m_), false);
    std::fill(head_.begin(), head_.end(), -1);
    auto eliminate = [&](int r, int c) {
        const double inv = 1.0 / tab(r, c);
        double* pr = &tab_[static_cast<std::size_t>(r) * stride_];
        nz_.clear();
        for (int j = 0; j < ncols_; ++j) {
            if (pr[j] != 0.0) {
                pr[j] *= inv;
                nz_.push_back(j);
            }
        }
        rhs[static_cast<std::size_t>(r)] *= inv;
        for (int i = 0; i < m_; ++i) {
            if (i == r) {
                continue;
            }
            double* pi = &tab_[static_cast<std::size_t>(i) * stride_];
            const double f = pi[c];
            if (f == 0.0) {
                continue;
            }
            for (int j : nz_) {
                pi[j] -= f * pr[j];
            }
            pi[c] = 0.0;
            rhs[static_cast<std::size_t>(i)] -= f * rhs[static_cast<std::size_t>(r)];
        }
        row_done[static_cast<std::size_t>(r)] = true;
        head_[static_cast<std::size_t>(r)] = c;
    };
    for (int c : candidates) {
        int best = -1;
        double best_abs = kSingularPivot;
        for (int i = 0; i < m_; ++i) {
            if (!row_done[static_cast<std::size_t>(i)] && std::abs(tab(i, c)) > best_abs) {
                best_abs = std::abs(tab(i, c));
                best = i;
            }
        }
        if (best < 0) {
            status_[static_cast<std::size_t>(c)] = VarStatus::AtLower;
            continue;
        }
        eliminate(best, c);
    }
    for (int i = 0; i < m_; ++i) {
        if (!row_done[static_cast<std::size_t>(i)]) {
            status_[static_cast<std::size_t>(n_ + i)] = VarStatus::Basic;
            eliminate(i, n_ + i);
        }
    }
    for (int j = 0; j < ncols_; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (status_[sj] == VarStatus::AtUpper && !std::isfinite(up_[sj])) {
            status_[sj] = VarStatus::AtLower;
        }
        if (status_[sj] == VarStatus::AtLower) {
            x_[sj] = lo_[sj];
        } else if (status_[sj] == VarStatus::AtUpper) {
            x_[sj] = up_[sj];
        }
    }
    for (int i = 0; i < m_; ++i) {
        double v = rhs[static_cast<std::size_t>(i)];
        const double* pi = &tab_[static_cast<std::size_t>(i) * stride_];
        for (int j = 0; j < ncols_; ++j) {
            if (status_[static_cast<std::size_t>(j)] != VarStatus::Basic && pi[j] != 0.0) {
                v -= pi[j] * x_[static_cast<std::size_t>(j)];
            }
        }
        x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] = v;
    }
    compute_reduced_costs();
    since_refactor_ = 0;
}

void Simplex::compute_reduced_costs() {
    d_ = cost_;
    for (int i = 0; i < m_; ++i) {
        const double cb = cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])];
        if (cb == 0.0) {
            continue;
        }
        const double* pi = &tab_[static_cast<std::size_t>(i) * stride_];
        for (int j = 0; j < ncols_; ++j) {
            d_[static_cast<std::size_t>(j)] -= cb * pi[j];
        }
    }
    for (int i = 0; i < m_; ++i) {
        d_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] = 0.0;
    }
}

void Simplex::pivot(int r, int q) {
    double* pr = &tab_[static_cast<std::size_t>(r) * stride_];
    const double inv = 1.0 / pr[q];
    nz_.clear();
    for (int j = 0; j < ncols_; ++j) {
        if (pr[j] != 0.0) {
            pr[j] *= inv;
            nz_.push_back(j);
        }
    }
    pr[q] = 1.0;
    for (int i = 0; i < m_; ++i) {
        if (i == r) {
            continue;
        }
        double* pi = &tab_[static_cast<std::size_t>(i) * stride_];
        const double f = pi[q];
        if (f == 0.0) {
            continue;
        }
        for (int j : nz_) {
            pi[j] -= f * pr[j];
        }
        pi[q] = 0.0;
    }
    const double f = d_[static_cast<std::size_t>(q)];
    if (f != 0.0) {
        for (int j : nz_) {
            d_[static_cast<std::size_t>(j)] -= f * pr[j];
        }
    }
    d_[static_cast<std::size_t>(q)] = 0.0;
    head_[static_cast<std::size_t>(r)] = q;
    status_[static_cast<std::size_t>(q)] = VarStatus::Basic;
    ++iterations_;
    ++since_refactor_;
}

void Simplex::maybe_refactor() {
    if (since_refactor_ >= opt_.refactor_interval) {
        refactor();
    }
}

// Nonbasic column q changes by delta; basics follow along the tableau column.
void Simplex::move_basics(int q, double delta) {
    if (delta == 0.0) {
        return;
    }
    x_[static_cast<std::size_t>(q)] += delta;
    for (int i = 0; i < m_; ++i) {
        const double a = tab(i, q);
        if (a != 0.0) {
            x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(i)])] -= a * delta;
        }
    }
}

void Simplex::note_step(double step) {
    if (step <= kDegenerateStep && ++degenerate_ >= opt_.bland_after_degenerate) {
        bland_ = true;
    }
}

bool Simplex::make_dual_feasible() {
    for (int j = 0; j < ncols_; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (status_[sj] == VarStatus::Basic || fixed(j)) {
            continue;
        }
        if (status_[sj] == VarStatus::AtLower && d_[sj] > opt_.optimality_tol) {
            if (!std::isfinite(up_[sj])) {
                return false;
            }
            move_basics(j, up_[sj] - x_[sj]);
            x_[sj] = up_[sj];
            status_[sj] = VarStatus::AtUpper;
        } else if (status_[sj] == VarStatus::AtUpper && d_[sj] < -opt_.optimality_tol) {
            move_basics(j, lo_[sj] - x_[sj]);
            x_[sj] = lo_[sj];
            status_[sj] = VarStatus::AtLower;
        }
    }
    return true;
}

Status Simplex::dual_phase() {
    while (true) {
        if (iterations_ >= iteration_limit_) {
            return Status::IterationLimit;
        }
        int r = -1;
        double worst = 0.0;
        for (int i = 0; i < m_; ++i) {
            const double inf = infeasibility(i);
            if (inf <= 0.0) {
                continue;
            }
            if (bland_) {
                if (r < 0 || head_[static_cast<std::size_t>(i)] < head_[static_cast<std::size_t>(r)]) {
                    r = i;
                }
            } else if (inf > worst) {
                worst = inf;
                r = i;
            }
        }
        if (r < 0) {
            return Status::Optimal;
        }
        const int leaving = head_[static_cast<std::size_t>(r)];
        const auto sl = static_cast<std::size_t>(leaving);
        const bool raise = x_[sl] < lo_[sl];
        const double target = raise ? lo_[sl] : up_[sl];
        const double sign = raise ? 1.0 : -1.0;
        // Harris two-pass ratio test on |d_j / alpha_rj|.
        double bound = kInf;
        for (int j = 0; j < ncols_; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            if (status_[sj] == VarStatus::Basic || fixed(j)) {
                continue;
            }
            const double a = tab(r, j);
            if (std::abs(a) <= opt_.pivot_tol) {
                continue;
            }
            const bool at_lower = status_[sj] == VarStatus::AtLower;
            if (!(at_lower ? a * sign < 0.0 : a * sign > 0.0)) {
                continue;
            }
            const double dj = at_lower ? std::max(0.0, -d_[sj]) : std::max(0.0, d_[sj]);
            bound = std::min(bound, (dj + opt_.optimality_tol) / std::abs(a));
        }
        if (!std::isfinite(bound)) {
            // Only trust the proof on a freshly factored tableau; drift in
            // the updated rows can fake an empty ratio test.
            if (since_refactor_ > 0) {
                refactor();
                continue;
            }
            std::vector<double> w(static_cast<std::size_t>(m_), 0.0);
            w[static_cast<std::size_t>(r)] = 1.0;
            return proves_infeasible(w) ? Status::Infeasible : Status::IterationLimit;
        }
        int q = -1;
        double q_abs = 0.0;
        double q_ratio = 0.0;
        for (int j = 0; j < ncols_; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            if (status_[sj] == VarStatus::Basic || fixed(j)) {
                continue;
            }
            const double a = tab(r, j);
            if (std::abs(a) <= opt_.pivot_tol) {
                continue;
            }
            const bool at_lower = status_[sj] == VarStatus::AtLower;
            if (!(at_lower ? a * sign < 0.0 : a * sign > 0.0)) {
                continue;
            }
            const double dj = at_lower ? std::max(0.0, -d_[sj]) : std::max(0.0, d_[sj]);
            const double ratio = dj / std::abs(a);
            if (ratio > bound) {
                continue;
            }
            if (bland_ ? (q < 0 || ratio < q_ratio) : std::abs(a) > q_abs) {
                q = j;
                q_abs = std::abs(a);
                q_ratio = ratio;
            }
        }
        const double theta = (x_[sl] - target) / tab(r, q);
        move_basics(q, theta);
        note_step(q_ratio);
        pivot(r, q);
        x_[sl] = target;
        status_[sl] = raise ? VarStatus::AtLower : VarStatus::AtUpper;
        maybe_refactor();
    }
}

Status Simplex::primal_phase(bool phase_one) {
    std::vector<double> price(static_cast<std::size_t>(ncols_));
    std::vector<double> g(static_cast<std::size_t>(m_));
    while (true) {
        if (iterations_ >= iteration_limit_) {
            return Status::IterationLimit;
        }
        const std::vector<double>* dj = &d_;
        if (phase_one) {
            bool any = false;
            for (int i = 0; i < m_; ++i) {
                const auto h = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
                double gi = 0.0;
                if (x_[h] < lo_[h] - opt_.feasibility_tol) {
                    gi = 1.0;
                } else if (x_[h] > up_[h] + opt_.feasibility_tol) {
                    gi = -1.0;
                }
                g[static_cast<std::size_t>(i)] = gi;
                any = any || gi != 0.0;
            }
            if (!any) {
                return Status::Optimal;
            }
            std::fill(price.begin(), price.end(), 0.0);
            for (int i = 0; i < m_; ++i) {
                const double gi = g[static_cast<std::size_t>(i)];
                if (gi == 0.0) {
                    continue;
                }
                const double* pi = &tab_[static_cast<std::size_t>(i) * stride_];
                for (int j = 0; j < ncols_; ++j) {
                    price[static_cast<std::size_t>(j)] -= gi * pi[j];
                }
            }
            dj = &price;
        }
        int q = -1;
        double best = 0.0;
        for (int j = 0; j < ncols_; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            if (status_[sj] == VarStatus::Basic || fixed(j)) {
                continue;
            }
            const double v = (*dj)[sj];
            const double score = status_[sj] == VarStatus::AtLower ? v : -v;
            if (score <= opt_.optimality_tol) {
                continue;
            }
            if (bland_) {
                q = j;
                break;
            }
            if (score > best) {
                best = score;
                q = j;
            }
        }
        if (q < 0) {
            if (!phase_one) {
                return Status::Optimal;
            }
            if (since_refactor_ > 0) {
                refactor();
                continue;
            }
            return proves_infeasible(g) ? Status::Infeasible : Status::IterationLimit;
        }
        const auto sq = static_cast<std::size_t>(q);
        const double dir = status_[sq] == VarStatus::AtLower ? 1.0 : -1.0;
        // Row limit for basic i when the entering column moves by t >= 0.
        auto limit = [&](int i, double slack) {
            const double a = tab(i, q) * dir;
            if (std::abs(a) <= opt_.pivot_tol) {
                return kInf;
            }
            const auto h = static_cast<std::size_t>(head_[static_cast<std::size_t>(i)]);
            const double v = x_[h];
            const bool below = v < lo_[h] - opt_.feasibility_tol;
            const bool above = v > up_[h] + opt_.feasibility_tol;
            if (a > 0.0) {  // basic decreases
                if (below) {
                    return kInf;
                }
                if (above) {
                    return (v - up_[h]) / a;
                }
                return (v - lo_[h] + slack) / a;
            }
            if (above) {
                return kInf;
            }
            if (below) {
                return (lo_[h] - v) / -a;
            }
            return std::isfinite(up_[h]) ? (up_[h] - v + slack) / -a : kInf;
        };
        double bound = kInf;
        for (int i = 0; i < m_; ++i) {
            bound = std::min(bound, limit(i, opt_.feasibility_tol));
        }
        int r = -1;
        double r_abs = 0.0;
        double step = kInf;
        for (int i = 0; i < m_; ++i) {
            const double t = limit(i, 0.0);
            if (!(t <= bound)) {
                continue;
            }
            const double a = std::abs(tab(i, q));
            const bool take = bland_ ? (r < 0 || t < step ||
                                        (t == step && head_[static_cast<std::size_t>(i)] <
                                                          head_[static_cast<std::size_t>(r)]))
                                     : a > r_abs;
            if (take) {
                r = i;
                r_abs = a;
                step = t;
            }
        }
        step = std::max(step, 0.0);
        const double range = up_[sq] - lo_[sq];
        if (r < 0 || range <= step) {
            if (!std::isfinite(range)) {
                return phase_one ? Status::IterationLimit : Status::Unbounded;
            }
            // Bound flip of the entering column, no basis change.
            move_basics(q, dir * range);
            x_[sq] = dir > 0 ? up_[sq] : lo_[sq];
            status_[sq] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
            ++iterations_;
            continue;
        }
        const int leaving = head_[static_cast<std::size_t>(r)];
        const auto sl = static_cast<std::size_t>(leaving);
        const double a = tab(r, q) * dir;
        const bool was_below = x_[sl] < lo_[sl] - opt_.feasibility_tol;
        const bool was_above = x_[sl] > up_[sl] + opt_.feasibility_tol;
        move_basics(q, dir * step);
        const bool to_lower = a > 0.0 ? !was_above : was_below;
        note_step(step);
        pivot(r, q);
        x_[sl] = to_lower ? lo_[sl] : up_[sl];
        status_[sl] = to_lower ? VarStatus::AtLower : VarStatus::AtUpper;
        maybe_refactor();
    }
}

Solution Simplex::solve() {
    Status st = Status::IterationLimit;
    for (int attempt = 0; attempt < 4; ++attempt) {
        if (make_dual_feasible()) {
            st = dual_phase();
        } else {
            st = primal_phase(true);
        }
        if (st == Status::Optimal) {
            st = primal_phase(false);
        }
        if (st != Status::Optimal) {
            break;
        }
        // Recompute from the original data and confirm the point.
        refactor();
        bool clean = true;
        for (int i = 0; i < m_ && clean; ++i) {
            clean = infeasibility(i) == 0.0;
        }
        for (int j = 0; j < ncols_ && clean; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            if (status_[sj] == VarStatus::AtLower && !fixed(j)) {
                clean = d_[sj] <= opt_.optimality_tol;
            } else if (status_[sj] == VarStatus::AtUpper && !fixed(j)) {
                clean = d_[sj] >= -opt_.optimality_tol;
            }
        }
        if (clean) {
            return extract(Status::Optimal);
        }
        st = Status::IterationLimit;
    }
    return extract(st);
}

Solution Simplex::extract(Status status) const {
    Solution s;
    s.status = status;
    s.iterations = iterations_;
    s.primal.assign(x_.begin(), x_.begin() + n_);
    if (status == Status::Optimal) {
        // Basics may sit within the feasibility tolerance outside a bound.
        for (int j = 0; j < n_; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            s.primal[sj] = std::clamp(s.primal[sj], lo_[sj], up_[sj]);
        }
    }
    for (int j = 0; j < n_; ++j) {
        s.objective += cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
    }
    s.duals.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
        s.duals[static_cast<std::size_t>(i)] = -d_[static_cast<std::size_t>(n_ + i)];
    }
    s.basis.columns.assign(status_.begin(), status_.begin() + n_);
    s.basis.rows.assign(status_.begin() + n_, status_.end());
    return s;
}

void Simplex::add_rows(std::span<const Row> rows) {
    if (rows.empty()) {
        return;
    }
    const int k = static_cast<int>(rows.size());
    const int new_m = m_ + k;
    const int new_cols = ncols_ + k;
    const auto new_stride = static_cast<std::size_t>(new_cols);
    std::vector<double> grown(static_cast<std::size_t>(new_m) * new_stride, 0.0);
    for (int i = 0; i < m_; ++i) {
        const auto row = static_cast<std::size_t>(i);
        std::copy_n(&tab_[row * stride_], ncols_, &grown[row * new_stride]);
    }
    tab_ = std::move(grown);
    stride_ = new_stride;
    for (int t = 0; t < k; ++t) {
        const Row& row = rows[static_cast<std::size_t>(t)];
        const int r = m_ + t;
        const int slack = ncols_ + t;
        double* w = &tab_[static_cast<std::size_t>(r) * stride_];
        double activity = 0.0;
        for (const auto& [c, v] : row.coeffs) {
            if (c < 0 || c >= n_) {
                throw std::out_of_range("lp: row references column " + std::to_string(c));
            }
            w[c] += v;
            activity += v * x_[static_cast<std::size_t>(c)];
        }
        w[slack] = 1.0;
        // Express the row in the current nonbasic columns.
        for (int i = 0; i < m_; ++i) {
            const int h = head_[static_cast<std::size_t>(i)];
            const double f = w[h];
            if (f == 0.0) {
                continue;
            }
            const double* pi = &tab_[static_cast<std::size_t>(i) * stride_];
            for (int j = 0; j < ncols_; ++j) {
                w[j] -= f * pi[j];
            }
            w[h] = 0.0;
        }
        rows_.push_back(row);
        cost_.push_back(0.0);
        lo_.push_back(0.0);
        up_.push_back(row.sense == Sense::Equal ? 0.0 : kInf);
        x_.push_back(row.rhs - activity);
        d_.push_back(0.0);
        status_.push_back(VarStatus::Basic);
        head_.push_back(slack);
    }
    m_ = new_m;
    ncols_ = new_cols;
    ++since_refactor_;  // the new rows carry the current tableau's rounding
}

Solution solve(const Problem& problem, const Basis* warm, const Options& options) {
    Simplex s(problem, warm, options);
    return s.solve();
}

Solution add_rows_and_resolve(Problem& problem, const Solution& previous, std::span<const Row> cuts,
                              const Options& options) {
    problem.rows.insert(problem.rows.end(), cuts.begin(), cuts.end());
    return solve(problem, &previous.basis, options);
}

double max_row_violation(const Problem& problem, const std::vector<double>& x) {
    double worst = 0.0;
    for (const auto& row : problem.rows) {
        double lhs = 0.0;
        for (const auto& [c, v] : row.coeffs) {
            lhs += v * x[static_cast<std::size_t>(c)];
        }
        const double viol = row.sense == Sense::Equal ? std::abs(lhs - row.rhs) : lhs - row.rhs;
        worst = std::max(worst, viol);
    }
    return worst;
}

double max_bound_violation(const Problem& problem, const std::vector<double>& x) {
    double worst = 0.0;
    for (int j = 0; j < problem.num_vars(); ++j) {
        const auto sj = static_cast<std::size_t>(j);
        worst = std::max({worst, problem.lower[sj] - x[sj], x[sj] - problem.upper[sj]});
    }
    return worst;
}

double lagrangian_bound(const Problem& problem, const std::vector<double>& duals) {
    std::vector<double> reduced = problem.objective;
    double bound = 0.0;
    for (int i = 0; i < problem.num_rows(); ++i) {
        const Row& row = problem.rows[static_cast<std::size_t>(i)];
        double y = duals[static_cast<std::size_t>(i)];
        if (row.sense == Sense::LessEqual) {
            y = std::max(y, 0.0);
        }
        if (y == 0.0) {
            continue;
        }
        bound += y * row.rhs;
        for (const auto& [c, v] : row.coeffs) {
            reduced[static_cast<std::size_t>(c)] -= y * v;
        }
    }
    for (int j = 0; j < problem.num_vars(); ++j) {
        const auto sj = static_cast<std::size_t>(j);
        const double d = reduced[sj];
        if (d > 0.0) {
            if (!std::isfinite(problem.upper[sj])) {
                return kInf;
            }
            bound += d * problem.upper[sj];
        } else {
            bound += d * problem.lower[sj];
        }
    }
    return bound;
}

}  // namespace sprel::lp
