#include "sprel/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace sprel {

std::string to_string(const VarRef& v) {
    switch (v.kind) {
        case VarKind::X: return "X_" + std::to_string(v.index);
        case VarKind::Y: return "Y_" + std::to_string(v.index);
        case VarKind::Omega: return "Om_" + std::to_string(v.index);
        case VarKind::OmegaBar: return "Ob_" + std::to_string(v.index);
        case VarKind::R: return "R";
    }
    return "?";
}

const char* to_string(CutFamily f) {
    switch (f) {
        case CutFamily::Structure: return "structure";
        case CutFamily::SideConstraint: return "side";
        case CutFamily::Tangent: return "tangent";
        case CutFamily::FixedEdge: return "fixed_edge";
        case CutFamily::Corner: return "corner";
        case CutFamily::LocalEquality: return "local_equality";
        case CutFamily::LocalMcCormick: return "local_mccormick";
        case CutFamily::BendersUpper: return "benders_upper";
        case CutFamily::BendersLower: return "benders_lower";
        case CutFamily::PerVariable: return "per_variable";
    }
    return "?";
}

const char* to_string(CutMode mode) {
    switch (mode) {
        case CutMode::WithoutCuts: return "none";
        case CutMode::EnvelopeCuts: return "envelope";
        case CutMode::ImprovedEnvelopeCuts: return "improved";
    }
    return "?";
}

std::optional<CutMode> parse_cut_mode(const std::string& text) {
    if (text == "none") {
        return CutMode::WithoutCuts;
    }
    if (text == "envelope") {
        return CutMode::EnvelopeCuts;
    }
    if (text == "improved") {
        return CutMode::ImprovedEnvelopeCuts;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

VarMap::VarMap(const Instance& instance) : m_(instance.m()) {
    const auto nodes = static_cast<std::size_t>(2 * m_);
    x_.resize(static_cast<std::size_t>(m_) + 1);
    y_.resize(nodes);
    omega_.resize(nodes);
    omega_bar_.resize(nodes);
    auto fresh = [&](VarRef owner) {
        owners_.push_back(owner);
        return Affine{num_columns() - 1, 1.0, 0.0};
    };
    for (int e = 1; e <= m_; ++e) {
        const auto se = static_cast<std::size_t>(e);
        x_[se] = fresh(var_x(e));
        const double p = instance.p(e);
        y_[se] = p == 0.0 ? Affine{-1, 0.0, 0.0} : Affine{x_[se].column, p, 0.0};
        omega_[se] = {-1, 0.0, 1.0};
        omega_bar_[se] = {-1, 0.0, 1.0};
    }
    for (const auto& s : instance.seq.steps) {
        const auto i = static_cast<std::size_t>(s.result_id);
        y_[i] = fresh(var_y(s.result_id));
        if (s.kind == CompositionKind::Parallel) {
            omega_[i] = {-1, 0.0, 1.0};
            omega_bar_[i] = omega_bar_[i - 1];
        } else {
            omega_[i] = fresh(var_omega(s.result_id));
            const Affine& prev = omega_bar_[i - 1];
            omega_bar_[i] = prev.constant() ? Affine{omega_[i].column, prev.offset, 0.0}
                                            : fresh(var_omega_bar(s.result_id));
        }
    }
    r_ = fresh(var_r());
}

const Affine& VarMap::at(const VarRef& v) const {
    const auto i = static_cast<std::size_t>(v.index);
    switch (v.kind) {
        case VarKind::X:
            if (v.index < 1 || v.index > m_) {
                break;
            }
            return x_[i];
        case VarKind::Y:
            if (v.index < 1 || v.index > 2 * m_ - 1) {
                break;
            }
            return y_[i];
        case VarKind::Omega:
            if (v.index < 1 || v.index > 2 * m_ - 1) {
                break;
            }
            return omega_[i];
        case VarKind::OmegaBar:
            if (v.index < 1 || v.index > 2 * m_ - 1) {
                break;
            }
            return omega_bar_[i];
        case VarKind::R: return r_;
    }
    throw std::out_of_range("VarMap: no variable " + to_string(v));
}

double VarMap::value(const VarRef& v, const std::vector<double>& primal) const {
    const Affine& a = at(v);
    return a.constant() ? a.offset : a.scale * primal[static_cast<std::size_t>(a.column)] + a.offset;
}

// ---------------------------------------------------------------------------

LinearCut plane_cut(VarRef z, VarRef x, VarRef y, const Plane& plane, CutScope scope, CutFamily family) {
    LinearCut c;
    c.terms = {{z, 1.0}, {x, -plane.cx}, {y, -plane.cy}};
    c.rhs = plane.c0;
    c.scope = scope;
    c.family = family;
    return c;
}

namespace {

constexpr double kDropCoefficient = 1e-13;
constexpr double kConstantRowTol = 1e-9;

LinearCut line_cut(VarRef z, VarRef y, const Line& line, CutScope scope, CutFamily family) {
    LinearCut c;
    c.terms = {{z, 1.0}, {y, -line.slope}};
    c.rhs = line.c0;
    c.scope = scope;
    c.family = family;
    return c;
}

// z = c + (1-c) * y, i.e. f2(c, y) with c pinned.
LinearCut pinned_f2_row(VarRef z, VarRef y, double c, CutFamily family) {
    LinearCut row;
    row.terms = {{z, 1.0}, {y, -(1.0 - c)}};
    row.sense = RowSense::Equal;
    row.rhs = c;
    row.scope = CutScope::Local;
    row.family = family;
    return row;
}

double lhs_of(const LinearCut& cut, const auto& value_of) {
    double lhs = 0.0;
    for (const auto& [v, coef] : cut.terms) {
        lhs += coef * value_of(v);
    }
    return lhs;
}

double violation_of(const LinearCut& cut, double lhs) {
    switch (cut.sense) {
        case RowSense::LessEqual: return lhs - cut.rhs;
        case RowSense::GreaterEqual: return cut.rhs - lhs;
        case RowSense::Equal: return std::abs(lhs - cut.rhs);
    }
    return 0.0;
}

void check_bounds(const BoundSet& b) {
    for (std::size_t i = 1; i < b.y_lo.size(); ++i) {
        if (b.y_lo[i] > b.y_hi[i] || b.om_lo[i] > b.om_hi[i] || b.ob_lo[i] > b.ob_hi[i]) {
            throw ModelError("inconsistent bounds at node " + std::to_string(i) + " (lower above upper)");
        }
    }
}

Box box_of(const BoundSet& b, int j, int k) {
    const auto sj = static_cast<std::size_t>(j);
    const auto sk = static_cast<std::size_t>(k);
    return {b.y_lo[sj], b.y_hi[sj], b.y_lo[sk], b.y_hi[sk]};
}

bool same_box(const Box& a, const Box& b) {
    return a.lx == b.lx && a.ux == b.ux && a.ly == b.ly && a.uy == b.uy;
}

}  // namespace

std::optional<lp::Row> to_lp_row(const LinearCut& cut, const VarMap& vars) {
    std::map<int, double> coeffs;
    double constant = 0.0;
    for (const auto& [v, coef] : cut.terms) {
        const Affine& a = vars.at(v);
        constant += coef * a.offset;
        if (!a.constant()) {
            coeffs[a.column] += coef * a.scale;
        }
    }
    const double sign = cut.sense == RowSense::GreaterEqual ? -1.0 : 1.0;
    lp::Row row;
    row.sense = cut.sense == RowSense::Equal ? lp::Sense::Equal : lp::Sense::LessEqual;
    row.rhs = sign * (cut.rhs - constant);
    for (const auto& [col, coef] : coeffs) {
        if (std::abs(coef) > kDropCoefficient) {
            row.coeffs.emplace_back(col, sign * coef);
        }
    }
    if (row.coeffs.empty()) {
        const bool holds = row.sense == lp::Sense::Equal ? std::abs(row.rhs) <= kConstantRowTol
                                                         : row.rhs >= -kConstantRowTol;
        if (holds) {
            return std::nullopt;
        }
        if (row.sense == lp::Sense::Equal) {
            row.sense = lp::Sense::LessEqual;
            row.rhs = -std::abs(row.rhs);
        }
    }
    return row;
}

void apply_bounds(lp::Problem& problem, const VarMap& vars, const BoundSet& b, const std::vector<Fix>& fixed) {
    check_bounds(b);
    const int root = 2 * vars.m() - 1;
    for (int c = 0; c < vars.num_columns(); ++c) {
        const VarRef& v = vars.owner(c);
        const auto i = static_cast<std::size_t>(v.index);
        const auto sc = static_cast<std::size_t>(c);
        double lo = 0.0;
        double hi = 1.0;
        switch (v.kind) {
            case VarKind::X: {
                const Fix f = fixed[i - 1];
                lo = f == Fix::One ? 1.0 : 0.0;
                hi = f == Fix::Zero ? 0.0 : 1.0;
                break;
            }
            case VarKind::Y: lo = b.y_lo[i]; hi = b.y_hi[i]; break;
            case VarKind::Omega: lo = b.om_lo[i]; hi = b.om_hi[i]; break;
            case VarKind::OmegaBar: lo = b.ob_lo[i]; hi = b.ob_hi[i]; break;
            case VarKind::R: lo = b.r_lo(root); hi = b.r_hi(root); break;
        }
        problem.lower[sc] = lo;
        problem.upper[sc] = hi;
    }
}

void apply_fixings(lp::Problem& problem, const VarMap& vars, const std::vector<Fix>& fixed) {
    for (int e = 1; e <= vars.m(); ++e) {
        const auto c = static_cast<std::size_t>(vars.at(var_x(e)).column);
        const Fix f = fixed[static_cast<std::size_t>(e - 1)];
        problem.lower[c] = f == Fix::One ? 1.0 : 0.0;
        problem.upper[c] = f == Fix::Zero ? 0.0 : 1.0;
    }
}

Relaxation build_relaxation(const Instance& instance, const BoundSet& b, const RelaxationConfig&) {
    check_bounds(b);
    Relaxation rel{lp::Problem{}, VarMap(instance), {}};
    const VarMap& vars = rel.vars;
    const int m = instance.m();
    const int root = 2 * m - 1;
    std::vector<LinearCut> rows;
    auto add_planes = [&](VarRef z, VarRef x, VarRef y, const std::array<Plane, 2>& planes) {
        for (const auto& pl : planes) {
            rows.push_back(plane_cut(z, x, y, pl, CutScope::Global, CutFamily::Structure));
        }
    };
    for (const auto& s : instance.seq.steps) {
        const int i = s.result_id;
        const Box box = box_of(b, s.left_id, s.right_id);
        const VarRef yj = var_y(s.left_id);
        const VarRef yk = var_y(s.right_id);
        if (s.kind == CompositionKind::Parallel) {
            add_planes(var_y(i), yj, yk, f2_overestimator_cuts(box));
            continue;
        }
        add_planes(var_y(i), yj, yk, f3_default_cuts());
        add_planes(var_omega(i), yj, yk, f2_overestimator_cuts(box));
        if (!vars.at(var_omega_bar(i - 1)).constant()) {
            const auto si = static_cast<std::size_t>(i);
            const Box prod{b.ob_lo[si - 1], b.ob_hi[si - 1], b.om_lo[si], b.om_hi[si]};
            add_planes(var_omega_bar(i), var_omega_bar(i - 1), var_omega(i), mccormick_f1_cuts(prod));
        }
    }
    {
        const auto sr = static_cast<std::size_t>(root);
        const Box prod{b.y_lo[sr], b.y_hi[sr], b.ob_lo[sr], b.ob_hi[sr]};
        add_planes(var_r(), var_y(root), var_omega_bar(root), mccormick_f1_cuts(prod));
    }
    {
        LinearCut card;
        for (int e = 1; e <= m; ++e) {
            card.terms.emplace_back(var_x(e), 1.0);
        }
        card.rhs = instance.budget();
        card.family = CutFamily::SideConstraint;
        rows.push_back(std::move(card));
    }
    for (const auto& extra : instance.extra_rows) {
        LinearCut c;
        for (const auto& [e, coef] : extra.terms) {
            c.terms.emplace_back(var_x(e), coef);
        }
        c.rhs = extra.rhs;
        c.family = CutFamily::SideConstraint;
        rows.push_back(std::move(c));
    }

    const int n = vars.num_columns();
    rel.lp.objective.assign(static_cast<std::size_t>(n), 0.0);
    rel.lp.lower.assign(static_cast<std::size_t>(n), 0.0);
    rel.lp.upper.assign(static_cast<std::size_t>(n), 1.0);
    rel.lp.objective[static_cast<std::size_t>(vars.at(var_r()).column)] = 1.0;
    apply_bounds(rel.lp, vars, b, std::vector<Fix>(static_cast<std::size_t>(m), Fix::Free));
    for (auto& c : rows) {
        if (auto row = to_lp_row(c, vars)) {
            rel.lp.rows.push_back(std::move(*row));
            rel.rows.push_back(std::move(c));
        }
    }
    return rel;
}

std::vector<LinearCut> fixed_edge_cuts(const Instance& instance, const VarMap& vars, const BoundSet& local,
                                       const std::vector<double>* primal) {
    std::vector<LinearCut> out;
    for (const auto& s : instance.seq.steps) {
        if (s.kind != CompositionKind::Series) {
            continue;
        }
        const auto j = static_cast<std::size_t>(s.left_id);
        const auto k = static_cast<std::size_t>(s.right_id);
        const bool pj = local.y_lo[j] == local.y_hi[j];
        const bool pk = local.y_lo[k] == local.y_hi[k];
        if (pj == pk) {
            continue;
        }
        const std::size_t pinned = pj ? j : k;
        const std::size_t free = pj ? k : j;
        const double c = local.y_lo[pinned];
        if (c <= 0.0 || local.y_hi[free] <= 0.0) {
            continue;
        }
        double ys = local.y_hi[free];
        if (primal != nullptr) {
            ys = std::clamp(vars.value(var_y(static_cast<int>(free)), *primal), local.y_lo[free], local.y_hi[free]);
        }
        const Line line = f3_fixed_edge_cut(c, ys);
        if (numerically_safe(line)) {
            out.push_back(line_cut(var_y(s.result_id), var_y(static_cast<int>(free)), line, CutScope::Local,
                                   CutFamily::FixedEdge));
        }
    }
    return out;
}

std::vector<LinearCut> refresh_local_rows(const Instance& instance, const VarMap& vars, const std::vector<Fix>& fixed,
                                          const BoundSet& local, const BoundSet& global, const RelaxationConfig&,
                                          const std::vector<double>* primal) {
    check_bounds(local);
    const int m = instance.m();
    auto pinned = [&](int id) {
        const auto si = static_cast<std::size_t>(id);
        return (id <= m && fixed[si - 1] != Fix::Free) || local.y_lo[si] == local.y_hi[si];
    };
    std::vector<LinearCut> out;
    auto add_planes = [&](VarRef z, VarRef x, VarRef y, const std::array<Plane, 2>& planes, CutFamily family) {
        for (const auto& pl : planes) {
            if (numerically_safe(pl)) {
                out.push_back(plane_cut(z, x, y, pl, CutScope::Local, family));
            }
        }
    };
    for (const auto& s : instance.seq.steps) {
        const int i = s.result_id;
        const auto si = static_cast<std::size_t>(i);
        const Box box = box_of(local, s.left_id, s.right_id);
        const bool box_changed = !same_box(box, box_of(global, s.left_id, s.right_id));
        const bool pj = pinned(s.left_id);
        const bool pk = pinned(s.right_id);
        const VarRef yj = var_y(s.left_id);
        const VarRef yk = var_y(s.right_id);
        if (s.kind == CompositionKind::Parallel) {
            if (pj && pk) {
                continue;
            }
            if (pj || pk) {
                const double c = pj ? box.lx : box.ly;
                out.push_back(pinned_f2_row(var_y(i), pj ? yk : yj, c, CutFamily::LocalEquality));
            } else if (box_changed) {
                add_planes(var_y(i), yj, yk, f2_overestimator_cuts(box), CutFamily::LocalMcCormick);
            }
            continue;
        }
        if (pj && pk) {
            // Y_i and Omega_i are pinned by their own bounds.
        } else if (pj || pk) {
            const double c = pj ? box.lx : box.ly;
            out.push_back(pinned_f2_row(var_omega(i), pj ? yk : yj, c, CutFamily::LocalEquality));
        } else {
            if (box_changed) {
                add_planes(var_omega(i), yj, yk, f2_overestimator_cuts(box), CutFamily::LocalMcCormick);
            }
            if (box.lx > 0.0 || box.ly > 0.0) {
                add_planes(var_y(i), yj, yk, f3_corner_cuts(box.lx, box.ux, box.ly, box.uy), CutFamily::Corner);
            }
        }
        if (!vars.at(var_omega_bar(i - 1)).constant()) {
            const Box prod{local.ob_lo[si - 1], local.ob_hi[si - 1], local.om_lo[si], local.om_hi[si]};
            const Box prod_global{global.ob_lo[si - 1], global.ob_hi[si - 1], global.om_lo[si], global.om_hi[si]};
            if (!same_box(prod, prod_global)) {
                add_planes(var_omega_bar(i), var_omega_bar(i - 1), var_omega(i), mccormick_f1_cuts(prod),
                           CutFamily::LocalMcCormick);
            }
        }
    }
    const int root = 2 * m - 1;
    const auto sr = static_cast<std::size_t>(root);
    const Box prod{local.y_lo[sr], local.y_hi[sr], local.ob_lo[sr], local.ob_hi[sr]};
    const Box prod_global{global.y_lo[sr], global.y_hi[sr], global.ob_lo[sr], global.ob_hi[sr]};
    if (!same_box(prod, prod_global)) {
        add_planes(var_r(), var_y(root), var_omega_bar(root), mccormick_f1_cuts(prod), CutFamily::LocalMcCormick);
    }
    auto tangents = fixed_edge_cuts(instance, vars, local, primal);
    out.insert(out.end(), std::make_move_iterator(tangents.begin()), std::make_move_iterator(tangents.end()));
    return out;
}

double violation(const LinearCut& cut, const VarMap& vars, const std::vector<double>& primal) {
    return violation_of(cut, lhs_of(cut, [&](const VarRef& v) { return vars.value(v, primal); }));
}

double violation_at(const LinearCut& cut, const std::vector<bool>& mask, const EvalTrace& trace) {
    auto value_of = [&](const VarRef& v) -> double {
        const auto i = static_cast<std::size_t>(v.index);
        switch (v.kind) {
            case VarKind::X: return mask[i - 1] ? 1.0 : 0.0;
            case VarKind::Y: return trace.Y[i];
            case VarKind::Omega: return trace.Omega[i];
            case VarKind::OmegaBar: return trace.OmegaBar[i];
            case VarKind::R: return trace.R;
        }
        return 0.0;
    };
    return violation_of(cut, lhs_of(cut, value_of));
}

std::string to_lp_format(const lp::Problem& problem, const VarMap& vars) {
    std::ostringstream os;
    os.precision(17);
    auto name = [&](int c) { return to_string(vars.owner(c)); };
    auto write_terms = [&](const std::vector<std::pair<int, double>>& terms) {
        bool first = true;
        for (const auto& [c, v] : terms) {
            os << (v < 0 ? " - " : (first ? " " : " + ")) << std::abs(v) << ' ' << name(c);
            first = false;
        }
        if (first) {
            os << " 0 " << name(0);
        }
    };
    os << "\\ series-parallel reliability relaxation\nMaximize\n obj:";
    std::vector<std::pair<int, double>> obj;
    for (int c = 0; c < problem.num_vars(); ++c) {
        if (problem.objective[static_cast<std::size_t>(c)] != 0.0) {
            obj.emplace_back(c, problem.objective[static_cast<std::size_t>(c)]);
        }
    }
    write_terms(obj);
    os << "\nSubject To\n";
    for (int r = 0; r < problem.num_rows(); ++r) {
        const auto& row = problem.rows[static_cast<std::size_t>(r)];
        os << " c" << r << ':';
        write_terms(row.coeffs);
        os << (row.sense == lp::Sense::Equal ? " = " : " <= ") << row.rhs << '\n';
    }
    os << "Bounds\n";
    for (int c = 0; c < problem.num_vars(); ++c) {
        const auto sc = static_cast<std::size_t>(c);
        os << ' ' << problem.lower[sc] << " <= " << name(c) << " <= " << problem.upper[sc] << '\n';
    }
    os << "End\n";
    return os.str();
}

}  // namespace sprel
