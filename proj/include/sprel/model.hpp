#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sprel/envelopes.hpp"
#include "sprel/lp.hpp"
#include "sprel/reliability.hpp"
#include "sprel/spgraph.hpp"

namespace sprel {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class VarKind : std::uint8_t { X, Y, Omega, OmegaBar, R };

/// Symbolic model variable. `index` is the edge id for X, the node id for
/// Y/Omega/OmegaBar and 0 for R.
struct VarRef {
    VarKind kind = VarKind::R;
    int index = 0;

    bool operator==(const VarRef&) const = default;
};

inline VarRef var_x(int e) { return {VarKind::X, e}; }
inline VarRef var_y(int i) { return {VarKind::Y, i}; }
inline VarRef var_omega(int i) { return {VarKind::Omega, i}; }
inline VarRef var_omega_bar(int i) { return {VarKind::OmegaBar, i}; }
inline VarRef var_r() { return {VarKind::R, 0}; }

std::string to_string(const VarRef& v);

enum class RowSense : std::uint8_t { LessEqual, Equal, GreaterEqual };

enum class CutScope : std::uint8_t { Global, Local };

enum class CutFamily : std::uint8_t {
    Structure,      // static relaxation rows
    SideConstraint,
    Tangent,
    FixedEdge,
    Corner,
    LocalEquality,
    LocalMcCormick,
    BendersUpper,
    BendersLower,
    PerVariable,
};

const char* to_string(CutFamily f);

struct LinearCut {
    std::vector<std::pair<VarRef, double>> terms;
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
    CutScope scope = CutScope::Global;
    CutFamily family = CutFamily::Structure;
};

/// Value of a model variable as an affine image of one LP column:
/// scale * x[column] + offset, or the constant `offset` when column < 0.
struct Affine {
    int column = -1;
    double scale = 0.0;
    double offset = 0.0;

    bool constant() const { return column < 0; }
};

/// Where each symbolic variable lives in the LP. Constant variables
/// (Omega of leaves and parallel steps, OmegaBar before the first series
/// step) and pass-through copies are substituted, never given a column.
class VarMap {
public:
    explicit VarMap(const Instance& instance);

    int m() const { return m_; }
    /// m + 3(2m-1) + 1, the number of variables before substitution.
    int num_symbolic() const { return m_ + 3 * (2 * m_ - 1) + 1; }
    int num_columns() const { return static_cast<int>(owners_.size()); }

    const Affine& at(const VarRef& v) const;
    /// The variable that owns a column (the first one mapped onto it).
    const VarRef& owner(int column) const { return owners_[static_cast<std::size_t>(column)]; }

    double value(const VarRef& v, const std::vector<double>& primal) const;

private:
    int m_;
    std::vector<Affine> x_, y_, omega_, omega_bar_;
    Affine r_;
    std::vector<VarRef> owners_;
};

enum class CutMode : std::uint8_t { WithoutCuts, EnvelopeCuts, ImprovedEnvelopeCuts };

const char* to_string(CutMode mode);
std::optional<CutMode> parse_cut_mode(const std::string& text);

struct RelaxationConfig {
    CutMode cut_mode = CutMode::ImprovedEnvelopeCuts;
    int max_cuts_per_node = 20;
    int max_rounds = 5;
    double violation_tol = 1e-6;
    /// Per-variable Benders cuts for Omega, in addition to Y and OmegaBar.
    bool omega_benders = true;
};

struct Relaxation {
    lp::Problem lp;
    VarMap vars;
    std::vector<LinearCut> rows;  // symbolic form of lp.rows, same order
};

/// LP relaxation with concave overestimators for every reduction, built on
/// the given bounds. X is continuous in [0,1].
Relaxation build_relaxation(const Instance& instance, const BoundSet& bounds, const RelaxationConfig& config);

/// Translates a symbolic row into LP columns. Returns nullopt when the row
/// has no columns left and holds; a violated constant row becomes an empty
/// infeasible row.
std::optional<lp::Row> to_lp_row(const LinearCut& cut, const VarMap& vars);

/// Column bounds from a BoundSet plus edge fixings.
void apply_bounds(lp::Problem& problem, const VarMap& vars, const BoundSet& bounds, const std::vector<Fix>& fixed);

/// Column bounds that only reflect the fixings on X (other columns keep the
/// bounds of `bounds`).
void apply_fixings(lp::Problem& problem, const VarMap& vars, const std::vector<Fix>& fixed);

/// z <= plane(x, y) as a cut.
LinearCut plane_cut(VarRef z, VarRef x, VarRef y, const Plane& plane, CutScope scope, CutFamily family);

/// Node-local rows from refined bounds: exact linear rows where an operand
/// is pinned, fixed-operand tangents at the current point (at the operand's
/// upper bound when `primal` is null), lower-corner planes, and McCormick
/// rows re-derived on the local boxes. All rows are Local.
std::vector<LinearCut> refresh_local_rows(const Instance& instance, const VarMap& vars, const std::vector<Fix>& fixed,
                                          const BoundSet& local, const BoundSet& global,
                                          const RelaxationConfig& config, const std::vector<double>* primal);

/// Fixed-operand tangent rows only (the part of refresh_local_rows that
/// depends on the LP point).
std::vector<LinearCut> fixed_edge_cuts(const Instance& instance, const VarMap& vars, const BoundSet& local,
                                       const std::vector<double>* primal);

/// Largest violation of `cut` at the LP point (negative when slack).
double violation(const LinearCut& cut, const VarMap& vars, const std::vector<double>& primal);

/// Violation of `cut` at the exact point (mask, trace) of a binary choice.
double violation_at(const LinearCut& cut, const std::vector<bool>& mask, const EvalTrace& trace);

/// LP text export in the common CPLEX-style layout.
std::string to_lp_format(const lp::Problem& problem, const VarMap& vars);

}  // namespace sprel
