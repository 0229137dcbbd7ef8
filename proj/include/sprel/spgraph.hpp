#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sprel {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An elementary edge; ids run 1..m.
struct EdgeDef {
    int id = 0;
    double p = 0.0;  // elementary reliability 1 - q_e

    bool operator==(const EdgeDef&) const = default;
};

enum class CompositionKind { Series, Parallel };

/// One merge step. The i-th step (1-based) of a sequence produces id m+i.
struct Composition {
    int result_id = 0;
    CompositionKind kind = CompositionKind::Series;
    int left_id = 0;
    int right_id = 0;

    bool operator==(const Composition&) const = default;
};

/// Ordered series/parallel merges that build the graph from single edges.
/// Ids 1..m are edges, m+1..2m-1 are step results, 2m-1 is the root.
struct CompositionSequence {
    int m = 0;
    std::vector<Composition> steps;

    int node_count() const { return 2 * m - 1; }
    int root() const { return 2 * m - 1; }
    bool is_edge(int id) const { return id >= 1 && id <= m; }
    const Composition& step_of(int id) const { return steps[static_cast<std::size_t>(id - m - 1)]; }

    bool operator==(const CompositionSequence&) const = default;
};

/// Sparse linear side constraint sum_e coef_e * X_e <= rhs.
struct SideRow {
    std::vector<std::pair<int, double>> terms;  // (edge id, coefficient)
    double rhs = 0.0;

    bool operator==(const SideRow&) const = default;
};

struct Instance {
    std::vector<EdgeDef> edges;  // edges[e-1].id == e
    CompositionSequence seq;
    double alpha = 1.0;
    std::vector<SideRow> extra_rows;

    int m() const { return seq.m; }
    double p(int edge) const { return edges[static_cast<std::size_t>(edge - 1)].p; }
    /// Right-hand side of the cardinality row: floor(alpha * m).
    int budget() const;

    bool operator==(const Instance&) const = default;
};

struct ConcreteEdge {
    int edge_id = 0;
    int u = 0;
    int v = 0;
};

/// Vertex/edge realization of a composition sequence. Vertices are 0..n-1.
struct ConcreteGraph {
    int n = 0;
    std::vector<ConcreteEdge> edges;  // sorted by edge id
};

struct Violation {
    int step = -1;  // 0-based step index, -1 for sequence-level problems
    std::string rule;
};

/// Checks the tree invariants of a sequence. Empty result means valid.
std::vector<Violation> validate(const CompositionSequence& seq);

/// Full instance check: sequence, edge ids, probabilities, alpha, side rows.
std::vector<Violation> validate(const Instance& instance);

/// splitmix64 generator. Doubles use the top 53 bits of each draw.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    double uniform();                    // [0, 1)
    std::uint64_t below(std::uint64_t n);  // [0, n), modulo reduction

private:
    std::uint64_t state_;
};

/// Random series-parallel instance: p_e ~ U[0.9, 1], then m-1 random
/// series/parallel joins of two distinct live components.
Instance generate(int m, std::uint64_t seed, double alpha = 1.0);

ConcreteGraph materialize(const CompositionSequence& seq);

/// Leaf edge ids under node `id`, ascending.
std::vector<int> support(const CompositionSequence& seq, int id);

/// Supports of every node at once, indexed by id (entry 0 unused).
std::vector<std::vector<int>> all_supports(const CompositionSequence& seq);

Instance parse_instance(const std::string& text);
std::string serialize_instance(const Instance& instance);

Instance read_instance(const std::filesystem::path& path);
void write_instance(const Instance& instance, const std::filesystem::path& path);

/// Bitstring "1011..." ordered by edge id.
std::vector<bool> parse_mask(const std::string& bits, int m);
std::string format_mask(const std::vector<bool>& mask);

}  // namespace sprel
