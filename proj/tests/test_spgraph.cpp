#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "sprel/spgraph.hpp"
#include "support.hpp"

using namespace sprel;
using sprel::testing::make_instance;

namespace {

using K = CompositionKind;

bool has_rule(const std::vector<Violation>& v, const std::string& text) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule.find(text) != std::string::npos; });
}

// Vertex count after union-find over the materialized edges; returns the
// number of components.
int components(const ConcreteGraph& g) {
    std::vector<int> parent(static_cast<std::size_t>(g.n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    };
    int count = g.n;
    for (const auto& e : g.edges) {
        const int a = find(e.u);
        const int b = find(e.v);
        if (a != b) {
            parent[static_cast<std::size_t>(a)] = b;
            --count;
        }
    }
    return count;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("sprel_test_" + name);
}

}  // namespace

TEST_SUITE("spgraph") {

TEST_CASE("validate accepts the smallest legal sequences") {
    CompositionSequence two{2, {{3, K::Series, 1, 2}}};
    CHECK(validate(two).empty());
    CompositionSequence tri{3, {{4, K::Series, 1, 2}, {5, K::Parallel, 4, 3}}};
    CHECK(validate(tri).empty());
}

TEST_CASE("validate names a reused operand") {
    CompositionSequence bad{3, {{4, K::Series, 1, 2}, {5, K::Parallel, 1, 3}}};
    const auto v = validate(bad);
    REQUIRE_FALSE(v.empty());
    CHECK(has_rule(v, "operand 1 reused"));
    CHECK(v.front().step == 1);
}

TEST_CASE("validate rejects forward references, self joins and wrong result ids") {
    CHECK_FALSE(validate(CompositionSequence{3, {{4, K::Series, 1, 5}, {5, K::Parallel, 2, 3}}}).empty());
    CHECK_FALSE(validate(CompositionSequence{2, {{3, K::Series, 1, 1}}}).empty());
    CHECK_FALSE(validate(CompositionSequence{2, {{4, K::Series, 1, 2}}}).empty());
    CHECK_FALSE(validate(CompositionSequence{3, {{4, K::Series, 1, 2}}}).empty());
}

TEST_CASE("generate: two edges, one step, p in [0.9, 1]") {
    const Instance inst = generate(2, 1);
    CHECK(inst.m() == 2);
    CHECK(inst.seq.steps.size() == 1);
    for (const auto& e : inst.edges) {
        CHECK(e.p >= 0.9);
        CHECK(e.p <= 1.0);
    }
}

TEST_CASE("generate: m=50 gives 49 valid steps") {
    const Instance inst = generate(50, 7);
    CHECK(inst.seq.steps.size() == 49);
    CHECK(validate(inst).empty());
}

TEST_CASE("generate is deterministic per seed and rejects m < 2") {
    CHECK(serialize_instance(generate(17, 99)) == serialize_instance(generate(17, 99)));
    CHECK(serialize_instance(generate(17, 99)) != serialize_instance(generate(17, 100)));
    CHECK_THROWS_AS(generate(1, 1), std::invalid_argument);
}

TEST_CASE("splitmix64 matches the published reference stream") {
    // First outputs for seed 0 of Vigna's splitmix64.c.
    SplitMix64 r(0);
    CHECK(r.next() == 0xe220a8397b1dcdafULL);
    CHECK(r.next() == 0x6e789e6aa1b965f4ULL);
    CHECK(r.next() == 0x06c45d188009454fULL);
}

TEST_CASE("materialize: series pair is a 3-vertex path") {
    const ConcreteGraph g = materialize(CompositionSequence{2, {{3, K::Series, 1, 2}}});
    CHECK(g.n == 3);
    REQUIRE(g.edges.size() == 2);
    CHECK(components(g) == 1);
}

TEST_CASE("materialize: parallel pair shares both endpoints") {
    const ConcreteGraph g = materialize(CompositionSequence{2, {{3, K::Parallel, 1, 2}}});
    CHECK(g.n == 2);
    REQUIRE(g.edges.size() == 2);
    CHECK(std::minmax(g.edges[0].u, g.edges[0].v) == std::minmax(g.edges[1].u, g.edges[1].v));
}

TEST_CASE("materialize: the triangle sequence yields a 3-cycle") {
    const ConcreteGraph g = materialize(CompositionSequence{3, {{4, K::Series, 1, 2}, {5, K::Parallel, 4, 3}}});
    CHECK(g.n == 3);
    REQUIRE(g.edges.size() == 3);
    std::vector<int> degree(3, 0);
    for (const auto& e : g.edges) {
        CHECK(e.u != e.v);
        ++degree[static_cast<std::size_t>(e.u)];
        ++degree[static_cast<std::size_t>(e.v)];
    }
    CHECK(degree == std::vector<int>{2, 2, 2});
}

TEST_CASE("support on the triangle") {
    const CompositionSequence tri{3, {{4, K::Series, 1, 2}, {5, K::Parallel, 4, 3}}};
    CHECK(support(tri, 4) == std::vector<int>{1, 2});
    CHECK(support(tri, 5) == std::vector<int>{1, 2, 3});
    CHECK(support(tri, 1) == std::vector<int>{1});
    CHECK_THROWS(support(tri, 6));
    CHECK_THROWS(support(tri, 0));
}

TEST_CASE("property: generated sequences are trees with consistent realizations") {
    for (int m = 2; m <= 40; m += 3) {
        for (std::uint64_t seed = 1; seed <= 8; ++seed) {
            const Instance inst = generate(m, seed);
            const auto& seq = inst.seq;
            REQUIRE(validate(inst).empty());
            CHECK(seq.steps.size() == static_cast<std::size_t>(m - 1));
            CHECK(seq.steps.back().result_id == 2 * m - 1);
            std::vector<int> uses(static_cast<std::size_t>(2 * m), 0);
            int series = 0;
            for (const auto& s : seq.steps) {
                ++uses[static_cast<std::size_t>(s.left_id)];
                ++uses[static_cast<std::size_t>(s.right_id)];
                series += s.kind == K::Series ? 1 : 0;
            }
            for (int id = 1; id <= 2 * m - 2; ++id) {
                CHECK(uses[static_cast<std::size_t>(id)] == 1);
            }
            CHECK(uses[static_cast<std::size_t>(2 * m - 1)] == 0);

            const ConcreteGraph g = materialize(seq);
            CHECK(g.edges.size() == static_cast<std::size_t>(m));
            CHECK(components(g) == 1);
            CHECK(g.n == 2 + series);  // each series step merges one vertex pair, parallel two

            const auto sup = all_supports(seq);
            CHECK(sup[static_cast<std::size_t>(2 * m - 1)].size() == static_cast<std::size_t>(m));
            for (const auto& s : seq.steps) {
                const auto& a = sup[static_cast<std::size_t>(s.left_id)];
                const auto& b = sup[static_cast<std::size_t>(s.right_id)];
                std::vector<int> both;
                std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
                CHECK(both.empty());
                std::vector<int> merged;
                std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
                CHECK(merged == sup[static_cast<std::size_t>(s.result_id)]);
                CHECK(merged == support(seq, s.result_id));
            }
        }
    }
}

TEST_CASE("instance files round-trip") {
    Instance inst = generate(10, 3, 0.6);
    inst.extra_rows.push_back({{{1, 1.0}, {4, 2.5}}, 3.0});
    const auto path = temp_file("roundtrip.json");
    write_instance(inst, path);
    const Instance back = read_instance(path);
    CHECK(back == inst);
    CHECK(back.alpha == 0.6);
    std::filesystem::remove(path);
}

TEST_CASE("serialization keeps 17 significant digits") {
    Instance inst = make_instance({0.1 + 0.2, 0.95}, {{3, K::Series, 1, 2}});
    const Instance back = parse_instance(serialize_instance(inst));
    CHECK(back.edges[0].p == inst.edges[0].p);
}

TEST_CASE("parse errors carry context") {
    const std::string dup = R"({"m": 2, "edges": [{"id": 1, "p": 0.9}, {"id": 1, "p": 0.9}],
        "steps": [{"id": 3, "op": "S", "left": 1, "right": 2}], "alpha": 1.0, "extra_rows": []})";
    CHECK_THROWS_AS(parse_instance(dup), ParseError);
    try {
        parse_instance(dup);
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_instance("{\"m\": 2,\n \"edges\": [}"), ParseError);
    const std::string bad_op = R"({"m": 2, "edges": [{"id": 1, "p": 0.9}, {"id": 2, "p": 0.9}],
        "steps": [{"id": 3, "op": "X", "left": 1, "right": 2}], "alpha": 1.0, "extra_rows": []})";
    CHECK_THROWS_AS(parse_instance(bad_op), ParseError);
    const std::string reused = R"({"m": 3, "edges": [{"id": 1, "p": 0.9}, {"id": 2, "p": 0.9}, {"id": 3, "p": 0.9}],
        "steps": [{"id": 4, "op": "S", "left": 1, "right": 2}, {"id": 5, "op": "P", "left": 1, "right": 3}],
        "alpha": 1.0, "extra_rows": []})";
    CHECK_THROWS_AS(parse_instance(reused), ValidationError);
    CHECK_THROWS(read_instance(temp_file("does_not_exist.json")));
}

TEST_CASE("alpha is read as given and the budget floors alpha*m") {
    Instance inst = generate(10, 1, 0.6);
    CHECK(parse_instance(serialize_instance(inst)).alpha == 0.6);
    CHECK(inst.budget() == 6);
    inst.alpha = 0.67;
    inst.seq.m = 3;
    CHECK(inst.budget() == 2);
    Instance big = generate(100, 1, 0.29);
    CHECK(big.budget() == 29);
}

TEST_CASE("masks: bitstrings ordered by edge id") {
    CHECK(parse_mask("101", 3) == std::vector<bool>{true, false, true});
    CHECK(format_mask({true, true, false}) == "110");
    CHECK_THROWS(parse_mask("10", 3));
    CHECK_THROWS(parse_mask("1a1", 3));
}

}  // TEST_SUITE
