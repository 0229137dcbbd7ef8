#include "sprel/spgraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace sprel {

int Instance::budget() const {
    // The epsilon keeps products like 0.29 * 100 from flooring to 28.
    return static_cast<int>(std::floor(alpha * static_cast<double>(m()) + 1e-9));
}

std::vector<Violation> validate(const CompositionSequence& seq) {
    std::vector<Violation> out;
    const int m = seq.m;
    if (m < 1) {
        out.push_back({-1, "edge count must be at least 1"});
        return out;
    }
    if (static_cast<int>(seq.steps.size()) != m - 1) {
        out.push_back({-1, "expected " + std::to_string(m - 1) + " steps, found " +
                               std::to_string(seq.steps.size())});
    }
    std::vector<int> uses(static_cast<std::size_t>(2 * m), 0);
    for (std::size_t i = 0; i < seq.steps.size(); ++i) {
        const auto& s = seq.steps[i];
        const int step = static_cast<int>(i);
        const int expected = m + step + 1;
        if (s.result_id != expected) {
            out.push_back({step, "result id " + std::to_string(s.result_id) + " should be " +
                                     std::to_string(expected)});
        }
        if (s.left_id == s.right_id) {
            out.push_back({step, "left and right operand are both " + std::to_string(s.left_id)});
        }
        const int operands = s.left_id == s.right_id ? 1 : 2;
        for (int k = 0; k < operands; ++k) {
            const int operand = k == 0 ? s.left_id : s.right_id;
            if (operand < 1 || operand >= expected || operand >= 2 * m) {
                out.push_back({step, "operand " + std::to_string(operand) + " is not defined yet"});
                continue;
            }
            if (++uses[static_cast<std::size_t>(operand)] > 1) {
                out.push_back({step, "operand " + std::to_string(operand) + " reused"});
            }
        }
    }
    if (static_cast<int>(seq.steps.size()) == m - 1) {
        for (int id = 1; id <= 2 * m - 2; ++id) {
            if (uses[static_cast<std::size_t>(id)] == 0) {
                out.push_back({-1, "id " + std::to_string(id) + " is never used as an operand"});
            }
        }
    }
    return out;
}

std::vector<Violation> validate(const Instance& instance) {
    auto out = validate(instance.seq);
    const int m = instance.seq.m;
    if (static_cast<int>(instance.edges.size()) != m) {
        out.push_back({-1, "edge list has " + std::to_string(instance.edges.size()) + " entries, m is " +
                               std::to_string(m)});
    }
    for (std::size_t i = 0; i < instance.edges.size(); ++i) {
        const auto& e = instance.edges[i];
        if (e.id != static_cast<int>(i) + 1) {
            out.push_back({-1, "edge at position " + std::to_string(i) + " has id " + std::to_string(e.id)});
        }
        if (!(e.p >= 0.0 && e.p <= 1.0)) {
            out.push_back({-1, "edge " + std::to_string(e.id) + " has p outside [0,1]"});
        }
    }
    if (!(instance.alpha > 0.0 && instance.alpha <= 1.0)) {
        out.push_back({-1, "alpha must lie in (0,1]"});
    }
    for (std::size_t r = 0; r < instance.extra_rows.size(); ++r) {
        const auto& row = instance.extra_rows[r];
        if (!std::isfinite(row.rhs)) {
            out.push_back({-1, "extra row " + std::to_string(r) + " has a non-finite rhs"});
        }
        for (const auto& [edge, coef] : row.terms) {
            if (edge < 1 || edge > m || !std::isfinite(coef)) {
                out.push_back({-1, "extra row " + std::to_string(r) + " has a bad term on edge " +
                                       std::to_string(edge)});
            }
        }
    }
    return out;
}

std::uint64_t SplitMix64::next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t SplitMix64::below(std::uint64_t n) { return next() % n; }

Instance generate(int m, std::uint64_t seed, double alpha) {
    if (m < 2) {
        throw std::invalid_argument("generate: m must be at least 2, got " + std::to_string(m));
    }
    SplitMix64 rng(seed);
    Instance inst;
    inst.alpha = alpha;
    inst.seq.m = m;
    inst.edges.reserve(static_cast<std::size_t>(m));
    for (int e = 1; e <= m; ++e) {
        inst.edges.push_back({e, 0.9 + 0.1 * rng.uniform()});
    }
    std::vector<int> live(static_cast<std::size_t>(m));
    std::iota(live.begin(), live.end(), 1);
    int next_id = m + 1;
    while (live.size() > 1) {
        const auto n = static_cast<std::uint64_t>(live.size());
        auto i = rng.below(n);
        auto j = rng.below(n - 1);
        if (j >= i) {
            ++j;
        }
        const bool parallel = rng.uniform() < 0.5;
        const int left = live[i];
        const int right = live[j];
        inst.seq.steps.push_back(
            {next_id, parallel ? CompositionKind::Parallel : CompositionKind::Series, left, right});
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(std::min(i, j)));
        live.push_back(next_id++);
    }
    return inst;
}

namespace {

void require_valid(const CompositionSequence& seq, const char* what) {
    auto v = validate(seq);
    if (!v.empty()) {
        throw ValidationError(std::string(what) + ": invalid sequence: " + v.front().rule);
    }
}

int find_root(std::vector<int>& parent, int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
        parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
        a = parent[static_cast<std::size_t>(a)];
    }
    return a;
}

}  // namespace

ConcreteGraph materialize(const CompositionSequence& seq) {
    require_valid(seq, "materialize");
    const int m = seq.m;
    // Edge e starts with private terminals 2(e-1) -> 2(e-1)+1.
    std::vector<int> parent(static_cast<std::size_t>(2 * m));
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<std::pair<int, int>> terminals(static_cast<std::size_t>(2 * m));
    for (int e = 1; e <= m; ++e) {
        terminals[static_cast<std::size_t>(e)] = {2 * (e - 1), 2 * (e - 1) + 1};
    }
    auto unite = [&](int a, int b) {
        a = find_root(parent, a);
        b = find_root(parent, b);
        if (a != b) {
            parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
        }
    };
    for (const auto& s : seq.steps) {
        const auto [ls, lt] = terminals[static_cast<std::size_t>(s.left_id)];
        const auto [rs, rt] = terminals[static_cast<std::size_t>(s.right_id)];
        if (s.kind == CompositionKind::Series) {
            unite(lt, rs);
            terminals[static_cast<std::size_t>(s.result_id)] = {ls, rt};
        } else {
            unite(ls, rs);
            unite(lt, rt);
            terminals[static_cast<std::size_t>(s.result_id)] = {ls, lt};
        }
    }
    std::vector<int> label(static_cast<std::size_t>(2 * m), -1);
    ConcreteGraph g;
    for (int v = 0; v < 2 * m; ++v) {
        const int r = find_root(parent, v);
        if (label[static_cast<std::size_t>(r)] < 0) {
            label[static_cast<std::size_t>(r)] = g.n++;
        }
    }
    g.edges.reserve(static_cast<std::size_t>(m));
    for (int e = 1; e <= m; ++e) {
        g.edges.push_back({e, label[static_cast<std::size_t>(find_root(parent, 2 * (e - 1)))],
                           label[static_cast<std::size_t>(find_root(parent, 2 * (e - 1) + 1))]});
    }
    return g;
}

std::vector<std::vector<int>> all_supports(const CompositionSequence& seq) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(2 * seq.m));
    for (int e = 1; e <= seq.m; ++e) {
        out[static_cast<std::size_t>(e)] = {e};
    }
    for (const auto& s : seq.steps) {
        const auto& a = out[static_cast<std::size_t>(s.left_id)];
        const auto& b = out[static_cast<std::size_t>(s.right_id)];
        auto& dst = out[static_cast<std::size_t>(s.result_id)];
        dst.reserve(a.size() + b.size());
        std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(dst));
    }
    return out;
}

std::vector<int> support(const CompositionSequence& seq, int id) {
    if (id < 1 || id > 2 * seq.m - 1) {
        throw std::out_of_range("support: id " + std::to_string(id) + " outside 1.." +
                                std::to_string(2 * seq.m - 1));
    }
    if (id <= seq.m) {
        return {id};
    }
    std::vector<int> out;
    std::vector<int> stack{id};
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        if (cur <= seq.m) {
            out.push_back(cur);
        } else {
            const auto& s = seq.step_of(cur);
            stack.push_back(s.left_id);
            stack.push_back(s.right_id);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Instance file I/O

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& ctx) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(ctx + ": missing field \"" + key + "\"");
    }
    return *it;
}

int as_int(const json& v, const std::string& ctx) {
    if (!v.is_number_integer()) {
        throw ParseError(ctx + ": expected an integer");
    }
    return v.get<int>();
}

double as_double(const json& v, const std::string& ctx) {
    if (!v.is_number()) {
        throw ParseError(ctx + ": expected a number");
    }
    return v.get<double>();
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // Keep integral values recognizable as floats.
    if (s.find_first_of(".eEn") == std::string::npos) {
        s += ".0";
    }
    return s;
}

}  // namespace

Instance parse_instance(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte is 1-based; translate it into a line number.
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw ParseError("line " + std::to_string(line) + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw ParseError("instance: top level must be an object");
    }
    Instance inst;
    inst.seq.m = as_int(field(doc, "m", "instance"), "m");
    const auto& edges = field(doc, "edges", "instance");
    if (!edges.is_array()) {
        throw ParseError("edges: expected an array");
    }
    std::vector<bool> seen(static_cast<std::size_t>(std::max(inst.seq.m, 0) + 1), false);
    inst.edges.resize(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string ctx = "edges[" + std::to_string(i) + "]";
        const int id = as_int(field(edges[i], "id", ctx), ctx + ".id");
        const double p = as_double(field(edges[i], "p", ctx), ctx + ".p");
        if (id < 1 || id > inst.seq.m || id > static_cast<int>(edges.size())) {
            throw ParseError(ctx + ".id: " + std::to_string(id) + " outside 1.." + std::to_string(inst.seq.m));
        }
        if (seen[static_cast<std::size_t>(id)]) {
            throw ParseError(ctx + ".id: duplicate edge id " + std::to_string(id));
        }
        seen[static_cast<std::size_t>(id)] = true;
        inst.edges[static_cast<std::size_t>(id - 1)] = {id, p};
    }
    const auto& steps = field(doc, "steps", "instance");
    if (!steps.is_array()) {
        throw ParseError("steps: expected an array");
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string ctx = "steps[" + std::to_string(i) + "]";
        Composition c;
        c.result_id = as_int(field(steps[i], "id", ctx), ctx + ".id");
        const auto& op = field(steps[i], "op", ctx);
        if (op == "S") {
            c.kind = CompositionKind::Series;
        } else if (op == "P") {
            c.kind = CompositionKind::Parallel;
        } else {
            throw ParseError(ctx + ".op: expected \"S\" or \"P\"");
        }
        c.left_id = as_int(field(steps[i], "left", ctx), ctx + ".left");
        c.right_id = as_int(field(steps[i], "right", ctx), ctx + ".right");
        inst.seq.steps.push_back(c);
    }
    inst.alpha = as_double(field(doc, "alpha", "instance"), "alpha");
    if (auto it = doc.find("extra_rows"); it != doc.end()) {
        if (!it->is_array()) {
            throw ParseError("extra_rows: expected an array");
        }
        for (std::size_t r = 0; r < it->size(); ++r) {
            const std::string ctx = "extra_rows[" + std::to_string(r) + "]";
            const auto& row = (*it)[r];
            SideRow sr;
            const auto& terms = field(row, "terms", ctx);
            if (!terms.is_array()) {
                throw ParseError(ctx + ".terms: expected an array");
            }
            for (std::size_t t = 0; t < terms.size(); ++t) {
                const std::string tctx = ctx + ".terms[" + std::to_string(t) + "]";
                sr.terms.emplace_back(as_int(field(terms[t], "edge", tctx), tctx + ".edge"),
                                      as_double(field(terms[t], "coef", tctx), tctx + ".coef"));
            }
            if (auto s = row.find("sense"); s != row.end() && *s != "<=") {
                throw ParseError(ctx + ".sense: only \"<=\" is supported");
            }
            sr.rhs = as_double(field(row, "rhs", ctx), ctx + ".rhs");
            inst.extra_rows.push_back(std::move(sr));
        }
    }
    if (auto v = validate(inst); !v.empty()) {
        std::string msg = "invalid instance:";
        for (const auto& x : v) {
            msg += " [";
            if (x.step >= 0) {
                msg += "step " + std::to_string(x.step) + ": ";
            }
            msg += x.rule + "]";
        }
        throw ValidationError(msg);
    }
    return inst;
}

std::string serialize_instance(const Instance& inst) {
    std::ostringstream os;
    os << "{\n  \"m\": " << inst.seq.m << ",\n  \"edges\": [";
    for (std::size_t i = 0; i < inst.edges.size(); ++i) {
        os << (i ? ",\n    " : "\n    ") << "{\"id\": " << inst.edges[i].id << ", \"p\": " << fmt17(inst.edges[i].p)
           << "}";
    }
    os << "\n  ],\n  \"steps\": [";
    for (std::size_t i = 0; i < inst.seq.steps.size(); ++i) {
        const auto& s = inst.seq.steps[i];
        os << (i ? ",\n    " : "\n    ") << "{\"id\": " << s.result_id << ", \"op\": \""
           << (s.kind == CompositionKind::Series ? 'S' : 'P') << "\", \"left\": " << s.left_id
           << ", \"right\": " << s.right_id << "}";
    }
    os << "\n  ],\n  \"alpha\": " << fmt17(inst.alpha) << ",\n  \"extra_rows\": [";
    for (std::size_t r = 0; r < inst.extra_rows.size(); ++r) {
        const auto& row = inst.extra_rows[r];
        os << (r ? ",\n    " : "\n    ") << "{\"terms\": [";
        for (std::size_t t = 0; t < row.terms.size(); ++t) {
            os << (t ? ", " : "") << "{\"edge\": " << row.terms[t].first << ", \"coef\": " << fmt17(row.terms[t].second)
               << "}";
        }
        os << "], \"sense\": \"<=\", \"rhs\": " << fmt17(row.rhs) << "}";
    }
    os << (inst.extra_rows.empty() ? "]" : "\n  ]") << "\n}\n";
    return os.str();
}

Instance read_instance(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_instance(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_instance(const Instance& instance, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << serialize_instance(instance);
}

std::vector<bool> parse_mask(const std::string& bits, int m) {
    if (static_cast<int>(bits.size()) != m) {
        throw std::invalid_argument("mask has length " + std::to_string(bits.size()) + ", expected " +
                                    std::to_string(m));
    }
    std::vector<bool> mask(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != '0' && bits[i] != '1') {
            throw std::invalid_argument("mask may only contain 0 and 1");
        }
        mask[i] = bits[i] == '1';
    }
    return mask;
}

std::string format_mask(const std::vector<bool>& mask) {
    std::string s;
    s.reserve(mask.size());
    for (bool b : mask) {
        s.push_back(b ? '1' : '0');
    }
    return s;
}

}  // namespace sprel
