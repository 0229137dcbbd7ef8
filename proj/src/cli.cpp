#include "sprel/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sprel/bnb.hpp"
#include "sprel/model.hpp"
#include "sprel/reliability.hpp"
#include "sprel/spgraph.hpp"

namespace sprel::cli {

namespace {

// Shortest text that reads back to the same double.
std::string fmt(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct BenchRow {
    std::uint64_t seed;
    int m;
    double alpha;
    CutMode mode;
    SolveResult result;
};

void write_csv(std::ostream& os, std::vector<BenchRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
        return std::tie(a.seed, a.m, a.alpha, a.mode) < std::tie(b.seed, b.m, b.alpha, b.mode);
    });
    os << "seed,m,alpha,config,status,incumbent,bound,gap,nodes,cuts,time_s\n";
    for (const auto& r : rows) {
        os << r.seed << ',' << r.m << ',' << fmt(r.alpha) << ',' << to_string(r.mode) << ','
           << to_string(r.result.termination) << ',' << fmt(r.result.incumbent_reliability) << ','
           << fmt(r.result.best_bound) << ',' << fmt(r.result.gap) << ',' << r.result.nodes << ','
           << r.result.total_cuts() << ',' << fmt(r.result.wall_seconds) << '\n';
    }
}

CutMode cut_mode_or_throw(const std::string& text) {
    auto mode = parse_cut_mode(text);
    if (!mode) {
        throw CLI::ValidationError("--cuts", "expected none, envelope or improved, got '" + text + "'");
    }
    return *mode;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact reliability maximization on series-parallel networks", "sprel"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "write a random series-parallel instance");
    int gen_m = 0;
    std::uint64_t gen_seed = 0;
    double gen_alpha = 1.0;
    std::string gen_out;
    gen->add_option("--m", gen_m, "number of edges")->required()->check(CLI::Range(2, 100000));
    gen->add_option("--seed", gen_seed, "generator seed")->required();
    gen->add_option("--alpha", gen_alpha, "cardinality fraction")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--out", gen_out, "instance file (stdout when omitted)");

    auto* ev = app.add_subcommand("evaluate", "reliability of the subgraph selected by a mask");
    std::string ev_instance;
    std::string ev_mask;
    bool ev_trace = false;
    ev->add_option("--instance", ev_instance)->required();
    ev->add_option("--mask", ev_mask, "bitstring ordered by edge id")->required();
    ev->add_flag("--trace", ev_trace, "print Y, Omega and OmegaBar per node");

    auto* orc = app.add_subcommand("oracle", "exhaustive enumeration (small instances only)");
    std::string orc_instance;
    bool orc_optimize = false;
    orc->add_option("--instance", orc_instance)->required();
    orc->add_flag("--optimize", orc_optimize, "enumerate feasible masks instead of the full graph");

    auto* sol = app.add_subcommand("solve", "branch-and-cut to optimality or to the limits");
    std::string sol_instance;
    std::string sol_cuts = "improved";
    double sol_time = 0.0;
    long sol_nodes = 0;
    std::string sol_out;
    std::string sol_log;
    std::string sol_lp;
    sol->add_option("--instance", sol_instance)->required();
    sol->add_option("--cuts", sol_cuts, "none | envelope | improved");
    sol->add_option("--time-limit", sol_time, "seconds, 0 = none")->check(CLI::NonNegativeNumber);
    sol->add_option("--node-limit", sol_nodes, "0 = none")->check(CLI::NonNegativeNumber);
    sol->add_option("--out", sol_out, "result JSON file (stdout when omitted)");
    sol->add_option("--log", sol_log, "per-node key=value log file");
    sol->add_option("--lp-export", sol_lp, "write the root relaxation in LP format");

    auto* bench = app.add_subcommand("bench", "solve generated instances under several cut modes");
    int b_m = 0;
    double b_alpha = 0.8;
    int b_seeds = 1;
    std::uint64_t b_seed = 1;
    std::vector<std::string> b_cuts{"none", "envelope", "improved"};
    double b_time = 60.0;
    std::string b_csv;
    bench->add_option("--m", b_m)->required()->check(CLI::Range(2, 100000));
    bench->add_option("--alpha", b_alpha)->check(CLI::Range(0.0, 1.0));
    bench->add_option("--seeds", b_seeds, "number of seeds: seed, seed+1, ...")->check(CLI::PositiveNumber);
    bench->add_option("--seed", b_seed, "first seed");
    bench->add_option("--cuts", b_cuts, "cut modes to compare")->delimiter(',');
    bench->add_option("--time-limit", b_time, "seconds per solve, 0 = none")->check(CLI::NonNegativeNumber);
    bench->add_option("--csv", b_csv, "CSV file (stdout when omitted)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (gen->parsed()) {
            const Instance inst = generate(gen_m, gen_seed, gen_alpha);
            if (gen_out.empty()) {
                out << serialize_instance(inst);
            } else {
                write_instance(inst, gen_out);
            }
            return kExitOk;
        }
        if (ev->parsed()) {
            const Instance inst = read_instance(ev_instance);
            const EvalTrace t = evaluate(inst, parse_mask(ev_mask, inst.m()));
            out << fmt(t.R) << '\n';
            if (ev_trace) {
                for (int i = 1; i <= inst.seq.node_count(); ++i) {
                    const auto si = static_cast<std::size_t>(i);
                    out << "node=" << i << " Y=" << fmt(t.Y[si]) << " Omega=" << fmt(t.Omega[si])
                        << " OmegaBar=" << fmt(t.OmegaBar[si]) << '\n';
                }
            }
            return kExitOk;
        }
        if (orc->parsed()) {
            const Instance inst = read_instance(orc_instance);
            if (orc_optimize) {
                const OracleOptimum o = oracle_optimize(inst);
                out << "mask=" << format_mask(o.mask) << " reliability=" << fmt(o.reliability) << '\n';
            } else {
                out << fmt(oracle_reliability(inst, std::vector<bool>(static_cast<std::size_t>(inst.m()), true)))
                    << '\n';
            }
            return kExitOk;
        }
        if (sol->parsed()) {
            const Instance inst = read_instance(sol_instance);
            SolveOptions opt;
            opt.relax.cut_mode = cut_mode_or_throw(sol_cuts);
            opt.limits.time_seconds = sol_time;
            opt.limits.max_nodes = sol_nodes;
            std::ofstream log;
            if (!sol_log.empty()) {
                log.open(sol_log);
                if (!log) {
                    throw std::runtime_error("cannot write " + sol_log);
                }
                log.precision(17);
                opt.log = &log;
            }
            if (!sol_lp.empty()) {
                const BoundSet b =
                    propagate_bounds(inst, std::vector<Fix>(static_cast<std::size_t>(inst.m()), Fix::Free));
                const Relaxation rel = build_relaxation(inst, b, opt.relax);
                std::ofstream lp_file(sol_lp);
                lp_file << to_lp_format(rel.lp, rel.vars);
                if (!lp_file) {
                    throw std::runtime_error("cannot write " + sol_lp);
                }
            }
            const SolveResult r = solve(inst, opt);
            if (sol_out.empty()) {
                out << to_json(r) << '\n';
            } else {
                std::ofstream f(sol_out);
                f << to_json(r) << '\n';
                if (!f) {
                    throw std::runtime_error("cannot write " + sol_out);
                }
            }
            return r.solved() ? kExitOk : kExitUnsolved;
        }
        if (bench->parsed()) {
            std::vector<CutMode> modes;
            for (const auto& c : b_cuts) {
                modes.push_back(cut_mode_or_throw(c));
            }
            std::vector<BenchRow> rows;
            bool all_solved = true;
            for (int k = 0; k < b_seeds; ++k) {
                const std::uint64_t seed = b_seed + static_cast<std::uint64_t>(k);
                const Instance inst = generate(b_m, seed, b_alpha);
                for (CutMode mode : modes) {
                    SolveOptions opt;
                    opt.relax.cut_mode = mode;
                    opt.limits.time_seconds = b_time;
                    rows.push_back({seed, b_m, b_alpha, mode, solve(inst, opt)});
                    all_solved = all_solved && rows.back().result.solved();
                }
            }
            if (b_csv.empty()) {
                write_csv(out, std::move(rows));
            } else {
                std::ofstream f(b_csv);
                write_csv(f, std::move(rows));
                if (!f) {
                    throw std::runtime_error("cannot write " + b_csv);
                }
            }
            return all_solved ? kExitOk : kExitUnsolved;
        }
    } catch (const CLI::ValidationError& e) {
        err << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace sprel::cli
