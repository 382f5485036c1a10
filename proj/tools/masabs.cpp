// Command-line front end. Exit codes: 0 verdict true (or success),
// 1 verdict false, 2 error, 3 resource limit.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "masabs/abstraction.hpp"
#include "masabs/checker.hpp"
#include "masabs/config.hpp"
#include "masabs/parser.hpp"
#include "masabs/simulation.hpp"
#include "masabs/workbench.hpp"

using namespace masabs;

namespace {

constexpr int kTrue = 0, kFalse = 1, kError = 2, kResource = 3;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) std::cout << text;
    else write_text(out, text);
}

// Qualified name, or a bare name that is shared or the local of exactly one agent.
std::string resolve_var(const MASGraph& mas, const std::string& v) {
    if (mas.find_var(v)) return v;
    std::vector<std::string> hits;
    for (const auto& a : mas.agents)
        if (mas.find_var(a.name + "." + v)) hits.push_back(a.name + "." + v);
    if (hits.size() != 1) throw std::runtime_error((hits.empty() ? "unknown" : "ambiguous") + std::string(" variable '") + v + "'");
    return hits[0];
}

void print_stats(const UnwrapStats& st) {
    std::cout << "states " << st.states << "\ntransitions " << st.transitions << "\nclosure_loops " << st.closure_loops
              << "\nbytes " << st.bytes << "\nmillis " << st.millis << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable abstraction and model checking of agent graphs"};
    app.require_subcommand(1);
    std::string file, file2, out, formula, config, vars, agent, keep;
    std::size_t max_states = UnwrapOptions{}.max_states;
    bool json = false, stats = false, may = false, must = false, fifo = false, strict = false, combined = false,
         model = false, reachable_only = false;
    std::string mode = "upper";
    int nv = 1, nc = 1;
    std::string which;

    auto* parse = app.add_subcommand("parse", "Validate a .masg file and print it in normal form");
    parse->add_option("file", file, "system file")->required();

    auto* comb = app.add_subcommand("combine", "Print the combined graph as DOT");
    comb->add_option("file", file, "system file")->required();
    comb->add_flag("--reachable", reachable_only, "drop locations unreachable in the location digraph");
    comb->add_option("-o,--output", out, "output path");

    auto* unw = app.add_subcommand("unwrap", "Explore the reachable state space");
    unw->add_option("file", file, "system file")->required();
    unw->add_flag("--stats", stats, "print statistics instead of the model");
    unw->add_option("--max-states", max_states, "state budget");
    unw->add_option("-o,--output", out, "write the model as JSON");

    auto* dom = app.add_subcommand("approx-domain", "Approximate the values of variables per combined location");
    dom->add_option("file", file, "system file")->required();
    dom->add_option("--vars", vars, "comma-separated variables")->required();
    dom->add_option("--mode", mode, "upper or lower")->check(CLI::IsMember({"upper", "lower"}));
    dom->add_flag("--fifo", fifo, "plain FIFO worklist");

    auto* abs = app.add_subcommand("abstract", "Abstract a system by a mapping config");
    abs->add_option("file", file, "system file")->required();
    abs->add_option("--config", config, "abstraction config")->required();
    auto* may_flag = abs->add_flag("--may", may, "over-approximation (overrides the config)");
    abs->add_flag("--must", must, "under-approximation (overrides the config)")->excludes(may_flag);
    abs->add_option("-o,--output", out, "output path for the abstract system");

    auto* chk = app.add_subcommand("check", "Model check a universal formula");
    chk->add_option("file", file, "system file")->required();
    chk->add_option("--formula", formula, "formula, e.g. 'A[] (x <= 2)'")->required();
    chk->add_flag("--json", json, "print the verdict as JSON");
    chk->add_flag("--strict-until", strict, "left operand of U not required at the first state");
    chk->add_option("--max-states", max_states, "state budget");

    auto* sim = app.add_subcommand("simulate", "Decide whether the second system simulates the first");
    sim->add_option("model1", file, "simulated system")->required();
    sim->add_option("model2", file2, "simulating system")->required();
    sim->add_option("--keep", keep, "comma-separated observed variables (locations are always observed)");
    sim->add_option("--max-states", max_states, "state budget per system");

    auto* bench = app.add_subcommand("bench", "Run a postal-voting benchmark grid and print CSV");
    bench->add_option("--config", config, "bench config")->required();
    bench->add_option("-o,--output", out, "CSV path (overrides the config)");

    auto* dot = app.add_subcommand("export-dot", "Render an agent, the combined graph or the model as DOT");
    dot->add_option("file", file, "system file")->required();
    auto* agent_opt = dot->add_option("--agent", agent, "agent name");
    auto* comb_flag = dot->add_flag("--combined", combined, "combined graph")->excludes(agent_opt);
    dot->add_flag("--model", model, "unwrapped model")->excludes(agent_opt)->excludes(comb_flag);
    dot->add_option("-o,--output", out, "output path");

    auto* gen = app.add_subcommand("gen", "Print a case-study system");
    gen->add_option("which", which, "asv or postal")->required()->check(CLI::IsMember({"asv", "postal"}));
    gen->add_option("--nv", nv, "voters (postal)");
    gen->add_option("--nc", nc, "candidates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kError;
    }

    try {
        UnwrapOptions uo;
        uo.max_states = max_states;
        if (*parse) {
            std::cout << to_text(load_mas(file));
            return kTrue;
        }
        if (*comb) {
            auto g = reachable_only ? combine_reachable(load_mas(file)) : combine(load_mas(file));
            emit(export_dot(g), out);
            return kTrue;
        }
        if (*unw) {
            UnwrapStats st;
            const auto m = unwrap(combine_reachable(load_mas(file)), {}, uo, &st);
            if (!out.empty()) write_text(out, model_to_json(m));
            if (stats || !out.empty()) print_stats(st);
            else std::cout << model_to_json(m) << "\n";
            return kTrue;
        }
        if (*dom) {
            const auto mas = load_mas(file);
            const auto g = combine_reachable(mas);
            std::vector<std::string> names;
            for (const auto& v : split_list(vars)) names.push_back(resolve_var(mas, v));
            DomainOptions opts;
            opts.fifo = fifo;
            const auto d = approx_local_domain(g, names, mode == "upper" ? DomainMode::Upper : DomainMode::Lower, opts);
            std::cout << domain_to_json(d, g) << "\n";
            return kTrue;
        }
        if (*abs) {
            const auto mas = load_mas(file);
            auto cfg = load_abstraction_config(config, mas);
            if (may) cfg.mode = AbsMode::May;
            if (must) cfg.mode = AbsMode::Must;
            AbstractionOptions opts;
            opts.mode = cfg.mode;
            AbstractionReport rep;
            const auto a = abstract_mas(mas, cfg.mappings, opts, &rep);
            emit(to_text(a), out);
            std::cerr << "edges " << rep.edges_in << " -> " << rep.edges_out << ", instances " << rep.instances
                      << ", pruned " << rep.pruned << ", forks " << rep.forks << ", stutters " << rep.stutters << "\n";
            for (const auto& d : rep.diagnostics) std::cerr << d << "\n";
            if (cfg.mode == AbsMode::Must && !rep.supported) {
                std::cerr << "must abstraction not supported: the concrete system need not simulate it\n";
                return kError;
            }
            return kTrue;
        }
        if (*chk) {
            const auto mas = load_mas(file);
            const auto f = parse_formula(formula, mas);
            const auto m = unwrap(combine_reachable(mas), guard_atoms(f), uo);
            CheckOptions co;
            co.strict_until = strict;
            const auto v = check(m, f, co);
            if (json) std::cout << verdict_to_json(v, m) << "\n";
            else {
                std::cout << (v.holds ? "true" : "false") << "\n";
                if (v.has_witness) {
                    std::cout << "counterexample:\n";
                    for (int s : v.witness.prefix) std::cout << "  " << m.describe(s) << "\n";
                    std::cout << "loop:\n";
                    for (int s : v.witness.cycle) std::cout << "  " << m.describe(s) << "\n";
                }
            }
            return v.holds ? kTrue : kFalse;
        }
        if (*sim) {
            const auto s1 = load_mas(file);
            const auto m1 = unwrap(combine_reachable(s1), {}, uo);
            const auto m2 = unwrap(combine_reachable(load_mas(file2)), {}, uo);
            std::set<std::string> kept;
            for (const auto& v : split_list(keep)) kept.insert(resolve_var(s1, v));
            const auto r = check_simulation_vars(m1, m2, kept);
            if (r.found) std::cout << "simulated (" << r.relation.size() << " related pairs)\n";
            else std::cout << "not simulated: " << r.reason << "\n";
            return r.found ? kTrue : kFalse;
        }
        if (*bench) {
            auto cfg = load_bench_config(config);
            if (!out.empty()) cfg.output = out;
            const auto rows = run_bench(cfg);
            std::cout << bench_csv(rows);
            for (const auto& r : rows)
                if (r.verdict.starts_with("error")) return kError;
            for (const auto& r : rows)
                if (r.memout || r.verdict == "timeout") return kResource;
            return kTrue;
        }
        if (*dot) {
            const auto mas = load_mas(file);
            if (!agent.empty()) {
                const int ai = mas.agent_index(agent);
                if (ai < 0) throw std::runtime_error("unknown agent '" + agent + "'");
                emit(export_dot(mas.agents[static_cast<std::size_t>(ai)]), out);
            } else if (model) {
                emit(export_dot(unwrap(combine_reachable(mas), {}, uo)), out);
            } else {
                emit(export_dot(combine(mas)), out);
            }
            return kTrue;
        }
        if (*gen) {
            std::cout << (which == "asv" ? asv_text(nc) : postal_text(nv, nc));
            return kTrue;
        }
    } catch (const ResourceError& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return kResource;
    } catch (const std::bad_alloc&) {
        std::cerr << "resource limit: out of memory\n";
        return kResource;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
    return kError;
}
