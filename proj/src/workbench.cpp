#include "masabs/workbench.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "masabs/checker.hpp"
#include "masabs/config.hpp"
#include "masabs/parser.hpp"

namespace masabs {

std::string asv_text(int nc) {
    if (nc < 1) throw std::invalid_argument("gen_asv: NC must be at least 1");
    std::ostringstream o;
    o << "# coercion-resistance toy: one voter, " << nc << " candidate(s)\n"
      << "system {\n"
      << "  var K_voted[1.." << nc << "] : 0..1;\n"
      << "  var K_refused : 0..1;\n"
      << "  chan give, refuse;\n"
      << "}\n"
      << "agent Voter {\n"
      << "  var x : 0.." << nc << ";\n"
      << "  loc idle, voted, obeyed, disobeyed;\n"
      << "  init idle;\n"
      << "  edge idle -> voted select i : 1.." << nc << " do x := i;\n"
      << "  edge voted -> obeyed sync(give!) do K_voted[x] := 1;\n"
      << "  edge voted -> disobeyed sync(refuse!) do K_refused := 1;\n"
      << "}\n"
      << "agent Coercer {\n"
      << "  loc idle, halt;\n"
      << "  init idle;\n"
      << "  edge idle -> halt sync(give?);\n"
      << "  edge idle -> halt sync(refuse?);\n"
      << "}\n";
    return o.str();
}

MASGraph gen_asv(int nc) { return parse_mas(asv_text(nc)); }

// Voter j talks to the Authority over dec<j> (declaration, post or pickup),
// post<j> / pick<j> (package delivery by the declared method) and
// ret<j> / void<j> (a counted return: signed and filled; anything else).
// Values travel through the shared one-place buffers buf_dec and buf_vt,
// written by the sender and cleared by the receiver in the same step.
std::string postal_text(int nv, int nc) {
    if (nv < 1 || nc < 1) throw std::invalid_argument("gen_postal: NV and NC must be at least 1");
    std::ostringstream o;
    o << "# postal voting: " << nv << " voter(s), " << nc << " candidate(s)\n"
      << "system {\n"
      << "  var buf_dec : 0..2;\n"
      << "  var buf_vt : 0.." << nc << ";\n"
      << "  chan ";
    for (int j = 1; j <= nv; ++j)
        o << (j > 1 ? ", " : "") << "dec" << j << ", post" << j << ", pick" << j << ", ret" << j << ", void" << j;
    o << ";\n}\n";

    o << "agent Authority {\n"
      << "  var pack_sent[1.." << nv << "] : 0..1;\n"
      << "  var dec_recv[1.." << nv << "] : 0..2;\n"
      << "  var tally[1.." << nc << "] : 0.." << nv << ";\n"
      << "  loc coll_dec, send_ep, coll_vts;\n"
      << "  init coll_dec;\n";
    for (int j = 1; j <= nv; ++j)
        o << "  edge coll_dec -> coll_dec sync(dec" << j << "?) do dec_recv[" << j << "] := buf_dec; buf_dec := 0;\n";
    o << "  edge coll_dec -> send_ep;\n";
    for (int j = 1; j <= nv; ++j) {
        o << "  edge send_ep -> send_ep [dec_recv[" << j << "] == 1 && pack_sent[" << j << "] == 0] sync(post" << j
          << "!) do pack_sent[" << j << "] := 1;\n";
        o << "  edge send_ep -> send_ep [dec_recv[" << j << "] == 2 && pack_sent[" << j << "] == 0] sync(pick" << j
          << "!) do pack_sent[" << j << "] := 1;\n";
    }
    o << "  edge send_ep -> coll_vts;\n";
    for (int j = 1; j <= nv; ++j) {
        o << "  edge coll_vts -> coll_vts sync(ret" << j << "?) do tally[buf_vt] := tally[buf_vt] + 1; buf_vt := 0;\n";
        o << "  edge coll_vts -> coll_vts sync(void" << j << "?);\n";
    }
    o << "}\n";

    for (int j = 1; j <= nv; ++j) {
        o << "agent Voter" << j << " {\n"
          << "  var mem_dec : 0..2;\n"
          << "  var mem_sg : 0..1;\n"
          << "  var mem_vt : 0.." << nc << ";\n"
          << "  loc idle, waiting, has, voted;\n"
          << "  init idle;\n"
          << "  edge idle -> waiting select m : 1..2 sync(dec" << j << "!) do mem_dec := m; buf_dec := m;\n"
          << "  edge waiting -> has [mem_dec == 1] sync(post" << j << "?);\n"
          << "  edge waiting -> has [mem_dec == 2] sync(pick" << j << "?);\n"
          << "  edge has -> voted select v : 1.." << nc << " sync(ret" << j
          << "!) do mem_sg := 1; mem_vt := v; buf_vt := v;\n"
          << "  edge has -> voted select v : 1.." << nc << " sync(void" << j << "!) do mem_sg := 0; mem_vt := v;\n"
          << "  edge has -> voted select s : 0..1 sync(void" << j << "!) do mem_sg := s; mem_vt := 0;\n"
          << "}\n";
    }
    return o.str();
}

MASGraph gen_postal(int nv, int nc) { return parse_mas(postal_text(nv, nc)); }

std::vector<Mapping> postal_abstraction(const MASGraph& postal, int which) {
    if (which < 1 || which > 3) throw std::invalid_argument("postal abstractions are numbered 1..3");
    std::vector<Mapping> out;
    for (const auto& a : postal.agents) {
        if (!a.name.starts_with("Voter")) continue;
        if (which != 2)
            for (const char* v : {"mem_sg", "mem_vt"}) {
                Mapping m;
                m.agent = a.name;
                m.sources = {a.name + "." + v};
                out.push_back(resolve_mapping(postal, m));
            }
        if (which != 1) {
            Mapping m;
            m.agent = a.name;
            m.sources = {a.name + ".mem_dec"};
            m.scope = std::vector<std::string>{"has", "voted"};
            out.push_back(resolve_mapping(postal, m));
        }
    }
    if (which != 1) {
        Mapping m;
        m.agent = "Authority";
        m.sources = {"Authority.dec_recv"};
        m.scope = std::vector<std::string>{"coll_vts"};
        out.push_back(resolve_mapping(postal, m));
    }
    return out;
}

namespace {

std::string sum_of(const std::string& array, int n) {
    std::string s = "(";
    for (int i = 1; i <= n; ++i) s += (i > 1 ? " + " : "") + array + "[" + std::to_string(i) + "]";
    return s + ")";
}

}  // namespace

std::string phi_bstuff_text(int nv, int nc) {
    const auto packs = sum_of("pack_sent", nv);
    return "A[] (" + sum_of("tally", nc) + " <= " + packs + " && " + packs + " <= " + std::to_string(nv) + ")";
}

std::string phi_dispatch_text(int nv) {
    return "A[] (coll_vts imply " + sum_of("pack_sent", nv) + " == " + std::to_string(nv) + ")";
}

std::string to_string(BenchVariant v) {
    switch (v) {
        case BenchVariant::Concrete: return "concrete";
        case BenchVariant::Abs1: return "abstraction-1";
        case BenchVariant::Abs2: return "abstraction-2";
        case BenchVariant::Abs3: return "abstraction-3";
        case BenchVariant::Custom: return "custom";
    }
    return "custom";
}

BenchVariant parse_variant(const std::string& s) {
    for (auto v : {BenchVariant::Concrete, BenchVariant::Abs1, BenchVariant::Abs2, BenchVariant::Abs3, BenchVariant::Custom})
        if (to_string(v) == s) return v;
    throw ConfigError("unknown variant '" + s + "'");
}

BenchConfig parse_bench_config(const std::string& text) {
    BenchConfig cfg;
    bool custom_listed = false;
    for (const auto& e : read_config(text)) {
        if (!e.block.empty()) e.fail("bench configs have no blocks");
        if (e.key == "nv") std::tie(cfg.nv_lo, cfg.nv_hi) = e.range();
        else if (e.key == "nc") std::tie(cfg.nc_lo, cfg.nc_hi) = e.range();
        else if (e.key == "variants") {
            cfg.variants.clear();
            for (const auto& v : e.items) {
                try {
                    cfg.variants.push_back(parse_variant(v));
                } catch (const ConfigError& err) {
                    e.fail(err.what());
                }
                custom_listed |= cfg.variants.back() == BenchVariant::Custom;
            }
        } else if (e.key == "mode") {
            if (e.one() == "may") cfg.mode = AbsMode::May;
            else if (e.one() == "must") cfg.mode = AbsMode::Must;
            else e.fail("mode must be \"may\" or \"must\"");
        } else if (e.key == "formula") cfg.formula = e.one();
        else if (e.key == "custom") cfg.custom_config = e.one();
        else if (e.key == "max_states") {
            if (e.integer() <= 0) e.fail("max_states must be positive");
            cfg.max_states = static_cast<std::size_t>(e.integer());
        } else if (e.key == "time_budget_s") {
            if (e.integer() <= 0) e.fail("time_budget_s must be positive");
            cfg.time_budget_s = e.integer();
        } else if (e.key == "workers") {
            if (e.integer() <= 0) e.fail("workers must be positive");
            cfg.workers = e.integer();
        } else if (e.key == "output") cfg.output = e.one();
        else e.fail("unknown key '" + e.key + "'");
    }
    if (cfg.nv_lo < 1 || cfg.nv_lo > cfg.nv_hi) throw ConfigError("nv range is empty or below 1");
    if (cfg.nc_lo < 1 || cfg.nc_lo > cfg.nc_hi) throw ConfigError("nc range is empty or below 1");
    if (cfg.variants.empty()) throw ConfigError("no variants selected");
    if (custom_listed && cfg.custom_config.empty()) throw ConfigError("variant custom needs custom = \"<path>\"");
    return cfg;
}

BenchConfig load_bench_config(const std::string& path) { return parse_bench_config(read_file(path)); }

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }

BenchRow run_cell(const BenchConfig& cfg, int nv, int nc, BenchVariant variant) {
    BenchRow row;
    row.nv = nv;
    row.nc = nc;
    row.variant = variant;
    try {
        const auto mas = gen_postal(nv, nc);
        MASGraph m = mas;
        bool unsupported = false;
        auto t0 = Clock::now();
        if (variant != BenchVariant::Concrete) {
            AbstractionOptions opts;
            opts.mode = cfg.mode;
            std::vector<Mapping> maps;
            if (variant == BenchVariant::Custom) {
                const auto ac = load_abstraction_config(cfg.custom_config, mas);
                opts.mode = ac.mode;
                maps = ac.mappings;
            } else {
                maps = postal_abstraction(mas, static_cast<int>(variant) - static_cast<int>(BenchVariant::Concrete));
            }
            AbstractionReport rep;
            m = abstract_mas(mas, maps, opts, &rep);
            unsupported = opts.mode == AbsMode::Must && !rep.supported;
            row.ta_ms = ms_since(t0);
        }
        const std::string text = cfg.formula == "bstuff"     ? phi_bstuff_text(nv, nc)
                                 : cfg.formula == "dispatch" ? phi_dispatch_text(nv)
                                                             : cfg.formula;
        const auto f = parse_formula(text, m);
        t0 = Clock::now();
        UnwrapOptions uo;
        uo.max_states = cfg.max_states;
        const auto model = unwrap(combine_reachable(m), guard_atoms(f), uo);
        row.states = static_cast<std::size_t>(model.n);
        if (ms_since(t0) > cfg.time_budget_s * 1000) {
            row.tv_ms = ms_since(t0);
            row.verdict = "timeout";
            return row;
        }
        const bool holds = check(model, f).holds;
        row.tv_ms = ms_since(t0);
        row.verdict = unsupported ? "unsupported" : (holds ? "true" : "false");
    } catch (const ResourceError&) {
        row.states.reset();
        row.memout = true;
        row.verdict = "memout";
    } catch (const std::bad_alloc&) {
        row.states.reset();
        row.memout = true;
        row.verdict = "memout";
    } catch (const std::exception& e) {
        row.verdict = std::string("error: ") + e.what();
    }
    return row;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
    struct Cell {
        int nv, nc;
        BenchVariant v;
    };
    std::vector<Cell> cells;
    for (int nv = cfg.nv_lo; nv <= cfg.nv_hi; ++nv)
        for (int nc = cfg.nc_lo; nc <= cfg.nc_hi; ++nc)
            for (auto v : cfg.variants) cells.push_back({nv, nc, v});
    if (cells.empty()) throw ConfigError("empty benchmark grid");
    std::vector<BenchRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = run_cell(cfg, cells[i].nv, cells[i].nc, cells[i].v);
    };
    const auto n = static_cast<std::size_t>(std::max(1, cfg.workers));
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < std::min(n, cells.size()); ++w) pool.emplace_back(worker);
    worker();
    pool.clear();
    if (!cfg.output.empty()) write_text(cfg.output, bench_csv(rows));
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream o;
    o << "NV,NC,variant,states,ta_ms,tv_ms,verdict,memout\n";
    o.setf(std::ios::fixed);
    o.precision(2);
    for (const auto& r : rows) {
        std::string verdict = r.verdict;
        if (verdict.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char ch : verdict) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            verdict = q + "\"";
        }
        o << r.nv << ',' << r.nc << ',' << to_string(r.variant) << ',';
        if (r.states) o << *r.states;
        o << ',' << r.ta_ms << ',' << r.tv_ms << ',' << verdict << ',' << (r.memout ? 1 : 0) << '\n';
    }
    return o.str();
}

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out;
}

std::string edge_label(const ExprPtr& guard, const Sync& sync, const Update& u, const std::string& agent) {
    return (agent.empty() ? to_string(guard) : to_string_in(guard, agent)) + ":" + to_string(sync) + ":" +
           (agent.empty() ? to_string(u) : to_string_in(u, agent));
}

}  // namespace

std::string export_dot(const AgentGraph& a) {
    std::ostringstream o;
    o << "digraph \"" << dot_escape(a.name) << "\" {\n";
    for (std::size_t l = 0; l < a.locations.size(); ++l)
        o << "  n" << l << " [label=\"" << dot_escape(a.locations[l]) << "\""
          << (static_cast<int>(l) == a.initial ? ", shape=doublecircle" : "") << "];\n";
    for (const auto& e : a.edges)
        o << "  n" << e.src << " -> n" << e.dst << " [label=\"" << dot_escape(edge_label(e.guard, e.sync, e.update, a.name))
          << "\"];\n";
    o << "}\n";
    return o.str();
}

std::string export_dot(const CombinedGraph& g) {
    std::ostringstream o;
    o << "digraph combined {\n";
    for (int l = 0; l < g.location_count(); ++l)
        o << "  n" << l << " [label=\"" << dot_escape(g.location_name(l)) << "\""
          << (l == g.initial ? ", shape=doublecircle" : "") << "];\n";
    for (const auto& e : g.edges) {
        std::string from;
        for (const auto& [agent, edge] : e.provenance)
            from += (from.empty() ? "" : " + ") + g.agent_names[static_cast<std::size_t>(agent)] + "#" + std::to_string(edge);
        o << "  n" << e.src << " -> n" << e.dst << " [label=\""
          << dot_escape(edge_label(e.guard, Sync{}, e.update, "") + " [" + from + "]") << "\"];\n";
    }
    o << "}\n";
    return o.str();
}

std::string export_dot(const Model& m) {
    std::ostringstream o;
    o << "digraph model {\n";
    std::vector<char> init(static_cast<std::size_t>(m.n), 0);
    for (int s : m.initial) init[static_cast<std::size_t>(s)] = 1;
    for (int s = 0; s < m.n; ++s)
        o << "  s" << s << " [label=\"" << dot_escape(m.describe(s)) << "\""
          << (init[static_cast<std::size_t>(s)] ? ", shape=doublecircle" : "") << "];\n";
    for (int s = 0; s < m.n; ++s)
        for (auto t : m.successors(s))
            o << "  s" << s << " -> s" << t << (m.closure[static_cast<std::size_t>(s)] ? " [style=dashed]" : "") << ";\n";
    o << "}\n";
    return o.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << text;
    if (!f) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace masabs
