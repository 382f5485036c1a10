#include "masabs/abstraction.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "masabs/config.hpp"
#include "masabs/eval.hpp"

namespace masabs {

namespace {

std::string qualify(const std::string& agent, const std::string& name) {
    return name.find('.') == std::string::npos ? agent + "." + name : name;
}

std::string ident(std::string s) {
    for (auto& ch : s)
        if (ch == '.') ch = '_';
    return s;
}

const VarDecl& local_decl(const AgentGraph& a, const std::string& name) {
    for (const auto& v : a.vars)
        if (v.name == name) return v;
    throw AbstractionError("'" + name + "' is not a local variable of " + a.name);
}

std::vector<int> initial_cells(const std::vector<VarDecl>& src) {
    std::vector<int> out;
    for (const auto& v : src) out.insert(out.end(), v.init.begin(), v.init.end());
    return out;
}

int apply_fn(const TablePtr& fn, const std::vector<int>& cells) {
    const auto idx = fn->index_of(std::vector<std::int64_t>(cells.begin(), cells.end()));
    if (idx < 0) throw AbstractionError("function " + fn->name + " is not defined on its argument");
    return fn->values[static_cast<std::size_t>(idx)];
}

}  // namespace

TablePtr builtin_fn(const MASGraph& mas, const std::vector<std::string>& sources, const std::string& spec) {
    std::vector<std::pair<int, int>> args;
    for (const auto& s : sources) {
        const auto* d = mas.find_var(s);
        if (!d) throw AbstractionError("unknown variable '" + s + "'");
        for (int c = 0; c < d->cells(); ++c) args.emplace_back(d->lo, d->hi);
    }
    auto t = std::make_shared<Table>();
    t->args = args;
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string param = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto int_param = [&]() {
        try {
            std::size_t used = 0;
            const int v = std::stoi(param, &used);
            if (used != param.size()) throw std::invalid_argument(param);
            return v;
        } catch (const std::exception&) {
            throw AbstractionError("function '" + spec + "' needs an integer parameter");
        }
    };
    std::vector<int> explicit_values;
    if (kind == "table") {
        std::string cur;
        for (char ch : param + ",") {
            if (ch == ',') {
                if (!cur.empty()) {
                    try {
                        explicit_values.push_back(std::stoi(cur));
                    } catch (const std::exception&) {
                        throw AbstractionError("bad table value '" + cur + "'");
                    }
                }
                cur.clear();
            } else if (ch != ' ' && ch != '[' && ch != ']') {
                cur += ch;
            }
        }
        if (explicit_values.size() != t->size())
            throw AbstractionError("table has " + std::to_string(explicit_values.size()) + " values, expected " +
                                   std::to_string(t->size()));
        t->values = explicit_values;
        return t;
    }
    if (kind == "identity" && args.size() != 1) throw AbstractionError("identity needs exactly one source cell");
    if (kind != "identity" && kind != "sum" && kind != "parity" && kind != "constant" && kind != "bucket")
        throw AbstractionError("unknown function '" + spec + "'");
    const int k = (kind == "constant" || kind == "bucket") ? int_param() : 0;
    if (kind == "bucket" && k <= 0) throw AbstractionError("bucket width must be positive");
    for_each_valuation(args, [&](const std::vector<int>& cells) {
        int sum = 0;
        for (int c : cells) sum += c;
        int v = 0;
        if (kind == "identity") v = cells[0];
        else if (kind == "sum") v = sum;
        else if (kind == "parity") v = ((sum % 2) + 2) % 2;
        else if (kind == "constant") v = k;
        else v = sum >= 0 ? sum / k : -((-sum + k - 1) / k);
        t->values.push_back(v);
    });
    return t;
}

Mapping resolve_mapping(const MASGraph& mas, Mapping m) {
    const int ai = mas.agent_index(m.agent);
    if (ai < 0) throw AbstractionError("unknown agent '" + m.agent + "'");
    const auto& a = mas.agents[static_cast<std::size_t>(ai)];
    if (m.sources.empty()) throw AbstractionError("mapping of " + m.agent + " has no sources");
    std::vector<VarDecl> src;
    for (auto& s : m.sources) {
        s = qualify(a.name, s);
        src.push_back(local_decl(a, s));
    }
    for (std::size_t i = 0; i < m.sources.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (m.sources[i] == m.sources[j]) throw AbstractionError("source '" + m.sources[i] + "' listed twice");
    const auto init = initial_cells(src);
    std::size_t ncells = init.size();

    if (m.scope) {
        for (const auto& l : *m.scope)
            if (a.location_index(l) < 0) throw AbstractionError("scope names unknown location '" + l + "' of " + a.name);
    }
    if (m.reset) {
        if (m.reset->size() != ncells) throw AbstractionError("reset needs one value per source cell");
        std::size_t k = 0;
        for (const auto& v : src)
            for (int c = 0; c < v.cells(); ++c, ++k)
                if ((*m.reset)[k] < v.lo || (*m.reset)[k] > v.hi)
                    throw AbstractionError("reset value outside the domain of " + v.name);
    } else {
        m.reset = init;
    }

    if (!m.target) {
        m.fn = nullptr;
        m.outside_default.reset();
        return m;
    }
    auto& z = *m.target;
    z.name = qualify(a.name, z.name);
    if (z.name.rfind(a.name + ".", 0) != 0) throw AbstractionError("target '" + z.name + "' must be local to " + a.name);
    if (mas.find_var(z.name)) throw AbstractionError("target '" + z.name + "' is already declared");
    if (z.is_array()) throw AbstractionError("target '" + z.name + "' must be a scalar");
    if (!m.fn) throw AbstractionError("mapping to '" + z.name + "' has no function");
    // the table must take exactly the source cells
    std::vector<std::pair<int, int>> args;
    for (const auto& v : src)
        for (int c = 0; c < v.cells(); ++c) args.emplace_back(v.lo, v.hi);
    if (m.fn->args != args) throw AbstractionError("function arguments do not match the source cells");
    if (m.fn->values.size() != m.fn->size()) throw AbstractionError("function is not total");
    if (z.lo > z.hi) {  // unset domain: range of fn
        const auto [mn, mx] = std::minmax_element(m.fn->values.begin(), m.fn->values.end());
        z.lo = *mn;
        z.hi = *mx;
    }
    for (int v : m.fn->values)
        if (v < z.lo || v > z.hi)
            throw AbstractionError("function value " + std::to_string(v) + " outside the domain of " + z.name);
    if (m.fn->name.empty() || m.fn->name.rfind("fn_", 0) != 0) {
        auto named = std::make_shared<Table>(*m.fn);
        named->name = "fn_" + ident(z.name);
        m.fn = named;
    }
    if (!m.outside_default) m.outside_default = apply_fn(m.fn, init);
    if (*m.outside_default < z.lo || *m.outside_default > z.hi)
        throw AbstractionError("outside value for " + z.name + " is outside its domain");
    z.shared = false;
    z.length = 0;
    z.init = {0};
    return m;
}

std::set<std::string> kept_variables(const MASGraph& concrete, const std::vector<Mapping>& maps) {
    std::set<std::string> out;
    for (const auto& v : concrete.all_vars()) out.insert(v.name);
    for (const auto& m : maps)
        for (const auto& s : m.sources) {
            const auto ai = concrete.agent_index(m.agent);
            out.erase(ai >= 0 ? qualify(m.agent, s) : s);
        }
    return out;
}

AbstractionConfig parse_abstraction_config(const std::string& text, const MASGraph& mas) {
    std::vector<ConfigEntry> entries;
    try {
        entries = read_config(text);
    } catch (const ConfigError& e) {
        throw AbstractionError(e.what());
    }
    AbstractionConfig cfg;
    struct Pending {
        Mapping m;
        std::string fn;
        std::optional<std::pair<int, int>> domain;
        int line = 0;
    };
    std::vector<Pending> pending;
    for (const auto& e : entries) try {
        if (!e.block.empty()) {
            if (e.block != "mapping") e.fail("unknown block [[" + e.block + "]]");
            pending.push_back({});
            pending.back().line = e.line;
            continue;
        }
        if (pending.empty()) {
            if (e.key != "mode") e.fail("unknown key '" + e.key + "'");
            const auto& m = e.one();
            if (m == "may") cfg.mode = AbsMode::May;
            else if (m == "must") cfg.mode = AbsMode::Must;
            else e.fail("mode must be \"may\" or \"must\"");
            continue;
        }
        auto& p = pending.back();
        if (e.key == "agent") p.m.agent = e.one();
        else if (e.key == "sources") p.m.sources = e.items;
        else if (e.key == "target") {
            VarDecl z;
            z.name = e.one();
            z.lo = 1;
            z.hi = 0;
            p.m.target = z;
        } else if (e.key == "domain") p.domain = e.range();
        else if (e.key == "fn") p.fn = e.one();
        else if (e.key == "scope") p.m.scope = e.items;
        else if (e.key == "reset") p.m.reset = e.integers();
        else if (e.key == "outside") p.m.outside_default = e.integer();
        else e.fail("unknown key '" + e.key + "'");
    } catch (const ConfigError& err) {
        throw AbstractionError(err.what());
    }
    for (auto& p : pending) {
        const auto ai = mas.agent_index(p.m.agent);
        if (ai < 0) throw AbstractionError("config line " + std::to_string(p.line) + ": unknown agent '" + p.m.agent + "'");
        for (auto& s : p.m.sources) s = qualify(p.m.agent, s);
        if (p.m.target) {
            if (p.domain) {
                p.m.target->lo = p.domain->first;
                p.m.target->hi = p.domain->second;
            }
            p.m.fn = builtin_fn(mas, p.m.sources, p.fn.empty() ? "identity" : p.fn);
        } else if (!p.fn.empty()) {
            throw AbstractionError("config line " + std::to_string(p.line) + ": fn given without a target");
        }
        cfg.mappings.push_back(resolve_mapping(mas, p.m));
    }
    return cfg;
}

AbstractionConfig load_abstraction_config(const std::string& path, const MASGraph& mas) {
    try {
        return parse_abstraction_config(read_file(path), mas);
    } catch (const ConfigError& e) {
        throw AbstractionError(e.what());
    }
}

}  // namespace masabs
