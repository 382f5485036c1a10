#include "masabs/mas.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace masabs {

std::set<std::string> reads_of(const Update& u) {
    std::set<std::string> out;
    for (const auto& a : u) {
        for (const auto& k : a.lhs->kids) out.merge(vars_of(k));
        out.merge(vars_of(a.rhs));
    }
    return out;
}

std::set<std::string> writes_of(const Update& u) {
    std::set<std::string> out;
    for (const auto& a : u) out.insert(a.lhs->name);
    return out;
}

std::set<std::string> vars_of(const Update& u) {
    auto out = reads_of(u);
    out.merge(writes_of(u));
    return out;
}

std::string to_string_in(const Update& u, const std::string& agent) {
    std::string out;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (i) out += "; ";
        out += to_string_in(u[i].lhs, agent) + " := " + to_string_in(u[i].rhs, agent);
    }
    return out;
}

std::string to_string(const Update& u) { return u.empty() ? "tau" : to_string_in(u, ""); }

Update substitute(const Update& u, const std::vector<Binding>& bindings) {
    Update out;
    out.reserve(u.size());
    for (const auto& a : u) {
        ExprPtr lhs = a.lhs;
        if (lhs->kind == ExprKind::Index) lhs = ex::index(lhs->name, substitute(lhs->kids[0], bindings));
        out.push_back({lhs, substitute(a.rhs, bindings)});
    }
    return out;
}

std::string to_string(const Sync& s) {
    switch (s.kind) {
        case SyncKind::None: return "-";
        case SyncKind::Send: return s.channel + "!";
        case SyncKind::Recv: return s.channel + "?";
    }
    return "-";
}

int AgentGraph::location_index(const std::string& loc) const {
    auto it = std::find(locations.begin(), locations.end(), loc);
    return it == locations.end() ? -1 : static_cast<int>(it - locations.begin());
}

std::vector<VarDecl> MASGraph::all_vars() const {
    std::vector<VarDecl> out = shared;
    for (const auto& a : agents) out.insert(out.end(), a.vars.begin(), a.vars.end());
    std::sort(out.begin(), out.end(), [](const VarDecl& x, const VarDecl& y) { return x.name < y.name; });
    return out;
}

const VarDecl* MASGraph::find_var(const std::string& name) const {
    for (const auto& v : shared)
        if (v.name == name) return &v;
    for (const auto& a : agents)
        for (const auto& v : a.vars)
            if (v.name == name) return &v;
    return nullptr;
}

int MASGraph::agent_index(const std::string& name) const {
    for (std::size_t i = 0; i < agents.size(); ++i)
        if (agents[i].name == name) return static_cast<int>(i);
    return -1;
}

namespace {

ExprPtr default_of(const VarDecl& v) {
    if (!v.is_array()) return ex::eq(ex::var(v.name), ex::integer(v.init.at(0)));
    std::vector<std::int64_t> vals(v.init.begin(), v.init.end());
    return ex::eq(ex::var(v.name), ex::array_lit(vals));
}

void check_decl(const VarDecl& v) {
    if (v.lo > v.hi) throw ValidationError("empty domain for '" + v.name + "'");
    if (v.length < 0) throw ValidationError("negative array length for '" + v.name + "'");
    if (static_cast<int>(v.init.size()) != v.cells())
        throw ValidationError("default of '" + v.name + "' has the wrong number of cells");
    for (int x : v.init)
        if (x < v.lo || x > v.hi) throw ValidationError("default of '" + v.name + "' is outside its domain");
}

// Checks variable references and array usage of a guard or update operand.
void check_expr(const ExprPtr& e, const std::function<const VarDecl*(const std::string&)>& resolve,
                const std::string& where, bool array_ok) {
    switch (e->kind) {
        case ExprKind::Var: {
            const auto* d = resolve(e->name);
            if (!d) throw ValidationError(where + ": unknown variable '" + e->name + "'");
            if (d->is_array() && !array_ok)
                throw ValidationError(where + ": array '" + e->name + "' used as a scalar");
            return;
        }
        case ExprKind::Index: {
            const auto* d = resolve(e->name);
            if (!d) throw ValidationError(where + ": unknown variable '" + e->name + "'");
            if (!d->is_array()) throw ValidationError(where + ": '" + e->name + "' is not an array");
            check_expr(e->kids[0], resolve, where, false);
            return;
        }
        case ExprKind::ArrayLit:
            if (!array_ok) throw ValidationError(where + ": array literal outside a comparison");
            for (const auto& k : e->kids) check_expr(k, resolve, where, false);
            return;
        case ExprKind::Binary: {
            const bool arr = e->op == BinOp::Eq || e->op == BinOp::Ne;
            for (const auto& k : e->kids) check_expr(k, resolve, where, arr);
            return;
        }
        case ExprKind::LocRef:
        case ExprKind::TempAG:
        case ExprKind::TempAF:
        case ExprKind::TempAX:
        case ExprKind::TempAU: throw ValidationError(where + ": formula operator outside a formula");
        default:
            for (const auto& k : e->kids) check_expr(k, resolve, where, false);
    }
}

}  // namespace

ExprPtr MASGraph::initial_condition() const {
    ExprPtr out = ex::truth();
    for (const auto& v : all_vars()) out = ex::conj(out, default_of(v));
    return out;
}

void validate(const MASGraph& mas) {
    std::set<std::string> names;
    for (const auto& v : mas.shared) {
        check_decl(v);
        if (!names.insert(v.name).second) throw ValidationError("duplicate variable '" + v.name + "'");
    }
    std::set<std::string> agent_names;
    for (const auto& a : mas.agents) {
        if (!agent_names.insert(a.name).second) throw ValidationError("duplicate agent '" + a.name + "'");
        for (const auto& v : a.vars) {
            check_decl(v);
            if (v.name.rfind(a.name + ".", 0) != 0)
                throw ValidationError("local '" + v.name + "' is not prefixed by its agent");
            if (!names.insert(v.name).second) throw ValidationError("duplicate variable '" + v.name + "'");
        }
    }
    std::set<std::string> chans(mas.channels.begin(), mas.channels.end());
    if (chans.size() != mas.channels.size()) throw ValidationError("duplicate channel");
    for (const auto& a : mas.agents) {
        if (a.locations.empty()) throw ValidationError("agent '" + a.name + "' has no locations");
        std::set<std::string> locs(a.locations.begin(), a.locations.end());
        if (locs.size() != a.locations.size()) throw ValidationError("duplicate location in '" + a.name + "'");
        if (a.initial < 0 || a.initial >= static_cast<int>(a.locations.size()))
            throw ValidationError("initial location of '" + a.name + "' out of range");
        auto resolve = [&](const std::string& n) -> const VarDecl* {
            for (const auto& v : a.vars)
                if (v.name == n) return &v;
            for (const auto& v : mas.shared)
                if (v.name == n) return &v;
            return nullptr;
        };
        const int nloc = static_cast<int>(a.locations.size());
        for (const auto& e : a.edges) {
            const std::string where = a.name + " edge";
            if (e.src < 0 || e.src >= nloc || e.dst < 0 || e.dst >= nloc)
                throw ValidationError(where + ": endpoint out of range");
            if (e.sync.kind != SyncKind::None && !chans.count(e.sync.channel))
                throw ValidationError(where + ": undeclared channel '" + e.sync.channel + "'");
            check_expr(e.guard, resolve, where, false);
            for (const auto& as : e.update) {
                if (as.lhs->kind != ExprKind::Var && as.lhs->kind != ExprKind::Index)
                    throw ValidationError(where + ": assignment target is not a variable");
                check_expr(as.lhs, resolve, where, false);
                check_expr(as.rhs, resolve, where, false);
            }
        }
    }
    if (mas.g0) {
        auto resolve = [&](const std::string& n) { return mas.find_var(n); };
        check_expr(mas.g0, resolve, "init", false);
    }
}

namespace {

void emit_decl(std::ostream& os, const VarDecl& v, const std::string& agent) {
    std::string name = v.name;
    if (!agent.empty()) name = name.substr(agent.size() + 1);
    os << "  var " << name;
    if (v.is_array()) os << '[' << v.index_lo << ".." << v.index_lo + v.length - 1 << ']';
    os << ": " << v.lo << ".." << v.hi << " = ";
    if (v.is_array()) {
        os << '[';
        for (std::size_t i = 0; i < v.init.size(); ++i) os << (i ? ", " : "") << v.init[i];
        os << ']';
    } else {
        os << v.init.at(0);
    }
    os << ";\n";
}

void collect_tables(const ExprPtr& e, std::map<std::string, TablePtr>& out) {
    if (e->kind == ExprKind::Lookup) {
        auto [it, fresh] = out.emplace(e->table->name, e->table);
        if (!fresh && it->second->values != e->table->values)
            throw ValidationError("two different tables named '" + e->table->name + "'");
    }
    for (const auto& k : e->kids) collect_tables(k, out);
}

}  // namespace

std::string to_text(const MASGraph& mas) {
    std::map<std::string, TablePtr> tables;
    for (const auto& t : mas.tables) tables.emplace(t->name, t);
    for (const auto& a : mas.agents)
        for (const auto& e : a.edges) {
            collect_tables(e.guard, tables);
            for (const auto& as : e.update) {
                collect_tables(as.lhs, tables);
                collect_tables(as.rhs, tables);
            }
        }
    if (mas.g0) collect_tables(mas.g0, tables);

    std::ostringstream os;
    os << "system {\n";
    for (const auto& v : mas.shared) emit_decl(os, v, "");
    for (const auto& [name, t] : tables) {
        os << "  table " << name << '(';
        for (std::size_t i = 0; i < t->args.size(); ++i)
            os << (i ? ", " : "") << t->args[i].first << ".." << t->args[i].second;
        os << ") = [";
        for (std::size_t i = 0; i < t->values.size(); ++i) os << (i ? ", " : "") << t->values[i];
        os << "];\n";
    }
    if (!mas.channels.empty()) {
        os << "  chan ";
        for (std::size_t i = 0; i < mas.channels.size(); ++i) os << (i ? ", " : "") << mas.channels[i];
        os << ";\n";
    }
    if (mas.g0 && !is_true_lit(mas.g0)) os << "  init " << to_string(mas.g0) << ";\n";
    os << "}\n";
    for (const auto& a : mas.agents) {
        os << "\nagent " << a.name << " {\n";
        for (const auto& v : a.vars) emit_decl(os, v, a.name);
        os << "  loc ";
        for (std::size_t i = 0; i < a.locations.size(); ++i) os << (i ? ", " : "") << a.locations[i];
        os << ";\n  init " << a.locations[static_cast<std::size_t>(a.initial)] << ";\n";
        for (const auto& e : a.edges) {
            os << "  edge " << a.locations[static_cast<std::size_t>(e.src)] << " -> "
               << a.locations[static_cast<std::size_t>(e.dst)];
            if (!is_true_lit(e.guard)) os << " [" << to_string_in(e.guard, a.name) << ']';
            if (e.sync.kind != SyncKind::None) os << " sync(" << to_string(e.sync) << ')';
            if (!e.update.empty()) os << " do " << to_string_in(e.update, a.name);
            os << ";\n";
        }
        os << "}\n";
    }
    return os.str();
}

}  // namespace masabs
