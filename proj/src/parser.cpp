#include "masabs/parser.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "masabs/eval.hpp"

namespace masabs {

ParseError::ParseError(int line, int col, const std::string& msg)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg), line_(line), col_(col) {}

namespace {

enum class TK { Ident, Int, Sym, End };

struct Tok {
    TK kind = TK::End;
    std::string text;
    std::int64_t value = 0;
    int line = 1;
    int col = 1;
};

std::vector<Tok> lex(const std::string& src) {
    static const char* const multi[] = {"->", "..", ":=", "==", "!=", "<=", ">=", "&&", "||"};
    std::vector<Tok> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Tok t;
        t.line = line;
        t.col = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            t.kind = TK::Ident;
            t.text = src.substr(i, j - i);
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.kind = TK::Int;
            t.text = src.substr(i, j - i);
            if (t.text.size() > 12) throw ParseError(line, col, "integer literal too large");
            t.value = std::stoll(t.text);
            advance(j - i);
        } else {
            t.kind = TK::Sym;
            for (const char* m : multi) {
                if (src.compare(i, 2, m) == 0) {
                    t.text = m;
                    break;
                }
            }
            if (t.text.empty()) {
                if (std::string("()[]{},;:!?<>+-*/%.=").find(c) == std::string::npos)
                    throw ParseError(line, col, std::string("unexpected character '") + c + "'");
                t.text = std::string(1, c);
            }
            advance(t.text.size());
        }
        out.push_back(std::move(t));
    }
    Tok end;
    end.line = line;
    end.col = col;
    out.push_back(end);
    return out;
}

const std::set<std::string>& keywords() {
    static const std::set<std::string> k = {"system", "agent", "var", "const", "table", "chan", "loc",
                                            "init",   "edge",  "sync", "do",    "select", "true", "false",
                                            "imply"};
    return k;
}

enum class Ty { Int, Bool, Array };

class Parser {
public:
    Parser(std::vector<Tok> toks, const MASGraph* ctx) : toks_(std::move(toks)), ctx_(ctx) {}

    MASGraph parse_system();
    ExprPtr parse_standalone(bool formula);

private:
    // token helpers
    const Tok& peek(int k = 0) const {
        const auto i = std::min(pos_ + static_cast<std::size_t>(k), toks_.size() - 1);
        return toks_[i];
    }
    bool is_sym(const char* s, int k = 0) const { return peek(k).kind == TK::Sym && peek(k).text == s; }
    bool is_word(const char* s, int k = 0) const { return peek(k).kind == TK::Ident && peek(k).text == s; }
    [[noreturn]] void fail(const std::string& msg, const Tok* at = nullptr) const {
        const Tok& t = at ? *at : peek();
        throw ParseError(t.line, t.col, msg);
    }
    const Tok& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    void expect_sym(const char* s) {
        if (!is_sym(s)) fail(std::string("expected '") + s + "'" + found());
        take();
    }
    void expect_word(const char* s) {
        if (!is_word(s)) fail(std::string("expected '") + s + "'" + found());
        take();
    }
    std::string found() const {
        const Tok& t = peek();
        if (t.kind == TK::End) return ", found end of input";
        return ", found '" + t.text + "'";
    }
    std::string ident() {
        if (peek().kind != TK::Ident || keywords().count(peek().text)) fail("expected identifier" + found());
        return take().text;
    }

    // declarations
    std::int64_t const_expr();
    std::pair<int, int> range();
    VarDecl var_decl(const std::string& prefix, bool shared);
    void system_block();
    void agent_block();
    void edge_stmt(AgentGraph& a);
    Update assignments();

    // expressions
    ExprPtr expr(int min_prec);
    ExprPtr prefix();
    ExprPtr name_ref(const Tok& at);
    int infix_prec(BinOp& op, bool& is_imply, bool& is_until) const;
    Ty type_of(const ExprPtr& e, const Tok& at) const;
    void require(const ExprPtr& e, Ty want, const Tok& at, const char* what) const;

    const VarDecl* lookup_var(const std::string& fq) const;

    std::vector<Tok> toks_;
    std::size_t pos_ = 0;
    const MASGraph* ctx_;  // resolution context for standalone expressions

    MASGraph out_;
    std::map<std::string, std::int64_t> consts_;
    std::map<std::string, TablePtr> tables_;
    AgentGraph* agent_ = nullptr;
    std::set<std::string> binders_;
    bool formula_ = false;
    int until_depth_ = 0;
    std::optional<std::size_t> init_pos_;
};

const VarDecl* Parser::lookup_var(const std::string& fq) const {
    if (ctx_) return ctx_->find_var(fq);
    for (const auto& v : out_.shared)
        if (v.name == fq) return &v;
    if (agent_)
        for (const auto& v : agent_->vars)
            if (v.name == fq) return &v;
    for (const auto& a : out_.agents)
        for (const auto& v : a.vars)
            if (v.name == fq) return &v;
    return nullptr;
}

std::int64_t Parser::const_expr() {
    const Tok& at = peek();
    auto e = fold(expr(6));
    if (e->kind != ExprKind::Int) fail("expected a constant integer expression", &at);
    return e->value;
}

std::pair<int, int> Parser::range() {
    const auto lo = const_expr();
    expect_sym("..");
    const auto hi = const_expr();
    return {static_cast<int>(lo), static_cast<int>(hi)};
}

VarDecl Parser::var_decl(const std::string& prefix, bool shared) {
    const Tok& at = peek();
    VarDecl v;
    const std::string short_name = ident();
    v.name = prefix.empty() ? short_name : prefix + "." + short_name;
    v.shared = shared;
    if (is_sym("[")) {
        take();
        const Tok& rat = peek();
        const auto first = const_expr();
        if (is_sym("..")) {
            take();
            const auto last = const_expr();
            v.index_lo = static_cast<int>(first);
            v.length = static_cast<int>(last - first + 1);
        } else {
            v.index_lo = 0;
            v.length = static_cast<int>(first);
        }
        if (v.length < 1) fail("array length must be at least 1", &rat);
        expect_sym("]");
    }
    expect_sym(":");
    const Tok& dat = peek();
    std::tie(v.lo, v.hi) = range();
    if (v.lo > v.hi) fail("empty domain", &dat);
    if (is_sym("=")) {
        take();
        const Tok& iat = peek();
        if (is_sym("[")) {
            take();
            while (true) {
                v.init.push_back(static_cast<int>(const_expr()));
                if (!is_sym(",")) break;
                take();
            }
            expect_sym("]");
            if (static_cast<int>(v.init.size()) != v.cells()) fail("default has the wrong number of cells", &iat);
        } else {
            v.init.assign(static_cast<std::size_t>(v.cells()), static_cast<int>(const_expr()));
        }
        for (int x : v.init)
            if (x < v.lo || x > v.hi) fail("default outside the domain", &iat);
    } else {
        v.init.assign(static_cast<std::size_t>(v.cells()), v.lo < 0 && v.hi >= 0 ? 0 : v.lo);
    }
    expect_sym(";");
    if (lookup_var(v.name) || consts_.count(short_name) || tables_.count(short_name))
        fail("'" + short_name + "' is already declared", &at);
    return v;
}

void Parser::system_block() {
    expect_word("system");
    expect_sym("{");
    while (!is_sym("}")) {
        const Tok& at = peek();
        if (is_word("const")) {
            take();
            const std::string name = ident();
            expect_sym("=");
            const auto v = const_expr();
            expect_sym(";");
            if (consts_.count(name) || lookup_var(name)) fail("'" + name + "' is already declared", &at);
            consts_[name] = v;
        } else if (is_word("var")) {
            take();
            out_.shared.push_back(var_decl("", true));
        } else if (is_word("table")) {
            take();
            auto t = std::make_shared<Table>();
            t->name = ident();
            if (tables_.count(t->name) || consts_.count(t->name)) fail("'" + t->name + "' is already declared", &at);
            expect_sym("(");
            while (true) {
                t->args.push_back(range());
                if (!is_sym(",")) break;
                take();
            }
            expect_sym(")");
            expect_sym("=");
            expect_sym("[");
            const Tok& vat = peek();
            while (!is_sym("]")) {
                t->values.push_back(static_cast<int>(const_expr()));
                if (!is_sym(",")) break;
                take();
            }
            expect_sym("]");
            expect_sym(";");
            if (t->values.size() != t->size()) fail("table needs " + std::to_string(t->size()) + " values", &vat);
            tables_[t->name] = t;
            out_.tables.push_back(t);
        } else if (is_word("chan")) {
            take();
            while (true) {
                const Tok& cat = peek();
                auto c = ident();
                if (std::find(out_.channels.begin(), out_.channels.end(), c) != out_.channels.end())
                    fail("channel '" + c + "' declared twice", &cat);
                out_.channels.push_back(c);
                if (!is_sym(",")) break;
                take();
            }
            expect_sym(";");
        } else if (is_word("init")) {
            take();
            if (init_pos_) fail("second init clause", &at);
            init_pos_ = pos_;
            int depth = 0;
            while (!(depth == 0 && is_sym(";"))) {
                if (peek().kind == TK::End) fail("unterminated init clause");
                if (is_sym("(") || is_sym("[")) ++depth;
                if (is_sym(")") || is_sym("]")) --depth;
                take();
            }
            take();
        } else {
            fail("unknown declaration" + found());
        }
    }
    expect_sym("}");
}

void Parser::agent_block() {
    expect_word("agent");
    const Tok& at = peek();
    AgentGraph a;
    a.name = ident();
    for (const auto& b : out_.agents)
        if (b.name == a.name) fail("agent '" + a.name + "' declared twice", &at);
    out_.agents.push_back(std::move(a));
    agent_ = &out_.agents.back();
    expect_sym("{");
    bool have_init = false;
    while (!is_sym("}")) {
        const Tok& st = peek();
        if (is_word("var")) {
            take();
            agent_->vars.push_back(var_decl(agent_->name, false));
        } else if (is_word("loc")) {
            take();
            while (true) {
                const Tok& lat = peek();
                auto l = ident();
                if (agent_->location_index(l) >= 0) fail("location '" + l + "' declared twice", &lat);
                agent_->locations.push_back(l);
                if (!is_sym(",")) break;
                take();
            }
            expect_sym(";");
        } else if (is_word("init")) {
            take();
            if (have_init) fail("second init clause", &st);
            const Tok& lat = peek();
            const int li = agent_->location_index(ident());
            if (li < 0) fail("unknown location '" + lat.text + "'", &lat);
            agent_->initial = li;
            have_init = true;
            expect_sym(";");
        } else if (is_word("edge")) {
            take();
            edge_stmt(*agent_);
        } else {
            fail("unknown agent clause" + found());
        }
    }
    expect_sym("}");
    if (agent_->locations.empty()) fail("agent '" + agent_->name + "' declares no locations", &at);
    if (!have_init) fail("agent '" + agent_->name + "' has no init clause", &at);
    agent_ = nullptr;
}

Update Parser::assignments() {
    Update u;
    while (true) {
        const Tok& at = peek();
        auto lhs = prefix();
        if (lhs->kind != ExprKind::Var && lhs->kind != ExprKind::Index) fail("assignment target must be a variable", &at);
        if (binders_.count(lhs->name)) fail("cannot assign to select binder", &at);
        if (lhs->kind == ExprKind::Var && type_of(lhs, at) == Ty::Array) fail("whole-array assignment", &at);
        expect_sym(":=");
        const Tok& rat = peek();
        auto rhs = expr(1);
        require(rhs, Ty::Int, rat, "right-hand side");
        u.push_back({lhs, rhs});
        // ';' continues the sequence only when another assignment follows
        if (is_sym(";") && peek(1).kind == TK::Ident && !keywords().count(peek(1).text)) {
            take();
            continue;
        }
        return u;
    }
}

void Parser::edge_stmt(AgentGraph& a) {
    const Tok& at = peek();
    Edge e;
    const Tok& sat = peek();
    e.src = a.location_index(ident());
    if (e.src < 0) fail("unknown location '" + sat.text + "'", &sat);
    expect_sym("->");
    const Tok& dat = peek();
    e.dst = a.location_index(ident());
    if (e.dst < 0) fail("unknown location '" + dat.text + "'", &dat);

    std::optional<std::size_t> guard_pos, update_pos;
    std::vector<std::pair<std::string, std::pair<int, int>>> selects;
    bool have_sync = false;
    // Selects may follow the clauses that use them, so those clauses are
    // re-parsed once the binder set is known.
    while (!is_sym(";")) {
        const Tok& ct = peek();
        if (is_sym("[")) {
            if (guard_pos) fail("second guard", &ct);
            take();
            guard_pos = pos_;
            int depth = 0;
            while (!(depth == 0 && is_sym("]"))) {
                if (peek().kind == TK::End) fail("unterminated guard", &ct);
                if (is_sym("[") || is_sym("(")) ++depth;
                if (is_sym("]") || is_sym(")")) --depth;
                take();
            }
            take();
        } else if (is_word("sync")) {
            if (have_sync) fail("second sync clause", &ct);
            take();
            expect_sym("(");
            const Tok& cat = peek();
            e.sync.channel = ident();
            if (std::find(out_.channels.begin(), out_.channels.end(), e.sync.channel) == out_.channels.end())
                fail("undeclared channel '" + e.sync.channel + "'", &cat);
            if (is_sym("!")) {
                e.sync.kind = SyncKind::Send;
            } else if (is_sym("?")) {
                e.sync.kind = SyncKind::Recv;
            } else {
                fail("expected '!' or '?'" + found());
            }
            take();
            expect_sym(")");
            have_sync = true;
        } else if (is_word("do")) {
            if (update_pos) fail("second do clause", &ct);
            take();
            update_pos = pos_;
            // assignments end at a ';' not followed by a non-keyword identifier, or at a clause keyword
            int depth = 0;
            while (true) {
                if (peek().kind == TK::End) fail("unterminated update", &ct);
                if (depth == 0 && (is_word("select") || is_word("sync"))) break;
                if (depth == 0 && is_sym(";") &&
                    !(peek(1).kind == TK::Ident && !keywords().count(peek(1).text)))
                    break;
                if (is_sym("(") || is_sym("[")) ++depth;
                if (is_sym(")") || is_sym("]")) --depth;
                take();
            }
        } else if (is_word("select")) {
            take();
            while (true) {
                const Tok& bat = peek();
                const std::string b = ident();
                if (lookup_var(b) || lookup_var(a.name + "." + b) || consts_.count(b) || tables_.count(b))
                    fail("select binder '" + b + "' shadows a declaration", &bat);
                for (const auto& s : selects)
                    if (s.first == b) fail("select binder '" + b + "' repeated", &bat);
                expect_sym(":");
                const Tok& rat = peek();
                auto r = range();
                if (r.first > r.second) fail("empty select range", &rat);
                selects.push_back({b, r});
                if (!is_sym(",")) break;
                take();
            }
        } else {
            fail("unknown edge clause" + found());
        }
    }
    const std::size_t end_pos = pos_;
    for (const auto& s : selects) binders_.insert(s.first);
    if (guard_pos) {
        pos_ = *guard_pos;
        const Tok& gat = peek();
        e.guard = expr(1);
        require(e.guard, Ty::Bool, gat, "guard");
        if (!is_sym("]")) fail("expected ']'" + found());
    }
    if (update_pos) {
        pos_ = *update_pos;
        e.update = assignments();
    }
    binders_.clear();
    pos_ = end_pos;
    expect_sym(";");
    (void)at;

    if (selects.empty()) {
        a.edges.push_back(std::move(e));
        return;
    }
    std::vector<std::pair<int, int>> ranges;
    for (const auto& s : selects) ranges.push_back(s.second);
    for_each_valuation(ranges, [&](const std::vector<int>& vals) {
        std::vector<Binding> bs;
        for (std::size_t i = 0; i < selects.size(); ++i) bs.push_back({selects[i].first, 0, {vals[i]}, false});
        Edge c = e;
        c.guard = substitute(e.guard, bs);
        c.update = substitute(e.update, bs);
        a.edges.push_back(std::move(c));
    });
}

int Parser::infix_prec(BinOp& op, bool& is_imply, bool& is_until) const {
    is_imply = is_until = false;
    const Tok& t = peek();
    if (t.kind == TK::Ident) {
        if (t.text == "imply" && formula_) {
            is_imply = true;
            return 1;
        }
        if (t.text == "U" && formula_ && until_depth_ > 0) {
            is_until = true;
            return 0;
        }
        return -1;
    }
    if (t.kind != TK::Sym) return -1;
    static const std::map<std::string, std::pair<BinOp, int>> table = {
        {"||", {BinOp::Or, 2}}, {"&&", {BinOp::And, 3}}, {"==", {BinOp::Eq, 4}}, {"!=", {BinOp::Ne, 4}},
        {"<", {BinOp::Lt, 5}},  {"<=", {BinOp::Le, 5}},  {">", {BinOp::Gt, 5}},  {">=", {BinOp::Ge, 5}},
        {"+", {BinOp::Add, 6}}, {"-", {BinOp::Sub, 6}},  {"*", {BinOp::Mul, 7}}, {"/", {BinOp::Div, 7}},
        {"%", {BinOp::Mod, 7}},
    };
    auto it = table.find(t.text);
    if (it == table.end()) return -1;
    op = it->second.first;
    return it->second.second;
}

ExprPtr Parser::expr(int min_prec) {
    auto lhs = prefix();
    while (true) {
        BinOp op{};
        bool imply = false, until = false;
        const int p = infix_prec(op, imply, until);
        if (p < min_prec || p < 0) return lhs;
        if (until) return lhs;  // handled by the A( ... ) prefix
        take();
        if (imply) {
            auto rhs = expr(p);  // right associative
            lhs = ex::disj(ex::lnot(lhs), rhs);
        } else {
            auto rhs = expr(p + 1);
            lhs = ex::bin(op, lhs, rhs);
        }
    }
}

ExprPtr Parser::name_ref(const Tok& at) {
    std::string name = take().text;
    if (name == "true") return ex::truth();
    if (name == "false") return ex::falsity();
    if (keywords().count(name)) fail("unexpected keyword '" + name + "'", &at);
    bool qualified = false;
    if (is_sym(".") && peek(1).kind == TK::Ident) {
        take();
        name += "." + take().text;
        qualified = true;
    }
    if (!qualified) {
        if (binders_.count(name)) return ex::var(name);
        if (auto it = consts_.find(name); it != consts_.end()) return ex::integer(it->second);
    }
    // table application
    if (is_sym("(")) {
        TablePtr t;
        if (auto it = tables_.find(name); it != tables_.end()) t = it->second;
        if (!t && ctx_)
            for (const auto& ct : ctx_->tables)
                if (ct->name == name) t = ct;
        if (!t) fail("unknown table '" + name + "'", &at);
        take();
        std::vector<ExprPtr> args;
        while (true) {
            const Tok& aat = peek();
            auto a = expr(1);
            require(a, Ty::Int, aat, "table argument");
            args.push_back(a);
            if (!is_sym(",")) break;
            take();
        }
        expect_sym(")");
        if (args.size() != t->args.size()) fail("wrong number of table arguments", &at);
        return ex::lookup(t, std::move(args));
    }

    std::string fq;
    bool is_loc = false;
    if (agent_ && !qualified) {
        if (lookup_var(agent_->name + "." + name)) fq = agent_->name + "." + name;
        else if (lookup_var(name)) fq = name;
    } else if (qualified) {
        if (lookup_var(name)) {
            fq = name;
        } else if (formula_) {
            const auto dot = name.find('.');
            const MASGraph& m = ctx_ ? *ctx_ : out_;
            const int ai = m.agent_index(name.substr(0, dot));
            if (ai >= 0 && m.agents[static_cast<std::size_t>(ai)].location_index(name.substr(dot + 1)) >= 0) {
                fq = name;
                is_loc = true;
            }
        }
    } else {
        const MASGraph& m = ctx_ ? *ctx_ : out_;
        std::vector<std::pair<std::string, bool>> hits;
        if (lookup_var(name)) hits.push_back({name, false});
        for (const auto& a : m.agents) {
            if (lookup_var(a.name + "." + name)) hits.push_back({a.name + "." + name, false});
            if (formula_ && a.location_index(name) >= 0) hits.push_back({a.name + "." + name, true});
        }
        if (hits.size() > 1) fail("ambiguous name '" + name + "'; qualify it as Agent." + name, &at);
        if (hits.size() == 1) {
            fq = hits[0].first;
            is_loc = hits[0].second;
        }
    }
    if (fq.empty()) fail("undeclared identifier '" + name + "'", &at);
    if (is_loc) return ex::loc_ref(fq);
    if (is_sym("[")) {
        const auto* d = lookup_var(fq);
        if (!d->is_array()) fail("'" + name + "' is not an array", &at);
        take();
        const Tok& iat = peek();
        auto idx = expr(1);
        require(idx, Ty::Int, iat, "index");
        expect_sym("]");
        return ex::index(fq, idx);
    }
    return ex::var(fq);
}

ExprPtr Parser::prefix() {
    const Tok& at = peek();
    if (at.kind == TK::Int) {
        take();
        return ex::integer(at.value);
    }
    if (at.kind == TK::Ident) {
        if (formula_ && at.text == "A") {
            if (is_sym("[", 1) && is_sym("]", 2)) {
                pos_ += 3;
                return ex::temporal(ExprKind::TempAG, {expr(1)});
            }
            if (is_sym("<", 1) && is_sym(">", 2)) {
                pos_ += 3;
                return ex::temporal(ExprKind::TempAF, {expr(1)});
            }
            if (is_sym("(", 1)) {
                pos_ += 2;
                ++until_depth_;
                auto l = expr(1);
                if (!is_word("U")) fail("expected 'U' inside A( ... )" + found());
                take();
                auto r = expr(1);
                --until_depth_;
                expect_sym(")");
                return ex::temporal(ExprKind::TempAU, {l, r});
            }
        }
        if (formula_ && at.text == "AX") {
            take();
            return ex::temporal(ExprKind::TempAX, {expr(1)});
        }
        return name_ref(at);
    }
    if (at.kind == TK::Sym) {
        if (at.text == "(") {
            take();
            const int saved = until_depth_;
            until_depth_ = 0;
            auto e = expr(1);
            until_depth_ = saved;
            expect_sym(")");
            return e;
        }
        if (at.text == "[") {
            take();
            std::vector<ExprPtr> elems;
            while (true) {
                elems.push_back(expr(1));
                if (!is_sym(",")) break;
                take();
            }
            expect_sym("]");
            ExprNode n;
            n.kind = ExprKind::ArrayLit;
            n.kids = std::move(elems);
            return std::make_shared<const ExprNode>(std::move(n));
        }
        if (at.text == "-") {
            take();
            return ex::neg(prefix());
        }
        if (at.text == "!") {
            take();
            return ex::lnot(prefix());
        }
    }
    fail("expected an expression" + found());
}

Ty Parser::type_of(const ExprPtr& e, const Tok& at) const {
    switch (e->kind) {
        case ExprKind::Int: return Ty::Int;
        case ExprKind::Bool: return Ty::Bool;
        case ExprKind::Var: {
            if (binders_.count(e->name)) return Ty::Int;
            const auto* d = lookup_var(e->name);
            return d && d->is_array() ? Ty::Array : Ty::Int;
        }
        case ExprKind::Index:
        case ExprKind::Lookup: return Ty::Int;
        case ExprKind::ArrayLit:
            for (const auto& k : e->kids) require(k, Ty::Int, at, "array element");
            return Ty::Array;
        case ExprKind::Neg: require(e->kids[0], Ty::Int, at, "operand of '-'"); return Ty::Int;
        case ExprKind::Not: require(e->kids[0], Ty::Bool, at, "operand of '!'"); return Ty::Bool;
        case ExprKind::LocRef:
        case ExprKind::TempAG:
        case ExprKind::TempAF:
        case ExprKind::TempAX:
            for (const auto& k : e->kids) require(k, Ty::Bool, at, "temporal operand");
            return Ty::Bool;
        case ExprKind::TempAU:
            for (const auto& k : e->kids) require(k, Ty::Bool, at, "temporal operand");
            return Ty::Bool;
        case ExprKind::Binary: {
            const auto a = type_of(e->kids[0], at);
            const auto b = type_of(e->kids[1], at);
            if (e->op == BinOp::And || e->op == BinOp::Or) {
                if (a != Ty::Bool || b != Ty::Bool) fail("type mismatch: boolean operator on non-boolean operands", &at);
                return Ty::Bool;
            }
            if (e->op == BinOp::Eq || e->op == BinOp::Ne) {
                if (a != b) fail("type mismatch: comparison of different types", &at);
                if (a == Ty::Array) {
                    auto len = [&](const ExprPtr& x) {
                        return x->kind == ExprKind::ArrayLit ? static_cast<int>(x->kids.size())
                                                             : lookup_var(x->name)->length;
                    };
                    if (len(e->kids[0]) != len(e->kids[1])) fail("type mismatch: array lengths differ", &at);
                }
                return Ty::Bool;
            }
            if (a != Ty::Int || b != Ty::Int) fail("type mismatch: arithmetic on non-integer operands", &at);
            return is_comparison(e->op) ? Ty::Bool : Ty::Int;
        }
    }
    return Ty::Int;
}

void Parser::require(const ExprPtr& e, Ty want, const Tok& at, const char* what) const {
    if (type_of(e, at) != want)
        fail(std::string("type mismatch: ") + what + " must be " + (want == Ty::Bool ? "boolean" : "an integer"), &at);
}

MASGraph Parser::parse_system() {
    system_block();
    while (peek().kind != TK::End) agent_block();
    if (out_.agents.empty()) fail("a system needs at least one agent");
    if (init_pos_) {
        pos_ = *init_pos_;
        const Tok& at = peek();
        auto g0 = expr(1);
        require(g0, Ty::Bool, at, "init condition");
        out_.g0 = g0;
        // Solve for the mentioned variables; the rest keep their declared defaults.
        std::vector<VarDecl> over;
        for (const auto& n : vars_of(g0)) over.push_back(*lookup_var(n));
        std::vector<std::string> diag;
        const auto sols = sat(g0, over, &diag);
        if (sols.size() != 1)
            fail(sols.empty() ? "unsatisfiable initial condition" : "non-unique initial evaluation", &at);
        const Layout lay(over);
        for (const auto& d : lay.vars()) {
            const int off = lay.offset(d.name);
            std::vector<int> vals(sols[0].begin() + off, sols[0].begin() + off + d.cells());
            for (auto& v : out_.shared)
                if (v.name == d.name) v.init = vals;
            for (auto& a : out_.agents)
                for (auto& v : a.vars)
                    if (v.name == d.name) v.init = vals;
        }
    }
    try {
        validate(out_);
    } catch (const ValidationError& e) {
        throw ParseError(1, 1, e.what());
    }
    return std::move(out_);
}

ExprPtr Parser::parse_standalone(bool formula) {
    formula_ = formula;
    const Tok& at = peek();
    auto e = expr(1);
    if (peek().kind != TK::End) fail("trailing input" + found());
    require(e, Ty::Bool, at, formula ? "formula" : "guard");
    return e;
}

}  // namespace

MASGraph parse_mas(const std::string& text) { return Parser(lex(text), nullptr).parse_system(); }

MASGraph load_mas(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_mas(ss.str());
}

ExprPtr parse_guard(const std::string& text, const MASGraph& mas) {
    return Parser(lex(text), &mas).parse_standalone(false);
}

ExprPtr parse_formula_expr(const std::string& text, const MASGraph& mas) {
    return Parser(lex(text), &mas).parse_standalone(true);
}

}  // namespace masabs
