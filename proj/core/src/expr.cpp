#include "hamext/expr.hpp"

#include <deque>
#include <functional>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

namespace hamext {

struct Expr::Node {
    Op op = Op::num;
    Fn fn = Fn::sin;
    SymbolKind kind = SymbolKind::parameter;
    SymbolId sym = 0;
    Number num;
    Rational exp;
    std::vector<Expr> args;
    std::size_t hash = 0;
    /// Registry entry of a symbol; names live in a deque and never move.
    const std::string *name = nullptr;
};

namespace {

struct SymbolRegistry {
    std::mutex mutex;
    std::unordered_map<std::string, SymbolId> ids;
    std::deque<std::string> names;
};

SymbolRegistry &registry()
{
    static SymbolRegistry r;
    return r;
}

std::size_t mix(std::size_t h, std::size_t v)
{
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t hash_rational(const Rational &r)
{
    return mix(std::hash<std::int64_t>{}(r.num()), std::hash<std::int64_t>{}(r.den()));
}

std::size_t hash_number(const Number &n)
{
    if (n.is_exact()) {
        return mix(hash_rational(n.re()), hash_rational(n.im()));
    }
    return mix(std::hash<double>{}(n.value().real()), std::hash<double>{}(n.value().imag()));
}

} // namespace

SymbolId intern_symbol(std::string_view name)
{
    auto &r = registry();
    std::lock_guard lock(r.mutex);
    auto it = r.ids.find(std::string(name));
    if (it != r.ids.end()) {
        return it->second;
    }
    const auto id = static_cast<SymbolId>(r.names.size());
    r.names.emplace_back(name);
    r.ids.emplace(std::string(name), id);
    return id;
}

const std::string &symbol_name(SymbolId id)
{
    auto &r = registry();
    std::lock_guard lock(r.mutex);
    return r.names.at(id);
}

std::string_view fn_name(Fn fn)
{
    switch (fn) {
    case Fn::sin: return "sin";
    case Fn::cos: return "cos";
    case Fn::sinh: return "sinh";
    case Fn::cosh: return "cosh";
    case Fn::exp: return "exp";
    case Fn::sk: return "Sk";
    case Fn::ck: return "Ck";
    }
    return "?";
}

Expr Expr::make(Node node)
{
    std::size_t h = std::hash<int>{}(static_cast<int>(node.op));
    switch (node.op) {
    case Op::num: h = mix(h, hash_number(node.num)); break;
    case Op::sym: h = mix(h, node.sym); break;
    case Op::func: h = mix(h, static_cast<std::size_t>(node.fn)); break;
    case Op::pow: h = mix(h, hash_rational(node.exp)); break;
    default: break;
    }
    for (const auto &a : node.args) {
        h = mix(h, a.hash());
    }
    node.hash = h;
    return Expr(std::make_shared<const Node>(std::move(node)));
}

Expr::Expr() : Expr(Number(0)) {}

Expr::Expr(Number n)
{
    Node node;
    node.op = Op::num;
    node.num = std::move(n);
    *this = make(std::move(node));
}

Expr Expr::symbol(std::string_view name, SymbolKind kind)
{
    Node node;
    node.op = Op::sym;
    node.sym = intern_symbol(name);
    node.name = &symbol_name(node.sym);
    node.kind = kind;
    return make(std::move(node));
}

Expr Expr::function(Fn fn, std::vector<Expr> args)
{
    const std::size_t arity = (fn == Fn::sk || fn == Fn::ck) ? 2 : 1;
    if (args.size() != arity) {
        throw std::invalid_argument(fmt::format("{} takes {} argument(s)", fn_name(fn), arity));
    }
    Node node;
    node.op = Op::func;
    node.fn = fn;
    node.args = std::move(args);
    return make(std::move(node));
}

Expr Expr::power(const Expr &base, const Rational &exponent)
{
    Node node;
    node.op = Op::pow;
    node.exp = exponent;
    node.args = {base};
    return make(std::move(node));
}

Op Expr::op() const { return node_->op; }
const Number &Expr::number() const { return node_->num; }
SymbolId Expr::symbol_id() const { return node_->sym; }
const std::string &Expr::name() const { return *node_->name; }
SymbolKind Expr::kind() const { return node_->kind; }
Fn Expr::fn() const { return node_->fn; }
const Rational &Expr::exponent() const { return node_->exp; }
const std::vector<Expr> &Expr::args() const { return node_->args; }
std::size_t Expr::hash() const { return node_->hash; }

Expr make_sum(std::vector<Expr> terms)
{
    std::vector<Expr> flat;
    flat.reserve(terms.size());
    Number constant(0);
    bool has_constant = false;
    for (auto &t : terms) {
        if (t.op() == Op::add) {
            for (const auto &c : t.args()) {
                if (c.is_number()) {
                    constant = constant + c.number();
                    has_constant = true;
                } else {
                    flat.push_back(c);
                }
            }
        } else if (t.is_number()) {
            constant = constant + t.number();
            has_constant = true;
        } else {
            flat.push_back(std::move(t));
        }
    }
    if (has_constant && !constant.is_zero()) {
        flat.emplace_back(constant);
    }
    if (flat.empty()) {
        return Expr(constant);
    }
    if (flat.size() == 1) {
        return flat.front();
    }
    Expr::Node node;
    node.op = Op::add;
    node.args = std::move(flat);
    return Expr::make(std::move(node));
}

Expr make_product(std::vector<Expr> factors)
{
    std::vector<Expr> flat;
    flat.reserve(factors.size() + 1);
    Number coef(1);
    auto push = [&](const Expr &f) {
        if (f.is_number()) {
            coef = coef * f.number();
        } else {
            flat.push_back(f);
        }
    };
    for (const auto &f : factors) {
        if (f.op() == Op::mul) {
            for (const auto &c : f.args()) {
                push(c);
            }
        } else {
            push(f);
        }
    }
    if (coef.is_zero()) {
        return Expr(Number(0));
    }
    if (flat.empty()) {
        return Expr(coef);
    }
    if (flat.size() == 1 && coef.is_one()) {
        return flat.front();
    }
    if (!coef.is_one()) {
        flat.insert(flat.begin(), Expr(coef));
    }
    Expr::Node node;
    node.op = Op::mul;
    node.args = std::move(flat);
    return Expr::make(std::move(node));
}

Expr pow(const Expr &base, const Rational &q)
{
    if (q.is_zero()) {
        return Expr(1);
    }
    if (q == Rational(1)) {
        return base;
    }
    if (base.is_number()) {
        if (base.number().is_one()) {
            return base;
        }
        if (q.is_integer() && !(base.number().is_zero() && q.num() < 0)) {
            return Expr(base.number().pow(q.num()));
        }
        return Expr::power(base, q);
    }
    if (q.is_integer()) {
        if (base.op() == Op::pow) {
            if (auto e = Rational::mul(base.exponent(), q)) {
                return pow(base.args().front(), *e);
            }
        }
        if (base.op() == Op::mul) {
            std::vector<Expr> parts;
            parts.reserve(base.args().size());
            for (const auto &f : base.args()) {
                parts.push_back(pow(f, q));
            }
            return make_product(std::move(parts));
        }
    }
    return Expr::power(base, q);
}

Expr operator+(const Expr &a, const Expr &b) { return make_sum({a, b}); }
Expr operator-(const Expr &a) { return make_product({Expr(-1), a}); }
Expr operator-(const Expr &a, const Expr &b) { return make_sum({a, -b}); }
Expr operator*(const Expr &a, const Expr &b) { return make_product({a, b}); }
Expr operator/(const Expr &a, const Expr &b) { return make_product({a, pow(b, Rational(-1))}); }

Expr sqrt(const Expr &x) { return pow(x, Rational(1, 2)); }
Expr sin(const Expr &x) { return Expr::function(Fn::sin, {x}); }
Expr cos(const Expr &x) { return Expr::function(Fn::cos, {x}); }
Expr sinh(const Expr &x) { return Expr::function(Fn::sinh, {x}); }
Expr cosh(const Expr &x) { return Expr::function(Fn::cosh, {x}); }
Expr exp(const Expr &x) { return Expr::function(Fn::exp, {x}); }
Expr s_kappa(const Expr &kappa, const Expr &x) { return Expr::function(Fn::sk, {kappa, x}); }
Expr c_kappa(const Expr &kappa, const Expr &x) { return Expr::function(Fn::ck, {kappa, x}); }

int compare(const Expr &a, const Expr &b)
{
    if (a.same_node(b)) {
        return 0;
    }
    if (a.op() != b.op()) {
        return static_cast<int>(a.op()) < static_cast<int>(b.op()) ? -1 : 1;
    }
    switch (a.op()) {
    case Op::num: return compare(a.number(), b.number());
    case Op::sym: {
        if (a.symbol_id() == b.symbol_id()) {
            return 0;
        }
        const int c = a.name().compare(b.name());
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case Op::func:
        if (a.fn() != b.fn()) {
            return static_cast<int>(a.fn()) < static_cast<int>(b.fn()) ? -1 : 1;
        }
        break;
    case Op::pow:
        if (int c = compare(a.args()[0], b.args()[0]); c != 0) {
            return c;
        }
        if (a.exponent() != b.exponent()) {
            return a.exponent() < b.exponent() ? -1 : 1;
        }
        return 0;
    default: break;
    }
    const auto &x = a.args();
    const auto &y = b.args();
    const std::size_t n = std::min(x.size(), y.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (int c = compare(x[i], y[i]); c != 0) {
            return c;
        }
    }
    if (x.size() != y.size()) {
        return x.size() < y.size() ? -1 : 1;
    }
    return 0;
}

bool operator==(const Expr &a, const Expr &b)
{
    return a.same_node(b) || (a.hash() == b.hash() && compare(a, b) == 0);
}

// ---------------------------------------------------------------------------
// Printer

namespace {

std::string print(const Expr &e);

std::string exponent_text(const Rational &q)
{
    if (q.is_integer()) {
        return q.num() < 0 ? fmt::format("({})", q.num()) : std::to_string(q.num());
    }
    return fmt::format("({})", q.to_string());
}

bool is_plain_base(const Expr &b)
{
    if (b.op() == Op::sym || b.op() == Op::func) {
        return true;
    }
    if (b.is_number()) {
        auto r = b.number().as_rational();
        return r && r->is_integer() && r->num() >= 0;
    }
    return false;
}

// Prints base^q for q > 0 as a factor that can follow '*' or '/'.
std::string print_positive_power(const Expr &base, const Rational &q)
{
    if (q == Rational(1, 2)) {
        return fmt::format("sqrt({})", print(base));
    }
    const std::string b = is_plain_base(base) ? print(base) : "(" + print(base) + ")";
    if (q == Rational(1)) {
        return b;
    }
    return b + "^" + exponent_text(q);
}

std::string coefficient_text(const Number &c)
{
    if (auto r = c.as_rational()) {
        return r->is_integer() ? r->to_string() : "(" + r->to_string() + ")";
    }
    std::string s = c.to_string();
    if (s.front() != '(' && s.find("*i") != std::string::npos) {
        return "(" + s + ")";
    }
    if (s == "i" || s == "-i") {
        return "(" + s + ")";
    }
    return s;
}

std::string join(const std::vector<std::string> &parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += parts[i];
    }
    return out;
}

std::string print_product(const Number &coef, const std::vector<Expr> &factors)
{
    std::vector<std::string> num;
    std::vector<std::string> den;
    for (const auto &f : factors) {
        if (f.op() == Op::pow && f.exponent().num() < 0) {
            den.push_back(print_positive_power(f.args()[0], f.exponent().negated()));
        } else if (f.op() == Op::pow) {
            num.push_back(print_positive_power(f.args()[0], f.exponent()));
        } else if (f.op() == Op::add) {
            num.push_back("(" + print(f) + ")");
        } else {
            num.push_back(print(f));
        }
    }
    std::string out;
    std::string cs;
    if (coef.is_negative_real()) {
        out = "-";
        const Number pos = -coef;
        if (!pos.is_one()) {
            cs = coefficient_text(pos);
        }
    } else if (!coef.is_one()) {
        cs = coefficient_text(coef);
    }
    const std::string head = join(num, "*");
    if (!cs.empty()) {
        out += cs;
        if (!head.empty()) {
            out += "*" + head;
        }
    } else {
        out += head.empty() ? "1" : head;
    }
    if (!den.empty()) {
        out += "/";
        out += den.size() == 1 ? den.front() : "(" + join(den, "*") + ")";
    }
    return out;
}

std::string print(const Expr &e)
{
    switch (e.op()) {
    case Op::num: return e.number().to_string();
    case Op::sym: return e.name();
    case Op::func: {
        std::vector<std::string> parts;
        for (const auto &a : e.args()) {
            parts.push_back(print(a));
        }
        return fmt::format("{}({})", fn_name(e.fn()), join(parts, ", "));
    }
    case Op::pow:
        if (e.exponent().num() < 0) {
            return print_product(Number(1), {e});
        }
        return print_positive_power(e.args()[0], e.exponent());
    case Op::mul: {
        Number coef(1);
        std::vector<Expr> factors;
        for (const auto &f : e.args()) {
            if (f.is_number()) {
                coef = coef * f.number();
            } else {
                factors.push_back(f);
            }
        }
        return print_product(coef, factors);
    }
    case Op::add: {
        std::string out;
        bool first = true;
        for (const auto &t : e.args()) {
            std::string s = print(t);
            if (first) {
                out = s;
                first = false;
            } else if (!s.empty() && s.front() == '-') {
                out += " - " + s.substr(1);
            } else {
                out += " + " + s;
            }
        }
        return out;
    }
    }
    return "?";
}

} // namespace

std::string to_string(const Expr &e) { return print(e); }

std::ostream &operator<<(std::ostream &os, const Expr &e) { return os << to_string(e); }

// ---------------------------------------------------------------------------
// Tree utilities

Expr substitute(const Expr &e, const std::map<std::string, Expr, std::less<>> &rep)
{
    switch (e.op()) {
    case Op::num: return e;
    case Op::sym: {
        auto it = rep.find(e.name());
        return it == rep.end() ? e : it->second;
    }
    case Op::func: {
        std::vector<Expr> args;
        for (const auto &a : e.args()) {
            args.push_back(substitute(a, rep));
        }
        return Expr::function(e.fn(), std::move(args));
    }
    case Op::pow: return pow(substitute(e.args()[0], rep), e.exponent());
    case Op::mul: {
        std::vector<Expr> f;
        for (const auto &a : e.args()) {
            f.push_back(substitute(a, rep));
        }
        return make_product(std::move(f));
    }
    case Op::add: {
        std::vector<Expr> t;
        for (const auto &a : e.args()) {
            t.push_back(substitute(a, rep));
        }
        return make_sum(std::move(t));
    }
    }
    return e;
}

namespace {
void collect_symbols(const Expr &e, std::set<std::string> &out)
{
    if (e.op() == Op::sym) {
        out.insert(e.name());
        return;
    }
    for (const auto &a : e.args()) {
        collect_symbols(a, out);
    }
}
} // namespace

std::set<std::string> free_symbols(const Expr &e)
{
    std::set<std::string> out;
    collect_symbols(e, out);
    return out;
}

bool depends_on(const Expr &e, std::string_view symbol)
{
    if (e.op() == Op::sym) {
        return e.name() == symbol;
    }
    for (const auto &a : e.args()) {
        if (depends_on(a, symbol)) {
            return true;
        }
    }
    return false;
}

std::size_t tree_size(const Expr &e)
{
    std::size_t n = 1;
    for (const auto &a : e.args()) {
        n += tree_size(a);
    }
    return n;
}

} // namespace hamext
