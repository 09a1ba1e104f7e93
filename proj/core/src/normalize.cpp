#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "hamext/expr.hpp"

namespace hamext {

namespace {

struct Factor {
    Expr atom;
    Rational exp;
};

using Monomial = std::vector<Factor>;

int compare_mono(const Monomial &a, const Monomial &b)
{
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (int c = compare(a[i].atom, b[i].atom); c != 0) {
            return c;
        }
        if (a[i].exp != b[i].exp) {
            return a[i].exp > b[i].exp ? -1 : 1;
        }
    }
    if (a.size() != b.size()) {
        return a.size() > b.size() ? -1 : 1;
    }
    return 0;
}

struct MonoLess {
    bool operator()(const Monomial &a, const Monomial &b) const { return compare_mono(a, b) < 0; }
};

using Poly = std::map<Monomial, Number, MonoLess>;

Rational radd(const Rational &a, const Rational &b)
{
    auto r = Rational::add(a, b);
    if (!r) {
        throw std::overflow_error("exponent overflow");
    }
    return *r;
}

Rational rmul(const Rational &a, const Rational &b)
{
    auto r = Rational::mul(a, b);
    if (!r) {
        throw std::overflow_error("exponent overflow");
    }
    return *r;
}

Poly constant_poly(const Number &c)
{
    Poly p;
    if (!c.is_zero()) {
        p.emplace(Monomial{}, c);
    }
    return p;
}

Poly atom_poly(const Expr &atom, const Rational &exp, const Number &c = Number(1))
{
    Poly p;
    p.emplace(Monomial{{atom, exp}}, c);
    return p;
}

void add_term(Poly &p, Monomial m, const Number &c)
{
    if (c.is_zero()) {
        return;
    }
    auto it = p.find(m);
    if (it == p.end()) {
        p.emplace(std::move(m), c);
        return;
    }
    it->second = it->second + c;
    if (it->second.is_zero()) {
        p.erase(it);
    }
}

Monomial mul_mono(const Monomial &a, const Monomial &b)
{
    Monomial out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size()) {
            out.push_back(a[i++]);
        } else if (i == a.size()) {
            out.push_back(b[j++]);
        } else {
            const int c = compare(a[i].atom, b[j].atom);
            if (c < 0) {
                out.push_back(a[i++]);
            } else if (c > 0) {
                out.push_back(b[j++]);
            } else {
                Rational e = radd(a[i].exp, b[j].exp);
                if (!e.is_zero()) {
                    out.push_back({a[i].atom, e});
                }
                ++i;
                ++j;
            }
        }
    }
    return out;
}

Poly to_poly(const Expr &e);
Expr rebuild(const Poly &p);
Poly mul(const Poly &a, const Poly &b);
Poly scale(const Poly &p, const Number &c);

std::optional<std::int64_t> integer_root(std::int64_t v, std::int64_t k)
{
    if (v < 0) {
        return std::nullopt;
    }
    const auto guess = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(v), 1.0 / static_cast<double>(k))));
    for (std::int64_t r = std::max<std::int64_t>(0, guess - 1); r <= guess + 1; ++r) {
        __int128 acc = 1;
        for (std::int64_t i = 0; i < k && acc <= v; ++i) {
            acc *= r;
        }
        if (acc == v) {
            return r;
        }
    }
    return std::nullopt;
}

// c^q for a numeric base; stays symbolic (a Num atom) when no exact value exists.
Poly number_pow(const Number &c, const Rational &q)
{
    if (c.is_zero()) {
        if (q.num() < 0) {
            throw PoleError(fmt::format("0^({})", q.to_string()));
        }
        return {};
    }
    if (q.is_integer()) {
        return constant_poly(c.pow(q.num()));
    }
    if (!c.is_exact()) {
        return constant_poly(Number::inexact(std::pow(c.value(), q.to_double())));
    }
    auto r = c.as_rational();
    if (!r) {
        return atom_poly(Expr(c), q);
    }
    if (r->num() < 0) {
        if (q.den() != 2) {
            return atom_poly(Expr(c), q);
        }
        // principal branch: (-a)^(p/2) = i^p a^(p/2)
        Poly mag = number_pow(Number(r->negated()), q);
        return mul(constant_poly(Number::imaginary_unit().pow(((q.num() % 4) + 4) % 4)), mag);
    }
    auto n = integer_root(r->num(), q.den());
    auto d = integer_root(r->den(), q.den());
    if (n && d) {
        return constant_poly(Number(Rational(*n, *d)).pow(q.num()));
    }
    // pull small perfect powers out of the base: 8^(1/2) = 2*2^(1/2)
    std::int64_t num = r->num();
    std::int64_t den = r->den();
    std::int64_t out_num = 1;
    std::int64_t out_den = 1;
    for (std::int64_t f = 2; f <= 97; ++f) {
        std::int64_t fk = 1;
        for (std::int64_t i = 0; i < q.den(); ++i) {
            fk *= f;
        }
        while (num % fk == 0) {
            num /= fk;
            out_num *= f;
        }
        while (den % fk == 0) {
            den /= fk;
            out_den *= f;
        }
    }
    if (out_num == 1 && out_den == 1) {
        return atom_poly(Expr(c), q);
    }
    return mul(constant_poly(Number(Rational(out_num, out_den)).pow(q.num())),
               number_pow(Number(Rational(num, den)), q));
}

bool repeated_number_atoms(const Monomial &m)
{
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = i + 1; j < m.size() && m[i].atom.is_number(); ++j) {
            if (m[j].atom.is_number() && m[j].exp == m[i].exp) {
                return true;
            }
        }
    }
    return false;
}

// a^q * b^q -> (a*b)^q for numeric atoms
Monomial merge_number_atoms(const Monomial &m, Poly &coef)
{
    Monomial rest;
    std::vector<bool> used(m.size(), false);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (used[i]) {
            continue;
        }
        if (!m[i].atom.is_number()) {
            rest.push_back(m[i]);
            continue;
        }
        Number base = m[i].atom.number();
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            if (!used[j] && m[j].atom.is_number() && m[j].exp == m[i].exp) {
                base = base * m[j].atom.number();
                used[j] = true;
            }
        }
        coef = mul(coef, number_pow(base, m[i].exp));
    }
    return rest;
}

bool needs_fixup(const Factor &f)
{
    if (f.atom.op() == Op::add) {
        return f.exp.is_integer() && f.exp.num() > 0;
    }
    if (f.atom.is_number()) {
        return !(f.exp.num() > 0 && f.exp.num() < f.exp.den());
    }
    return false;
}

Poly fixup(Poly p)
{
    bool any = false;
    for (const auto &[m, c] : p) {
        if (repeated_number_atoms(m)) {
            any = true;
            break;
        }
        for (const auto &f : m) {
            if (needs_fixup(f)) {
                any = true;
                break;
            }
        }
        if (any) {
            break;
        }
    }
    if (!any) {
        return p;
    }
    Poly out;
    for (const auto &[m0, c] : p) {
        Monomial rest;
        std::vector<Poly> expand;
        Monomial m = m0;
        if (repeated_number_atoms(m0)) {
            Poly merged = constant_poly(Number(1));
            m = merge_number_atoms(m0, merged);
            expand.push_back(std::move(merged));
        }
        for (const auto &f : m) {
            if (!needs_fixup(f)) {
                rest.push_back(f);
            } else if (f.atom.op() == Op::add) {
                Poly base = to_poly(f.atom);
                Poly acc = constant_poly(Number(1));
                for (std::int64_t k = 0; k < f.exp.num(); ++k) {
                    acc = mul(acc, base);
                }
                expand.push_back(std::move(acc));
            } else {
                // split c^(k + r) with 0 <= r < 1
                std::int64_t k = f.exp.num() / f.exp.den();
                if (f.exp.num() < 0 && f.exp.num() % f.exp.den() != 0) {
                    --k;
                }
                Rational r = radd(f.exp, Rational(-k));
                Poly part = constant_poly(f.atom.number().pow(k));
                if (!r.is_zero()) {
                    part = mul(part, atom_poly(f.atom, r));
                }
                expand.push_back(std::move(part));
            }
        }
        Poly term;
        term.emplace(std::move(rest), c);
        for (const auto &x : expand) {
            term = mul(term, x);
        }
        for (auto &[tm, tc] : term) {
            add_term(out, tm, tc);
        }
    }
    return out;
}

Poly mul(const Poly &a, const Poly &b)
{
    if (a.empty() || b.empty()) {
        return {};
    }
    // both operands are already in normal form, so a constant factor only rescales
    if (a.size() == 1 && a.begin()->first.empty()) {
        return scale(b, a.begin()->second);
    }
    if (b.size() == 1 && b.begin()->first.empty()) {
        return scale(a, b.begin()->second);
    }
    Poly out;
    for (const auto &[ma, ca] : a) {
        for (const auto &[mb, cb] : b) {
            add_term(out, mul_mono(ma, mb), ca * cb);
        }
    }
    return fixup(std::move(out));
}

Poly add(Poly a, const Poly &b)
{
    for (const auto &[m, c] : b) {
        add_term(a, m, c);
    }
    return a;
}

Poly scale(const Poly &p, const Number &c)
{
    if (c.is_one()) {
        return p;
    }
    Poly out;
    for (const auto &[m, x] : p) {
        add_term(out, m, x * c);
    }
    return out;
}

Poly mono_pow(const Monomial &m, const Rational &q)
{
    Monomial out;
    out.reserve(m.size());
    for (const auto &f : m) {
        out.push_back({f.atom, rmul(f.exp, q)});
    }
    Poly p;
    p.emplace(std::move(out), Number(1));
    return fixup(std::move(p));
}

Poly reduce_squares(const Poly &p);

Poly poly_pow(const Poly &base, const Rational &q)
{
    if (base.empty()) {
        if (q.num() < 0) {
            throw PoleError(fmt::format("0^({})", q.to_string()));
        }
        return {};
    }
    if (q.is_integer() && q.num() > 0) {
        Poly acc = constant_poly(Number(1));
        Poly sq = base;
        std::int64_t n = q.num();
        while (n > 0) {
            if ((n & 1) != 0) {
                acc = mul(acc, sq);
            }
            n >>= 1;
            if (n > 0) {
                sq = mul(sq, sq);
            }
        }
        return acc;
    }
    if (base.size() == 1) {
        const auto &[m, c] = *base.begin();
        return mul(number_pow(c, q), mono_pow(m, q));
    }
    if (!q.is_integer()) {
        // radicands in a Pythagorean-reduced form, so sqrt(sin^2*cos^2 + sin^2*sin^2) is sin
        Poly r = reduce_squares(base);
        if (r.size() <= 1) {
            return poly_pow(r, q);
        }
        return atom_poly(rebuild(r), q);
    }
    // content: leading coefficient and the monomial gcd
    const Number lead = base.begin()->second;
    std::map<Expr, Rational, ExprLess> lowest;
    for (const auto &[m, c] : base) {
        for (const auto &f : m) {
            lowest.emplace(f.atom, Rational(0));
        }
    }
    bool first = true;
    for (const auto &[m, c] : base) {
        for (auto &[a, e] : lowest) {
            auto it = std::find_if(m.begin(), m.end(), [&](const Factor &f) { return f.atom == a; });
            const Rational here = it == m.end() ? Rational(0) : it->exp;
            e = first ? here : std::min(e, here);
        }
        first = false;
    }
    Monomial g;
    Monomial g_inv;
    for (const auto &[a, e] : lowest) {
        if (!e.is_zero()) {
            g.push_back({a, e});
            g_inv.push_back({a, e.negated()});
        }
    }
    Poly inv_g;
    inv_g.emplace(g_inv, Number(1) / lead);
    Poly monic = mul(base, inv_g);
    Poly content;
    content.emplace(g, Number(1));
    return mul(mul(number_pow(lead, q), poly_pow(content, q)), atom_poly(rebuild(monic), q));
}

bool leading_negative(const Poly &p) { return !p.empty() && p.begin()->second.is_negative_real(); }


Poly func_poly(Fn fn, const std::vector<Expr> &args)
{
    if (fn == Fn::sk || fn == Fn::ck) {
        Poly kappa = to_poly(args[0]);
        Poly x = to_poly(args[1]);
        if (x.empty()) {
            return fn == Fn::sk ? Poly{} : constant_poly(Number(1));
        }
        if (kappa.empty()) {
            return fn == Fn::sk ? x : constant_poly(Number(1));
        }
        // kappa = +-s^2 with rational s: plain trigonometric or hyperbolic functions
        if (kappa.size() == 1 && kappa.begin()->first.empty()) {
            if (auto r = kappa.begin()->second.as_rational()) {
                const bool hyperbolic = r->num() < 0;
                const Rational mag = hyperbolic ? r->negated() : *r;
                auto sn = integer_root(mag.num(), 2);
                auto sd = integer_root(mag.den(), 2);
                if (sn && sd) {
                    const Number s(Rational(*sn, *sd));
                    const Expr arg = rebuild(scale(x, s));
                    if (fn == Fn::ck) {
                        return func_poly(hyperbolic ? Fn::cosh : Fn::cos, {arg});
                    }
                    return scale(func_poly(hyperbolic ? Fn::sinh : Fn::sin, {arg}), Number(1) / s);
                }
            }
        }
        Number sign(1);
        if (leading_negative(x)) {
            x = scale(x, Number(-1));
            if (fn == Fn::sk) {
                sign = Number(-1);
            }
        }
        return atom_poly(Expr::function(fn, {rebuild(kappa), rebuild(x)}), Rational(1), sign);
    }
    Poly x = to_poly(args[0]);
    const bool odd = fn == Fn::sin || fn == Fn::sinh;
    if (x.empty()) {
        return odd ? Poly{} : constant_poly(Number(1));
    }
    Number sign(1);
    if (fn != Fn::exp && leading_negative(x)) {
        x = scale(x, Number(-1));
        if (odd) {
            sign = Number(-1);
        }
    }
    return atom_poly(Expr::function(fn, {rebuild(x)}), Rational(1), sign);
}

// Atoms recur across the terms of large expressions.
struct PolyCache {
    struct Hash {
        std::size_t operator()(const Expr &e) const { return e.hash(); }
    };
    struct Equal {
        bool operator()(const Expr &a, const Expr &b) const { return a.same_node(b) || compare(a, b) == 0; }
    };
    static constexpr std::size_t limit = 1 << 16;
    std::unordered_map<Expr, Poly, Hash, Equal> entries;

    template <class F> Poly get(const Expr &e, F &&compute)
    {
        if (auto it = entries.find(e); it != entries.end()) {
            return it->second;
        }
        Poly p = compute();
        if (entries.size() >= limit) {
            entries.clear();
        }
        entries.emplace(e, p);
        return p;
    }
};

thread_local PolyCache poly_cache;

Poly to_poly_uncached(const Expr &e)
{
    switch (e.op()) {
    case Op::num: return constant_poly(e.number());
    case Op::sym: return atom_poly(e, Rational(1));
    case Op::func: return func_poly(e.fn(), e.args());
    case Op::pow: return poly_pow(to_poly(e.args().front()), e.exponent());
    case Op::mul: {
        Poly acc = constant_poly(Number(1));
        for (const auto &f : e.args()) {
            acc = mul(acc, to_poly(f));
            if (acc.empty()) {
                break;
            }
        }
        return acc;
    }
    case Op::add: {
        Poly acc;
        for (const auto &t : e.args()) {
            acc = add(std::move(acc), to_poly(t));
        }
        return acc;
    }
    }
    return {};
}

Poly to_poly(const Expr &e)
{
    switch (e.op()) {
    case Op::num:
    case Op::sym: return to_poly_uncached(e);
    default: return poly_cache.get(e, [&] { return to_poly_uncached(e); });
    }
}

Expr term_expr(const Monomial &m, const Number &c)
{
    std::vector<Expr> factors;
    factors.reserve(m.size() + 1);
    factors.emplace_back(c);
    for (const auto &f : m) {
        factors.push_back(f.exp == Rational(1) ? f.atom : Expr::power(f.atom, f.exp));
    }
    return make_product(std::move(factors));
}

Expr rebuild(const Poly &p)
{
    std::vector<Expr> terms;
    terms.reserve(p.size());
    for (const auto &[m, c] : p) {
        terms.push_back(term_expr(m, c));
    }
    return make_sum(std::move(terms));
}

bool contains_any(const Expr &e, const std::vector<SymbolId> &ids)
{
    if (e.op() == Op::sym) {
        return std::find(ids.begin(), ids.end(), e.symbol_id()) != ids.end();
    }
    return std::any_of(e.args().begin(), e.args().end(), [&](const Expr &a) { return contains_any(a, ids); });
}

// multiplies by the product of the most negative powers of every atom
Poly clear_denominators(const Poly &p)
{
    std::map<Expr, Rational, ExprLess> lowest;
    for (const auto &[m, c] : p) {
        for (const auto &f : m) {
            if (f.exp < Rational(0)) {
                auto it = lowest.find(f.atom);
                if (it == lowest.end() || f.exp < it->second) {
                    lowest[f.atom] = f.exp;
                }
            }
        }
    }
    if (lowest.empty()) {
        return p;
    }
    Monomial d;
    for (const auto &[a, e] : lowest) {
        d.push_back({a, e.negated()});
    }
    Poly dp;
    dp.emplace(std::move(d), Number(1));
    return to_poly(rebuild(mul(p, dp)));
}

// R^(n + f) -> expanded R^n times R^f for a sum R, so roots of one radicand line up
Poly split_root_powers(const Poly &p)
{
    Poly out;
    for (const auto &[m, c] : p) {
        Poly term = constant_poly(c);
        for (const auto &f : m) {
            if (f.atom.op() == Op::add && !f.exp.is_integer() && f.exp > Rational(1)) {
                const std::int64_t whole = f.exp.num() / f.exp.den();
                term = mul(term, to_poly(pow(f.atom, Rational(whole))));
                term = mul(term, atom_poly(f.atom, Rational(f.exp.num() - whole * f.exp.den(), f.exp.den())));
            } else {
                term = mul(term, atom_poly(f.atom, f.exp));
            }
        }
        out = add(std::move(out), term);
    }
    return out;
}

bool has_negative_power(const Poly &p)
{
    return std::any_of(p.begin(), p.end(), [](const auto &t) {
        return std::any_of(t.first.begin(), t.first.end(), [](const Factor &f) { return f.exp < Rational(0); });
    });
}

// cos^2 = 1 - sin^2, cosh^2 = 1 + sinh^2, Ck^2 = 1 - kappa Sk^2
Poly reduce_squares(const Poly &p)
{
    Poly out;
    for (const auto &[m, c] : p) {
        Poly term = constant_poly(c);
        for (const auto &f : m) {
            const Expr &a = f.atom;
            const bool even_fn = a.op() == Op::func && (a.fn() == Fn::cos || a.fn() == Fn::cosh || a.fn() == Fn::ck);
            if (!even_fn || !f.exp.is_integer() || f.exp.num() < 2) {
                term = mul(term, atom_poly(a, f.exp));
                continue;
            }
            Expr square;
            switch (a.fn()) {
            case Fn::cos: square = Expr(1) - pow(sin(a.args()[0]), 2); break;
            case Fn::cosh: square = Expr(1) + pow(sinh(a.args()[0]), 2); break;
            default: square = Expr(1) - a.args()[0] * pow(s_kappa(a.args()[0], a.args()[1]), 2); break;
            }
            const std::int64_t n = f.exp.num();
            term = mul(term, to_poly(pow(square, n / 2)));
            if (n % 2 != 0) {
                term = mul(term, atom_poly(a, Rational(1)));
            }
        }
        out = add(std::move(out), term);
    }
    return out;
}

} // namespace

Expr normalize(const Expr &e) { return rebuild(to_poly(e)); }

std::vector<Expr> denominator_atoms(const Expr &e)
{
    std::set<Expr, ExprLess> seen;
    for (const auto &[m, c] : to_poly(e)) {
        for (const auto &f : m) {
            if (f.exp < Rational(0) && !f.atom.is_number()) {
                seen.insert(f.atom);
            }
        }
    }
    return {seen.begin(), seen.end()};
}

bool is_identically_zero(const Expr &e)
{
    Poly p = to_poly(e);
    for (int round = 0; round < 8 && !p.empty() && has_negative_power(p); ++round) {
        p = clear_denominators(p);
    }
    return reduce_squares(split_root_powers(p)).empty();
}

std::map<std::vector<int>, Expr> collect_powers(const Expr &e, const std::vector<SymbolId> &symbols)
{
    std::map<std::vector<int>, Poly> groups;
    for (const auto &[m, c] : to_poly(e)) {
        std::vector<int> powers(symbols.size(), 0);
        Monomial rest;
        for (const auto &f : m) {
            if (f.atom.op() == Op::sym) {
                auto it = std::find(symbols.begin(), symbols.end(), f.atom.symbol_id());
                if (it != symbols.end()) {
                    if (!f.exp.is_integer() || f.exp.num() < 0) {
                        throw std::invalid_argument(
                            fmt::format("'{}' appears with power {}", f.atom.name(), f.exp.to_string()));
                    }
                    powers[static_cast<std::size_t>(it - symbols.begin())] = static_cast<int>(f.exp.num());
                    continue;
                }
            } else if (contains_any(f.atom, symbols)) {
                throw std::invalid_argument(fmt::format("not polynomial in the requested symbols: {}", to_string(f.atom)));
            }
            rest.push_back(f);
        }
        add_term(groups[powers], std::move(rest), c);
    }
    std::map<std::vector<int>, Expr> out;
    for (const auto &[k, p] : groups) {
        if (!p.empty()) {
            out.emplace(k, rebuild(p));
        }
    }
    return out;
}

bool equivalent(const Expr &a, const Expr &b, std::uint64_t seed, int points, double tol)
{
    const Expr na = normalize(a);
    const Expr nb = normalize(b);
    if (na == nb) {
        return true;
    }
    std::set<std::string> names = free_symbols(na);
    names.merge(free_symbols(nb));
    names.erase("pi");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> re(0.25, 1.25);
    std::uniform_real_distribution<double> im(-0.5, 0.5);
    int valid = 0;
    for (int attempt = 0; attempt < 4 * points && valid < points; ++attempt) {
        Binding bind;
        for (const auto &n : names) {
            bind.set(n, cplx(re(rng), im(rng)));
        }
        try {
            const cplx va = eval(na, bind);
            const cplx vb = eval(nb, bind);
            const double scale_ab = eval_magnitude(na, bind) + eval_magnitude(nb, bind);
            if (!std::isfinite(std::abs(va)) || !std::isfinite(std::abs(vb))) {
                continue;
            }
            if (std::abs(va - vb) > tol * std::max(scale_ab, 1e-300)) {
                return false;
            }
            ++valid;
        } catch (const EvalError &) {
            continue;
        }
    }
    return valid >= points / 2 && valid > 0;
}

} // namespace hamext
