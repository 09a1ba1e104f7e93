#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hamext/expr.hpp"

namespace hamext {

PoleError::PoleError(const std::string &subexpr)
    : EvalError(fmt::format("pole at {}", subexpr)), sub_(subexpr)
{
}

UnboundSymbol::UnboundSymbol(const std::string &name) : EvalError(fmt::format("unbound symbol '{}'", name)) {}

Binding &Binding::set(SymbolId id, cplx value)
{
    if (id >= values_.size()) {
        values_.resize(id + 1);
        bound_.resize(id + 1, false);
    }
    values_[id] = value;
    bound_[id] = true;
    return *this;
}

Binding &Binding::set(std::string_view name, cplx value) { return set(intern_symbol(name), value); }

std::optional<cplx> Binding::get(SymbolId id) const
{
    if (id < values_.size() && bound_[id]) {
        return values_[id];
    }
    return std::nullopt;
}

std::optional<cplx> Binding::get(std::string_view name) const { return get(intern_symbol(name)); }

namespace {

Expr derive(const Expr &e, SymbolId x)
{
    switch (e.op()) {
    case Op::num: return Expr(0);
    case Op::sym: return Expr(e.symbol_id() == x ? 1 : 0);
    case Op::add: {
        std::vector<Expr> terms;
        for (const auto &t : e.args()) {
            Expr d = derive(t, x);
            if (!d.is_zero()) {
                terms.push_back(std::move(d));
            }
        }
        return make_sum(std::move(terms));
    }
    case Op::mul: {
        const auto &f = e.args();
        std::vector<Expr> terms;
        for (std::size_t i = 0; i < f.size(); ++i) {
            Expr d = derive(f[i], x);
            if (d.is_zero()) {
                continue;
            }
            std::vector<Expr> parts;
            parts.reserve(f.size());
            for (std::size_t j = 0; j < f.size(); ++j) {
                parts.push_back(j == i ? d : f[j]);
            }
            terms.push_back(make_product(std::move(parts)));
        }
        return make_sum(std::move(terms));
    }
    case Op::pow: {
        const Expr &b = e.args().front();
        Expr d = derive(b, x);
        if (d.is_zero()) {
            return Expr(0);
        }
        const Rational &q = e.exponent();
        return make_product({Expr(Number(q)), Expr::power(b, *Rational::add(q, Rational(-1))), d});
    }
    case Op::func: {
        const auto &a = e.args();
        if (e.fn() == Fn::sk || e.fn() == Fn::ck) {
            const Expr &k = a[0];
            const Expr &v = a[1];
            const Expr sk = s_kappa(k, v);
            const Expr ck = c_kappa(k, v);
            Expr dv = derive(v, x);
            Expr dk = derive(k, x);
            std::vector<Expr> terms;
            if (e.fn() == Fn::sk) {
                if (!dv.is_zero()) {
                    terms.push_back(ck * dv);
                }
                if (!dk.is_zero()) {
                    terms.push_back((v * ck - sk) / (Expr(2) * k) * dk);
                }
            } else {
                if (!dv.is_zero()) {
                    terms.push_back(-(k * sk) * dv);
                }
                if (!dk.is_zero()) {
                    terms.push_back(-(v * sk) / Expr(2) * dk);
                }
            }
            return make_sum(std::move(terms));
        }
        Expr d = derive(a[0], x);
        if (d.is_zero()) {
            return Expr(0);
        }
        switch (e.fn()) {
        case Fn::sin: return cos(a[0]) * d;
        case Fn::cos: return -sin(a[0]) * d;
        case Fn::sinh: return cosh(a[0]) * d;
        case Fn::cosh: return sinh(a[0]) * d;
        case Fn::exp: return e * d;
        default: break;
        }
        break;
    }
    }
    return Expr(0);
}

cplx ipow(cplx b, std::int64_t n)
{
    const bool inv = n < 0;
    auto m = static_cast<std::uint64_t>(inv ? -n : n);
    cplx acc(1.0, 0.0);
    while (m > 0) {
        if ((m & 1U) != 0) {
            acc *= b;
        }
        m >>= 1U;
        if (m > 0) {
            b *= b;
        }
    }
    return inv ? 1.0 / acc : acc;
}

cplx eval_sk(cplx k, cplx x)
{
    const cplx z = k * x * x;
    if (std::abs(z) < 1e-6) {
        return x * (1.0 - z / 6.0 + z * z / 120.0 - z * z * z / 5040.0);
    }
    const cplx s = std::sqrt(k);
    return std::sin(s * x) / s;
}

} // namespace

Expr diff(const Expr &e, SymbolId symbol) { return normalize(derive(e, symbol)); }

Expr diff(const Expr &e, std::string_view symbol) { return diff(e, intern_symbol(symbol)); }

cplx eval(const Expr &e, const Binding &b)
{
    switch (e.op()) {
    case Op::num: return e.number().value();
    case Op::sym: {
        if (auto v = b.get(e.symbol_id())) {
            return *v;
        }
        if (e.name() == "pi") {
            return {std::numbers::pi, 0.0};
        }
        throw UnboundSymbol(e.name());
    }
    case Op::add: {
        cplx s(0.0, 0.0);
        for (const auto &t : e.args()) {
            s += eval(t, b);
        }
        return s;
    }
    case Op::mul: {
        cplx s(1.0, 0.0);
        for (const auto &t : e.args()) {
            s *= eval(t, b);
        }
        return s;
    }
    case Op::pow: {
        const cplx base = eval(e.args().front(), b);
        const Rational &q = e.exponent();
        if (base == cplx(0.0, 0.0) && q.num() < 0) {
            throw PoleError(to_string(e));
        }
        if (q.is_integer()) {
            return ipow(base, q.num());
        }
        if (q.den() == 2) {
            return ipow(std::sqrt(base), q.num());
        }
        return std::pow(base, q.to_double());
    }
    case Op::func: {
        const auto &a = e.args();
        switch (e.fn()) {
        case Fn::sin: return std::sin(eval(a[0], b));
        case Fn::cos: return std::cos(eval(a[0], b));
        case Fn::sinh: return std::sinh(eval(a[0], b));
        case Fn::cosh: return std::cosh(eval(a[0], b));
        case Fn::exp: return std::exp(eval(a[0], b));
        case Fn::sk: return eval_sk(eval(a[0], b), eval(a[1], b));
        case Fn::ck: return std::cos(std::sqrt(eval(a[0], b)) * eval(a[1], b));
        }
        break;
    }
    }
    return {0.0, 0.0};
}

double eval_magnitude(const Expr &e, const Binding &b)
{
    if (e.op() != Op::add) {
        return std::abs(eval(e, b));
    }
    double s = 0.0;
    for (const auto &t : e.args()) {
        s += std::abs(eval(t, b));
    }
    return s;
}

} // namespace hamext
