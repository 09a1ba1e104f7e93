#include <algorithm>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "hamext/phasepoly.hpp"

namespace hamext {

SymbolTable PhaseSpace::symbols() const
{
    SymbolTable t;
    for (const auto &q : coords) {
        t.push_back({q, SymbolKind::coordinate});
    }
    for (const auto &p : momenta) {
        t.push_back({p, SymbolKind::momentum});
    }
    return t;
}

PhaseSpacePtr make_phase_space(std::string id, std::vector<std::string> coords, std::vector<std::string> momenta)
{
    if (momenta.empty()) {
        for (const auto &q : coords) {
            momenta.push_back("p_" + q);
        }
    }
    if (momenta.size() != coords.size()) {
        throw std::invalid_argument("coordinate and momentum counts differ");
    }
    auto s = std::make_shared<PhaseSpace>();
    s->id = std::move(id);
    s->coords = std::move(coords);
    s->momenta = std::move(momenta);
    for (const auto &q : s->coords) {
        s->q_ids.push_back(intern_symbol(q));
    }
    for (const auto &p : s->momenta) {
        s->p_ids.push_back(intern_symbol(p));
    }
    return s;
}

namespace {

void check_same(const MomentumPolynomial &a, const MomentumPolynomial &b)
{
    if (a.space() != b.space() && !a.space()->same_as(*b.space())) {
        throw ChartMismatch(fmt::format("phase spaces differ: '{}' vs '{}'", a.space()->id, b.space()->id));
    }
}

// Sums collected products per multi-index and normalizes each once.
std::map<MultiIndex, Expr> finish(std::map<MultiIndex, std::vector<Expr>> &parts)
{
    std::map<MultiIndex, Expr> out;
    for (auto &[k, v] : parts) {
        Expr c = normalize(make_sum(std::move(v)));
        if (!c.is_zero()) {
            out.emplace(k, std::move(c));
        }
    }
    return out;
}

cplx momentum_power(const Binding &pt, const PhaseSpace &s, const MultiIndex &alpha)
{
    cplx v(1.0, 0.0);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] == 0) {
            continue;
        }
        auto p = pt.get(s.p_ids[i]);
        if (!p) {
            throw UnboundSymbol(s.momenta[i]);
        }
        for (int k = 0; k < alpha[i]; ++k) {
            v *= *p;
        }
    }
    return v;
}

} // namespace

MomentumPolynomial::MomentumPolynomial(PhaseSpacePtr space) : space_(std::move(space)) {}

MomentumPolynomial::MomentumPolynomial(PhaseSpacePtr space, std::map<MultiIndex, Expr> terms) : space_(std::move(space))
{
    for (auto &[k, c] : terms) {
        if (k.size() != space_->dim()) {
            throw std::invalid_argument("multi-index length does not match the phase space");
        }
        Expr n = normalize(c);
        if (!n.is_zero()) {
            terms_.emplace(k, std::move(n));
        }
    }
}

MomentumPolynomial MomentumPolynomial::constant(PhaseSpacePtr space, const Expr &c)
{
    const std::size_t n = space->dim();
    return {std::move(space), {{MultiIndex(n, 0), c}}};
}

MomentumPolynomial MomentumPolynomial::momentum(PhaseSpacePtr space, std::size_t i)
{
    MultiIndex k(space->dim(), 0);
    k.at(i) = 1;
    return {std::move(space), {{k, Expr(1)}}};
}

MomentumPolynomial MomentumPolynomial::from_expr(PhaseSpacePtr space, const Expr &e)
{
    auto groups = collect_powers(e, space->p_ids);
    MomentumPolynomial out(std::move(space));
    out.terms_ = std::move(groups);
    return out;
}

Expr MomentumPolynomial::coefficient(const MultiIndex &alpha) const
{
    auto it = terms_.find(alpha);
    return it == terms_.end() ? Expr(0) : it->second;
}

int MomentumPolynomial::degree() const
{
    int d = -1;
    for (const auto &[k, c] : terms_) {
        int s = 0;
        for (int x : k) {
            s += x;
        }
        d = std::max(d, s);
    }
    return d;
}

Expr MomentumPolynomial::to_expr() const
{
    std::vector<Expr> terms;
    for (const auto &[k, c] : terms_) {
        std::vector<Expr> f{c};
        for (std::size_t i = 0; i < k.size(); ++i) {
            if (k[i] != 0) {
                f.push_back(pow(Expr::symbol(space_->momenta[i], SymbolKind::momentum), k[i]));
            }
        }
        terms.push_back(make_product(std::move(f)));
    }
    return normalize(make_sum(std::move(terms)));
}

MomentumPolynomial MomentumPolynomial::scaled(const Expr &c) const
{
    MomentumPolynomial out(space_);
    for (const auto &[k, x] : terms_) {
        Expr n = normalize(x * c);
        if (!n.is_zero()) {
            out.terms_.emplace(k, std::move(n));
        }
    }
    return out;
}

MomentumPolynomial MomentumPolynomial::substitute(const std::map<std::string, Expr, std::less<>> &rep) const
{
    MomentumPolynomial out(space_);
    for (const auto &[k, x] : terms_) {
        Expr n = normalize(hamext::substitute(x, rep));
        if (!n.is_zero()) {
            out.terms_.emplace(k, std::move(n));
        }
    }
    return out;
}

MomentumPolynomial MomentumPolynomial::lift(const PhaseSpacePtr &target) const
{
    std::vector<std::size_t> where;
    for (const auto &p : space_->momenta) {
        auto it = std::find(target->momenta.begin(), target->momenta.end(), p);
        if (it == target->momenta.end()) {
            throw ChartMismatch(fmt::format("momentum '{}' missing from '{}'", p, target->id));
        }
        where.push_back(static_cast<std::size_t>(it - target->momenta.begin()));
    }
    MomentumPolynomial out(target);
    for (const auto &[k, c] : terms_) {
        MultiIndex nk(target->dim(), 0);
        for (std::size_t i = 0; i < k.size(); ++i) {
            nk[where[i]] = k[i];
        }
        out.terms_.emplace(std::move(nk), c);
    }
    return out;
}

MomentumPolynomial operator+(const MomentumPolynomial &a, const MomentumPolynomial &b)
{
    check_same(a, b);
    std::map<MultiIndex, std::vector<Expr>> parts;
    for (const auto &[k, c] : a.terms_) {
        parts[k].push_back(c);
    }
    for (const auto &[k, c] : b.terms_) {
        parts[k].push_back(c);
    }
    MomentumPolynomial out(a.space_);
    for (auto &[k, v] : parts) {
        Expr c = v.size() == 1 ? v.front() : normalize(make_sum(std::move(v)));
        if (!c.is_zero()) {
            out.terms_.emplace(k, std::move(c));
        }
    }
    return out;
}

MomentumPolynomial operator-(const MomentumPolynomial &a) { return a.scaled(Expr(-1)); }

MomentumPolynomial operator-(const MomentumPolynomial &a, const MomentumPolynomial &b) { return a + (-b); }

MomentumPolynomial operator*(const MomentumPolynomial &a, const MomentumPolynomial &b)
{
    check_same(a, b);
    std::map<MultiIndex, std::vector<Expr>> parts;
    for (const auto &[ka, ca] : a.terms_) {
        for (const auto &[kb, cb] : b.terms_) {
            MultiIndex k(ka.size());
            for (std::size_t i = 0; i < k.size(); ++i) {
                k[i] = ka[i] + kb[i];
            }
            parts[k].push_back(ca * cb);
        }
    }
    MomentumPolynomial out(a.space_);
    out.terms_ = finish(parts);
    return out;
}

bool operator==(const MomentumPolynomial &a, const MomentumPolynomial &b)
{
    return a.space_->same_as(*b.space_) && a.terms_ == b.terms_;
}

std::string to_string(const MomentumPolynomial &f) { return to_string(f.to_expr()); }

std::ostream &operator<<(std::ostream &os, const MomentumPolynomial &f) { return os << to_string(f); }

MomentumPolynomial diff_q(const MomentumPolynomial &f, std::size_t i)
{
    std::map<MultiIndex, Expr> out;
    const SymbolId q = f.space()->q_ids.at(i);
    for (const auto &[k, c] : f.terms()) {
        Expr d = diff(c, q);
        if (!d.is_zero()) {
            out.emplace(k, std::move(d));
        }
    }
    return {f.space(), std::move(out)};
}

MomentumPolynomial diff_p(const MomentumPolynomial &f, std::size_t i)
{
    std::map<MultiIndex, Expr> out;
    for (const auto &[k, c] : f.terms()) {
        if (k.at(i) == 0) {
            continue;
        }
        MultiIndex nk = k;
        nk[i] -= 1;
        out.emplace(std::move(nk), k[i] == 1 ? c : normalize(Expr(k[i]) * c));
    }
    return {f.space(), std::move(out)};
}

MomentumPolynomial poisson(const MomentumPolynomial &f, const MomentumPolynomial &g)
{
    check_same(f, g);
    const std::size_t n = f.space()->dim();
    std::map<MultiIndex, std::vector<Expr>> parts;
    auto accumulate = [&](const MomentumPolynomial &a, const MomentumPolynomial &b, int sign) {
        for (const auto &[ka, ca] : a.terms()) {
            for (const auto &[kb, cb] : b.terms()) {
                MultiIndex k(n);
                for (std::size_t j = 0; j < n; ++j) {
                    k[j] = ka[j] + kb[j];
                }
                parts[k].push_back(sign > 0 ? ca * cb : make_product({Expr(-1), ca, cb}));
            }
        }
    };
    for (std::size_t i = 0; i < n; ++i) {
        MomentumPolynomial fp = diff_p(f, i);
        if (!fp.is_zero()) {
            MomentumPolynomial gq = diff_q(g, i);
            if (!gq.is_zero()) {
                accumulate(fp, gq, 1);
            }
        }
        MomentumPolynomial gp = diff_p(g, i);
        if (!gp.is_zero()) {
            MomentumPolynomial fq = diff_q(f, i);
            if (!fq.is_zero()) {
                accumulate(fq, gp, -1);
            }
        }
    }
    return {f.space(), finish(parts)};
}

bool symbolically_equal(const MomentumPolynomial &a, const MomentumPolynomial &b)
{
    std::set<MultiIndex> keys;
    for (const auto &[k, c] : a.terms()) {
        keys.insert(k);
    }
    for (const auto &[k, c] : b.terms()) {
        keys.insert(k);
    }
    return std::all_of(keys.begin(), keys.end(), [&](const MultiIndex &k) {
        auto ia = a.terms().find(k);
        auto ib = b.terms().find(k);
        const Expr ca = ia == a.terms().end() ? Expr(0) : ia->second;
        const Expr cb = ib == b.terms().end() ? Expr(0) : ib->second;
        return is_identically_zero(ca - cb);
    });
}

MomentumPolynomial x_apply(const MomentumPolynomial &l, const MomentumPolynomial &f) { return poisson(l, f); }

cplx eval_poly(const MomentumPolynomial &f, const Binding &pt)
{
    cplx s(0.0, 0.0);
    for (const auto &[k, c] : f.terms()) {
        s += eval(c, pt) * momentum_power(pt, *f.space(), k);
    }
    return s;
}

double eval_poly_magnitude(const MomentumPolynomial &f, const Binding &pt)
{
    double s = 0.0;
    for (const auto &[k, c] : f.terms()) {
        s += eval_magnitude(c, pt) * std::abs(momentum_power(pt, *f.space(), k));
    }
    return s;
}

GradientField::GradientField(const MomentumPolynomial &f)
{
    const std::size_t n = f.space()->dim();
    for (std::size_t i = 0; i < n; ++i) {
        parts_.push_back(diff_q(f, i));
    }
    for (std::size_t i = 0; i < n; ++i) {
        parts_.push_back(diff_p(f, i));
    }
}

std::vector<cplx> GradientField::operator()(const Binding &pt) const
{
    std::vector<cplx> out;
    out.reserve(parts_.size());
    for (const auto &p : parts_) {
        out.push_back(eval_poly(p, pt));
    }
    return out;
}

std::vector<cplx> phase_gradient(const MomentumPolynomial &f, const Binding &pt) { return GradientField(f)(pt); }

std::string to_json(const MomentumPolynomial &f, int indent)
{
    nlohmann::ordered_json j;
    j["chart"] = f.space()->id;
    std::vector<std::string> vars = f.space()->coords;
    vars.insert(vars.end(), f.space()->momenta.begin(), f.space()->momenta.end());
    j["vars"] = vars;
    auto terms = nlohmann::ordered_json::array();
    for (const auto &[k, c] : f.terms()) {
        nlohmann::ordered_json t;
        t["powers"] = k;
        t["coeff"] = to_string(c);
        terms.push_back(std::move(t));
    }
    j["terms"] = std::move(terms);
    return j.dump(indent);
}

MomentumPolynomial polynomial_from_json(std::string_view text, const SymbolTable &params)
{
    const auto j = nlohmann::json::parse(text);
    const auto vars = j.at("vars").get<std::vector<std::string>>();
    if (vars.size() % 2 != 0) {
        throw std::invalid_argument("vars must list coordinates then momenta");
    }
    const std::size_t n = vars.size() / 2;
    auto space = make_phase_space(j.at("chart").get<std::string>(), {vars.begin(), vars.begin() + static_cast<long>(n)},
                                  {vars.begin() + static_cast<long>(n), vars.end()});
    SymbolTable table = space->symbols();
    table.insert(table.end(), params.begin(), params.end());
    std::map<MultiIndex, Expr> terms;
    for (const auto &t : j.at("terms")) {
        terms.emplace(t.at("powers").get<MultiIndex>(), parse_expr(t.at("coeff").get<std::string>(), table));
    }
    return {space, std::move(terms)};
}

} // namespace hamext
