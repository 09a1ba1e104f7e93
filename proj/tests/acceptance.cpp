// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <set>

#include <fmt/format.h>

#include "hamext/catalog.hpp"

using namespace hamext;

namespace {

const Catalog &catalog()
{
    static const Catalog c = load_catalog(HAMEXT_TEST_CATALOG);
    return c;
}

struct Outcome {
    bool pass = true;
    std::string detail;
    std::string first_failure;

    void fail(const std::string &why)
    {
        if (std::getenv("ACCEPTANCE_VERBOSE") != nullptr) {
            fmt::print(stderr, "  failure: {}\n", why);
        }
        if (pass) {
            first_failure = why;
        }
        pass = false;
    }
};

struct Case {
    std::string label;
    const SystemEntry *entry = nullptr;
    Instance inst;
    Expr g;
};

std::optional<Case> make_case(const SystemEntry &e, const Constraint *c, int m, std::uint64_t seed, bool exact)
{
    DrawOptions d;
    d.constraint = c;
    d.seed = seed;
    d.exact = exact;
    ParamValues values;
    try {
        values = draw_parameters(e, m, d);
    } catch (const ConstraintViolation &) {
        return std::nullopt;
    }
    Case out;
    out.label = fmt::format("{}/{} m={}", e.id, c != nullptr ? c->name : "generic", m);
    out.entry = &e;
    out.inst = instantiate(e, values, m);
    const auto ns = instance_nullspace(out.inst, seed);
    if (ns.dim() == 0) {
        return std::nullopt;
    }
    const auto a = g_basis(e.chart, m);
    Expr g(0);
    for (int k = 0; k < ns.dim(); ++k) {
        g += a.combine(ns.readable.col(k));
    }
    out.g = normalize(g);
    return out;
}

/// One case per constraint of every entry, plus a generic draw where the table
/// predicts a nonzero generic nullspace.
std::vector<Case> catalog_cases(int m, bool exact, Outcome &o)
{
    std::vector<Case> out;
    for (const auto &e : catalog().entries) {
        std::vector<const Constraint *> cs;
        for (const auto &c : e.constraints) {
            cs.push_back(&c);
        }
        if (e.generic_dim > 0) {
            cs.push_back(nullptr);
        }
        for (const Constraint *c : cs) {
            auto k = make_case(e, c, m, 1000 + static_cast<std::uint64_t>(m), exact);
            if (!k) {
                o.fail(fmt::format("{}/{} m={}: no compatible G", e.id, c != nullptr ? c->name : "generic", m));
                continue;
            }
            out.push_back(std::move(*k));
        }
    }
    return out;
}

/// Per-case timing on stderr when ACCEPTANCE_VERBOSE is set.
struct Trace {
    std::string label;
    std::chrono::steady_clock::time_point start;
    explicit Trace(std::string l) : label(std::move(l)), start(std::chrono::steady_clock::now()) {}
    Trace(const Trace &) = delete;
    Trace &operator=(const Trace &) = delete;
    ~Trace()
    {
        if (std::getenv("ACCEPTANCE_VERBOSE") != nullptr) {
            fmt::print(stderr, "  {} {:.2f}s\n", label,
                       std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        }
    }
};

/// One case per constraint with G taken from the table's span (exact, no nullspace).
std::vector<Case> table_cases(int m, Outcome &o)
{
    std::vector<Case> out;
    for (const auto &e : catalog().entries) {
        for (const auto &c : e.constraints) {
            DrawOptions d;
            d.constraint = &c;
            d.seed = 1000 + static_cast<std::uint64_t>(m);
            d.exact = true;
            Case k;
            k.label = fmt::format("{}/{} m={}", e.id, c.name, m);
            k.entry = &e;
            try {
                k.inst = instantiate(e, draw_parameters(e, m, d), m);
            } catch (const ConstraintViolation &) {
                o.fail(k.label + ": constraint cannot be met");
                continue;
            }
            std::map<std::string, Expr, std::less<>> rep;
            for (const auto &p : e.params) {
                rep.emplace(p, Expr(k.inst.values.at(p)));
            }
            rep.emplace("m", Expr(m));
            rep.emplace("L0", k.inst.L0);
            Expr g(0);
            for (const auto &x : c.expected_g) {
                g += substitute(x, rep);
            }
            k.g = normalize(g);
            out.push_back(std::move(k));
        }
    }
    return out;
}

ExtendedSystem extend_case(const Case &k, bool closed = false)
{
    return extend(k.entry->chart, k.inst.L, k.inst.spec(), k.g, k.inst.integrals, "u", closed);
}

SymbolTable with(SymbolTable t, std::initializer_list<const char *> params)
{
    for (const char *p : params) {
        t.push_back({p, SymbolKind::parameter});
    }
    return t;
}

MomentumPolynomial poly(const PhaseSpacePtr &s, const std::string &text, const SymbolTable &t)
{
    return MomentumPolynomial::from_expr(s, parse_expr(text, t));
}

Outcome criterion1()
{
    Outcome o;
    int checked = 0;
    {
        const Chart e2 = euclidean_chart({"x", "y"});
        const auto t = with(e2.symbols(), {"a3", "g1", "g2"});
        const auto spec = ExtensionSpec::flat_default(4, parse_expr("a3/4", t));
        const auto ext = extend(e2, e2.hamiltonian(parse_expr("a3*(x^2+y^2)", t)), spec, parse_expr("g1*x+g2*y", t));
        const auto tt = with(ext.space->symbols(), {"a3", "g1", "g2"});
        const std::string G = "(g1*x+g2*y)";
        const std::string P = "(g1*p_x+g2*p_y)";
        const auto reference = poly(ext.space,
                                G + "*p_u^4 - u*p_u^3*" + P + " - (3/4)*a3*" + G + "*u^2*p_u^2 + (a3/8)*u^3*p_u*" + P +
                                    " + (a3^2/64)*" + G + "*u^4",
                                tt);
        ++checked;
        if (!(ext.F() == reference) || !(first_integral_closed(spec, ext.L, ext.G, 4) == reference)) {
            o.fail("isotropic U^4G differs from the reference polynomial");
        }
    }
    const Chart e3 = euclidean_chart({"x1", "x2", "x3"});
    for (int m : {2, 3}) {
        const auto t = with(e3.symbols(), {"k", "L0", "A", "x10", "x20", "x30"});
        const Expr v = parse_expr(
            fmt::format("{}*L0*((x1+x10)^2+(x2+x20)^2+(x3+x30)^2) + k*(1/(x1-x2)^2+1/(x1-x3)^2+1/(x2-x3)^2)", m), t);
        ExtensionSpec spec;
        spec.m = m;
        spec.A = parse_expr("A", t);
        spec.L0 = parse_expr("L0", t);
        const auto ext = extend(e3, e3.hamiltonian(v), spec, parse_expr("x10+x20+x30+x1+x2+x3", t));
        const auto tt = with(ext.space->symbols(), {"k", "L0", "A", "x10", "x20", "x30"});
        const std::string G = "(x10+x20+x30+x1+x2+x3)";
        const std::string P = "(p_x1+p_x2+p_x3)";
        const std::string text = m == 2 ? G + "*p_u^2 - 2*A*u*p_u*" + P + " - 4*A^2*L0*" + G + "*u^2"
                                        : G + "*p_u^3 - 3*A*u*p_u^2*" + P + " - 18*A^2*L0*" + G + "*u^2*p_u + 6*A^3*L0*u^3*" + P;
        ++checked;
        if (!(ext.F() == poly(ext.space, text, tt)) || !(first_integral_closed(spec, ext.L, ext.G, m) == ext.F())) {
            o.fail(fmt::format("Calogero U^{}G differs from the reference polynomial", m));
        }
    }
    o.detail = fmt::format("{} reference polynomials compared term by term", checked);
    return o;
}

double relative_gap(const MomentumPolynomial &a, const MomentumPolynomial &b, const Binding &pt)
{
    const double scale = eval_poly_magnitude(a, pt) + eval_poly_magnitude(b, pt);
    return std::abs(eval_poly(a, pt) - eval_poly(b, pt)) / (scale > 0 ? scale : 1.0);
}

Outcome criterion2()
{
    Outcome o;
    int symbolic = 0;
    int via_identities = 0;
    int pointwise = 0;
    double worst = 0.0;
    for (int m = 1; m <= 10; ++m) {
        for (const auto &k : table_cases(m, o)) {
            const Trace trace(k.label);
            const auto ext = extend_case(k);
            const auto closed = first_integral_closed(ext.spec, ext.L, ext.G, m);
            if (m <= 6) {
                ++symbolic;
                if (closed == ext.F()) {
                    continue;
                }
                ++via_identities;
                if (!symbolically_equal(closed, ext.F())) {
                    o.fail(k.label + ": closed form and iteration differ symbolically");
                }
                continue;
            }
            ++pointwise;
            Sampler s(extended_sampler_config(ext, 77 + static_cast<std::uint64_t>(m), k.inst.complex()));
            for (int i = 0; i < 50; ++i) {
                const Binding pt = draw_phase_point(s, *ext.space, k.inst.chart_params);
                const double r = relative_gap(closed, ext.F(), pt);
                worst = std::max(worst, r);
                if (!(r < 1e-10)) {
                    o.fail(fmt::format("{}: pointwise gap {:.3g}", k.label, r));
                    break;
                }
            }
        }
    }
    o.detail = fmt::format("{} extensions identical for m<=6 ({} after trig/denominator reduction), {} within {:.2g} at "
                           "50 points for m=7..10",
                           symbolic, via_identities, pointwise, worst);
    return o;
}

Outcome criterion3()
{
    Outcome o;
    int count = 0;
    double worst = 0.0;
    std::set<std::string> systems;
    for (int m = 1; m <= 5; ++m) {
        for (const auto &k : table_cases(m, o)) {
            const auto ext = extend_case(k);
            Sampler s(extended_sampler_config(ext, 300 + static_cast<std::uint64_t>(m), k.inst.complex()));
            const double r = bracket_residual_max(ext.H, ext.F(), s, 100, k.inst.chart_params);
            worst = std::max(worst, r);
            ++count;
            systems.insert(k.entry->id);
            if (!(r < 1e-9)) {
                o.fail(fmt::format("{}: |{{H, U^mG}}| = {:.3g}", k.label, r));
            }
        }
    }
    int chains = 0;
    std::vector<std::vector<int>> all;
    for (int len = 1; len <= 3; ++len) {
        std::vector<int> c(static_cast<std::size_t>(len), 1);
        while (true) {
            all.push_back(c);
            std::size_t i = 0;
            while (i < c.size() && c[i] == 4) {
                c[i++] = 1;
            }
            if (i == c.size()) {
                break;
            }
            ++c[i];
        }
    }
    for (const auto &c : all) {
        const auto chain = iterate_extend(Expr(1), c);
        Sampler s(chain.chart.sampler_config(500 + static_cast<std::uint64_t>(chains)));
        for (const auto &i : chain.integrals) {
            const double r = bracket_residual_max(chain.H, i.f, s, 100);
            worst = std::max(worst, r);
            if (!(r < 1e-9)) {
                std::string ms;
                for (int m : c) {
                    ms += fmt::format("{}", m);
                }
                o.fail(fmt::format("chain {}: |{{H, {}}}| = {:.3g}", ms, i.name, r));
            }
        }
        ++chains;
    }
    o.detail = fmt::format("{} table/catalog extensions over {} systems (m=1..5) and {} oscillator chains up to n=4, "
                           "max residual {:.2g}",
                           count, systems.size(), chains, worst);
    return o;
}

Outcome criterion4()
{
    Outcome o;
    ScanOptions opt;
    int rows = 0;
    for (const char *family : {"E2", "S2"}) {
        opt.off_draws = std::string(family) == "S2" ? 10 : 3;
        for (const auto &r : scan_tables(catalog(), family, opt)) {
            ++rows;
            const std::string label = fmt::format("{}/{}", r.entry, r.constraint);
            if (!r.matches) {
                o.fail(fmt::format("{}: dim {} (table {}), cosine {:.3g}", label, r.dim, r.expected_dim, r.cosine));
            }
            if (r.kind == "on" && !r.extensible) {
                o.fail(label + ": on-constraint extension fails the bracket test");
            }
            if ((r.entry == "S6" || r.entry == "S8") && r.dim != 0) {
                o.fail(label + ": nonzero nullspace");
            }
            const auto &e = catalog().find(r.entry);
            if (e.chart.family == ChartFamily::euclidean && !e.harmonic && r.dim != 0) {
                o.fail(label + ": nonzero nullspace without a harmonic term");
            }
        }
    }
    // anisotropic oscillator: moving L0 off a3 - m L0 = 0 / 4 a3 - m L0 = 0 kills the nullspace
    const auto &e2 = catalog().find("E2");
    int controls = 0;
    for (int m : {1, 2, 3}) {
        for (const auto &[a2, l0] : {std::pair{Number(0), Number::rational(1, m)}, std::pair{Number(1), Number::rational(4, m)}}) {
            ParamValues v{{"a1", Number::rational(1, 3)}, {"a2", a2}, {"a3", Number(1)}, {"L0", l0}};
            const int on = instance_nullspace(instantiate(e2, v, m)).dim();
            v["L0"] = l0 * Number::rational(11, 10);
            const int off = instance_nullspace(instantiate(e2, v, m)).dim();
            ++controls;
            if (on != 1 || off != 0) {
                o.fail(fmt::format("E2 m={} L0={}: dim {} on, {} off", m, l0.to_string(), on, off));
            }
        }
    }
    o.detail = fmt::format("{} scan rows agree with the tables, {} anisotropic on/off controls", rows, controls);
    return o;
}

Outcome criterion5()
{
    Outcome o;
    const Chart s2 = sphere_chart();
    const auto t = s2.symbols();
    const Expr X = parse_expr("sin(theta)*cos(phi)", t);
    const Expr Y = parse_expr("sin(theta)*sin(phi)", t);
    const Expr Z = parse_expr("cos(theta)", t);
    const std::vector<Expr> basis{Expr(1), X, Y, Z, X * X, Y * Y, Z * Z, X * Y, X * Z, Y * Z};
    std::string dims;
    auto check = [&](const Chart &c, const std::vector<Expr> &b, const Expr &mc, int expected, int constants,
                     const std::string &name) {
        const int d = hessian_solution_dim(c, b, mc) - constants;
        dims += fmt::format("{}{}: {}", dims.empty() ? "" : ", ", name, d);
        if (d != expected) {
            o.fail(fmt::format("{}: dimension {} (expected {})", name, d, expected));
        }
    };
    check(s2, basis, Expr(1), 3, 0, "S2 mc=1");
    check(s2, basis, Expr(2), 0, 0, "S2 mc=2");
    check(s2, basis, Expr(Number::rational(1, 2)), 0, 0, "S2 mc=1/2");
    check(s2, basis, Expr(-1), 0, 0, "S2 mc=-1");
    check(s2, basis, Expr(0), 0, 1, "S2 mc=0 (no constants)");
    const Chart e2 = euclidean_chart({"x", "y"});
    std::vector<Expr> polys;
    for (const char *s : {"1", "x", "y", "x^2", "x*y", "y^2"}) {
        polys.push_back(parse_expr(s, e2.symbols()));
    }
    check(e2, polys, Expr(0), 3, 0, "E2 mc=0");
    o.detail = dims;
    return o;
}

Outcome criterion6()
{
    Outcome o;
    std::string ranks;
    const std::vector<std::pair<std::string, std::string>> targets{
        {"E1", "i"}, {"E2", "iv"}, {"E2", "v"}, {"E3", "i"}, {"S9", "vi"}, {"S9", "v"}, {"calogero3", "harmonic"}};
    for (const auto &[id, cname] : targets) {
        const auto &e = catalog().find(id);
        for (int m : {2, 3}) {
            const auto k = make_case(e, e.constraint(cname), m, 600 + static_cast<std::uint64_t>(m), false);
            if (!k) {
                o.fail(fmt::format("{}/{} m={}: no compatible G", id, cname, m));
                continue;
            }
            const auto ext = extend_case(*k);
            std::vector<MomentumPolynomial> fs;
            for (const auto &i : ext.integrals) {
                fs.push_back(i.f);
            }
            Sampler s(extended_sampler_config(ext, 700 + static_cast<std::uint64_t>(m), k->inst.complex()));
            const auto r = independence_rank(fs, s, 50, k->inst.chart_params);
            const int expected = static_cast<int>(2 * (e.chart.dim() + 1) - 1);
            if (m == 2) {
                ranks += fmt::format("{}{} {}", ranks.empty() ? "" : ", ", id, r.rank);
            }
            if (r.rank != expected || !(r.gap > 1e6)) {
                o.fail(fmt::format("{} m={}: rank {} (expected {}), gap {:.3g}", k->label, m, r.rank, expected, r.gap));
            }
        }
    }
    o.detail = "ranks at m=2: " + ranks + "; gaps > 1e6";
    return o;
}

struct DriftCase {
    std::string label;
    MomentumPolynomial H{nullptr};
    std::vector<MomentumPolynomial> integrals;
    SamplerConfig sampler;
    PhaseSpacePtr space;
    Binding params;
};

Outcome criterion7()
{
    Outcome o;
    std::vector<DriftCase> cases;
    for (const std::vector<int> &c : {std::vector<int>{2}, std::vector<int>{2, 3}}) {
        const auto chain = iterate_extend(Expr(1), c);
        DriftCase d{fmt::format("chain n={}", c.size() + 1), chain.H, {}, chain.chart.sampler_config(41), chain.chart.space, {}};
        for (const auto &i : chain.integrals) {
            d.integrals.push_back(i.f);
        }
        cases.push_back(std::move(d));
    }
    const auto add_case = [&](const std::string &label, const Case &k, std::optional<int> kappa_sign) {
        auto spec = k.inst.spec();
        if (kappa_sign) {
            spec.kappa = Expr(*kappa_sign * k.inst.m * k.inst.m);
        }
        const auto ext = extend(k.entry->chart, k.inst.L, spec, k.g, k.inst.integrals);
        DriftCase d{label, ext.H, {}, extended_sampler_config(ext, 43, false), ext.space, k.inst.chart_params};
        for (const auto &i : ext.integrals) {
            d.integrals.push_back(i.f);
        }
        cases.push_back(std::move(d));
    };
    const auto &cal = catalog().find("calogero3");
    if (auto k = make_case(cal, cal.constraint("harmonic"), 2, 42, false)) {
        add_case("calogero3 m=2", *k, std::nullopt);
    } else {
        o.fail("calogero3: no compatible G");
    }
    const auto &s9 = catalog().find("S9");
    for (int m : {2, 3}) {
        if (auto k = make_case(s9, s9.constraint("vi"), m, 44, false)) {
            add_case(fmt::format("S9 H_{}^+", m), *k, 1);
            add_case(fmt::format("S9 H_{}^-", m), *k, -1);
            add_case(fmt::format("S9 H_{}^0", m), *k, 0);
        } else {
            o.fail("S9/vi: no compatible G");
        }
    }
    double worst = 0.0;
    double worst_ratio = std::numeric_limits<double>::infinity();
    for (const auto &d : cases) {
        Sampler s(d.sampler);
        const Binding b = draw_phase_point(s, *d.space, d.params);
        State y;
        for (auto id : d.space->q_ids) {
            y.push_back(b.get(id)->real());
        }
        for (auto id : d.space->p_ids) {
            y.push_back(b.get(id)->real());
        }
        try {
            const auto coarse = conservation_drift(d.H, d.integrals, y, 10.0, 1e-10, d.params);
            const auto fine = conservation_drift(d.H, d.integrals, y, 10.0, 1e-11, d.params);
            const double dc = *std::max_element(coarse.drift.begin(), coarse.drift.end());
            const double df = *std::max_element(fine.drift.begin(), fine.drift.end());
            const double ratio = df > 0 ? dc / df : std::numeric_limits<double>::infinity();
            worst = std::max(worst, dc);
            worst_ratio = std::min(worst_ratio, ratio);
            if (std::getenv("ACCEPTANCE_VERBOSE") != nullptr) {
                fmt::print(stderr, "  {}: {:.3g} -> {:.3g} ({:.4g}x)\n", d.label, dc, df, ratio);
            }
            if (!(dc < 1e-6)) {
                o.fail(fmt::format("{}: drift {:.3g}", d.label, dc));
            }
            if (!(ratio >= 10.0)) {
                o.fail(fmt::format("{}: drift improves only {:.3g}x ({:.3g} -> {:.3g})", d.label, ratio, dc, df));
            }
        } catch (const IntegrationError &e) {
            o.fail(fmt::format("{}: {}", d.label, e.what()));
        }
    }
    o.detail = fmt::format("{} real systems, T=10: max drift {:.2g} at tol 1e-10, smallest improvement {:.4g}x at 1e-11",
                           cases.size(), worst, worst_ratio);
    return o;
}

Outcome criterion8()
{
    Outcome o;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ud(0.2, 1.4);
    double worst = 0.0;
    int branches = 0;
    for (const cplx kappa : {cplx(4.0), cplx(-4.0), cplx(0.0), cplx(9.0), cplx(-2.5), cplx(1.3, 0.7), cplx(-0.4, 2.0)}) {
        for (const Number c : {Number::rational(1, 2), Number::rational(1, 3), Number(-1)}) {
            ExtensionSpec sp;
            sp.m = 2;
            sp.c = Expr(c);
            sp.kappa = Expr(Number::inexact(kappa));
            sp.u0 = Expr(Number::rational(1, 7));
            const Expr g = gamma_expr(sp);
            const Expr ode = normalize(diff(g, "u") + sp.c * (pow(g, 2) + sp.kappa));
            ++branches;
            for (int i = 0; i < 50; ++i) {
                Binding b;
                b.set("u", ud(rng));
                const double r = std::abs(eval(ode, b));
                worst = std::max(worst, r);
                if (!(r < 1e-12)) {
                    o.fail(fmt::format("kappa={} c={}: residual {:.3g}", format_double(kappa.real()), c.to_string(), r));
                    break;
                }
            }
        }
    }
    // c = 0: the ODE degenerates; the flat branch is linear with slope -A
    int flat = 0;
    for (const Number a : {Number::rational(1, 2), Number::rational(1, 5), Number(Rational(3), Rational(1))}) {
        auto sp = ExtensionSpec::flat_default(2, Expr(1));
        sp.A = Expr(a);
        sp.u0 = Expr(Number::rational(1, 7));
        ++flat;
        if (!is_identically_zero(diff(gamma_expr(sp), "u") + sp.A)) {
            o.fail(fmt::format("flat branch A={}: gamma' != -A", a.to_string()));
        }
    }
    double worst_c = 0.0;
    const Expr x = Expr::symbol("x", SymbolKind::coordinate);
    for (const cplx kappa : {cplx(1.0), cplx(-1.0), cplx(0.0), cplx(2.5), cplx(1.3, 0.7)}) {
        const Expr k(Number::inexact(kappa));
        const Expr d = diff(s_kappa(k, x), "x");
        for (int i = 0; i < 50; ++i) {
            Binding b;
            b.set("x", ud(rng));
            const double r = std::abs(eval(d, b) - eval(c_kappa(k, x), b));
            worst_c = std::max(worst_c, r);
            if (!(r < 1e-12)) {
                o.fail(fmt::format("d/dx S_kappa != C_kappa at kappa={}", format_double(kappa.real())));
                break;
            }
        }
    }
    o.detail = fmt::format("{} curved branches, max ODE residual {:.2g}; {} flat branches exact; max |S'-C| {:.2g}",
                           branches, worst, flat, worst_c);
    return o;
}

Outcome criterion9()
{
    Outcome o;
    const Chart ttw = ttw_chart();
    const auto t = with(ttw.symbols(), {"a1", "a2"});
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ud(0.5, 1.5);
    double worst_res = 0.0;
    double worst_f = 0.0;
    int cases = 0;
    for (const double zeta : {1.0, -0.7, 2.3, 0.4}) {
        for (const auto &[a1, a2] : {std::pair{ud(rng), ud(rng)}, std::pair{0.0, ud(rng)}, std::pair{ud(rng), 0.0}}) {
            const double chi = ud(rng);
            const int m = 2;
            const auto branch = recover_ttw_branch(a1, a2, zeta);
            Binding params;
            params.set("chi", chi).set("zeta", zeta).set("a1", a1).set("a2", a2);
            const Expr v = normalize(branch.F / (Expr::symbol("zeta") * pow(s_kappa(Expr::symbol("chi"), Expr::symbol("x1", SymbolKind::coordinate)), 2)));
            const Expr g = parse_expr("(a1*Sk(zeta, x2) + a2*Ck(zeta, x2))*Sk(chi, x1)", t);
            const Expr c = normalize(Expr::symbol("chi") / Expr(m));
            Sampler s(ttw.sampler_config(90 + static_cast<std::uint64_t>(cases)));
            s.avoid(c_kappa(Expr(Number::inexact(zeta)), Expr::symbol("x2", SymbolKind::coordinate) + Expr(Number::inexact(branch.xi))));
            const double r = max_compatibility_residual(ttw, v, g, m, c, Expr(0), params, s, 100);
            worst_res = std::max(worst_res, r);
            if (!(r < 1e-9)) {
                o.fail(fmt::format("zeta={} a1={} a2={}: compatibility residual {:.3g}", zeta, a1, a2, r));
            }
            const Expr direct = parse_expr("1/(a1*Ck(zeta, x2) - a2*zeta*Sk(zeta, x2))^2", t);
            for (int i = 0; i < 50; ++i) {
                Binding b = params;
                b.set("x2", ud(rng));
                const cplx fd = eval(direct, b);
                const double rel = std::abs(eval(branch.F, b) - fd) / std::abs(fd);
                worst_f = std::max(worst_f, rel);
                if (!(rel < 1e-9)) {
                    o.fail(fmt::format("zeta={} a1={} a2={}: F mismatch {:.3g}", zeta, a1, a2, rel));
                    break;
                }
            }
            ++cases;
        }
    }
    o.detail = fmt::format("{} (zeta, a1, a2) draws: max compatibility residual {:.2g}, max F mismatch {:.2g}", cases,
                           worst_res, worst_f);
    return o;
}

} // namespace

int main(int argc, char **argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"reference U^4G and Calogero U^2G/U^3G reproduced exactly", criterion1},
        {"closed form equals iteration (symbolic m<=6, pointwise m<=10)", criterion2},
        {"bracket certification of every extension, chains to n=4", criterion3},
        {"table reproduction with negative controls", criterion4},
        {"Hessian solution dimensions on S2 and E2", criterion5},
        {"independence rank 2(n+1)-1 with gap > 1e6", criterion6},
        {"trajectory drift < 1e-6 and >= 10x per tolerance decade", criterion7},
        {"gamma ODE on all branches and S_kappa' = C_kappa", criterion8},
        {"TTW second-branch F recovery", criterion9},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        only.insert(std::atoi(argv[i]));
    }
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        if (!only.empty() && !only.contains(n)) {
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o.fail(fmt::format("exception: {}", e.what()));
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        all = all && o.pass;
        std::cout << fmt::format("criterion {} {} {}: {} [{:.1f}s]", n, o.pass ? "PASS" : "FAIL", criteria[i].first,
                                 o.pass ? o.detail : o.first_failure, secs)
                  << std::endl;
    }
    return all ? 0 : 1;
}
