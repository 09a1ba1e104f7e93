#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>
#include <fmt/format.h>

#include "hamext/extension.hpp"

using namespace hamext;

namespace {

Expr P(const std::string &s, SymbolTable t) { return parse_expr(s, t); }

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

} // namespace

TEST_CASE("gamma branches")
{
    auto flat = ExtensionSpec::flat_default(3, Expr(1));
    CHECK(to_string(gamma_expr(flat)) == "-(1/3)*u");
    ExtensionSpec k0;
    k0.m = 2;
    k0.c = Expr(Number::rational(1, 2));
    CHECK(to_string(gamma_expr(k0)) == "2/u");
    auto s = ExtensionSpec::curved_default(3, Expr(Number::rational(1, 3)));
    const SymbolTable t{{"u", SymbolKind::coordinate}};
    CHECK(equivalent(gamma_expr(s), P("3*cos(u)/sin(u)", t)));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(0.2, 1.4);
    for (const cplx kappa : {cplx(4.0), cplx(-2.5), cplx(0.0), cplx(1.3, 0.7)}) {
        ExtensionSpec sp;
        sp.m = 2;
        sp.c = Expr(Number::rational(3, 4));
        sp.kappa = Expr(Number::inexact(kappa));
        sp.u0 = Expr(Number::rational(1, 5));
        const Expr g = gamma_expr(sp);
        const Expr ode = normalize(diff(g, "u") + sp.c * (pow(g, 2) + sp.kappa));
        for (int i = 0; i < 50; ++i) {
            Binding b;
            b.set("u", d(rng));
            CHECK(std::abs(eval(ode, b)) < 1e-12 * (1.0 + eval_magnitude(ode, b)));
        }
    }
}

TEST_CASE("complete solutions satisfy the Hessian equation")
{
    Binding p;
    p.set("chi", 0.8).set("zeta", 1.7);
    for (const Chart &chart : {euclidean_chart({"x", "y"}), sphere_chart(), ttw_chart()}) {
        const auto a = g_basis(chart, 1);
        const Expr mc = chart.family == ChartFamily::euclidean ? Expr(0)
                        : chart.family == ChartFamily::sphere  ? Expr(1)
                                                                : Expr::symbol("chi");
        Sampler s(chart.sampler_config(5));
        for (const auto &phi : a.basis) {
            const auto r = hessian_residual(phi, chart, mc);
            for (int i = 0; i < 20; ++i) {
                const Binding b = s.draw(chart.coords, p);
                for (const auto &row : r) {
                    for (const auto &e : row) {
                        CHECK(std::abs(eval(e, b)) < 1e-12);
                    }
                }
            }
        }
    }
    CHECK_THROWS_AS(g_basis(make_chart("odd", ChartFamily::generic, {"q"}, {{Expr(1)}}), 1), UnsupportedChart);
}

TEST_CASE("compatibility nullspace on the table rows")
{
    const Chart e2 = euclidean_chart({"x", "y"});
    const auto t = with(e2.symbols(), {"L0", "a1"});
    const auto ansatz = g_basis(e2, 2);
    Binding params;
    params.set("L0", 0.7).set("a1", 1.3);
    Sampler s(e2.sampler_config(3));
    auto iso = compatibility_nullspace(e2, P("2*L0*(x^2+y^2)", t), ansatz, 2, Expr(0), P("L0", t), params, s);
    REQUIRE(iso.dim() == 2);
    CMatrix expected = CMatrix::Zero(3, 2);
    expected(1, 0) = 1.0;
    expected(2, 1) = 1.0;
    CHECK(principal_cosines(iso.basis, expected).minCoeff() > 1 - 1e-8);
    auto none = compatibility_nullspace(e2, P("a1/x^2", t), ansatz, 2, Expr(0), P("L0", t), params, s);
    CHECK(none.dim() == 0);

    const Chart s2 = sphere_chart();
    const auto ts = with(s2.symbols(), {"a2", "a3"});
    const std::string wb = "(sin(theta)*(cos(phi) - i*sin(phi)))";
    const std::string w = "(sin(theta)*(cos(phi) + i*sin(phi)))";
    const Expr v = P("a2/" + wb + "^2 + a3*" + w + "/" + wb + "^3", ts);
    Binding ps;
    ps.set("a2", cplx(0.4, 0.3)).set("a3", cplx(-1.1, 0.5));
    SamplerConfig sc = s2.sampler_config(9, true);
    Sampler ss(sc);
    auto r = compatibility_nullspace(s2, v, g_basis(s2, 3), 3, Expr(Number::rational(1, 3)), Expr(0), ps, ss);
    REQUIRE(r.dim() == 1);
    CHECK(std::abs(r.readable(0, 0) - 1.0) < 1e-10);
    CHECK(std::abs(r.readable(1, 0)) < 1e-10);
    CHECK(std::abs(r.readable(2, 0)) < 1e-10);
}

TEST_CASE("L0 candidates come from the pencil eigenvalues")
{
    const Chart e2 = euclidean_chart({"x", "y"});
    const auto t = with(e2.symbols(), {"a3"});
    Binding p;
    p.set("a3", 1.5);
    Sampler s(e2.sampler_config(4));
    // anisotropic oscillator a3(4x^2 + y^2): L0 = a3/m for G ~ y, 4 a3/m for G ~ x, 0 for constant G
    auto l0 = admissible_L0(e2, P("a3*(4*x^2+y^2)", t), g_basis(e2, 2), 2, Expr(0), p, s);
    std::vector<double> re;
    for (auto v : l0) {
        re.push_back(v.real());
    }
    std::sort(re.begin(), re.end());
    REQUIRE(re.size() == 3);
    CHECK(std::abs(re[0]) < 1e-9);
    CHECK(re[1] == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(re[2] == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("reference U^4 G of the isotropic oscillator")
{
    const Chart e2 = euclidean_chart({"x", "y"});
    const auto t = with(e2.symbols(), {"a3", "g1", "g2"});
    const Expr v = P("a3*(x^2+y^2)", t);
    const auto spec = ExtensionSpec::flat_default(4, P("a3/4", t));
    const Expr g = P("g1*x+g2*y", t);
    const auto ext = extend(e2, e2.hamiltonian(v), spec, g);
    auto tt = with(ext.space->symbols(), {"a3", "g1", "g2"});
    const std::string G = "(g1*x+g2*y)";
    const std::string Pm = "(g1*p_x+g2*p_y)";
    const auto expected = poly(ext.space,
                               G + "*p_u^4 - u*p_u^3*" + Pm + " - (3/4)*a3*" + G + "*u^2*p_u^2 + (a3/8)*u^3*p_u*" + Pm +
                                   " + (a3^2/64)*" + G + "*u^4",
                               tt);
    CHECK(ext.F() == expected);
    CHECK(first_integral_closed(spec, ext.L, ext.G, 4) == expected);
    const auto h = poly(ext.space, "(1/2)*(p_u^2+p_x^2+p_y^2) + a3*(x^2+y^2+u^2/16)", tt);
    CHECK(ext.H == h);
    CHECK(poisson(ext.H, ext.F()).is_zero());
}

TEST_CASE("reference Calogero U^2 G and U^3 G")
{
    const Chart e3 = euclidean_chart({"x1", "x2", "x3"});
    for (int m : {2, 3}) {
        const auto t = with(e3.symbols(), {"k", "L0", "A", "x10", "x20", "x30"});
        const Expr v = P(fmt::format("{}*L0*((x1+x10)^2+(x2+x20)^2+(x3+x30)^2) + k*(1/(x1-x2)^2+1/(x1-x3)^2+1/(x2-x3)^2)", m), t);
        ExtensionSpec spec;
        spec.m = m;
        spec.A = P("A", t);
        spec.L0 = P("L0", t);
        const Expr g = P("x10+x20+x30+x1+x2+x3", t);
        const auto ext = extend(e3, e3.hamiltonian(v), spec, g);
        const auto tt = with(ext.space->symbols(), {"k", "L0", "A", "x10", "x20", "x30"});
        const std::string G = "(x10+x20+x30+x1+x2+x3)";
        const std::string Pm = "(p_x1+p_x2+p_x3)";
        const std::string text = m == 2 ? G + "*p_u^2 - 2*A*u*p_u*" + Pm + " - 4*A^2*L0*" + G + "*u^2"
                                        : G + "*p_u^3 - 3*A*u*p_u^2*" + Pm + " - 18*A^2*L0*" + G + "*u^2*p_u + 6*A^3*L0*u^3*" + Pm;
        const auto expected = poly(ext.space, text, tt);
        CHECK(ext.F() == expected);
        CHECK(first_integral_closed(spec, ext.L, ext.G, m) == expected);
        const auto l = e3.hamiltonian(v);
        CHECK(to_string(x_apply(l, MomentumPolynomial::constant(e3.space, g))) == "p_x1 + p_x2 + p_x3");
    }
}

TEST_CASE("extension examples")
{
    const Chart s2 = sphere_chart();
    const auto l = s2.kinetic();
    const auto ext = extend(s2, l, ExtensionSpec::curved_default(2, Expr(Number::rational(1, 2))), P("cos(theta)", s2.symbols()));
    const auto expected = poly(ext.space, "(1/2)*p_u^2 + 4/sin(u)^2*((1/2)*(p_theta^2 + p_phi^2/sin(theta)^2))",
                               ext.space->symbols());
    CHECK(ext.H == expected);
    CHECK(ext.integrals.size() == 3);
    CHECK_THROWS_AS(extend(s2, l, ExtensionSpec::curved_default(2, Expr(1)), P("cos(theta)", s2.symbols())), InadmissibleSpec);
    const Chart e2 = euclidean_chart({"x", "y"});
    CHECK(ExtensionSpec::flat_default(2, Expr(0)).trivial());
    auto bad = ExtensionSpec::flat_default(2, Expr(1));
    bad.A = Expr(0);
    CHECK_THROWS_AS(extend(e2, e2.kinetic(), bad, P("x", e2.symbols())), InadmissibleSpec);
    const auto one = first_integral_iterative(ExtensionSpec::flat_default(2, Expr(1)), ext.L, Expr(1), 1);
    CHECK(to_string(one) == "p_u");
}

TEST_CASE("oscillator chains")
{
    const Expr omega = Expr::symbol("omega");
    const auto c2 = iterate_extend(omega, {2});
    CHECK(to_string(c2.H) == to_string(normalize(parse_expr(
                                 "(1/2)*(p_x1^2+p_x2^2) + omega*x1^2 + (omega/4)*x2^2",
                                 with(c2.chart.symbols(), {"omega"})))));
    const auto c3 = iterate_extend(omega, {2, 3, 4});
    CHECK(c3.integrals.size() == 7);
    for (const auto &i : c3.integrals) {
        CHECK(poisson(c3.H, i.f).is_zero());
    }
    CHECK(to_string(c3.frequencies.back()) == "(1/576)*omega");
}
