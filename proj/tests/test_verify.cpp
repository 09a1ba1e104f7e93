#include <cmath>

#include <doctest.h>
#include <json.hpp>

#include "hamext/verify.hpp"

using namespace hamext;

namespace {

SymbolTable with(SymbolTable t, std::initializer_list<const char *> params)
{
    for (const char *p : params) {
        t.push_back({p, SymbolKind::parameter});
    }
    return t;
}

ExtendedSystem iso_extension(int m)
{
    const Chart e2 = euclidean_chart({"x", "y"});
    const Expr v = parse_expr("2*(x^2+y^2)", e2.symbols());
    const auto spec = ExtensionSpec::flat_default(m, Expr(Number::rational(2, m)));
    const auto ex = MomentumPolynomial::from_expr(e2.space, parse_expr("(1/2)*p_x^2 + 2*x^2", e2.symbols()));
    const auto ang = MomentumPolynomial::from_expr(e2.space, parse_expr("x*p_y - y*p_x", e2.symbols()));
    return extend(e2, e2.hamiltonian(v), spec, parse_expr("x + 2*y", e2.symbols()), {{"Ex", ex}, {"J", ang}});
}

} // namespace

TEST_CASE("bracket residual")
{
    const auto ext = iso_extension(3);
    Sampler s(ext.chart.sampler_config(1));
    CHECK(bracket_residual_max(ext.H, ext.H, s, 50) == 0.0);
    CHECK(bracket_residual_max(ext.H, ext.F(), s, 100) < 1e-12);
    // flip the sign of one term of U^3 G
    auto terms = ext.F().terms();
    auto it = terms.begin();
    std::advance(it, 1);
    it->second = normalize(-it->second);
    const MomentumPolynomial bad(ext.space, terms);
    CHECK(bracket_residual_max(ext.H, bad, s, 100) > 1e-3);
}

TEST_CASE("free particle drift vanishes")
{
    const auto sp = make_phase_space("line", {"u"});
    const auto h = MomentumPolynomial::from_expr(sp, parse_expr("(1/2)*p_u^2", sp->symbols()));
    const auto pu = MomentumPolynomial::momentum(sp, 0);
    const auto r = conservation_drift(h, {h, pu}, {0.3, 1.2}, 10.0, 1e-10);
    CHECK(r.drift[0] == 0.0);
    CHECK(r.drift[1] == 0.0);
}

TEST_CASE("oscillator trajectory converges")
{
    // H = p^2/2 + x^2/2 from (1, 0): x = cos t
    const auto sp = make_phase_space("line", {"x"});
    const auto h = MomentumPolynomial::from_expr(sp, parse_expr("(1/2)*p_x^2 + (1/2)*x^2", sp->symbols()));
    double prev = 0.0;
    for (double tol : {1e-6, 1e-8, 1e-10}) {
        State y{1.0, 0.0};
        integrate_hamiltonian(h, y, 10.0, tol);
        const double err = std::hypot(y[0] - std::cos(10.0), y[1] + std::sin(10.0));
        if (prev > 0.0) {
            CHECK(prev / err > 10.0);
        }
        prev = err;
    }
}

TEST_CASE("extended isotropic oscillator conserves its integrals")
{
    const auto ext = iso_extension(3);
    std::vector<MomentumPolynomial> fs;
    for (const auto &i : ext.integrals) {
        fs.push_back(i.f);
    }
    const State y0{0.4, 0.9, -0.3, 0.2, 0.5, -0.7};
    const auto r = conservation_drift(ext.H, fs, y0, 10.0, 1e-10);
    for (double d : r.drift) {
        CHECK(d < 1e-6);
    }
    const auto fine = conservation_drift(ext.H, fs, y0, 10.0, 1e-11);
    CHECK(r.drift.back() / fine.drift.back() > 10.0);
}

TEST_CASE("independence rank")
{
    const auto ext = iso_extension(2);
    Sampler s(ext.chart.sampler_config(2));
    std::vector<MomentumPolynomial> all;
    for (const auto &i : ext.integrals) {
        all.push_back(i.f);
    }
    const auto r = independence_rank(all, s, 20);
    CHECK(r.rank == 5);
    CHECK(std::isinf(r.gap));
    CHECK(independence_rank({ext.H, ext.H}, s, 10).rank == 1);
    CHECK(independence_rank({ext.H, ext.L}, s, 10).rank == 2);
}

TEST_CASE("certify")
{
    const auto ext = iso_extension(3);
    VerifyConfig cfg;
    cfg.target = "iso";
    cfg.seed = 5;
    const auto rep = certify(ext, cfg);
    CHECK(rep.verdict == certified_verdict);
    CHECK(rep.rank == 5);
    const auto j = nlohmann::json::parse(rep.to_json());
    for (const char *k : {"target", "seed", "bracket", "drift", "rank", "verdict"}) {
        CHECK(j.contains(k));
    }
    CHECK(rep.to_json() == certify(ext, cfg).to_json());

    const Chart e2 = euclidean_chart({"x", "y"});
    const auto trivial = extend(e2, e2.kinetic(), ExtensionSpec::flat_default(2, Expr(0)), parse_expr("x", e2.symbols()));
    const auto tr = certify(trivial, cfg);
    CHECK(tr.verdict == "trivial");
    CHECK(tr.bracket_max < 1e-9);
}
