#include <algorithm>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "hamext/catalog.hpp"

using namespace hamext;

namespace {

std::string catalog_text()
{
    std::ifstream in(HAMEXT_TEST_CATALOG);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const Catalog &catalog()
{
    static const Catalog c = load_catalog(HAMEXT_TEST_CATALOG);
    return c;
}

std::string replace_once(std::string s, const std::string &from, const std::string &to)
{
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

} // namespace

TEST_CASE("catalog loads and self-validates")
{
    const auto &c = catalog();
    int e = 0;
    int s = 0;
    for (const auto &entry : c.entries) {
        const auto &id = entry.id;
        if (id.size() >= 2 && id[0] == 'E' && std::isdigit(static_cast<unsigned char>(id[1]))) {
            ++e;
        }
        if (id.size() >= 2 && id[0] == 'S' && std::isdigit(static_cast<unsigned char>(id[1]))) {
            ++s;
        }
    }
    CHECK(e == 20);
    CHECK(s == 9);
    for (const char *id : {"calogero3", "wolfes", "ttw", "ttw_rec", "osc_aniso2", "osc3"}) {
        CHECK(c.contains(id));
    }
    CHECK_THROWS_AS((void)c.find("E99"), UnknownEntry);
    CHECK(c.find("E2").constraint("v") != nullptr);
    CHECK(c.find("ttw").chart.params == std::vector<std::string>{"chi", "zeta"});
}

TEST_CASE("format roundtrip")
{
    const auto text = format_catalog(catalog());
    const auto again = parse_catalog(text, "<roundtrip>");
    CHECK(format_catalog(again) == text);
    CHECK(again.entries.size() == catalog().entries.size());
}

TEST_CASE("corrupt entries are reported by id")
{
    const auto bad = replace_once(catalog_text(), "potential = a1*zbar/sqrt(", "potential = a1*zbar/sqrt((");
    try {
        (void)parse_catalog(bad, "<bad>", false);
        FAIL("expected a catalog error");
    } catch (const CatalogError &e) {
        CHECK(e.entry() == "E7");
        CHECK(std::string(e.what()).find("E7") != std::string::npos);
    }
    const auto unknown = replace_once(catalog_text(), "potential = a1/x^2 + a2/y^2 + a3*(x^2 + y^2)",
                                      "potential = a1/x^2 + a2/y^2 + a4*(x^2 + y^2)");
    CHECK_THROWS_AS((void)parse_catalog(unknown, "<bad>", false), CatalogError);
    CHECK_THROWS_AS((void)parse_catalog("[system X]\nchart = nowhere\npotential = 0\n"), CatalogError);
}

TEST_CASE("wrong integrals fail self-validation")
{
    const auto bad = replace_once(catalog_text(), "integral Ex = (1/2)*p_x^2 + a3*x^2 + a1/x^2",
                                  "integral Ex = (1/2)*p_x^2 + a3*x^2 + a2/x^2");
    try {
        (void)parse_catalog(bad, "<bad>");
        FAIL("expected a validation error");
    } catch (const SelfValidationError &e) {
        REQUIRE(e.failures().size() == 1);
        CHECK(e.failures()[0].entry == "E1");
        CHECK(e.failures()[0].integral == "Ex");
    }
}

TEST_CASE("shipped integrals are independent")
{
    const auto &c = catalog();
    for (const char *id : {"E1", "E2", "E3", "osc3", "calogero3", "S9"}) {
        const std::string name = id;
        CAPTURE(name);
        const auto &e = c.find(id);
        DrawOptions d;
        const auto values = draw_parameters(e, 1, d);
        std::vector<MomentumPolynomial> fs{e.hamiltonian()};
        for (const auto &i : e.integrals) {
            fs.push_back(i.f);
        }
        Sampler s(e.chart.sampler_config(7, !e.real_domain));
        const auto r = independence_rank(fs, s, 20, to_binding(values));
        CHECK(r.rank == static_cast<int>(2 * e.chart.dim() - 1));
    }
}

TEST_CASE("parameter draws honour constraints")
{
    const auto &e2 = catalog().find("E2");
    DrawOptions d;
    d.constraint = e2.constraint("v");
    d.fixed["a3"] = Number(3);
    const auto v = draw_parameters(e2, 2, d);
    CHECK(v.at("L0") == Number(6));
    d.fixed["L0"] = Number(1);
    CHECK_THROWS_AS((void)draw_parameters(e2, 2, d), ConstraintViolation);

    const auto &ttw = catalog().find("ttw");
    ParamValues bad{{"chi", Number(1)}, {"zeta", Number(0)}, {"a1", Number(1)}, {"a2", Number(1)}, {"lambda", Number(1)}};
    CHECK_THROWS_AS((void)instantiate(ttw, bad, 2), ConstraintViolation);
    CHECK_THROWS_AS((void)instantiate(catalog().find("E1"), {{"a1", Number(1)}}, 1), UnboundParameter);
}

TEST_CASE("instantiated extension of the 1:2 oscillator")
{
    const auto &e2 = catalog().find("E2");
    ParamValues v{{"a1", Number(2)}, {"a2", Number(0)}, {"a3", Number(1)}, {"L0", Number(2)}};
    const auto inst = instantiate(e2, v, 2);
    const auto ns = instance_nullspace(inst);
    REQUIRE(ns.dim() == 1);
    const Expr g = g_basis(e2.chart, 2).combine(ns.readable.col(0));
    CHECK(equivalent(g, parse_expr("1 + 4*x", e2.chart.symbols())));
    const auto ext = extend_instance(inst, g);
    Sampler s(ext.chart.sampler_config(3));
    CHECK(bracket_residual_max(ext.H, ext.F(), s, 50) < 1e-12);
    for (const auto &i : ext.integrals) {
        CAPTURE(i.name);
        CHECK(bracket_residual_max(ext.H, i.f, s, 50) < 1e-12);
    }
}

TEST_CASE("scan of the flat table")
{
    ScanOptions opt;
    const auto rows = scan_tables(catalog(), "E2", opt);
    REQUIRE(!rows.empty());
    for (const auto &r : rows) {
        CAPTURE(r.entry);
        CAPTURE(r.constraint);
        CAPTURE(r.dim);
        CAPTURE(r.cosine);
        CHECK(r.matches);
        if (r.kind == "on") {
            CHECK(r.extensible);
        }
        if (!r.harmonic) {
            CHECK(r.dim == 0);
        }
    }
    const auto j = nlohmann::json::parse(scan_to_json(rows));
    CHECK(j.size() == rows.size());
}

TEST_CASE("scan of the sphere table")
{
    ScanOptions opt;
    opt.off_draws = 10;
    const auto rows = scan_tables(catalog(), "S2", opt);
    for (const auto &r : rows) {
        CAPTURE(r.entry);
        CAPTURE(r.constraint);
        CAPTURE(r.dim);
        CAPTURE(r.cosine);
        CHECK(r.matches);
        if (r.kind == "on") {
            CHECK(r.extensible);
        }
        if (r.entry == "S6" || r.entry == "S8") {
            CHECK(r.dim == 0);
        }
    }
}

TEST_CASE("scan of the TTW chart")
{
    const auto rows = scan_tables(catalog(), "TTW", ScanOptions{});
    for (const auto &r : rows) {
        CAPTURE(r.entry);
        CAPTURE(r.constraint);
        CAPTURE(r.dim);
        CHECK(r.matches);
    }
    CHECK_THROWS_AS((void)scan_tables(catalog(), "H2", ScanOptions{}), std::invalid_argument);
}

TEST_CASE("second TTW branch")
{
    for (const cplx zeta : {cplx(1.0), cplx(-0.5), cplx(2.0)}) {
        const cplx a1 = 0.7;
        const cplx a2 = 1.3;
        const auto b = recover_ttw_branch(a1, a2, zeta);
        const Chart ttw = ttw_chart();
        Binding pt;
        pt.set("x2", 0.37);
        // a1 C(x) - a2 zeta S(x) = A C(x + xi)
        const Expr lhs = parse_expr("1/(a1*Ck(zeta, x2) - a2*zeta*Sk(zeta, x2))^2",
                                    {{"x2", SymbolKind::coordinate}, {"a1"}, {"a2"}, {"zeta"}});
        pt.set("a1", a1).set("a2", a2).set("zeta", zeta);
        CHECK(std::abs(eval(lhs, pt) - eval(b.F, pt)) < 1e-10 * std::abs(eval(lhs, pt)));
    }
    CHECK_THROWS_AS((void)recover_ttw_branch(0.0, 0.0, 1.0), std::invalid_argument);
}
