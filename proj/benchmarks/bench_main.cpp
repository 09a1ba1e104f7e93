#include <benchmark/benchmark.h>

#include "hamext/catalog.hpp"

using namespace hamext;

namespace {

const Catalog &catalog()
{
    static const Catalog c = load_catalog(HAMEXT_BENCH_CATALOG, false);
    return c;
}

Instance instance(std::string_view id, std::string_view constraint, int m)
{
    const auto &e = catalog().find(id);
    DrawOptions d;
    d.constraint = e.constraint(constraint);
    d.exact = true;
    return instantiate(e, draw_parameters(e, m, d), m);
}

Expr table_g(const Instance &inst, std::string_view constraint)
{
    std::map<std::string, Expr, std::less<>> rep;
    for (const auto &p : inst.entry->params) {
        rep.emplace(p, Expr(inst.values.at(p)));
    }
    rep.emplace("m", Expr(inst.m));
    rep.emplace("L0", inst.L0);
    Expr g(0);
    for (const auto &x : inst.entry->constraint(constraint)->expected_g) {
        g += substitute(x, rep);
    }
    return normalize(g);
}

void BM_normalize_trig(benchmark::State &state)
{
    const SymbolTable t = {{"th", SymbolKind::coordinate}, {"ph", SymbolKind::coordinate}};
    const Expr e = parse_expr("(sin(th)*cos(ph) + 1/sin(th))^4*(cos(th) - sin(ph))^3/sqrt(sin(th)^2*cos(ph)^2 + "
                              "sin(th)^2*sin(ph)^2)",
                              t);
    for (auto _ : state) {
        benchmark::DoNotOptimize(normalize(e));
    }
}
BENCHMARK(BM_normalize_trig)->Unit(benchmark::kMicrosecond);

void BM_poisson_sphere(benchmark::State &state)
{
    const auto &s9 = catalog().find("S9");
    const auto h = s9.hamiltonian();
    for (auto _ : state) {
        for (const auto &i : s9.integrals) {
            benchmark::DoNotOptimize(poisson(h, i.f));
        }
    }
}
BENCHMARK(BM_poisson_sphere)->Unit(benchmark::kMillisecond);

void BM_first_integral_iterative(benchmark::State &state)
{
    const int m = static_cast<int>(state.range(0));
    const auto inst = instance("S9", "vi", m);
    const Expr g = table_g(inst, "vi");
    const auto ext = extend(inst.entry->chart, inst.L, inst.spec(), g);
    for (auto _ : state) {
        benchmark::DoNotOptimize(first_integral_iterative(ext.spec, ext.L, ext.G, m));
    }
}
BENCHMARK(BM_first_integral_iterative)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);

void BM_first_integral_closed(benchmark::State &state)
{
    const int m = static_cast<int>(state.range(0));
    const auto inst = instance("S9", "vi", m);
    const Expr g = table_g(inst, "vi");
    const auto ext = extend(inst.entry->chart, inst.L, inst.spec(), g);
    for (auto _ : state) {
        benchmark::DoNotOptimize(first_integral_closed(ext.spec, ext.L, ext.G, m));
    }
}
BENCHMARK(BM_first_integral_closed)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);

void BM_nullspace(benchmark::State &state)
{
    const auto inst = instance(state.range(0) == 0 ? "E2" : "S1", state.range(0) == 0 ? "v" : "iii", 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(instance_nullspace(inst));
    }
}
BENCHMARK(BM_nullspace)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_bracket_residual(benchmark::State &state)
{
    const auto inst = instance("calogero3", "harmonic", 2);
    const auto ext = extend(inst.entry->chart, inst.L, inst.spec(), table_g(inst, "harmonic"), inst.integrals);
    for (auto _ : state) {
        Sampler s(extended_sampler_config(ext, 1, false));
        benchmark::DoNotOptimize(bracket_residual_max(ext.H, ext.F(), s, 100, inst.chart_params));
    }
}
BENCHMARK(BM_bracket_residual)->Unit(benchmark::kMillisecond);

void BM_trajectory(benchmark::State &state)
{
    const auto inst = instance("E3", "i", 2);
    const auto ext = extend(inst.entry->chart, inst.L, inst.spec(), table_g(inst, "i"), inst.integrals);
    std::vector<MomentumPolynomial> fs;
    for (const auto &i : ext.integrals) {
        fs.push_back(i.f);
    }
    const State y0 = {0.7, 0.3, -0.4, 0.2, 0.5, -0.1};
    for (auto _ : state) {
        benchmark::DoNotOptimize(conservation_drift(ext.H, fs, y0, 1.0, 1e-10));
    }
}
BENCHMARK(BM_trajectory)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
