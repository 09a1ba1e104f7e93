#include <fmt/format.h>

#include "hamext/extension.hpp"

namespace hamext {

namespace {

Expr coord(std::string_view name) { return Expr::symbol(name, SymbolKind::coordinate); }

std::int64_t binomial(int n, int k)
{
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

MomentumPolynomial power_of(const MomentumPolynomial &base, int k)
{
    MomentumPolynomial acc = MomentumPolynomial::constant(base.space(), Expr(1));
    for (int i = 0; i < k; ++i) {
        acc = acc * base;
    }
    return acc;
}

} // namespace

Expr GAnsatz::general() const
{
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        terms.push_back(Expr::symbol(coeffs[i]) * basis[i]);
    }
    return normalize(make_sum(std::move(terms)));
}

Expr GAnsatz::combine(const CVector &v) const
{
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const Number c = Number::snap(v(static_cast<Eigen::Index>(i)), 1e-9);
        if (!c.is_zero()) {
            terms.push_back(Expr(c) * basis[i]);
        }
    }
    return normalize(make_sum(std::move(terms)));
}

GAnsatz g_basis(const Chart &chart, int m)
{
    if (m < 1) {
        throw std::invalid_argument("m must be a positive integer");
    }
    GAnsatz a;
    switch (chart.family) {
    case ChartFamily::euclidean:
        a.basis.emplace_back(1);
        for (const auto &q : chart.coords) {
            a.basis.push_back(coord(q));
        }
        break;
    case ChartFamily::sphere: {
        const Expr th = coord(chart.coords[0]);
        const Expr ph = coord(chart.coords[1]);
        a.basis = {cos(th), sin(ph) * sin(th), cos(ph) * sin(th)};
        break;
    }
    case ChartFamily::ttw: {
        const Expr x1 = coord(chart.coords[0]);
        const Expr x2 = coord(chart.coords[1]);
        const Expr chi = Expr::symbol("chi");
        const Expr zeta = Expr::symbol("zeta");
        a.basis = {c_kappa(chi, x1), s_kappa(zeta, x2) * s_kappa(chi, x1), c_kappa(zeta, x2) * s_kappa(chi, x1)};
        break;
    }
    case ChartFamily::generic:
        throw UnsupportedChart(fmt::format("chart '{}': no built-in complete solution of the Hessian equation", chart.id));
    }
    for (auto &b : a.basis) {
        b = normalize(b);
    }
    for (std::size_t i = 0; i < a.basis.size(); ++i) {
        a.coeffs.push_back(fmt::format("g{}", i));
    }
    return a;
}

ExtensionSpec ExtensionSpec::flat_default(int m, Expr L0)
{
    ExtensionSpec s;
    s.m = m;
    s.L0 = normalize(L0);
    s.A = Expr(Number::rational(1, m));
    return s;
}

ExtensionSpec ExtensionSpec::curved_default(int m, Expr c)
{
    ExtensionSpec s;
    s.m = m;
    s.c = normalize(c);
    s.kappa = Expr(static_cast<std::int64_t>(m) * m);
    return s;
}

std::string describe(const ExtensionSpec &s)
{
    if (s.flat()) {
        return fmt::format("m={} c=0 A={} L0={} u0={} V0={}", s.m, to_string(s.A), to_string(s.L0), to_string(s.u0),
                           to_string(s.V0));
    }
    return fmt::format("m={} c={} kappa={} L0={} u0={} W0={}", s.m, to_string(s.c), to_string(s.kappa), to_string(s.L0),
                       to_string(s.u0), to_string(s.W0));
}

Expr gamma_expr(const ExtensionSpec &spec, std::string_view u)
{
    const Expr uu = coord(u);
    if (spec.flat()) {
        return normalize(-(spec.A * (uu + spec.u0)));
    }
    const Expr arg = spec.c * uu + spec.u0;
    return normalize(c_kappa(spec.kappa, arg) / s_kappa(spec.kappa, arg));
}

void check_admissible(const Chart &chart, const ExtensionSpec &spec, const Binding &params)
{
    if (spec.m < 1) {
        throw InadmissibleSpec("m must be a positive integer");
    }
    const Expr mc = normalize(Expr(spec.m) * spec.c);
    auto fail = [&](std::string_view expected) {
        throw InadmissibleSpec(fmt::format("chart '{}' admits mc = {} only (got mc = {})", chart.id, expected, to_string(mc)));
    };
    switch (chart.family) {
    case ChartFamily::euclidean:
        if (!mc.is_zero()) {
            fail("0");
        }
        break;
    case ChartFamily::sphere:
        if (!normalize(mc - Expr(1)).is_zero()) {
            fail("1");
        }
        break;
    case ChartFamily::ttw:
        if (!normalize(mc - Expr::symbol("chi")).is_zero()) {
            fail("chi");
        }
        break;
    case ChartFamily::generic: {
        const auto rep = curvature(chart, params);
        if (!rep.is_constant) {
            throw NonConstantCurvature(fmt::format("chart '{}' does not have constant curvature", chart.id));
        }
        if (std::abs(eval(mc, params) - rep.K) > 1e-9 * (1.0 + std::abs(rep.K))) {
            fail(rep.K_exact.to_string());
        }
        break;
    }
    }
    if (spec.flat() && normalize(spec.A).is_zero()) {
        throw InadmissibleSpec("the flat branch needs A != 0");
    }
}

Expr compatibility_residual(const Chart &chart, const Expr &v, const Expr &g, int m, const Expr &c, const Expr &L0)
{
    const std::size_t n = chart.dim();
    const auto &ids = chart.space->q_ids;
    std::vector<Expr> dv(n);
    std::vector<Expr> dg(n);
    for (std::size_t i = 0; i < n; ++i) {
        dv[i] = diff(v, ids[i]);
        dg[i] = diff(g, ids[i]);
    }
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (!chart.metric_inv[i][j].is_zero() && !dv[i].is_zero() && !dg[j].is_zero()) {
                terms.push_back(chart.metric_inv[i][j] * dv[i] * dg[j]);
            }
        }
    }
    terms.push_back(Expr(-2 * m) * (c * v + L0) * g);
    return normalize(make_sum(std::move(terms)));
}

namespace {

struct SampledPencil {
    CMatrix a; // residual with L0 = 0
    CMatrix b; // coefficient of -L0
    Eigen::VectorXd scale_a;
    Eigen::VectorXd scale_b;
};

SampledPencil sample_pencil(const Chart &chart, const Expr &v, const GAnsatz &ansatz, int m, const Expr &c,
                            const Binding &params, Sampler &sampler, int samples)
{
    const auto nb = static_cast<Eigen::Index>(ansatz.basis.size());
    if (samples <= 0) {
        samples = static_cast<int>(6 * nb + 6);
    }
    std::vector<Expr> ra;
    std::vector<Expr> rb;
    for (const auto &phi : ansatz.basis) {
        ra.push_back(compatibility_residual(chart, v, phi, m, c, Expr(0)));
        rb.push_back(normalize(Expr(2 * m) * phi));
    }
    SampledPencil p{CMatrix(samples, nb), CMatrix(samples, nb), Eigen::VectorXd(samples), Eigen::VectorXd(samples)};
    int row = 0;
    int failures = 0;
    while (row < samples) {
        const Binding b = sampler.draw(chart.coords, params);
        try {
            double sa = 0.0;
            double sb = 0.0;
            for (Eigen::Index k = 0; k < nb; ++k) {
                const auto ku = static_cast<std::size_t>(k);
                p.a(row, k) = eval(ra[ku], b);
                p.b(row, k) = eval(rb[ku], b);
                sa = std::max(sa, eval_magnitude(ra[ku], b));
                sb = std::max(sb, eval_magnitude(rb[ku], b));
            }
            if (!std::isfinite(sa) || !std::isfinite(sb) || !p.a.row(row).allFinite()) {
                throw PoleError("non-finite residual");
            }
            p.scale_a(row) = sa;
            p.scale_b(row) = sb;
            ++row;
        } catch (const EvalError &) {
            if (++failures > 50 * samples) {
                throw SamplerExhausted("the potential has a pole at every drawn sample");
            }
        }
    }
    return p;
}

CMatrix pencil_at(const SampledPencil &p, cplx l0)
{
    CMatrix out = p.a - l0 * p.b;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double s = p.scale_a(i) + std::abs(l0) * p.scale_b(i);
        if (s > 0.0) {
            out.row(i) /= s;
        }
    }
    return out;
}

} // namespace

NullspaceResult compatibility_nullspace(const Chart &chart, const Expr &v, const GAnsatz &ansatz, int m, const Expr &c,
                                        const Expr &L0, const Binding &params, Sampler &sampler, int samples)
{
    const SampledPencil p = sample_pencil(chart, v, ansatz, m, c, params, sampler, samples);
    const CMatrix mat = pencil_at(p, eval(L0, params));
    NullspaceResult r;
    r.singular_values = singular_values(mat);
    r.basis = nullspace(mat, 1e-9);
    r.readable = readable_basis(r.basis);
    return r;
}

std::vector<cplx> admissible_L0(const Chart &chart, const Expr &v, const GAnsatz &ansatz, int m, const Expr &c,
                                const Binding &params, Sampler &sampler, int samples)
{
    const SampledPencil p = sample_pencil(chart, v, ansatz, m, c, params, sampler, samples);
    const CVector ev = eigenvalues(pseudo_inverse(p.b) * p.a);
    std::vector<cplx> out;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        cplx l0 = ev(i);
        if (std::abs(l0.imag()) < 1e-10 * (1.0 + std::abs(l0))) {
            l0.imag(0.0);
        }
        if (nullspace(pencil_at(p, l0), 1e-9).cols() == 0) {
            continue;
        }
        bool seen = false;
        for (const auto &o : out) {
            seen = seen || std::abs(o - l0) < 1e-8 * (1.0 + std::abs(l0));
        }
        if (!seen) {
            out.push_back(l0);
        }
    }
    return out;
}

double max_compatibility_residual(const Chart &chart, const Expr &v, const Expr &g, int m, const Expr &c, const Expr &L0,
                                  const Binding &params, Sampler &sampler, int points)
{
    const Expr r = compatibility_residual(chart, v, g, m, c, L0);
    if (r.is_zero()) {
        return 0.0;
    }
    double worst = 0.0;
    int done = 0;
    int failures = 0;
    while (done < points) {
        const Binding b = sampler.draw(chart.coords, params);
        try {
            const double mag = eval_magnitude(r, b);
            const double val = std::abs(eval(r, b));
            worst = std::max(worst, mag > 0.0 ? val / mag : val);
            ++done;
        } catch (const EvalError &) {
            if (++failures > 50 * points) {
                throw SamplerExhausted("the residual has a pole at every drawn sample");
            }
        }
    }
    return worst;
}

PhaseSpacePtr extended_space(const Chart &chart, std::string_view u)
{
    std::vector<std::string> coords{std::string(u)};
    coords.insert(coords.end(), chart.coords.begin(), chart.coords.end());
    return make_phase_space(fmt::format("{}+{}", chart.id, u), std::move(coords));
}

MomentumPolynomial extended_hamiltonian(const ExtensionSpec &spec, const MomentumPolynomial &l, std::string_view u)
{
    const auto &space = l.space();
    const Expr uu = coord(u);
    const auto pu = MomentumPolynomial::momentum(space, 0);
    const auto half_pu2 = (pu * pu).scaled(Expr(Number::rational(1, 2)));
    const Expr m(spec.m);
    if (spec.flat()) {
        return half_pu2 + l.scaled(m * spec.A) +
               MomentumPolynomial::constant(space, m * spec.A * spec.V0 + m * spec.L0 * pow(spec.A, 2) * pow(uu + spec.u0, 2));
    }
    const Expr inv_s2 = pow(s_kappa(spec.kappa, spec.c * uu + spec.u0), -2);
    return half_pu2 + l.scaled(m * spec.c * inv_s2) + MomentumPolynomial::constant(space, m * spec.L0 * inv_s2 + spec.W0);
}

MomentumPolynomial u_apply(const ExtensionSpec &spec, const MomentumPolynomial &l, const MomentumPolynomial &f,
                           std::string_view u)
{
    const auto pu = MomentumPolynomial::momentum(f.space(), 0);
    return pu * f + x_apply(l, f).scaled(gamma_expr(spec, u));
}

MomentumPolynomial first_integral_iterative(const ExtensionSpec &spec, const MomentumPolynomial &l, const Expr &g, int power,
                                            std::string_view u)
{
    MomentumPolynomial f = MomentumPolynomial::constant(l.space(), g);
    for (int i = 0; i < power; ++i) {
        f = u_apply(spec, l, f, u);
    }
    return f;
}

MomentumPolynomial first_integral_closed(const ExtensionSpec &spec, const MomentumPolynomial &l, const Expr &g, int power,
                                         std::string_view u)
{
    const auto &space = l.space();
    const Expr gam = gamma_expr(spec, u);
    const auto pu = MomentumPolynomial::momentum(space, 0);
    const auto factor = (l.scaled(spec.c) + MomentumPolynomial::constant(space, spec.L0)).scaled(Expr(-2 * spec.m));
    const auto gp = MomentumPolynomial::constant(space, g);
    const auto xlg = x_apply(l, gp);
    MomentumPolynomial pm(space);
    MomentumPolynomial dm(space);
    std::vector<MomentumPolynomial> factor_pow{MomentumPolynomial::constant(space, Expr(1))};
    for (int k = 0; 2 * k <= power; ++k) {
        if (k > 0) {
            factor_pow.push_back(factor_pow.back() * factor);
        }
        const auto &fk = factor_pow[static_cast<std::size_t>(k)];
        pm = pm + (power_of(pu, power - 2 * k) * fk).scaled(Expr(binomial(power, 2 * k)) * pow(gam, 2 * k));
        // odd terms stop at floor((m-1)/2)
        if (2 * k + 1 <= power) {
            dm = dm + (power_of(pu, power - 2 * k - 1) * fk).scaled(Expr(binomial(power, 2 * k + 1)) * pow(gam, 2 * k + 1));
        }
    }
    return pm * gp + dm * xlg;
}

ExtendedSystem extend(const Chart &chart, const MomentumPolynomial &l, const ExtensionSpec &spec, const Expr &g,
                      const std::vector<NamedIntegral> &inherited, std::string u, bool closed_form)
{
    check_admissible(chart, spec);
    ExtendedSystem ext{chart, extended_space(chart, u), MomentumPolynomial(nullptr), spec, normalize(g), u,
                       MomentumPolynomial(nullptr), {}};
    ext.L = l.lift(ext.space);
    ext.H = extended_hamiltonian(spec, ext.L, u);
    ext.integrals.push_back({"H", ext.H});
    ext.integrals.push_back({"L", ext.L});
    for (const auto &i : inherited) {
        ext.integrals.push_back({i.name, i.f.lift(ext.space)});
    }
    ext.integrals.push_back({fmt::format("U^{}G", spec.m),
                             closed_form ? first_integral_closed(spec, ext.L, ext.G, spec.m, u)
                                         : first_integral_iterative(spec, ext.L, ext.G, spec.m, u)});
    return ext;
}

OscillatorChain iterate_extend(const Expr &omega, const std::vector<int> &chain)
{
    if (chain.empty()) {
        throw std::invalid_argument("the chain needs at least one step");
    }
    OscillatorChain out{euclidean_chart({"x1"}), {}, MomentumPolynomial(nullptr), {}, {normalize(omega)}};
    Chart chart = out.chart;
    MomentumPolynomial h = chart.hamiltonian(normalize(omega * pow(coord("x1"), 2)));
    std::vector<MomentumPolynomial> hamiltonians{h};
    std::vector<std::pair<std::string, MomentumPolynomial>> extras;
    for (std::size_t k = 0; k < chain.size(); ++k) {
        const int m = chain[k];
        if (m < 1) {
            throw std::invalid_argument("chain entries must be positive integers");
        }
        const std::string xk = fmt::format("x{}", k + 1);
        const std::string next = fmt::format("x{}", k + 2);
        const Expr L0 = normalize(out.frequencies.back() / Expr(m));
        const Expr G = coord(xk);
        const ExtendedSystem ext = extend(chart, h, ExtensionSpec::flat_default(m, L0), G, {}, next);
        out.steps.push_back({m, L0, G});
        out.frequencies.push_back(normalize(out.frequencies.back() / Expr(static_cast<std::int64_t>(m) * m)));
        std::vector<std::string> coords = chart.coords;
        coords.push_back(next);
        chart = euclidean_chart(coords);
        h = ext.H.lift(chart.space);
        hamiltonians.push_back(h);
        extras.emplace_back(fmt::format("U^{}G{}", m, k + 1), ext.F());
    }
    out.chart = chart;
    out.H = h;
    for (std::size_t j = 0; j < hamiltonians.size(); ++j) {
        out.integrals.push_back({fmt::format("H{}", j + 1), hamiltonians[j].lift(chart.space)});
    }
    for (auto &[name, f] : extras) {
        out.integrals.push_back({name, f.lift(chart.space)});
    }
    return out;
}

} // namespace hamext
