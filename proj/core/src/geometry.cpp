#include <fmt/format.h>

#include "hamext/geometry.hpp"
#include "hamext/linalg.hpp"

namespace hamext {

std::string_view family_name(ChartFamily f)
{
    switch (f) {
    case ChartFamily::euclidean: return "euclidean";
    case ChartFamily::sphere: return "sphere";
    case ChartFamily::ttw: return "ttw";
    case ChartFamily::generic: return "generic";
    }
    return "generic";
}

SymbolTable Chart::symbols() const
{
    SymbolTable t = space->symbols();
    for (const auto &p : params) {
        t.push_back({p, SymbolKind::parameter});
    }
    return t;
}

namespace {

bool is_diagonal(const ExprMatrix &m)
{
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (i != j && !normalize(m[i][j]).is_zero()) {
                return false;
            }
        }
    }
    return true;
}

Expr det2(const Expr &a, const Expr &b, const Expr &c, const Expr &d) { return a * d - b * c; }

} // namespace

ExprMatrix Chart::metric() const
{
    const std::size_t n = dim();
    ExprMatrix g(n, std::vector<Expr>(n, Expr(0)));
    if (is_diagonal(metric_inv)) {
        for (std::size_t i = 0; i < n; ++i) {
            g[i][i] = normalize(pow(metric_inv[i][i], -1));
        }
        return g;
    }
    const auto &a = metric_inv;
    if (n == 2) {
        const Expr inv_det = pow(det2(a[0][0], a[0][1], a[1][0], a[1][1]), -1);
        g[0][0] = normalize(a[1][1] * inv_det);
        g[1][1] = normalize(a[0][0] * inv_det);
        g[0][1] = g[1][0] = normalize(-a[0][1] * inv_det);
        return g;
    }
    if (n == 3) {
        ExprMatrix cof(3, std::vector<Expr>(3));
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                const std::size_t r0 = (i + 1) % 3;
                const std::size_t r1 = (i + 2) % 3;
                const std::size_t c0 = (j + 1) % 3;
                const std::size_t c1 = (j + 2) % 3;
                cof[i][j] = det2(a[r0][c0], a[r0][c1], a[r1][c0], a[r1][c1]);
            }
        }
        const Expr det = a[0][0] * cof[0][0] + a[0][1] * cof[0][1] + a[0][2] * cof[0][2];
        const Expr inv_det = pow(det, -1);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                g[i][j] = normalize(cof[j][i] * inv_det);
            }
        }
        return g;
    }
    throw std::invalid_argument(fmt::format("chart '{}': no closed-form inverse for a dense {}x{} metric", id, n, n));
}

MomentumPolynomial Chart::kinetic() const
{
    const std::size_t n = dim();
    std::map<MultiIndex, Expr> terms;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            MultiIndex k(n, 0);
            k[i] += 1;
            k[j] += 1;
            const Expr c = i == j ? Expr(Number::rational(1, 2)) * metric_inv[i][j] : metric_inv[i][j];
            terms.emplace(k, c);
        }
    }
    return {space, std::move(terms)};
}

MomentumPolynomial Chart::hamiltonian(const Expr &potential) const
{
    return kinetic() + MomentumPolynomial::constant(space, potential);
}

SamplerConfig Chart::sampler_config(std::uint64_t seed, bool complex) const
{
    SamplerConfig c;
    c.boxes = boxes;
    c.avoid = singular;
    c.seed = seed;
    c.complex = complex;
    return c;
}

Chart make_chart(std::string id, ChartFamily family, std::vector<std::string> coords, ExprMatrix metric_inv,
                 std::vector<std::string> params, std::vector<Expr> singular)
{
    const std::size_t n = coords.size();
    if (n == 0) {
        throw std::invalid_argument("a chart needs at least one coordinate");
    }
    if (metric_inv.size() != n) {
        throw std::invalid_argument(fmt::format("chart '{}': metric has {} rows for {} coordinates", id, metric_inv.size(), n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (metric_inv[i].size() != n) {
            throw std::invalid_argument(fmt::format("chart '{}': metric row {} has the wrong length", id, i));
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (normalize(metric_inv[i][j] - metric_inv[j][i]) != Expr(0)) {
                throw std::invalid_argument(fmt::format("chart '{}': metric is not symmetric", id));
            }
        }
    }
    Chart c;
    c.id = std::move(id);
    c.family = family;
    c.space = make_phase_space(c.id, coords);
    c.coords = std::move(coords);
    c.metric_inv = std::move(metric_inv);
    for (auto &row : c.metric_inv) {
        for (auto &e : row) {
            e = normalize(e);
        }
    }
    c.params = std::move(params);
    c.singular = std::move(singular);
    return c;
}

Chart euclidean_chart(std::vector<std::string> coords, std::string id)
{
    const std::size_t n = coords.size();
    if (id.empty()) {
        id = fmt::format("E{}", n);
    }
    ExprMatrix g(n, std::vector<Expr>(n, Expr(0)));
    for (std::size_t i = 0; i < n; ++i) {
        g[i][i] = Expr(1);
    }
    return make_chart(std::move(id), ChartFamily::euclidean, std::move(coords), std::move(g));
}

Chart sphere_chart()
{
    const Expr th = Expr::symbol("theta", SymbolKind::coordinate);
    Chart c = make_chart("S2", ChartFamily::sphere, {"theta", "phi"}, {{Expr(1), Expr(0)}, {Expr(0), pow(sin(th), -2)}}, {},
                         {sin(th)});
    c.boxes["theta"] = {0.2, 2.9};
    c.boxes["phi"] = {0.1, 6.1};
    return c;
}

Chart ttw_chart()
{
    const Expr x1 = Expr::symbol("x1", SymbolKind::coordinate);
    const Expr chi = Expr::symbol("chi");
    const Expr zeta = Expr::symbol("zeta");
    Chart c = make_chart("TTW", ChartFamily::ttw, {"x1", "x2"},
                         {{Expr(1), Expr(0)}, {Expr(0), pow(zeta * pow(s_kappa(chi, x1), 2), -1)}}, {"chi", "zeta"},
                         {s_kappa(chi, x1)});
    c.boxes["x1"] = {0.2, 1.2};
    c.boxes["x2"] = {-0.6, 0.6};
    return c;
}

Christoffel christoffel(const Chart &chart)
{
    const std::size_t n = chart.dim();
    const ExprMatrix g = chart.metric();
    const auto &ids = chart.space->q_ids;
    // dg[l][i][j] = d_l g_ij
    std::vector<ExprMatrix> dg(n, ExprMatrix(n, std::vector<Expr>(n)));
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                dg[l][i][j] = diff(g[i][j], ids[l]);
            }
        }
    }
    Christoffel gamma(n, ExprMatrix(n, std::vector<Expr>(n, Expr(0))));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                std::vector<Expr> terms;
                for (std::size_t l = 0; l < n; ++l) {
                    if (chart.metric_inv[k][l].is_zero()) {
                        continue;
                    }
                    terms.push_back(chart.metric_inv[k][l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]));
                }
                gamma[k][i][j] = normalize(Expr(Number::rational(1, 2)) * make_sum(std::move(terms)));
                gamma[k][j][i] = gamma[k][i][j];
            }
        }
    }
    return gamma;
}

std::vector<std::vector<ExprMatrix>> riemann(const Chart &chart)
{
    const std::size_t n = chart.dim();
    const Christoffel gm = christoffel(chart);
    const auto &ids = chart.space->q_ids;
    std::vector<std::vector<ExprMatrix>> r(n, std::vector<ExprMatrix>(n, ExprMatrix(n, std::vector<Expr>(n, Expr(0)))));
    for (std::size_t rho = 0; rho < n; ++rho) {
        for (std::size_t s = 0; s < n; ++s) {
            for (std::size_t mu = 0; mu < n; ++mu) {
                for (std::size_t nu = mu + 1; nu < n; ++nu) {
                    std::vector<Expr> terms{diff(gm[rho][nu][s], ids[mu]), -diff(gm[rho][mu][s], ids[nu])};
                    for (std::size_t l = 0; l < n; ++l) {
                        terms.push_back(gm[rho][mu][l] * gm[l][nu][s]);
                        terms.push_back(-(gm[rho][nu][l] * gm[l][mu][s]));
                    }
                    r[rho][s][mu][nu] = normalize(make_sum(std::move(terms)));
                    r[rho][s][nu][mu] = normalize(-r[rho][s][mu][nu]);
                }
            }
        }
    }
    return r;
}

CurvatureReport curvature(const Chart &chart, const Binding &params, int samples, std::uint64_t seed)
{
    const std::size_t n = chart.dim();
    if (n < 2) {
        throw std::invalid_argument("curvature needs at least two coordinates");
    }
    const auto r = riemann(chart);
    const ExprMatrix g = chart.metric();
    Sampler sampler(chart.sampler_config(seed));
    CurvatureReport rep;
    rep.is_constant = true;
    bool first = true;
    for (int s = 0; s < samples; ++s) {
        const Binding b = sampler.draw(chart.coords, params);
        std::vector<std::vector<cplx>> gv(n, std::vector<cplx>(n));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                gv[i][j] = eval(g[i][j], b);
            }
        }
        // lowered R_{rho sigma mu nu}
        auto lowered = [&](std::size_t rho, std::size_t sg, std::size_t mu, std::size_t nu) {
            cplx v(0.0, 0.0);
            for (std::size_t a = 0; a < n; ++a) {
                if (gv[rho][a] != cplx(0.0, 0.0)) {
                    v += gv[rho][a] * eval(r[a][sg][mu][nu], b);
                }
            }
            return v;
        };
        auto form = [&](std::size_t rho, std::size_t sg, std::size_t mu, std::size_t nu) {
            return gv[rho][mu] * gv[sg][nu] - gv[rho][nu] * gv[sg][mu];
        };
        const cplx k = lowered(0, 1, 0, 1) / form(0, 1, 0, 1);
        double worst = 0.0;
        double scale = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b2 = 0; b2 < n; ++b2) {
                for (std::size_t c = 0; c < n; ++c) {
                    for (std::size_t d = 0; d < n; ++d) {
                        const cplx lv = lowered(a, b2, c, d);
                        const cplx fv = k * form(a, b2, c, d);
                        worst = std::max(worst, std::abs(lv - fv));
                        scale = std::max(scale, std::abs(lv) + std::abs(fv));
                    }
                }
            }
        }
        double res = scale > 0.0 ? worst / scale : 0.0;
        if (first) {
            rep.K = k;
            first = false;
        } else {
            res = std::max(res, std::abs(k - rep.K) / (1.0 + std::abs(rep.K)));
        }
        rep.residual = std::max(rep.residual, res);
    }
    rep.is_constant = rep.residual < 1e-9;
    rep.K_exact = Number::snap(rep.K, 1e-9);
    return rep;
}

ExprMatrix hessian_residual(const Expr &g, const Chart &chart, const Expr &mc)
{
    const std::size_t n = chart.dim();
    const auto &ids = chart.space->q_ids;
    const Christoffel gm = christoffel(chart);
    const ExprMatrix gl = chart.metric();
    std::vector<Expr> dg(n);
    for (std::size_t k = 0; k < n; ++k) {
        dg[k] = diff(g, ids[k]);
    }
    ExprMatrix out(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            std::vector<Expr> terms{diff(dg[i], ids[j]), mc * gl[i][j] * g};
            for (std::size_t k = 0; k < n; ++k) {
                if (!gm[k][i][j].is_zero()) {
                    terms.push_back(-(gm[k][i][j] * dg[k]));
                }
            }
            out[i][j] = normalize(make_sum(std::move(terms)));
            out[j][i] = out[i][j];
        }
    }
    return out;
}

std::vector<Number> admissible_c(const Chart &chart, int m, const Binding &params)
{
    if (m < 1) {
        throw std::invalid_argument("m must be a positive integer");
    }
    if (chart.family == ChartFamily::euclidean) {
        return {Number(0)};
    }
    const CurvatureReport rep = curvature(chart, params);
    if (!rep.is_constant) {
        throw NonConstantCurvature(fmt::format("chart '{}' does not have constant curvature (residual {:.3g})", chart.id, rep.residual));
    }
    if (std::abs(rep.K) < 1e-12) {
        return {Number(0)};
    }
    return {rep.K_exact / Number(m)};
}

int hessian_solution_dim(const Chart &chart, const std::vector<Expr> &basis, const Expr &mc, const Binding &params,
                         int samples, std::uint64_t seed)
{
    const std::size_t n = chart.dim();
    const auto nb = static_cast<Eigen::Index>(basis.size());
    std::vector<ExprMatrix> res;
    res.reserve(basis.size());
    for (const auto &phi : basis) {
        res.push_back(hessian_residual(phi, chart, mc));
    }
    Sampler sampler(chart.sampler_config(seed));
    const auto comps = static_cast<Eigen::Index>(n * (n + 1) / 2);
    CMatrix h(samples * comps, nb);
    CMatrix v(samples, nb);
    for (int s = 0; s < samples; ++s) {
        const Binding b = sampler.draw(chart.coords, params);
        Eigen::Index row = s * comps;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j, ++row) {
                // scale by term magnitude so rows that only carry roundoff stay small
                double scale = 0.0;
                for (Eigen::Index k = 0; k < nb; ++k) {
                    const Expr &e = res[static_cast<std::size_t>(k)][i][j];
                    h(row, k) = eval(e, b);
                    scale = std::max(scale, eval_magnitude(e, b));
                }
                if (scale > 0.0) {
                    h.row(row) /= scale;
                }
            }
        }
        for (Eigen::Index k = 0; k < nb; ++k) {
            v(s, k) = eval(basis[static_cast<std::size_t>(k)], b);
        }
    }
    return static_cast<int>(nullspace(h).cols() - nullspace(v).cols());
}

} // namespace hamext
