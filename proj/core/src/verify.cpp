#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "hamext/verify.hpp"

namespace hamext {

namespace {

Binding bind_state(const PhaseSpace &space, const State &y, const Binding &params)
{
    Binding b = params;
    const std::size_t n = space.dim();
    for (std::size_t i = 0; i < n; ++i) {
        b.set(space.q_ids[i], y[i]);
        b.set(space.p_ids[i], y[n + i]);
    }
    return b;
}

State state_of(const PhaseSpace &space, const Binding &b)
{
    const std::size_t n = space.dim();
    State y(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = b.get(space.q_ids[i])->real();
        y[n + i] = b.get(space.p_ids[i])->real();
    }
    return y;
}

double bracket_scale(const std::vector<cplx> &gh, const std::vector<cplx> &gf, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += std::abs(gh[n + i] * gf[i]) + std::abs(gh[i] * gf[n + i]);
    }
    return s;
}

cplx bracket_value(const std::vector<cplx> &gh, const std::vector<cplx> &gf, std::size_t n)
{
    cplx a = 0.0;
    cplx b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        a += gh[n + i] * gf[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        b += gh[i] * gf[n + i];
    }
    return a - b;
}

class HamiltonianFlow {
public:
    HamiltonianFlow(const MomentumPolynomial &h, const Binding &params) : space_(h.space()), grad_(h), params_(params) {}

    void operator()(const State &y, State &dy) const
    {
        const auto g = grad_(bind_state(*space_, y, params_));
        const std::size_t n = space_->dim();
        dy.resize(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            dy[i] = g[n + i].real();
            dy[n + i] = -g[i].real();
        }
    }

private:
    PhaseSpacePtr space_;
    GradientField grad_;
    Binding params_;
};

// Dormand-Prince tableau
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

} // namespace

Binding draw_phase_point(Sampler &sampler, const PhaseSpace &space, const Binding &params)
{
    std::vector<std::string> names = space.coords;
    names.insert(names.end(), space.momenta.begin(), space.momenta.end());
    return sampler.draw(names, params);
}

double bracket_residual_max(const MomentumPolynomial &h, const MomentumPolynomial &f, Sampler &sampler, int points,
                            const Binding &params)
{
    if (!h.space()->same_as(*f.space())) {
        throw ChartMismatch("bracket of polynomials over different phase spaces");
    }
    const std::size_t n = h.space()->dim();
    const GradientField gh(h);
    const GradientField gf(f);
    double worst = 0.0;
    int done = 0;
    int failures = 0;
    while (done < points) {
        const Binding pt = draw_phase_point(sampler, *h.space(), params);
        try {
            const auto a = gh(pt);
            const auto b = gf(pt);
            const double scale = bracket_scale(a, b, n);
            const double val = std::abs(bracket_value(a, b, n));
            if (!std::isfinite(scale) || !std::isfinite(val)) {
                throw PoleError("non-finite gradient");
            }
            if (val > 0.0) {
                worst = std::max(worst, scale > 0.0 ? val / scale : std::numeric_limits<double>::infinity());
            }
            ++done;
        } catch (const EvalError &) {
            if (++failures > 50 * points) {
                throw SamplerExhausted("every phase point hit a pole");
            }
        }
    }
    return worst;
}

IntegratorStats integrate_hamiltonian(const MomentumPolynomial &h, State &y, double t_end, double tol,
                                      const Binding &params, const std::function<void(double, const State &)> &observe)
{
    const HamiltonianFlow flow(h, params);
    const std::size_t d = y.size();
    State k1(d), k2(d), k3(d), k4(d), k5(d), k6(d), k7(d), tmp(d), next(d);
    // compensated summation of the increments
    State carry(d, 0.0), next_carry(d, 0.0);
    IntegratorStats stats;
    double t = 0.0;
    double step = std::min(1e-2, t_end);
    const double h_min = 1e-13 * std::max(1.0, t_end);
    flow(y, k1);
    if (observe) {
        observe(t, y);
    }
    while (t < t_end) {
        step = std::min(step, t_end - t);
        auto stage = [&](State &out, std::initializer_list<std::pair<double, const State *>> terms) {
            for (std::size_t i = 0; i < d; ++i) {
                double acc = y[i];
                for (const auto &[w, k] : terms) {
                    acc += step * w * (*k)[i];
                }
                tmp[i] = acc;
            }
            flow(tmp, out);
        };
        bool finite = true;
        try {
            stage(k2, {{a21, &k1}});
            stage(k3, {{a31, &k1}, {a32, &k2}});
            stage(k4, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
            stage(k5, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
            stage(k6, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
            for (std::size_t i = 0; i < d; ++i) {
                const double inc = step * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]) - carry[i];
                next[i] = y[i] + inc;
                next_carry[i] = (next[i] - y[i]) - inc;
            }
            flow(next, k7);
        } catch (const EvalError &) {
            finite = false;
        }
        double err = 0.0;
        if (finite) {
            for (std::size_t i = 0; i < d; ++i) {
                const double e =
                    step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                err = std::max(err, std::abs(e) / (1.0 + std::max(std::abs(y[i]), std::abs(next[i]))));
                finite = finite && std::isfinite(next[i]) && std::isfinite(k7[i]);
            }
            err /= tol * step;
        }
        if (finite && err <= 1.0) {
            t += step;
            y.swap(next);
            carry.swap(next_carry);
            k1.swap(k7);
            ++stats.accepted;
            if (observe) {
                observe(t, y);
            }
            const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.25), 0.2, 5.0);
            step *= grow;
        } else {
            ++stats.rejected;
            step *= finite ? std::clamp(0.9 * std::pow(err, -0.25), 0.1, 0.9) : 0.25;
            if (step < h_min) {
                throw IntegrationError(fmt::format("step size underflow at t = {:.6g}", t), t);
            }
        }
    }
    return stats;
}

DriftReport conservation_drift(const MomentumPolynomial &h, const std::vector<MomentumPolynomial> &integrals,
                               const State &initial, double t_end, double tol, const Binding &params)
{
    const auto &space = *h.space();
    for (const auto &f : integrals) {
        if (!f.space()->same_as(space)) {
            throw ChartMismatch("integral over a different phase space");
        }
    }
    std::vector<double> start;
    for (const auto &f : integrals) {
        start.push_back(eval_poly(f, bind_state(space, initial, params)).real());
    }
    DriftReport r;
    r.drift.assign(integrals.size(), 0.0);
    State y = initial;
    r.stats = integrate_hamiltonian(h, y, t_end, tol, params, [&](double, const State &s) {
        const Binding b = bind_state(space, s, params);
        for (std::size_t k = 0; k < integrals.size(); ++k) {
            const double v = eval_poly(integrals[k], b).real();
            r.drift[k] = std::max(r.drift[k], std::abs(v - start[k]) / (1.0 + std::abs(start[k])));
        }
    });
    return r;
}

RankReport independence_rank(const std::vector<MomentumPolynomial> &integrals, Sampler &sampler, int points,
                             const Binding &params)
{
    if (integrals.empty()) {
        throw std::invalid_argument("independence_rank needs at least one integral");
    }
    const auto &space = *integrals.front().space();
    std::vector<GradientField> grads;
    for (const auto &f : integrals) {
        if (!f.space()->same_as(space)) {
            throw ChartMismatch("integrals over different phase spaces");
        }
        grads.emplace_back(f);
    }
    const auto rows = static_cast<Eigen::Index>(integrals.size());
    const auto cols = static_cast<Eigen::Index>(2 * space.dim());
    std::map<int, int> counts;
    RankReport r;
    r.gap = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, double>> per_point;
    int failures = 0;
    while (static_cast<int>(per_point.size()) < points) {
        const Binding pt = draw_phase_point(sampler, space, params);
        CMatrix m(rows, cols);
        try {
            for (Eigen::Index i = 0; i < rows; ++i) {
                const auto g = grads[static_cast<std::size_t>(i)](pt);
                for (Eigen::Index j = 0; j < cols; ++j) {
                    m(i, j) = g[static_cast<std::size_t>(j)];
                }
            }
            if (!m.allFinite()) {
                throw PoleError("non-finite gradient");
            }
        } catch (const EvalError &) {
            if (++failures > 50 * points) {
                throw SamplerExhausted("every phase point hit a pole");
            }
            continue;
        }
        const Eigen::VectorXd s = singular_values(normalize_rows(m));
        int rank = 0;
        while (rank < s.size() && s(rank) > 1e-8 * s(0)) {
            ++rank;
        }
        const double gap = rank < s.size() ? s(rank - 1) / std::max(s(rank), 1e-300) : std::numeric_limits<double>::infinity();
        per_point.emplace_back(rank, gap);
        ++counts[rank];
    }
    r.rank = std::max_element(counts.begin(), counts.end(), [](auto &a, auto &b) { return a.second < b.second; })->first;
    for (const auto &[rank, gap] : per_point) {
        if (rank == r.rank) {
            r.gap = std::min(r.gap, gap);
        }
    }
    r.points = points;
    return r;
}

namespace {

double hessian_check(const ExtendedSystem &ext, Sampler &sampler, const Binding &params, int points)
{
    const auto r = hessian_residual(ext.G, ext.chart, Expr(ext.spec.m) * ext.spec.c);
    double worst = 0.0;
    int done = 0;
    int failures = 0;
    while (done < points) {
        const Binding b = sampler.draw(ext.chart.coords, params);
        try {
            for (const auto &row : r) {
                for (const auto &e : row) {
                    const double mag = eval_magnitude(e, b);
                    const double v = std::abs(eval(e, b));
                    if (v > 0.0) {
                        worst = std::max(worst, mag > 0.0 ? v / mag : v);
                    }
                }
            }
            ++done;
        } catch (const EvalError &) {
            if (++failures > 50 * points) {
                throw SamplerExhausted("every sample hit a pole");
            }
        }
    }
    return worst;
}

std::string fmt_num(double v) { return fmt::format("{:.3g}", v); }

} // namespace

SamplerConfig extended_sampler_config(const ExtendedSystem &ext, std::uint64_t seed, bool complex)
{
    SamplerConfig c = ext.chart.sampler_config(seed, complex);
    if (!ext.spec.flat()) {
        c.avoid.push_back(s_kappa(ext.spec.kappa, ext.spec.c * Expr::symbol(ext.u, SymbolKind::coordinate) + ext.spec.u0));
    }
    // keep a wider distance from the poles of the coefficients than from the chart singularities
    std::set<Expr, ExprLess> poles;
    for (const auto &[k, coef] : ext.H.terms()) {
        for (const auto &a : denominator_atoms(coef)) {
            poles.insert(a);
        }
    }
    for (const auto &a : poles) {
        c.avoid.push_back(a * Expr(Number(Rational(1, 10))));
    }
    if (complex) {
        c.imag_scale = 0.25;
    }
    return c;
}

VerificationReport certify(const ExtendedSystem &ext, const VerifyConfig &config)
{
    VerificationReport rep;
    rep.target = config.target;
    rep.seed = config.seed;
    rep.config = config;
    rep.points = config.points;
    const bool complex = !config.real_domain;
    std::vector<std::string> failures;

    Sampler chart_sampler(ext.chart.sampler_config(config.seed, complex));
    rep.hessian_residual = hessian_check(ext, chart_sampler, config.params, config.points);
    if (rep.hessian_residual > config.bracket_tol) {
        failures.push_back(fmt::format("Hessian residual {}", fmt_num(rep.hessian_residual)));
    }
    const Expr v = ext.L.coefficient(MultiIndex(ext.space->dim(), 0));
    rep.compatibility_residual = max_compatibility_residual(ext.chart, v, ext.G, ext.spec.m, ext.spec.c, ext.spec.L0,
                                                            config.params, chart_sampler, config.points);
    if (rep.compatibility_residual > config.bracket_tol) {
        failures.push_back(fmt::format("compatibility residual {}", fmt_num(rep.compatibility_residual)));
    }

    Sampler phase(extended_sampler_config(ext, config.seed + 1, complex));
    for (const auto &i : ext.integrals) {
        const double r = bracket_residual_max(ext.H, i.f, phase, config.points, config.params);
        rep.bracket.emplace_back(i.name, r);
        rep.bracket_max = std::max(rep.bracket_max, r);
        if (r > config.bracket_tol) {
            failures.push_back(fmt::format("{{H, {}}} residual {}", i.name, fmt_num(r)));
        }
    }

    std::vector<MomentumPolynomial> fs;
    for (const auto &i : ext.integrals) {
        fs.push_back(i.f);
    }
    Sampler rank_sampler(extended_sampler_config(ext, config.seed + 2, complex));
    const RankReport rank = independence_rank(fs, rank_sampler, config.rank_points, config.params);
    rep.rank = rank.rank;
    rep.gap = rank.gap;
    rep.expected_rank = static_cast<int>(2 * (ext.chart.dim() + 1) - 1);
    std::vector<std::string> rank_failures;
    if (rep.rank != rep.expected_rank) {
        rank_failures.push_back(fmt::format("independence rank {} (expected {})", rep.rank, rep.expected_rank));
    } else if (rank.gap < 1e6) {
        rank_failures.push_back(fmt::format("singular-value gap {}", fmt_num(rank.gap)));
    }

    if (config.real_domain && config.trajectories > 0) {
        rep.drift_run = true;
        rep.drift.assign(fs.size(), {"", 0.0});
        for (std::size_t k = 0; k < fs.size(); ++k) {
            rep.drift[k].first = ext.integrals[k].name;
        }
        Sampler starts(extended_sampler_config(ext, config.seed + 3, false));
        try {
            for (int t = 0; t < config.trajectories; ++t) {
                const Binding b = draw_phase_point(starts, *ext.space, config.params);
                const auto d = conservation_drift(ext.H, fs, state_of(*ext.space, b), config.t_end, config.tol, config.params);
                for (std::size_t k = 0; k < fs.size(); ++k) {
                    rep.drift[k].second = std::max(rep.drift[k].second, d.drift[k]);
                    rep.drift_max = std::max(rep.drift_max, d.drift[k]);
                }
            }
            if (rep.drift_max > config.drift_tol) {
                failures.push_back(fmt::format("trajectory drift {}", fmt_num(rep.drift_max)));
            }
        } catch (const IntegrationError &e) {
            rep.drift_note = e.what();
            failures.push_back(fmt::format("integration failed: {}", e.what()));
        }
    } else {
        rep.drift_note = config.real_domain ? "no trajectories requested" : "complex domain: algebraic checks only";
    }

    // a trivial extension is only expected to conserve its integrals
    if (!ext.spec.trivial() && config.base_complete) {
        failures.insert(failures.end(), rank_failures.begin(), rank_failures.end());
    }
    if (!failures.empty()) {
        std::string why = failures.front();
        for (std::size_t k = 1; k < failures.size(); ++k) {
            why += "; " + failures[k];
        }
        rep.verdict = "failed: " + why;
        rep.passed = false;
    } else if (ext.spec.trivial()) {
        rep.verdict = "trivial";
        rep.passed = false;
    } else {
        rep.verdict = config.base_complete ? certified_verdict : partial_verdict;
        rep.passed = true;
    }
    return rep;
}

std::string VerificationReport::to_json(int indent) const
{
    using json = nlohmann::ordered_json;
    json j;
    j["target"] = target;
    j["seed"] = seed;
    json br;
    br["max"] = bracket_max;
    br["tolerance"] = config.bracket_tol;
    br["points"] = points;
    json per = json::object();
    for (const auto &[name, r] : bracket) {
        per[name] = r;
    }
    br["integrals"] = std::move(per);
    br["hessian"] = hessian_residual;
    br["compatibility"] = compatibility_residual;
    j["bracket"] = std::move(br);
    json dr;
    dr["run"] = drift_run;
    if (!drift_note.empty()) {
        dr["note"] = drift_note;
    }
    if (drift_run) {
        dr["T"] = config.t_end;
        dr["tol"] = config.tol;
        dr["trajectories"] = config.trajectories;
        dr["max"] = drift_max;
        json d = json::object();
        for (const auto &[name, r] : drift) {
            d[name] = r;
        }
        dr["integrals"] = std::move(d);
    }
    j["drift"] = std::move(dr);
    j["rank"] = rank;
    j["verdict"] = verdict;
    j["passed"] = passed;
    j["expected_rank"] = expected_rank;
    j["gap"] = std::isfinite(gap) ? json(gap) : json("inf");
    json ps = json::object();
    for (const auto &[name, v] : config.param_values) {
        ps[name] = v.imag() == 0.0 ? json(v.real()) : json(Number::inexact(v).to_string());
    }
    j["params"] = std::move(ps);
    return j.dump(indent);
}

} // namespace hamext
