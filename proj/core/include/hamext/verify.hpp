#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hamext/extension.hpp"

namespace hamext {

/// Coordinates and momenta of `space` drawn on top of `params`; unbound boxes fall
/// back to the sampler's default box.
Binding draw_phase_point(Sampler &sampler, const PhaseSpace &space, const Binding &params);

/// max over N points of |{H,F}| / sum_i (|dH/dp_i dF/dq^i| + |dH/dq^i dF/dp_i|).
double bracket_residual_max(const MomentumPolynomial &h, const MomentumPolynomial &f, Sampler &sampler, int points,
                            const Binding &params = {});

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string &what, double time) : std::runtime_error(what), time_(time) {}
    [[nodiscard]] double time() const { return time_; }

private:
    double time_;
};

/// Phase point as (q^1..q^n, p_1..p_n).
using State = std::vector<double>;

struct IntegratorStats {
    int accepted = 0;
    int rejected = 0;
};

/// Dormand-Prince 5(4) with error-per-unit-step control: a step is accepted when
/// max_i |err_i| / (1 + |y_i|) <= tol * h. `observe(t, y)` runs after every accepted step.
IntegratorStats integrate_hamiltonian(const MomentumPolynomial &h, State &y, double t_end, double tol,
                                      const Binding &params = {},
                                      const std::function<void(double, const State &)> &observe = {});

struct DriftReport {
    std::vector<double> drift;
    IntegratorStats stats;
};

/// max_t |I(t) - I(0)| / (1 + |I(0)|) for each integral along the flow of H.
DriftReport conservation_drift(const MomentumPolynomial &h, const std::vector<MomentumPolynomial> &integrals,
                               const State &initial, double t_end, double tol, const Binding &params = {});

struct RankReport {
    /// Most frequent rank over the sampled points.
    int rank = 0;
    /// Smallest sigma_rank / sigma_{rank+1} over the points (infinite when the rank is full).
    double gap = 0.0;
    int points = 0;
};

/// Stacks unit-normalized phase gradients; rank counts singular values above 1e-8 sigma_max.
RankReport independence_rank(const std::vector<MomentumPolynomial> &integrals, Sampler &sampler, int points,
                             const Binding &params = {});

/// Chart sampler plus the zero set of S_kappa(cu + u0) on curved branches.
SamplerConfig extended_sampler_config(const ExtendedSystem &ext, std::uint64_t seed, bool complex);

struct VerifyConfig {
    std::string target;
    std::uint64_t seed = 20120;
    int points = 100;
    int rank_points = 50;
    int trajectories = 1;
    double t_end = 10.0;
    double tol = 1e-10;
    double bracket_tol = 1e-9;
    double drift_tol = 1e-6;
    bool real_domain = true;
    /// The inherited integrals make the base system superintegrable; when false the
    /// rank requirement is waived and the verdict says so.
    bool base_complete = true;
    /// Values for every symbolic parameter left in the system.
    Binding params;
    /// Names bound in `params`, for the report.
    std::vector<std::pair<std::string, cplx>> param_values;
};

struct VerificationReport {
    std::string target;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> bracket;
    double bracket_max = 0.0;
    double hessian_residual = 0.0;
    double compatibility_residual = 0.0;
    int points = 0;
    bool drift_run = false;
    std::string drift_note;
    std::vector<std::pair<std::string, double>> drift;
    double drift_max = 0.0;
    int rank = 0;
    int expected_rank = 0;
    double gap = 0.0;
    std::string verdict;
    bool passed = false;
    VerifyConfig config;

    [[nodiscard]] std::string to_json(int indent = 2) const;
};

inline constexpr const char *certified_verdict = "superintegrable-certified";
inline constexpr const char *partial_verdict = "extension-certified; base superintegrability unverified";

/// Hessian equation for G, compatibility of (V, G), {H, I} for every integral, the
/// independence rank against 2(n+1)-1 and, for real systems, trajectory drift.
VerificationReport certify(const ExtendedSystem &ext, const VerifyConfig &config);

} // namespace hamext
