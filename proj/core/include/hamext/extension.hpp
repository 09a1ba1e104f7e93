#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hamext/geometry.hpp"
#include "hamext/linalg.hpp"
#include "hamext/phasepoly.hpp"

namespace hamext {

class UnsupportedChart : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InadmissibleSpec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// G = sum_i g_i phi_i over a tabulated complete solution of the Hessian equation.
struct GAnsatz {
    std::vector<Expr> basis;
    /// Coefficient symbols g0, g1, ...
    std::vector<std::string> coeffs;

    [[nodiscard]] Expr general() const;
    /// sum_i v_i phi_i with the entries snapped to short rationals where possible.
    [[nodiscard]] Expr combine(const CVector &v) const;
};

/// E^n: {1, x_1..x_n}; S^2: {cos theta, sin phi sin theta, cos phi sin theta};
/// TTW chart: {C_chi(x1), S_zeta(x2) S_chi(x1), C_zeta(x2) S_chi(x1)}.
GAnsatz g_basis(const Chart &chart, int m = 1);

struct ExtensionSpec {
    int m = 1;
    Expr c{0};
    Expr kappa{0};
    Expr u0{0};
    Expr L0{0};
    Expr V0{0};
    Expr W0{0};
    Expr A{1};

    [[nodiscard]] bool flat() const { return normalize(c).is_zero(); }
    /// Flat branch with L0 = 0 (p_u is then conserved and the extension is trivial).
    [[nodiscard]] bool trivial() const { return flat() && normalize(L0).is_zero(); }

    /// c = 0, A = 1/m, u0 = V0 = 0.
    static ExtensionSpec flat_default(int m, Expr L0);
    /// c given, kappa = m^2, L0 = u0 = W0 = 0.
    static ExtensionSpec curved_default(int m, Expr c);
};

std::string describe(const ExtensionSpec &spec);

/// c = 0: -A(u + u0); otherwise C_kappa(cu + u0)/S_kappa(cu + u0).
Expr gamma_expr(const ExtensionSpec &spec, std::string_view u = "u");

/// Throws InadmissibleSpec when c is not the chart's admissible value (c = 0 on
/// flat charts, K/m otherwise) or when the flat branch has A = 0.
void check_admissible(const Chart &chart, const ExtensionSpec &spec, const Binding &params = {});

/// g^ij d_iV d_jG - 2m(cV + L0)G
Expr compatibility_residual(const Chart &chart, const Expr &v, const Expr &g, int m, const Expr &c, const Expr &L0);

struct NullspaceResult {
    /// Orthonormal basis (columns) of admissible coefficient vectors.
    CMatrix basis;
    /// Same span in reduced echelon form.
    CMatrix readable;
    Eigen::VectorXd singular_values;
    [[nodiscard]] int dim() const { return static_cast<int>(basis.cols()); }
};

/// Samples the compatibility residual (linear in the g_i) at random points; numeric
/// values for all parameters come from `params`.
NullspaceResult compatibility_nullspace(const Chart &chart, const Expr &v, const GAnsatz &ansatz, int m, const Expr &c,
                                        const Expr &L0, const Binding &params, Sampler &sampler, int samples = 0);

/// Candidate L0 values making the compatibility system singular, each confirmed by
/// a nonzero nullspace.
std::vector<cplx> admissible_L0(const Chart &chart, const Expr &v, const GAnsatz &ansatz, int m, const Expr &c,
                                const Binding &params, Sampler &sampler, int samples = 0);

/// max over points of |R| / (sum of term magnitudes of R).
double max_compatibility_residual(const Chart &chart, const Expr &v, const Expr &g, int m, const Expr &c, const Expr &L0,
                                  const Binding &params, Sampler &sampler, int points);

struct NamedIntegral {
    std::string name;
    MomentumPolynomial f;
};

struct ExtendedSystem {
    Chart chart;
    PhaseSpacePtr space;
    /// Base Hamiltonian lifted to the extended phase space.
    MomentumPolynomial L;
    ExtensionSpec spec;
    Expr G;
    std::string u;
    MomentumPolynomial H;
    /// H, L, the inherited integrals, then F = U^m G.
    std::vector<NamedIntegral> integrals;

    [[nodiscard]] const MomentumPolynomial &F() const { return integrals.back().f; }
};

/// Extended phase space (u, q...).
PhaseSpacePtr extended_space(const Chart &chart, std::string_view u = "u");

/// c = 0: 1/2 p_u^2 + mA(L + V0) + m L0 A^2 (u + u0)^2;
/// otherwise 1/2 p_u^2 + m(cL + L0)/S_kappa^2(cu + u0) + W0.
MomentumPolynomial extended_hamiltonian(const ExtensionSpec &spec, const MomentumPolynomial &lifted_l, std::string_view u = "u");

/// p_u F + gamma(u) {L, F}
MomentumPolynomial u_apply(const ExtensionSpec &spec, const MomentumPolynomial &lifted_l, const MomentumPolynomial &f,
                           std::string_view u = "u");
MomentumPolynomial first_integral_iterative(const ExtensionSpec &spec, const MomentumPolynomial &lifted_l, const Expr &g,
                                            int power, std::string_view u = "u");
/// P_m G + D_m X_L G with the binomial sums in gamma, p_u and (-2m(cL + L0))^k.
MomentumPolynomial first_integral_closed(const ExtensionSpec &spec, const MomentumPolynomial &lifted_l, const Expr &g,
                                         int power, std::string_view u = "u");

/// Builds H and F = U^m G (iteratively). `inherited` are integrals of L over the base chart.
ExtendedSystem extend(const Chart &chart, const MomentumPolynomial &l, const ExtensionSpec &spec, const Expr &g,
                      const std::vector<NamedIntegral> &inherited = {}, std::string u = "u", bool closed_form = false);

struct ChainStep {
    int m = 1;
    Expr L0;
    Expr G;
};

struct OscillatorChain {
    Chart chart;
    /// H_1..H_n then U^{m_1}G_1..U^{m_{n-1}}G_{n-1}, all over the final phase space.
    std::vector<NamedIntegral> integrals;
    MomentumPolynomial H;
    std::vector<ChainStep> steps;
    /// Coefficient of x_k^2 in the potential.
    std::vector<Expr> frequencies;
};

/// Starts from 1/2 p_1^2 + omega x_1^2 and extends with m_1, m_2, ... taking G_k = x_k
/// and L0 = (coefficient of x_k^2)/m_k; coordinates x1..x_{n}.
OscillatorChain iterate_extend(const Expr &omega, const std::vector<int> &chain);

} // namespace hamext
