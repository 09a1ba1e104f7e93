#pragma once

#include <string>
#include <vector>

#include "hamext/expr.hpp"
#include "hamext/phasepoly.hpp"
#include "hamext/sampler.hpp"

namespace hamext {

/// Chart families with a tabulated complete solution of the Hessian equation.
enum class ChartFamily { euclidean, sphere, ttw, generic };

std::string_view family_name(ChartFamily f);

using ExprMatrix = std::vector<std::vector<Expr>>;

struct Chart {
    std::string id;
    ChartFamily family = ChartFamily::generic;
    std::vector<std::string> coords;
    ExprMatrix metric_inv;
    /// Chart-level parameters (the TTW chart's chi and zeta).
    std::vector<std::string> params;
    /// Expressions vanishing on the coordinate singularities.
    std::vector<Expr> singular;
    std::map<std::string, Box, std::less<>> boxes;
    PhaseSpacePtr space;

    [[nodiscard]] std::size_t dim() const { return coords.size(); }
    /// Coordinates, momenta and chart parameters.
    [[nodiscard]] SymbolTable symbols() const;
    /// Covariant components g_ij (closed-form inverse; diagonal or n <= 3).
    [[nodiscard]] ExprMatrix metric() const;
    /// 1/2 g^ij p_i p_j
    [[nodiscard]] MomentumPolynomial kinetic() const;
    [[nodiscard]] MomentumPolynomial hamiltonian(const Expr &potential) const;
    /// Sampling defaults: chart boxes plus the singular sets to avoid.
    [[nodiscard]] SamplerConfig sampler_config(std::uint64_t seed, bool complex = false) const;
};

/// Checks symmetry and sizes, builds the phase space.
Chart make_chart(std::string id, ChartFamily family, std::vector<std::string> coords, ExprMatrix metric_inv,
                 std::vector<std::string> params = {}, std::vector<Expr> singular = {});

/// Cartesian E^n.
Chart euclidean_chart(std::vector<std::string> coords, std::string id = "");
/// Unit sphere in (theta, phi).
Chart sphere_chart();
/// (x1, x2) with g^11 = 1, g^22 = 1/(zeta Sk(chi, x1)^2); curvature chi.
Chart ttw_chart();

/// Gamma[k][i][j] from the Levi-Civita formula, normalized.
using Christoffel = std::vector<ExprMatrix>;
Christoffel christoffel(const Chart &chart);

/// R[rho][sigma][mu][nu] = R^rho_{sigma mu nu}
/// = d_mu Gamma^rho_{nu sigma} - d_nu Gamma^rho_{mu sigma} + Gamma^rho_{mu l} Gamma^l_{nu sigma} - Gamma^rho_{nu l} Gamma^l_{mu sigma}.
std::vector<std::vector<ExprMatrix>> riemann(const Chart &chart);

struct CurvatureReport {
    bool is_constant = false;
    cplx K{0.0, 0.0};
    /// K snapped to a short rational when possible.
    Number K_exact;
    double residual = 0.0;
};

/// Samples R_{rsmn} - K (g_rm g_sn - g_rn g_sm) at random points (chart parameters
/// taken from `params`). Tolerance 1e-9 relative.
CurvatureReport curvature(const Chart &chart, const Binding &params = {}, int samples = 20, std::uint64_t seed = 20120);

/// nabla_i nabla_j G + mc g_ij G
ExprMatrix hessian_residual(const Expr &g, const Chart &chart, const Expr &mc);
inline ExprMatrix hessian_residual(const Expr &g, const Chart &chart, int m, const Expr &c)
{
    return hessian_residual(g, chart, Expr(m) * c);
}

class NonConstantCurvature : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// {0} on flat charts, {K/m} otherwise.
std::vector<Number> admissible_c(const Chart &chart, int m, const Binding &params = {});

/// Dimension of the space of functions sum a_j phi_j solving the Hessian equation
/// with the given mc: kernel of the sampled residual matrix minus the kernel of the
/// sampled evaluation matrix (linear relations among the phi_j themselves).
int hessian_solution_dim(const Chart &chart, const std::vector<Expr> &basis, const Expr &mc,
                         const Binding &params = {}, int samples = 40, std::uint64_t seed = 20120);

} // namespace hamext
