#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hamext/expr.hpp"

namespace hamext {

/// Canonical coordinates of a cotangent bundle: configuration coordinates q^i and
/// their conjugate momenta p_i (named "p_<q>" unless given).
struct PhaseSpace {
    std::string id;
    std::vector<std::string> coords;
    std::vector<std::string> momenta;
    std::vector<SymbolId> q_ids;
    std::vector<SymbolId> p_ids;

    [[nodiscard]] std::size_t dim() const { return coords.size(); }
    /// Coordinates and momenta, tagged with their kinds.
    [[nodiscard]] SymbolTable symbols() const;
    [[nodiscard]] bool same_as(const PhaseSpace &o) const { return coords == o.coords && momenta == o.momenta; }
};

using PhaseSpacePtr = std::shared_ptr<const PhaseSpace>;

PhaseSpacePtr make_phase_space(std::string id, std::vector<std::string> coords, std::vector<std::string> momenta = {});

class ChartMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using MultiIndex = std::vector<int>;

/// Polynomial in the momenta with configuration-dependent coefficients, kept in
/// normal form: every stored coefficient is normalized and nonzero.
class MomentumPolynomial {
public:
    explicit MomentumPolynomial(PhaseSpacePtr space);
    MomentumPolynomial(PhaseSpacePtr space, std::map<MultiIndex, Expr> terms);

    static MomentumPolynomial constant(PhaseSpacePtr space, const Expr &c);
    static MomentumPolynomial momentum(PhaseSpacePtr space, std::size_t i);
    /// Splits `e` by powers of the momenta; throws std::invalid_argument when `e` is
    /// not polynomial in them.
    static MomentumPolynomial from_expr(PhaseSpacePtr space, const Expr &e);

    [[nodiscard]] const PhaseSpacePtr &space() const { return space_; }
    [[nodiscard]] const std::map<MultiIndex, Expr> &terms() const { return terms_; }
    [[nodiscard]] Expr coefficient(const MultiIndex &alpha) const;
    [[nodiscard]] int degree() const;
    [[nodiscard]] bool is_zero() const { return terms_.empty(); }
    [[nodiscard]] std::size_t size() const { return terms_.size(); }
    [[nodiscard]] Expr to_expr() const;

    [[nodiscard]] MomentumPolynomial scaled(const Expr &c) const;
    [[nodiscard]] MomentumPolynomial substitute(const std::map<std::string, Expr, std::less<>> &rep) const;
    /// Re-expresses over `target`, whose momenta must include all of this one's (by name).
    [[nodiscard]] MomentumPolynomial lift(const PhaseSpacePtr &target) const;

    friend MomentumPolynomial operator+(const MomentumPolynomial &a, const MomentumPolynomial &b);
    friend MomentumPolynomial operator-(const MomentumPolynomial &a, const MomentumPolynomial &b);
    friend MomentumPolynomial operator-(const MomentumPolynomial &a);
    friend MomentumPolynomial operator*(const MomentumPolynomial &a, const MomentumPolynomial &b);
    friend bool operator==(const MomentumPolynomial &a, const MomentumPolynomial &b);

private:
    PhaseSpacePtr space_;
    std::map<MultiIndex, Expr> terms_;
};

std::string to_string(const MomentumPolynomial &f);
std::ostream &operator<<(std::ostream &os, const MomentumPolynomial &f);

/// {F,G} = sum_i dF/dp_i dG/dq^i - dF/dq^i dG/dp_i.
MomentumPolynomial poisson(const MomentumPolynomial &f, const MomentumPolynomial &g);
/// Coefficientwise is_identically_zero of a - b.
bool symbolically_equal(const MomentumPolynomial &a, const MomentumPolynomial &b);
/// Hamiltonian vector field of L applied to F: {L, F}.
MomentumPolynomial x_apply(const MomentumPolynomial &l, const MomentumPolynomial &f);

/// Throws UnboundSymbol when `pt` misses a coordinate, momentum or parameter.
cplx eval_poly(const MomentumPolynomial &f, const Binding &pt);
/// Sum of |term| over the expanded terms at `pt`.
double eval_poly_magnitude(const MomentumPolynomial &f, const Binding &pt);
/// (dF/dq^1..dF/dq^N, dF/dp_1..dF/dp_N) at `pt`.
std::vector<cplx> phase_gradient(const MomentumPolynomial &f, const Binding &pt);

/// Symbolic partial derivatives, cached for repeated evaluation.
class GradientField {
public:
    explicit GradientField(const MomentumPolynomial &f);
    [[nodiscard]] std::vector<cplx> operator()(const Binding &pt) const;
    [[nodiscard]] const std::vector<MomentumPolynomial> &components() const { return parts_; }

private:
    std::vector<MomentumPolynomial> parts_;
};

MomentumPolynomial diff_q(const MomentumPolynomial &f, std::size_t i);
MomentumPolynomial diff_p(const MomentumPolynomial &f, std::size_t i);

/// {"chart", "vars": [q..., p...], "terms": [{"powers": [...], "coeff": "..."}]}, terms
/// sorted by multi-index.
std::string to_json(const MomentumPolynomial &f, int indent = -1);
MomentumPolynomial polynomial_from_json(std::string_view text, const SymbolTable &params);

} // namespace hamext
