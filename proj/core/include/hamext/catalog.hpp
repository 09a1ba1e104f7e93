#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hamext/extension.hpp"
#include "hamext/verify.hpp"

namespace hamext {

class CatalogError : public std::runtime_error {
public:
    CatalogError(const std::string &what, std::string entry, std::size_t line);
    [[nodiscard]] const std::string &entry() const { return entry_; }
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::string entry_;
    std::size_t line_;
};

class UnknownEntry : public std::out_of_range {
public:
    explicit UnknownEntry(const std::string &id) : std::out_of_range("unknown catalog id '" + id + "'") {}
};

class ConstraintViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnboundParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Constraint {
    std::string name;
    /// Relations rel = 0 over the parameters, m and L0.
    std::vector<std::string> relation_text;
    std::vector<Expr> relations;
    /// Span of G the table predicts on this constraint.
    std::vector<std::string> expected_text;
    std::vector<Expr> expected_g;
};

struct KnownIntegral {
    std::string name;
    std::string text;
    MomentumPolynomial f;
};

struct SystemEntry {
    std::string id;
    std::string title;
    std::string chart_id;
    Chart chart;
    /// Potential parameters (chart parameters are in chart.params).
    std::vector<std::string> params;
    std::vector<std::pair<std::string, std::string>> lets;
    std::string potential_text;
    Expr V;
    std::vector<KnownIntegral> integrals;
    std::vector<Constraint> constraints;
    bool real_domain = false;
    /// The potential contains a harmonic term for some parameter values.
    bool harmonic = false;
    /// Shipped integrals make the base system superintegrable.
    bool complete = false;
    /// Nullspace dimension expected at generic parameters.
    int generic_dim = 0;
    std::size_t line = 0;

    /// Chart parameters then potential parameters.
    [[nodiscard]] std::vector<std::string> all_params() const;
    [[nodiscard]] MomentumPolynomial hamiltonian() const { return chart.hamiltonian(V); }
    [[nodiscard]] const Constraint *constraint(std::string_view name) const;
};

struct ChartDef {
    std::string id;
    ChartFamily family = ChartFamily::euclidean;
    std::vector<std::string> coords;
    std::vector<std::pair<std::string, Box>> boxes;
    std::vector<std::pair<std::string, std::string>> lets;
    Chart chart;
};

struct Catalog {
    std::string source;
    std::vector<ChartDef> charts;
    std::vector<SystemEntry> entries;

    [[nodiscard]] const SystemEntry &find(std::string_view id) const;
    [[nodiscard]] bool contains(std::string_view id) const;
};

struct ValidationFailure {
    std::string entry;
    std::string integral;
    double residual = 0.0;
};

class SelfValidationError : public std::runtime_error {
public:
    explicit SelfValidationError(std::vector<ValidationFailure> failures);
    [[nodiscard]] const std::vector<ValidationFailure> &failures() const { return failures_; }

private:
    std::vector<ValidationFailure> failures_;
};

/// Parses catalog text; `validate` runs the known-integral bracket check and throws
/// SelfValidationError listing every failing integral.
Catalog parse_catalog(std::string_view text, std::string source = "<memory>", bool validate = true);
Catalog load_catalog(const std::string &path, bool validate = true);
/// $HAMEXT_CATALOG, else the installed/source data file.
std::string default_catalog_path();
/// Canonical text; parse_catalog(format_catalog(c)) formats identically.
std::string format_catalog(const Catalog &c);

/// max |{L, I}| (relative) over 100 points at random parameter values.
std::vector<ValidationFailure> validate_entry(const SystemEntry &e, std::uint64_t seed = 20120, double tol = 1e-9);

/// Parameter values (chart and potential parameters, plus L0) for an extension of order m.
using ParamValues = std::map<std::string, Number, std::less<>>;

struct DrawOptions {
    /// Values fixed by the caller.
    ParamValues fixed;
    /// Constraint to impose; none draws generic values.
    const Constraint *constraint = nullptr;
    std::uint64_t seed = 20120;
    /// Draw complex values (defaults to !real_domain).
    std::optional<bool> complex;
    /// Round draws to multiples of 1/8 so that normal forms stay exact.
    bool exact = false;
};

/// Random values for the unfixed parameters, then each relation of the constraint is
/// solved for its first unfixed symbol (parameters in order, then L0). Throws
/// ConstraintViolation when a relation has no free symbol and does not hold.
ParamValues draw_parameters(const SystemEntry &e, int m, const DrawOptions &opt);

Binding to_binding(const ParamValues &v);

struct Instance {
    const SystemEntry *entry = nullptr;
    ParamValues values;
    /// Chart parameters stay symbolic; bind them with this.
    Binding chart_params;
    Expr V;
    MomentumPolynomial L{nullptr};
    std::vector<NamedIntegral> integrals;
    int m = 1;
    Expr c;
    Expr L0;

    [[nodiscard]] ExtensionSpec spec() const;
    [[nodiscard]] bool complex() const;
};

/// Substitutes the potential parameters. Throws UnboundParameter when a parameter (or
/// L0 on a flat chart) is missing and ConstraintViolation for a chart parameter on its
/// singular value (zeta = 0).
Instance instantiate(const SystemEntry &e, const ParamValues &values, int m);

/// Nullspace of the compatibility system at the instance's values.
NullspaceResult instance_nullspace(const Instance &inst, std::uint64_t seed = 20120, int samples = 0);

/// Extension built from one nullspace vector.
ExtendedSystem extend_instance(const Instance &inst, const Expr &g, bool closed_form = false);

struct ScanRow {
    std::string entry;
    std::string constraint;
    /// "on" the constraint manifold or "off" all constraints.
    std::string kind;
    int draw = 0;
    int expected_dim = 0;
    int dim = 0;
    /// Smallest principal cosine between the nullspace and the predicted span.
    double cosine = 1.0;
    std::string representative_g;
    double bracket = 0.0;
    bool extensible = false;
    /// dim and span agree with the table.
    bool matches = false;
    bool harmonic = false;
};

struct ScanOptions {
    int m = 2;
    int samples = 0;
    std::uint64_t seed = 20120;
    /// Generic draws per entry.
    int off_draws = 3;
    int bracket_points = 50;
};

/// "E2", "S2" or "TTW".
std::vector<ScanRow> scan_tables(const Catalog &cat, std::string_view family, const ScanOptions &opt);
std::string scan_to_json(const std::vector<ScanRow> &rows, int indent = 2);

struct TtwBranch {
    cplx amplitude;
    cplx xi;
    /// 1/(A^2 C_zeta(x2 + xi)^2) as an expression in x2.
    Expr F;
};

/// a1 S_zeta(x) + a2 C_zeta(x) = A S_zeta(x + xi).
TtwBranch recover_ttw_branch(cplx a1, cplx a2, cplx zeta, std::string_view x2 = "x2");

} // namespace hamext
