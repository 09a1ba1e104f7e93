#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hamext/number.hpp"

namespace hamext {

enum class SymbolKind : std::uint8_t { coordinate, momentum, parameter };

struct Symbol {
    std::string name;
    SymbolKind kind = SymbolKind::parameter;
};

using SymbolTable = std::vector<Symbol>;
using SymbolId = std::uint32_t;

/// Interned id for a symbol name. Ids are process-wide and stable.
SymbolId intern_symbol(std::string_view name);
const std::string &symbol_name(SymbolId id);

enum class Op : std::uint8_t { num, sym, func, pow, mul, add };

/// Sk(kappa, x) and Ck(kappa, x) are the curvature-tagged sine and its derivative:
/// sin(sqrt(kappa) x)/sqrt(kappa) (x at kappa = 0, sinh for kappa < 0) and cos(sqrt(kappa) x).
enum class Fn : std::uint8_t { sin, cos, sinh, cosh, exp, sk, ck };

std::string_view fn_name(Fn fn);

/// Immutable symbolic scalar expression. Copies share the underlying tree.
///
/// The arithmetic operators apply only structural folding (flattening of sums and
/// products, numeric literal folding, integer powers of powers); canonical forms
/// come from normalize().
class Expr {
public:
    Expr();
    Expr(Number n);                                    // NOLINT(google-explicit-constructor)
    Expr(std::int64_t n) : Expr(Number(n)) {}          // NOLINT(google-explicit-constructor)
    Expr(int n) : Expr(Number(std::int64_t{n})) {}     // NOLINT(google-explicit-constructor)

    static Expr symbol(std::string_view name, SymbolKind kind = SymbolKind::parameter);
    static Expr function(Fn fn, std::vector<Expr> args);
    static Expr power(const Expr &base, const Rational &exponent);

    [[nodiscard]] Op op() const;
    [[nodiscard]] const Number &number() const;
    [[nodiscard]] SymbolId symbol_id() const;
    [[nodiscard]] const std::string &name() const;
    [[nodiscard]] SymbolKind kind() const;
    [[nodiscard]] Fn fn() const;
    [[nodiscard]] const Rational &exponent() const;
    /// Operands: summands, factors, function arguments, or {base} for a power.
    [[nodiscard]] const std::vector<Expr> &args() const;
    [[nodiscard]] std::size_t hash() const;

    [[nodiscard]] bool is_number() const { return op() == Op::num; }
    [[nodiscard]] bool is_zero() const { return is_number() && number().is_zero(); }
    [[nodiscard]] bool is_one() const { return is_number() && number().is_one(); }
    [[nodiscard]] bool same_node(const Expr &o) const { return node_ == o.node_; }

    friend Expr operator+(const Expr &a, const Expr &b);
    friend Expr operator-(const Expr &a, const Expr &b);
    friend Expr operator*(const Expr &a, const Expr &b);
    friend Expr operator/(const Expr &a, const Expr &b);
    friend Expr operator-(const Expr &a);
    Expr &operator+=(const Expr &o) { return *this = *this + o; }
    Expr &operator-=(const Expr &o) { return *this = *this - o; }
    Expr &operator*=(const Expr &o) { return *this = *this * o; }

    struct Node;

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static Expr make(Node node);
    std::shared_ptr<const Node> node_;

    friend Expr make_sum(std::vector<Expr> terms);
    friend Expr make_product(std::vector<Expr> factors);
};

Expr make_sum(std::vector<Expr> terms);
Expr make_product(std::vector<Expr> factors);

Expr pow(const Expr &base, const Rational &exponent);
inline Expr pow(const Expr &base, std::int64_t exponent) { return pow(base, Rational(exponent)); }
Expr sqrt(const Expr &x);
Expr sin(const Expr &x);
Expr cos(const Expr &x);
Expr sinh(const Expr &x);
Expr cosh(const Expr &x);
Expr exp(const Expr &x);
Expr s_kappa(const Expr &kappa, const Expr &x);
Expr c_kappa(const Expr &kappa, const Expr &x);

/// Structural total order (deterministic across runs).
int compare(const Expr &a, const Expr &b);
bool operator==(const Expr &a, const Expr &b);
inline bool operator!=(const Expr &a, const Expr &b) { return !(a == b); }
struct ExprLess {
    bool operator()(const Expr &a, const Expr &b) const { return compare(a, b) < 0; }
};

/// Canonical printer; output re-parses to the same tree.
std::string to_string(const Expr &e);
std::ostream &operator<<(std::ostream &os, const Expr &e);

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string &what, std::size_t offset);
    [[nodiscard]] std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class UnknownIdentifier : public ParseError {
public:
    UnknownIdentifier(std::string ident, std::size_t offset);
    [[nodiscard]] const std::string &identifier() const { return ident_; }

private:
    std::string ident_;
};

/// Grammar:
///   expr   := ['-'] term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := base ('^' exponent)?
///   base   := number | ident | '(' expr ')' | func '(' args ')'
///   exponent := ['-'] integer | '(' ['-'] integer ['/' integer] ')'
/// Functions: sin cos sinh cosh exp sqrt Sk(kappa, x) Ck(kappa, x).
/// `i` is the imaginary unit and `pi` is always defined. Decimal literals are exact;
/// literals in exponent notation (1.5e-3) are inexact.
Expr parse_expr(std::string_view text, const SymbolTable &symbols);

/// Canonical form: expanded sum of monomials over atoms (symbols, functions with
/// normalized arguments, non-expandable powers), sorted terms, exact constant folding,
/// power collection. Idempotent.
Expr normalize(const Expr &e);

/// Exact partial derivative, returned normalized.
Expr diff(const Expr &e, std::string_view symbol);
Expr diff(const Expr &e, SymbolId symbol);

Expr substitute(const Expr &e, const std::map<std::string, Expr, std::less<>> &replacements);
std::set<std::string> free_symbols(const Expr &e);
bool depends_on(const Expr &e, std::string_view symbol);
/// Number of nodes in the tree.
std::size_t tree_size(const Expr &e);

/// Groups the normalized expansion of `e` by powers of `symbols`. Every power must be a
/// nonnegative integer; otherwise std::invalid_argument is thrown.
std::map<std::vector<int>, Expr> collect_powers(const Expr &e, const std::vector<SymbolId> &symbols);

class Binding {
public:
    Binding() = default;
    Binding &set(std::string_view name, cplx value);
    Binding &set(SymbolId id, cplx value);
    [[nodiscard]] std::optional<cplx> get(SymbolId id) const;
    [[nodiscard]] std::optional<cplx> get(std::string_view name) const;
    [[nodiscard]] bool has(SymbolId id) const { return get(id).has_value(); }

private:
    std::vector<cplx> values_;
    std::vector<bool> bound_;
};

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PoleError : public EvalError {
public:
    explicit PoleError(const std::string &subexpr);
    [[nodiscard]] const std::string &subexpression() const { return sub_; }

private:
    std::string sub_;
};

class UnboundSymbol : public EvalError {
public:
    explicit UnboundSymbol(const std::string &name);
};

/// Complex evaluation (principal branches for fractional powers).
cplx eval(const Expr &e, const Binding &b);
/// Sum of absolute values of the expanded terms: a scale for relative residuals.
double eval_magnitude(const Expr &e, const Binding &b);

/// Decides a == b: identical normal forms, or (failing that) agreement within `tol`
/// (relative to term magnitude) at `points` random complex assignments of the free symbols.
bool equivalent(const Expr &a, const Expr &b, std::uint64_t seed = 20120, int points = 20, double tol = 1e-10);

/// Exact zero test: clears denominators, expands, and rewrites even powers of cos,
/// cosh and Ck through the Pythagorean identities. Catches identities that the
/// normal form alone leaves split across terms.
bool is_identically_zero(const Expr &e);
/// Atoms raised to negative powers in the normal form of e.
std::vector<Expr> denominator_atoms(const Expr &e);

} // namespace hamext
