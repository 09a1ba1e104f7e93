#pragma once

#include <compare>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>

namespace hamext {

using cplx = std::complex<double>;

/// Reduced fraction with a positive denominator. Arithmetic is checked:
/// operations that would overflow 64 bits return std::nullopt.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t n) : num_(n) {} // NOLINT(google-explicit-constructor)
    Rational(std::int64_t n, std::int64_t d);
    /// Trusts that n/d is already reduced with d > 0.
    static Rational reduced(std::int64_t n, std::int64_t d)
    {
        Rational r;
        r.num_ = n;
        r.den_ = d;
        return r;
    }

    [[nodiscard]] std::int64_t num() const { return num_; }
    [[nodiscard]] std::int64_t den() const { return den_; }
    [[nodiscard]] bool is_zero() const { return num_ == 0; }
    [[nodiscard]] bool is_integer() const { return den_ == 1; }
    [[nodiscard]] double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    [[nodiscard]] std::string to_string() const;

    static std::optional<Rational> add(const Rational &a, const Rational &b);
    static std::optional<Rational> mul(const Rational &a, const Rational &b);
    static std::optional<Rational> div(const Rational &a, const Rational &b);
    [[nodiscard]] Rational negated() const;

    friend bool operator==(const Rational &, const Rational &) = default;
    friend std::strong_ordering operator<=>(const Rational &a, const Rational &b);

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// A complex constant. Exact values are Gaussian rationals (re + i*im with
/// rational parts); anything that leaves that set (overflow, floating input)
/// degrades to an inexact double-precision complex value.
class Number {
public:
    Number() = default;
    Number(std::int64_t n) : re_(n) {} // NOLINT(google-explicit-constructor)
    Number(Rational r) : re_(r) {}     // NOLINT(google-explicit-constructor)
    Number(Rational re, Rational im) : re_(re), im_(im) {}

    static Number rational(std::int64_t n, std::int64_t d) { return Number(Rational(n, d)); }
    static Number imaginary_unit() { return {Rational(0), Rational(1)}; }
    static Number inexact(cplx v);
    /// Exact when `v` has a short rational form (|den| <= max_den within tol), inexact otherwise.
    static Number snap(cplx v, double tol = 1e-11, std::int64_t max_den = 4096);

    [[nodiscard]] bool is_exact() const { return exact_; }
    [[nodiscard]] bool is_zero() const;
    [[nodiscard]] bool is_one() const;
    [[nodiscard]] bool is_real() const;
    /// Exact real value, if any.
    [[nodiscard]] std::optional<Rational> as_rational() const;
    [[nodiscard]] bool is_negative_real() const;
    [[nodiscard]] cplx value() const;
    [[nodiscard]] const Rational &re() const { return re_; }
    [[nodiscard]] const Rational &im() const { return im_; }

    [[nodiscard]] Number pow(std::int64_t e) const;
    [[nodiscard]] Number operator-() const;
    friend Number operator+(const Number &a, const Number &b);
    friend Number operator-(const Number &a, const Number &b);
    friend Number operator*(const Number &a, const Number &b);
    /// Throws std::domain_error on exact division by zero.
    friend Number operator/(const Number &a, const Number &b);

    friend bool operator==(const Number &a, const Number &b);
    /// Total order used for canonical sorting only.
    friend int compare(const Number &a, const Number &b);

    /// Canonical text: "3", "-3/4", "2*i", "(1/2 + 3*i)", inexact values in
    /// exponent notation so they re-parse as inexact.
    [[nodiscard]] std::string to_string() const;

private:
    bool exact_ = true;
    Rational re_{0};
    Rational im_{0};
    cplx approx_{0.0, 0.0};
};

std::string format_double(double v);

} // namespace hamext
