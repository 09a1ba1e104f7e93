#include "hamext/number.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace hamext {

namespace {

using i128 = __int128;

constexpr i128 kMax = std::numeric_limits<std::int64_t>::max();

std::optional<Rational> make_checked(i128 n, i128 d)
{
    if (d == 0) {
        return std::nullopt;
    }
    if (d < 0) {
        n = -n;
        d = -d;
    }
    i128 a = n < 0 ? -n : n;
    i128 b = d;
    while (b != 0) {
        const i128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        n /= a;
        d /= a;
    }
    if (n > kMax || n < -kMax || d > kMax) {
        return std::nullopt;
    }
    return Rational::reduced(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
}

// Best rational approximation with bounded denominator (continued fractions).
std::optional<Rational> reconstruct(double x, double tol, std::int64_t max_den)
{
    if (!std::isfinite(x)) {
        return std::nullopt;
    }
    if (std::abs(x) < tol) {
        return Rational(0);
    }
    if (std::abs(x) > 1e15) {
        return std::nullopt;
    }
    double r = x;
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int iter = 0; iter < 64; ++iter) {
        const double a = std::floor(r);
        const auto ai = static_cast<std::int64_t>(a);
        const std::int64_t p2 = ai * p1 + p0;
        const std::int64_t q2 = ai * q1 + q0;
        if (q2 > max_den) {
            break;
        }
        if (std::abs(static_cast<double>(p2) / static_cast<double>(q2) - x) <= tol * std::max(1.0, std::abs(x))) {
            return Rational(p2, q2);
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        const double frac = r - a;
        if (frac < 1e-300) {
            break;
        }
        r = 1.0 / frac;
    }
    return std::nullopt;
}

} // namespace

Rational::Rational(std::int64_t n, std::int64_t d)
{
    auto r = make_checked(n, d);
    if (!r) {
        throw std::domain_error("invalid rational (zero denominator or overflow)");
    }
    *this = *r;
}

std::string Rational::to_string() const
{
    if (den_ == 1) {
        return std::to_string(num_);
    }
    return fmt::format("{}/{}", num_, den_);
}

std::optional<Rational> Rational::add(const Rational &a, const Rational &b)
{
    return make_checked(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                        static_cast<i128>(a.den_) * b.den_);
}

std::optional<Rational> Rational::mul(const Rational &a, const Rational &b)
{
    return make_checked(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}

std::optional<Rational> Rational::div(const Rational &a, const Rational &b)
{
    if (b.num_ == 0) {
        return std::nullopt;
    }
    return make_checked(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
}

Rational Rational::negated() const
{
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
}

std::strong_ordering operator<=>(const Rational &a, const Rational &b)
{
    return static_cast<i128>(a.num_) * b.den_ <=> static_cast<i128>(b.num_) * a.den_;
}

Number Number::inexact(cplx v)
{
    Number n;
    n.exact_ = false;
    n.approx_ = v;
    return n;
}

Number Number::snap(cplx v, double tol, std::int64_t max_den)
{
    auto re = reconstruct(v.real(), tol, max_den);
    auto im = reconstruct(v.imag(), tol, max_den);
    if (re && im) {
        return {*re, *im};
    }
    return inexact(v);
}

bool Number::is_zero() const
{
    return exact_ ? (re_.is_zero() && im_.is_zero()) : approx_ == cplx(0.0, 0.0);
}

bool Number::is_one() const
{
    return exact_ && re_ == Rational(1) && im_.is_zero();
}

bool Number::is_real() const
{
    return exact_ ? im_.is_zero() : approx_.imag() == 0.0;
}

std::optional<Rational> Number::as_rational() const
{
    if (exact_ && im_.is_zero()) {
        return re_;
    }
    return std::nullopt;
}

bool Number::is_negative_real() const
{
    if (exact_) {
        return im_.is_zero() && re_.num() < 0;
    }
    return approx_.imag() == 0.0 && approx_.real() < 0.0;
}

cplx Number::value() const
{
    return exact_ ? cplx(re_.to_double(), im_.to_double()) : approx_;
}

Number Number::operator-() const
{
    if (!exact_) {
        return inexact(-approx_);
    }
    return {re_.negated(), im_.negated()};
}

Number operator+(const Number &a, const Number &b)
{
    if (a.exact_ && b.exact_) {
        auto re = Rational::add(a.re_, b.re_);
        auto im = Rational::add(a.im_, b.im_);
        if (re && im) {
            return {*re, *im};
        }
    }
    return Number::inexact(a.value() + b.value());
}

Number operator-(const Number &a, const Number &b)
{
    return a + (-b);
}

Number operator*(const Number &a, const Number &b)
{
    if (a.exact_ && b.exact_) {
        if (a.im_.is_zero() && b.im_.is_zero()) {
            if (auto re = Rational::mul(a.re_, b.re_)) {
                return Number(*re);
            }
        } else {
            auto rr = Rational::mul(a.re_, b.re_);
            auto ii = Rational::mul(a.im_, b.im_);
            auto ri = Rational::mul(a.re_, b.im_);
            auto ir = Rational::mul(a.im_, b.re_);
            if (rr && ii && ri && ir) {
                auto re = Rational::add(*rr, ii->negated());
                auto im = Rational::add(*ri, *ir);
                if (re && im) {
                    return {*re, *im};
                }
            }
        }
    }
    return Number::inexact(a.value() * b.value());
}

Number operator/(const Number &a, const Number &b)
{
    if (b.is_zero()) {
        throw std::domain_error("division by zero");
    }
    if (a.exact_ && b.exact_) {
        if (b.im_.is_zero()) {
            auto re = Rational::div(a.re_, b.re_);
            auto im = Rational::div(a.im_, b.re_);
            if (re && im) {
                return {*re, *im};
            }
        } else {
            // a / b = a * conj(b) / |b|^2
            auto n2a = Rational::mul(b.re_, b.re_);
            auto n2b = Rational::mul(b.im_, b.im_);
            if (n2a && n2b) {
                if (auto norm = Rational::add(*n2a, *n2b)) {
                    const Number conj{b.re_, b.im_.negated()};
                    const Number num = a * conj;
                    if (num.exact_) {
                        auto re = Rational::div(num.re_, *norm);
                        auto im = Rational::div(num.im_, *norm);
                        if (re && im) {
                            return {*re, *im};
                        }
                    }
                }
            }
        }
    }
    return Number::inexact(a.value() / b.value());
}

Number Number::pow(std::int64_t e) const
{
    if (e < 0) {
        return Number(1) / pow(-e);
    }
    Number result(1);
    Number base = *this;
    while (e > 0) {
        if ((e & 1) != 0) {
            result = result * base;
        }
        e >>= 1;
        if (e > 0) {
            base = base * base;
        }
    }
    return result;
}

bool operator==(const Number &a, const Number &b)
{
    if (a.exact_ != b.exact_) {
        return false;
    }
    return a.exact_ ? (a.re_ == b.re_ && a.im_ == b.im_) : a.approx_ == b.approx_;
}

int compare(const Number &a, const Number &b)
{
    if (a.exact_ != b.exact_) {
        return a.exact_ ? -1 : 1;
    }
    if (a.exact_) {
        if (auto c = a.re_ <=> b.re_; c != 0) {
            return c < 0 ? -1 : 1;
        }
        if (auto c = a.im_ <=> b.im_; c != 0) {
            return c < 0 ? -1 : 1;
        }
        return 0;
    }
    if (a.approx_.real() != b.approx_.real()) {
        return a.approx_.real() < b.approx_.real() ? -1 : 1;
    }
    if (a.approx_.imag() != b.approx_.imag()) {
        return a.approx_.imag() < b.approx_.imag() ? -1 : 1;
    }
    return 0;
}

std::string format_double(double v)
{
    return fmt::format("{:.16e}", v);
}

std::string Number::to_string() const
{
    auto imag_part = [](const std::string &mag, bool unit) { return unit ? std::string("i") : mag + "*i"; };
    if (exact_) {
        if (im_.is_zero()) {
            return re_.to_string();
        }
        const bool neg_im = im_.num() < 0;
        const Rational abs_im = neg_im ? im_.negated() : im_;
        const std::string im_text = imag_part(abs_im.to_string(), abs_im == Rational(1));
        if (re_.is_zero()) {
            return (neg_im ? "-" : "") + im_text;
        }
        return fmt::format("({} {} {})", re_.to_string(), neg_im ? "-" : "+", im_text);
    }
    if (approx_.imag() == 0.0) {
        return format_double(approx_.real());
    }
    const bool neg_im = std::signbit(approx_.imag());
    const std::string im_text = format_double(std::abs(approx_.imag())) + "*i";
    if (approx_.real() == 0.0) {
        return (neg_im ? "-" : "") + im_text;
    }
    return fmt::format("({} {} {})", format_double(approx_.real()), neg_im ? "-" : "+", im_text);
}

} // namespace hamext
