#include <cctype>
#include <cstdlib>
#include <limits>
#include <unordered_map>

#include <fmt/format.h>

#include "hamext/expr.hpp"

namespace hamext {

ParseError::ParseError(const std::string &what, std::size_t offset)
    : std::runtime_error(fmt::format("{} at offset {}", what, offset)), offset_(offset)
{
}

UnknownIdentifier::UnknownIdentifier(std::string ident, std::size_t offset)
    : ParseError(fmt::format("unknown identifier '{}'", ident), offset), ident_(std::move(ident))
{
}

namespace {

class Parser {
public:
    Parser(std::string_view text, const SymbolTable &symbols) : text_(text)
    {
        for (const auto &s : symbols) {
            symbols_.emplace(s.name, s.kind);
        }
    }

    Expr parse()
    {
        Expr e = expr();
        skip_ws();
        if (pos_ != text_.size()) {
            throw ParseError(fmt::format("unexpected '{}'", text_[pos_]), pos_);
        }
        return e;
    }

private:
    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) {
            ++pos_;
        }
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) {
            throw ParseError(fmt::format("expected '{}'", c), pos_);
        }
    }

    Expr expr()
    {
        std::vector<Expr> terms;
        if (accept('-')) {
            terms.push_back(-term());
        } else {
            terms.push_back(term());
        }
        for (;;) {
            if (accept('+')) {
                terms.push_back(term());
            } else if (accept('-')) {
                terms.push_back(-term());
            } else {
                break;
            }
        }
        return make_sum(std::move(terms));
    }

    Expr term()
    {
        std::vector<Expr> factors{factor()};
        for (;;) {
            if (accept('*')) {
                factors.push_back(factor());
            } else if (accept('/')) {
                factors.push_back(pow(factor(), Rational(-1)));
            } else {
                break;
            }
        }
        return make_product(std::move(factors));
    }

    Expr factor()
    {
        Expr b = base();
        if (accept('^')) {
            return pow(b, exponent());
        }
        return b;
    }

    std::int64_t integer()
    {
        skip_ws();
        const std::size_t start = pos_;
        std::int64_t v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0) {
            if (v > (std::numeric_limits<std::int64_t>::max() - 9) / 10) {
                throw ParseError("integer too large", start);
            }
            v = v * 10 + (text_[pos_] - '0');
            ++pos_;
        }
        if (pos_ == start) {
            throw ParseError("expected integer", pos_);
        }
        return v;
    }

    Rational exponent()
    {
        if (accept('(')) {
            const bool neg = accept('-');
            std::int64_t p = integer();
            std::int64_t q = 1;
            if (accept('/')) {
                const std::size_t at = pos_;
                q = integer();
                if (q == 0) {
                    throw ParseError("zero denominator in exponent", at);
                }
            }
            expect(')');
            return Rational(neg ? -p : p, q);
        }
        const bool neg = accept('-');
        const std::int64_t p = integer();
        return Rational(neg ? -p : p);
    }

    Expr number()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0) {
            ++pos_;
        }
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0) {
                ++pos_;
            }
        }
        bool has_exp = false;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) {
                ++look;
            }
            if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look])) != 0) {
                has_exp = true;
                pos_ = look;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0) {
                    ++pos_;
                }
            }
        }
        const std::string literal(text_.substr(start, pos_ - start));
        if (literal == ".") {
            throw ParseError("malformed number", start);
        }
        if (!has_exp) {
            const std::size_t dot = literal.find('.');
            std::string digits = literal;
            std::size_t scale = 0;
            if (dot != std::string::npos) {
                digits.erase(dot, 1);
                scale = literal.size() - dot - 1;
            }
            if (digits.size() <= 18) {
                const std::int64_t n = digits.empty() ? 0 : std::stoll(digits);
                std::int64_t d = 1;
                for (std::size_t i = 0; i < scale; ++i) {
                    d *= 10;
                }
                return Expr(Number(Rational(n, d)));
            }
        }
        return Expr(Number::inexact(cplx(std::strtod(literal.c_str(), nullptr), 0.0)));
    }

    std::vector<Expr> call_args()
    {
        std::vector<Expr> args;
        expect('(');
        args.push_back(expr());
        while (accept(',')) {
            args.push_back(expr());
        }
        expect(')');
        return args;
    }

    Expr base()
    {
        skip_ws();
        if (pos_ >= text_.size()) {
            throw ParseError("unexpected end of input", pos_);
        }
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '.') {
            return number();
        }
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) != 0 || text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string ident(text_.substr(start, pos_ - start));
            static const std::unordered_map<std::string, Fn> functions = {
                {"sin", Fn::sin}, {"cos", Fn::cos},   {"sinh", Fn::sinh}, {"cosh", Fn::cosh},
                {"exp", Fn::exp}, {"Sk", Fn::sk},     {"Ck", Fn::ck},
            };
            skip_ws();
            const bool call = pos_ < text_.size() && text_[pos_] == '(';
            if (call && ident == "sqrt") {
                auto args = call_args();
                if (args.size() != 1) {
                    throw ParseError("sqrt takes 1 argument", start);
                }
                return sqrt(args.front());
            }
            if (call) {
                auto it = functions.find(ident);
                if (it != functions.end()) {
                    auto args = call_args();
                    const std::size_t arity = (it->second == Fn::sk || it->second == Fn::ck) ? 2 : 1;
                    if (args.size() != arity) {
                        throw ParseError(fmt::format("{} takes {} argument(s)", ident, arity), start);
                    }
                    return Expr::function(it->second, std::move(args));
                }
            }
            if (ident == "i") {
                return Expr(Number::imaginary_unit());
            }
            if (ident == "pi") {
                return Expr::symbol("pi", SymbolKind::parameter);
            }
            auto it = symbols_.find(ident);
            if (it == symbols_.end()) {
                throw UnknownIdentifier(ident, start);
            }
            return Expr::symbol(ident, it->second);
        }
        throw ParseError(fmt::format("unexpected '{}'", c), pos_);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::unordered_map<std::string, SymbolKind> symbols_;
};

} // namespace

Expr parse_expr(std::string_view text, const SymbolTable &symbols)
{
    return Parser(text, symbols).parse();
}

} // namespace hamext
