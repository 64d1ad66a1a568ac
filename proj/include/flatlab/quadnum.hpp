#pragma once

// Exact arithmetic in a real quadratic field Q(sqrt d).

#include <gmpxx.h>

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <ostream>
#include <string>
#include <string_view>

namespace flatlab {

using Rational = mpq_class;
using Integer = mpz_class;

class ContextMismatch : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline bool is_square_free(std::int64_t d) {
    if (d < 1) return false;
    for (std::int64_t p = 2; p * p <= d; ++p)
        if (d % (p * p) == 0) return false;
    return true;
}

/// a + b*sqrt(d). A value with d == 0 is a context-free rational (b == 0)
/// and combines with any context; two irrational-capable contexts with
/// different d never mix.
class QuadNum {
public:
    QuadNum() = default;
    QuadNum(long v) : a_(v) {}                    // NOLINT implicit
    QuadNum(int v) : a_(v) {}                     // NOLINT implicit
    QuadNum(Rational a) : a_(std::move(a)) { a_.canonicalize(); }  // NOLINT implicit
    QuadNum(Rational a, Rational b, std::int64_t d) : a_(std::move(a)), b_(std::move(b)), d_(d) {
        if (d_ < 0 || (d_ != 0 && !is_square_free(d_)))
            throw std::invalid_argument("quadratic field context must be square-free, got " + std::to_string(d_));
        if (d_ == 0 && b_ != 0) throw std::invalid_argument("irrational part without a field context");
        a_.canonicalize();
        b_.canonicalize();
        if (d_ == 1) {  // sqrt(1) is rational
            a_ += b_;
            b_ = 0;
        }
    }

    static QuadNum sqrt_of(std::int64_t d) { return QuadNum(0, 1, d); }

    const Rational& rational_part() const { return a_; }
    const Rational& irrational_part() const { return b_; }
    std::int64_t context() const { return d_; }
    bool is_rational() const { return b_ == 0; }

    // Field context after combining with another value.
    std::int64_t joined(const QuadNum& o) const {
        if (d_ == 0) return o.d_;
        if (o.d_ == 0 || o.d_ == d_) return d_;
        throw ContextMismatch("cannot combine Q(sqrt " + std::to_string(d_) + ") with Q(sqrt " + std::to_string(o.d_) + ")");
    }

    QuadNum operator-() const { return raw(-a_, -b_, d_); }
    QuadNum& operator+=(const QuadNum& o) {
        d_ = joined(o);
        a_ += o.a_;
        b_ += o.b_;
        return *this;
    }
    QuadNum& operator-=(const QuadNum& o) {
        d_ = joined(o);
        a_ -= o.a_;
        b_ -= o.b_;
        return *this;
    }
    QuadNum& operator*=(const QuadNum& o) {
        auto d = joined(o);
        Rational na = a_ * o.a_ + b_ * o.b_ * Rational(d);
        Rational nb = a_ * o.b_ + b_ * o.a_;
        a_ = std::move(na);
        b_ = std::move(nb);
        d_ = d;
        return *this;
    }
    QuadNum& operator/=(const QuadNum& o) {
        auto d = joined(o);
        // (a + b r)/(c + e r) = (a + b r)(c - e r) / (c^2 - e^2 d)
        Rational den = o.a_ * o.a_ - o.b_ * o.b_ * Rational(d);
        if (den == 0) throw std::domain_error("division by zero in QuadNum");
        Rational na = (a_ * o.a_ - b_ * o.b_ * Rational(d)) / den;
        Rational nb = (b_ * o.a_ - a_ * o.b_) / den;
        a_ = std::move(na);
        b_ = std::move(nb);
        d_ = d;
        return *this;
    }
    friend QuadNum operator+(QuadNum x, const QuadNum& y) { return x += y; }
    friend QuadNum operator-(QuadNum x, const QuadNum& y) { return x -= y; }
    friend QuadNum operator*(QuadNum x, const QuadNum& y) { return x *= y; }
    friend QuadNum operator/(QuadNum x, const QuadNum& y) { return x /= y; }

    /// Exact sign, no floating point.
    int sign() const {
        int sa = sgn(a_);
        int sb = sgn(b_);
        if (sb == 0) return sa;
        if (sa == 0 || sa == sb) return sb;
        // opposite signs: compare a^2 with b^2 d
        Rational lhs = a_ * a_;
        Rational rhs = b_ * b_ * Rational(d_);
        int c = cmp(lhs, rhs);
        return c > 0 ? sa : (c < 0 ? sb : 0);
    }

    friend bool operator==(const QuadNum& x, const QuadNum& y) {
        if (x.b_ != 0 && y.b_ != 0 && x.d_ != y.d_) x.joined(y);
        return x.a_ == y.a_ && x.b_ == y.b_;
    }
    friend std::strong_ordering operator<=>(const QuadNum& x, const QuadNum& y) {
        auto order = [](int c) {
            return c < 0 ? std::strong_ordering::less : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
        };
        if (x.b_ == y.b_) return order(cmp(x.a_, y.a_));
        if (x.b_ != 0 && y.b_ != 0 && x.d_ != y.d_) x.joined(y);
        std::int64_t d = x.b_ != 0 ? x.d_ : y.d_;
        if (x.a_ == y.a_) return order(cmp(x.b_, y.b_));
        // floating filter with a bound on the rounding error, exact otherwise
        double xa = x.a_.get_d(), ya = y.a_.get_d(), xb = x.b_.get_d(), yb = y.b_.get_d();
        double r = std::sqrt(static_cast<double>(d));
        double v = (xa - ya) + (xb - yb) * r;
        double err = (std::fabs(xa) + std::fabs(ya) + (std::fabs(xb) + std::fabs(yb)) * r) * 1e-14 + 1e-290;
        if (std::isfinite(v) && std::isfinite(err)) {
            if (v > err) return std::strong_ordering::greater;
            if (v < -err) return std::strong_ordering::less;
        }
        int s = (x - y).sign();
        return s < 0 ? std::strong_ordering::less : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    /// Conjugate a - b sqrt d.
    QuadNum conjugate() const { return raw(a_, -b_, d_); }
    QuadNum norm() const { return QuadNum(a_ * a_ - b_ * b_ * Rational(d_)); }

    double to_double() const;

    /// Largest integer <= value.
    Integer floor() const;

private:
    static QuadNum raw(Rational a, Rational b, std::int64_t d) {
        QuadNum q;
        q.a_ = std::move(a);
        q.b_ = std::move(b);
        q.d_ = d;
        return q;
    }

    Rational a_{0};
    Rational b_{0};
    std::int64_t d_{0};
};

inline QuadNum abs(const QuadNum& x) { return x.sign() < 0 ? -x : x; }
inline const QuadNum& min(const QuadNum& x, const QuadNum& y) { return y < x ? y : x; }
inline const QuadNum& max(const QuadNum& x, const QuadNum& y) { return x < y ? y : x; }

inline int compare(const QuadNum& x, const QuadNum& y) { return (x - y).sign(); }

inline double QuadNum::to_double() const {
    return a_.get_d() + b_.get_d() * std::sqrt(static_cast<double>(d_));
}

namespace detail {

// floor(n * sqrt(d)) for a nonnegative integer n.
inline Integer floor_int_sqrt_scaled(const Integer& n, std::int64_t d) {
    Integer sq = n * n * d;
    Integer r;
    mpz_sqrt(r.get_mpz_t(), sq.get_mpz_t());
    return r;
}

// floor(p / q) for integers, q > 0.
inline Integer floor_div(const Integer& p, const Integer& q) {
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), p.get_mpz_t(), q.get_mpz_t());
    return r;
}

}  // namespace detail

inline Integer QuadNum::floor() const {
    // value = (A + B sqrt d) / D with integers A, B and D > 0.
    Integer D = a_.get_den() * b_.get_den();
    Integer A = a_.get_num() * b_.get_den();
    Integer B = b_.get_num() * a_.get_den();
    if (B == 0) return detail::floor_div(A, D);
    // floor((A + B sqrt d)/D): bracket B sqrt d between consecutive integers
    Integer absB = B < 0 ? Integer(-B) : B;
    Integer s = detail::floor_int_sqrt_scaled(absB, d_);  // s <= |B| sqrt d < s + 1 (strict unless square)
    // B sqrt d in [s, s+1) when B > 0; in (-s-1, -s] when B < 0 (irrational => strict)
    Integer lo = B > 0 ? Integer(A + s) : Integer(A - s - 1);
    Integer cand = detail::floor_div(lo, D);
    // value is in (lo/D, (lo+1)/D); the floor is cand or cand + 1
    QuadNum next(Rational(cand + 1), 0, 0);
    return (*this - next).sign() >= 0 ? Integer(cand + 1) : cand;
}

/// Decimal rounding to the given number of digits, computed from exact floors.
inline std::string approx(const QuadNum& x, int digits) {
    if (digits < 1) throw std::invalid_argument("approx needs at least one digit");
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
    QuadNum scaled = abs(x) * QuadNum(Rational(scale)) + QuadNum(Rational(1, 2));
    Integer n = scaled.floor();
    std::string s = n.get_str();
    if (s.size() <= static_cast<std::size_t>(digits)) s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
    if (x.sign() < 0 && n != 0) s.insert(0, "-");
    return s;
}

/// Rational bounds lo <= sqrt(s) <= hi, tight to about 2^-bits relative.
/// Exact (lo == hi) when s is the square of a rational.
struct SqrtBounds {
    Rational lo;
    Rational hi;
};

inline SqrtBounds sqrt_bounds(const QuadNum& s, unsigned bits = 40) {
    if (s.sign() < 0) throw std::domain_error("sqrt of negative QuadNum");
    if (s.sign() == 0) return {0, 0};
    if (s.is_rational()) {
        const Rational& q = s.rational_part();
        if (mpz_perfect_square_p(q.get_num_mpz_t()) && mpz_perfect_square_p(q.get_den_mpz_t())) {
            Integer n, d;
            mpz_sqrt(n.get_mpz_t(), q.get_num_mpz_t());
            mpz_sqrt(d.get_mpz_t(), q.get_den_mpz_t());
            Rational r(n, d);
            r.canonicalize();
            return {r, r};
        }
    }
    // sqrt(s) in [floor(sqrt(s * 4^bits)), +1] / 2^bits
    Integer scale = Integer(1) << (2 * bits);
    Integer m = (s * QuadNum(Rational(scale))).floor();
    Integer r;
    mpz_sqrt(r.get_mpz_t(), m.get_mpz_t());
    Integer den = Integer(1) << bits;
    Rational lo(r, den), hi(Integer(r + 1), den);
    lo.canonicalize();
    hi.canonicalize();
    return {lo, hi};
}

// ---- textual literal format: <rat> | <rat>+<rat>√<int> | <rat>-<rat>√<int>

inline std::string render(const Rational& r) { return r.get_str(); }

inline std::string render(const QuadNum& x) {
    std::string s = render(x.rational_part());
    if (x.is_rational()) return s;
    const Rational& b = x.irrational_part();
    if (b > 0) s += "+" + render(b);
    else s += "-" + render(Rational(-b));
    s += "√" + std::to_string(x.context());
    return s;
}

inline std::ostream& operator<<(std::ostream& os, const QuadNum& x) { return os << render(x); }

namespace detail {

inline Rational parse_rational(std::string_view t, std::string_view whole) {
    auto fail = [&] { throw ParseError("malformed number literal '" + std::string(whole) + "'"); };
    if (t.empty()) fail();
    std::size_t i = 0;
    if (t[0] == '+' || t[0] == '-') ++i;
    auto digits = [&](std::size_t from, std::size_t to) {
        if (from >= to) fail();
        for (std::size_t k = from; k < to; ++k)
            if (t[k] < '0' || t[k] > '9') fail();
    };
    auto slash = t.find('/');
    if (slash == std::string_view::npos) {
        digits(i, t.size());
    } else {
        digits(i, slash);
        digits(slash + 1, t.size());
    }
    Rational r;
    std::string str(t[0] == '+' ? t.substr(1) : t);
    if (r.set_str(str, 10) != 0) fail();
    if (r.get_den() == 0) throw ParseError("zero denominator in '" + std::string(whole) + "'");
    r.canonicalize();
    return r;
}

}  // namespace detail

/// Parse a literal. If `context` is nonzero, a √ part must use that d.
inline QuadNum parse_quadnum(std::string_view text, std::int64_t context = 0) {
    static constexpr std::string_view kRoot = "√";
    auto root = text.find(kRoot);
    if (root == std::string_view::npos) {
        auto r = detail::parse_rational(text, text);
        return QuadNum(r);
    }
    std::string_view head = text.substr(0, root);
    std::string_view dtext = text.substr(root + kRoot.size());
    // split head at the last sign that is not in leading position
    std::size_t split = std::string_view::npos;
    for (std::size_t k = head.size(); k-- > 1;) {
        if (head[k] == '+' || head[k] == '-') {
            split = k;
            break;
        }
    }
    if (split == std::string_view::npos) throw ParseError("expected <rat>±<rat>√<int> in '" + std::string(text) + "'");
    Rational a = detail::parse_rational(head.substr(0, split), text);
    Rational b = detail::parse_rational(head.substr(split + 1), text);
    if (head[split] == '-') b = -b;
    if (dtext.empty() || dtext.find_first_not_of("0123456789") != std::string_view::npos)
        throw ParseError("malformed radicand in '" + std::string(text) + "'");
    std::int64_t d = std::stoll(std::string(dtext));
    if (!is_square_free(d)) throw ParseError("radicand must be square-free in '" + std::string(text) + "'");
    if (context != 0 && d != context)
        throw ContextMismatch("literal '" + std::string(text) + "' uses sqrt " + std::to_string(d) + " in a Q(sqrt " + std::to_string(context) + ") context");
    if (b == 0) return QuadNum(a);
    return QuadNum(a, b, d);
}

}  // namespace flatlab
