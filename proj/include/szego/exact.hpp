#pragma once

/** @file
 * Exact integer and rational linear algebra on small dense matrices.
 *
 * Ranks and determinants of integer matrices use fraction-free (Bareiss)
 * elimination in 64-bit arithmetic with 128-bit intermediates; any
 * intermediate that leaves the int64 range raises std::overflow_error
 * instead of wrapping. Inverses go through boost::rational.
 */

#include <boost/multiprecision/gmp.hpp>
#include <boost/rational.hpp>

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

// Boost 1.74's mixed rational/integer operator== recurses forever under the
// C++20 rewritten-comparison rules. Exact non-template overloads win overload
// resolution and route the comparison through rational == rational.
namespace boost {
inline bool operator==(const rational<std::int64_t>& a, int b) { return a == rational<std::int64_t>(b); }
inline bool operator==(const rational<std::int64_t>& a, long b) { return a == rational<std::int64_t>(b); }
inline bool operator==(const rational<std::int64_t>& a, long long b) { return a == rational<std::int64_t>(b); }
}  // namespace boost

namespace szego {

using Rational = boost::rational<std::int64_t>;
using BigRational = boost::multiprecision::mpq_rational;

/// Row-major dense matrix with value semantics.
template <class T>
class Dense {
public:
    Dense() = default;
    Dense(std::size_t rows, std::size_t cols, T fill = T(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Dense from_rows(const std::vector<std::vector<T>>& rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r == 0 ? 0 : rows.front().size();
        Dense out(r, c);
        for (std::size_t i = 0; i < r; ++i) {
            if (rows[i].size() != c) throw std::invalid_argument("ragged matrix rows");
            for (std::size_t j = 0; j < c; ++j) out(i, j) = rows[i][j];
        }
        return out;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<T> row(std::size_t i) const {
        return std::vector<T>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
    }
    std::vector<std::vector<T>> to_rows() const {
        std::vector<std::vector<T>> out;
        out.reserve(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out.push_back(row(i));
        return out;
    }

    Dense select_columns(const std::vector<std::size_t>& cols) const {
        Dense out(rows_, cols.size());
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = (*this)(i, cols[j]);
        return out;
    }
    Dense select_rows(const std::vector<std::size_t>& rws) const {
        Dense out(rws.size(), cols_);
        for (std::size_t i = 0; i < rws.size(); ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(i, j) = (*this)(rws[i], j);
        return out;
    }
    Dense transpose() const {
        Dense out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
        return out;
    }

    friend bool operator==(const Dense&, const Dense&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using IntMatrix = Dense<std::int64_t>;
using RationalMatrix = Dense<Rational>;

namespace detail {

inline std::int64_t checked_narrow(__int128 v) {
    if (v > static_cast<__int128>(INT64_MAX) || v < static_cast<__int128>(INT64_MIN))
        throw std::overflow_error("exact elimination left the int64 range");
    return static_cast<std::int64_t>(v);
}

// Fraction-free elimination in place; returns rank and the last pivot
// (which equals +-det for square full-rank input).
inline std::size_t bareiss(IntMatrix& a, std::int64_t* last_pivot = nullptr, int* sign = nullptr) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    std::int64_t prev = 1;
    std::size_t rank = 0;
    int s = 1;
    for (std::size_t col = 0; col < n && rank < m; ++col) {
        std::size_t piv = rank;
        while (piv < m && a(piv, col) == 0) ++piv;
        if (piv == m) continue;
        if (piv != rank) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(piv, j), a(rank, j));
            s = -s;
        }
        const std::int64_t p = a(rank, col);
        for (std::size_t i = rank + 1; i < m; ++i) {
            for (std::size_t j = col + 1; j < n; ++j) {
                const __int128 num = static_cast<__int128>(a(i, j)) * p -
                                     static_cast<__int128>(a(i, col)) * a(rank, j);
                a(i, j) = checked_narrow(num / prev);
            }
            a(i, col) = 0;
        }
        prev = p;
        ++rank;
    }
    if (last_pivot) *last_pivot = prev;
    if (sign) *sign = s;
    return rank;
}

}  // namespace detail

inline std::size_t rank(IntMatrix a) { return detail::bareiss(a); }

/// Determinant of a square integer matrix.
inline std::int64_t determinant(IntMatrix a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("determinant of a non-square matrix");
    if (a.rows() == 0) return 1;
    std::int64_t last = 0;
    int sign = 1;
    const std::size_t r = detail::bareiss(a, &last, &sign);
    if (r < a.rows()) return 0;
    return sign * last;
}

inline RationalMatrix to_rational(const IntMatrix& a) {
    RationalMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = Rational(a(i, j));
    return out;
}

/// Gauss-Jordan inverse; throws std::domain_error when singular.
inline RationalMatrix inverse(RationalMatrix a) {
    const std::size_t n = a.rows();
    if (n != a.cols()) throw std::invalid_argument("inverse of a non-square matrix");
    RationalMatrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i) inv(i, i) = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a(piv, col).numerator() == 0) ++piv;
        if (piv == n) throw std::domain_error("singular matrix");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        }
        const Rational p = a(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) /= p;
            inv(col, j) /= p;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || a(i, col).numerator() == 0) continue;
            const Rational f = a(i, col);
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) -= f * a(col, j);
                inv(i, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

/// Scale a rational row to the primitive integer vector on the same ray.
inline std::vector<std::int64_t> primitive_integer_row(const std::vector<Rational>& row) {
    std::int64_t l = 1;
    for (const auto& v : row) l = std::lcm(l, v.denominator());
    std::vector<std::int64_t> out;
    out.reserve(row.size());
    std::int64_t g = 0;
    for (const auto& v : row) {
        out.push_back(v.numerator() * (l / v.denominator()));
        g = std::gcd(g, out.back());
    }
    if (g > 1)
        for (auto& v : out) v /= g;
    return out;
}

inline std::string to_string(const Rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

/// Parses "p/q", an integer, or a finite decimal ("0.25") into a rational.
inline Rational parse_rational(const std::string& s) {
    const auto slash = s.find('/');
    if (slash != std::string::npos)
        return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    const auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(std::stoll(s));
    const std::string frac = s.substr(dot + 1);
    if (frac.size() > 15) throw std::invalid_argument("too many decimals in rational: " + s);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const bool neg = !s.empty() && s[0] == '-';
    const std::string whole = s.substr(0, dot);
    std::int64_t w = whole.empty() || whole == "-" || whole == "+" ? 0 : std::llabs(std::stoll(whole));
    std::int64_t f = frac.empty() ? 0 : std::stoll(frac);
    Rational out(w * den + f, den);
    return neg ? -out : out;
}

}  // namespace szego
