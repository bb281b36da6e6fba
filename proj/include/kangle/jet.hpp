#pragma once

// Truncated multivariate Taylor series ("jets").
//
// A Jet of dimension d and order k stores the Taylor coefficients
// c_a = (d^a f)(p) / a! for every multi-index |a| <= k, in graded
// lexicographic order. Multiplication is a truncated convolution of the
// coefficient arrays, so every derivative up to order k of any expression
// built from seeded coordinates is exact up to roundoff.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace kangle {

inline constexpr int kMaxJetDim = 8;
inline constexpr int kMaxJetOrder = 4;

using MultiIndex = std::array<std::uint8_t, kMaxJetDim>;

/// Index tables shared by every jet of a given (dim, order).
struct JetLayout {
    struct Product {
        std::uint16_t lhs, rhs, out;
    };

    int dim = 0;
    int order = 0;
    std::vector<MultiIndex> exponents;     // graded lex
    std::vector<int> degree_begin;         // degree_begin[d] = first index of degree d, size order+2
    std::vector<double> factorials;        // a! per coefficient
    std::vector<Product> products;         // all (i, j) with |i|+|j| <= order, sorted by out
    std::vector<std::vector<int>> shift;   // shift[v][i] = index of exponents[i] + e_v, or -1

    int size() const { return static_cast<int>(exponents.size()); }
    int index_of(const MultiIndex& alpha) const;
};

/// Shared, immutable tables for (dim, order). Throws UsageError outside
/// 1 <= dim <= 8, 0 <= order <= 4.
const JetLayout& jet_layout(int dim, int order);

/// Number of coefficients of a jet: C(dim + order, order).
int jet_size(int dim, int order);

class Jet {
public:
    Jet() = default;
    Jet(int dim, int order);

    static Jet constant(int dim, int order, double value);
    /// Coordinate function u^var expanded at `point`.
    static Jet seed(int dim, int order, std::span<const double> point, int var);

    int dim() const { return layout_->dim; }
    int order() const { return layout_->order; }
    int size() const { return static_cast<int>(coeffs_.size()); }
    bool valid() const { return layout_ != nullptr; }
    const JetLayout& layout() const { return *layout_; }

    double value() const { return coeffs_[0]; }
    /// Normalized Taylor coefficient of alpha.
    double coeff(const MultiIndex& alpha) const;
    /// Raw partial derivative d^alpha f(point) = alpha! * coeff(alpha).
    double extract(const MultiIndex& alpha) const;
    /// First partial derivative at the point.
    double d(int var) const;
    /// Second partial derivative at the point.
    double d(int var1, int var2) const;

    std::span<const double> coeffs() const { return coeffs_; }
    std::span<double> coeffs() { return coeffs_; }

    /// Jet of d/du^var, one order lower.
    Jet partial(int var) const;
    /// Same function, lower truncation order.
    Jet truncated(int order) const;

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(const Jet& o);
    Jet& operator/=(const Jet& o);
    Jet& operator+=(double c);
    Jet& operator-=(double c);
    Jet& operator*=(double c);
    Jet& operator/=(double c);
    Jet operator-() const;

    bool all_finite() const;

private:
    friend void mul_add(Jet& acc, const Jet& a, const Jet& b);
    friend Jet operator*(const Jet& a, const Jet& b);

    const JetLayout* layout_ = nullptr;
    std::vector<double> coeffs_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, double c);
Jet operator+(double c, Jet a);
Jet operator-(Jet a, double c);
Jet operator-(double c, const Jet& a);
Jet operator*(Jet a, double c);
Jet operator*(double c, Jet a);
Jet operator/(Jet a, double c);
Jet operator/(double c, const Jet& a);

/// acc += a * b without a temporary.
void mul_add(Jet& acc, const Jet& a, const Jet& b);

Jet reciprocal(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sinh(const Jet& a);
Jet cosh(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet atan(const Jet& a);
Jet pow(const Jet& a, int exponent);

/// Throws UsageError unless a and b share dim and order.
void require_compatible(const Jet& a, const Jet& b);

} // namespace kangle
