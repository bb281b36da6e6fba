#include "kangle/jet.hpp"

#include "kangle/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <unordered_map>

namespace kangle {

namespace {

std::uint64_t pack(const MultiIndex& a) {
    std::uint64_t key = 0;
    for (int v = 0; v < kMaxJetDim; ++v) key = key * 8 + a[v];
    return key;
}

int degree(const MultiIndex& a) {
    int s = 0;
    for (auto e : a) s += e;
    return s;
}

// All multi-indices of total degree `deg` in `dim` variables, lexicographically
// descending (x0^deg first).
void enumerate(int dim, int var, int remaining, MultiIndex& cur, std::vector<MultiIndex>& out) {
    if (var == dim - 1) {
        cur[var] = static_cast<std::uint8_t>(remaining);
        out.push_back(cur);
        cur[var] = 0;
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        cur[var] = static_cast<std::uint8_t>(e);
        enumerate(dim, var + 1, remaining - e, cur, out);
    }
    cur[var] = 0;
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

struct LayoutRegistry {
    std::array<std::unique_ptr<JetLayout>, (kMaxJetDim + 1) * (kMaxJetOrder + 1)> table;
    std::array<std::unordered_map<std::uint64_t, int>, (kMaxJetDim + 1) * (kMaxJetOrder + 1)> lookup;

    LayoutRegistry() {
        for (int dim = 1; dim <= kMaxJetDim; ++dim) {
            for (int order = 0; order <= kMaxJetOrder; ++order) build(dim, order);
        }
    }

    static int slot(int dim, int order) { return dim * (kMaxJetOrder + 1) + order; }

    void build(int dim, int order) {
        auto layout = std::make_unique<JetLayout>();
        layout->dim = dim;
        layout->order = order;
        MultiIndex cur{};
        for (int d = 0; d <= order; ++d) {
            layout->degree_begin.push_back(static_cast<int>(layout->exponents.size()));
            enumerate(dim, 0, d, cur, layout->exponents);
        }
        layout->degree_begin.push_back(static_cast<int>(layout->exponents.size()));

        auto& map = lookup[slot(dim, order)];
        for (int i = 0; i < layout->size(); ++i) {
            map.emplace(pack(layout->exponents[i]), i);
            double f = 1.0;
            for (auto e : layout->exponents[i]) f *= factorial(e);
            layout->factorials.push_back(f);
        }

        const int n = layout->size();
        for (int i = 0; i < n; ++i) {
            const int di = degree(layout->exponents[i]);
            const int jmax = layout->degree_begin[order - di + 1];
            for (int j = 0; j < jmax; ++j) {
                MultiIndex sum{};
                for (int v = 0; v < dim; ++v)
                    sum[v] = static_cast<std::uint8_t>(layout->exponents[i][v] + layout->exponents[j][v]);
                layout->products.push_back({static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j),
                                            static_cast<std::uint16_t>(map.at(pack(sum)))});
            }
        }
        std::sort(layout->products.begin(), layout->products.end(),
                  [](const auto& a, const auto& b) { return a.out < b.out || (a.out == b.out && a.lhs < b.lhs); });

        layout->shift.assign(dim, std::vector<int>(n, -1));
        for (int v = 0; v < dim; ++v) {
            for (int i = 0; i < n; ++i) {
                MultiIndex up = layout->exponents[i];
                up[v] += 1;
                auto it = map.find(pack(up));
                if (it != map.end()) layout->shift[v][i] = it->second;
            }
        }
        table[slot(dim, order)] = std::move(layout);
    }
};

const LayoutRegistry& registry() {
    static const LayoutRegistry r;
    return r;
}

// Taylor coefficients f^(k)(x0)/k!, k = 0..order, of a univariate function.
using Taylor = std::array<double, kMaxJetOrder + 1>;

Jet compose(const Jet& a, const Taylor& c) {
    Jet h = a;
    h.coeffs()[0] = 0.0;
    Jet result = Jet::constant(a.dim(), a.order(), c[a.order()]);
    for (int k = a.order() - 1; k >= 0; --k) {
        result *= h;
        result.coeffs()[0] += c[k];
    }
    return result;
}

[[noreturn]] void singular(const std::string& op, double x) {
    throw SingularityError(op + ": constant term " + std::to_string(x) + " outside the domain", x);
}

} // namespace

int JetLayout::index_of(const MultiIndex& alpha) const {
    for (int v = dim; v < kMaxJetDim; ++v) {
        if (alpha[v] != 0) throw UsageError("multi-index refers to a variable beyond the jet dimension");
    }
    if (degree(alpha) > order) throw UsageError("multi-index order exceeds jet truncation order");
    const auto& map = registry().lookup[LayoutRegistry::slot(dim, order)];
    return map.at(pack(alpha));
}

const JetLayout& jet_layout(int dim, int order) {
    if (dim < 1 || dim > kMaxJetDim) throw UsageError("jet dimension must be in 1..8, got " + std::to_string(dim));
    if (order < 0 || order > kMaxJetOrder) throw UsageError("jet order must be in 0..4, got " + std::to_string(order));
    return *registry().table[LayoutRegistry::slot(dim, order)];
}

int jet_size(int dim, int order) { return jet_layout(dim, order).size(); }

Jet::Jet(int dim, int order) : layout_(&jet_layout(dim, order)), coeffs_(layout_->size(), 0.0) {}

Jet Jet::constant(int dim, int order, double value) {
    Jet j(dim, order);
    j.coeffs_[0] = value;
    return j;
}

Jet Jet::seed(int dim, int order, std::span<const double> point, int var) {
    if (var < 0 || var >= dim) throw DomainError("seed variable index " + std::to_string(var) + " out of range");
    if (static_cast<int>(point.size()) != dim) throw UsageError("seed point dimension mismatch");
    Jet j = constant(dim, order, point[var]);
    if (order >= 1) j.coeffs_[1 + var] = 1.0;
    return j;
}

double Jet::coeff(const MultiIndex& alpha) const { return coeffs_[layout_->index_of(alpha)]; }

double Jet::extract(const MultiIndex& alpha) const {
    const int i = layout_->index_of(alpha);
    return coeffs_[i] * layout_->factorials[i];
}

double Jet::d(int var) const {
    if (order() < 1) throw UsageError("first derivative of an order-0 jet");
    return coeffs_[1 + var];
}

double Jet::d(int var1, int var2) const {
    MultiIndex a{};
    a[var1] += 1;
    a[var2] += 1;
    return extract(a);
}

Jet Jet::partial(int var) const {
    if (order() < 1) throw UsageError("partial derivative of an order-0 jet");
    if (var < 0 || var >= dim()) throw UsageError("partial derivative variable out of range");
    Jet out(dim(), order() - 1);
    const auto& ex = layout_->exponents;
    const auto& sh = layout_->shift[var];
    for (int i = 0; i < out.size(); ++i) out.coeffs_[i] = coeffs_[sh[i]] * (ex[i][var] + 1);
    return out;
}

Jet Jet::truncated(int new_order) const {
    if (new_order > order()) throw UsageError("cannot raise the truncation order of a jet");
    if (new_order == order()) return *this;
    Jet out(dim(), new_order);
    std::copy_n(coeffs_.begin(), out.size(), out.coeffs_.begin());
    return out;
}

void require_compatible(const Jet& a, const Jet& b) {
    if (!a.valid() || !b.valid()) throw UsageError("operation on an empty jet");
    if (a.dim() != b.dim() || a.order() != b.order())
        throw UsageError("jet shape mismatch: (" + std::to_string(a.dim()) + "," + std::to_string(a.order()) +
                         ") vs (" + std::to_string(b.dim()) + "," + std::to_string(b.order()) + ")");
}

Jet& Jet::operator+=(const Jet& o) {
    require_compatible(*this, o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    require_compatible(*this, o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
}

Jet& Jet::operator*=(const Jet& o) {
    *this = *this * o;
    return *this;
}

Jet& Jet::operator/=(const Jet& o) {
    *this = *this * reciprocal(o);
    return *this;
}

Jet& Jet::operator+=(double c) {
    coeffs_[0] += c;
    return *this;
}

Jet& Jet::operator-=(double c) {
    coeffs_[0] -= c;
    return *this;
}

Jet& Jet::operator*=(double c) {
    for (auto& x : coeffs_) x *= c;
    return *this;
}

Jet& Jet::operator/=(double c) {
    if (c == 0.0) throw SingularityError("division of a jet by zero", c);
    for (auto& x : coeffs_) x /= c;
    return *this;
}

Jet Jet::operator-() const {
    Jet out = *this;
    for (auto& x : out.coeffs_) x = -x;
    return out;
}

bool Jet::all_finite() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](double x) { return std::isfinite(x); });
}

void mul_add(Jet& acc, const Jet& a, const Jet& b) {
    require_compatible(a, b);
    require_compatible(acc, a);
    const double* pa = a.coeffs_.data();
    const double* pb = b.coeffs_.data();
    double* po = acc.coeffs_.data();
    for (const auto& p : a.layout_->products) po[p.out] += pa[p.lhs] * pb[p.rhs];
}

Jet operator*(const Jet& a, const Jet& b) {
    Jet out(a.valid() ? a.dim() : 1, a.valid() ? a.order() : 0);
    mul_add(out, a, b);
    return out;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator+(Jet a, double c) { return a += c; }
Jet operator+(double c, Jet a) { return a += c; }
Jet operator-(Jet a, double c) { return a -= c; }
Jet operator-(double c, const Jet& a) { return -a + c; }
Jet operator*(Jet a, double c) { return a *= c; }
Jet operator*(double c, Jet a) { return a *= c; }
Jet operator/(Jet a, double c) { return a /= c; }
Jet operator/(double c, const Jet& a) { return reciprocal(a) * c; }

Jet reciprocal(const Jet& a) {
    const double x = a.value();
    if (x == 0.0 || !std::isfinite(x)) singular("division", x);
    Taylor c{};
    double p = 1.0 / x;
    for (int k = 0; k <= a.order(); ++k) {
        c[k] = (k % 2 == 0 ? 1.0 : -1.0) * p;
        p /= x;
    }
    return compose(a, c);
}

Jet sin(const Jet& a) {
    const double s = std::sin(a.value()), co = std::cos(a.value());
    const double cyc[4] = {s, co, -s, -co};
    Taylor c{};
    for (int k = 0; k <= a.order(); ++k) c[k] = cyc[k % 4] / factorial(k);
    return compose(a, c);
}

Jet cos(const Jet& a) {
    const double s = std::sin(a.value()), co = std::cos(a.value());
    const double cyc[4] = {co, -s, -co, s};
    Taylor c{};
    for (int k = 0; k <= a.order(); ++k) c[k] = cyc[k % 4] / factorial(k);
    return compose(a, c);
}

Jet sinh(const Jet& a) {
    const double s = std::sinh(a.value()), ch = std::cosh(a.value());
    Taylor c{};
    for (int k = 0; k <= a.order(); ++k) c[k] = (k % 2 == 0 ? s : ch) / factorial(k);
    return compose(a, c);
}

Jet cosh(const Jet& a) {
    const double s = std::sinh(a.value()), ch = std::cosh(a.value());
    Taylor c{};
    for (int k = 0; k <= a.order(); ++k) c[k] = (k % 2 == 0 ? ch : s) / factorial(k);
    return compose(a, c);
}

Jet exp(const Jet& a) {
    const double e = std::exp(a.value());
    if (!std::isfinite(e)) singular("exp overflow", a.value());
    Taylor c{};
    for (int k = 0; k <= a.order(); ++k) c[k] = e / factorial(k);
    return compose(a, c);
}

Jet log(const Jet& a) {
    const double x = a.value();
    if (!(x > 0.0)) singular("log", x);
    Taylor c{};
    c[0] = std::log(x);
    double p = 1.0;
    for (int k = 1; k <= a.order(); ++k) {
        p /= x;
        c[k] = (k % 2 == 1 ? 1.0 : -1.0) * p / k;
    }
    return compose(a, c);
}

Jet sqrt(const Jet& a) {
    const double x = a.value();
    if (!(x > 0.0)) singular("sqrt", x);
    // binomial(1/2, k) * x^(1/2 - k)
    Taylor c{};
    double binom = 1.0;
    double p = std::sqrt(x);
    for (int k = 0; k <= a.order(); ++k) {
        c[k] = binom * p;
        binom *= (0.5 - k) / (k + 1);
        p /= x;
    }
    return compose(a, c);
}

Jet atan(const Jet& a) {
    const double x = a.value();
    // Series of 1/(q0 + q1 h + h^2), integrated term by term.
    const double q0 = 1.0 + x * x, q1 = 2.0 * x;
    Taylor d{};
    d[0] = 1.0 / q0;
    for (int k = 1; k < kMaxJetOrder; ++k) d[k] = -(q1 * d[k - 1] + (k >= 2 ? d[k - 2] : 0.0)) / q0;
    Taylor c{};
    c[0] = std::atan(x);
    for (int k = 1; k <= a.order(); ++k) c[k] = d[k - 1] / k;
    return compose(a, c);
}

Jet pow(const Jet& a, int exponent) {
    if (exponent < 0) throw UsageError("integer power must be non-negative");
    Jet result = Jet::constant(a.dim(), a.order(), 1.0);
    Jet base = a;
    while (exponent > 0) {
        if (exponent & 1) result *= base;
        exponent >>= 1;
        if (exponent) base *= base;
    }
    return result;
}

} // namespace kangle
