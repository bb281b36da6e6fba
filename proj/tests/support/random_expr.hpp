#pragma once

// Random expression trees and random parser inputs for property tests.

#include "kangle/expr.hpp"

#include <random>
#include <string>

namespace support {

using kangle::Expr;
using kangle::ExprPtr;
using kangle::Func;

/// Trees whose value stays in the domain of every node: log and sqrt see
/// 1 + x^2, divisors are 2 + cos(x), exp/sinh/cosh see sin(x).
inline ExprPtr random_expr(std::mt19937_64& rng, int vars, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 1 ? 1 : 11);
    std::uniform_real_distribution<double> lit(0.1, 2.0);
    std::uniform_int_distribution<int> var(0, vars - 1);
    auto sub = [&] { return random_expr(rng, vars, depth - 1); };
    auto one_plus_sq = [&](ExprPtr e) {
        return Expr::binary(Expr::Kind::add, Expr::literal(1.0), Expr::power(e, 2));
    };
    switch (pick(rng)) {
    case 0: return Expr::literal(lit(rng));
    case 1: return Expr::variable(var(rng));
    case 2: return Expr::binary(Expr::Kind::add, sub(), sub());
    case 3: return Expr::binary(Expr::Kind::sub, sub(), sub());
    case 4: return Expr::binary(Expr::Kind::mul, sub(), sub());
    case 5:
        return Expr::binary(Expr::Kind::div, sub(),
                            Expr::binary(Expr::Kind::add, Expr::literal(2.0), Expr::call(Func::cos, sub())));
    case 6: return Expr::call(std::uniform_int_distribution<int>(0, 1)(rng) ? Func::sin : Func::cos, sub());
    case 7: {
        const Func f[] = {Func::exp, Func::sinh, Func::cosh};
        return Expr::call(f[std::uniform_int_distribution<int>(0, 2)(rng)], Expr::call(Func::sin, sub()));
    }
    case 8:
        return Expr::call(std::uniform_int_distribution<int>(0, 1)(rng) ? Func::log : Func::sqrt, one_plus_sq(sub()));
    case 9: return Expr::call(Func::atan, sub());
    case 10: return Expr::neg(sub());
    default: return Expr::power(sub(), std::uniform_int_distribution<int>(0, 3)(rng));
    }
}

/// Mix of random bytes, random token soup and single-edit mutations of a
/// valid file.
inline std::string random_input(std::mt19937_64& rng, const std::string& valid) {
    std::uniform_int_distribution<int> mode(0, 2);
    std::uniform_int_distribution<int> byte(0, 255);
    switch (mode(rng)) {
    case 0: {
        std::string s(std::uniform_int_distribution<int>(0, 64)(rng), '\0');
        for (auto& c : s) c = static_cast<char>(byte(rng));
        return s;
    }
    case 1: {
        static const char* tokens[] = {"n", "=", "1", "2", ";", "ambient", "flat", "space_form", "(", ")",
                                       "-", "0.5", "periodic", "map", "[", "]", ",", "u1", "u2", "u9",
                                       "sin", "foo", "+", "*", "/", "^", "1e400", "#c\n", "\n", " "};
        std::string s;
        const int len = std::uniform_int_distribution<int>(0, 40)(rng);
        for (int i = 0; i < len; ++i) s += tokens[std::uniform_int_distribution<int>(0, 29)(rng)];
        return s;
    }
    default: {
        std::string s = valid;
        const int edits = std::uniform_int_distribution<int>(1, 3)(rng);
        for (int e = 0; e < edits && !s.empty(); ++e) {
            const std::size_t at = std::uniform_int_distribution<std::size_t>(0, s.size() - 1)(rng);
            switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
            case 0: s.erase(at, 1); break;
            case 1: s.insert(s.begin() + at, static_cast<char>(byte(rng))); break;
            default: s[at] = static_cast<char>(byte(rng)); break;
            }
        }
        return s;
    }
    }
}

} // namespace support
