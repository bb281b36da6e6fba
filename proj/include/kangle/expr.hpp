#pragma once

#include "kangle/jet.hpp"

#include <memory>
#include <span>
#include <string>

namespace kangle {

struct SourcePos {
    int line = 0;
    int column = 0;
};

enum class Func { sin, cos, sinh, cosh, exp, log, sqrt, atan };

const char* func_name(Func f);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression tree node. Positions are informational and do not
/// take part in structural equality.
struct Expr {
    enum class Kind { literal, variable, call, neg, add, sub, mul, div, pow };

    Kind kind = Kind::literal;
    double value = 0.0;  // literal
    int var = 0;         // variable, 0-based (u1 -> 0)
    Func func = Func::sin;
    int exponent = 0;    // pow
    ExprPtr lhs, rhs;    // operands; unary nodes use lhs
    SourcePos pos;

    static ExprPtr literal(double v, SourcePos pos = {});
    static ExprPtr variable(int index, SourcePos pos = {});
    static ExprPtr call(Func f, ExprPtr arg, SourcePos pos = {});
    static ExprPtr neg(ExprPtr arg, SourcePos pos = {});
    static ExprPtr binary(Kind k, ExprPtr a, ExprPtr b, SourcePos pos = {});
    static ExprPtr power(ExprPtr base, int exponent, SourcePos pos = {});
};

bool structurally_equal(const Expr& a, const Expr& b);

/// Largest variable index referenced plus one.
int variable_count(const Expr& e);
int depth(const Expr& e);

/// Canonical text; parses back to a structurally equal tree.
std::string to_string(const Expr& e);

/// Evaluate over jets. `vars[i]` is the jet of u_{i+1}. Jet singularities are
/// rethrown with the source position of the failing node.
Jet evaluate(const Expr& e, std::span<const Jet> vars);
double evaluate(const Expr& e, std::span<const double> vars);

} // namespace kangle
