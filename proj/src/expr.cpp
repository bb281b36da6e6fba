#include "kangle/expr.hpp"

#include "kangle/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace kangle {

const char* func_name(Func f) {
    switch (f) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::sinh: return "sinh";
    case Func::cosh: return "cosh";
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sqrt: return "sqrt";
    case Func::atan: return "atan";
    }
    return "?";
}

ExprPtr Expr::literal(double v, SourcePos pos) {
    if (!std::isfinite(v) || v < 0.0) throw UsageError("literals must be finite and non-negative; use neg()");
    auto e = std::make_shared<Expr>();
    e->kind = Kind::literal;
    e->value = v;
    e->pos = pos;
    return e;
}

ExprPtr Expr::variable(int index, SourcePos pos) {
    if (index < 0) throw UsageError("negative variable index");
    auto e = std::make_shared<Expr>();
    e->kind = Kind::variable;
    e->var = index;
    e->pos = pos;
    return e;
}

ExprPtr Expr::call(Func f, ExprPtr arg, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::call;
    e->func = f;
    e->lhs = std::move(arg);
    e->pos = pos;
    return e;
}

ExprPtr Expr::neg(ExprPtr arg, SourcePos pos) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::neg;
    e->lhs = std::move(arg);
    e->pos = pos;
    return e;
}

ExprPtr Expr::binary(Kind k, ExprPtr a, ExprPtr b, SourcePos pos) {
    if (k != Kind::add && k != Kind::sub && k != Kind::mul && k != Kind::div)
        throw UsageError("binary() needs one of add, sub, mul, div");
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->lhs = std::move(a);
    e->rhs = std::move(b);
    e->pos = pos;
    return e;
}

ExprPtr Expr::power(ExprPtr base, int exponent, SourcePos pos) {
    if (exponent < 0) throw UsageError("integer powers must be non-negative");
    auto e = std::make_shared<Expr>();
    e->kind = Kind::pow;
    e->lhs = std::move(base);
    e->exponent = exponent;
    e->pos = pos;
    return e;
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Expr::Kind::literal: return a.value == b.value;
    case Expr::Kind::variable: return a.var == b.var;
    case Expr::Kind::call: return a.func == b.func && structurally_equal(*a.lhs, *b.lhs);
    case Expr::Kind::neg: return structurally_equal(*a.lhs, *b.lhs);
    case Expr::Kind::pow: return a.exponent == b.exponent && structurally_equal(*a.lhs, *b.lhs);
    default: return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
    }
}

int variable_count(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::literal: return 0;
    case Expr::Kind::variable: return e.var + 1;
    case Expr::Kind::call:
    case Expr::Kind::neg:
    case Expr::Kind::pow: return variable_count(*e.lhs);
    default: return std::max(variable_count(*e.lhs), variable_count(*e.rhs));
    }
}

int depth(const Expr& e) {
    int d = 0;
    if (e.lhs) d = std::max(d, depth(*e.lhs));
    if (e.rhs) d = std::max(d, depth(*e.rhs));
    return d + 1;
}

namespace {

// 1: sum, 2: product, 3: power, 4: base
int level(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::add:
    case Expr::Kind::sub: return 1;
    case Expr::Kind::mul:
    case Expr::Kind::div: return 2;
    case Expr::Kind::pow: return 3;
    default: return 4;
    }
}

void print(const Expr& e, std::string& out);

void print_at(const Expr& e, int min_level, std::string& out) {
    if (level(e) < min_level) {
        out += '(';
        print(e, out);
        out += ')';
    } else {
        print(e, out);
    }
}

void print(const Expr& e, std::string& out) {
    switch (e.kind) {
    case Expr::Kind::literal: {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof buf, e.value);
        out.append(buf, res.ptr);
        return;
    }
    case Expr::Kind::variable:
        out += 'u';
        out += std::to_string(e.var + 1);
        return;
    case Expr::Kind::call:
        out += func_name(e.func);
        out += '(';
        print(*e.lhs, out);
        out += ')';
        return;
    case Expr::Kind::neg:
        out += '-';
        print_at(*e.lhs, 4, out);
        return;
    case Expr::Kind::pow:
        print_at(*e.lhs, 4, out);
        out += '^';
        out += std::to_string(e.exponent);
        return;
    default: break;
    }
    const int l = level(e);
    const char* op = e.kind == Expr::Kind::add ? " + " : e.kind == Expr::Kind::sub ? " - " : e.kind == Expr::Kind::mul ? "*" : "/";
    print_at(*e.lhs, l, out);
    out += op;
    print_at(*e.rhs, l + 1, out);
}

std::string where(const Expr& e) {
    return " (at line " + std::to_string(e.pos.line) + ", column " + std::to_string(e.pos.column) + ")";
}

template <class F>
Jet located(const Expr& e, F&& op) {
    try {
        return op();
    } catch (const SingularityError& err) {
        throw SingularityError(err.what() + where(e), err.offending_value());
    }
}

Jet apply(Func f, const Jet& a) {
    switch (f) {
    case Func::sin: return sin(a);
    case Func::cos: return cos(a);
    case Func::sinh: return sinh(a);
    case Func::cosh: return cosh(a);
    case Func::exp: return exp(a);
    case Func::log: return log(a);
    case Func::sqrt: return sqrt(a);
    case Func::atan: return atan(a);
    }
    throw UsageError("unknown function");
}

double apply(Func f, double x) {
    switch (f) {
    case Func::sin: return std::sin(x);
    case Func::cos: return std::cos(x);
    case Func::sinh: return std::sinh(x);
    case Func::cosh: return std::cosh(x);
    case Func::exp: return std::exp(x);
    case Func::log: return std::log(x);
    case Func::sqrt: return std::sqrt(x);
    case Func::atan: return std::atan(x);
    }
    return 0.0;
}

} // namespace

std::string to_string(const Expr& e) {
    std::string out;
    print(e, out);
    return out;
}

Jet evaluate(const Expr& e, std::span<const Jet> vars) {
    switch (e.kind) {
    case Expr::Kind::literal:
        if (vars.empty()) throw UsageError("evaluate needs at least one seeded variable");
        return Jet::constant(vars[0].dim(), vars[0].order(), e.value);
    case Expr::Kind::variable:
        if (e.var >= static_cast<int>(vars.size())) throw UsageError("variable u" + std::to_string(e.var + 1) + " not seeded");
        return vars[e.var];
    case Expr::Kind::call: {
        Jet a = evaluate(*e.lhs, vars);
        return located(e, [&] { return apply(e.func, a); });
    }
    case Expr::Kind::neg: return -evaluate(*e.lhs, vars);
    case Expr::Kind::pow: return pow(evaluate(*e.lhs, vars), e.exponent);
    case Expr::Kind::add: return evaluate(*e.lhs, vars) + evaluate(*e.rhs, vars);
    case Expr::Kind::sub: return evaluate(*e.lhs, vars) - evaluate(*e.rhs, vars);
    case Expr::Kind::mul: return evaluate(*e.lhs, vars) * evaluate(*e.rhs, vars);
    case Expr::Kind::div: {
        Jet a = evaluate(*e.lhs, vars), b = evaluate(*e.rhs, vars);
        return located(e, [&] { return a / b; });
    }
    }
    throw UsageError("corrupt expression node");
}

double evaluate(const Expr& e, std::span<const double> vars) {
    switch (e.kind) {
    case Expr::Kind::literal: return e.value;
    case Expr::Kind::variable:
        if (e.var >= static_cast<int>(vars.size())) throw UsageError("variable u" + std::to_string(e.var + 1) + " not bound");
        return vars[e.var];
    case Expr::Kind::call: return apply(e.func, evaluate(*e.lhs, vars));
    case Expr::Kind::neg: return -evaluate(*e.lhs, vars);
    case Expr::Kind::pow: return std::pow(evaluate(*e.lhs, vars), e.exponent);
    case Expr::Kind::add: return evaluate(*e.lhs, vars) + evaluate(*e.rhs, vars);
    case Expr::Kind::sub: return evaluate(*e.lhs, vars) - evaluate(*e.rhs, vars);
    case Expr::Kind::mul: return evaluate(*e.lhs, vars) * evaluate(*e.rhs, vars);
    case Expr::Kind::div: return evaluate(*e.lhs, vars) / evaluate(*e.rhs, vars);
    }
    return 0.0;
}

} // namespace kangle
