#include "kangle/dsl.hpp"

#include "kangle/ambient.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace kangle {

namespace {

constexpr int kMaxNesting = 200;
constexpr int kMaxNodes = 1 << 16;

std::string describe(const std::vector<std::string>& expected) {
    std::string s;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) s += i + 1 == expected.size() ? " or " : ", ";
        s += expected[i];
    }
    return s;
}

struct Token {
    enum class Type { end, integer, real, ident, punct } type = Type::end;
    std::string text;
    SourcePos pos;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space();
        Token t;
        t.pos = {line_, col_};
        if (i_ >= src_.size()) return t;
        const char c = src_[i_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t b = i_;
            while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) advance();
            t.type = Token::Type::ident;
            t.text = std::string(src_.substr(b, i_ - b));
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && digit_at(i_ + 1))) return number(t);
        if (std::string_view("=;[](),+-*/^").find(c) != std::string_view::npos) {
            advance();
            t.type = Token::Type::punct;
            t.text = std::string(1, c);
            return t;
        }
        std::string shown = std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c) : "\\x" + hex(c);
        throw ParseError(ParseError::Kind::syntax, t.pos, {}, "unexpected character '" + shown + "'");
    }

private:
    static std::string hex(char c) {
        const char* digits = "0123456789abcdef";
        const auto u = static_cast<unsigned char>(c);
        return {digits[u >> 4], digits[u & 15]};
    }

    bool digit_at(std::size_t k) const { return k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k])); }

    void advance() {
        if (src_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }

    void skip_space() {
        while (i_ < src_.size()) {
            const char c = src_[i_];
            if (c == '#') {
                while (i_ < src_.size() && src_[i_] != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
                advance();
            } else {
                break;
            }
        }
    }

    Token number(Token& t) {
        const std::size_t b = i_;
        bool real = false;
        while (digit_at(i_)) advance();
        if (i_ < src_.size() && src_[i_] == '.') {
            real = true;
            advance();
            while (digit_at(i_)) advance();
        }
        if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
            std::size_t k = i_ + 1;
            if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
            if (digit_at(k)) {
                real = true;
                while (i_ < k) advance();
                while (digit_at(i_)) advance();
            }
        }
        t.type = real ? Token::Type::real : Token::Type::integer;
        t.text = std::string(src_.substr(b, i_ - b));
        return t;
    }

    std::string_view src_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

bool lookup_func(const std::string& name, Func& f) {
    static const std::pair<const char*, Func> table[] = {
        {"sin", Func::sin}, {"cos", Func::cos},   {"sinh", Func::sinh}, {"cosh", Func::cosh},
        {"exp", Func::exp}, {"log", Func::log}, {"sqrt", Func::sqrt}, {"atan", Func::atan},
    };
    for (const auto& [n, fn] : table) {
        if (name == n) {
            f = fn;
            return true;
        }
    }
    return false;
}

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { tok_ = lex_.next(); }

    ImmersionSpec file() {
        ImmersionSpec spec;
        keyword("n");
        punct("=");
        const Token nt = tok_;
        spec.n = integer("integer");
        if (spec.n < 1 || spec.n > kMaxHalfDim)
            throw ParseError(ParseError::Kind::syntax, nt.pos, {"integer in 1.." + std::to_string(kMaxHalfDim)},
                             "n must be between 1 and " + std::to_string(kMaxHalfDim) + ", got " + nt.text);
        n_ = spec.n;
        punct(";");
        keyword("ambient");
        punct("=");
        spec.ambient = ambient(2 * spec.n);
        punct(";");
        if (is_ident("periodic")) {
            take();
            punct(";");
            spec.periodic = true;
        } else if (!is_ident("map")) {
            fail({"\"periodic\"", "\"map\""});
        }
        keyword("map");
        punct("=");
        const SourcePos open = tok_.pos;
        punct("[");
        spec.components.push_back(expr());
        while (is_punct(",")) {
            take();
            spec.components.push_back(expr());
        }
        if (!is_punct("]")) fail({"\",\"", "\"]\"", "operator"});
        take();
        if (tok_.type != Token::Type::end) fail({"end of input"});
        const int want = 4 * spec.n;
        const int got = static_cast<int>(spec.components.size());
        if (got != want)
            throw ParseError(ParseError::Kind::arity, open, {std::to_string(want) + " components"},
                             "expected " + std::to_string(want) + " components, found " + std::to_string(got));
        return spec;
    }

private:
    [[noreturn]] void fail(std::vector<std::string> expected) {
        const std::string found = tok_.type == Token::Type::end ? "end of input" : "\"" + tok_.text + "\"";
        const std::string msg = "expected " + describe(expected) + ", found " + found;
        throw ParseError(ParseError::Kind::syntax, tok_.pos, std::move(expected), msg);
    }

    void take() { tok_ = lex_.next(); }
    bool is_punct(const char* p) const { return tok_.type == Token::Type::punct && tok_.text == p; }
    bool is_ident(const char* p) const { return tok_.type == Token::Type::ident && tok_.text == p; }

    void punct(const char* p) {
        if (!is_punct(p)) fail({std::string("\"") + p + "\""});
        take();
    }

    void keyword(const char* k) {
        if (!is_ident(k)) fail({std::string("\"") + k + "\""});
        take();
    }

    int integer(const char* what) {
        if (tok_.type != Token::Type::integer) fail({what});
        int v = 0;
        auto [ptr, ec] = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), v);
        if (ec != std::errc() || v > 1000000)
            throw ParseError(ParseError::Kind::syntax, tok_.pos, {what}, "integer out of range: " + tok_.text);
        take();
        return v;
    }

    double real_literal() {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), v);
        if (ec != std::errc() || !std::isfinite(v))
            throw ParseError(ParseError::Kind::syntax, tok_.pos, {"number"}, "numeric literal out of range: " + tok_.text);
        take();
        return v;
    }

    AmbientSpec ambient(int complex_dim) {
        if (is_ident("flat")) {
            take();
            return AmbientSpec::flat(complex_dim);
        }
        if (!is_ident("space_form")) fail({"\"flat\"", "\"space_form\""});
        take();
        punct("(");
        bool negative = false;
        if (is_punct("-")) {
            negative = true;
            take();
        }
        if (tok_.type != Token::Type::integer && tok_.type != Token::Type::real) fail({"number"});
        const Token at = tok_;
        double rho = real_literal();
        if (negative) rho = -rho;
        if (rho == 0.0)
            throw ParseError(ParseError::Kind::syntax, at.pos, {"nonzero number"},
                             "space_form curvature must be nonzero; use \"flat\"");
        punct(")");
        return AmbientSpec::space_form(rho, complex_dim);
    }

    struct Nest {
        explicit Nest(Parser& p) : p_(p) {
            if (++p_.nesting_ > kMaxNesting)
                throw ParseError(ParseError::Kind::syntax, p_.tok_.pos, {},
                                 "expression nested deeper than " + std::to_string(kMaxNesting));
        }
        ~Nest() { --p_.nesting_; }
        Parser& p_;
    };

    ExprPtr expr() {
        Nest guard(*this);
        ExprPtr lhs = term();
        while (is_punct("+") || is_punct("-")) {
            const auto kind = tok_.text == "+" ? Expr::Kind::add : Expr::Kind::sub;
            const SourcePos pos = tok_.pos;
            take();
            lhs = Expr::binary(kind, lhs, term(), pos);
        }
        return lhs;
    }

    ExprPtr term() {
        ExprPtr lhs = factor();
        while (is_punct("*") || is_punct("/")) {
            const auto kind = tok_.text == "*" ? Expr::Kind::mul : Expr::Kind::div;
            const SourcePos pos = tok_.pos;
            take();
            lhs = Expr::binary(kind, lhs, factor(), pos);
        }
        return lhs;
    }

    ExprPtr factor() {
        ExprPtr b = base();
        if (is_punct("^")) {
            const SourcePos pos = tok_.pos;
            take();
            b = Expr::power(b, integer("integer exponent"), pos);
        }
        return b;
    }

    ExprPtr base() {
        Nest guard(*this);
        if (++nodes_ > kMaxNodes)
            throw ParseError(ParseError::Kind::syntax, tok_.pos, {}, "map exceeds " + std::to_string(kMaxNodes) + " operands");
        const SourcePos pos = tok_.pos;
        if (tok_.type == Token::Type::integer || tok_.type == Token::Type::real) return Expr::literal(real_literal(), pos);
        if (is_punct("-")) {
            take();
            return Expr::neg(base(), pos);
        }
        if (is_punct("(")) {
            take();
            ExprPtr e = expr();
            punct(")");
            return e;
        }
        if (tok_.type == Token::Type::ident) {
            const std::string name = tok_.text;
            take();
            if (is_punct("(")) {
                Func f{};
                if (!lookup_func(name, f))
                    throw ParseError(ParseError::Kind::name, pos, {"function name"}, "unknown function '" + name + "'");
                take();
                ExprPtr arg = expr();
                punct(")");
                return Expr::call(f, arg, pos);
            }
            return variable(name, pos);
        }
        fail({"number", "variable", "function", "\"(\"", "\"-\""});
    }

    ExprPtr variable(const std::string& name, SourcePos pos) {
        const int dim = 2 * n_;
        const std::string range = "u1..u" + std::to_string(dim);
        if (name.size() >= 2 && name[0] == 'u' && name[1] != '0') {
            int idx = 0;
            auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
            if (ec == std::errc() && ptr == name.data() + name.size() && idx >= 1 && idx <= dim)
                return Expr::variable(idx - 1, pos);
        }
        throw ParseError(ParseError::Kind::name, pos, {range}, "unknown variable '" + name + "' (expected " + range + ")");
    }

    Lexer lex_;
    Token tok_;
    int n_ = 1;
    int nesting_ = 0;
    int nodes_ = 0;
};

} // namespace

ParseError::ParseError(Kind kind, SourcePos pos, std::vector<std::string> expected, const std::string& message)
    : Error("line " + std::to_string(pos.line) + ", column " + std::to_string(pos.column) + ": " + message),
      kind_(kind), pos_(pos), expected_(std::move(expected)) {}

ImmersionSpec parse_immersion(std::string_view text, std::string name) {
    ImmersionSpec spec = Parser(text).file();
    spec.name = std::move(name);
    return spec;
}

std::string print_immersion(const ImmersionSpec& spec) {
    std::string out = "n = " + std::to_string(spec.n) + ";\nambient = ";
    if (spec.ambient.is_flat()) {
        out += "flat";
    } else {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof buf, spec.ambient.rho);
        out += "space_form(" + std::string(buf, res.ptr) + ")";
    }
    out += ";\n";
    if (spec.periodic) out += "periodic;\n";
    out += "map = [\n";
    for (std::size_t i = 0; i < spec.components.size(); ++i) {
        out += "  " + to_string(*spec.components[i]);
        out += i + 1 < spec.components.size() ? ",\n" : "\n";
    }
    out += "]\n";
    return out;
}

bool structurally_equal(const ImmersionSpec& a, const ImmersionSpec& b) {
    if (a.n != b.n || a.periodic != b.periodic || a.ambient.kind != b.ambient.kind || a.ambient.rho != b.ambient.rho ||
        a.components.size() != b.components.size())
        return false;
    for (std::size_t i = 0; i < a.components.size(); ++i) {
        if (!structurally_equal(*a.components[i], *b.components[i])) return false;
    }
    return true;
}

std::vector<Jet> eval_components(const ImmersionSpec& spec, std::span<const double> point, int order) {
    if (static_cast<int>(point.size()) != spec.domain_dim())
        throw UsageError("point has " + std::to_string(point.size()) + " coordinates, expected " +
                         std::to_string(spec.domain_dim()));
    std::vector<Jet> vars;
    vars.reserve(point.size());
    for (int v = 0; v < spec.domain_dim(); ++v) vars.push_back(Jet::seed(spec.domain_dim(), order, point, v));
    std::vector<Jet> out;
    out.reserve(spec.components.size());
    for (const auto& c : spec.components) out.push_back(evaluate(*c, vars));
    std::vector<double> z(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) z[i] = out[i].value();
    check_chart(spec.ambient, z);
    return out;
}

std::vector<double> eval_values(const ImmersionSpec& spec, std::span<const double> point) {
    if (static_cast<int>(point.size()) != spec.domain_dim()) throw UsageError("point dimension mismatch");
    std::vector<double> z;
    for (const auto& c : spec.components) z.push_back(evaluate(*c, point));
    check_chart(spec.ambient, z);
    return z;
}

} // namespace kangle
