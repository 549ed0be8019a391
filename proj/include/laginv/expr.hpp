#pragma once

// Expression language for transforms phi(s) and parametric functions h(s).
//
// Grammar (lowest to highest precedence, whitespace ignored):
//
//   expr     := term (('+' | '-') term)*
//   term     := unary (('*' | '/') unary)*
//   unary    := '-' unary | power
//   power    := atom ('^' unary)?            right associative
//   atom     := number | 's' | ('exp' | 'log') '(' expr ')' | '(' expr ')'
//   number   := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//             | '.' digits [exponent]
//
// The only variable is `s`. Evaluation uses the principal branch for log and
// for non-integer powers; poles are found at evaluation time through
// non-finite intermediates.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <system_error>

#include "laginv/error.hpp"
#include "laginv/power_series.hpp"

namespace laginv {

enum class expr_op { literal, variable, add, sub, mul, div, pow, neg, exp, log };

struct expr_node {
    expr_op op = expr_op::literal;
    double value = 0.0;
    int height = 1;
    std::shared_ptr<const expr_node> lhs;
    std::shared_ptr<const expr_node> rhs;
};

using expr_ptr = std::shared_ptr<const expr_node>;

class transform_expr {
public:
    transform_expr(expr_ptr root, std::string source) : root_(std::move(root)), source_(std::move(source)) {}

    const expr_node& root() const noexcept { return *root_; }
    const expr_ptr& root_ptr() const noexcept { return root_; }
    const std::string& source() const noexcept { return source_; }

private:
    expr_ptr root_;
    std::string source_;
};

namespace detail {

inline expr_ptr make_node(expr_op op, expr_ptr lhs = nullptr, expr_ptr rhs = nullptr, double value = 0.0) {
    auto n = std::make_shared<expr_node>();
    n->op = op;
    n->value = value;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    n->height = 1 + std::max(n->lhs ? n->lhs->height : 0, n->rhs ? n->rhs->height : 0);
    return n;
}

inline constexpr int max_tree_height = 1024;

class parser {
public:
    explicit parser(std::string_view text) : text_(text) {}

    expr_ptr run() {
        expr_ptr e = expression();
        skip_ws();
        if (pos_ != text_.size())
            throw parse_error(pos_, std::string("unexpected trailing input '") + text_[pos_] + "'");
        return e;
    }

private:
    static constexpr int max_depth = 256;

    std::string_view text_;
    std::size_t pos_ = 0;
    int depth_ = 0;

    struct depth_guard {
        parser& p;
        explicit depth_guard(parser& owner) : p(owner) {
            if (++p.depth_ > max_depth)
                throw parse_error(p.pos_, "expression nested too deeply");
        }
        ~depth_guard() { --p.depth_; }
    };

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                       text_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail_expected(const char* what) {
        if (pos_ >= text_.size())
            throw parse_error(pos_, std::string("expected ") + what + " but reached end of input");
        throw parse_error(pos_, std::string("expected ") + what + " but found '" + text_[pos_] + "'");
    }

    expr_ptr expression() {
        depth_guard guard(*this);
        expr_ptr lhs = term();
        for (;;) {
            if (accept('+'))
                lhs = node(expr_op::add, lhs, term());
            else if (accept('-'))
                lhs = node(expr_op::sub, lhs, term());
            else
                return lhs;
        }
    }

    expr_ptr term() {
        expr_ptr lhs = unary();
        for (;;) {
            if (accept('*'))
                lhs = node(expr_op::mul, lhs, unary());
            else if (accept('/'))
                lhs = node(expr_op::div, lhs, unary());
            else
                return lhs;
        }
    }

    expr_ptr unary() {
        depth_guard guard(*this);
        if (accept('-'))
            return node(expr_op::neg, unary());
        return power();
    }

    expr_ptr power() {
        expr_ptr base = atom();
        if (accept('^'))
            return node(expr_op::pow, base, unary());
        return base;
    }

    expr_ptr node(expr_op op, expr_ptr lhs, expr_ptr rhs = nullptr) {
        expr_ptr n = make_node(op, std::move(lhs), std::move(rhs));
        if (n->height > max_tree_height)
            throw parse_error(pos_, "expression tree exceeds maximum height");
        return n;
    }

    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

    expr_ptr number() {
        const std::size_t start = pos_;
        std::size_t p = pos_;
        while (p < text_.size() && is_digit(text_[p]))
            ++p;
        if (p < text_.size() && text_[p] == '.') {
            ++p;
            while (p < text_.size() && is_digit(text_[p]))
                ++p;
        }
        if (p == start + 1 && text_[start] == '.')
            throw parse_error(start, "malformed number");
        if (p < text_.size() && (text_[p] == 'e' || text_[p] == 'E')) {
            std::size_t q = p + 1;
            if (q < text_.size() && (text_[q] == '+' || text_[q] == '-'))
                ++q;
            if (q < text_.size() && is_digit(text_[q])) {
                while (q < text_.size() && is_digit(text_[q]))
                    ++q;
                p = q;
            }
        }
        double value = 0.0;
        const auto [end, ec] = std::from_chars(text_.data() + start, text_.data() + p, value);
        if (ec == std::errc::result_out_of_range || (ec == std::errc{} && !std::isfinite(value)))
            throw parse_error(start, "numeric literal out of range");
        if (ec != std::errc{} || end != text_.data() + p)
            throw parse_error(start, "malformed number");
        pos_ = p;
        return make_node(expr_op::literal, nullptr, nullptr, value);
    }

    expr_ptr atom() {
        skip_ws();
        if (pos_ >= text_.size())
            fail_expected("operand");
        const char c = text_[pos_];
        if (is_digit(c) || c == '.')
            return number();
        if (c == '(') {
            ++pos_;
            expr_ptr e = expression();
            if (!accept(')'))
                fail_expected("')'");
            return e;
        }
        if (is_alpha(c)) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && (is_alpha(text_[pos_]) || is_digit(text_[pos_])))
                ++pos_;
            const std::string_view ident = text_.substr(start, pos_ - start);
            if (ident == "s")
                return make_node(expr_op::variable);
            expr_op fn;
            if (ident == "exp")
                fn = expr_op::exp;
            else if (ident == "log")
                fn = expr_op::log;
            else
                throw parse_error(start, "unknown identifier '" + std::string(ident) + "'");
            if (!accept('('))
                fail_expected("'(' after function name");
            expr_ptr arg = expression();
            if (!accept(')'))
                fail_expected("')'");
            return node(fn, arg);
        }
        fail_expected("operand");
    }
};

inline bool depends_on_variable(const expr_node& n) {
    if (n.op == expr_op::variable)
        return true;
    return (n.lhs && depends_on_variable(*n.lhs)) || (n.rhs && depends_on_variable(*n.rhs));
}

inline void require_finite(std::complex<double> z, const char* where) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw singularity_error(std::string("non-finite value in ") + where);
}

inline void require_finite(double x, const char* where) {
    if (!std::isfinite(x))
        throw singularity_error(std::string("non-finite value in ") + where);
}

template <typename T>
T integer_power(T base, long long e) {
    const bool invert = e < 0;
    auto k = static_cast<unsigned long long>(invert ? -e : e);
    T result(1.0);
    while (k != 0) {
        if (k & 1u)
            result *= base;
        k >>= 1u;
        if (k != 0)
            base *= base;
    }
    return invert ? T(1.0) / result : result;
}

inline bool as_integer(double x, long long& out) {
    if (std::floor(x) == x && std::abs(x) <= 1e9) {
        out = static_cast<long long>(x);
        return true;
    }
    return false;
}

double eval_real_node(const expr_node& n, double s);

inline std::complex<double> eval_complex_node(const expr_node& n, std::complex<double> s) {
    using cd = std::complex<double>;
    cd r;
    switch (n.op) {
    case expr_op::literal:
        return {n.value, 0.0};
    case expr_op::variable:
        return s;
    case expr_op::add:
        r = eval_complex_node(*n.lhs, s) + eval_complex_node(*n.rhs, s);
        break;
    case expr_op::sub:
        r = eval_complex_node(*n.lhs, s) - eval_complex_node(*n.rhs, s);
        break;
    case expr_op::mul:
        r = eval_complex_node(*n.lhs, s) * eval_complex_node(*n.rhs, s);
        break;
    case expr_op::div: {
        const cd den = eval_complex_node(*n.rhs, s);
        if (den == cd(0.0, 0.0))
            throw singularity_error("division by zero");
        r = eval_complex_node(*n.lhs, s) / den;
        break;
    }
    case expr_op::neg:
        r = -eval_complex_node(*n.lhs, s);
        break;
    case expr_op::exp:
        r = std::exp(eval_complex_node(*n.lhs, s));
        break;
    case expr_op::log: {
        const cd arg = eval_complex_node(*n.lhs, s);
        if (arg == cd(0.0, 0.0))
            throw singularity_error("log of zero");
        r = std::log(arg);
        break;
    }
    case expr_op::pow: {
        const cd base = eval_complex_node(*n.lhs, s);
        long long k = 0;
        if (!depends_on_variable(*n.rhs) && as_integer(eval_real_node(*n.rhs, 0.0), k)) {
            if (k < 0 && base == cd(0.0, 0.0))
                throw singularity_error("negative power of zero");
            r = integer_power(base, k);
        } else {
            if (base == cd(0.0, 0.0))
                throw singularity_error("non-integer power of zero");
            r = std::pow(base, eval_complex_node(*n.rhs, s));
        }
        break;
    }
    }
    require_finite(r, "complex evaluation");
    return r;
}

inline double eval_real_node(const expr_node& n, double s) {
    double r = 0.0;
    switch (n.op) {
    case expr_op::literal:
        return n.value;
    case expr_op::variable:
        return s;
    case expr_op::add:
        r = eval_real_node(*n.lhs, s) + eval_real_node(*n.rhs, s);
        break;
    case expr_op::sub:
        r = eval_real_node(*n.lhs, s) - eval_real_node(*n.rhs, s);
        break;
    case expr_op::mul:
        r = eval_real_node(*n.lhs, s) * eval_real_node(*n.rhs, s);
        break;
    case expr_op::div: {
        const double den = eval_real_node(*n.rhs, s);
        if (den == 0.0)
            throw singularity_error("division by zero");
        r = eval_real_node(*n.lhs, s) / den;
        break;
    }
    case expr_op::neg:
        r = -eval_real_node(*n.lhs, s);
        break;
    case expr_op::exp:
        r = std::exp(eval_real_node(*n.lhs, s));
        break;
    case expr_op::log: {
        const double arg = eval_real_node(*n.lhs, s);
        if (!(arg > 0.0))
            throw singularity_error("log of a nonpositive real");
        r = std::log(arg);
        break;
    }
    case expr_op::pow: {
        const double base = eval_real_node(*n.lhs, s);
        const double e = eval_real_node(*n.rhs, s);
        long long k = 0;
        if (!depends_on_variable(*n.rhs) && as_integer(e, k)) {
            if (k < 0 && base == 0.0)
                throw singularity_error("negative power of zero");
            r = integer_power(base, k);
        } else {
            if (!(base > 0.0))
                throw singularity_error("non-integer power of a nonpositive real");
            r = std::pow(base, e);
        }
        break;
    }
    }
    require_finite(r, "real evaluation");
    return r;
}

// The expression evaluated in series arithmetic with the variable replaced by
// `var`; the plain jet is the case var = identity.
inline power_series eval_series_node(const expr_node& n, const power_series& var) {
    switch (n.op) {
    case expr_op::literal:
        return power_series::constant(n.value, var.center(), var.order());
    case expr_op::variable:
        return var;
    case expr_op::add:
        return add(eval_series_node(*n.lhs, var), eval_series_node(*n.rhs, var));
    case expr_op::sub:
        return sub(eval_series_node(*n.lhs, var), eval_series_node(*n.rhs, var));
    case expr_op::mul:
        return mul(eval_series_node(*n.lhs, var), eval_series_node(*n.rhs, var));
    case expr_op::div:
        return div(eval_series_node(*n.lhs, var), eval_series_node(*n.rhs, var));
    case expr_op::neg:
        return neg(eval_series_node(*n.lhs, var));
    case expr_op::exp:
        return laginv::exp(eval_series_node(*n.lhs, var));
    case expr_op::log: {
        power_series arg = eval_series_node(*n.lhs, var);
        if (arg[0] == 0.0)
            throw singularity_error("log of zero");
        return laginv::log(arg);
    }
    case expr_op::pow: {
        power_series base = eval_series_node(*n.lhs, var);
        if (!depends_on_variable(*n.rhs)) {
            const double e = eval_real_node(*n.rhs, var[0]);
            long long k = 0;
            if (as_integer(e, k)) {
                if (k < 0 && base[0] == 0.0)
                    throw singularity_error("negative power of zero");
                return laginv::pow(base, k);
            }
            return laginv::pow(base, e);
        }
        return laginv::exp(mul(eval_series_node(*n.rhs, var), laginv::log(base)));
    }
    }
    throw domain_error("corrupt expression node");
}

inline int precedence(expr_op op) {
    switch (op) {
    case expr_op::add:
    case expr_op::sub:
        return 1;
    case expr_op::mul:
    case expr_op::div:
        return 2;
    case expr_op::neg:
        return 3;
    case expr_op::pow:
        return 4;
    default:
        return 5;
    }
}

inline std::string format_literal(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void print_node(const expr_node& n, std::string& out) {
    auto child = [&out](const expr_node& c, bool parens) {
        if (parens)
            out += '(';
        print_node(c, out);
        if (parens)
            out += ')';
    };
    switch (n.op) {
    case expr_op::literal:
        out += format_literal(n.value);
        return;
    case expr_op::variable:
        out += 's';
        return;
    case expr_op::exp:
    case expr_op::log:
        out += n.op == expr_op::exp ? "exp(" : "log(";
        print_node(*n.lhs, out);
        out += ')';
        return;
    case expr_op::neg:
        out += '-';
        child(*n.lhs, precedence(n.lhs->op) < precedence(expr_op::pow));
        return;
    case expr_op::pow:
        child(*n.lhs, precedence(n.lhs->op) <= precedence(expr_op::pow));
        out += '^';
        child(*n.rhs, precedence(n.rhs->op) < precedence(expr_op::neg));
        return;
    default: {
        const int p = precedence(n.op);
        child(*n.lhs, precedence(n.lhs->op) < p);
        out += n.op == expr_op::add ? " + " : n.op == expr_op::sub ? " - " : n.op == expr_op::mul ? "*" : "/";
        // the parser builds left-leaning trees, so an equal-precedence right child needs parentheses
        child(*n.rhs, precedence(n.rhs->op) <= p);
        return;
    }
    }
}

} // namespace detail

inline transform_expr parse(std::string_view text) {
    detail::parser p(text);
    return {p.run(), std::string(text)};
}

// Canonical text form; parse(print(e)) rebuilds a structurally equal tree.
inline std::string print(const transform_expr& e) {
    std::string out;
    detail::print_node(e.root(), out);
    return out;
}

inline bool structurally_equal(const expr_node& a, const expr_node& b) {
    if (a.op != b.op)
        return false;
    if (a.op == expr_op::literal)
        return a.value == b.value;
    if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs) || static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs))
        return false;
    return (!a.lhs || structurally_equal(*a.lhs, *b.lhs)) && (!a.rhs || structurally_equal(*a.rhs, *b.rhs));
}

inline bool structurally_equal(const transform_expr& a, const transform_expr& b) {
    return structurally_equal(a.root(), b.root());
}

inline std::complex<double> eval_complex(const transform_expr& e, std::complex<double> s) {
    return detail::eval_complex_node(e.root(), s);
}

inline double eval_real(const transform_expr& e, double s) { return detail::eval_real_node(e.root(), s); }

// Taylor jet of the expression at `center`. The k-th coefficient is
// f^(k)(center) * step^k / k!; step = 1 gives the plain jet, larger steps
// keep coefficients in range when center and order are both large.
inline power_series eval_jet(const transform_expr& e, double center, std::size_t order, double step = 1.0) {
    if (order > max_order())
        throw domain_error("jet order " + std::to_string(order) + " exceeds maximum " + std::to_string(max_order()));
    if (!std::isfinite(center) || !std::isfinite(step) || step == 0.0)
        throw domain_error("jet center and step must be finite, step nonzero");
    return detail::eval_series_node(e.root(), power_series::identity(center, order, step));
}

// Taylor series of t -> e(var(t)), evaluated operation by operation on the
// series `var`. Unlike composing a finished jet, every intermediate here is a
// series of the composite function itself, which avoids the cancellation a
// Horner composition suffers when the inner series does not decay.
inline power_series eval_on_series(const transform_expr& e, const power_series& var) {
    return detail::eval_series_node(e.root(), var);
}

} // namespace laginv
