#include "dvw/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <unordered_map>
#include <numbers>
#include <tuple>

namespace dvw {

ParseError::ParseError(std::size_t offset, const std::string& msg)
    : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + msg),
      offset_(offset) {}

static std::string where(std::size_t offset) {
    return offset == std::string::npos ? std::string("derived node")
                                       : "node at offset " + std::to_string(offset);
}

EvalError::EvalError(std::size_t offset, const std::string& msg)
    : std::runtime_error("evaluation error (" + where(offset) + "): " + msg), offset_(offset) {}

namespace {

NodePtr make_node(Op op, NodePtr a = nullptr, NodePtr b = nullptr,
                  std::size_t offset = std::string::npos) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    n->offset = offset;
    return n;
}

NodePtr make_num(double v, std::size_t offset = std::string::npos) {
    auto n = std::make_shared<Node>();
    n->op = Op::num;
    n->value = v;
    n->offset = offset;
    return n;
}

bool is_num(const NodePtr& n, double v) { return n->op == Op::num && n->value == v; }

// The constructors below fold literal arithmetic and drop trivial zeros and
// ones.  Nothing more clever than that is attempted.

NodePtr add(NodePtr a, NodePtr b, std::size_t off = std::string::npos) {
    if (is_num(a, 0.0)) return b;
    if (is_num(b, 0.0)) return a;
    if (a->op == Op::num && b->op == Op::num) return make_num(a->value + b->value, off);
    return make_node(Op::add, std::move(a), std::move(b), off);
}

NodePtr neg(NodePtr a, std::size_t off = std::string::npos) {
    if (a->op == Op::num) return make_num(-a->value, off);
    if (a->op == Op::neg) return a->a;
    return make_node(Op::neg, std::move(a), nullptr, off);
}

NodePtr sub(NodePtr a, NodePtr b, std::size_t off = std::string::npos) {
    if (is_num(b, 0.0)) return a;
    if (is_num(a, 0.0)) return neg(std::move(b), off);
    if (a->op == Op::num && b->op == Op::num) return make_num(a->value - b->value, off);
    return make_node(Op::sub, std::move(a), std::move(b), off);
}

NodePtr mul(NodePtr a, NodePtr b, std::size_t off = std::string::npos) {
    if (is_num(a, 0.0) || is_num(b, 0.0)) return make_num(0.0);
    if (is_num(a, 1.0)) return b;
    if (is_num(b, 1.0)) return a;
    if (a->op == Op::num && b->op == Op::num) return make_num(a->value * b->value, off);
    return make_node(Op::mul, std::move(a), std::move(b), off);
}

NodePtr div(NodePtr a, NodePtr b, std::size_t off = std::string::npos) {
    if (is_num(b, 1.0)) return a;
    if (is_num(a, 0.0) && !is_num(b, 0.0)) return make_num(0.0);
    if (a->op == Op::num && b->op == Op::num && b->value != 0.0)
        return make_num(a->value / b->value, off);
    return make_node(Op::div, std::move(a), std::move(b), off);
}

NodePtr power(NodePtr a, int k, std::size_t off = std::string::npos) {
    if (k == 0) return make_num(1.0, off);
    if (k == 1) return a;
    if (a->op == Op::num && (k > 0 || a->value != 0.0))
        return make_num(std::pow(a->value, k), off);
    auto n = std::make_shared<Node>();
    n->op = Op::pow;
    n->a = std::move(a);
    n->exponent = k;
    n->offset = off;
    return n;
}

NodePtr func(Op op, NodePtr a, std::size_t off = std::string::npos) {
    if (a->op == Op::num) {
        double v = a->value;
        switch (op) {
            case Op::sin: return make_num(std::sin(v), off);
            case Op::cos: return make_num(std::cos(v), off);
            case Op::exp: return make_num(std::exp(v), off);
            default: break;
        }
    }
    return make_node(op, std::move(a), nullptr, off);
}

// ---------------------------------------------------------------- parser

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr run() {
        skip();
        if (pos_ == s_.size()) throw ParseError(pos_, "expected expression, found end of input");
        NodePtr e = sum();
        skip();
        if (pos_ != s_.size())
            throw ParseError(pos_, std::string("expected operator or end of input, found '") +
                                       s_[pos_] + "'");
        return e;
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        skip();
        if (pos_ >= s_.size())
            throw ParseError(pos_, std::string("expected '") + c + "', found end of input");
        if (s_[pos_] != c)
            throw ParseError(pos_, std::string("expected '") + c + "', found '" + s_[pos_] + "'");
        ++pos_;
    }

    NodePtr sum() {
        NodePtr lhs = product();
        for (;;) {
            skip();
            std::size_t at = pos_;
            if (accept('+'))
                lhs = make_node(Op::add, lhs, product(), at);
            else if (accept('-'))
                lhs = make_node(Op::sub, lhs, product(), at);
            else
                return lhs;
        }
    }

    NodePtr product() {
        NodePtr lhs = unary();
        for (;;) {
            skip();
            std::size_t at = pos_;
            if (accept('*'))
                lhs = make_node(Op::mul, lhs, unary(), at);
            else if (accept('/'))
                lhs = make_node(Op::div, lhs, unary(), at);
            else
                return lhs;
        }
    }

    NodePtr unary() {
        skip();
        std::size_t at = pos_;
        if (accept('-')) return make_node(Op::neg, unary(), nullptr, at);
        return pow_expr();
    }

    NodePtr pow_expr() {
        NodePtr base = primary();
        skip();
        std::size_t at = pos_;
        if (!accept('^')) return base;
        skip();
        std::size_t exp_at = pos_;
        NodePtr e = unary();
        double v;
        if (!constant_value(*e, v) || v != std::floor(v) || std::abs(v) > 1e6)
            throw ParseError(exp_at, "expected integer exponent");
        auto n = std::make_shared<Node>();
        n->op = Op::pow;
        n->a = std::move(base);
        n->exponent = static_cast<int>(v);
        n->offset = at;
        return n;
    }

    static bool constant_value(const Node& n, double& out) {
        switch (n.op) {
            case Op::num: out = n.value; return true;
            case Op::neg: {
                double a;
                if (!constant_value(*n.a, a)) return false;
                out = -a;
                return true;
            }
            case Op::pow: {
                double a;
                if (!constant_value(*n.a, a)) return false;
                out = std::pow(a, n.exponent);
                return true;
            }
            default: return false;
        }
    }

    NodePtr primary() {
        skip();
        std::size_t at = pos_;
        if (pos_ >= s_.size()) throw ParseError(pos_, "expected expression, found end of input");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string_view id = s_.substr(start, pos_ - start);
            if (id == "x" || id == "y" || id == "t") {
                auto n = std::make_shared<Node>();
                n->op = Op::var;
                n->var = id == "x" ? Var::x : id == "y" ? Var::y : Var::t;
                n->offset = at;
                return n;
            }
            if (id == "pi") return make_num(std::numbers::pi, at);
            Op fop;
            if (id == "sin")
                fop = Op::sin;
            else if (id == "cos")
                fop = Op::cos;
            else if (id == "exp")
                fop = Op::exp;
            else
                throw ParseError(at, "unknown identifier '" + std::string(id) + "'");
            expect('(');
            NodePtr arg = sum();
            expect(')');
            return make_node(fop, std::move(arg), nullptr, at);
        }
        if (accept('(')) {
            NodePtr e = sum();
            expect(')');
            return e;
        }
        throw ParseError(pos_, std::string("expected expression, found '") + c + "'");
    }

    NodePtr number() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                    ++pos_;
            } else {
                pos_ = save;
            }
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (ec != std::errc() || ptr != s_.data() + pos_)
            throw ParseError(start, "malformed number");
        return make_num(v, start);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

// ------------------------------------------------------------ printing

int precedence(const Node& n) {
    switch (n.op) {
        case Op::add:
        case Op::sub: return 1;
        case Op::mul:
        case Op::div: return 2;
        case Op::neg: return 3;
        case Op::pow: return 4;
        case Op::num: return n.value < 0 ? 0 : 5;
        default: return 5;
    }
}

void print(const Node& n, std::string& out);

void print_child(const Node& n, int min_prec, std::string& out) {
    if (precedence(n) < min_prec) {
        out += '(';
        print(n, out);
        out += ')';
    } else {
        print(n, out);
    }
}

void print(const Node& n, std::string& out) {
    switch (n.op) {
        case Op::num: {
            char buf[64];
            auto r = std::to_chars(buf, buf + sizeof buf, n.value);
            out.append(buf, r.ptr);
            return;
        }
        case Op::var: out += n.var == Var::x ? 'x' : n.var == Var::y ? 'y' : 't'; return;
        case Op::neg:
            out += '-';
            print_child(*n.a, 4, out);
            return;
        case Op::add:
            print_child(*n.a, 1, out);
            out += '+';
            print_child(*n.b, 2, out);
            return;
        case Op::sub:
            print_child(*n.a, 1, out);
            out += '-';
            print_child(*n.b, 2, out);
            return;
        case Op::mul:
            print_child(*n.a, 2, out);
            out += '*';
            print_child(*n.b, 3, out);
            return;
        case Op::div:
            print_child(*n.a, 2, out);
            out += '/';
            print_child(*n.b, 3, out);
            return;
        case Op::pow:
            print_child(*n.a, 5, out);
            out += '^';
            if (n.exponent < 0)
                out += "(" + std::to_string(n.exponent) + ")";
            else
                out += std::to_string(n.exponent);
            return;
        case Op::sin:
        case Op::cos:
        case Op::exp:
            out += n.op == Op::sin ? "sin(" : n.op == Op::cos ? "cos(" : "exp(";
            print(*n.a, out);
            out += ')';
            return;
    }
}

double eval_node(const Node& n, double x, double y, double t) {
    switch (n.op) {
        case Op::num: return n.value;
        case Op::var: return n.var == Var::x ? x : n.var == Var::y ? y : t;
        case Op::neg: return -eval_node(*n.a, x, y, t);
        case Op::add: return eval_node(*n.a, x, y, t) + eval_node(*n.b, x, y, t);
        case Op::sub: return eval_node(*n.a, x, y, t) - eval_node(*n.b, x, y, t);
        case Op::mul: return eval_node(*n.a, x, y, t) * eval_node(*n.b, x, y, t);
        case Op::div: {
            double d = eval_node(*n.b, x, y, t);
            if (d == 0.0) throw EvalError(n.offset, "division by zero");
            return eval_node(*n.a, x, y, t) / d;
        }
        case Op::pow: {
            double b = eval_node(*n.a, x, y, t);
            if (b == 0.0 && n.exponent < 0) throw EvalError(n.offset, "division by zero");
            return std::pow(b, n.exponent);
        }
        case Op::sin: return std::sin(eval_node(*n.a, x, y, t));
        case Op::cos: return std::cos(eval_node(*n.a, x, y, t));
        case Op::exp: return std::exp(eval_node(*n.a, x, y, t));
    }
    return 0.0;
}

NodePtr diff(const NodePtr& p, Var v) {
    const Node& n = *p;
    switch (n.op) {
        case Op::num: return make_num(0.0);
        case Op::var: return make_num(n.var == v ? 1.0 : 0.0);
        case Op::neg: return neg(diff(n.a, v));
        case Op::add: return add(diff(n.a, v), diff(n.b, v));
        case Op::sub: return sub(diff(n.a, v), diff(n.b, v));
        case Op::mul: return add(mul(diff(n.a, v), n.b), mul(n.a, diff(n.b, v)));
        case Op::div: {
            NodePtr da = diff(n.a, v), db = diff(n.b, v);
            NodePtr first = div(da, n.b, n.offset);
            if (is_num(db, 0.0)) return first;
            return sub(first, div(mul(n.a, db), power(n.b, 2), n.offset));
        }
        case Op::pow: {
            NodePtr da = diff(n.a, v);
            if (is_num(da, 0.0)) return make_num(0.0);
            return mul(mul(make_num(n.exponent), power(n.a, n.exponent - 1, n.offset)), da);
        }
        case Op::sin: return mul(func(Op::cos, n.a), diff(n.a, v));
        case Op::cos: return mul(neg(func(Op::sin, n.a)), diff(n.a, v));
        case Op::exp: return mul(p, diff(n.a, v));
    }
    return make_num(0.0);
}

bool depends_on(const Node& n, Var v) {
    if (n.op == Op::var) return n.var == v;
    if (n.a && depends_on(*n.a, v)) return true;
    if (n.b && depends_on(*n.b, v)) return true;
    return false;
}

}  // namespace

// ---------------------------------------------------------------- Expr API

Expr::Expr() : node_(make_num(0.0)) {}
Expr Expr::number(double v) { return Expr(make_num(v)); }
Expr Expr::variable(Var v) {
    auto n = std::make_shared<Node>();
    n->op = Op::var;
    n->var = v;
    return Expr(n);
}
bool Expr::independent_of(Var v) const { return !depends_on(*node_, v); }

Expr operator+(const Expr& a, const Expr& b) { return Expr(add(a.ptr(), b.ptr())); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(sub(a.ptr(), b.ptr())); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(mul(a.ptr(), b.ptr())); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(div(a.ptr(), b.ptr())); }
Expr operator-(const Expr& a) { return Expr(neg(a.ptr())); }
Expr pow(const Expr& base, int exponent) { return Expr(power(base.ptr(), exponent)); }
Expr sin(const Expr& e) { return Expr(func(Op::sin, e.ptr())); }
Expr cos(const Expr& e) { return Expr(func(Op::cos, e.ptr())); }
Expr exp(const Expr& e) { return Expr(func(Op::exp, e.ptr())); }

Expr parse(std::string_view source) { return Expr(Parser(source).run()); }

std::string serialize(const Expr& e) {
    std::string out;
    print(e.node(), out);
    return out;
}

Expr differentiate(const Expr& e, Var v) { return Expr(diff(e.ptr(), v)); }

double evaluate(const Expr& e, double x, double y, double t) {
    return eval_node(e.node(), x, y, t);
}

// ------------------------------------------------------------ PointSampler

namespace {
constexpr unsigned kSpace = 1, kTime = 2;
}

PointSampler::PointSampler(std::vector<Expr> exprs, std::vector<double> xs,
                           std::vector<double> ys)
    : npts_(xs.size()), xs_(std::move(xs)), ys_(std::move(ys)) {
    if (ys_.empty()) ys_.assign(npts_, 0.0);
    if (ys_.size() != npts_) throw std::invalid_argument("PointSampler: x/y length mismatch");

    std::unordered_map<const Node*, int> memo;
    for (const auto& e : exprs) outputs_.push_back(intern(e.node(), memo));

    // Static instructions are evaluated here, once.
    static_scalars_.assign(code_.size(), 0.0);
    static_fields_.resize(code_.size());
    std::vector<int> static_ids;
    for (std::size_t i = 0; i < code_.size(); ++i)
        if (!(code_[i].deps & kTime)) static_ids.push_back(static_cast<int>(i));
    run_time_dependent(0.0, static_scalars_, static_fields_, static_ids);

    std::vector<char> mark(code_.size(), 0);
    for (int out : outputs_) {
        std::fill(mark.begin(), mark.end(), 0);
        collect(out, mark);
        std::vector<int> order;
        for (std::size_t i = 0; i < code_.size(); ++i)
            if (mark[i] && (code_[i].deps & kTime)) order.push_back(static_cast<int>(i));
        schedule_.push_back(std::move(order));
    }
}

void PointSampler::collect(int id, std::vector<char>& mark) const {
    if (mark[id]) return;
    mark[id] = 1;
    if (code_[id].a >= 0) collect(code_[id].a, mark);
    if (code_[id].b >= 0) collect(code_[id].b, mark);
}

int PointSampler::intern(const Node& n, std::unordered_map<const Node*, int>& memo) {
    if (auto it = memo.find(&n); it != memo.end()) return it->second;

    Instr in;
    in.op = n.op;
    in.offset = n.offset;
    if (n.a) in.a = intern(*n.a, memo);
    if (n.b) in.b = intern(*n.b, memo);
    in.value = n.value;
    in.var = n.var;
    in.exponent = n.exponent;
    if (n.op == Op::var) in.deps = n.var == Var::t ? kTime : kSpace;
    if (in.a >= 0) in.deps |= code_[in.a].deps;
    if (in.b >= 0) in.deps |= code_[in.b].deps;

    // Structural match against existing instructions (common subexpressions).
    std::uint64_t bits;
    std::memcpy(&bits, &in.value, sizeof bits);
    auto key = std::make_tuple(static_cast<int>(in.op), in.a, in.b, in.exponent,
                               static_cast<int>(in.var), bits);
    if (auto it = structural_.find(key); it != structural_.end()) {
        memo.emplace(&n, it->second);
        return it->second;
    }
    code_.push_back(in);
    int id = static_cast<int>(code_.size() - 1);
    structural_.emplace(key, id);
    memo.emplace(&n, id);
    return id;
}

void PointSampler::run_time_dependent(double t, std::vector<double>& scalars,
                                      std::vector<std::vector<double>>& fields,
                                      const std::vector<int>& needed) const {
    auto is_field = [&](int id) { return (code_[id].deps & kSpace) != 0; };
    auto scalar_of = [&](int id) -> double {
        return (code_[id].deps & kTime) ? scalars[id] : static_scalars_[id];
    };
    auto field_of = [&](int id) -> const std::vector<double>& {
        return (code_[id].deps & kTime) ? fields[id] : static_fields_[id];
    };

    for (int id : needed) {
        const Instr& in = code_[id];
        if (!is_field(id)) {
            double a = in.a >= 0 ? scalar_of(in.a) : 0.0;
            double b = in.b >= 0 ? scalar_of(in.b) : 0.0;
            double r = 0.0;
            switch (in.op) {
                case Op::num: r = in.value; break;
                case Op::var: r = t; break;
                case Op::neg: r = -a; break;
                case Op::add: r = a + b; break;
                case Op::sub: r = a - b; break;
                case Op::mul: r = a * b; break;
                case Op::div:
                    if (b == 0.0) throw EvalError(in.offset, "division by zero");
                    r = a / b;
                    break;
                case Op::pow:
                    if (a == 0.0 && in.exponent < 0) throw EvalError(in.offset, "division by zero");
                    r = std::pow(a, in.exponent);
                    break;
                case Op::sin: r = std::sin(a); break;
                case Op::cos: r = std::cos(a); break;
                case Op::exp: r = std::exp(a); break;
            }
            scalars[id] = r;
            continue;
        }

        std::vector<double>& out = fields[id];
        out.resize(npts_);
        const std::size_t n = npts_;
        if (in.op == Op::var) {
            const auto& src = in.var == Var::x ? xs_ : ys_;
            std::copy(src.begin(), src.end(), out.begin());
            continue;
        }
        const bool fa = is_field(in.a);
        const double* pa = fa ? field_of(in.a).data() : nullptr;
        const double sa = fa ? 0.0 : scalar_of(in.a);
        if (in.b < 0) {
            for (std::size_t i = 0; i < n; ++i) {
                double a = pa[i];
                switch (in.op) {
                    case Op::neg: out[i] = -a; break;
                    case Op::sin: out[i] = std::sin(a); break;
                    case Op::cos: out[i] = std::cos(a); break;
                    case Op::exp: out[i] = std::exp(a); break;
                    case Op::pow:
                        if (a == 0.0 && in.exponent < 0)
                            throw EvalError(in.offset, "division by zero");
                        out[i] = in.exponent == 2 ? a * a : std::pow(a, in.exponent);
                        break;
                    default: break;
                }
            }
            continue;
        }
        const bool fb = is_field(in.b);
        const double* pb = fb ? field_of(in.b).data() : nullptr;
        const double sb = fb ? 0.0 : scalar_of(in.b);
        for (std::size_t i = 0; i < n; ++i) {
            double a = fa ? pa[i] : sa;
            double b = fb ? pb[i] : sb;
            switch (in.op) {
                case Op::add: out[i] = a + b; break;
                case Op::sub: out[i] = a - b; break;
                case Op::mul: out[i] = a * b; break;
                case Op::div:
                    if (b == 0.0) throw EvalError(in.offset, "division by zero");
                    out[i] = a / b;
                    break;
                default: break;
            }
        }
    }
}

void PointSampler::eval(std::size_t which, double t, std::span<double> out) const {
    if (out.size() != npts_) throw std::invalid_argument("PointSampler::eval: length mismatch");
    thread_local std::vector<double> scalars;
    thread_local std::vector<std::vector<double>> fields;
    if (scalars.size() < code_.size()) scalars.resize(code_.size());
    if (fields.size() < code_.size()) fields.resize(code_.size());

    int id = outputs_[which];
    run_time_dependent(t, scalars, fields, schedule_[which]);
    const Instr& in = code_[id];
    if (in.deps & kSpace) {
        const auto& src = (in.deps & kTime) ? fields[id] : static_fields_[id];
        std::copy(src.begin(), src.end(), out.begin());
    } else {
        double v = (in.deps & kTime) ? scalars[id] : static_scalars_[id];
        std::fill(out.begin(), out.end(), v);
    }
}

void PointSampler::eval_all(double t, std::vector<std::vector<double>>& out) const {
    out.resize(outputs_.size());
    for (std::size_t k = 0; k < outputs_.size(); ++k) {
        out[k].resize(npts_);
        eval(k, t, out[k]);
    }
}

}  // namespace dvw
