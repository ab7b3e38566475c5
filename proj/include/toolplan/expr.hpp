#pragma once

#include <cctype>
#include <memory>
#include <string>
#include <vector>

#include "toolplan/error.hpp"
#include "toolplan/table.hpp"
#include "toolplan/util.hpp"

namespace toolplan::expr {

/// Grammar (documented in docs/expression-language.md):
///   or    := and { "or" and }
///   and   := not { "and" not }
///   not   := "not" not | cmp
///   cmp   := add [ (">" ">=" "<" "<=" "==" "!=") add ]
///   add   := mul { ("+" "-") mul }
///   mul   := unary { ("*" "/") unary }
///   unary := "-" unary | postfix
///   postfix := primary { ".notna()" | ".isna()" }
///   primary := NUMBER | STRING | true/false | IDENT | "(" or ")"

enum class Op {
    Column,
    NumLit,
    StrLit,
    BoolLit,
    Not,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
    Ne,
    And,
    Or,
    NotNa,
    IsNa,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Op op;
    double num = 0;
    std::string str;
    bool boolean = false;
    NodePtr lhs, rhs;
};

class ParseError : public ToolError {
public:
    ParseError(size_t pos, const std::string& expected)
        : ToolError("SyntaxError",
                    "invalid expression at offset " + std::to_string(pos) + ": expected " +
                        expected),
          pos(pos) {}
    size_t pos;
};

namespace detail {

struct Token {
    enum class Kind { Number, String, Ident, Symbol, End } kind;
    std::string text;
    double num = 0;
    size_t pos = 0;
};

inline std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    size_t i = 0;
    const size_t n = src.size();
    while (i < n) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            size_t j = i;
            while (j < n && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.' ||
                             src[j] == 'e' || src[j] == 'E' ||
                             ((src[j] == '+' || src[j] == '-') && j > i &&
                              (src[j - 1] == 'e' || src[j - 1] == 'E'))))
                ++j;
            auto v = parse_double(src.substr(i, j - i));
            if (!v) throw ParseError(start, "a number");
            out.push_back({Token::Kind::Number, src.substr(i, j - i), *v, start});
            i = j;
            continue;
        }
        if (c == '\'' || c == '"') {
            char q = c;
            std::string s;
            size_t j = i + 1;
            while (j < n && src[j] != q) s += src[j++];
            if (j >= n) throw ParseError(start, "a closing quote");
            out.push_back({Token::Kind::String, s, 0, start});
            i = j + 1;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                ++j;
            out.push_back({Token::Kind::Ident, src.substr(i, j - i), 0, start});
            i = j;
            continue;
        }
        static const char* two[] = {">=", "<=", "==", "!="};
        bool matched = false;
        for (const char* t : two) {
            if (src.compare(i, 2, t) == 0) {
                out.push_back({Token::Kind::Symbol, t, 0, start});
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string("+-*/<>().").find(c) != std::string::npos) {
            out.push_back({Token::Kind::Symbol, std::string(1, c), 0, start});
            ++i;
            continue;
        }
        throw ParseError(start, "a valid token");
    }
    out.push_back({Token::Kind::End, "", 0, n});
    return out;
}

inline NodePtr leaf(Op op) {
    auto n = std::make_shared<Node>();
    n->op = op;
    return n;
}

inline NodePtr binary(Op op, NodePtr l, NodePtr r) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

inline NodePtr unary(Op op, NodePtr operand) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(operand);
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& src) : toks_(lex(src)) {}

    NodePtr parse_full() {
        NodePtr e = parse_or();
        if (!at_end()) throw ParseError(peek().pos, "end of expression");
        return e;
    }

private:
    std::vector<Token> toks_;
    size_t idx_ = 0;

    const Token& peek() const { return toks_[idx_]; }
    bool at_end() const { return peek().kind == Token::Kind::End; }
    const Token& advance() { return toks_[idx_++]; }

    bool match_ident(const std::string& kw) {
        if (peek().kind == Token::Kind::Ident && peek().text == kw) {
            ++idx_;
            return true;
        }
        return false;
    }

    bool match_symbol(const std::string& s) {
        if (peek().kind == Token::Kind::Symbol && peek().text == s) {
            ++idx_;
            return true;
        }
        return false;
    }

    NodePtr parse_or() {
        NodePtr e = parse_and();
        while (match_ident("or")) e = binary(Op::Or, e, parse_and());
        return e;
    }

    NodePtr parse_and() {
        NodePtr e = parse_not();
        while (match_ident("and")) e = binary(Op::And, e, parse_not());
        return e;
    }

    NodePtr parse_not() {
        if (match_ident("not")) return unary(Op::Not, parse_not());
        return parse_cmp();
    }

    NodePtr parse_cmp() {
        NodePtr e = parse_add();
        static const std::pair<const char*, Op> ops[] = {
            {">=", Op::Ge}, {"<=", Op::Le}, {"==", Op::Eq},
            {"!=", Op::Ne}, {">", Op::Gt}, {"<", Op::Lt},
        };
        for (const auto& [sym, op] : ops) {
            if (match_symbol(sym)) return binary(op, e, parse_add());
        }
        return e;
    }

    NodePtr parse_add() {
        NodePtr e = parse_mul();
        for (;;) {
            if (match_symbol("+")) e = binary(Op::Add, e, parse_mul());
            else if (match_symbol("-")) e = binary(Op::Sub, e, parse_mul());
            else return e;
        }
    }

    NodePtr parse_mul() {
        NodePtr e = parse_unary();
        for (;;) {
            if (match_symbol("*")) e = binary(Op::Mul, e, parse_unary());
            else if (match_symbol("/")) e = binary(Op::Div, e, parse_unary());
            else return e;
        }
    }

    NodePtr parse_unary() {
        if (match_symbol("-")) return unary(Op::Neg, parse_unary());
        return parse_postfix();
    }

    NodePtr parse_postfix() {
        NodePtr e = parse_primary();
        while (peek().kind == Token::Kind::Symbol && peek().text == ".") {
            size_t pos = peek().pos;
            ++idx_;
            if (peek().kind != Token::Kind::Ident) throw ParseError(pos, "notna or isna");
            std::string method = advance().text;
            if (method != "notna" && method != "isna") throw ParseError(pos, "notna or isna");
            if (!match_symbol("(")) throw ParseError(peek().pos, "'('");
            if (!match_symbol(")")) throw ParseError(peek().pos, "')'");
            e = unary(method == "notna" ? Op::NotNa : Op::IsNa, e);
        }
        return e;
    }

    NodePtr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Token::Kind::Number: {
                auto n = leaf(Op::NumLit);
                const_cast<Node*>(n.get())->num = t.num;
                ++idx_;
                return n;
            }
            case Token::Kind::String: {
                auto n = leaf(Op::StrLit);
                const_cast<Node*>(n.get())->str = t.text;
                ++idx_;
                return n;
            }
            case Token::Kind::Ident: {
                if (t.text == "true" || t.text == "True" || t.text == "false" ||
                    t.text == "False") {
                    auto n = leaf(Op::BoolLit);
                    const_cast<Node*>(n.get())->boolean = t.text == "true" || t.text == "True";
                    ++idx_;
                    return n;
                }
                if (t.text == "and" || t.text == "or" || t.text == "not")
                    throw ParseError(t.pos, "a value");
                auto n = leaf(Op::Column);
                const_cast<Node*>(n.get())->str = t.text;
                ++idx_;
                return n;
            }
            case Token::Kind::Symbol:
                if (t.text == "(") {
                    ++idx_;
                    NodePtr e = parse_or();
                    if (!match_symbol(")")) throw ParseError(peek().pos, "')'");
                    return e;
                }
                throw ParseError(t.pos, "a value");
            case Token::Kind::End: throw ParseError(t.pos, "a value");
        }
        throw ParseError(t.pos, "a value");
    }
};

}  // namespace detail

inline NodePtr parse(const std::string& src) { return detail::Parser(src).parse_full(); }

inline std::string to_string(const NodePtr& e) {
    switch (e->op) {
        case Op::Column: return e->str;
        case Op::NumLit: return format_double(e->num);
        case Op::StrLit: return py_repr(e->str);
        case Op::BoolLit: return e->boolean ? "true" : "false";
        case Op::Not: return "(not " + to_string(e->lhs) + ")";
        case Op::Neg: return "(-" + to_string(e->lhs) + ")";
        case Op::NotNa: return to_string(e->lhs) + ".notna()";
        case Op::IsNa: return to_string(e->lhs) + ".isna()";
        default: break;
    }
    static const char* sym[] = {"", "", "", "", "", "",  "+",  "-",   "*",  "/",
                                ">", ">=", "<", "<=", "==", "!=", "and", "or", "", ""};
    return "(" + to_string(e->lhs) + " " + sym[static_cast<int>(e->op)] + " " +
           to_string(e->rhs) + ")";
}

inline bool equal(const NodePtr& a, const NodePtr& b) {
    if (a->op != b->op) return false;
    switch (a->op) {
        case Op::Column: return a->str == b->str;
        case Op::NumLit: return a->num == b->num;
        case Op::StrLit: return a->str == b->str;
        case Op::BoolLit: return a->boolean == b->boolean;
        case Op::Not:
        case Op::Neg:
        case Op::NotNa:
        case Op::IsNa: return equal(a->lhs, b->lhs);
        default: return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    }
}

namespace detail {

enum class VType { Num, Str, Bool };

/// One evaluated cell: a typed value plus a missing flag.
struct Value {
    VType type = VType::Num;
    bool missing = false;
    double num = 0;
    std::string str;
    bool boolean = false;
};

inline const char* vtype_name(VType t) {
    switch (t) {
        case VType::Num: return "numeric";
        case VType::Str: return "string";
        case VType::Bool: return "boolean";
    }
    return "?";
}

/// Row-wise typed evaluation. Missing semantics: comparisons with a missing
/// operand are false, arithmetic with a missing operand stays missing, a
/// missing boolean used by and/or/not counts as false.
inline Value eval_row(const Node& e, const Table& t, size_t row) {
    auto as_bool = [](const Value& v) { return !v.missing && v.boolean; };
    switch (e.op) {
        case Op::NumLit: return {VType::Num, false, e.num, "", false};
        case Op::StrLit: return {VType::Str, false, 0, e.str, false};
        case Op::BoolLit: return {VType::Bool, false, 0, "", e.boolean};
        case Op::Column: {
            if (!t.has_column(e.str))
                throw key_error("column '" + e.str + "' not found. Available columns: " +
                                py_list(t.column_names()));
            const Column& c = t.column(e.str);
            Value v;
            v.missing = c.missing[row] != 0;
            switch (c.dtype) {
                case Dtype::Int:
                case Dtype::Float:
                    v.type = VType::Num;
                    v.num = v.missing ? 0 : c.num[row];
                    break;
                case Dtype::Bool:
                    v.type = VType::Bool;
                    v.boolean = !v.missing && c.num[row] != 0;
                    break;
                default:
                    v.type = VType::Str;
                    v.str = v.missing ? "" : c.str[row];
            }
            return v;
        }
        case Op::NotNa: {
            Value in = eval_row(*e.lhs, t, row);
            return {VType::Bool, false, 0, "", !in.missing};
        }
        case Op::IsNa: {
            Value in = eval_row(*e.lhs, t, row);
            return {VType::Bool, false, 0, "", in.missing};
        }
        case Op::Not: {
            Value in = eval_row(*e.lhs, t, row);
            if (in.type != VType::Bool)
                throw type_error("'not' expects a boolean operand, got " + std::string(vtype_name(in.type)));
            return {VType::Bool, false, 0, "", !as_bool(in)};
        }
        case Op::Neg: {
            Value in = eval_row(*e.lhs, t, row);
            if (in.type != VType::Num)
                throw type_error("unary '-' expects a numeric operand, got " +
                                 std::string(vtype_name(in.type)));
            return {VType::Num, in.missing, -in.num, "", false};
        }
        case Op::And:
        case Op::Or: {
            Value l = eval_row(*e.lhs, t, row);
            Value r = eval_row(*e.rhs, t, row);
            if (l.type != VType::Bool || r.type != VType::Bool)
                throw type_error(std::string(e.op == Op::And ? "'and'" : "'or'") +
                                 " expects boolean operands, got " + vtype_name(l.type) +
                                 " and " + vtype_name(r.type));
            bool out = e.op == Op::And ? (as_bool(l) && as_bool(r)) : (as_bool(l) || as_bool(r));
            return {VType::Bool, false, 0, "", out};
        }
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div: {
            Value l = eval_row(*e.lhs, t, row);
            Value r = eval_row(*e.rhs, t, row);
            if (l.type != VType::Num || r.type != VType::Num)
                throw type_error("arithmetic expects numeric operands, got " +
                                 std::string(vtype_name(l.type)) + " and " + vtype_name(r.type));
            Value out{VType::Num, l.missing || r.missing, 0, "", false};
            if (!out.missing) {
                switch (e.op) {
                    case Op::Add: out.num = l.num + r.num; break;
                    case Op::Sub: out.num = l.num - r.num; break;
                    case Op::Mul: out.num = l.num * r.num; break;
                    default: out.num = l.num / r.num;
                }
            }
            return out;
        }
        default: {  // comparisons
            Value l = eval_row(*e.lhs, t, row);
            Value r = eval_row(*e.rhs, t, row);
            if (l.type != r.type)
                throw type_error("comparison operands must share a type, got " +
                                 std::string(vtype_name(l.type)) + " and " + vtype_name(r.type));
            Value out{VType::Bool, false, 0, "", false};
            if (l.missing || r.missing) return out;  // missing compares false
            int c = 0;
            if (l.type == VType::Num) c = l.num < r.num ? -1 : (l.num > r.num ? 1 : 0);
            else if (l.type == VType::Str) c = l.str < r.str ? -1 : (l.str > r.str ? 1 : 0);
            else c = static_cast<int>(l.boolean) - static_cast<int>(r.boolean);
            switch (e.op) {
                case Op::Gt: out.boolean = c > 0; break;
                case Op::Ge: out.boolean = c >= 0; break;
                case Op::Lt: out.boolean = c < 0; break;
                case Op::Le: out.boolean = c <= 0; break;
                case Op::Eq: out.boolean = c == 0; break;
                case Op::Ne: out.boolean = c != 0; break;
                default: break;
            }
            return out;
        }
    }
}

}  // namespace detail

/// Boolean mask over rows; non-boolean expressions are rejected.
inline std::vector<uint8_t> eval_mask(const NodePtr& e, const Table& t) {
    std::vector<uint8_t> out(t.n_rows(), 0);
    for (size_t i = 0; i < t.n_rows(); ++i) {
        detail::Value v = detail::eval_row(*e, t, i);
        if (v.type != detail::VType::Bool)
            throw type_error("condition must be boolean, got " +
                             std::string(detail::vtype_name(v.type)));
        out[i] = !v.missing && v.boolean ? 1 : 0;
    }
    return out;
}

struct NumericResult {
    std::vector<double> values;
    std::vector<uint8_t> missing;
};

inline NumericResult eval_numeric(const NodePtr& e, const Table& t) {
    NumericResult out;
    out.values.assign(t.n_rows(), 0.0);
    out.missing.assign(t.n_rows(), 0);
    for (size_t i = 0; i < t.n_rows(); ++i) {
        detail::Value v = detail::eval_row(*e, t, i);
        if (v.type == detail::VType::Bool) {
            out.values[i] = v.boolean ? 1.0 : 0.0;
            out.missing[i] = v.missing;
        } else if (v.type == detail::VType::Num) {
            out.values[i] = v.num;
            out.missing[i] = v.missing;
        } else {
            throw type_error("numeric expression required, got string");
        }
    }
    return out;
}

}  // namespace toolplan::expr
