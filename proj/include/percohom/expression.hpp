#pragma once

// Closed-form source terms: a small arithmetic grammar over the coordinates.
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := ('+' | '-') unary | primary
//   primary:= number | 'x' | 'y' | 'z' | 'pi'
//           | ('sin' | 'cos' | 'exp') '(' expr ')' | '(' expr ')'

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "point_process.hpp"

namespace percohom {

class Expression {
  public:
    /// Parses `text`; throws InvalidArgument with the offending position.
    static Expression parse(const std::string& text) {
        Parser p{text, 0, {}};
        Expression e;
        e.text_ = text;
        p.parse_expr();
        p.skip_ws();
        if (p.pos != text.size()) p.fail("unexpected trailing input");
        e.code_ = std::move(p.code);
        return e;
    }

    double operator()(const Vec3& x) const {
        std::vector<double> st;
        st.reserve(16);
        for (const auto& ins : code_) {
            switch (ins.op) {
            case Op::constant: st.push_back(ins.value); break;
            case Op::coord: st.push_back(x[static_cast<std::size_t>(ins.value)]); break;
            case Op::neg: st.back() = -st.back(); break;
            case Op::sin: st.back() = std::sin(st.back()); break;
            case Op::cos: st.back() = std::cos(st.back()); break;
            case Op::exp: st.back() = std::exp(st.back()); break;
            default: {
                const double b = st.back();
                st.pop_back();
                double& a = st.back();
                if (ins.op == Op::add) a += b;
                else if (ins.op == Op::sub) a -= b;
                else if (ins.op == Op::mul) a *= b;
                else a /= b;
            }
            }
        }
        return st.back();
    }

    const std::string& text() const noexcept { return text_; }

  private:
    enum class Op { constant, coord, neg, add, sub, mul, div, sin, cos, exp };
    struct Instr {
        Op op;
        double value = 0.0;
    };

    struct Parser {
        const std::string& s;
        std::size_t pos;
        std::vector<Instr> code;

        [[noreturn]] void fail(const std::string& msg) const {
            throw InvalidArgument("expression: " + msg + " at position " + std::to_string(pos) + " in '" + s + "'");
        }
        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool accept(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        void parse_expr() {
            parse_term();
            for (;;) {
                if (accept('+')) {
                    parse_term();
                    code.push_back({Op::add});
                } else if (accept('-')) {
                    parse_term();
                    code.push_back({Op::sub});
                } else {
                    return;
                }
            }
        }
        void parse_term() {
            parse_unary();
            for (;;) {
                if (accept('*')) {
                    parse_unary();
                    code.push_back({Op::mul});
                } else if (accept('/')) {
                    parse_unary();
                    code.push_back({Op::div});
                } else {
                    return;
                }
            }
        }
        void parse_unary() {
            if (accept('-')) {
                parse_unary();
                code.push_back({Op::neg});
            } else if (accept('+')) {
                parse_unary();
            } else {
                parse_primary();
            }
        }
        void parse_primary() {
            skip_ws();
            if (pos >= s.size()) fail("unexpected end of input");
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const char* begin = s.c_str() + pos;
                char* end = nullptr;
                const double v = std::strtod(begin, &end);
                if (end == begin) fail("bad number");
                pos += static_cast<std::size_t>(end - begin);
                code.push_back({Op::constant, v});
                return;
            }
            if (accept('(')) {
                parse_expr();
                if (!accept(')')) fail("expected ')'");
                return;
            }
            std::size_t end = pos;
            while (end < s.size() && std::isalpha(static_cast<unsigned char>(s[end]))) ++end;
            const std::string id = s.substr(pos, end - pos);
            if (id.empty()) fail(std::string("unexpected character '") + c + "'");
            pos = end;
            if (id == "x" || id == "y" || id == "z") {
                code.push_back({Op::coord, static_cast<double>(id[0] - 'x')});
            } else if (id == "pi") {
                code.push_back({Op::constant, std::numbers::pi});
            } else if (id == "sin" || id == "cos" || id == "exp") {
                if (!accept('(')) fail("expected '(' after " + id);
                parse_expr();
                if (!accept(')')) fail("expected ')'");
                code.push_back({id == "sin" ? Op::sin : id == "cos" ? Op::cos : Op::exp});
            } else {
                pos -= id.size();
                fail("unknown identifier '" + id + "'");
            }
        }
    };

    std::string text_;
    std::vector<Instr> code_;
};

} // namespace percohom
