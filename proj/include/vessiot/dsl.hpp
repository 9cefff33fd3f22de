#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "action.hpp"

namespace vessiot {

/* Object-description language:
 *
 *   file   := "object" IDENT "{" "dim" INT "order" INT
 *             "components" IDENT+ ("symmetric" | "antisymmetric")?
 *             ("action" assign)+ "}"
 *   assign := IDENT "'" "=" expr
 *   expr   := sums/products/quotients of component names, integers, and jet
 *             symbols J[i,k,...] (component i, one index per derivative
 *             direction), with ^INT powers and parentheses
 *
 * '#' starts a comment running to the end of the line.  Component names on
 * the right-hand side refer to the component at the target point. */

namespace dsl_detail {

enum class Tok { Ident, Int, LBrace, RBrace, LBracket, RBracket, LParen, RParen, Comma, Prime, Equals, Plus, Minus, Star, Slash, Caret, End };

struct Token {
    Tok kind;
    std::string text;
    int line, col;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : s_(src) {}

    Token next() {
        skip();
        int ln = line_, co = col_;
        if (pos_ >= s_.size()) return {Tok::End, "", ln, co};
        char c = s_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string t;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                t += advance();
            return {Tok::Ident, t, ln, co};
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string t;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) t += advance();
            return {Tok::Int, t, ln, co};
        }
        advance();
        switch (c) {
            case '{': return {Tok::LBrace, "{", ln, co};
            case '}': return {Tok::RBrace, "}", ln, co};
            case '[': return {Tok::LBracket, "[", ln, co};
            case ']': return {Tok::RBracket, "]", ln, co};
            case '(': return {Tok::LParen, "(", ln, co};
            case ')': return {Tok::RParen, ")", ln, co};
            case ',': return {Tok::Comma, ",", ln, co};
            case '\'': return {Tok::Prime, "'", ln, co};
            case '=': return {Tok::Equals, "=", ln, co};
            case '+': return {Tok::Plus, "+", ln, co};
            case '-': return {Tok::Minus, "-", ln, co};
            case '*': return {Tok::Star, "*", ln, co};
            case '/': return {Tok::Slash, "/", ln, co};
            case '^': return {Tok::Caret, "^", ln, co};
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", ln, co);
    }

private:
    const std::string& s_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;

    char advance() {
        char c = s_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }
    void skip() {
        for (;;) {
            while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) advance();
            if (pos_ < s_.size() && s_[pos_] == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n') advance();
                continue;
            }
            return;
        }
    }
};

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) { bump(); }

    NaturalBundleAction parse() {
        expect_keyword("object");
        NaturalBundleAction a;
        a.name = expect(Tok::Ident, "object name").text;
        expect(Tok::LBrace, "'{'");
        expect_keyword("dim");
        a.n = expect_int("base dimension");
        if (a.n < 1) err("dim must be at least 1");
        expect_keyword("order");
        a.q = expect_int("action order");
        if (a.q < 0) err("order must be nonnegative");

        expect_keyword("components");
        while (cur_.kind == Tok::Ident && !is_keyword(cur_.text)) {
            for (const std::string& seen : a.comp_names)
                if (seen == cur_.text) err("duplicate component name '" + cur_.text + "'");
            if (cur_.text == "J") err("'J' is reserved for jet symbols");
            a.comp_names.push_back(cur_.text);
            bump();
        }
        if (a.comp_names.empty()) err("at least one component is required");
        a.m = static_cast<int>(a.comp_names.size());

        std::string marker;
        if (cur_.kind == Tok::Ident && (cur_.text == "symmetric" || cur_.text == "antisymmetric")) {
            marker = cur_.text;
            bump();
        }
        if (marker == "symmetric" && a.m == a.n * (a.n + 1) / 2) a.kind = ActionKind::Metric;
        if (marker == "antisymmetric" && a.m == a.n * (a.n - 1) / 2) a.kind = ActionKind::TwoForm;

        ctx_ = std::make_unique<JetContext>(a.n, a.m);
        a.law.assign(a.m, Expr::zero());
        std::vector<bool> assigned(a.m, false);
        while (cur_.kind == Tok::Ident && cur_.text == "action") {
            bump();
            Token name = expect(Tok::Ident, "component name");
            int b = comp_index(a, name);
            expect(Tok::Prime, "' after the component name");
            expect(Tok::Equals, "'='");
            if (assigned[b - 1]) throw SyntaxError("component '" + name.text + "' assigned twice", name.line, name.col);
            assigned[b - 1] = true;
            a.law[b - 1] = parse_expr(a);
        }
        for (int b = 1; b <= a.m; ++b)
            if (!assigned[b - 1]) err("no action for component '" + a.comp_names[b - 1] + "'");
        expect(Tok::RBrace, "'}'");
        if (cur_.kind != Tok::End) err("trailing input after the closing brace");
        return a;
    }

private:
    Lexer lex_;
    Token cur_{};
    std::unique_ptr<JetContext> ctx_;

    static bool is_keyword(const std::string& s) {
        return s == "object" || s == "dim" || s == "order" || s == "components" || s == "symmetric" ||
               s == "antisymmetric" || s == "action";
    }

    void bump() { cur_ = lex_.next(); }
    [[noreturn]] void err(const std::string& msg) const { throw SyntaxError(msg, cur_.line, cur_.col); }

    Token expect(Tok k, const std::string& what) {
        if (cur_.kind != k) err("expected " + what);
        Token t = cur_;
        bump();
        return t;
    }
    void expect_keyword(const std::string& kw) {
        if (cur_.kind != Tok::Ident || cur_.text != kw) err("expected '" + kw + "'");
        bump();
    }
    int expect_int(const std::string& what) {
        Token t = expect(Tok::Int, what);
        return std::stoi(t.text);
    }
    int comp_index(const NaturalBundleAction& a, const Token& name) const {
        for (int b = 1; b <= a.m; ++b)
            if (a.comp_names[b - 1] == name.text) return b;
        throw UnknownSymbol("'" + name.text + "' at line " + std::to_string(name.line) + ", column " +
                            std::to_string(name.col));
    }

    Expr parse_expr(const NaturalBundleAction& a) {
        Expr e = parse_term(a);
        while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
            bool minus = cur_.kind == Tok::Minus;
            bump();
            Expr t = parse_term(a);
            e = minus ? e - t : e + t;
        }
        return e;
    }
    Expr parse_term(const NaturalBundleAction& a) {
        Expr e = parse_factor(a);
        while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
            bool div = cur_.kind == Tok::Slash;
            Token op = cur_;
            bump();
            Expr f = parse_factor(a);
            if (div && f == Expr::zero()) throw SyntaxError("division by zero", op.line, op.col);
            e = div ? e / f : e * f;
        }
        return e;
    }
    Expr parse_factor(const NaturalBundleAction& a) {
        if (cur_.kind == Tok::Minus) {
            bump();
            return -parse_factor(a);
        }
        if (cur_.kind == Tok::Plus) {
            bump();
            return parse_factor(a);
        }
        Expr e = parse_primary(a);
        if (cur_.kind == Tok::Caret) {
            bump();
            Token t = expect(Tok::Int, "integer exponent");
            e = e.pow(std::stoi(t.text));
        }
        return e;
    }
    Expr parse_primary(const NaturalBundleAction& a) {
        if (cur_.kind == Tok::Int) {
            Token t = cur_;
            bump();
            return Expr::from_rat(rat_from_string(t.text));
        }
        if (cur_.kind == Tok::LParen) {
            bump();
            Expr e = parse_expr(a);
            expect(Tok::RParen, "')'");
            return e;
        }
        if (cur_.kind == Tok::Ident) {
            Token t = cur_;
            bump();
            if (t.text == "J") return parse_jet(a, t);
            int b = comp_index(a, t);
            return Expr::atom(ctx_->obj(b, MultiIndex::zero(a.n), Side::Target));
        }
        err("expected a component, number, jet symbol or parenthesis");
    }
    Expr parse_jet(const NaturalBundleAction& a, const Token& j) {
        expect(Tok::LBracket, "'[' after J");
        Token ct = expect(Tok::Int, "jet component index");
        int i = std::stoi(ct.text);
        if (i < 1 || i > a.n) throw SyntaxError("jet component index out of range", ct.line, ct.col);
        MultiIndex mi = MultiIndex::zero(a.n);
        int dirs = 0;
        while (cur_.kind == Tok::Comma) {
            bump();
            Token dt = expect(Tok::Int, "derivative direction");
            int k = std::stoi(dt.text);
            if (k < 1 || k > a.n) throw SyntaxError("derivative direction out of range", dt.line, dt.col);
            mi = mi.bumped(k);
            ++dirs;
        }
        expect(Tok::RBracket, "']'");
        if (dirs == 0) throw SyntaxError("jet symbol needs at least one direction", j.line, j.col);
        if (dirs > a.q) throw SyntaxError("jet derivative order exceeds the declared order", j.line, j.col);
        return Expr::atom(ctx_->jet(i, mi));
    }
};

/* DSL rendering of one expression: target components by name, jets as
 * J[i,dirs], polynomial terms in the canonical monomial order */
inline std::string render_poly(const Poly& p, const NaturalBundleAction& a);

inline std::string render_atom(AtomId id, const NaturalBundleAction& a) {
    const AtomData& d = atom_data(id);
    if (d.kind == AtomKind::ObjDeriv && d.side == Side::Target && d.mi.order() == 0)
        return a.comp_names[d.comp - 1];
    if (d.kind == AtomKind::Jet && d.mi.order() >= 1) {
        std::string s = "J[" + std::to_string(d.comp);
        for (int k : d.mi.directions()) s += "," + std::to_string(k);
        return s + "]";
    }
    throw Error("expression is not expressible in the object language");
}

} // namespace dsl_detail

inline NaturalBundleAction parse_action(const std::string& text) {
    dsl_detail::Parser p(text);
    NaturalBundleAction a = p.parse();
    AxiomReport rep = check_action_axioms(a, 4);
    for (const std::string& f : rep.failures) a.warnings.push_back(f);
    return a;
}

namespace dsl_detail {

inline std::string render_poly(const Poly& p, const NaturalBundleAction& a) {
    if (p.is_constant()) return rat_to_string(p.constant_value());
    std::string out;
    bool first = true;
    for (const Term& t : p.terms()) {
        Rat c = t.coef;
        std::string sign;
        if (first) {
            sign = c < 0 ? "-" : "";
        } else {
            sign = c < 0 ? " - " : " + ";
        }
        first = false;
        c = rat_abs(c);
        std::vector<std::string> factors;
        if (c != 1 || t.mono.factors().empty()) factors.push_back(rat_to_string(c));
        for (const auto& [atom, e] : t.mono.factors()) {
            std::string f = render_atom(atom, a);
            if (e > 1) f += "^" + std::to_string(e);
            factors.push_back(f);
        }
        std::string body = factors[0];
        for (size_t i = 1; i < factors.size(); ++i) body += "*" + factors[i];
        out += sign + body;
    }
    return out;
}

inline std::string render_expr(const Expr& e, const NaturalBundleAction& a) {
    if (e.den() == Poly::one()) return render_poly(e.num(), a);
    return "(" + render_poly(e.num(), a) + ")/(" + render_poly(e.den(), a) + ")";
}

} // namespace dsl_detail

/* Deterministic pretty-printer; parse_action(print_action(a)) reproduces the
 * action with identical canonical laws. */
inline std::string print_action(const NaturalBundleAction& a) {
    std::string out = "object " + (a.name.empty() ? std::string("unnamed") : a.name) + " {\n";
    out += "  dim " + std::to_string(a.n) + "\n";
    out += "  order " + std::to_string(a.q) + "\n";
    out += "  components";
    for (const std::string& c : a.comp_names) out += " " + c;
    if (a.kind == ActionKind::Metric) out += " symmetric";
    if (a.kind == ActionKind::TwoForm) out += " antisymmetric";
    out += "\n";
    for (int b = 1; b <= a.m; ++b)
        out += "  action " + a.comp_names[b - 1] + "' = " + dsl_detail::render_expr(a.law[b - 1], a) + "\n";
    return out + "}\n";
}

} // namespace vessiot
