#pragma once

#include <string>
#include <utility>
#include <vector>

#include "jets.hpp"

namespace vessiot {

enum class ActionKind { Metric, Volume, TwoForm, Covector, Custom };

/* Transformation law of a geometric object's components under q-jets.
 * Each law entry gives the pulled-back component at the source in terms of
 * the components at the target (order-0 target object atoms) and jet atoms
 * of order at most q.  Components with index symmetry are stored once. */
struct NaturalBundleAction {
    int n = 0;  // base dimension
    int q = 1;  // action order
    int m = 0;  // fibre components
    ActionKind kind = ActionKind::Custom;
    std::string name;
    std::vector<std::string> comp_names;  // size m
    std::vector<Expr> law;                // size m
    std::vector<std::string> warnings;    // attached by the parser's axiom check

    JetContext context() const { return JetContext(n, m); }
};

/* A section of the object bundle: either concrete rational components in the
 * base coordinates, or fully symbolic components kept as formal atoms. */
struct GeometricObject {
    int n = 0;
    int m = 0;
    bool is_symbolic = true;
    std::vector<Expr> components;  // empty when symbolic

    static GeometricObject symbolic(int n, int m) {
        GeometricObject g;
        g.n = n;
        g.m = m;
        return g;
    }
    static GeometricObject concrete(int n, std::vector<Expr> comps) {
        GeometricObject g;
        g.n = n;
        g.m = static_cast<int>(comps.size());
        g.is_symbolic = false;
        g.components = std::move(comps);
        return g;
    }
};

/* ordered independent index pairs for symmetric (i <= j) or antisymmetric
 * (i < j) two-index components */
inline std::vector<std::pair<int, int>> index_pairs(int n, bool strict) {
    std::vector<std::pair<int, int>> out;
    for (int i = 1; i <= n; ++i)
        for (int j = strict ? i + 1 : i; j <= n; ++j) out.emplace_back(i, j);
    return out;
}

inline int pair_component(int i, int j, int n, bool strict) {
    if (i > j) std::swap(i, j);
    auto pairs = index_pairs(n, strict);
    for (size_t a = 0; a < pairs.size(); ++a)
        if (pairs[a].first == i && pairs[a].second == j) return static_cast<int>(a) + 1;
    throw DimensionMismatch("no component for index pair");
}

namespace detail {

inline Expr jet1(const JetContext& c, int i, int k) { return Expr::atom(c.jet(i, MultiIndex::unit(c.dim(), k))); }
inline Expr ucomp(const JetContext& c, int b) { return Expr::atom(c.obj(b, MultiIndex::zero(c.dim()), Side::Target)); }

inline Expr jacobian_det(const JetContext& c) {
    int n = c.dim();
    std::vector<std::vector<Expr>> j(n, std::vector<Expr>(n));
    for (int i = 1; i <= n; ++i)
        for (int k = 1; k <= n; ++k) j[i - 1][k - 1] = jet1(c, i, k);
    return det_expr(j);
}

} // namespace detail

inline NaturalBundleAction builtin_action(const std::string& name, int n) {
    if (n < 1) throw DimensionMismatch("builtin action needs n >= 1");
    NaturalBundleAction a;
    a.n = n;
    a.q = 1;
    a.name = name;

    if (name == "metric") {
        a.kind = ActionKind::Metric;
        auto pairs = index_pairs(n, false);
        a.m = static_cast<int>(pairs.size());
        JetContext c(n, a.m);
        for (auto [k, l] : pairs) {
            Expr e = Expr::zero();
            for (int i = 1; i <= n; ++i)
                for (int j = 1; j <= n; ++j)
                    e = e + detail::ucomp(c, pair_component(i, j, n, false)) * detail::jet1(c, i, k) *
                                detail::jet1(c, j, l);
            a.law.push_back(e);
            a.comp_names.push_back("u" + std::to_string(k) + std::to_string(l));
        }
        return a;
    }
    if (name == "volume") {
        a.kind = ActionKind::Volume;
        a.m = 1;
        JetContext c(n, 1);
        a.law.push_back(detail::ucomp(c, 1) * detail::jacobian_det(c));
        a.comp_names.push_back("u");
        return a;
    }
    if (name == "twoform") {
        a.kind = ActionKind::TwoForm;
        auto pairs = index_pairs(n, true);
        a.m = static_cast<int>(pairs.size());
        if (a.m == 0) throw DimensionMismatch("twoform needs n >= 2");
        JetContext c(n, a.m);
        for (auto [k, l] : pairs) {
            Expr e = Expr::zero();
            for (int i = 1; i <= n; ++i)
                for (int j = i + 1; j <= n; ++j)
                    e = e + detail::ucomp(c, pair_component(i, j, n, true)) *
                                (detail::jet1(c, i, k) * detail::jet1(c, j, l) -
                                 detail::jet1(c, j, k) * detail::jet1(c, i, l));
            a.law.push_back(e);
            a.comp_names.push_back("u" + std::to_string(k) + std::to_string(l));
        }
        return a;
    }
    if (name == "covector") {
        a.kind = ActionKind::Covector;
        a.m = n;
        JetContext c(n, n);
        for (int k = 1; k <= n; ++k) {
            Expr e = Expr::zero();
            for (int i = 1; i <= n; ++i) e = e + detail::ucomp(c, i) * detail::jet1(c, i, k);
            a.law.push_back(e);
            a.comp_names.push_back("u" + std::to_string(k));
        }
        return a;
    }
    throw UnknownName("no builtin action named '" + name + "'");
}

/* evaluate the action of a concrete jet on concrete fibre values */
inline std::vector<Rat> apply_action(const NaturalBundleAction& a, const std::vector<Rat>& u, const JetPoint& f) {
    if (static_cast<int>(u.size()) != a.m) throw DimensionMismatch("fibre value width mismatch");
    if (f.n != a.n || f.q < a.q) throw DimensionMismatch("jet shape does not fit the action");
    JetContext c = a.context();
    std::map<AtomId, Rat> vals;
    for (int b = 1; b <= a.m; ++b) vals[c.obj(b, MultiIndex::zero(a.n), Side::Target)] = u[b - 1];
    for (int i = 1; i <= a.n; ++i)
        for (const MultiIndex& al : multi_indices_upto(a.n, a.q))
            if (al.order() >= 1) vals[c.jet(i, al)] = f.value(i, al);
    std::vector<Rat> out;
    for (const Expr& e : a.law) out.push_back(e.eval(vals));
    return out;
}

struct AxiomReport {
    bool identity_ok = false;
    bool composition_ok = false;
    std::vector<std::string> failures;
    bool ok() const { return identity_ok && composition_ok; }
};

/* Identity axiom symbolically (substitute the identity jet, compare to the
 * bare component); composition axiom at random rational jets with exact
 * arithmetic, so failures are certain and passes are sampled. */
inline AxiomReport check_action_axioms(const NaturalBundleAction& a, int trials, uint64_t seed = 9001) {
    AxiomReport rep;
    JetContext c = a.context();

    std::map<AtomId, Expr> idsub;
    for (int i = 1; i <= a.n; ++i)
        for (const MultiIndex& al : multi_indices_upto(a.n, a.q)) {
            if (al.order() == 0) continue;
            Expr v = Expr::zero();
            if (al.order() == 1 && al[i] == 1) v = Expr::one();
            idsub[c.jet(i, al)] = v;
        }
    rep.identity_ok = true;
    for (int b = 1; b <= a.m; ++b) {
        Expr got = a.law[b - 1].substitute(idsub);
        Expr want = Expr::atom(c.obj(b, MultiIndex::zero(a.n), Side::Target));
        if (got != want) {
            rep.identity_ok = false;
            rep.failures.push_back("identity axiom fails for component " + a.comp_names[b - 1]);
        }
    }

    Rng rng(seed);
    rep.composition_ok = true;
    for (int t = 0; t < trials; ++t) {
        QVec x0, y0, z0;
        for (int i = 0; i < a.n; ++i) {
            x0.push_back(rng.rat(3, 2));
            y0.push_back(rng.rat(3, 2));
            z0.push_back(rng.rat(3, 2));
        }
        JetPoint f = random_jet(rng, a.n, a.q, x0, y0);
        JetPoint g = random_jet(rng, a.n, a.q, y0, z0);
        std::vector<Rat> u;
        for (int b = 0; b < a.m; ++b) u.push_back(rng.rat(3, 2));
        std::vector<Rat> lhs = apply_action(a, u, compose_jets(g, f));
        std::vector<Rat> rhs = apply_action(a, apply_action(a, u, g), f);
        if (lhs != rhs) {
            rep.composition_ok = false;
            rep.failures.push_back("composition axiom fails at trial " + std::to_string(t));
        }
    }
    return rep;
}

/* Defining equations of the stabilizer groupoid: the law with target-side
 * components, minus the source-side component.  Symbolic objects keep formal
 * object atoms; concrete objects get their expressions substituted, composed
 * with the target position on the target side. */
inline EquationSystem lie_form(const NaturalBundleAction& a, const GeometricObject& w) {
    if (a.n != w.n || a.m != w.m) throw DimensionMismatch("action and object shapes differ");
    JetContext c = a.context();
    std::vector<Expr> eqs;
    if (w.is_symbolic) {
        for (int b = 1; b <= a.m; ++b)
            eqs.push_back(a.law[b - 1] - Expr::atom(c.obj(b, MultiIndex::zero(a.n), Side::Source)));
    } else {
        std::map<AtomId, Expr> to_target;
        for (int i = 1; i <= a.n; ++i)
            to_target[c.x(i)] = Expr::atom(c.jet(i, MultiIndex::zero(a.n)));
        std::map<AtomId, Expr> usub;
        for (int b = 1; b <= a.m; ++b)
            usub[c.obj(b, MultiIndex::zero(a.n), Side::Target)] = w.components[b - 1].substitute(to_target);
        for (int b = 1; b <= a.m; ++b)
            eqs.push_back(a.law[b - 1].substitute(usub) - w.components[b - 1]);
    }
    return {c, eqs};
}

/* true iff every defining equation vanishes exactly at the given jet */
inline bool stab_membership(const NaturalBundleAction& a, const GeometricObject& w, const JetPoint& f) {
    if (w.is_symbolic) throw Error("stabilizer membership needs a concrete object");
    if (f.q < a.q) throw DimensionMismatch("jet order below the action order");
    EquationSystem s = lie_form(a, w);
    std::map<AtomId, Rat> vals;
    for (int i = 1; i <= a.n; ++i) {
        vals[s.ctx.x(i)] = f.source[i - 1];
        for (const MultiIndex& al : multi_indices_upto(a.n, a.q)) vals[s.ctx.jet(i, al)] = f.value(i, al);
    }
    for (const Expr& e : s.eqs)
        if (e.eval(vals) != 0) return false;
    return true;
}

/* nondegeneracy of a concrete object at a rational point; undefined
 * components make the point inadmissible rather than raising */
inline bool admissible_at(const NaturalBundleAction& a, const GeometricObject& w, const QVec& at) {
    if (w.is_symbolic || static_cast<int>(at.size()) != w.n) return false;
    std::map<AtomId, Rat> vals;
    for (int i = 1; i <= w.n; ++i) vals[base_coord_atom(i)] = at[i - 1];
    std::vector<Rat> v;
    try {
        for (const Expr& e : w.components) v.push_back(e.eval(vals));
    } catch (const DivisionByZero&) {
        return false;
    }
    auto assemble = [&](bool strict, Rat sign) {
        QMat mred(w.n, QVec(w.n, Rat(0)));
        auto pairs = index_pairs(w.n, strict);
        for (size_t p = 0; p < pairs.size(); ++p) {
            auto [i, j] = pairs[p];
            mred[i - 1][j - 1] = v[p];
            mred[j - 1][i - 1] = sign * v[p];
        }
        return mred;
    };
    switch (a.kind) {
        case ActionKind::Metric: return det(assemble(false, Rat(1))) != 0;
        case ActionKind::TwoForm: return det(assemble(true, Rat(-1))) != 0;
        case ActionKind::Volume: return v[0] != 0;
        case ActionKind::Covector: {
            for (const Rat& x : v)
                if (x != 0) return true;
            return false;
        }
        case ActionKind::Custom: return true;
    }
    return true;
}

} // namespace vessiot
