#pragma once

#include <array>

#include "vessiot/expr.hpp"
#include "vessiot/jets.hpp"

/* Gauss curvature of a two-dimensional metric from the coefficients E, F, G
 * alone (Brioschi's determinant formula).  Test-side oracle: independent of
 * the library pipeline, it only uses expression arithmetic and partials. */
namespace vessiot::testsupport {

inline Expr det3(const std::array<std::array<Expr, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

inline Expr brioschi_combination(const Expr& E, const Expr& F, const Expr& G, const Expr& Eu, const Expr& Ev,
                                 const Expr& Fu, const Expr& Fv, const Expr& Gu, const Expr& Gv, const Expr& Evv,
                                 const Expr& Fuv, const Expr& Guu) {
    Expr half = Expr::from_rat(Rat(1, 2));
    std::array<std::array<Expr, 3>, 3> m1{{
        {-half * Evv + Fuv - half * Guu, half * Eu, Fu - half * Ev},
        {Fv - half * Gu, E, F},
        {half * Gv, F, G},
    }};
    std::array<std::array<Expr, 3>, 3> m2{{
        {Expr::zero(), half * Ev, half * Gu},
        {half * Ev, E, F},
        {half * Gu, F, G},
    }};
    Expr den = E * G - F * F;
    return (det3(m1) - det3(m2)) / (den * den);
}

/* E, F, G are expressions in the base coordinates x1, x2 */
inline Expr gauss_curvature_2d(const Expr& E, const Expr& F, const Expr& G) {
    AtomId u = base_coord_atom(1), v = base_coord_atom(2);
    return brioschi_combination(E, F, G, E.partial(u), E.partial(v), F.partial(u), F.partial(v), G.partial(u),
                                G.partial(v), E.partial(v).partial(v), F.partial(u).partial(v),
                                G.partial(u).partial(u));
}

/* Same combination with every derivative a formal object jet on the given
 * side: curvature as a rational function of the object atoms alone.
 * Components are ordered E = w1, F = w2, G = w3. */
inline Expr gauss_curvature_atoms(const JetContext& c, Side s) {
    auto w = [&](int comp, int du, int dv) {
        MultiIndex b = MultiIndex::zero(2);
        for (int i = 0; i < du; ++i) b = b.bumped(1);
        for (int i = 0; i < dv; ++i) b = b.bumped(2);
        return Expr::atom(c.obj(comp, b, s));
    };
    return brioschi_combination(w(1, 0, 0), w(2, 0, 0), w(3, 0, 0), w(1, 1, 0), w(1, 0, 1), w(2, 1, 0), w(2, 0, 1),
                                w(3, 1, 0), w(3, 0, 1), w(1, 0, 2), w(2, 1, 1), w(3, 2, 0));
}

} // namespace vessiot::testsupport
