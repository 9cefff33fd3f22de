#pragma once

#include <vector>

#include "poly.hpp"

namespace vessiot {

/* dense-by-degree coefficient view of p in the atom v */
inline std::vector<Poly> coeffs_in(const Poly& p, AtomId v) {
    std::vector<std::vector<Term>> buckets(static_cast<size_t>(p.degree_in(v)) + 1);
    for (auto& t : p.terms())
        buckets[static_cast<size_t>(t.mono.degree_in(v))].push_back({t.mono.without(v), t.coef});
    std::vector<Poly> cs(buckets.size());
    for (size_t e = 0; e < cs.size(); ++e) {
        std::sort(buckets[e].begin(), buckets[e].end(),
                  [](const Term& a, const Term& b) { return Monomial::compare(a.mono, b.mono) > 0; });
        cs[e] = Poly::from_sorted_terms(std::move(buckets[e]));
    }
    return cs;
}

inline Poly from_coeffs(const std::vector<Poly>& cs, AtomId v) {
    Poly acc;
    Poly vp = Poly::atom(v);
    for (size_t e = 0; e < cs.size(); ++e) {
        if (cs[e].is_zero()) continue;
        acc = acc + cs[e] * vp.pow(static_cast<int>(e));
    }
    return acc;
}

inline Poly leading_coeff_in(const Poly& p, AtomId v) {
    auto cs = coeffs_in(p, v);
    return cs.back();
}

/* pseudo-remainder of f by g in v: lc_v(g)^(deg f - deg g + 1) * f = q*g + rem */
inline Poly pseudo_rem(const Poly& f, const Poly& g, AtomId v) {
    int df = f.degree_in(v), dg = g.degree_in(v);
    if (dg == 0) return Poly::zero();
    auto fc = coeffs_in(f, v);
    auto gc = coeffs_in(g, v);
    Poly l = gc[dg];
    int e = df - dg + 1;
    std::vector<Poly> r = fc;
    int dr = df;
    auto true_deg = [&](const std::vector<Poly>& c, int upper) {
        int d = upper;
        while (d >= 0 && c[static_cast<size_t>(d)].is_zero()) --d;
        return d;
    };
    while (dr >= dg) {
        Poly t = r[static_cast<size_t>(dr)];
        // r := l*r - t * v^(dr-dg) * g
        for (int i = 0; i <= dr; ++i)
            if (!r[static_cast<size_t>(i)].is_zero()) r[static_cast<size_t>(i)] = r[static_cast<size_t>(i)] * l;
        for (int i = 0; i <= dg; ++i) {
            size_t k = static_cast<size_t>(dr - dg + i);
            r[k] = r[k] - t * gc[static_cast<size_t>(i)];
        }
        --e;
        dr = true_deg(r, dr - 1);
    }
    r.resize(static_cast<size_t>(std::max(dr, 0)) + 1);
    Poly rem = from_coeffs(r, v);
    if (e > 0) rem = rem * l.pow(e);
    return rem;
}

Poly poly_gcd(const Poly& a, const Poly& b);

/* gcd of the v-coefficients */
inline Poly content_in(const Poly& p, AtomId v) {
    auto cs = coeffs_in(p, v);
    Poly g;
    for (auto& c : cs) {
        if (c.is_zero()) continue;
        g = poly_gcd(g, c);
        if (g.is_constant()) break;
    }
    return g.is_zero() ? Poly::zero() : g;
}

/* gcd over Q[atoms], returned integer-primitive with positive leading coefficient */
inline Poly poly_gcd(const Poly& a, const Poly& b) {
    if (a.is_zero()) return b.primitive();
    if (b.is_zero()) return a.primitive();
    if (a.is_constant() || b.is_constant()) return Poly::one();

    Monomial ma = a.monomial_content(), mb = b.monomial_content();
    Monomial mg = Monomial::gcd(ma, mb);
    Poly A = *Poly::divide_exact(a, Poly::from_sorted_terms({{ma, Rat(1)}}));
    Poly B = *Poly::divide_exact(b, Poly::from_sorted_terms({{mb, Rat(1)}}));
    A = A.primitive();
    B = B.primitive();
    Poly mono_part = Poly::from_sorted_terms({{mg, Rat(1)}});

    if (A == B) return (mono_part * A).primitive();

    // quick exits: one primitive part divides the other
    if (A.term_count() <= B.term_count()) {
        if (Poly::divide_exact(B, A)) return (mono_part * A).primitive();
    } else {
        if (Poly::divide_exact(A, B)) return (mono_part * B).primitive();
    }

    // pick a main variable common to both
    auto sa = A.atoms();
    auto sb = B.atoms();
    AtomId v = 0;
    bool found = false;
    long best = 0;
    for (AtomId x : sa) {
        if (!sb.count(x)) continue;
        long da = A.degree_in(x), db = B.degree_in(x);
        long score = std::min(da, db) * 1000 + std::max(da, db);
        if (!found || score < best) {
            found = true;
            best = score;
            v = x;
        }
    }
    if (!found) return mono_part;  // disjoint atom sets: primitive parts are coprime

    Poly ca = content_in(A, v), cb = content_in(B, v);
    Poly c = poly_gcd(ca, cb);
    Poly F = *Poly::divide_exact(A, ca);
    Poly G = *Poly::divide_exact(B, cb);
    if (F.degree_in(v) < G.degree_in(v)) std::swap(F, G);

    Poly g = Poly::one(), h = Poly::one();
    while (true) {
        int delta = F.degree_in(v) - G.degree_in(v);
        Poly R = pseudo_rem(F, G, v);
        if (R.is_zero()) break;
        if (R.degree_in(v) == 0) {
            G = Poly::one();  // coprime in v
            break;
        }
        F = G;
        Poly divisor = g * h.pow(delta);
        auto q = Poly::divide_exact(R, divisor);
        if (!q) throw Error("subresultant division failed");  // indicates a corrupted PRS
        G = *q;
        g = leading_coeff_in(F, v);
        if (delta == 1) {
            h = g;
        } else if (delta > 1) {
            auto nh = Poly::divide_exact(g.pow(delta), h.pow(delta - 1));
            if (!nh) throw Error("subresultant h-update failed");
            h = *nh;
        }
    }
    Poly pg = G.is_constant() ? Poly::one() : *Poly::divide_exact(G, content_in(G, v));
    return (mono_part * c * pg).primitive();
}

inline Poly poly_lcm(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly::zero();
    Poly g = poly_gcd(a, b);
    return ((*Poly::divide_exact(a, g)) * b).primitive();
}

} // namespace vessiot
