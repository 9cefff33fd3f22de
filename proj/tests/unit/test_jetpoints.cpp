#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <vector>

#include "vessiot/jets.hpp"
#include "vessiot/rng.hpp"

using namespace vessiot;

namespace {

/* A concrete map given by one expression per component in the base
 * coordinates.  Used as an independent oracle: jets of such maps come from
 * repeated partial differentiation and pointwise evaluation, compositions
 * from plain substitution.  No chain rule and no total derivative involved. */
using PolyMap = std::vector<Expr>;

QVec eval_map(const PolyMap& f, const QVec& at) {
    std::map<AtomId, Rat> vals;
    for (size_t i = 0; i < at.size(); ++i) vals[base_coord_atom(static_cast<int>(i) + 1)] = at[i];
    QVec out;
    for (const Expr& c : f) out.push_back(c.eval(vals));
    return out;
}

PolyMap compose_maps(const PolyMap& g, const PolyMap& f) {
    std::map<AtomId, Expr> repl;
    for (size_t i = 0; i < f.size(); ++i) repl[base_coord_atom(static_cast<int>(i) + 1)] = f[i];
    PolyMap out;
    for (const Expr& c : g) out.push_back(c.substitute(repl));
    return out;
}

JetPoint jet_of_map(const PolyMap& f, const QVec& at, int q) {
    int n = static_cast<int>(f.size());
    std::map<AtomId, Rat> vals;
    for (int i = 1; i <= n; ++i) vals[base_coord_atom(i)] = at[i - 1];
    JetPoint p;
    p.n = n;
    p.q = q;
    p.source = at;
    for (int i = 1; i <= n; ++i) {
        std::map<MultiIndex, Expr> memo;
        memo[MultiIndex::zero(n)] = f[i - 1];
        for (int grade = 0; grade <= q; ++grade)
            for (const MultiIndex& b : multi_indices_exact(n, grade)) {
                if (grade > 0) {
                    int k = 1;
                    while (!b.can_lower(k)) ++k;
                    memo[b] = memo.at(b.lowered(k)).partial(base_coord_atom(k));
                }
                p.set(i, b, memo.at(b).eval(vals));
            }
    }
    return p;
}

bool same_jet(const JetPoint& a, const JetPoint& b) {
    return a.n == b.n && a.q == b.q && a.source == b.source && a.comp == b.comp;
}

Expr coord(int i) { return Expr::atom(base_coord_atom(i)); }

PolyMap random_map(Rng& rng, int n, int max_deg) {
    PolyMap f;
    for (int i = 1; i <= n; ++i) {
        Expr c = Expr::from_rat(rng.rat(3, 2));
        int terms = 2 + static_cast<int>(rng.below(3));
        for (int t = 0; t < terms; ++t) {
            Expr m = Expr::from_rat(rng.rat(3, 2));
            int deg = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(max_deg)));
            for (int d = 0; d < deg; ++d) m = m * coord(1 + static_cast<int>(rng.below(static_cast<uint64_t>(n))));
            c = c + m;
        }
        f.push_back(c);
    }
    return f;
}

QVec random_point(Rng& rng, int n) {
    QVec p;
    for (int i = 0; i < n; ++i) p.push_back(rng.rat(3, 2));
    return p;
}

JetPoint random_invertible_jet(Rng& rng, int n, int q, const QVec& src, const QVec& tgt) {
    for (;;) {
        JetPoint p;
        p.n = n;
        p.q = q;
        p.source = src;
        for (int i = 1; i <= n; ++i)
            for (const MultiIndex& b : multi_indices_upto(n, q))
                p.set(i, b, b.order() == 0 ? tgt[i - 1] : rng.rat(3, 2));
        if (det(p.linear()) != 0) return p;
    }
}

} // namespace

TEST_CASE("jet composition matches the substitution oracle") {
    Rng rng(521);
    for (int n = 1; n <= 3; ++n) {
        int qmax = n == 3 ? 2 : 3;
        for (int q = 1; q <= qmax; ++q) {
            for (int rep = 0; rep < 6; ++rep) {
                PolyMap f = random_map(rng, n, 2);
                PolyMap g = random_map(rng, n, 2);
                QVec x0 = random_point(rng, n);
                QVec y0 = eval_map(f, x0);
                JetPoint jf = jet_of_map(f, x0, q);
                JetPoint jg = jet_of_map(g, y0, q);
                JetPoint composed = compose_jets(jg, jf);
                JetPoint oracle = jet_of_map(compose_maps(g, f), x0, q);
                CHECK(same_jet(composed, oracle));
            }
        }
    }
}

TEST_CASE("one-variable inversion reproduces the classical series coefficients") {
    // f(x) = 2x + x^2 at 0: inverse has f' = 1/2 and f'' = -1/4,
    // i.e. Taylor coefficient b2 = -1/8 = -a2/a1^3
    PolyMap f{coord(1) * Expr::from_int(2) + coord(1) * coord(1)};
    JetPoint jf = jet_of_map(f, {Rat(0)}, 2);
    JetPoint g = invert_jet(jf);
    CHECK(g.value(1, MultiIndex{1}) == Rat(1, 2));
    CHECK(g.value(1, MultiIndex{2}) == Rat(-1, 4));

    // f(x) = x + x^2 + x^3 at 0: inverse Taylor series x - x^2 + x^3,
    // so derivative values 1, -2, 6
    PolyMap h{coord(1) + coord(1) * coord(1) + coord(1) * coord(1) * coord(1)};
    JetPoint jh = jet_of_map(h, {Rat(0)}, 3);
    JetPoint gh = invert_jet(jh);
    CHECK(gh.value(1, MultiIndex{1}) == Rat(1));
    CHECK(gh.value(1, MultiIndex{2}) == Rat(-2));
    CHECK(gh.value(1, MultiIndex{3}) == Rat(6));
}

TEST_CASE("one-variable second-order inversion formula holds on random jets") {
    Rng rng(522);
    for (int rep = 0; rep < 30; ++rep) {
        Rat a1 = rng.nonzero_rat(4, 3);
        Rat a2 = rng.rat(4, 3);
        JetPoint f;
        f.n = 1;
        f.q = 2;
        f.source = {rng.rat(3, 2)};
        f.set(1, MultiIndex{0}, rng.rat(3, 2));
        f.set(1, MultiIndex{1}, a1);
        f.set(1, MultiIndex{2}, a2);
        JetPoint g = invert_jet(f);
        CHECK(g.value(1, MultiIndex{1}) == Rat(1) / a1);
        CHECK(g.value(1, MultiIndex{2}) == -a2 / (a1 * a1 * a1));
    }
}

TEST_CASE("shear maps have exact polynomial inverses and the jets agree") {
    Rng rng(523);
    for (int rep = 0; rep < 10; ++rep) {
        // f = (x1 + p(x2), x2) has inverse (x1 - p(x2), x2) exactly
        Expr p = Expr::from_rat(rng.rat(3, 2)) + Expr::from_rat(rng.rat(3, 2)) * coord(2) +
                 Expr::from_rat(rng.rat(3, 2)) * coord(2) * coord(2);
        PolyMap f{coord(1) + p, coord(2)};
        PolyMap finv{coord(1) - p, coord(2)};
        QVec x0 = random_point(rng, 2);
        QVec y0 = eval_map(f, x0);
        for (int q = 1; q <= 3; ++q) {
            JetPoint expect = jet_of_map(finv, y0, q);
            JetPoint got = invert_jet(jet_of_map(f, x0, q));
            CHECK(same_jet(got, expect));
        }
    }
}

TEST_CASE("identity jets are neutral for composition") {
    Rng rng(524);
    for (int n = 1; n <= 3; ++n) {
        QVec x0 = random_point(rng, n);
        QVec y0 = random_point(rng, n);
        JetPoint f = random_invertible_jet(rng, n, 3, x0, y0);
        CHECK(same_jet(compose_jets(identity_jet(n, 3, y0), f), f));
        CHECK(same_jet(compose_jets(f, identity_jet(n, 3, x0)), f));
    }
}

TEST_CASE("inverse jets compose to identity jets and involute") {
    Rng rng(525);
    for (int rep = 0; rep < 8; ++rep) {
        int n = 1 + static_cast<int>(rng.below(3));
        int q = n == 3 ? 2 : 3;
        QVec x0 = random_point(rng, n);
        QVec y0 = random_point(rng, n);
        JetPoint f = random_invertible_jet(rng, n, q, x0, y0);
        JetPoint g = invert_jet(f);
        CHECK(g.source == y0);
        CHECK(g.target() == x0);
        CHECK(same_jet(compose_jets(f, g), identity_jet(n, q, y0)));
        CHECK(same_jet(compose_jets(g, f), identity_jet(n, q, x0)));
        CHECK(same_jet(invert_jet(g), f));
    }
}

TEST_CASE("jet composition is associative") {
    Rng rng(526);
    for (int rep = 0; rep < 8; ++rep) {
        int n = 1 + static_cast<int>(rng.below(2));
        int q = 3;
        QVec p0 = random_point(rng, n), p1 = random_point(rng, n);
        QVec p2 = random_point(rng, n), p3 = random_point(rng, n);
        JetPoint f = random_invertible_jet(rng, n, q, p0, p1);
        JetPoint g = random_invertible_jet(rng, n, q, p1, p2);
        JetPoint h = random_invertible_jet(rng, n, q, p2, p3);
        CHECK(same_jet(compose_jets(h, compose_jets(g, f)), compose_jets(compose_jets(h, g), f)));
    }
}

TEST_CASE("composition rejects mismatched endpoints and shapes") {
    Rng rng(527);
    QVec x0 = random_point(rng, 2), y0 = random_point(rng, 2);
    QVec z0 = y0;
    z0[0] += 1;
    JetPoint f = random_invertible_jet(rng, 2, 2, x0, y0);
    JetPoint g = random_invertible_jet(rng, 2, 2, z0, x0);
    CHECK_THROWS_AS(compose_jets(g, f), SourceTargetMismatch);
    JetPoint h3 = random_invertible_jet(rng, 3, 2, random_point(rng, 3), random_point(rng, 3));
    CHECK_THROWS_AS(compose_jets(h3, f), DimensionMismatch);
    JetPoint fq = random_invertible_jet(rng, 2, 3, y0, x0);
    CHECK_THROWS_AS(compose_jets(fq, f), DimensionMismatch);
}

TEST_CASE("inversion rejects singular linear parts") {
    JetPoint f;
    f.n = 2;
    f.q = 2;
    f.source = {Rat(0), Rat(0)};
    for (const MultiIndex& b : multi_indices_upto(2, 2)) {
        f.set(1, b, Rat(0));
        f.set(2, b, Rat(0));
    }
    f.set(1, MultiIndex{1, 0}, Rat(1));
    f.set(2, MultiIndex{1, 0}, Rat(1));  // rank-one linear part
    CHECK_THROWS_AS(invert_jet(f), SingularLinearPart);
    CHECK_THROWS_AS(invert_jet(identity_jet(2, 0, {Rat(0), Rat(0)})), DimensionMismatch);
}
