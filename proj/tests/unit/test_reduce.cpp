#include <catch2/catch_amalgamated.hpp>

#include "support/brioschi.hpp"
#include "vessiot/action.hpp"
#include "vessiot/elim.hpp"
#include "vessiot/reduce.hpp"
#include "vessiot/rng.hpp"

using namespace vessiot;
using namespace vessiot::testsupport;

namespace {

/* small custom actions for the failure paths; each law keeps a jet factor
 * so the resulting system has order one like the action */
NaturalBundleAction degenerate_action() {
    NaturalBundleAction a;
    a.n = 1;
    a.q = 1;
    a.m = 2;
    a.name = "degenerate";
    a.comp_names = {"u1", "u2"};
    JetContext c(1, 2);
    Expr j = Expr::atom(c.jet(1, MultiIndex::unit(1, 1)));
    Expr sum = (Expr::atom(c.obj(1, MultiIndex::zero(1), Side::Target)) +
                Expr::atom(c.obj(2, MultiIndex::zero(1), Side::Target))) *
               j;
    a.law = {sum, sum};
    return a;
}

NaturalBundleAction quadratic_action() {
    NaturalBundleAction a;
    a.n = 1;
    a.q = 1;
    a.m = 1;
    a.name = "quadratic";
    a.comp_names = {"u1"};
    JetContext c(1, 1);
    Expr j = Expr::atom(c.jet(1, MultiIndex::unit(1, 1)));
    Expr u = Expr::atom(c.obj(1, MultiIndex::zero(1), Side::Target));
    a.law = {u * u * j};
    return a;
}

Expr jet1(const JetContext& c, int i, int k) { return Expr::atom(c.jet(i, MultiIndex::unit(c.dim(), k))); }

} // namespace

TEST_CASE("conditions without target atoms pass through reduction unchanged") {
    NaturalBundleAction a = builtin_action("volume", 2);
    EquationSystem s = lie_form(a, GeometricObject::symbolic(2, 1));
    JetContext c = a.context();
    Expr cond = Expr::atom(c.obj(1, MultiIndex::unit(2, 1), Side::Source)) * jet1(c, 1, 1) + Expr::from_int(3);
    CHECK(reduce_modulo(cond, s, a) == cond);
}

TEST_CASE("reduction rejects a system whose context mismatches the action") {
    NaturalBundleAction a = builtin_action("volume", 2);
    NaturalBundleAction b = builtin_action("metric", 2);
    EquationSystem s = lie_form(b, GeometricObject::symbolic(2, 3));
    JetContext c = a.context();
    Expr cond = Expr::atom(c.obj(1, MultiIndex::zero(2), Side::Target));
    CHECK_THROWS_AS(reduce_modulo(cond, s, a), DimensionMismatch);
}

TEST_CASE("order-zero target components solve the law itself") {
    NaturalBundleAction a = builtin_action("volume", 2);
    JetContext c = a.context();
    std::map<AtomId, Expr> rw = target_rewrites(a, 0);
    REQUIRE(rw.size() == 1);
    /* law u * det J = w means u = w / det J */
    Expr expected = Expr::atom(c.obj(1, MultiIndex::zero(2), Side::Source)) /
                    (jet1(c, 1, 1) * jet1(c, 2, 2) - jet1(c, 1, 2) * jet1(c, 2, 1));
    CHECK(rw.at(c.obj(1, MultiIndex::zero(2), Side::Target)) == expected);
}

namespace {

Rat ensure_value(std::map<AtomId, Rat>& vals, AtomId a, Rng& rng) {
    auto it = vals.find(a);
    if (it == vals.end()) it = vals.emplace(a, rng.rat(5, 3)).first;
    return it->second;
}

Rat eval_filling(const Expr& e, std::map<AtomId, Rat>& vals, Rng& rng) {
    for (AtomId a : e.atoms()) ensure_value(vals, a, rng);
    return e.eval(vals);
}

/* value of the total derivative D_k e at a point, assembled from polynomial
 * pieces so no large symbolic quotient is ever formed */
Rat eval_total_derivative(const JetContext& c, const Expr& e, int k, std::map<AtomId, Rat>& vals, Rng& rng) {
    for (AtomId a : e.atoms()) ensure_value(vals, a, rng);
    Rat nv = e.num().eval(vals);
    Rat dv = e.den().eval(vals);
    Rat acc(0);
    for (AtomId a : e.atoms()) {
        Rat npv = e.num().derivative(a).eval(vals);
        Rat dpv = e.den().derivative(a).eval(vals);
        Rat part = (npv * dv - nv * dpv) / (dv * dv);
        if (part == Rat(0)) continue;
        acc = acc + part * eval_filling(c.total_derivative(Expr::atom(a), k), vals, rng);
    }
    return acc;
}

} // namespace

TEST_CASE("target rewrites satisfy the chain rule across every parent") {
    NaturalBundleAction a = builtin_action("volume", 2);
    JetContext c = a.context();
    std::map<AtomId, Expr> rw = target_rewrites(a, 2);
    REQUIRE(rw.size() == 6);

    /* D_k R_delta = sum_j R_(delta+e_j) * d_k y^j.  Checked symbolically at
     * the bottom grade, where the expressions stay small */
    for (int k = 1; k <= 2; ++k) {
        Expr lhs = c.total_derivative(rw.at(c.obj(1, MultiIndex::zero(2), Side::Target)), k);
        Expr rhs = Expr::zero();
        for (int j = 1; j <= 2; ++j)
            rhs = rhs + rw.at(c.obj(1, MultiIndex::unit(2, j), Side::Target)) * jet1(c, j, k);
        CHECK((lhs - rhs).is_zero());
    }

    /* the same identity at the top grade covers both parents of every
     * second-order component; verified exactly at sampled rational points
     * because term-by-term reduction makes the symbolic form expensive */
    Rng rng(424242);
    for (int sample = 0; sample < 4; ++sample) {
        std::map<AtomId, Rat> vals;
        for (const MultiIndex& parent : multi_indices_exact(2, 1)) {
            for (int k = 1; k <= 2; ++k) {
                Rat lhs = eval_total_derivative(c, rw.at(c.obj(1, parent, Side::Target)), k, vals, rng);
                Rat rhs(0);
                for (int j = 1; j <= 2; ++j) {
                    Rat rv = eval_filling(rw.at(c.obj(1, parent.bumped(j), Side::Target)), vals, rng);
                    rhs = rhs + rv * ensure_value(vals, c.jet(j, MultiIndex::unit(2, k)), rng);
                }
                CHECK(lhs == rhs);
            }
        }
    }
}

TEST_CASE("derivatives of the prolonged action map commute") {
    for (const char* name : {"volume", "metric"}) {
        NaturalBundleAction a = builtin_action(name, 2);
        JetContext c = a.context();
        std::map<AtomId, Expr> fwd = transformed_object_jets(a, 2);
        MultiIndex mixed = MultiIndex::unit(2, 1).bumped(2);
        for (int b = 1; b <= a.m; ++b) {
            Expr child = fwd.at(c.obj(b, mixed, Side::Source));
            Expr via1 = c.total_derivative(fwd.at(c.obj(b, MultiIndex::unit(2, 2), Side::Source)), 1);
            Expr via2 = c.total_derivative(fwd.at(c.obj(b, MultiIndex::unit(2, 1), Side::Source)), 2);
            INFO(name << " component " << b);
            CHECK((via1 - child).is_zero());
            CHECK((via2 - child).is_zero());
        }
    }
}

TEST_CASE("members of the system ideal reduce to zero") {
    for (const char* name : {"volume", "covector", "metric"}) {
        NaturalBundleAction a = builtin_action(name, 2);
        EquationSystem s = lie_form(a, GeometricObject::symbolic(2, a.m));
        EquationSystem p = prolong_system(s, 2);
        for (const Expr& eq : p.eqs) {
            Expr red = reduce_modulo(eq, p, a);
            INFO(name);
            CHECK(red.is_zero());
        }
    }
}

TEST_CASE("reduction inverts the prolonged action map") {
    for (const char* name : {"volume", "covector"}) {
        NaturalBundleAction a = builtin_action(name, 2);
        JetContext c = a.context();
        EquationSystem s = lie_form(a, GeometricObject::symbolic(2, a.m));
        EquationSystem p = prolong_system(s, 2);
        std::map<AtomId, Expr> fwd = transformed_object_jets(a, 2);
        for (const auto& [atom, image] : fwd) {
            Expr back = reduce_modulo(image, p, a);
            INFO(name << " " << atom_name(atom));
            CHECK(back == Expr::atom(atom));
        }
    }
}

TEST_CASE("prolonged action map on a line matches the hand computation") {
    NaturalBundleAction a = builtin_action("volume", 1);
    JetContext c = a.context();
    std::map<AtomId, Expr> fwd = transformed_object_jets(a, 1);
    Expr u = Expr::atom(c.obj(1, MultiIndex::zero(1), Side::Target));
    Expr u1 = Expr::atom(c.obj(1, MultiIndex::unit(1, 1), Side::Target));
    Expr y1 = jet1(c, 1, 1);
    Expr y2 = Expr::atom(c.jet(1, MultiIndex::unit(1, 1).bumped(1)));
    CHECK(fwd.at(c.obj(1, MultiIndex::zero(1), Side::Source)) == u * y1);
    /* d/dx (u(y) y') = u'(y) y'^2 + u(y) y'' */
    CHECK(fwd.at(c.obj(1, MultiIndex::unit(1, 1), Side::Source)) == u1 * y1 * y1 + u * y2);
}

TEST_CASE("reduction fails loudly on a law that cannot be solved") {
    NaturalBundleAction bad = degenerate_action();
    JetContext c = bad.context();
    GeometricObject w = GeometricObject::symbolic(1, 2);
    EquationSystem s = lie_form(bad, w);
    Expr cond = Expr::atom(c.obj(1, MultiIndex::zero(1), Side::Target));
    CHECK_THROWS_AS(reduce_modulo(cond, s, bad), ReductionFailed);

    NaturalBundleAction quad = quadratic_action();
    JetContext cq = quad.context();
    EquationSystem sq = lie_form(quad, GeometricObject::symbolic(1, 1));
    Expr condq = Expr::atom(cq.obj(1, MultiIndex::zero(1), Side::Target));
    CHECK_THROWS_AS(reduce_modulo(condq, sq, quad), ReductionFailed);
}

TEST_CASE("curvature of the transformed metric rewrites to the source curvature") {
    /* intermediate products before cancellation are large here */
    set_term_cap(4000000);
    NaturalBundleAction a = builtin_action("metric", 2);
    JetContext c = a.context();
    EquationSystem s = lie_form(a, GeometricObject::symbolic(2, 3));
    /* an order-3 system determines every target atom the curvature uses */
    EquationSystem p = prolong_system(s, 2);
    Expr ktgt = gauss_curvature_atoms(c, Side::Target);
    Expr ksrc = gauss_curvature_atoms(c, Side::Source);
    CHECK((reduce_modulo(ktgt, p, a) - ksrc).is_zero());
}

TEST_CASE("metric obstruction reduces to a curvature difference") {
    NaturalBundleAction a = builtin_action("metric", 2);
    JetContext c = a.context();
    EquationSystem s = lie_form(a, GeometricObject::symbolic(2, 3));
    EquationSystem s2 = prolong_system(s, 1);
    EquationSystem p = prolong_system(s, 2);
    EliminationResult r = eliminate(split_top_order(p, 3));
    REQUIRE(r.conditions.size() == 1);

    Expr cred = reduce_modulo(r.conditions[0], s2, a);
    REQUIRE_FALSE(cred.is_zero());
    /* the order-2 system pins targets only up to first order, so the
     * second-order target atoms survive as the new unknowns */
    CHECK(obj_order(cred, Side::Target) == 2);
    CHECK(obj_order(cred, Side::Source) == 2);
    CHECK(jet_order(cred) <= 3);

    Expr ktgt_red = reduce_modulo(gauss_curvature_atoms(c, Side::Target), s2, a);
    Expr diff = gauss_curvature_atoms(c, Side::Source) - ktgt_red;
    REQUIRE_FALSE(diff.is_zero());

    Expr q = cred / diff;
    REQUIRE_FALSE(q.is_zero());
    /* the proportionality factor carries no derivative atoms at all */
    CHECK(obj_order(q, Side::Source) == 0);
    CHECK(obj_order(q, Side::Target) == 0);
    CHECK(jet_order(q) <= 1);

    /* and is a constant multiple of det(w)^5 / det(J)^4 */
    Expr E = Expr::atom(c.obj(1, MultiIndex::zero(2), Side::Source));
    Expr F = Expr::atom(c.obj(2, MultiIndex::zero(2), Side::Source));
    Expr G = Expr::atom(c.obj(3, MultiIndex::zero(2), Side::Source));
    Expr detw = E * G - F * F;
    Expr detj = jet1(c, 1, 1) * jet1(c, 2, 2) - jet1(c, 1, 2) * jet1(c, 2, 1);
    Expr detw5 = detw * detw * detw * detw * detw;
    Expr detj4 = detj * detj * detj * detj;
    Expr ratio = q * detj4 / detw5;
    CHECK(ratio.num().is_constant());
    CHECK(ratio.den().is_constant());
    REQUIRE_FALSE(ratio.is_zero());
}
