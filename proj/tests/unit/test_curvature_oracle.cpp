#include <catch2/catch_amalgamated.hpp>

#include "support/brioschi.hpp"

using namespace vessiot;
using vessiot::testsupport::gauss_curvature_2d;

namespace {
Expr U() { return Expr::atom(base_coord_atom(1)); }
Expr V() { return Expr::atom(base_coord_atom(2)); }
} // namespace

TEST_CASE("curvature oracle: flat metrics") {
    CHECK(gauss_curvature_2d(Expr::one(), Expr::zero(), Expr::one()) == Expr::zero());
    // polar-style coordinates on the plane are still flat
    CHECK(gauss_curvature_2d(Expr::one(), Expr::zero(), U() * U()) == Expr::zero());
}

TEST_CASE("curvature oracle: round sphere in stereographic coordinates") {
    Expr r2 = U() * U() + V() * V();
    Expr conf = Expr::from_int(4) / ((Expr::one() + r2) * (Expr::one() + r2));
    CHECK(gauss_curvature_2d(conf, Expr::zero(), conf) == Expr::one());
}

TEST_CASE("curvature oracle: hyperbolic disc") {
    Expr r2 = U() * U() + V() * V();
    Expr conf = Expr::from_int(4) / ((Expr::one() - r2) * (Expr::one() - r2));
    CHECK(gauss_curvature_2d(conf, Expr::zero(), conf) == -Expr::one());
}

TEST_CASE("curvature oracle: nonconstant curvature profile") {
    Expr G = Expr::one() + U() * U();
    Expr K = gauss_curvature_2d(Expr::one(), Expr::zero(), G);
    Expr expect = -Expr::one() / (G * G);
    CHECK(K == expect);
}

TEST_CASE("curvature oracle: scaling a flat metric by a constant stays flat") {
    Expr c = Expr::from_rat(Rat(7, 3));
    CHECK(gauss_curvature_2d(c, Expr::zero(), c) == Expr::zero());
}
