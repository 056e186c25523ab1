#include <doctest.h>

#include "qhi/params.hpp"
#include "qhi/qseries.hpp"

using namespace qhi;

namespace {

double rel(Cplx a, Cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// independent straight-loop oracle: multiply factors until they stop moving
Cplx qpoch_oracle(Cplx u, Cplx p) {
    Cplx prod(1.0), w = u;
    for (int s = 0; s < 600; ++s) {
        prod *= (Cplx(1.0) - w);
        w *= p;
    }
    return prod;
}

}  // namespace

TEST_CASE("qpoch_inf basics") {
    Truncation tr;
    CHECK(qpoch_inf(Cplx(0.0), Cplx(0.5, 0.1), tr) == Cplx(1.0));
    CHECK(qpoch_inf(Cplx(0.3, -0.2), Cplx(0.0), tr) == Cplx(1.0) - Cplx(0.3, -0.2));

    // analytically forced recursion (u)_inf = (1-u)(p u)_inf
    const Cplx u(0.5), p(0.5);
    const Cplx lhs = qpoch_inf(u, p, tr);
    const Cplx rhs = (Cplx(1.0) - u) * qpoch_inf(p * u, p, tr);
    CHECK(rel(lhs, rhs) < 1e-15);

    // straight-loop oracle at 1e-15 relative (tail driven below that level)
    Truncation fine;
    fine.series_tail_tol = 1e-16;
    CHECK(rel(qpoch_inf(u, p, fine), qpoch_oracle(u, p)) < 1e-15);

    CHECK_THROWS_AS(qpoch_inf(Cplx(0.5), Cplx(1.2), tr), DomainError);
    Truncation tight;
    tight.max_terms = 2;
    tight.series_tail_tol = 1e-30;
    CHECK_THROWS_AS(qpoch_inf(Cplx(0.5), Cplx(0.9), tight), TailBoundError);
}

TEST_CASE("qpoch recursion over random draws") {
    Rng rng(42);
    Truncation tr;
    for (int i = 0; i < 100; ++i) {
        const Cplx p = rng.uniform(0.05, 0.6) * rng.unit_phase();
        const Cplx u = rng.uniform(0.0, 2.0) * rng.unit_phase();
        const Cplx lhs = qpoch_inf(u, p, tr);
        const Cplx rhs = (Cplx(1.0) - u) * qpoch_inf(p * u, p, tr);
        CHECK(rel(lhs, rhs) < 1e-12);
    }
}

TEST_CASE("qpoch_fin") {
    CHECK(qpoch_fin(Cplx(0.7), Cplx(0.3), 0) == Cplx(1.0));
    CHECK(std::abs(qpoch_fin(Cplx(1.0), Cplx(0.3), 3)) == 0.0);
    CHECK(rel(qpoch_fin(Cplx(0.5), Cplx(0.5), 2), Cplx(0.375)) < 1e-15);
    CHECK_THROWS_AS(qpoch_fin(Cplx(0.5), Cplx(0.5), -1), DomainError);
}

TEST_CASE("theta function") {
    Truncation tr;
    CHECK(std::abs(theta(Cplx(1.0), Cplx(0.3), tr)) < 1e-14);
    CHECK_THROWS_AS(theta(Cplx(0.0), Cplx(0.3), tr), DomainError);

    // triple-product oracle at u = -1, p = 0.25
    const Cplx p(0.25);
    const Cplx want = qpoch_inf(Cplx(-1.0), p, tr) * qpoch_inf(Cplx(-0.25), p, tr) *
                      qpoch_inf(Cplx(0.25), p, tr);
    CHECK(rel(theta(Cplx(-1.0), p, tr), want) < 1e-14);

    // quasi-periodicity theta(p u) = -u^{-1} theta(u)
    Rng rng(7);
    for (int i = 0; i < 50; ++i) {
        const Cplx pp = rng.uniform(0.05, 0.6) * rng.unit_phase();
        const Cplx u = rng.uniform(0.3, 2.0) * rng.unit_phase();
        CHECK(rel(theta(pp * u, pp, tr), -theta(u, pp, tr) / u) < 1e-12);
    }

    // zeros exactly on u = p^s, s in [-3, 3]
    const Cplx q(0.4, 0.1);
    Cplx ps_(1.0);
    for (int s = 0; s <= 3; ++s) {
        CHECK(std::abs(theta(ps_, q, tr)) < 1e-12);
        CHECK(std::abs(theta(Cplx(1.0) / ps_, q, tr)) < 1e-12);
        ps_ *= q;
    }
}

TEST_CASE("theta_prime_at_1") {
    Truncation tr;
    CHECK(theta_prime_at_1(Cplx(0.0), tr) == Cplx(-1.0));

    const Cplx p(0.35, 0.1);
    // central finite difference of theta at u = 1
    const double h = 1e-6;
    const Cplx fd = (theta(Cplx(1.0 + h), p, tr) - theta(Cplx(1.0 - h), p, tr)) / Cplx(2 * h);
    CHECK(rel(theta_prime_at_1(p, tr), fd) < 1e-8);

    const Cplx php(0.5);
    const Cplx pp = qpoch_inf(php, php, tr);
    CHECK(rel(theta_prime_at_1(php, tr), -pp * pp * pp) < 1e-15);
}

TEST_CASE("phi_series basics") {
    Truncation tr;
    std::vector<Cplx> a{Cplx(0.5), Cplx(0.25)};
    std::vector<Cplx> b{Cplx(0.4)};
    CHECK(phi_series(a, b, Cplx(0.3), Cplx(0.0), tr) == Cplx(1.0));

    // q-binomial: 1phi0(z/z~; z~) = (z)_inf / (z~)_inf at z = 0.125, z~ = 0.25
    const Cplx p(0.5), z(0.125), zt(0.25);
    std::vector<Cplx> a1{z / zt};
    std::vector<Cplx> b0{};
    const Cplx lhs = phi_series(a1, b0, p, zt, tr);
    const Cplx rhs = qpoch_inf(z, p, tr) / qpoch_inf(zt, p, tr);
    CHECK(rel(lhs, rhs) < 1e-13);

    // denominator-pole rejection: b on p^{-Z>=0}
    std::vector<Cplx> bp{Cplx(1.0) / p};
    CHECK_THROWS_AS(phi_series(a, bp, p, z, tr), PoleProximityError);

    // divergence for |z| > 1
    std::vector<Cplx> nob{};
    std::vector<Cplx> aa{Cplx(0.9)};
    CHECK_THROWS_AS(phi_series(aa, nob, Cplx(0.2), Cplx(1.8), tr), ConvergenceError);
}

TEST_CASE("2phi1 transformation at random admissible draws") {
    // 2phi1(a1,a2;b;z)(z)_inf = 2phi1(b/a1,b/a2;b;z a1 a2/b)(z a1 a2/b)_inf
    Rng rng(2024);
    Truncation tr;
    for (int i = 0; i < 40; ++i) {
        const Cplx p = rng.uniform(0.1, 0.4) * rng.unit_phase();
        const Cplx a1 = rng.uniform(0.5, 1.5) * rng.unit_phase();
        const Cplx a2 = rng.uniform(0.5, 1.5) * rng.unit_phase();
        Cplx b = rng.uniform(0.6, 1.4) * rng.unit_phase();
        if (lattice_distance(b, p) < 1e-2) continue;
        Cplx z = 0.3 * rng.unit_phase();
        if (std::abs(z * a1 * a2 / b) > 0.8) z *= 0.5 / std::abs(z * a1 * a2 / b);
        const Cplx zt = z * a1 * a2 / b;
        std::vector<Cplx> A{a1, a2}, B{b}, A2{b / a1, b / a2};
        const Cplx lhs = phi_series(A, B, p, z, tr) * qpoch_inf(z, p, tr);
        const Cplx rhs = phi_series(A2, B, p, zt, tr) * qpoch_inf(zt, p, tr);
        CHECK(rel(lhs, rhs) < 1e-10);
    }
}

TEST_CASE("determinism within one build") {
    Truncation tr;
    const Cplx p(0.31, 0.07), u(0.8, -0.4);
    const Cplx v1 = qpoch_inf(u, p, tr);
    const Cplx v2 = qpoch_inf(u, p, tr);
    CHECK(v1.real() == v2.real());
    CHECK(v1.imag() == v2.imag());
    const Cplx t1 = theta(u, p, tr), t2 = theta(u, p, tr);
    CHECK(t1 == t2);
}

TEST_CASE("lattice distance") {
    const Cplx p(0.3);
    CHECK(lattice_distance(Cplx(1.0), p) < 1e-15);
    CHECK(lattice_distance(Cplx(0.3), p) < 1e-15);
    CHECK(lattice_distance(Cplx(1.0) / (p * p * p), p) < 1e-12);
    CHECK(lattice_distance(Cplx(0.5, 0.5), p) > 0.1);
}
