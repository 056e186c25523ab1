#include <doctest.h>

#include <set>

#include "qhi/indexing.hpp"
#include "qhi/params.hpp"

using namespace qhi;

namespace {
double rel(Cplx a, Cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
}

TEST_CASE("composition enumeration") {
    const auto c21 = enumerate_compositions(2, 1);
    REQUIRE(c21.size() == 2);
    CHECK(c21[0].parts == std::vector<int>{1, 0});
    CHECK(c21[1].parts == std::vector<int>{0, 1});

    const auto c1 = enumerate_compositions(1, 5);
    REQUIRE(c1.size() == 1);
    CHECK(c1[0].parts == std::vector<int>{5});

    // brute force count of triples summing to 2
    int count = 0;
    for (int a = 0; a <= 2; ++a)
        for (int b = 0; b <= 2; ++b)
            for (int c = 0; c <= 2; ++c)
                if (a + b + c == 2) ++count;
    CHECK(static_cast<int>(enumerate_compositions(3, 2).size()) == count);
    CHECK(count == 6);

    for (int n = 1; n <= 5; ++n)
        for (int ell = 0; ell <= 6; ++ell) {
            const auto cs = enumerate_compositions(n, ell);
            CHECK(static_cast<long long>(cs.size()) == binomial(n + ell - 1, n - 1));
            // all distinct, all valid
            std::set<std::vector<int>> seen;
            for (const auto& c : cs) {
                CHECK(c.ell() == ell);
                seen.insert(c.parts);
            }
            CHECK(seen.size() == cs.size());
        }
}

TEST_CASE("inverse dominance ordering") {
    Composition a{{0, 2}}, b{{2, 0}};
    CHECK(dominance_ll(a, b));
    CHECK_FALSE(dominance_ll(b, a));
    Composition c{{1, 1, 0}}, d{{0, 1, 1}};
    CHECK_FALSE(dominance_ll(c, d));
    CHECK(dominance_ll(d, c));
    CHECK_THROWS(dominance_ll(a, a));

    // strict partial order: irreflexive (by precondition), antisymmetric, transitive
    for (int n = 2; n <= 4; ++n)
        for (int ell = 1; ell <= 4; ++ell) {
            const auto cs = enumerate_compositions(n, ell);
            const int N = static_cast<int>(cs.size());
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) {
                    if (i == j) continue;
                    const bool ij = dominance_ll(cs[i], cs[j]);
                    const bool ji = dominance_ll(cs[j], cs[i]);
                    CHECK_FALSE((ij && ji));  // antisymmetric
                    if (!ij) continue;
                    for (int k = 0; k < N; ++k) {
                        if (k == i || k == j) continue;
                        if (dominance_ll(cs[j], cs[k])) CHECK(dominance_ll(cs[i], cs[k]));
                    }
                }
        }
}

TEST_CASE("ladder points") {
    // n=1, ell=2, l=(2), x=(1), eta=2 -> (0.5, 1)
    Composition l2{{2}};
    std::vector<Cplx> x1{Cplx(1.0)};
    const auto pt = ladder_point(x1, l2, Cplx(2.0));
    REQUIRE(pt.coords.size() == 2);
    CHECK(rel(pt.coords[0], Cplx(0.5)) < 1e-15);
    CHECK(rel(pt.coords[1], Cplx(1.0)) < 1e-15);

    // all parts <= 1: coordinates are a sub-list of x
    Composition l11{{1, 1}};
    std::vector<Cplx> x2{Cplx(0.3, 0.1), Cplx(0.7, -0.2)};
    const auto pt2 = ladder_point(x2, l11, Cplx(2.0, 0.5));
    CHECK(pt2.coords[0] == x2[0]);
    CHECK(pt2.coords[1] == x2[1]);

    // shifted: zero shifts equal the plain point
    std::vector<int> zero{0, 0};
    const auto pt3 = shifted_ladder_point(x2, l11, zero, Cplx(2.0, 0.5), Cplx(0.2));
    CHECK(pt3.coords[0] == pt2.coords[0]);

    // n=1, ell=1, l=(1), s=(2) -> (p^2 x_1)
    Composition l1{{1}};
    std::vector<int> s2{2};
    const auto pt4 = shifted_ladder_point(x1, l1, s2, Cplx(2.0), Cplx(0.1));
    CHECK(rel(pt4.coords[0], Cplx(0.01)) < 1e-15);

    // n=1, ell=2, l=(2), s=(1,1), x=(1), eta=2, p=0.1: the displayed point is
    // (p^{s_1+s_2} eta^{-1} x, p^{s_2} x) = (0.005, 0.1)
    std::vector<int> s11{1, 1};
    const auto pt5 = shifted_ladder_point(x1, l2, s11, Cplx(2.0), Cplx(0.1));
    CHECK(rel(pt5.coords[0], Cplx(0.005)) < 1e-14);
    CHECK(rel(pt5.coords[1], Cplx(0.1)) < 1e-14);

    CHECK_THROWS(ladder_point(x1, l2, Cplx(0.0)));
}

namespace {

// apply [f]_sigma by definition, for an arbitrary numeric function
template <class F>
Cplx apply_bracket_rational(const F& f, const Perm& sigma, std::span<const Cplx> t, Cplx eta) {
    std::vector<Cplx> perm(t.size());
    for (std::size_t a = 0; a < t.size(); ++a) perm[a] = t[sigma[a]];
    return f(perm) * bracket_factor_rational(sigma, t, eta);
}

template <class F>
Cplx apply_bracket_theta(const F& f, const Perm& sigma, std::span<const Cplx> t, Cplx eta, Cplx p) {
    std::vector<Cplx> perm(t.size());
    for (std::size_t a = 0; a < t.size(); ++a) perm[a] = t[sigma[a]];
    return f(perm) * bracket_factor_theta(sigma, t, eta, p);
}

Perm compose(const Perm& tau, const Perm& sigma) {
    // (tau o sigma)(a) = tau[sigma[a]]
    Perm r(sigma.size());
    for (std::size_t a = 0; a < sigma.size(); ++a) r[a] = tau[sigma[a]];
    return r;
}

}  // namespace

TEST_CASE("bracket factors") {
    Rng rng(5);
    const Cplx eta(1.7, 0.4);
    std::vector<Cplx> t{Cplx(0.9, 0.2), Cplx(-0.4, 1.1)};

    Perm id{0, 1};
    CHECK(bracket_factor_rational(id, t, eta) == Cplx(1.0));
    Perm swp{1, 0};
    // single inversion: (t_1 - eta t_2)/(eta t_1 - t_2)
    const Cplx want = (t[0] - eta * t[1]) / (eta * t[0] - t[1]);
    CHECK(rel(bracket_factor_rational(swp, t, eta), want) < 1e-15);

    // elliptic single factor by hand
    const Cplx p(0.2, 0.1);
    const Cplx wantt = eta * theta(t[0] / (eta * t[1]), p) / theta(eta * t[0] / t[1], p);
    CHECK(rel(bracket_factor_theta(swp, t, eta, p), wantt) < 1e-13);

    // p = 0 degeneration: the theta factor equals the rational factor exactly
    std::vector<Cplx> t3{Cplx(1.2, 0.3), Cplx(-0.8, 0.9), Cplx(0.4, -1.0)};
    for (const auto& sigma : all_permutations(3)) {
        const Cplx a = bracket_factor_theta(sigma, t3, eta, Cplx(0.0));
        const Cplx b = bracket_factor_rational(sigma, t3, eta);
        CHECK(rel(a, b) < 1e-13);
    }
}

TEST_CASE("brackets define group actions on S3") {
    // [[f]_sigma]_tau = [f]_{tau o sigma} for both actions, random data
    const Cplx eta(2.1, -0.3);
    const Cplx p(0.25, 0.05);
    std::vector<Cplx> t{Cplx(1.1, 0.2), Cplx(-0.7, 0.8), Cplx(0.5, -1.2)};
    auto f = [](std::span<const Cplx> u) {
        return u[0] + Cplx(2.0) * u[1] * u[1] + Cplx(0.3, 1.0) * u[2] / u[0];
    };
    for (const auto& sigma : all_permutations(3))
        for (const auto& tau : all_permutations(3)) {
            // rational
            auto fs = [&](std::span<const Cplx> u) {
                return apply_bracket_rational(f, sigma, u, eta);
            };
            const Cplx lhs = apply_bracket_rational(fs, tau, t, eta);
            const Cplx rhs = apply_bracket_rational(f, compose(tau, sigma), t, eta);
            CHECK(rel(lhs, rhs) < 1e-12);
            // elliptic
            auto fse = [&](std::span<const Cplx> u) {
                return apply_bracket_theta(f, sigma, u, eta, p);
            };
            const Cplx lhe = apply_bracket_theta(fse, tau, t, eta, p);
            const Cplx rhe = apply_bracket_theta(f, compose(tau, sigma), t, eta, p);
            CHECK(rel(lhe, rhe) < 1e-11);
        }
}

TEST_CASE("d_exponent") {
    CHECK(d_exponent(2, 1, 1, 0) == 1);
    CHECK(d_exponent(3, 1, 2, 0) == 1);
    CHECK(d_exponent(4, 2, 3, 5) == 0);   // |s| >= ell
    CHECK(d_exponent(4, 2, 3, -3) == 0);
    CHECK_THROWS(d_exponent(3, 3, 2, 0));
    // hand enumeration for n=3, m=1, ell=3, s=1: (i,j) in {(1,0)}: C(1,0)...
    long long direct = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i + j < 3 && i - j == 1) direct += binomial(i, 0) * binomial(1 + j, 1);
    CHECK(d_exponent(3, 1, 3, 1) == direct);
}

TEST_CASE("combinatorial identity exhaustive") {
    CHECK(combi_identity_residual(0, 0, 0, 0) == 0);
    CHECK(combi_identity_residual(0, 0, 1, 0) == 0);
    for (int j = 0; j <= 8; ++j)
        for (int k = 0; k <= 8; ++k)
            for (int l = 0; l <= 8; ++l)
                for (int m = 0; m <= 8; ++m) CHECK(combi_identity_residual(j, k, l, m) == 0);
}
