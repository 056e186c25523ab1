#include <doctest.h>

#include "qhi/params.hpp"
#include "qhi/pairings.hpp"

using namespace qhi;

TEST_CASE("sampling determinism and self-consistency") {
    const ParameterSet a = sample_generic(2, 2, 7);
    const ParameterSet b = sample_generic(2, 2, 7);
    CHECK(a.p == b.p);
    CHECK(a.eta == b.eta);
    CHECK(a.alpha == b.alpha);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.flag == GenericityFlag::Generic);
    CHECK(check_generic(a).empty());

    // n=1, ell=1 succeeds essentially immediately
    const ParameterSet c = sample_generic(1, 1, 3);
    CHECK(check_generic(c).empty());
}

TEST_CASE("sampled sets are generic over many seeds") {
    for (int n = 1; n <= 3; ++n)
        for (int ell = 1; ell <= 3; ++ell)
            for (std::uint64_t seed = 0; seed < 1000; seed += 1) {
                const ParameterSet ps = sample_generic(n, ell, seed);
                if (!check_generic(ps).empty()) {
                    CAPTURE(n);
                    CAPTURE(ell);
                    CAPTURE(seed);
                    CHECK(false);
                }
            }
}

TEST_CASE("genericity violations are reported") {
    ParameterSet ps = sample_generic(2, 2, 11);
    ps.x[0] = ps.y[0];  // r = 0: x_1/y_1 = 1 in p^Z
    auto v = check_generic(ps);
    CHECK(!v.empty());

    ParameterSet ps2 = sample_generic(2, 2, 12);
    ps2.eta = Cplx(1.0);  // eta^{r+1} at r = 0
    CHECK(!check_generic(ps2).empty());
}

TEST_CASE("restricted construction") {
    const ParameterSet base = sample_generic(2, 2, 5);
    const ParameterSet ps =
        build_restricted(base.y, base.eta, {1, 2}, base.alpha, base.p, 5, base.lattice_margin);
    CHECK(ps.flag == GenericityFlag::Restricted);
    // x_1 = eta y_1 exactly (same multiplication order)
    CHECK(ps.x[0] == eta_pow_times(ps.y[0], ps.eta, 1));
    const Cplx ratio = ps.x[0] / (ps.eta * ps.y[0]);
    CHECK(std::abs(ratio - Cplx(1.0)) < 4e-16);
    // fails the full genericity but passes the weakened conditions
    CHECK(!check_generic(ps).empty());
    CHECK(check_gene(ps, {1, 2}).empty());
}

TEST_CASE("convergence margins") {
    ParameterSet ps = sample_generic(2, 1, 9);
    // p -> 0 makes the x-side margin huge
    ParameterSet small = ps;
    small.p = Cplx(1e-8);
    const Cplx A = Cplx(0.5, 0.1);
    CHECK(convergence_margin(small, A, small.n - 1, JacksonSide::X) > 1e6);

    // boundary equality -> margin 1
    ParameterSet b = ps;
    double px = 1.0;
    for (auto& v : b.x) px *= std::abs(v);
    const double bound = std::min(1.0, std::pow(std::abs(b.eta), 1 - b.ell));
    const Cplx Ab = bound * px / std::pow(std::abs(b.p), b.n);
    CHECK(convergence_margin(b, Ab, b.n - 1, JacksonSide::X) == doctest::Approx(1.0));

    // a sampled admissible set has margin > 1 through at least one side of
    // both pairings (enforced by the sampler)
    const PairingDomain d1 = pairing_domain(ps, FrameView{false}, +1);
    const PairingDomain d2 = pairing_domain(ps, FrameView{true}, -1, true);
    CHECK(std::max(d1.margin_x, d1.margin_y) > 1.0);
    CHECK(std::max(d2.margin_x, d2.margin_y) > 1.0);
}

TEST_CASE("JSON round trip is bit-exact") {
    const ParameterSet ps = sample_generic(3, 2, 17);
    const std::string text = save_params_json(ps);
    const ParameterSet back = load_params_json(text);
    CHECK(back.p == ps.p);
    CHECK(back.eta == ps.eta);
    CHECK(back.alpha == ps.alpha);
    CHECK(back.x == ps.x);
    CHECK(back.y == ps.y);
    CHECK(back.n == ps.n);
    CHECK(back.ell == ps.ell);
    CHECK(back.flag == ps.flag);
    // twice through the encoder is identical text
    CHECK(save_params_json(back) == text);
}
