#include <doctest.h>

#include "qhi/functions.hpp"
#include "qhi/structured.hpp"

using namespace qhi;

namespace {

double rel(Cplx a, Cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

ParameterSet simple_ps(int n, int ell, std::uint64_t seed = 11) {
    return sample_generic(n, ell, seed);
}

}  // namespace

TEST_CASE("scaled complex arithmetic") {
    ScaledCplx a = ScaledCplx::from(Cplx(3.0, 4.0));
    ScaledCplx b = a;
    for (int i = 0; i < 100; ++i) b *= a;  // |a|^101 ~ 5^101, far beyond double
    ScaledCplx c = b;
    for (int i = 0; i < 101; ++i) c *= a.inv();
    CHECK(rel(c.to_cplx(), Cplx(1.0)) < 1e-12);
    CHECK(rel(a.pow_int(3).to_cplx(), Cplx(3.0, 4.0) * Cplx(3.0, 4.0) * Cplx(3.0, 4.0)) < 1e-14);
    CHECK(rel(a.pow_int(-2).to_cplx(), Cplx(1.0) / (Cplx(3.0, 4.0) * Cplx(3.0, 4.0))) < 1e-14);
}

TEST_CASE("exact scalar tags and restricted rewrite") {
    ParameterSet ps;
    ps.n = 2;
    ps.ell = 2;
    ps.p = Cplx(0.2);
    ps.eta = Cplx(2.0, 0.3);
    ps.alpha = Cplx(1.1, -0.2);
    ps.x = {Cplx(0.5, 0.1), Cplx(0.4, -0.3)};
    ps.y = {Cplx(1.9, 0.4), Cplx(2.2, -0.1)};
    StructCtx ctx{&ps};

    ExactScalar s = ctx.x_pow(0, 1);
    s.mul(ctx.x_pow(0, -1));
    CHECK(s.is_exact_one());
    s.mul(ctx.p_pow(-2));
    CHECK(s.tags_trivial_but_p());
    CHECK(rel(s.value(ps), Cplx(25.0)) < 1e-14);

    // restricted: x_0 = eta^1 y_0 exactly; tags rewrite so x_0/(eta y_0) == 1
    ParameterSet rps = ps;
    rps.flag = GenericityFlag::Restricted;
    rps.ell_bounds = {1, 2};
    rps.x[0] = eta_pow_times(rps.y[0], rps.eta, 1);
    StructCtx rctx{&rps};
    ExactScalar r = rctx.x_pow(0, 1);
    r.mul(rctx.eta_pow(-1));
    r.mul(rctx.y_pow(0, -1));
    CHECK(r.is_exact_one());
}

TEST_CASE("iterated residue of the master product, ell = 1") {
    // Res_{t=x_1} t^{-1} Phi~ = 1 / ((p)_inf (x_1/y_1)_inf)
    ParameterSet ps = simple_ps(1, 1);
    Truncation tr;
    const TermFunction phit = tf_phase_phi_tilde(ps);
    ResidueWorkspace ws(ps, tr);
    const auto comps = enumerate_compositions(1, 1);
    std::vector<int> zero{0};
    const ExactPoint pt = exact_ladder(ps, comps[0], zero, LadderPoint::Base::X);
    const Cplx got = iterated_residue_exact(phit, true, pt, ws).to_cplx();
    const Cplx want =
        Cplx(1.0) / (qpoch_inf(ps.p, ps.p, tr) * qpoch_inf(ps.x[0] / ps.y[0], ps.p, tr));
    CHECK(rel(got, want) < 1e-13);

    // shifted point t = p x_1: the per-factor formula gains 1/(1-p^{-1}) and
    // the remaining factors evaluate at p x_1
    std::vector<int> one{1};
    const ExactPoint pt1 = exact_ladder(ps, comps[0], one, LadderPoint::Base::X);
    const Cplx got1 = iterated_residue_exact(phit, true, pt1, ws).to_cplx();
    const Cplx want1 = Cplx(1.0) / ((Cplx(1.0) - Cplx(1.0) / ps.p) * qpoch_inf(ps.p, ps.p, tr) *
                                    qpoch_inf(ps.p * ps.x[0] / ps.y[0], ps.p, tr));
    CHECK(rel(got1, want1) < 1e-13);
}

TEST_CASE("residue of a regular function vanishes") {
    ParameterSet ps = simple_ps(2, 1);
    Truncation tr;
    // w_l is regular at the x-ladder point of the other composition's y-pole:
    // simplest regular case: the numerator-only function 1 - t/y_1
    StructCtx ctx{&ps};
    TermFunction f;
    f.ell = 1;
    Term t;
    Atom a;
    a.kind = AtomKind::OneMinus;
    a.c.mul(ctx.y_pow(0, -1));
    a.tpow[0] = 1;
    t.atoms.push_back(a);
    f.terms.push_back(t);
    ResidueWorkspace ws(ps, tr);
    const auto comps = enumerate_compositions(2, 1);
    std::vector<int> zero{0};
    const ExactPoint pt = exact_ladder(ps, comps[0], zero, LadderPoint::Base::X);
    CHECK(iterated_residue_exact(f, true, pt, ws).to_cplx() == Cplx(0.0));
}

TEST_CASE("non-simple pole detected") {
    ParameterSet ps = simple_ps(1, 1);
    Truncation tr;
    StructCtx ctx{&ps};
    TermFunction f;
    f.ell = 1;
    Term t;
    Atom a;
    a.kind = AtomKind::OneMinus;
    a.power = -2;
    a.c.mul(ctx.x_pow(0, -1));
    a.tpow[0] = 1;
    t.atoms.push_back(a);
    f.terms.push_back(t);
    ResidueWorkspace ws(ps, tr);
    const auto comps = enumerate_compositions(1, 1);
    std::vector<int> zero{0};
    const ExactPoint pt = exact_ladder(ps, comps[0], zero, LadderPoint::Base::X);
    CHECK_THROWS_AS(iterated_residue_exact(f, true, pt, ws), NonSimplePoleError);
}

TEST_CASE("numeric engine agrees with the exact engine") {
    // product w'_l w_l has simple poles on the unshifted x-ladder with
    // nonzero residues; both residue routes must agree point by point
    ParameterSet ps = simple_ps(2, 2, 23);
    Truncation tr;
    const auto comps = enumerate_compositions(2, 2);
    for (const auto& label : {comps[0], comps[1]}) {
        const TermFunction f =
            tf_product(tf_weight_w_prime(label, ps, tr), tf_weight_w(label, ps, tr));
        ResidueWorkspace ws(ps, tr);
        std::vector<int> zero{0, 0};
        double scale = 0.0;
        std::vector<Cplx> exact(comps.size());
        for (std::size_t i = 0; i < comps.size(); ++i) {
            const ExactPoint pt = exact_ladder(ps, comps[i], zero, LadderPoint::Base::X);
            exact[i] = iterated_residue_exact(f, true, pt, ws).to_cplx();
            scale = std::max(scale, std::abs(exact[i]));
        }
        REQUIRE(scale > 0.0);
        StructuredFunction sf(f, ps, tr);
        for (std::size_t i = 0; i < comps.size(); ++i) {
            const ExactPoint pt = exact_ladder(ps, comps[i], zero, LadderPoint::Base::X);
            ResidueScheme scheme;
            scheme.force_numeric = true;
            double agree = 0.0;
            const Cplx numeric =
                multiple_residue_numeric(sf, true, pt.numeric, scheme, &agree, &ps);
            CHECK(std::abs(exact[i] - numeric) / scale < 1e-6);
            if (std::abs(exact[i]) > 1e-6 * scale) CHECK(agree < 1e-4);
        }
    }
}

TEST_CASE("engines agree on shifted and y-ladder points") {
    ParameterSet ps = simple_ps(2, 2, 29);
    Truncation tr;
    const auto comps = enumerate_compositions(2, 2);
    const TermFunction h = tf_product(
        tf_product(tf_weight_W(comps[1], ps, tr), tf_weight_w(comps[1], ps, tr)),
        tf_phase_phi(ps));
    StructuredFunction sh(h, ps, tr);
    ResidueWorkspace ws(ps, tr);
    ResidueScheme scheme;
    scheme.force_numeric = true;
    for (const auto& comp : comps) {
        for (std::vector<int> s : {std::vector<int>{1, 0}, std::vector<int>{2, 1}}) {
            const ExactPoint pt = exact_ladder(ps, comp, s, LadderPoint::Base::X);
            const Cplx exact = iterated_residue_exact(h, true, pt, ws).to_cplx();
            const Cplx numeric = multiple_residue_numeric(sh, true, pt.numeric, scheme, nullptr, &ps);
            const double scale = std::max({std::abs(exact), std::abs(numeric), 1e-10});
            CHECK(std::abs(exact - numeric) / scale < 1e-5);
        }
    }
    // y-ladders carry the eta^{-1} structure; use the primed-frame integrand
    const TermFunction hp = tf_product(
        tf_product(tf_weight_W_prime(comps[0], ps, tr), tf_weight_w_prime(comps[0], ps, tr)),
        tf_phase_phi(ps, FrameView{true}));
    StructuredFunction shp(hp, ps, tr);
    for (const auto& comp : comps) {
        std::vector<int> s{1, 0};
        const ExactPoint pt = exact_ladder(ps, comp, s, LadderPoint::Base::Y);
        const Cplx exact = iterated_residue_exact(hp, true, pt, ws).to_cplx();
        const Cplx numeric = multiple_residue_numeric(shp, true, pt.numeric, scheme, nullptr, &ps);
        const double scale = std::max({std::abs(exact), std::abs(numeric), 1e-10});
        CHECK(std::abs(exact - numeric) / scale < 1e-5);
    }
}

TEST_CASE("multiple_residue front door uses structure when present") {
    ParameterSet ps = simple_ps(1, 1, 5);
    Truncation tr;
    // t^{-1} Phi~ packaged with the measure as explicit Mono atoms
    TermFunction f = tf_phase_phi_tilde(ps);
    for (auto& term : f.terms) {
        Atom a;
        a.kind = AtomKind::Mono;
        a.power = -1;
        a.tpow[0] = 1;
        term.atoms.push_back(a);
    }
    StructuredFunction sf(f, ps, tr);
    const auto comps = enumerate_compositions(1, 1);
    const LadderPoint pt = ladder_point(ps.x, comps[0], ps.eta);
    double agree = -1.0;
    const Cplx got = multiple_residue(sf, pt, ps, tr, {}, &agree);
    CHECK(agree == 0.0);  // exact route
    const Cplx want =
        Cplx(1.0) / (qpoch_inf(ps.p, ps.p, tr) * qpoch_inf(ps.x[0] / ps.y[0], ps.p, tr));
    CHECK(rel(got, want) < 1e-13);

    // numeric route through the same front door
    ResidueScheme scheme;
    scheme.force_numeric = true;
    const Cplx got2 = multiple_residue(sf, pt, ps, tr, scheme, &agree);
    CHECK(rel(got2, want) < 1e-7);
    CHECK(agree >= 0.0);
}

TEST_CASE("term function evaluation matches factor-by-factor oracle") {
    ParameterSet ps = simple_ps(2, 2, 31);
    Truncation tr;
    const TermFunction phi = tf_phase_phi(ps);
    std::vector<Cplx> t{Cplx(1.05, 0.4), Cplx(-0.8, 0.85)};
    Cplx oracle(1.0);
    for (int m = 0; m < 2; ++m)
        for (int a = 0; a < 2; ++a)
            oracle *= qpoch_inf(t[a] / ps.x[m], ps.p, tr) / qpoch_inf(t[a] / ps.y[m], ps.p, tr);
    oracle *= qpoch_inf(ps.eta * t[0] / t[1], ps.p, tr) /
              qpoch_inf(t[0] / (ps.eta * t[1]), ps.p, tr);
    CHECK(rel(phi.evaluate(t, ps, tr), oracle) < 1e-13);
}
