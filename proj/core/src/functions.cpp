#include "qhi/functions.hpp"

#include <algorithm>
#include <cmath>

namespace qhi {

namespace {

struct FrameOps {
    const ParameterSet& ps;
    StructCtx ctx;
    bool sw;

    FrameOps(const ParameterSet& p, FrameView v) : ps(p), ctx{&p}, sw(v.swapped) {}

    Cplx eta() const { return sw ? Cplx(1.0) / ps.eta : ps.eta; }
    ExactScalar X(int m, int k) const { return sw ? ctx.y_pow(m, k) : ctx.x_pow(m, k); }
    ExactScalar Y(int m, int k) const { return sw ? ctx.x_pow(m, k) : ctx.y_pow(m, k); }
    ExactScalar E(int k) const { return ctx.eta_pow(sw ? -k : k); }
    ExactScalar AL(int k) const { return ctx.alpha_pow(sw ? -k : k); }
    Cplx Xv(int m) const { return sw ? ps.y[m] : ps.x[m]; }
    Cplx Yv(int m) const { return sw ? ps.x[m] : ps.y[m]; }
};

Atom make_atom(AtomKind kind, ExactScalar c, int power) {
    Atom a;
    a.kind = kind;
    a.power = power;
    a.c = std::move(c);
    return a;
}

Atom with_t(Atom a, int var, int k) {
    a.tpow[var] = static_cast<int8_t>(a.tpow[var] + k);
    return a;
}

// (t_var - c-tagged scalar) = (-c) * (1 - t_var / c); pushes the OneMinus atom
// and returns the numeric factor (-c_value).
Cplx push_lin_t_minus(std::vector<Atom>& atoms, int var, const ExactScalar& c,
                      const ParameterSet& ps, int power) {
    // argument t / c : negate the tag powers
    ExactScalar arg;
    arg.mul(c, -1);
    atoms.push_back(with_t(make_atom(AtomKind::OneMinus, arg, power), var, 1));
    const Cplx cv = c.value(ps);
    Cplx f = -cv;
    if (power < 0) f = Cplx(1.0) / f;
    Cplx out(1.0);
    for (int i = 0; i < std::abs(power); ++i) out *= f;
    return out;
}

long factorial(int k) {
    long r = 1;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

}  // namespace

// --- phase functions -------------------------------------------------------

TermFunction tf_phase_phi(const ParameterSet& ps, FrameView view) {
    FrameOps F(ps, view);
    const int n = ps.n, ell = ps.ell;
    TermFunction f;
    f.ell = ell;
    Term t;
    for (int m = 0; m < n; ++m)
        for (int a = 0; a < ell; ++a) {
            t.atoms.push_back(with_t(make_atom(AtomKind::Poch, F.X(m, -1), +1), a, 1));
            t.atoms.push_back(with_t(make_atom(AtomKind::Poch, F.Y(m, -1), -1), a, 1));
        }
    for (int a = 0; a < ell; ++a)
        for (int b = a + 1; b < ell; ++b) {
            t.atoms.push_back(with_t(with_t(make_atom(AtomKind::Poch, F.E(1), +1), a, 1), b, -1));
            t.atoms.push_back(with_t(with_t(make_atom(AtomKind::Poch, F.E(-1), -1), a, 1), b, -1));
        }
    f.terms.push_back(std::move(t));
    return f;
}

TermFunction tf_phase_phi_tilde(const ParameterSet& ps, FrameView view) {
    FrameOps F(ps, view);
    const int n = ps.n, ell = ps.ell;
    TermFunction f;
    f.ell = ell;
    Term t;
    for (int m = 0; m < n; ++m)
        for (int a = 0; a < ell; ++a) {
            t.atoms.push_back(with_t(make_atom(AtomKind::Poch, F.X(m, 1), -1), a, -1));
            t.atoms.push_back(with_t(make_atom(AtomKind::Poch, F.Y(m, -1), -1), a, 1));
        }
    for (int a = 0; a < ell; ++a)
        for (int b = 0; b < ell; ++b) {
            if (a == b) continue;
            t.atoms.push_back(with_t(with_t(make_atom(AtomKind::Poch, F.E(-1), -1), a, 1), b, -1));
        }
    f.terms.push_back(std::move(t));
    return f;
}

// --- weight functions ------------------------------------------------------

namespace {

// common prefactor prod_m prod_{s=1}^{l_m} pref(eta, s)
template <class Pref>
Cplx block_prefactor(const Composition& comp, Pref&& pref) {
    Cplx c(1.0);
    for (int m = 0; m < comp.n(); ++m)
        for (int s = 1; s <= comp.parts[m]; ++s) c *= pref(s);
    return c;
}

// rational bracket factor for sigma, as atoms: per inversion (a<b, s_a>s_b)
//   (t_{s_b} - eta t_{s_a}) / (eta t_{s_b} - t_{s_a})
//   = eta^{-1} (1 - eta t_{s_a}/t_{s_b}) / (1 - eta^{-1} t_{s_a}/t_{s_b})
void push_bracket_rational(std::vector<Atom>& atoms, Cplx& coef, const Perm& sigma,
                           const FrameOps& F) {
    const int ell = static_cast<int>(sigma.size());
    for (int a = 0; a < ell; ++a)
        for (int b = a + 1; b < ell; ++b) {
            if (sigma[a] <= sigma[b]) continue;
            coef /= F.eta();
            atoms.push_back(
                with_t(with_t(make_atom(AtomKind::OneMinus, F.E(1), +1), sigma[a], 1), sigma[b], -1));
            atoms.push_back(
                with_t(with_t(make_atom(AtomKind::OneMinus, F.E(-1), -1), sigma[a], 1), sigma[b], -1));
        }
}

// elliptic bracket: per inversion  eta theta(eta^{-1} t_{s_b}/t_{s_a}) / theta(eta t_{s_b}/t_{s_a})
void push_bracket_theta(std::vector<Atom>& atoms, Cplx& coef, const Perm& sigma,
                        const FrameOps& F) {
    const int ell = static_cast<int>(sigma.size());
    for (int a = 0; a < ell; ++a)
        for (int b = a + 1; b < ell; ++b) {
            if (sigma[a] <= sigma[b]) continue;
            coef *= F.eta();
            atoms.push_back(
                with_t(with_t(make_atom(AtomKind::Theta, F.E(-1), +1), sigma[b], 1), sigma[a], -1));
            atoms.push_back(
                with_t(with_t(make_atom(AtomKind::Theta, F.E(1), -1), sigma[b], 1), sigma[a], -1));
        }
}

}  // namespace

TermFunction tf_weight_w(const Composition& comp, const ParameterSet& ps, const Truncation&,
                         FrameView view) {
    FrameOps F(ps, view);
    const int n = comp.n(), ell = comp.ell();
    TermFunction f;
    f.ell = ell;
    const Cplx eta = F.eta();
    const Cplx pref = block_prefactor(comp, [&](int s) {
        Cplx es(1.0);
        for (int i = 0; i < s; ++i) es *= eta;
        return (Cplx(1.0) - eta) / (Cplx(1.0) - es);
    });

    for (const Perm& sigma : all_permutations(ell)) {
        Term t;
        t.coef = pref;
        for (int m = 0; m < n; ++m) {
            const int lo = comp.partial(m), hi = comp.partial(m + 1);
            for (int a = lo; a < hi; ++a) {
                const int v = sigma[a];
                // t_v / (t_v - x_m)
                t.atoms.push_back(with_t(make_atom(AtomKind::Mono, F.ctx.one(), 1), v, 1));
                t.coef *= push_lin_t_minus(t.atoms, v, F.X(m, 1), ps, -1);
                for (int l = 0; l < m; ++l) {
                    t.coef *= push_lin_t_minus(t.atoms, v, F.Y(l, 1), ps, +1);
                    t.coef *= push_lin_t_minus(t.atoms, v, F.X(l, 1), ps, -1);
                }
            }
        }
        push_bracket_rational(t.atoms, t.coef, sigma, F);
        f.terms.push_back(std::move(t));
    }
    return f;
}

TermFunction tf_weight_w_prime(const Composition& comp, const ParameterSet& ps,
                               const Truncation& trunc) {
    TermFunction f = tf_weight_w(comp, ps, trunc, FrameView{true});
    // prod_m y_m^{l_m} * prod_a t_a^{-1}
    Cplx c(1.0);
    for (int m = 0; m < comp.n(); ++m)
        for (int i = 0; i < comp.parts[m]; ++i) c *= ps.y[m];
    StructCtx ctx{&ps};
    for (auto& term : f.terms) {
        term.coef *= c;
        for (int a = 0; a < f.ell; ++a)
            term.atoms.push_back(with_t(make_atom(AtomKind::Mono, ctx.one(), -1), a, 1));
    }
    return f;
}

TermFunction tf_weight_W(const Composition& comp, const ParameterSet& ps, const Truncation& trunc,
                         FrameView view) {
    FrameOps F(ps, view);
    const int n = comp.n(), ell = comp.ell();
    TermFunction f;
    f.ell = ell;
    f.elliptic = EllipticTag{view.swapped ? -1 : +1, view.swapped};
    const Cplx eta = F.eta();
    const Cplx th_eta = theta(eta, ps.p, trunc);
    const Cplx pref = block_prefactor(comp, [&](int s) {
        Cplx es(1.0);
        for (int i = 0; i < s; ++i) es *= eta;
        return th_eta / theta(es, ps.p, trunc);
    });

    for (const Perm& sigma : all_permutations(ell)) {
        Term t;
        t.coef = pref;
        for (int m = 0; m < n; ++m) {
            const int lo = comp.partial(m), hi = comp.partial(m + 1);
            for (int a = lo; a < hi; ++a) {
                const int v = sigma[a];
                // theta(eta^{2a-2} alpha_m^{-1} t_v / x_m) / theta(t_v / x_m)
                // with alpha_m = alpha prod_{l<m} x_l / y_l  (frame objects)
                ExactScalar arg = F.E(2 * (a + 1) - 2);
                arg.mul(F.AL(-1));
                for (int l = 0; l < m; ++l) {
                    arg.mul(F.X(l, -1));
                    arg.mul(F.Y(l, 1));
                }
                arg.mul(F.X(m, -1));
                t.atoms.push_back(with_t(make_atom(AtomKind::Theta, arg, +1), v, 1));
                t.atoms.push_back(with_t(make_atom(AtomKind::Theta, F.X(m, -1), -1), v, 1));
                for (int l = 0; l < m; ++l) {
                    t.atoms.push_back(with_t(make_atom(AtomKind::Theta, F.Y(l, -1), +1), v, 1));
                    t.atoms.push_back(with_t(make_atom(AtomKind::Theta, F.X(l, -1), -1), v, 1));
                }
            }
        }
        push_bracket_theta(t.atoms, t.coef, sigma, F);
        f.terms.push_back(std::move(t));
    }
    return f;
}

TermFunction tf_weight_W_prime(const Composition& comp, const ParameterSet& ps,
                               const Truncation& trunc) {
    return tf_weight_W(comp, ps, trunc, FrameView{true});
}

// --- g / G bases ------------------------------------------------------------

TermFunction tf_basis_g(const Composition& comp, const ParameterSet& ps, FrameView view) {
    FrameOps F(ps, view);
    const int n = comp.n(), ell = comp.ell();
    TermFunction f;
    f.ell = ell;
    Cplx pref(1.0);
    for (int m = 0; m < n; ++m) pref /= static_cast<double>(factorial(comp.parts[m]));

    for (const Perm& sigma : all_permutations(ell)) {
        Term t;
        t.coef = pref;
        for (int m = 0; m < n; ++m)
            for (int a = 0; a < ell; ++a) t.coef *= push_lin_t_minus(t.atoms, a, F.X(m, 1), ps, -1);
        for (int a = 0; a < ell; ++a)
            for (int b = a + 1; b < ell; ++b) {
                // (t_a - t_b)/(eta t_a - t_b) = eta^{-1} (1 - t_b/t_a)/(1 - eta^{-1} t_b/t_a)
                t.coef /= F.eta();
                t.atoms.push_back(
                    with_t(with_t(make_atom(AtomKind::OneMinus, F.ctx.one(), +1), b, 1), a, -1));
                t.atoms.push_back(
                    with_t(with_t(make_atom(AtomKind::OneMinus, F.E(-1), -1), b, 1), a, -1));
            }
        for (int m = 0; m < n; ++m) {
            const int lo = comp.partial(m), hi = comp.partial(m + 1);
            for (int a = lo; a < hi; ++a)
                t.atoms.push_back(with_t(make_atom(AtomKind::Mono, F.ctx.one(), 1), sigma[a], m + 1));
        }
        f.terms.push_back(std::move(t));
    }
    return f;
}

ThetaRoots theta_roots(const ParameterSet& ps, FrameView view) {
    FrameOps F(ps, view);
    const int n = ps.n, ell = ps.ell;
    ThetaRoots r;
    Cplx A = view.swapped ? Cplx(1.0) / ps.alpha : ps.alpha;
    const Cplx eta = F.eta();
    for (int i = 0; i < ell - 1; ++i) A /= eta;
    for (int m = 0; m < n; ++m) A *= F.Xv(m);
    r.A = A;
    r.xi = std::pow(ps.p, Cplx(1.0 / n));
    r.zeta = std::pow(-Cplx(1.0) / A, Cplx(1.0 / n));
    r.omega = std::polar(1.0, 2.0 * M_PI / n);
    return r;
}

Cplx theta_basis(int l, Cplx u, const ThetaRoots& roots, Cplx p, const Truncation& trunc) {
    if (u == Cplx(0)) throw DomainError("theta_basis: zero argument");
    const int n = std::max(1, static_cast<int>(std::lround(2.0 * M_PI / std::arg(roots.omega))));
    Cplx v(1.0);
    for (int i = 1; i < l; ++i) v *= u;
    Cplx xl(1.0);
    for (int i = 1; i < l; ++i) xl *= roots.xi;
    Cplx om = roots.omega;
    for (int m = 1; m <= n; ++m) {
        v *= theta(-roots.zeta * xl * om * u, p, trunc);
        om *= roots.omega;
    }
    return v;
}

TermFunction tf_basis_G(const Composition& comp, const ParameterSet& ps, const ThetaRoots& roots,
                        FrameView view) {
    FrameOps F(ps, view);
    const int n = comp.n(), ell = comp.ell();
    TermFunction f;
    f.ell = ell;
    f.elliptic = EllipticTag{view.swapped ? -1 : +1, view.swapped};
    Cplx pref(1.0);
    for (int m = 0; m < n; ++m) pref /= static_cast<double>(factorial(comp.parts[m]));

    for (const Perm& sigma : all_permutations(ell)) {
        Term t;
        t.coef = pref;
        for (int m = 0; m < n; ++m)
            for (int a = 0; a < ell; ++a)
                t.atoms.push_back(with_t(make_atom(AtomKind::Theta, F.X(m, -1), -1), a, 1));
        for (int a = 0; a < ell; ++a)
            for (int b = a + 1; b < ell; ++b) {
                t.atoms.push_back(
                    with_t(with_t(make_atom(AtomKind::Theta, F.ctx.one(), +1), a, 1), b, -1));
                t.atoms.push_back(with_t(with_t(make_atom(AtomKind::Theta, F.E(1), -1), a, 1), b, -1));
            }
        for (int m = 0; m < n; ++m) {
            const int lo = comp.partial(m), hi = comp.partial(m + 1);
            for (int a = lo; a < hi; ++a) {
                const int v = sigma[a];
                // theta_{m+1}(t_v) = t_v^m prod_{j=1..n} theta(-zeta xi^m omega^j t_v)
                if (m > 0) t.atoms.push_back(with_t(make_atom(AtomKind::Mono, F.ctx.one(), m), v, 1));
                Cplx xl(1.0);
                for (int i = 0; i < m; ++i) xl *= roots.xi;
                Cplx om = roots.omega;
                for (int j = 1; j <= n; ++j) {
                    t.atoms.push_back(
                        with_t(make_atom(AtomKind::Theta, F.ctx.generic(-roots.zeta * xl * om), 1), v, 1));
                    om *= roots.omega;
                }
            }
        }
        f.terms.push_back(std::move(t));
    }
    return f;
}

// --- one-dimensional functions ----------------------------------------------

TermFunction tf_onedim_f(int k, const ParameterSet& ps) {
    StructCtx ctx{&ps};
    const int n = ps.n;
    TermFunction f;
    f.ell = 1;
    Term t;
    t.coef = Cplx(1.0) / ps.y[k];
    t.atoms.push_back(with_t(make_atom(AtomKind::Mono, ctx.one(), 1), 0, 1));
    for (int m = 0; m < n; ++m) {
        t.coef *= (ps.y[k] - ps.x[m]);
        t.coef *= push_lin_t_minus(t.atoms, 0, ctx.x_pow(m, 1), ps, -1);
    }
    for (int m = 0; m < n; ++m) {
        if (m == k) continue;
        t.coef /= (ps.y[k] - ps.y[m]);
        t.coef *= push_lin_t_minus(t.atoms, 0, ctx.y_pow(m, 1), ps, +1);
    }
    f.terms.push_back(std::move(t));
    return f;
}

TermFunction tf_onedim_f_prime(int k, const ParameterSet& ps) {
    StructCtx ctx{&ps};
    TermFunction f;
    f.ell = 1;
    Term t;
    t.coef = ps.y[k];
    t.coef *= push_lin_t_minus(t.atoms, 0, ctx.y_pow(k, 1), ps, -1);
    f.terms.push_back(std::move(t));
    return f;
}

TermFunction tf_onedim_F(int k, const ParameterSet& ps, const Truncation& trunc) {
    StructCtx ctx{&ps};
    const int n = ps.n;
    TermFunction f;
    f.ell = 1;
    f.elliptic = EllipticTag{+1, false};
    Term t;
    const Cplx pp = qpoch_inf(ps.p, ps.p, trunc);
    Cplx alpha_t = ps.alpha;  // alpha~ = alpha prod x_m / y_m
    for (int m = 0; m < n; ++m) alpha_t *= ps.x[m] / ps.y[m];
    t.coef = pp * pp / theta(Cplx(1.0) / alpha_t, ps.p, trunc);
    // theta(alpha~^{-1} t / y_k)
    ExactScalar arg = ctx.alpha_pow(-1);
    for (int m = 0; m < n; ++m) {
        arg.mul(ctx.x_pow(m, -1));
        arg.mul(ctx.y_pow(m, 1));
    }
    arg.mul(ctx.y_pow(k, -1));
    t.atoms.push_back(with_t(make_atom(AtomKind::Theta, arg, +1), 0, 1));
    for (int m = 0; m < n; ++m) {
        t.coef *= qpoch_inf(ps.p * ps.x[m] / ps.y[k], ps.p, trunc);
        t.atoms.push_back(with_t(make_atom(AtomKind::Theta, ctx.x_pow(m, -1), -1), 0, 1));
    }
    for (int m = 0; m < n; ++m) {
        if (m == k) continue;
        t.coef /= qpoch_inf(ps.p * ps.y[m] / ps.y[k], ps.p, trunc);
        t.atoms.push_back(with_t(make_atom(AtomKind::Theta, ctx.y_pow(m, -1), +1), 0, 1));
    }
    f.terms.push_back(std::move(t));
    return f;
}

TermFunction tf_onedim_F_prime(int k, const ParameterSet& ps, const Truncation& trunc) {
    StructCtx ctx{&ps};
    const int n = ps.n;
    TermFunction f;
    f.ell = 1;
    f.elliptic = EllipticTag{-1, true};
    Term t;
    const Cplx pp = qpoch_inf(ps.p, ps.p, trunc);
    t.coef = pp * pp / theta(ps.alpha, ps.p, trunc);
    ExactScalar arg = ctx.alpha_pow(1);
    arg.mul(ctx.y_pow(k, -1));
    t.atoms.push_back(with_t(make_atom(AtomKind::Theta, arg, +1), 0, 1));
    t.atoms.push_back(with_t(make_atom(AtomKind::Theta, ctx.y_pow(k, -1), -1), 0, 1));
    for (int m = 0; m < n; ++m) t.coef *= qpoch_inf(ps.y[k] / ps.x[m], ps.p, trunc);
    for (int m = 0; m < n; ++m) {
        if (m == k) continue;
        t.coef /= qpoch_inf(ps.y[k] / ps.y[m], ps.p, trunc);
    }
    f.terms.push_back(std::move(t));
    return f;
}

// --- collocation -------------------------------------------------------------

namespace {

std::vector<TermFunction> space_basis(SpaceTag tag, const ParameterSet& ps, const Truncation& trunc,
                                      const std::vector<Composition>& order) {
    std::vector<TermFunction> basis;
    basis.reserve(order.size());
    for (const auto& c : order) {
        switch (tag) {
            case SpaceTag::TrigW: basis.push_back(tf_weight_w(c, ps, trunc)); break;
            case SpaceTag::TrigWPrime: basis.push_back(tf_weight_w_prime(c, ps, trunc)); break;
            case SpaceTag::EllW: basis.push_back(tf_weight_W(c, ps, trunc)); break;
            case SpaceTag::EllWPrime: basis.push_back(tf_weight_W_prime(c, ps, trunc)); break;
            case SpaceTag::TrigG: basis.push_back(tf_basis_g(c, ps)); break;
            case SpaceTag::EllG: basis.push_back(tf_basis_G(c, ps, theta_roots(ps), FrameView{})); break;
        }
    }
    return basis;
}

// sample point rejection: keep coordinates away from the declared pole
// families  t_a ~ p^s x_m, t_a ~ p^s y_m, t_a ~ p^s eta^{+-1} t_b, t_a ~ t_b.
bool point_ok(const std::vector<Cplx>& t, const ParameterSet& ps, double margin) {
    const int ell = static_cast<int>(t.size());
    for (int a = 0; a < ell; ++a) {
        for (int m = 0; m < ps.n; ++m) {
            if (lattice_distance(t[a] / ps.x[m], ps.p) < margin) return false;
            if (lattice_distance(t[a] / ps.y[m], ps.p) < margin) return false;
        }
        for (int b = 0; b < ell; ++b) {
            if (a == b) continue;
            if (lattice_distance(t[a] / t[b], ps.p) < margin) return false;
            if (lattice_distance(ps.eta * t[a] / t[b], ps.p) < margin) return false;
            if (lattice_distance(t[a] / (ps.eta * t[b]), ps.p) < margin) return false;
        }
    }
    return true;
}

std::vector<Cplx> sample_point(Rng& rng, int ell, const ParameterSet& ps,
                               const CollocationOptions& opt) {
    std::vector<Cplx> t(ell);
    for (int tries = 0; tries < 500; ++tries) {
        for (int a = 0; a < ell; ++a)
            t[a] = rng.uniform(opt.sample_lo, opt.sample_hi) * rng.unit_phase();
        if (point_ok(t, ps, opt.pole_margin)) return t;
    }
    throw ConditioningError("collocation: could not sample a pole-free point");
}

}  // namespace

CollocationFrame build_collocation(SpaceTag tag, const ParameterSet& ps, std::uint64_t seed,
                                   const Truncation& trunc, const CollocationOptions& opt) {
    ps.validate();
    CollocationFrame fr;
    fr.n = ps.n;
    fr.ell = ps.ell;
    fr.tag = tag;
    fr.order = enumerate_compositions(ps.n, ps.ell);
    fr.dim = static_cast<int>(fr.order.size());
    fr.ps = ps;
    fr.trunc = trunc;
    fr.basis = space_basis(tag, ps, trunc, fr.order);

    const int N = fr.dim;
    double best_cond = std::numeric_limits<double>::infinity();
    CollocationFrame best;
    Rng rng(seed ^ 0xc011c011u);
    for (int attempt = 0; attempt < opt.max_retries; ++attempt) {
        fr.samples.clear();
        fr.validation.clear();
        for (int i = 0; i < N; ++i) fr.samples.push_back(sample_point(rng, ps.ell, ps, opt));
        for (int i = 0; i < 2 * N; ++i) fr.validation.push_back(sample_point(rng, ps.ell, ps, opt));
        fr.basis_matrix.resize(N, N);
        fr.validation_matrix.resize(2 * N, N);
        for (int j = 0; j < N; ++j) {
            for (int i = 0; i < N; ++i)
                fr.basis_matrix(i, j) = fr.basis[j].evaluate(fr.samples[i], ps, trunc);
            for (int i = 0; i < 2 * N; ++i)
                fr.validation_matrix(i, j) = fr.basis[j].evaluate(fr.validation[i], ps, trunc);
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(fr.basis_matrix);
        const double cond = svd.singularValues()(0) / svd.singularValues()(N - 1);
        if (cond < best_cond) {
            best_cond = cond;
            best = fr;
            best.condition_estimate = cond;
        }
        if (cond < opt.condition_cap) break;
    }
    if (best_cond >= opt.condition_cap) {
        std::ostringstream os;
        os << "collocation: persistent ill-conditioning, best condition estimate " << best_cond;
        throw ConditioningError(os.str());
    }
    best.lu = Eigen::PartialPivLU<Eigen::MatrixXcd>(best.basis_matrix);
    return best;
}

Eigen::VectorXcd coordinates_of(const EvaluableFunction& f, const CollocationFrame& frame,
                                double membership_tol) {
    const int N = frame.dim;
    Eigen::VectorXcd rhs(N);
    for (int i = 0; i < N; ++i) rhs(i) = f.evaluate(frame.samples[i]);
    Eigen::VectorXcd c = frame.lu.solve(rhs);

    // membership certificate at the 2N validation points
    double scale = 0.0, resid = 0.0;
    for (int i = 0; i < 2 * N; ++i) {
        const Cplx fv = f.evaluate(frame.validation[i]);
        Cplx approx(0.0);
        for (int j = 0; j < N; ++j) approx += c(j) * frame.validation_matrix(i, j);
        scale = std::max({scale, std::abs(fv), std::abs(approx)});
        resid = std::max(resid, std::abs(fv - approx));
    }
    if (scale == 0.0) scale = 1.0;
    if (resid / scale > membership_tol) {
        std::ostringstream os;
        os << "coordinates_of: membership residual " << resid / scale << " above tolerance "
           << membership_tol;
        throw MembershipError(os.str());
    }
    return c;
}

double trig_membership_residual(const EvaluableFunction& f, const ParameterSet& ps,
                                FrameView view, std::uint64_t seed) {
    const int ell = f.arity();
    const int n = ps.n;
    FrameOps F(ps, view);
    auto structured = [&](std::span<const Cplx> t) {
        Cplx v = f.evaluate(t);
        for (int a = 0; a < ell; ++a) v /= t[a];
        for (int m = 0; m < n; ++m)
            for (int a = 0; a < ell; ++a) v *= (t[a] - F.Xv(m));
        for (int a = 0; a < ell; ++a)
            for (int b = a + 1; b < ell; ++b) v *= (F.eta() * t[a] - t[b]) / (t[a] - t[b]);
        return v;
    };
    // fit a polynomial of per-variable degree < n on a tensor grid, then
    // measure the residual at fresh random points
    Rng rng(seed ^ 0x9badf00dull);
    std::vector<Cplx> nodes(n);
    for (int i = 0; i < n; ++i) nodes[i] = rng.uniform(0.8, 1.3) * rng.unit_phase();
    std::vector<int> idx(ell, 0);
    const int total = static_cast<int>(std::pow(n, ell));
    Eigen::MatrixXcd V(total, total);
    Eigen::VectorXcd rhs(total);
    std::vector<Cplx> t(ell);
    for (int r = 0; r < total; ++r) {
        int rr = r;
        for (int a = 0; a < ell; ++a) {
            t[a] = nodes[rr % n];
            rr /= n;
        }
        rhs(r) = structured(t);
        for (int cidx = 0; cidx < total; ++cidx) {
            int cc = cidx;
            Cplx mono(1.0);
            for (int a = 0; a < ell; ++a) {
                const int d = cc % n;
                cc /= n;
                for (int i = 0; i < d; ++i) mono *= t[a];
            }
            V(r, cidx) = mono;
        }
    }
    Eigen::VectorXcd coef = V.fullPivLu().solve(rhs);
    double resid = 0.0, scale = 1e-300;
    for (int trial = 0; trial < 8; ++trial) {
        for (int a = 0; a < ell; ++a) t[a] = rng.uniform(0.8, 1.3) * rng.unit_phase();
        const Cplx fv = structured(t);
        Cplx approx(0.0);
        for (int cidx = 0; cidx < total; ++cidx) {
            int cc = cidx;
            Cplx mono(1.0);
            for (int a = 0; a < ell; ++a) {
                const int d = cc % n;
                cc /= n;
                for (int i = 0; i < d; ++i) mono *= t[a];
            }
            approx += coef(cidx) * mono;
        }
        resid = std::max(resid, std::abs(fv - approx));
        scale = std::max(scale, std::abs(fv));
    }
    return resid / scale;
}

}  // namespace qhi
