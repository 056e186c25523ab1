#include "qhi/structured.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace qhi {

namespace {

Cplx ipow_c(Cplx b, long e) {
    Cplx r(1.0);
    const Cplx f = e >= 0 ? b : Cplx(1.0) / b;
    for (long i = 0; i < std::labs(e); ++i) r *= f;
    return r;
}

ScaledCplx ipow_scaled(Cplx b, long e) {
    ScaledCplx r = ScaledCplx::from(Cplx(1.0));
    const Cplx f = e >= 0 ? b : Cplx(1.0) / b;
    for (long i = 0; i < std::labs(e); ++i) r *= f;
    return r;
}

ScaledCplx scaled_add(ScaledCplx a, const ScaledCplx& b) {
    if (b.is_zero()) return a;
    if (a.is_zero()) return b;
    const long de = b.e - a.e;
    if (de > 900) return b;
    if (de < -900) return a;
    a.m += Cplx(std::ldexp(b.m.real(), static_cast<int>(de)), std::ldexp(b.m.imag(), static_cast<int>(de)));
    a.normalize();
    return a;
}

}  // namespace

ScaledCplx qpoch_inf_scaled(Cplx u, Cplx p, const Truncation& trunc) {
    if (u == Cplx(0)) return ScaledCplx::from(Cplx(1.0));
    if (!(std::abs(p) < 1.0)) throw DomainError("qpoch_inf_scaled: |p| >= 1");
    if (p == Cplx(0)) return ScaledCplx::from(Cplx(1.0) - u);
    const double ap = std::abs(p);
    ScaledCplx prod = ScaledCplx::from(Cplx(1.0));
    Cplx w = u;
    for (int s = 0; s < trunc.max_terms; ++s) {
        prod *= (Cplx(1.0) - w);
        w *= p;
        if (std::abs(w) / (1.0 - ap) <= trunc.series_tail_tol) return prod;
    }
    throw TailBoundError("qpoch_inf_scaled: tail bound above tolerance at max_terms");
}

ScaledCplx theta_scaled(Cplx u, Cplx p, const Truncation& trunc) {
    if (u == Cplx(0)) throw DomainError("theta_scaled: zero argument");
    ScaledCplx r = qpoch_inf_scaled(u, p, trunc);
    r *= qpoch_inf_scaled(p / u, p, trunc);
    r *= qpoch_inf_scaled(p, p, trunc);
    return r;
}

Cplx ExactScalar::value(const ParameterSet& ps) const {
    if (is_exact_one()) return Cplx(1.0);
    return value_scaled(ps).to_cplx();
}

ScaledCplx ExactScalar::value_scaled(const ParameterSet& ps) const {
    ScaledCplx v = ScaledCplx::from(coeff);
    if (pp != 0) v *= ipow_scaled(ps.p, pp);
    if (ep != 0) v *= ipow_scaled(ps.eta, ep);
    if (ap != 0) v *= ipow_scaled(ps.alpha, ap);
    for (int m = 0; m < kMaxParams; ++m) {
        if (xp[m] != 0) v *= ipow_scaled(ps.x[m], xp[m]);
        if (yp[m] != 0) v *= ipow_scaled(ps.y[m], yp[m]);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace {

ScaledCplx atom_value_scaled(const Atom& a, Cplx arg, const ParameterSet& ps,
                             const Truncation& trunc) {
    ScaledCplx v;
    switch (a.kind) {
        case AtomKind::Poch: v = qpoch_inf_scaled(arg, ps.p, trunc); break;
        case AtomKind::Theta: v = theta_scaled(arg, ps.p, trunc); break;
        case AtomKind::OneMinus: v = ScaledCplx::from(Cplx(1.0) - arg); break;
        case AtomKind::Mono: v = ScaledCplx::from(arg); break;
    }
    return v.pow_int(a.power);
}

}  // namespace

ScaledCplx TermFunction::evaluate_scaled(std::span<const Cplx> t, const ParameterSet& ps,
                                         const Truncation& trunc) const {
    ScaledCplx total = ScaledCplx::from(Cplx(0.0));
    for (const Term& term : terms) {
        ScaledCplx acc = ScaledCplx::from(term.coef);
        for (const Atom& a : term.atoms) {
            Cplx arg = a.c.value(ps);
            for (int v = 0; v < kMaxVars; ++v)
                if (a.tpow[v] != 0) arg *= ipow_c(t[v], a.tpow[v]);
            acc *= atom_value_scaled(a, arg, ps, trunc);
        }
        total = scaled_add(total, acc);
    }
    return total;
}

Cplx TermFunction::evaluate(std::span<const Cplx> t, const ParameterSet& ps,
                            const Truncation& trunc) const {
    return evaluate_scaled(t, ps, trunc).to_cplx();
}

TermFunction tf_product(const TermFunction& a, const TermFunction& b, std::size_t term_cap) {
    if (a.ell != b.ell) throw std::invalid_argument("tf_product: arity mismatch");
    TermFunction r;
    r.ell = a.ell;
    if (a.terms.size() * b.terms.size() > term_cap)
        throw std::invalid_argument("tf_product: term count above cap");
    r.terms.reserve(a.terms.size() * b.terms.size());
    for (const Term& ta : a.terms)
        for (const Term& tb : b.terms) {
            Term t;
            t.coef = ta.coef * tb.coef;
            t.atoms = ta.atoms;
            t.atoms.insert(t.atoms.end(), tb.atoms.begin(), tb.atoms.end());
            r.terms.push_back(std::move(t));
        }
    if (a.elliptic && b.elliptic) {
        EllipticTag tag = *a.elliptic;
        tag.alpha_power += b.elliptic->alpha_power;
        r.elliptic = tag;
    } else {
        r.elliptic = a.elliptic ? a.elliptic : b.elliptic;
    }
    return r;
}

TermFunction tf_sum(const TermFunction& a, const TermFunction& b) {
    if (a.ell != b.ell) throw std::invalid_argument("tf_sum: arity mismatch");
    TermFunction r = a;
    r.terms.insert(r.terms.end(), b.terms.begin(), b.terms.end());
    return r;
}

TermFunction tf_scale(TermFunction f, Cplx c) {
    for (auto& t : f.terms) t.coef *= c;
    return f;
}

// ---------------------------------------------------------------------------
// Ladder points.

ExactPoint exact_ladder(const ParameterSet& ps, const Composition& comp,
                        std::span<const int> shifts, LadderPoint::Base base) {
    const int n = comp.n();
    const int ell = comp.ell();
    if (static_cast<int>(shifts.size()) != ell)
        throw std::invalid_argument("exact_ladder: shift length != ell");
    StructCtx ctx{&ps};
    ExactPoint pt;
    pt.coords.resize(ell);
    pt.numeric.base = base;
    pt.numeric.comp = comp;
    pt.numeric.shifts.assign(shifts.begin(), shifts.end());
    pt.numeric.coords.resize(ell);
    int pos = 0;
    for (int m = 0; m < n; ++m) {
        const int lm = comp.parts[m];
        for (int j = 1; j <= lm; ++j) {
            int pshift = 0;
            for (int v = j; v <= lm; ++v) pshift += shifts[pos + v - 1];
            ExactScalar tag = ctx.p_pow(pshift);
            if (base == LadderPoint::Base::X) {
                tag.mul(ctx.eta_pow(j - lm));
                tag.mul(ctx.x_pow(m, 1));
            } else {
                tag.mul(ctx.eta_pow(lm - j));  // eta^{-1}-ladder on y
                tag.mul(ctx.y_pow(m, 1));
            }
            ExactCoord c;
            c.tag = tag;
            c.value = tag.value(ps);
            pt.numeric.coords[pos + j - 1] = c.value;
            pt.coords[pos + j - 1] = c;
        }
        pos += lm;
    }
    return pt;
}

// ---------------------------------------------------------------------------
// Residue workspace.

ResidueWorkspace::ResidueWorkspace(const ParameterSet& ps, const Truncation& trunc)
    : ps_(&ps), trunc_(trunc) {
    poch_p_ = qpoch_inf_scaled(ps.p, ps.p, trunc);
    poch_tail_.push_back(poch_p_);  // i = 0
}

ScaledCplx ResidueWorkspace::poch_tail(int i) {
    while (static_cast<int>(poch_tail_.size()) <= i) {
        const int j = static_cast<int>(poch_tail_.size());
        ScaledCplx next = poch_tail_.back();
        next *= (Cplx(1.0) - ipow_c(ps_->p, -j));
        poch_tail_.push_back(next);
    }
    return poch_tail_[i];
}

ScaledCplx ResidueWorkspace::theta_shift(int i) {
    ScaledCplx r = poch_p_.pow_int(3);
    r *= Cplx(-1.0);
    if (i != 0) {
        r *= ipow_scaled(ps_->p, -static_cast<long>(i) * (i - 1) / 2);
        if (i & 1) r *= Cplx(-1.0);
    }
    return r;
}

ScaledCplx ResidueWorkspace::p_pow(long k) { return ipow_scaled(ps_->p, k); }

ScaledCplx ResidueWorkspace::atom_value(AtomKind kind, Cplx arg) {
    ++evals;
    // exact key: kind plus both coordinate bit patterns (no hash collisions)
    MemoKey key{std::bit_cast<std::uint64_t>(arg.real()),
                std::bit_cast<std::uint64_t>(arg.imag()),
                static_cast<std::uint64_t>(kind)};
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    ScaledCplx v;
    switch (kind) {
        case AtomKind::Poch: v = qpoch_inf_scaled(arg, ps_->p, trunc_); break;
        case AtomKind::Theta: v = theta_scaled(arg, ps_->p, trunc_); break;
        case AtomKind::OneMinus: v = ScaledCplx::from(Cplx(1.0) - arg); break;
        case AtomKind::Mono: v = ScaledCplx::from(arg); break;
    }
    if (memo_.size() > 2000000) memo_.clear();  // bound the footprint
    memo_.emplace(key, v);
    return v;
}

// ---------------------------------------------------------------------------
// Exact iterated residue.

namespace {

// Near-lattice rejection for atoms that are not exactly critical: the
// evaluation would sit on a huge value with an uncontrolled relative error.
void guard_near_lattice(AtomKind kind, Cplx arg, Cplx p, double margin, const char* what) {
    if (kind == AtomKind::Mono) return;
    if (kind == AtomKind::OneMinus) {
        if (std::abs(arg - Cplx(1.0)) < margin)
            throw GenericityError(std::string("residue engine: rational factor within margin (") +
                                  what + ")");
        return;
    }
    const double aa = std::abs(arg);
    const double ap = std::abs(p);
    if (!(aa > 0.0) || !(ap > 0.0)) return;
    const double r = std::log(aa) / std::log(ap);
    if (std::abs(r) > 200.0) return;
    const long i0 = std::lround(r);
    if (kind == AtomKind::Poch && i0 > 0) return;  // zeros only at p^{-i}, i >= 0
    const Cplx q = arg * ipow_c(p, -i0);
    if (std::abs(q - Cplx(1.0)) < margin)
        throw GenericityError(std::string("residue engine: q-factor within lattice margin (") +
                              what + ")");
}

struct CritAtom {
    AtomKind kind;
    long i;     // lattice index of the zero
    int k;      // t-exponent of the argument at this step
    int power;  // atom power (net pole order contribution)
};

}  // namespace

ScaledCplx iterated_residue_exact(const TermFunction& f, bool with_inv_t_measure,
                                  const ExactPoint& pt, ResidueWorkspace& ws,
                                  double pole_margin) {
    const ParameterSet& ps = ws.ps();
    const int ell = f.ell;
    if (static_cast<int>(pt.coords.size()) != ell)
        throw std::invalid_argument("iterated_residue_exact: point arity mismatch");
    if (ell == 0) {
        ScaledCplx total = ScaledCplx::from(Cplx(0.0));
        for (const Term& t : f.terms) total = scaled_add(total, ScaledCplx::from(t.coef));
        return total;
    }

    ScaledCplx measure = ScaledCplx::from(Cplx(1.0));
    if (with_inv_t_measure)
        for (const auto& c : pt.coords) measure *= ScaledCplx::from(c.value).inv();

    std::vector<Atom> scratch;
    std::vector<CritAtom> crits;
    ScaledCplx total = ScaledCplx::from(Cplx(0.0));

    for (const Term& term : f.terms) {
        scratch.assign(term.atoms.begin(), term.atoms.end());
        ScaledCplx acc = ScaledCplx::from(term.coef);
        bool alive = true;

        for (int step = ell - 1; step >= 0 && alive; --step) {
            int ord = 0;
            crits.clear();
            for (Atom& a : scratch) {
                if (a.power == 0) continue;
                const int k = a.tpow[step];
                if (k == 0) continue;
                bool outer = false;
                for (int b = 0; b < step; ++b)
                    if (a.tpow[b] != 0) {
                        outer = true;
                        break;
                    }
                a.c.mul(pt.coords[step].tag, k);
                a.tpow[step] = 0;
                if (outer) continue;  // still depends on free outer variables

                bool crit = false;
                long i = 0;
                switch (a.kind) {
                    case AtomKind::OneMinus:
                        crit = a.c.is_exact_one();
                        break;
                    case AtomKind::Poch:
                        crit = a.c.unit && a.c.tags_trivial_but_p() && a.c.pp <= 0;
                        i = -a.c.pp;
                        break;
                    case AtomKind::Theta:
                        crit = a.c.unit && a.c.tags_trivial_but_p();
                        i = a.c.pp;
                        break;
                    case AtomKind::Mono:
                        break;
                }
                if (crit) {
                    ord += a.power;
                    crits.push_back({a.kind, i, k, a.power});
                } else {
                    const Cplx v = a.c.value(ps);
                    guard_near_lattice(a.kind, v, ps.p, pole_margin, "step fold");
                    acc *= ws.atom_value(a.kind, v).pow_int(a.power);
                }
                a.power = 0;
            }

            if (ord >= 0) {
                alive = false;  // regular in this variable: residue of the term is 0
                break;
            }
            if (ord < -1) {
                std::ostringstream os;
                os << "iterated_residue_exact: pole of order " << -ord << " at step " << (step + 1);
                throw NonSimplePoleError(os.str());
            }
            acc *= ScaledCplx::from(pt.coords[step].value);
            for (const CritAtom& ca : crits) {
                ScaledCplx lf;
                switch (ca.kind) {
                    case AtomKind::OneMinus:
                        lf = ScaledCplx::from(Cplx(static_cast<double>(-ca.k)));
                        break;
                    case AtomKind::Poch:
                        lf = ScaledCplx::from(Cplx(static_cast<double>(-ca.k)));
                        lf *= ws.poch_tail(static_cast<int>(ca.i));
                        break;
                    case AtomKind::Theta:
                        lf = ScaledCplx::from(Cplx(static_cast<double>(ca.k)));
                        lf *= ws.theta_shift(static_cast<int>(ca.i));
                        break;
                    case AtomKind::Mono:
                        lf = ScaledCplx::from(Cplx(1.0));
                        break;
                }
                acc *= lf.pow_int(ca.power);
            }
        }

        if (alive) {
            // any leftover scalar atoms (none expected, builders fold scalars)
            total = scaled_add(total, acc);
        }
    }
    total *= measure;
    return total;
}

// ---------------------------------------------------------------------------
// Numeric engine: nested phase-sampled epsilon extraction.

namespace {

Cplx nested_extraction(const EvaluableFunction& f, bool inv_t, const std::vector<Cplx>& centers,
                       const std::vector<double>& radii, int phase_points, int level,
                       std::vector<Cplx>& tbuf) {
    const int ell = static_cast<int>(centers.size());
    if (level == ell) {
        Cplx v = f.evaluate(tbuf);
        if (inv_t)
            for (const Cplx& t : tbuf) v /= t;
        return v;
    }
    Cplx acc(0.0);
    for (int j = 0; j < phase_points; ++j) {
        const double th = 2.0 * M_PI * (j + 0.5) / phase_points;
        const Cplx eps = radii[level] * Cplx(std::cos(th), std::sin(th));
        tbuf[level] = centers[level] * (Cplx(1.0) + eps);
        const Cplx inner = nested_extraction(f, inv_t, centers, radii, phase_points, level + 1, tbuf);
        acc += inner * (centers[level] * eps);
    }
    return acc / static_cast<double>(phase_points);
}

Cplx extraction_at(const EvaluableFunction& f, bool inv_t, const std::vector<Cplx>& centers,
                   const std::vector<double>& base_radii, double shrink, int phase_points) {
    const int ell = static_cast<int>(centers.size());
    std::vector<double> radii(ell);
    for (int a = 0; a < ell; ++a) radii[a] = base_radii[a] * shrink;
    std::vector<Cplx> tbuf(ell);
    return nested_extraction(f, inv_t, centers, radii, phase_points, 0, tbuf);
}

// Relative distance from the ladder center to the nearest other pole-family
// point: p^s x_m, p^s y_m, p^s eta^{+-1} c_b and p^s c_b for the other
// centers.  Radii must stay below a fraction of this separation.
std::vector<double> safe_base_radii(const LadderPoint& pt, const ResidueScheme& scheme,
                                    const ParameterSet* ps) {
    const int ell = static_cast<int>(pt.coords.size());
    std::vector<double> radii(ell, scheme.radius);
    if (ps != nullptr) {
        for (int a = 0; a < ell; ++a) {
            double dmin = 1.0;
            auto probe = [&](Cplx cand) {
                const double d = std::abs(cand / pt.coords[a] - Cplx(1.0));
                if (d > 1e-13) dmin = std::min(dmin, d);
            };
            auto ladder_probe = [&](Cplx base) {
                Cplx up = base, down = base;
                probe(base);
                for (int s = 1; s <= 8; ++s) {
                    up *= ps->p;
                    down /= ps->p;
                    probe(up);
                    probe(down);
                }
            };
            for (int m = 0; m < ps->n; ++m) {
                ladder_probe(ps->x[m]);
                ladder_probe(ps->y[m]);
            }
            for (int b = 0; b < ell; ++b) {
                if (b == a) continue;
                ladder_probe(pt.coords[b]);
                ladder_probe(ps->eta * pt.coords[b]);
                ladder_probe(pt.coords[b] / ps->eta);
            }
            radii[a] = std::min(radii[a], dmin / 6.0);
        }
    }
    // enforce the inward stagger on top of the safety bound
    for (int a = 1; a < ell; ++a) radii[a] = std::min(radii[a], radii[a - 1] * scheme.stagger);
    return radii;
}

}  // namespace

Cplx multiple_residue_numeric(const EvaluableFunction& f, bool with_inv_t_measure,
                              const LadderPoint& pt, const ResidueScheme& scheme,
                              double* agreement, const ParameterSet* ps) {
    const auto& centers = pt.coords;
    const std::vector<double> base_radii = safe_base_radii(pt, scheme, ps);
    double shrink = 1.0;
    const int N = scheme.phase_points;
    Cplx best(0.0);
    double best_agree = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt <= scheme.max_fallbacks; ++attempt) {
        const Cplx r1 =
            extraction_at(f, with_inv_t_measure, centers, base_radii, shrink, N);
        const Cplx r2 =
            extraction_at(f, with_inv_t_measure, centers, base_radii, shrink / 2.0, N);
        const double scale = std::max({std::abs(r1), std::abs(r2), 1e-300});
        const double agree = std::abs(r2 - r1) / scale;
        // two-step Richardson with the leading error ~ radius^N
        const double w = std::pow(2.0, N);
        const Cplx extrap = (w * r2 - r1) / (w - 1.0);
        if (agree < best_agree) {
            best_agree = agree;
            best = extrap;
        }
        if (agree <= scheme.agree_tol) break;
        shrink /= 2.0;  // fall back once on disagreement
    }
    if (agreement) *agreement = best_agree;
    return best;
}

Cplx multiple_residue(const EvaluableFunction& f, const LadderPoint& pt, const ParameterSet& ps,
                      const Truncation& trunc, const ResidueScheme& scheme, double* agreement) {
    if (!scheme.force_numeric && f.structure() != nullptr) {
        const ExactPoint ept = exact_ladder(ps, pt.comp, pt.shifts, pt.base);
        ResidueWorkspace ws(ps, trunc);
        const ScaledCplx r = iterated_residue_exact(*f.structure(), false, ept, ws, scheme.pole_margin);
        if (agreement) *agreement = 0.0;
        return r.to_cplx();
    }
    return multiple_residue_numeric(f, false, pt, scheme, agreement, &ps);
}

}  // namespace qhi
