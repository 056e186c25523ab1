#pragma once

// Structured function representation and iterated-residue engines.
//
// Every named function of the library (phase functions, weight functions,
// bases, one-dimensional functions) is a sum of terms, each term a product of
// primitive atoms
//     Poch      (c * t^k ; p)_inf
//     Theta     theta(c * t^k)
//     OneMinus  1 - c * t^k
//     Mono      c * t^k
// whose scalar parts carry exact multiplicative tags over the parameter
// alphabet (p, eta, alpha, x_m, y_m).  Ladder-point coordinates carry the same
// tags, so "argument lies on p^Z" questions reduce to integer comparisons and
// iterated residues at ladder points evaluate exactly, factor by factor.
//
// A numeric engine (staggered-epsilon limit of prod (t_a - t*_a) f with a
// two-step Richardson schedule) backs the same interface for functions with
// no structure and serves as the independent cross-check of the exact route.

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "qhi/indexing.hpp"
#include "qhi/params.hpp"
#include "qhi/qseries.hpp"
#include "qhi/types.hpp"

namespace qhi {

// ---------------------------------------------------------------------------
// Scaled complex arithmetic: value = m * 2^e.  Shifted-ladder residues pass
// through intermediate factors far beyond double range.

struct ScaledCplx {
    Cplx m{1.0, 0.0};
    long e = 0;

    static ScaledCplx from(Cplx c) {
        ScaledCplx s;
        s.m = c;
        s.normalize();
        return s;
    }
    void normalize() {
        const double a = std::abs(m);
        if (a == 0.0) {
            e = 0;
            return;
        }
        int k = 0;
        std::frexp(a, &k);
        if (k > 60 || k < -60) {
            m = Cplx(std::ldexp(m.real(), -k), std::ldexp(m.imag(), -k));
            e += k;
        }
    }
    ScaledCplx& operator*=(const ScaledCplx& o) {
        m *= o.m;
        e += o.e;
        normalize();
        return *this;
    }
    ScaledCplx& operator*=(const Cplx& c) {
        m *= c;
        normalize();
        return *this;
    }
    friend ScaledCplx operator*(ScaledCplx a, const ScaledCplx& b) { return a *= b; }
    ScaledCplx inv() const {
        ScaledCplx s;
        s.m = Cplx(1.0) / m;
        s.e = -e;
        s.normalize();
        return s;
    }
    ScaledCplx pow_int(int k) const {
        ScaledCplx r = ScaledCplx::from(Cplx(1.0));
        ScaledCplx b = k >= 0 ? *this : inv();
        for (int i = 0; i < std::abs(k); ++i) r *= b;
        return r;
    }
    bool is_zero() const { return m == Cplx(0); }
    Cplx to_cplx() const { return Cplx(std::ldexp(m.real(), static_cast<int>(std::clamp(e, -1070L, 1070L))), std::ldexp(m.imag(), static_cast<int>(std::clamp(e, -1070L, 1070L)))); }
};

ScaledCplx qpoch_inf_scaled(Cplx u, Cplx p, const Truncation& trunc);
ScaledCplx theta_scaled(Cplx u, Cplx p, const Truncation& trunc);

// ---------------------------------------------------------------------------
// Exact multiplicative scalars over (p, eta, alpha, x_m, y_m).

inline constexpr int kMaxParams = 8;

struct ExactScalar {
    Cplx coeff{1.0, 0.0};
    bool unit = true;  // coeff is exactly 1; lattice membership fully decided by tags
    int pp = 0, ep = 0, ap = 0;
    std::array<int8_t, kMaxParams> xp{};
    std::array<int8_t, kMaxParams> yp{};

    bool tags_trivial_but_p() const {
        if (ep != 0 || ap != 0) return false;
        for (int i = 0; i < kMaxParams; ++i)
            if (xp[i] != 0 || yp[i] != 0) return false;
        return true;
    }
    bool is_exact_one() const { return unit && pp == 0 && tags_trivial_but_p(); }
    void mul(const ExactScalar& o, int k = 1) {
        if (k == 0) return;
        if (o.unit) {
            // coeff stays; tags add
        } else {
            Cplx c = o.coeff;
            if (k != 1) {
                Cplx acc(1.0);
                const Cplx f = k > 0 ? c : Cplx(1.0) / c;
                for (int i = 0; i < std::abs(k); ++i) acc *= f;
                c = acc;
            }
            coeff *= c;
            unit = false;
        }
        pp += o.pp * k;
        ep += o.ep * k;
        ap += o.ap * k;
        for (int i = 0; i < kMaxParams; ++i) {
            xp[i] = static_cast<int8_t>(xp[i] + o.xp[i] * k);
            yp[i] = static_cast<int8_t>(yp[i] + o.yp[i] * k);
        }
    }
    Cplx value(const ParameterSet& ps) const;
    ScaledCplx value_scaled(const ParameterSet& ps) const;
};

// Tag factories; the restricted construction rewrites x_m = eta^{l_m} y_m so
// exact lattice collisions introduced by the restriction stay visible.
struct StructCtx {
    const ParameterSet* ps = nullptr;

    bool rewrite_x(int m) const {
        return ps->flag == GenericityFlag::Restricted && !ps->ell_bounds.empty() &&
               ps->ell_bounds[m] < ps->ell;
    }
    ExactScalar one() const { return {}; }
    ExactScalar p_pow(int k) const {
        ExactScalar s;
        s.pp = k;
        return s;
    }
    ExactScalar eta_pow(int k) const {
        ExactScalar s;
        s.ep = k;
        return s;
    }
    ExactScalar alpha_pow(int k) const {
        ExactScalar s;
        s.ap = k;
        return s;
    }
    ExactScalar x_pow(int m, int k) const {
        ExactScalar s;
        if (rewrite_x(m)) {
            s.ep = ps->ell_bounds[m] * k;
            s.yp[m] = static_cast<int8_t>(k);
        } else {
            s.xp[m] = static_cast<int8_t>(k);
        }
        return s;
    }
    ExactScalar y_pow(int m, int k) const {
        ExactScalar s;
        s.yp[m] = static_cast<int8_t>(k);
        return s;
    }
    ExactScalar generic(Cplx c) const {
        ExactScalar s;
        s.coeff = c;
        s.unit = false;
        return s;
    }
};

// ---------------------------------------------------------------------------
// Atoms, terms, functions.

enum class AtomKind : std::uint8_t { Poch, Theta, OneMinus, Mono };

struct Atom {
    AtomKind kind = AtomKind::Mono;
    int power = 1;
    ExactScalar c;
    std::array<int8_t, kMaxVars> tpow{};

    bool depends_on_t() const {
        for (int i = 0; i < kMaxVars; ++i)
            if (tpow[i] != 0) return true;
        return false;
    }
};

struct Term {
    Cplx coef{1.0, 0.0};
    std::vector<Atom> atoms;
};

// Quasi-periodicity metadata: for an element of the elliptic space with
// parameter alpha^alpha_power, the Jackson constant of the assembled pairing
// integrand is A = p^{1-n} alpha^{alpha_power} eta^{+-(1-ell)} prod(base_m).
struct EllipticTag {
    int alpha_power = 0;   // +1 for W/G/F-type spaces, -1 for their primed frames
    bool primed_frame = false;  // built over (y; x; eta^{-1})
};

class EvaluableFunction;

struct TermFunction {
    int ell = 0;
    std::vector<Term> terms;
    std::optional<EllipticTag> elliptic;

    Cplx evaluate(std::span<const Cplx> t, const ParameterSet& ps, const Truncation& trunc) const;
    ScaledCplx evaluate_scaled(std::span<const Cplx> t, const ParameterSet& ps,
                               const Truncation& trunc) const;
};

TermFunction tf_product(const TermFunction& a, const TermFunction& b, std::size_t term_cap = 1u << 20);
TermFunction tf_sum(const TermFunction& a, const TermFunction& b);
TermFunction tf_scale(TermFunction f, Cplx c);

// Abstract handle: a function of (t_1..t_ell) evaluable at arbitrary complex
// points, optionally carrying its structured form.
class EvaluableFunction {
  public:
    virtual ~EvaluableFunction() = default;
    virtual int arity() const = 0;
    virtual Cplx evaluate(std::span<const Cplx> t) const = 0;
    virtual const TermFunction* structure() const { return nullptr; }
};

class StructuredFunction final : public EvaluableFunction {
  public:
    StructuredFunction(TermFunction tf, const ParameterSet& ps, Truncation trunc)
        : tf_(std::move(tf)), ps_(ps), trunc_(trunc) {}
    int arity() const override { return tf_.ell; }
    Cplx evaluate(std::span<const Cplx> t) const override { return tf_.evaluate(t, ps_, trunc_); }
    const TermFunction* structure() const override { return &tf_; }
    const ParameterSet& params() const { return ps_; }
    const Truncation& trunc() const { return trunc_; }

  private:
    TermFunction tf_;
    ParameterSet ps_;
    Truncation trunc_;
};

class LambdaFunction final : public EvaluableFunction {
  public:
    LambdaFunction(int ell, std::function<Cplx(std::span<const Cplx>)> fn)
        : ell_(ell), fn_(std::move(fn)) {}
    int arity() const override { return ell_; }
    Cplx evaluate(std::span<const Cplx> t) const override { return fn_(t); }

  private:
    int ell_;
    std::function<Cplx(std::span<const Cplx>)> fn_;
};

// ---------------------------------------------------------------------------
// Ladder points with exact coordinates.

struct ExactCoord {
    ExactScalar tag;  // p^pp eta^ep x_m (or y_m)
    Cplx value;
};

struct ExactPoint {
    std::vector<ExactCoord> coords;
    LadderPoint numeric;
};

ExactPoint exact_ladder(const ParameterSet& ps, const Composition& comp,
                        std::span<const int> shifts, LadderPoint::Base base);

// ---------------------------------------------------------------------------
// Residue engines.

struct ResidueScheme {
    bool force_numeric = false;
    // numeric path: nested phase-sampled epsilon extraction
    int phase_points = 8;       // epsilon phases per level
    double radius = 2e-2;       // relative epsilon magnitude, outermost level
    double stagger = 0.125;     // per-level shrink factor (inner levels smaller)
    double agree_tol = 1e-6;    // relative disagreement triggering the fallback
    int max_fallbacks = 1;
    double pole_margin = 1e-7;  // near-lattice rejection margin (exact path)
};

// Workspace shared across residue evaluations of one Jackson sum / pairing;
// caches (p)_inf, the per-shift Pochhammer/theta residue constants, and
// memoizes scalar atom values.
class ResidueWorkspace {
  public:
    ResidueWorkspace(const ParameterSet& ps, const Truncation& trunc);

    const ParameterSet& ps() const { return *ps_; }
    const Truncation& trunc() const { return trunc_; }

    ScaledCplx poch_tail(int i);    // (p)_inf * prod_{j=1..i} (1 - p^{-j})
    ScaledCplx theta_shift(int i);  // (-1)^i p^{-i(i-1)/2} * (-(p)_inf^3)
    ScaledCplx p_pow(long k);
    ScaledCplx atom_value(AtomKind kind, Cplx arg);  // memoized scalar atom value

    std::uint64_t evals = 0;

  private:
    const ParameterSet* ps_;
    Truncation trunc_;
    ScaledCplx poch_p_;
    std::vector<ScaledCplx> poch_tail_;  // index i

    struct MemoKey {
        std::uint64_t re, im, kind;
        bool operator==(const MemoKey&) const = default;
    };
    struct MemoHash {
        std::size_t operator()(const MemoKey& k) const {
            std::uint64_t h = k.re * 0x9e3779b97f4a7c15ull;
            h ^= (k.im + 0x632be59bd9b4e019ull) * 0xff51afd7ed558ccdull;
            h ^= k.kind << 3;
            h ^= h >> 29;
            return static_cast<std::size_t>(h * 0xc4ceb9fe1a85ec53ull);
        }
    };
    std::unordered_map<MemoKey, ScaledCplx, MemoHash> memo_;
};

// Iterated residue (innermost variable t_ell first) of
//   [prod t_a^{-1} if with_inv_t_measure] * f
// at the ladder point, computed exactly from the term structure.  Throws
// NonSimplePoleError if any term presents a pole of order >= 2 in one step
// and GenericityError if a non-critical atom sits within the pole margin of
// its lattice.
ScaledCplx iterated_residue_exact(const TermFunction& f, bool with_inv_t_measure,
                                  const ExactPoint& pt, ResidueWorkspace& ws,
                                  double pole_margin = 1e-7);

// Numeric fallback/cross-check: the limit of prod_a (t_a - t*_a) f(t) along a
// two-step epsilon schedule (radii r and r/2, phase-sampled, per-level
// staggered) with Richardson extrapolation and an agreement estimate.  When a
// parameter set is supplied, the per-level radii shrink below the distance to
// the nearest neighboring pole-family point.
Cplx multiple_residue_numeric(const EvaluableFunction& f, bool with_inv_t_measure,
                              const LadderPoint& pt, const ResidueScheme& scheme,
                              double* agreement = nullptr, const ParameterSet* ps = nullptr);

// Unified entry point per the residue operation contract.
Cplx multiple_residue(const EvaluableFunction& f, const LadderPoint& pt, const ParameterSet& ps,
                      const Truncation& trunc, const ResidueScheme& scheme = {},
                      double* agreement = nullptr);

}  // namespace qhi
