#include "qhi/pairings.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace qhi {

namespace {

Cplx ipow_c(Cplx b, long e) {
    Cplx r(1.0);
    const Cplx f = e >= 0 ? b : Cplx(1.0) / b;
    for (long i = 0; i < std::labs(e); ++i) r *= f;
    return r;
}

// weak compositions of k into ell parts, fixed enumeration order
void for_each_shell(int ell, int k, std::vector<int>& s, int pos, const auto& fn) {
    if (pos == ell - 1) {
        s[pos] = k;
        fn(s);
        return;
    }
    for (int v = k; v >= 0; --v) {
        s[pos] = v;
        for_each_shell(ell, k - v, s, pos + 1, fn);
    }
}

}  // namespace

Cplx res_functional(const TermFunction& f, const ParameterSet& ps, const Truncation& trunc,
                    LadderPoint::Base base, double pole_margin) {
    ps.validate();
    ResidueWorkspace ws(ps, trunc);
    const auto comps = enumerate_compositions(ps.n, ps.ell);
    std::vector<int> zero(ps.ell, 0);
    Cplx acc(0.0);
    for (const auto& comp : comps) {
        const ExactPoint pt = exact_ladder(ps, comp, zero, base);
        acc += iterated_residue_exact(f, true, pt, ws, pole_margin).to_cplx();
    }
    return acc;
}

Cplx shapovalov_S(const TermFunction& fprime, const TermFunction& g, const ParameterSet& ps,
                  const Truncation& trunc) {
    return res_functional(tf_product(fprime, g), ps, trunc, LadderPoint::Base::X);
}

Cplx shapovalov_S_ell(const TermFunction& fprime, const TermFunction& g, const ParameterSet& ps,
                      const Truncation& trunc) {
    return res_functional(tf_product(fprime, g), ps, trunc, LadderPoint::Base::X);
}

PairingDomain pairing_domain(const ParameterSet& ps, FrameView frame, int alpha_power,
                             bool primed_elliptic) {
    PairingDomain d;
    d.M = ps.n - 1;
    const Cplx eta_f = frame.swapped ? Cplx(1.0) / ps.eta : ps.eta;
    Cplx A = ipow_c(ps.p, 1 - ps.n) * ipow_c(ps.alpha, alpha_power) * ipow_c(eta_f, 1 - ps.ell);
    if (primed_elliptic) A /= ps.p;
    double px = 1.0, py = 1.0;
    for (int m = 0; m < ps.n; ++m) {
        const Cplx xm = frame.swapped ? ps.y[m] : ps.x[m];
        const Cplx ym = frame.swapped ? ps.x[m] : ps.y[m];
        A *= xm;
        px *= std::abs(xm);
        py *= std::abs(ym);
    }
    d.A = A;
    const double ae = std::abs(eta_f);
    const double bx = std::min(1.0, std::pow(ae, 1 - ps.ell));
    const double by = std::max(1.0, std::pow(ae, ps.ell - 1));
    d.margin_x = bx / (std::pow(std::abs(ps.p), ps.n) * std::abs(A) / px);
    d.margin_y = (std::pow(std::abs(ps.p), d.M) * std::abs(A) / py) / by;
    return d;
}

JacksonResult jackson_integral(const TermFunction& h, const ParameterSet& ps,
                               const Truncation& trunc, FrameView frame, JacksonSide side, Cplx A,
                               int M, double pole_margin, ResidueWorkspace* shared_ws) {
    ps.validate();
    JacksonResult res;
    res.side = side;
    res.quasi_period_A = A;
    {
        const Cplx eta_f = frame.swapped ? Cplx(1.0) / ps.eta : ps.eta;
        double px = 1.0, py = 1.0;
        for (int m = 0; m < ps.n; ++m) {
            px *= std::abs(frame.swapped ? ps.y[m] : ps.x[m]);
            py *= std::abs(frame.swapped ? ps.x[m] : ps.y[m]);
        }
        const double ae = std::abs(eta_f);
        if (side == JacksonSide::X)
            res.margin = std::min(1.0, std::pow(ae, 1 - ps.ell)) /
                         (std::pow(std::abs(ps.p), ps.n) * std::abs(A) / px);
        else
            res.margin = (std::pow(std::abs(ps.p), M) * std::abs(A) / py) /
                         std::max(1.0, std::pow(ae, ps.ell - 1));
    }
    if (!(res.margin > 1.0))
        throw ConvergenceError("jackson_integral: convergence condition violated (margin <= 1)");

    const int ell = ps.ell;
    if (ell == 0) {
        res.value = Cplx(1.0);  // empty integral convention
        return res;
    }

    const LadderPoint::Base base = (side == JacksonSide::X)
                                       ? (frame.swapped ? LadderPoint::Base::Y : LadderPoint::Base::X)
                                       : (frame.swapped ? LadderPoint::Base::X : LadderPoint::Base::Y);
    const int shift_sign = (side == JacksonSide::X) ? +1 : -1;
    const Cplx overall = (side == JacksonSide::X) ? Cplx(1.0) : ((ell % 2) ? Cplx(-1.0) : Cplx(1.0));

    const auto comps = enumerate_compositions(ps.n, ell);
    std::optional<ResidueWorkspace> local_ws;
    if (!shared_ws) local_ws.emplace(ps, trunc);
    ResidueWorkspace& ws = shared_ws ? *shared_ws : *local_ws;

    Cplx acc(0.0);
    double prev_mag = -1.0, prev_ratio = -1.0, max_mag = 0.0, tail = 0.0;
    int zero_streak = 0;
    bool stopped = false;
    std::vector<int> s(ell, 0);
    for (int k = 0; k <= trunc.jackson_shell_max && !stopped; ++k) {
        Cplx shell(0.0);
        for (const auto& comp : comps) {
            for_each_shell(ell, k, s, 0, [&](const std::vector<int>& sv) {
                std::vector<int> signed_s(sv);
                for (int& v : signed_s) v *= shift_sign;
                const ExactPoint pt = exact_ladder(ps, comp, signed_s, base);
                shell += iterated_residue_exact(h, true, pt, ws, pole_margin).to_cplx();
            });
        }
        acc += shell;
        res.shells_used = k + 1;
        const double mag = std::abs(shell);
        max_mag = std::max(max_mag, mag);
        const double scale = std::max(std::abs(acc), max_mag);
        if (k >= 1) {
            if (mag == 0.0 && prev_mag == 0.0) {
                if (++zero_streak >= 1) {
                    tail = 0.0;
                    stopped = true;
                    break;
                }
            } else {
                zero_streak = 0;
            }
            const double ratio = prev_mag > 0.0 ? mag / prev_mag : 0.0;
            if (k >= 2 && ratio >= 1.0 && prev_ratio >= 1.0 && mag > scale * 1e3)
                throw ConvergenceError("jackson_integral: shells not decaying");
            if (k >= 2 && ratio > 1.0) res.decayed_geometrically = false;
            const double r = std::min(0.999, std::max(ratio, prev_ratio > 0 ? prev_ratio : 0.0));
            if (r > 0.0 && r < 1.0) {
                tail = mag * r / (1.0 - r);
                if (tail <= trunc.jackson_tail_tol() * std::max(scale, 1e-300)) {
                    stopped = true;
                    break;
                }
            } else if (mag == 0.0 && prev_mag >= 0.0 && k >= 2) {
                // isolated zero shell; keep going one more shell
            }
            prev_ratio = ratio;
        }
        prev_mag = mag;
    }
    if (!stopped)
        throw ConvergenceError("jackson_integral: shell cap reached without tail convergence");
    res.tail_bound = tail;
    res.value = overall * acc;
    return res;
}

namespace {

Cplx pairing_impl(const TermFunction& fe, const TermFunction& ft, const ParameterSet& ps,
                  const Truncation& trunc, FrameView frame, JacksonResult* info,
                  ResidueWorkspace* shared_ws) {
    if (!fe.elliptic)
        throw std::invalid_argument("pairing: elliptic argument carries no quasi-period tag");
    const TermFunction h = tf_product(tf_product(fe, ft), tf_phase_phi(ps, frame));
    const PairingDomain dom =
        pairing_domain(ps, frame, fe.elliptic->alpha_power, fe.elliptic->primed_frame);
    const double min_margin = 1.05;
    JacksonSide side;
    if (dom.margin_x >= dom.margin_y && dom.margin_x > min_margin)
        side = JacksonSide::X;
    else if (dom.margin_y > min_margin)
        side = JacksonSide::Y;
    else
        throw ConvergenceError("pairing: no admissible Jackson side (margins " +
                               std::to_string(dom.margin_x) + ", " + std::to_string(dom.margin_y) +
                               ")");
    JacksonResult r = jackson_integral(h, ps, trunc, frame, side, dom.A, dom.M, 1e-7, shared_ws);
    if (info) *info = r;
    return r.value;
}

}  // namespace

Cplx pairing_I(const TermFunction& fe, const TermFunction& ft, const ParameterSet& ps,
               const Truncation& trunc, JacksonResult* info, ResidueWorkspace* shared_ws) {
    return pairing_impl(fe, ft, ps, trunc, FrameView{false}, info, shared_ws);
}

Cplx pairing_I_prime(const TermFunction& fe, const TermFunction& ft, const ParameterSet& ps,
                     const Truncation& trunc, JacksonResult* info, ResidueWorkspace* shared_ws) {
    return pairing_impl(fe, ft, ps, trunc, FrameView{true}, info, shared_ws);
}

PairingMatrix matrix_I(const ParameterSet& ps, const Truncation& trunc) {
    PairingMatrix M;
    M.order = enumerate_compositions(ps.n, ps.ell);
    const int N = static_cast<int>(M.order.size());
    M.entries.resize(N, N);
    std::vector<TermFunction> Ws, ws;
    for (const auto& c : M.order) {
        Ws.push_back(tf_weight_W(c, ps, trunc));
        ws.push_back(tf_weight_w(c, ps, trunc));
    }
    ResidueWorkspace shared(ps, trunc);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            M.entries(i, j) = pairing_I(Ws[i], ws[j], ps, trunc, nullptr, &shared);
    return M;
}

PairingMatrix matrix_I_prime(const ParameterSet& ps, const Truncation& trunc) {
    PairingMatrix M;
    M.order = enumerate_compositions(ps.n, ps.ell);
    const int N = static_cast<int>(M.order.size());
    M.entries.resize(N, N);
    std::vector<TermFunction> Ws, ws;
    for (const auto& c : M.order) {
        Ws.push_back(tf_weight_W_prime(c, ps, trunc));
        ws.push_back(tf_weight_w_prime(c, ps, trunc));
    }
    ResidueWorkspace shared(ps, trunc);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            M.entries(i, j) = pairing_I_prime(Ws[i], ws[j], ps, trunc, nullptr, &shared);
    return M;
}

namespace {

PairingMatrix change_of_basis(SpaceTag frame_tag, const ParameterSet& ps, std::uint64_t seed,
                              const Truncation& trunc, const auto& make_fn) {
    const CollocationFrame frame = build_collocation(frame_tag, ps, seed, trunc);
    PairingMatrix M;
    M.order = frame.order;
    const int N = frame.dim;
    M.entries.resize(N, N);
    for (int i = 0; i < N; ++i) {
        const TermFunction f = make_fn(M.order[i]);
        StructuredFunction sf(f, ps, trunc);
        const Eigen::VectorXcd c = coordinates_of(sf, frame);
        for (int j = 0; j < N; ++j) M.entries(i, j) = c(j);
    }
    return M;
}

}  // namespace

PairingMatrix matrix_X(const ParameterSet& ps, std::uint64_t seed, const Truncation& trunc) {
    return change_of_basis(SpaceTag::TrigG, ps, seed, trunc,
                           [&](const Composition& c) { return tf_weight_w(c, ps, trunc); });
}

PairingMatrix matrix_Q(const ParameterSet& ps, std::uint64_t seed, const Truncation& trunc) {
    return change_of_basis(SpaceTag::EllG, ps, seed, trunc,
                           [&](const Composition& c) { return tf_weight_W(c, ps, trunc); });
}

Cplx L_scalar(int m, const Composition& comp, const ParameterSet& ps) {
    Cplx base = ps.alpha;
    for (int i = 0; i < ps.ell - 1; ++i) base /= ps.eta;
    for (int j = 0; j < ps.n; ++j) base *= ps.x[j] / ps.y[j];
    return ipow_c(base, comp.partial(m));
}

ParameterSet shift_Tm(const ParameterSet& ps, int m) {
    ParameterSet out = ps;
    for (int j = 0; j < m; ++j) {
        out.x[j] *= ps.p;
        out.y[j] *= ps.p;
    }
    out.flag = GenericityFlag::Unchecked;
    return out;
}

ParameterSet cycle_params(const ParameterSet& ps, int k) {
    ParameterSet out = ps;
    for (int j = 0; j < ps.n; ++j) {
        out.x[j] = ps.x[(j + k) % ps.n];
        out.y[j] = ps.y[(j + k) % ps.n];
    }
    out.flag = GenericityFlag::Unchecked;
    return out;
}

Composition cycle_composition(const Composition& comp, int k) {
    Composition out = comp;
    const int n = comp.n();
    for (int j = 0; j < n; ++j) out.parts[j] = comp.parts[(j + k) % n];
    return out;
}

PairingMatrix operator_K(int m, const ParameterSet& ps, bool primed, std::uint64_t seed,
                         const Truncation& trunc) {
    if (m < 1 || m > ps.n) throw std::invalid_argument("operator_K: m out of range");
    const CollocationFrame frame =
        build_collocation(primed ? SpaceTag::TrigWPrime : SpaceTag::TrigW, ps, seed, trunc);
    const ParameterSet cyc = cycle_params(ps, m);
    const int N = frame.dim;
    Eigen::MatrixXcd Lhat(N, N);
    for (int j = 0; j < N; ++j) {
        const Composition cl = cycle_composition(frame.order[j], m);
        const TermFunction w_cyc = primed ? tf_weight_w_prime(cl, cyc, trunc)
                                          : tf_weight_w(cl, cyc, trunc);
        const Cplx lam = primed ? Cplx(1.0) / L_scalar(m, frame.order[j], ps)
                                : L_scalar(m, frame.order[j], ps);
        StructuredFunction sf(w_cyc, cyc, trunc);
        const Eigen::VectorXcd c = coordinates_of(sf, frame);
        for (int r = 0; r < N; ++r) Lhat(r, j) = lam * c(r);
    }
    PairingMatrix K;
    K.order = frame.order;
    K.entries = Lhat.transpose();  // dualization
    return K;
}

Eigen::VectorXcd operator_M_diag(int m, const ParameterSet& ps) {
    if (m < 1 || m > ps.n) throw std::invalid_argument("operator_M_diag: m out of range");
    const auto comps = enumerate_compositions(ps.n, ps.ell);
    Eigen::VectorXcd d(static_cast<int>(comps.size()));
    for (int i = 0; i < d.size(); ++i) {
        const int lm = comps[i].partial(m);
        Cplx base = ps.alpha;
        base *= ipow_c(ps.eta, 1 - lm);
        for (int j = 0; j < m; ++j) base *= ps.x[j] / ps.y[j];
        d(i) = ipow_c(base, -lm);
    }
    return d;
}

Cplx contour_integral_ell1(const EvaluableFunction& h, int nodes) {
    if (h.arity() != 1) throw std::invalid_argument("contour_integral_ell1: arity != 1");
    Cplx acc(0.0);
    std::array<Cplx, 1> t;
    for (int k = 0; k < nodes; ++k) {
        const double th = 2.0 * M_PI * k / nodes;
        t[0] = Cplx(std::cos(th), std::sin(th));
        acc += h.evaluate(t);
    }
    return acc / static_cast<double>(nodes);
}

}  // namespace qhi
