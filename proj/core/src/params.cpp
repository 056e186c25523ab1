#include "qhi/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qhi/qseries.hpp"

namespace qhi {

using nlohmann::json;

void ParameterSet::validate() const {
    if (n < 1 || ell < 0) throw std::invalid_argument("ParameterSet: need n >= 1, ell >= 0");
    if (ell > kMaxVars) throw std::invalid_argument("ParameterSet: ell exceeds cap");
    if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
        throw std::invalid_argument("ParameterSet: x/y length != n");
    if (!(std::abs(p) < 1.0)) throw DomainError("ParameterSet: |p| < 1 required");
    if (eta == Cplx(0) || alpha == Cplx(0)) throw DomainError("ParameterSet: zero eta/alpha");
    for (const auto& v : x)
        if (v == Cplx(0)) throw DomainError("ParameterSet: zero x entry");
    for (const auto& v : y)
        if (v == Cplx(0)) throw DomainError("ParameterSet: zero y entry");
    if (!(lattice_margin > 0)) throw std::invalid_argument("ParameterSet: margin must be > 0");
}

std::string ParameterSet::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](const void* data, size_t len) {
        const auto* b = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ull;
        }
    };
    auto mixc = [&](const Cplx& c) {
        double re = c.real(), im = c.imag();
        mix(&re, sizeof re);
        mix(&im, sizeof im);
    };
    mixc(p);
    mixc(eta);
    mixc(alpha);
    for (const auto& v : x) mixc(v);
    for (const auto& v : y) mixc(v);
    mix(&n, sizeof n);
    mix(&ell, sizeof ell);
    for (int b : ell_bounds) mix(&b, sizeof b);
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

namespace {

void push_if_violated(std::vector<Violation>& out, const std::string& what, Cplx q,
                      const ParameterSet& ps) {
    const double d = lattice_distance(q, ps.p);
    if (d < ps.lattice_margin) out.push_back({what, d});
}

std::string cond_name(const char* fmt, int r, int k = -1, int m = -1) {
    std::ostringstream os;
    os << fmt << " (r=" << r;
    if (k >= 0) os << ", k=" << k + 1;
    if (m >= 0) os << ", m=" << m + 1;
    os << ")";
    return os.str();
}

Cplx ipow(Cplx b, int e) {
    Cplx r(1);
    const Cplx f = e >= 0 ? b : Cplx(1) / b;
    for (int i = 0; i < std::abs(e); ++i) r *= f;
    return r;
}

}  // namespace

std::vector<Violation> check_generic(const ParameterSet& ps) {
    ps.validate();
    std::vector<Violation> out;
    for (int r = 0; r < ps.ell; ++r) {
        push_if_violated(out, cond_name("eta^{r+1} in p^Z", r), ipow(ps.eta, r + 1), ps);
        for (int k = 0; k < ps.n; ++k)
            for (int m = 0; m < ps.n; ++m) {
                for (int sgn : {+1, -1}) {
                    const Cplx er = ipow(ps.eta, sgn * r);
                    if (k != m) {
                        push_if_violated(out, cond_name("eta^{+-r} x_k/x_m in p^Z", r, k, m),
                                         er * ps.x[k] / ps.x[m], ps);
                        push_if_violated(out, cond_name("eta^{+-r} y_k/y_m in p^Z", r, k, m),
                                         er * ps.y[k] / ps.y[m], ps);
                    }
                    push_if_violated(out, cond_name("eta^{+-r} x_k/y_m in p^Z", r, k, m),
                                     er * ps.x[k] / ps.y[m], ps);
                    if (r == 0) break;  // +-0 coincide
                }
            }
    }
    return out;
}

std::vector<Violation> check_gene(const ParameterSet& ps, const std::vector<int>& ell_bounds) {
    ps.validate();
    if (static_cast<int>(ell_bounds.size()) != ps.n)
        throw std::invalid_argument("check_gene: ell_bounds length != n");
    std::vector<Violation> out;
    for (int r = 0; r < ps.ell; ++r) {
        push_if_violated(out, cond_name("eta^{r+1} in p^Z", r), ipow(ps.eta, r + 1), ps);
        for (int k = 0; k < ps.n; ++k)
            for (int m = 0; m < ps.n; ++m) {
                if (k == m) continue;
                for (int sgn : {+1, -1}) {
                    const Cplx er = ipow(ps.eta, sgn * r);
                    push_if_violated(out, cond_name("eta^{+-r} x_k/x_m in p^Z", r, k, m),
                                     er * ps.x[k] / ps.x[m], ps);
                    push_if_violated(out, cond_name("eta^{+-r} y_k/y_m in p^Z", r, k, m),
                                     er * ps.y[k] / ps.y[m], ps);
                    if (sgn < 0)
                        push_if_violated(out, cond_name("eta^{-r} x_k/y_m in p^Z", r, k, m),
                                         er * ps.x[k] / ps.y[m], ps);
                    if (r == 0) break;
                }
            }
    }
    for (int m = 0; m < ps.n; ++m)
        for (int s = 0; s < ell_bounds[m]; ++s)
            push_if_violated(out, cond_name("eta^{-s} x_m/y_m in p^Z", s, -1, m),
                             ipow(ps.eta, -s) * ps.x[m] / ps.y[m], ps);
    return out;
}

namespace {

// alpha-side conditions (basis nondegeneracy windows for Wbasis, Sq and the
// hypergeometric-map nondegeneracy), enforced with the lattice margin.
bool alpha_conditions_ok(const ParameterSet& ps) {
    const int R = 2 * std::max(ps.ell, 1);
    for (int r = -R; r <= R; ++r) {
        if (lattice_distance(ipow(ps.eta, r) * ps.alpha, ps.p) < ps.lattice_margin) return false;
        Cplx acc = ps.alpha;
        for (int m = 0; m < ps.n; ++m) {
            acc *= ps.x[m] / ps.y[m];
            if (lattice_distance(ipow(ps.eta, r) * acc, ps.p) < ps.lattice_margin) return false;
        }
    }
    return true;
}

// Convergence slack for the two hypergeometric pairings; each pairing is
// admissible through at least one Jackson side when this returns >= slack.
double pairing_slack(const ParameterSet& ps) {
    const int n = ps.n, ell = ps.ell;
    double px = 1, py = 1;
    for (int m = 0; m < n; ++m) {
        px *= std::abs(ps.x[m]);
        py *= std::abs(ps.y[m]);
    }
    const double ap = std::abs(ps.p), aa = std::abs(ps.alpha), ae = std::abs(ps.eta);
    const double eup = std::pow(ae, ell - 1);
    // frame (x, y, eta), elliptic constant A = p^{1-n} alpha eta^{1-ell} prod x
    const double A1 = std::pow(ap, 1 - n) * aa / eup * px;
    const double mg1x = std::min(1.0, 1.0 / eup) / (std::pow(ap, n) * A1 / px);
    const double mg1y = (std::pow(ap, n - 1) * A1 / py) / std::max(1.0, eup);
    // primed pairing, frame (y, x, eta^{-1}): A' = p^{-n} alpha^{-1} eta^{ell-1} prod y
    const double A2 = std::pow(ap, -n) / aa * eup * py;
    const double mg2x = std::min(1.0, eup) / (std::pow(ap, n) * A2 / py);
    const double mg2y = (std::pow(ap, n - 1) * A2 / px) / std::max(1.0, 1.0 / eup);
    const double s1 = std::max(mg1x, mg1y);  // slack through the better side
    const double s2 = std::max(mg2x, mg2y);
    return std::min(s1, s2);
}

}  // namespace

ParameterSet sample_generic(int n, int ell, std::uint64_t seed, const MagnitudeProfile& profile) {
    Rng rng(seed * 0x2545f4914f6cdd1dull + 0x1234abcd5678ull);
    std::string nearest = "none";
    double nearest_dist = -1;
    for (int attempt = 0; attempt < profile.max_tries; ++attempt) {
        ParameterSet ps;
        ps.n = n;
        ps.ell = ell;
        ps.seed = seed;
        ps.p = rng.uniform(profile.p_min, profile.p_cap) * rng.unit_phase();
        ps.eta = rng.uniform(profile.eta_lo, profile.eta_hi) * rng.unit_phase();
        ps.alpha = rng.uniform(profile.alpha_lo, profile.alpha_hi) * rng.unit_phase();
        ps.x.resize(n);
        ps.y.resize(n);
        for (int m = 0; m < n; ++m) ps.x[m] = rng.uniform(profile.x_lo, profile.x_hi) * rng.unit_phase();
        for (int m = 0; m < n; ++m) ps.y[m] = rng.uniform(profile.y_lo, profile.y_hi) * rng.unit_phase();
        ps.flag = GenericityFlag::Unchecked;

        const auto viol = check_generic(ps);
        if (!viol.empty()) {
            if (viol.front().lattice_dist > nearest_dist) {
                nearest_dist = viol.front().lattice_dist;
                nearest = viol.front().condition;
            }
            continue;
        }
        if (!alpha_conditions_ok(ps)) {
            nearest = "alpha basis/nondegeneracy window";
            continue;
        }
        if (ell > 0 && pairing_slack(ps) < profile.convergence_slack) {
            nearest = "Jackson convergence slack";
            continue;
        }
        ps.flag = GenericityFlag::Generic;
        return ps;
    }
    throw GenericityError("sample_generic: rejection cap exceeded; nearest violated condition: " +
                          nearest);
}

Cplx eta_pow_times(Cplx y, Cplx eta, int s) {
    Cplx r = y;
    for (int i = 0; i < s; ++i) r *= eta;
    return r;
}

ParameterSet build_restricted(const std::vector<Cplx>& y, Cplx eta,
                              const std::vector<int>& ell_bounds, Cplx alpha, Cplx p,
                              std::uint64_t seed, double lattice_margin) {
    const int n = static_cast<int>(y.size());
    if (static_cast<int>(ell_bounds.size()) != n)
        throw std::invalid_argument("build_restricted: ell_bounds length != n");
    int ell = 0;
    for (int b : ell_bounds) ell = std::max(ell, b);
    ParameterSet ps;
    ps.n = n;
    ps.ell = ell;
    ps.p = p;
    ps.eta = eta;
    ps.alpha = alpha;
    ps.y = y;
    ps.x.resize(n);
    ps.seed = seed;
    ps.lattice_margin = lattice_margin;
    ps.ell_bounds = ell_bounds;
    Rng rng(seed * 0x9e3779b97f4a7c15ull + 77);
    for (int m = 0; m < n; ++m) {
        if (ell_bounds[m] < 1 || ell_bounds[m] > ell)
            throw std::invalid_argument("build_restricted: need 1 <= l_m <= ell");
        if (ell_bounds[m] < ell) {
            ps.x[m] = eta_pow_times(y[m], eta, ell_bounds[m]);
        } else {
            // unconstrained entry: draw in the default band off the lattice
            ps.x[m] = rng.uniform(0.3, 0.7) * rng.unit_phase();
        }
    }
    const auto viol = check_gene(ps, ell_bounds);
    if (!viol.empty())
        throw GenericityError("build_restricted: weakened genericity violated: " + viol.front().condition);
    ps.flag = GenericityFlag::Restricted;
    return ps;
}

double convergence_margin(const ParameterSet& ps, Cplx A, int M, JacksonSide side) {
    ps.validate();
    double px = 1, py = 1;
    for (int m = 0; m < ps.n; ++m) {
        px *= std::abs(ps.x[m]);
        py *= std::abs(ps.y[m]);
    }
    const double ae = std::abs(ps.eta);
    if (side == JacksonSide::X) {
        const double bound = std::min(1.0, std::pow(ae, 1 - ps.ell));
        const double attained = std::pow(std::abs(ps.p), ps.n) * std::abs(A) / px;
        return attained == 0.0 ? std::numeric_limits<double>::infinity() : bound / attained;
    }
    const double bound = std::max(1.0, std::pow(ae, ps.ell - 1));
    const double attained = std::pow(std::abs(ps.p), M) * std::abs(A) / py;
    return attained / bound;
}

namespace {
json cplx_to_json(const Cplx& c) { return json::array({c.real(), c.imag()}); }
Cplx cplx_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}
}  // namespace

std::string save_params_json(const ParameterSet& ps) {
    json j;
    j["p"] = cplx_to_json(ps.p);
    j["eta"] = cplx_to_json(ps.eta);
    j["alpha"] = cplx_to_json(ps.alpha);
    j["x"] = json::array();
    for (const auto& v : ps.x) j["x"].push_back(cplx_to_json(v));
    j["y"] = json::array();
    for (const auto& v : ps.y) j["y"].push_back(cplx_to_json(v));
    j["n"] = ps.n;
    j["ell"] = ps.ell;
    j["lattice_margin"] = ps.lattice_margin;
    j["seed"] = ps.seed;
    json flags;
    flags["genericity"] = ps.flag == GenericityFlag::Generic      ? "generic"
                          : ps.flag == GenericityFlag::Restricted ? "restricted"
                                                                  : "unchecked";
    if (!ps.ell_bounds.empty()) flags["ell_bounds"] = ps.ell_bounds;
    j["flags"] = flags;
    return j.dump(2);
}

ParameterSet load_params_json(const std::string& text) {
    const json j = json::parse(text);
    ParameterSet ps;
    ps.p = cplx_from_json(j.at("p"));
    ps.eta = cplx_from_json(j.at("eta"));
    ps.alpha = cplx_from_json(j.at("alpha"));
    for (const auto& v : j.at("x")) ps.x.push_back(cplx_from_json(v));
    for (const auto& v : j.at("y")) ps.y.push_back(cplx_from_json(v));
    ps.n = j.at("n").get<int>();
    ps.ell = j.at("ell").get<int>();
    if (j.contains("lattice_margin")) ps.lattice_margin = j["lattice_margin"].get<double>();
    if (j.contains("seed")) ps.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("flags")) {
        const auto& f = j["flags"];
        if (f.contains("genericity")) {
            const auto g = f["genericity"].get<std::string>();
            ps.flag = g == "generic"      ? GenericityFlag::Generic
                      : g == "restricted" ? GenericityFlag::Restricted
                                          : GenericityFlag::Unchecked;
        }
        if (f.contains("ell_bounds")) ps.ell_bounds = f["ell_bounds"].get<std::vector<int>>();
    }
    ps.validate();
    return ps;
}

}  // namespace qhi
