#include "qhi/runner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <thread>

namespace qhi {

void RunConfig::validate() const {
    const auto& known = known_suites();
    for (const auto& s : suites)
        if (std::find(known.begin(), known.end(), s) == known.end())
            throw std::invalid_argument("unknown suite: " + s);
    if (format != "json" && format != "csv")
        throw std::invalid_argument("unknown report format: " + format);
    if (n_list.empty() || ell_list.empty())
        throw std::invalid_argument("empty n/ell sweep");
    for (int n : n_list)
        if (n < 1) throw std::invalid_argument("n must be >= 1");
    for (int e : ell_list)
        if (e < 0 || e > kMaxVars) throw std::invalid_argument("ell out of range");
    if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
    trunc.validate();
}

namespace {

std::vector<int> default_restricted_bounds(int n, int ell) {
    std::vector<int> b(n);
    for (int m = 0; m < n; ++m) b[m] = std::max(1, std::min(m + 1, ell));
    return b;
}

}  // namespace

RunOutcome run(const RunConfig& config) {
    config.validate();

    std::vector<std::string> suites = config.suites;
    if (std::find(suites.begin(), suites.end(), "all") != suites.end()) {
        suites = known_suites();
        suites.pop_back();  // drop "all"
    }
    std::sort(suites.begin(), suites.end());
    suites.erase(std::unique(suites.begin(), suites.end()), suites.end());

    std::optional<ParameterSet> loaded;
    if (!config.params_path.empty()) {
        std::ifstream in(config.params_path);
        if (!in) throw std::invalid_argument("cannot open parameter file " + config.params_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        loaded = load_params_json(text);
    }

    struct Task {
        std::string key;
        std::function<CheckReport()> fn;
    };
    std::vector<Task> tasks;

    auto grid = [&](const std::string& suite, auto&& make) {
        if (loaded) {
            tasks.push_back({suite, [=] { return make(loaded->n, loaded->ell); }});
            return;
        }
        for (int n : config.n_list)
            for (int ell : config.ell_list) {
                if (binomial(n + ell - 1, n - 1) > config.max_compositions) continue;
                std::ostringstream key;
                key << suite << ":" << n << ":" << ell;
                tasks.push_back({key.str(), [=] { return make(n, ell); }});
            }
    };

    const Truncation trunc = config.trunc;
    const double tol = config.tol;
    const std::uint64_t seed = config.seed;

    auto params_for = [&](int n, int ell) {
        if (loaded) return *loaded;
        return sample_generic(n, ell, seed);
    };

    for (const auto& suite : suites) {
        if (suite == "riemann") {
            grid(suite, [&, trunc, tol](int n, int ell) {
                return verify_riemann(params_for(n, ell), trunc, tol);
            });
        } else if (suite == "biorthogonality") {
            grid(suite, [&, trunc, tol](int n, int ell) {
                return verify_biorthogonality(params_for(n, ell), trunc, tol);
            });
        } else if (suite == "determinants") {
            grid(suite, [&, trunc, tol, seed](int n, int ell) {
                return verify_determinants(params_for(n, ell), trunc, tol, seed);
            });
        } else if (suite == "qkz") {
            grid(suite, [&, trunc, tol, seed](int n, int ell) {
                return verify_qkz(params_for(n, ell), trunc, tol, seed);
            });
        } else if (suite == "asymptotics") {
            grid(suite, [&, trunc, tol, seed](int n, int ell) {
                AsymptoticsConfig cfg;
                cfg.final_tol = std::max(tol, 1e-3);
                return verify_asymptotics(n, ell, seed, cfg, trunc);
            });
        } else if (suite == "restricted") {
            grid(suite, [&, trunc, tol, seed](int n, int ell) {
                if (ell < 1) ell = 1;
                return verify_restricted(n, default_restricted_bounds(n, ell), seed, trunc, tol);
            });
        } else if (suite == "onedim") {
            // one-dimensional by construction; sweep n only
            for (int n : config.n_list) {
                if (n < 2) continue;
                std::ostringstream key;
                key << suite << ":" << n;
                tasks.push_back({key.str(), [&, n, trunc, tol, seed] {
                                     OnedimConfig cfg;
                                     cfg.phi_tol = std::min(tol, 1e-9);
                                     cfg.extended_precision = config.extended_precision;
                                     return verify_onedim(n, seed, trunc, std::max(tol, 1e-8), cfg);
                                 }});
            }
        }
    }

    std::vector<CheckReport> reports(tasks.size());
    auto run_task = [&](std::size_t i) {
        try {
            reports[i] = tasks[i].fn();
        } catch (const std::exception& e) {
            CheckReport rep;
            rep.check_name = tasks[i].key;
            rep.pass = false;
            rep.max_rel_residual = std::numeric_limits<double>::quiet_NaN();
            rep.note = std::string("numerical failure: ") + e.what();
            reports[i] = rep;
        }
    };
    if (config.jobs <= 1 || tasks.size() <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                run_task(i);
            }
        };
        std::vector<std::thread> pool;
        const int nthreads = std::min<int>(config.jobs, static_cast<int>(tasks.size()));
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // deterministic ordering: by check name, then (n, ell), then seed
    std::vector<std::size_t> idx(reports.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = reports[a];
        const auto& rb = reports[b];
        return std::tie(ra.check_name, ra.params.n, ra.params.ell, ra.seed) <
               std::tie(rb.check_name, rb.params.n, rb.params.ell, rb.seed);
    });
    std::vector<CheckReport> ordered;
    ordered.reserve(reports.size());
    for (std::size_t i : idx) ordered.push_back(std::move(reports[i]));

    RunOutcome out;
    out.reports = std::move(ordered);
    out.rendered =
        config.format == "json" ? reports_to_json(out.reports) : reports_to_csv(out.reports);
    if (!config.out_path.empty()) {
        std::ofstream of(config.out_path);
        if (!of) throw std::invalid_argument("cannot write report to " + config.out_path);
        of << out.rendered;
    }
    out.exit_code = 0;
    for (const auto& r : out.reports) {
        if (r.note.rfind("numerical failure", 0) == 0) {
            out.exit_code = 3;
            break;
        }
        if (!r.pass) out.exit_code = 1;
    }
    return out;
}

}  // namespace qhi
