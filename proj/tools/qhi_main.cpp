// qhi: batch verification runner and scalar-kernel utilities.
//
// Subcommands
//   verify         run verification suites, emit a JSON/CSV report
//   eval-phi       evaluate a basic hypergeometric series nphi_{n-1}
//   sample-params  draw a generic parameter set and write it as JSON
//   check-params   list genericity violations of a parameter file
//
// Exit status: 0 all checks passed, 1 a check failed, 2 configuration error,
// 3 numerical machinery failure.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qhi/qseries.hpp"
#include "qhi/runner.hpp"

namespace {

using qhi::Cplx;

// complex literals on the command line use "re+imi" syntax, e.g. 0.5-0.25i
Cplx parse_complex(const std::string& text) {
    std::string s = text;
    s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return std::isspace(c); }), s.end());
    if (s.empty()) throw std::invalid_argument("empty complex literal");
    const bool has_i = s.back() == 'i' || s.back() == 'I';
    if (!has_i) {
        std::size_t pos = 0;
        const double re = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("malformed complex literal: " + text);
        return {re, 0.0};
    }
    s.pop_back();  // drop the i
    // split at the last +/- that is not an exponent sign and not leading
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    if (split == std::string::npos) {
        // pure imaginary: "2i", "-1.5i", "i"
        if (s.empty() || s == "+") return {0.0, 1.0};
        if (s == "-") return {0.0, -1.0};
        std::size_t pos = 0;
        const double im = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("malformed complex literal: " + text);
        return {0.0, im};
    }
    std::size_t pos = 0;
    const double re = std::stod(s.substr(0, split), &pos);
    if (pos != split) throw std::invalid_argument("malformed complex literal: " + text);
    std::string impart = s.substr(split);
    if (impart == "+") impart = "1";
    if (impart == "-") impart = "-1";
    const double im = std::stod(impart, &pos);
    if (pos != impart.size()) throw std::invalid_argument("malformed complex literal: " + text);
    return {re, im};
}

std::vector<Cplx> parse_complex_list(const std::string& text) {
    std::vector<Cplx> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) out.push_back(parse_complex(item));
    return out;
}

bool env_extended_precision() {
    const char* env = std::getenv("QHI_PRECISION");
    return env != nullptr && std::string(env) == "extended";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"q-hypergeometric integral identities: verification toolkit"};
    app.require_subcommand(1);

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "run verification suites");
    qhi::RunConfig config;
    std::vector<std::string> suites{"all"};
    std::string precision = env_extended_precision() ? "extended" : "double";
    verify->add_option("--suite", suites,
                       "suites: riemann|biorthogonality|determinants|qkz|asymptotics|"
                       "restricted|onedim|all");
    verify->add_option("--n", config.n_list, "n values to sweep");
    verify->add_option("--ell", config.ell_list, "ell values to sweep");
    verify->add_option("--seed", config.seed, "base RNG seed");
    verify->add_option("--tol", config.tol, "residual tolerance");
    verify->add_option("--shell-max", config.trunc.jackson_shell_max, "max Jackson shell order");
    verify->add_option("--tail-tol", config.trunc.series_tail_tol, "series/product tail tolerance");
    verify->add_option("--format", config.format, "report format: json|csv");
    verify->add_option("--out", config.out_path, "report output path (default: stdout)");
    verify->add_option("--params", config.params_path, "parameter file used verbatim");
    verify->add_option("--precision", precision, "working precision: double|extended");
    verify->add_option("--jobs", config.jobs, "worker threads for independent checks");
    verify->add_option("--max-compositions", config.max_compositions,
                       "skip grid cells with more compositions than this");

    // ---- eval-phi ----
    auto* evalphi = app.add_subcommand("eval-phi", "evaluate nphi_{n-1}(a; b; p; z)");
    std::string a_str, b_str, p_str = "0.2", z_str = "0.1";
    bool qbinomial_check = false;
    std::string phi_precision = env_extended_precision() ? "extended" : "double";
    qhi::Truncation phi_trunc;
    evalphi->add_option("--a", a_str, "upper parameters, comma-separated re+imi literals")
        ->required();
    evalphi->add_option("--b", b_str, "lower parameters (may be empty for 1phi0)");
    evalphi->add_option("--p", p_str, "nome p");
    evalphi->add_option("--z", z_str, "argument z");
    evalphi->add_option("--tail-tol", phi_trunc.series_tail_tol, "tail tolerance");
    evalphi->add_option("--max-terms", phi_trunc.max_terms, "term cap");
    evalphi->add_option("--precision", phi_precision, "double|extended");
    evalphi->add_flag("--qbinomial-check", qbinomial_check,
                      "also print the q-binomial product route for 1phi0");

    // ---- sample-params ----
    auto* sample = app.add_subcommand("sample-params", "draw a generic parameter set");
    int sp_n = 2, sp_ell = 1;
    std::uint64_t sp_seed = 1;
    std::string sp_out;
    sample->add_option("--n", sp_n, "n");
    sample->add_option("--ell", sp_ell, "ell");
    sample->add_option("--seed", sp_seed, "seed");
    sample->add_option("--out", sp_out, "output path (default: stdout)");

    // ---- check-params ----
    auto* check = app.add_subcommand("check-params", "check genericity of a parameter file");
    std::string cp_path;
    check->add_option("--params", cp_path, "parameter file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*verify) {
            config.suites = suites;
            config.extended_precision = (precision == "extended");
            const qhi::RunOutcome out = qhi::run(config);
            if (config.out_path.empty()) std::cout << out.rendered << "\n";
            return out.exit_code;
        }
        if (*evalphi) {
            const std::vector<Cplx> a = parse_complex_list(a_str);
            const std::vector<Cplx> b = b_str.empty() ? std::vector<Cplx>{} : parse_complex_list(b_str);
            const Cplx p = parse_complex(p_str);
            const Cplx z = parse_complex(z_str);
            std::cout.precision(16);
            if (phi_precision == "extended") {
                using LD = long double;
                std::vector<std::complex<LD>> al, bl;
                for (auto& v : a) al.emplace_back(v.real(), v.imag());
                for (auto& v : b) bl.emplace_back(v.real(), v.imag());
                LD tail = 0;
                const auto val =
                    qhi::phi_series<LD>(al, bl, {p.real(), p.imag()}, {z.real(), z.imag()},
                                        phi_trunc, &tail);
                std::cout << "phi = " << static_cast<double>(val.real()) << " + "
                          << static_cast<double>(val.imag()) << "i  (tail <= "
                          << static_cast<double>(tail) << ", extended precision)\n";
            } else {
                double tail = 0;
                const Cplx val = qhi::phi_series<double>(a, b, p, z, phi_trunc, &tail);
                std::cout << "phi = " << val.real() << " + " << val.imag() << "i  (tail <= " << tail
                          << ")\n";
                if (qbinomial_check && a.size() == 1 && b.empty()) {
                    // 1phi0(a; ; z) = (a z)_inf / (z)_inf
                    const Cplx rhs = qhi::qpoch_inf(a[0] * z, p, phi_trunc) /
                                     qhi::qpoch_inf(z, p, phi_trunc);
                    std::cout << "q-binomial product route = " << rhs.real() << " + " << rhs.imag()
                              << "i\n";
                }
            }
            return 0;
        }
        if (*sample) {
            const qhi::ParameterSet ps = qhi::sample_generic(sp_n, sp_ell, sp_seed);
            const std::string text = qhi::save_params_json(ps);
            if (sp_out.empty()) {
                std::cout << text << "\n";
            } else {
                std::ofstream of(sp_out);
                if (!of) throw std::invalid_argument("cannot write " + sp_out);
                of << text;
            }
            return 0;
        }
        if (*check) {
            std::ifstream in(cp_path);
            if (!in) throw std::invalid_argument("cannot open " + cp_path);
            std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            const qhi::ParameterSet ps = qhi::load_params_json(text);
            const auto viol = qhi::check_generic(ps);
            for (const auto& v : viol)
                std::cout << "violated: " << v.condition << "  (lattice distance " << v.lattice_dist
                          << ")\n";
            if (viol.empty()) std::cout << "generic: all conditions hold\n";
            return viol.empty() ? 0 : 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const qhi::QhiError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
