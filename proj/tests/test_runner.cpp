#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "qhi/runner.hpp"

using namespace qhi;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QHI_BIN) + " " + args + " >/tmp/qhi_cli_out.txt 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("config validation") {
    RunConfig bad;
    bad.suites = {"nonsense"};
    CHECK_THROWS_AS(run(bad), std::invalid_argument);

    RunConfig badfmt;
    badfmt.format = "xml";
    CHECK_THROWS_AS(run(badfmt), std::invalid_argument);
}

TEST_CASE("onedim run end to end, reports and determinism") {
    RunConfig cfg;
    cfg.suites = {"onedim"};
    cfg.n_list = {2};
    cfg.seed = 7;
    cfg.tol = 1e-8;
    cfg.format = "json";
    const RunOutcome out = run(cfg);
    CHECK(out.exit_code == 0);
    REQUIRE(out.reports.size() == 1);
    CHECK(out.reports[0].pass);

    // schema-stable record
    const json arr = json::parse(out.rendered);
    REQUIRE(arr.is_array());
    for (const char* field : {"check_name", "seed", "parameters", "max_abs_residual",
                              "max_rel_residual", "pass", "elapsed_seconds", "tolerance"})
        CHECK(arr[0].contains(field));

    // rerun reproduces residuals bitwise
    const RunOutcome out2 = run(cfg);
    CHECK(out2.reports[0].max_rel_residual == out.reports[0].max_rel_residual);

    // CSV and JSON encode identical content
    RunConfig csvcfg = cfg;
    csvcfg.format = "csv";
    const RunOutcome out3 = run(csvcfg);
    CHECK(out3.reports[0].max_rel_residual == out.reports[0].max_rel_residual);
    CHECK(out3.rendered.find("onedim") != std::string::npos);
    std::ostringstream resid;
    resid.precision(17);
    resid << out.reports[0].max_rel_residual;
    CHECK(out3.rendered.find(resid.str()) != std::string::npos);
}

TEST_CASE("parameter file is used verbatim") {
    const ParameterSet ps = sample_generic(2, 1, 99);
    const std::string path = "/tmp/qhi_params_test.json";
    {
        std::ofstream of(path);
        of << save_params_json(ps);
    }
    RunConfig cfg;
    cfg.suites = {"riemann"};
    cfg.params_path = path;
    cfg.tol = 1e-7;
    const RunOutcome out = run(cfg);
    REQUIRE(out.reports.size() == 1);
    CHECK(out.reports[0].params.digest() == ps.digest());
    CHECK(out.exit_code == 0);
}

TEST_CASE("worker pool matches serial execution") {
    RunConfig cfg;
    cfg.suites = {"biorthogonality", "riemann"};
    cfg.n_list = {1, 2};
    cfg.ell_list = {1};
    cfg.tol = 1e-7;
    cfg.seed = 3;
    const RunOutcome serial = run(cfg);
    cfg.jobs = 4;
    const RunOutcome parallel = run(cfg);
    REQUIRE(serial.reports.size() == parallel.reports.size());
    for (std::size_t i = 0; i < serial.reports.size(); ++i) {
        CHECK(serial.reports[i].check_name == parallel.reports[i].check_name);
        CHECK(serial.reports[i].max_rel_residual == parallel.reports[i].max_rel_residual);
    }
}

TEST_CASE("command line interface") {
    // end-to-end verify run writing a report file
    CHECK(run_cli("verify --suite onedim --n 2 --seed 7 --tol 1e-8 --format json "
                  "--out /tmp/qhi_report.json") == 0);
    const json rep = json::parse(slurp("/tmp/qhi_report.json"));
    CHECK(rep.is_array());
    CHECK(rep[0]["pass"].get<bool>());

    // unknown suite: usage error, no report
    std::remove("/tmp/qhi_report2.json");
    CHECK(run_cli("verify --suite bogus --out /tmp/qhi_report2.json") == 2);
    std::ifstream probe("/tmp/qhi_report2.json");
    CHECK_FALSE(probe.good());

    // eval-phi: z = 0 gives 1
    CHECK(run_cli("eval-phi --a 0.5,0.25 --b 0.4 --p 0.3 --z 0") == 0);
    const std::string out = slurp("/tmp/qhi_cli_out.txt");
    CHECK(out.find("phi = 1") != std::string::npos);

    // malformed complex literal: usage error
    CHECK(run_cli("eval-phi --a 0.5+bogus --p 0.3 --z 0.1") == 2);

    // q-binomial side-by-side for 1phi0
    CHECK(run_cli("eval-phi --a 0.5 --p 0.5 --z 0.25 --qbinomial-check") == 0);
    const std::string out2 = slurp("/tmp/qhi_cli_out.txt");
    CHECK(out2.find("q-binomial product route") != std::string::npos);

    // sample-params | check-params round trip
    CHECK(run_cli("sample-params --n 2 --ell 2 --seed 5 --out /tmp/qhi_ps.json") == 0);
    CHECK(run_cli("check-params --params /tmp/qhi_ps.json") == 0);

    // extended precision path
    CHECK(run_cli("eval-phi --a 0.5 --b 0.3 --p 0.2 --z 0.1 --precision extended") == 0);
    CHECK(slurp("/tmp/qhi_cli_out.txt").find("extended precision") != std::string::npos);
}
