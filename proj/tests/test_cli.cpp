#include "nucav/cli.hpp"
#include "nucav/optimize.hpp"
#include "nucav/records.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nucav;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream o, e;
    args.insert(args.begin(), {"--data", NUCAV_TEST_DATA "/materials.db"});
    const int code = run_cli(args, o, e);
    return {code, o.str(), e.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "nucav_cli_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("help and usage errors") {
    const auto h = run({"--help"});
    CHECK(h.code == exit_ok);
    CHECK(h.out.find("scan") != std::string::npos);
    const auto sh = run({"scan", "--help"});
    CHECK(sh.code == exit_ok);
    CHECK(sh.out.find("--spot-min-nm") != std::string::npos);
    const auto bad = run({"rocking", "--bogus-flag"});
    CHECK(bad.code == exit_usage);
    CHECK(bad.err.rfind("error: usage: ", 0) == 0);
    CHECK(std::count(bad.err.begin(), bad.err.end(), '\n') == 1);
    CHECK(run({"frobnicate"}).code == exit_usage);
    CHECK(run({}).code == exit_usage);
    CHECK(run({"excite", "--isotope", "Fe57"}).code == exit_usage);
}

TEST_CASE("runtime errors are single machine-parsable lines") {
    const auto r = run({"excite", "--isotope", "Nope", "--source", "XFELO", "--spot-size-nm", "40"});
    CHECK(r.code == exit_runtime);
    CHECK(r.err == "error: lookup: unknown isotope 'Nope'\n");
    const auto m = run({"rocking", "--cavity", "/nonexistent.cav", "--energy-keV", "14.4125"});
    CHECK(m.code == exit_runtime);
    CHECK(m.err.rfind("error: io: ", 0) == 0);
}

TEST_CASE("rocking over an all-vacuum stack reflects nothing") {
    const auto r = run({"rocking", "--layers", "vacuum:inf,vacuum:inf", "--energy-keV", "14.4125", "--points", "5"});
    REQUIRE(r.code == exit_ok);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "theta_mrad,reflectance,transmittance");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        const auto a = line.find(','), b = line.find(',', a + 1);
        CHECK(line.substr(a + 1, b - a - 1) == "0");
    }
    CHECK(rows == 5);
}

TEST_CASE("materials subcommands") {
    CHECK(run({"materials", "list"}).out.find("Fe57") != std::string::npos);
    const auto s = run({"materials", "show", "XFELO"});
    CHECK(s.code == exit_ok);
    CHECK(s.out.find("chi_source") != std::string::npos);
    CHECK(run({"materials", "show", "Nothing"}).code == exit_runtime);
}

TEST_CASE("excite record and CSV") {
    const auto r = run({"excite", "--isotope", "Fe57", "--source", "500,1e-4", "--w0-nm", "40", "--xi", "2",
                        "--theta-mrad", "4"});
    REQUIRE(r.code == exit_ok);
    CHECK(r.out.find("pulse_area_rad=") != std::string::npos);
    CHECK(r.out.find("fluence_uJ_um2_meV=") != std::string::npos);
    const auto c = run({"excite", "--isotope", "Fe57", "--source", "XFELO", "--spot-size-nm", "40", "--csv"});
    CHECK(c.out.rfind("isotope,source,w0_nm,xi,pulse_area_rad", 0) == 0);
    CHECK(std::count(c.out.begin(), c.out.end(), '\n') == 2);
}

TEST_CASE("outputs carry a metadata sidecar") {
    const auto out = scratch("rock.csv");
    const auto r = run({"--out", out.string(), "rocking", "--cavity", NUCAV_TEST_DATA "/cavities/fe57_reference.cav",
                        "--isotope", "Fe57", "--points", "11"});
    REQUIRE(r.code == exit_ok);
    CHECK(r.out.empty());
    const auto meta = json::parse(slurp(out.string() + ".meta.json"));
    CHECK(meta["command"] == "rocking");
    CHECK(meta["config"]["points"] == 11);
    CHECK(meta["config"]["layers"].size() == 6);
    CHECK(meta.contains("version"));
    CHECK(slurp(out).rfind("theta_mrad,", 0) == 0);
}

TEST_CASE("fieldmap writes the requested grid") {
    const auto r = run({"fieldmap", "--cavity", NUCAV_TEST_DATA "/cavities/fe57_reference.cav", "--isotope", "Fe57",
                        "--spot-size-nm", "200", "--nx", "4", "--nz", "3"});
    REQUIRE(r.code == exit_ok);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 13);
}

TEST_CASE("optimize record round-trips into a fixed-geometry scan") {
    const auto rec = scratch("opt.json"), geo = scratch("opt.cav");
    const auto o = run({"--out", rec.string(), "--seed", "3", "optimize", "--isotope", "Fe57", "--spot-size-nm", "40",
                        "--budget", "200", "--geometry-out", geo.string()});
    REQUIRE(o.code == exit_ok);
    const auto j = json::parse(slurp(rec));
    const auto back = optimization_from_json(j);
    CHECK(to_json(back.best_params) == j["best_params"]);
    CHECK(j["trace"].size() >= 1);
    CHECK(j["bounds"].contains("Pt"));
    const auto f1 = run({"scan", "--mode", "fixed:" + rec.string(), "--spot-min-nm", "40", "--spot-max-nm", "80",
                         "--points", "2", "--sources", "XFELO"});
    const auto f2 = run({"scan", "--mode", "fixed:" + geo.string(), "--spot-min-nm", "40", "--spot-max-nm", "80",
                         "--points", "2", "--sources", "XFELO"});
    REQUIRE(f1.code == exit_ok);
    CHECK(f1.out == f2.out);
    const auto t = parse_scan_csv(f1.out);
    CHECK(t.rows[0].xi == doctest::Approx(back.best_xi).epsilon(1e-12));
}

TEST_CASE("scan is reproducible byte for byte") {
    const std::vector<std::string> args{"--seed", "9",          "scan",     "--isotopes", "Fe57",   "--spot-min-nm",
                                        "30",     "--spot-max-nm", "90",    "--points",   "3",      "--budget",
                                        "120",    "--sources",  "XFELO,EuXFEL_SASE"};
    const auto a = run(args), b = run(args);
    REQUIRE(a.code == exit_ok);
    CHECK(a.out == b.out);
    CHECK(scan_csv(parse_scan_csv(a.out)) == a.out);
    auto threaded = args;
    threaded.insert(threaded.begin(), {"--threads", "1"});
    CHECK(run(threaded).out == a.out);
}
