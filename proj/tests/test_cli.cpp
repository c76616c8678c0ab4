#include <doctest.h>

#include "cli.hpp"
#include "ilw/spectral.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    const int code = ilw::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("ilw_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("no arguments prints usage and exits 2")
{
    const Outcome o = run({});
    CHECK(o.code == 2);
    CHECK(o.out.find("Usage: ilw_lab") != std::string::npos);
}

TEST_CASE("help exits 0")
{
    CHECK(run({"--help"}).code == 0);
    const Outcome o = run({"lax-check", "--help"});
    CHECK(o.code == 0);
    CHECK(o.out.find("--coth-scale") != std::string::npos);
}

TEST_CASE("parse errors exit 2")
{
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({"lax-check", "--no-such-flag"}).code == 2);
    CHECK(run({"lax-check", "--h", "abc"}).code == 2);
    CHECK(run({"lax-check", "--init", "1:x"}).code == 2);
    CHECK(run({"lax-check", "--init", "1.5:1"}).code == 2);
}

TEST_CASE("library input errors exit 2")
{
    CHECK(run({"alpha", "--k-min", "5", "--k-max", "3"}).code == 2);
    CHECK(run({"simulate", "--dt", "0.3"}).code == 2);
    CHECK(run({"simulate", "--variant", "nls"}).code == 2);
    CHECK(run({"fbound", "--geometry", "torus"}).code == 2);
    // 4πh·32 exceeds the exponential budget.
    CHECK(run({"lax-check", "--h", "5"}).code == 2);
    CHECK(run({"experiment", "no-such-experiment"}).code == 2);
}

TEST_CASE("lax-check passes for the true operator and fails for a mutated one")
{
    const Outcome good = run({"lax-check", "--init", "1:0.5:0.2", "--h", "1"});
    CHECK(good.code == 0);
    CHECK(good.out.find("PASS") != std::string::npos);
    const Outcome bad = run({"lax-check", "--init", "1:0.5:0.2", "--coth-scale", "1.01"});
    CHECK(bad.code == 1);
    CHECK(bad.out.find("FAIL") != std::string::npos);
}

TEST_CASE("illusory-check passes and honors its tolerance")
{
    CHECK(run({"illusory-check", "--init", "1:0.3:0.1"}).code == 0);
    CHECK(run({"illusory-check", "--init", "1:0.3:0.1", "--tolerance", "1e-300"}).code == 1);
}

TEST_CASE("alpha exits 1 when the series is outside the converged regime")
{
    CHECK(run({"alpha", "--init", "1:0.3"}).code == 0);
    CHECK(run({"alpha", "--init", "1:2", "--kappa", "1"}).code == 1);
}

TEST_CASE("config round trip reproduces the same effective configuration")
{
    const fs::path dir = scratch("config");
    const Outcome first = run({"--seed", "7", "--dump-config", "lax-check", "--h", "0.3", "--window", "40"});
    REQUIRE(first.code == 0);
    {
        std::ofstream f(dir / "c.ini");
        f << first.out;
    }
    const Outcome second = run({"--config", (dir / "c.ini").string(), "--dump-config", "lax-check"});
    REQUIRE(second.code == 0);
    CHECK(second.out == first.out);
    CHECK(first.out.find("alpha.delta=0.16666666666666666") != std::string::npos);
    CHECK(first.out.find("dump-config") == std::string::npos);

    // A loaded file runs the subcommand, and command-line flags override it.
    CHECK(run({"--config", (dir / "c.ini").string(), "lax-check"}).code == 0);
    CHECK(run({"--config", (dir / "c.ini").string(), "lax-check", "--coth-scale", "1.01"}).code == 1);
}

TEST_CASE("unknown config keys are rejected")
{
    const fs::path dir = scratch("badconfig");
    {
        std::ofstream f(dir / "a.ini");
        f << "[lax-check]\nbogus=1\n";
    }
    {
        std::ofstream f(dir / "b.ini");
        f << "depth=2\n";
    }
    CHECK(run({"--config", (dir / "a.ini").string(), "lax-check"}).code == 2);
    CHECK(run({"--config", (dir / "b.ini").string(), "lax-check"}).code == 2);
    CHECK(run({"--config", (dir / "missing.ini").string(), "lax-check"}).code == 2);
}

TEST_CASE("ILW_LAB_OUTPUT_DIR receives artifacts with provenance")
{
    const fs::path dir = scratch("env");
    ::setenv("ILW_LAB_OUTPUT_DIR", dir.string().c_str(), 1);
    const Outcome o = run({"--seed", "11", "simulate", "--init", "1:0.5", "--n-modes", "64", "--t-final", "0.01",
                           "--samples", "2"});
    ::unsetenv("ILW_LAB_OUTPUT_DIR");
    REQUIRE(o.code == 0);
    REQUIRE(fs::exists(dir / "simulate.series.jsonl"));
    REQUIRE(fs::exists(dir / "simulate.final.csv"));

    std::ifstream series(dir / "simulate.series.jsonl");
    std::string line;
    std::getline(series, line);
    const auto head = nlohmann::json::parse(line);
    CHECK(head["provenance"]["seed"] == 11);
    CHECK(head["provenance"]["config"]["subcommand"] == "simulate");
    CHECK(head["provenance"]["config"]["t-final"] == "0.01");
    CHECK(!head["provenance"]["version"].get<std::string>().empty());
    int rows = 0;
    while (std::getline(series, line))
        ++rows;
    CHECK(rows == 3);

    const std::string csv = slurp(dir / "simulate.final.csv");
    CHECK(csv.rfind("# {\"provenance\"", 0) == 0);
    std::ifstream in(dir / "simulate.final.csv");
    CHECK(ilw::read_snapshot_csv(in).grid().n_modes() == 64);
}

TEST_CASE("--out-dir takes precedence over the environment")
{
    const fs::path env = scratch("env2");
    const fs::path explicit_dir = scratch("explicit");
    ::setenv("ILW_LAB_OUTPUT_DIR", env.string().c_str(), 1);
    const Outcome o = run({"--out-dir", explicit_dir.string(), "fbound", "--xi-max", "20"});
    ::unsetenv("ILW_LAB_OUTPUT_DIR");
    CHECK(o.code == 0);
    CHECK(fs::exists(explicit_dir / "fbound.csv"));
    CHECK(!fs::exists(env / "fbound.csv"));
    const std::string csv = slurp(explicit_dir / "fbound.csv");
    CHECK(csv.find("xi,F,envelope,ratio") != std::string::npos);
}

TEST_CASE("kappa-limit stays under the equicontinuity bound")
{
    const Outcome o = run({"kappa-limit", "--xi", "6.283185307179586", "--kappas", "10,100,1000"});
    CHECK(o.code == 0);
    CHECK(o.out.find("kappa,2pi_kappa_F,deviation,bound") == 0);
}

TEST_CASE("conserved prints JSON with provenance")
{
    const Outcome o = run({"conserved", "--init", "1:0.5:0.1", "--n-modes", "32"});
    REQUIRE(o.code == 0);
    const auto j = nlohmann::json::parse(o.out);
    CHECK(j["M"].get<double>() == doctest::Approx(0.25 * (0.25 + 0.01)).epsilon(1e-14));
    CHECK(j["provenance"]["config"]["n-modes"] == "32");
}
