#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch() {
    const auto dir = fs::temp_directory_path() / ("rbfpide_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

Outcome run(const std::string& args) {
    const auto dir = scratch();
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = std::string(RBFPIDE_CLI) + " " + args + " >" + out.string() + " 2>" +
                            err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

fs::path write_config(const std::string& name, const std::string& body) {
    const auto p = scratch() / name;
    std::ofstream(p) << body;
    return p;
}

const char* kSmallMerton = R"({
  "model": {"kind": "merton", "r": 0.05, "sigma": 0.2, "lambda": 0.1, "mu_j": 0.0, "sigma_j": 0.8},
  "contract": {"strike": 100, "maturity": 1, "side": "call"},
  "numerics": {"n": 101, "m0": 50},
  "spots": [100]
})";

}  // namespace

TEST_CASE("price reports the series oracle for Merton calls") {
    const auto cfg = write_config("merton.json", kSmallMerton);
    const auto r = run("price --config " + cfg.string());
    CHECK(r.code == 0);
    CHECK(r.out.rfind("spot,price,reference,rel_error,oracle\n", 0) == 0);
    CHECK(r.out.find(",13.21849") != std::string::npos);
    CHECK(r.out.find("merton_series") != std::string::npos);
}

TEST_CASE("diffusion configs are checked against Black-Scholes") {
    const auto cfg = write_config("bs.json", R"({
      "model": {"kind": "diffusion", "r": 0.04, "sigma": 0.29},
      "contract": {"strike": 1, "maturity": 1},
      "numerics": {"n": 61, "m0": 20}
    })");
    const auto r = run("price --config " + cfg.string() + " --format json");
    CHECK(r.code == 0);
    CHECK(r.out.find("\"oracle\": \"black_scholes\"") != std::string::npos);
}

TEST_CASE("flags override the file") {
    const auto cfg = write_config("merton.json", kSmallMerton);
    const auto r = run("price --config " + cfg.string() + " --n 41 --m0 10 --format json");
    CHECK(r.code == 0);
    CHECK(r.out.find("\"n\": 41") != std::string::npos);
    CHECK(r.out.find("\"m0\": 10") != std::string::npos);

    const auto swapped = run("price --config " + cfg.string() +
                             " --model '{\"kind\":\"diffusion\",\"r\":0.05,\"sigma\":0.2}'");
    CHECK(swapped.code == 0);
    CHECK(swapped.out.find("black_scholes") != std::string::npos);
}

TEST_CASE("malformed sigma exits with an input error naming the field") {
    const auto cfg = write_config("bad.json", R"({
      "model": {"kind": "merton", "r": 0.05, "sigma": -0.2, "lambda": 0.1, "mu_j": 0.0, "sigma_j": 0.8},
      "contract": {"strike": 100, "maturity": 1}
    })");
    const auto r = run("price --config " + cfg.string());
    CHECK(r.code == 2);
    CHECK(r.err.find("model.sigma") != std::string::npos);
}

TEST_CASE("input errors exit with code 2") {
    CHECK(run("table nonexistent").code == 2);
    CHECK(run("price --config /no/such/file.json").code == 2);
    CHECK(run("price").code == 2);
    CHECK(run("frobnicate").code == 2);
    const auto cfg = write_config("merton.json", kSmallMerton);
    CHECK(run("price --config " + cfg.string() + " --format xml").code == 2);
}

TEST_CASE("numerical failures exit with code 3") {
    // Call payoffs overflow to infinity at the top of this domain.
    const auto cfg = write_config("overflow.json", R"({
      "model": {"kind": "diffusion", "r": 0.04, "sigma": 0.29},
      "contract": {"strike": 1e306, "maturity": 1, "side": "call"},
      "numerics": {"n": 41, "m0": 10}
    })");
    const auto r = run("price --config " + cfg.string());
    CHECK(r.code == 3);
}

TEST_CASE("greeks emit a curve and the smoothness line") {
    const auto cfg = write_config("merton.json", kSmallMerton);
    const auto r = run("greeks --config " + cfg.string());
    CHECK(r.code == 0);
    CHECK(r.out.rfind("s,delta,gamma\n", 0) == 0);
    CHECK(r.out.find("# gamma_second_difference_near_strike=") != std::string::npos);
}

TEST_CASE("repeated runs write identical files") {
    const auto cfg = write_config("merton.json", kSmallMerton);
    const auto a = scratch() / "a.csv";
    const auto b = scratch() / "b.csv";
    CHECK(run("price --config " + cfg.string() + " --out " + a.string()).code == 0);
    CHECK(run("price --config " + cfg.string() + " --out " + b.string()).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK_FALSE(slurp(a).empty());
}

TEST_CASE("list names the built-in tables") {
    const auto r = run("list");
    CHECK(r.code == 0);
    CHECK(r.out.find("bs-put-table1") != std::string::npos);
    CHECK(r.out.find("kou-amer-time") != std::string::npos);
}
