#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "rmtlab/census.hpp"
#include "rmtlab/config.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/experiments.hpp"
#include "rmtlab/stats.hpp"

using namespace rmt;

namespace {

namespace fs = std::filesystem;

std::string csv_of(const Config& cfg) {
    std::ostringstream out;
    write_results_csv(out, run_experiment(cfg));
    return out.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(RMTLAB_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config parsing") {
    const auto cfg = Config::parse(
        "# comment\n"
        "experiment = levy   # inline\n"
        "  n=12\n"
        "eps_grid = 0.1, 0.5 ,1\n"
        "trials = 1e5\n"
        "\n"
        "methods = exact,esseen\n");
    CHECK(cfg.text("experiment") == "levy");
    CHECK(cfg.integer("n") == 12);
    CHECK(cfg.integer("trials") == 100'000);
    CHECK(cfg.list("eps_grid") == std::vector<double>{0.1, 0.5, 1.0});
    CHECK(cfg.words_or("methods", {}) == std::vector<std::string>{"exact", "esseen"});
    CHECK(cfg.number_or("missing", 2.5) == 2.5);
    CHECK_THROWS_AS(cfg.text("missing"), ValidationError);
    CHECK_THROWS_AS(cfg.number("methods"), ValidationError);
    CHECK_THROWS_AS(Config::parse("n = 1\nn = 2\n"), ValidationError);
    CHECK_THROWS_AS(Config::parse("just words\n"), ValidationError);
    CHECK_THROWS_AS(Config::parse(" = 3\n"), ValidationError);
    CHECK_THROWS_AS(parse_integer("1.5", "x"), ValidationError);
    CHECK_THROWS_AS(parse_integer("-2", "x"), ValidationError);
    CHECK(std::isinf(parse_number("inf", "x")));
}

TEST_CASE("config hash is order-independent and ignores output and workers in metadata") {
    const auto a = Config::parse("n = 3\nexperiment = sign_census\n");
    const auto b = Config::parse("experiment = sign_census\nn = 3\n");
    CHECK(a.hash() == b.hash());
    auto c = a;
    c.set("output", "/tmp/x.csv");
    c.set("workers", "4");
    CHECK(metadata_line(a) == metadata_line(c));
    auto d = a;
    d.set("n", "4");
    CHECK(metadata_line(a) != metadata_line(d));
    CHECK(metadata_line(a).rfind("version=0.1.0, config_hash=", 0) == 0);
    CHECK(metadata_line(a).find("master_seed=1") != std::string::npos);
}

TEST_CASE("Wilson interval") {
    const auto zero = wilson_interval(0, 10);
    CHECK(zero.low == 0.0);
    CHECK(zero.high > 0.0);
    const auto all = wilson_interval(10, 10);
    CHECK(all.high == doctest::Approx(1.0));
    const double z = normal_critical_value(0.95);
    CHECK(z == doctest::Approx(1.959963985).epsilon(1e-9));
    const auto half = wilson_interval(50, 100);
    const double centre = 0.5;
    const double width = z * std::sqrt(0.25 / 100 + z * z / 40'000) / (1 + z * z / 100);
    CHECK(half.low == doctest::Approx(centre - width).epsilon(1e-12));
    CHECK(half.high == doctest::Approx(centre + width).epsilon(1e-12));
    CHECK_THROWS_AS(wilson_interval(1, 0), ValidationError);
    CHECK_THROWS_AS(wilson_interval(5, 4), ValidationError);
    CHECK(standard_normal_cdf(0.0) == doctest::Approx(0.5));
}

TEST_CASE("log-log slope") {
    const std::vector<double> x{1, 2, 4, 8};
    std::vector<double> y;
    for (double v : x) y.push_back(3 * v * v);
    CHECK(loglog_slope(x, y) == doctest::Approx(2.0));
    const std::vector<double> zeros{0, 0, 0, 1};
    CHECK(std::isnan(loglog_slope(x, zeros)));
}

TEST_CASE("Bareiss determinant against cofactor expansion") {
    auto rng = testing::rng_for("bareiss");
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + static_cast<std::size_t>(t % 6);
        std::vector<std::int64_t> m(n * n);
        Eigen::MatrixXd d(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < m.size(); ++k) {
            m[k] = static_cast<std::int64_t>(rng() % 7) - 3;
            d(static_cast<Eigen::Index>(k / n), static_cast<Eigen::Index>(k % n)) = static_cast<double>(m[k]);
        }
        CHECK(bareiss_determinant(m, n) == testing::permutation_det(m, n));
        CHECK(static_cast<double>(bareiss_determinant(m, n)) == testing::cofactor_det(d));
    }
    // Needs a row swap: leading zero.
    CHECK(bareiss_determinant({0, 1, 1, 0}, 2) == -1);
}

TEST_CASE("sign census: exact counts") {
    CHECK(sign_census(1).singular == 0);
    const auto two = sign_census(2);
    CHECK(two.singular == 8);
    CHECK(two.total == 16);
    CHECK(two.probability() == 0.5);
    const auto three = sign_census(3);
    CHECK(three.total == 512);
    CHECK(three.singular == testing::permutation_census(3));
    CHECK(sign_census(4).singular == testing::permutation_census(4));
    CHECK(sign_census(4, 3).singular == sign_census(4, 1).singular);
    CHECK_THROWS_AS(sign_census(6), ResourceError);
}

TEST_CASE("sign census: Monte Carlo within 3 sigma of the exact value") {
    const double p = sign_census(3).probability();
    const auto mc = sign_census_monte_carlo(3, 100'000, SeedPath{9, "census", 0});
    CHECK(std::abs(mc.estimate - p) <= 3.0 * std::sqrt(p * (1 - p) / 100'000.0));
    CHECK(mc.ci.low <= mc.estimate);
    CHECK(mc.estimate <= mc.ci.high);
}

TEST_CASE("experiments validate their keys") {
    auto cfg = Config::parse("experiment = sign_census\nn = 3\nbogus = 1\n");
    CHECK_THROWS_AS(run_experiment(cfg), ValidationError);
    CHECK_THROWS_AS(run_experiment(Config::parse("experiment = levy\nweights = a2\n")), ValidationError);
    CHECK_THROWS_AS(run_experiment(Config::parse("experiment = nope\n")), ValidationError);
    CHECK_THROWS_AS(run_experiment(Config::parse("experiment = tail_rectangular\nn = 5\nN = 5\n")), ValidationError);
    CHECK_THROWS_AS(run_experiment(Config::parse("experiment = sign_census\nn = 7\n")), ResourceError);
    CHECK_THROWS_AS(run_experiment(Config::parse("experiment = tail_square\nn = 5\neps_grid = 0.1, -1\n")), ValidationError);
}

TEST_CASE("every experiment is byte-identical across reruns and worker counts") {
    for (auto cfg : testing::small_configs()) {
        CAPTURE(cfg.canonical());
        cfg.set("workers", "1");
        const auto one = csv_of(cfg);
        CHECK(one == csv_of(cfg));
        cfg.set("workers", "4");
        CHECK(one == csv_of(cfg));
        CHECK(std::count(one.begin(), one.end(), '\n') >= 2);
    }
}

TEST_CASE("the seed changes seeded output") {
    auto cfg = Config::parse("experiment = tail_square\nn = 12\ntrials = 300\n");
    const auto a = csv_of(cfg);
    cfg.set("seed", "2");
    CHECK(a != csv_of(cfg));
}

TEST_CASE("golden outputs") {
    const fs::path dir = RMTLAB_GOLDEN_DIR;
    std::size_t checked = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".cfg") continue;
        CAPTURE(entry.path().string());
        const auto cfg = Config::load(entry.path().string());
        auto expected_path = entry.path();
        expected_path.replace_extension(".csv");
        REQUIRE(fs::exists(expected_path));
        CHECK(csv_of(cfg) == slurp(expected_path));
        ++checked;
    }
    CHECK(checked >= 5);
}

TEST_CASE("run writes the CSV and its metadata") {
    const fs::path out = fs::temp_directory_path() / "rmtlab_harness_run.csv";
    auto cfg = Config::parse("experiment = sign_census\nn = 2\n");
    cfg.set("output", out.string());
    run(cfg);
    CHECK(slurp(out) == csv_of(Config::parse("experiment = sign_census\nn = 2\n")));
    CHECK(slurp(out.string() + ".meta") == metadata_line(cfg) + "\n");
    fs::remove(out);
    fs::remove(out.string() + ".meta");
}

TEST_CASE("command line exit codes") {
    const fs::path out = fs::temp_directory_path() / "rmtlab_cli.csv";
    CHECK(cli("sign_census --set n=2 --quiet --out " + out.string()) == 0);
    CHECK(slurp(out) == csv_of(Config::parse("experiment = sign_census\nn = 2\n")));
    CHECK(cli("sign_census --set n=2 --set typo=1") == 2);
    CHECK(cli("levy --set weights=a2") == 2);
    CHECK(cli("no_such_experiment") == 2);
    CHECK(cli("sign_census --set n=9") == 3);
    CHECK(cli("--help") == 0);
    fs::remove(out);
    fs::remove(out.string() + ".meta");
}

}  // TEST_SUITE
