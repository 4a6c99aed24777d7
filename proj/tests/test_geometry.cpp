#include <doctest.h>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "rmtlab/ensembles.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/geometry.hpp"
#include "rmtlab/spectra.hpp"

using namespace rmt;

namespace {

double sampled_min_l1(const RealMatrix& a, std::size_t samples, const std::string& label) {
    auto rng = testing::rng_for(label);
    double best = INFINITY;
    for (std::size_t i = 0; i < samples; ++i)
        best = std::min(best, (a * testing::unit_gaussian(static_cast<std::size_t>(a.cols()), rng)).lpNorm<1>());
    return best;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("binomial") {
    CHECK(binomial(9, 4) == 126);
    CHECK(binomial(64, 59) == 7'624'512);
    CHECK(binomial(3, 5) == 0);
    CHECK(binomial(200, 100) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("three rows in the plane") {
    RealMatrix a(3, 2);
    a << 1, 0, 0, 1, 0.5, 0.5;
    const auto rep = min_l1_on_sphere(a);
    CHECK(rep.m == 2);
    CHECK(rep.subsets == 3);
    CHECK(rep.degenerate_count == 0);
    const auto oracle = min_l1_descent(a, 1000, SeedPath{1, "descent", 0});
    CHECK(std::abs(rep.min_l1 - oracle.value) <= 1e-8 * oracle.value);
    // Vertices: e1 and e2 give 1.5, (1, -1)/sqrt 2 kills the third row and gives sqrt 2.
    CHECK(rep.min_l1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("an added zero row is skipped as degenerate") {
    auto rng = testing::rng_for("zero-row");
    RealMatrix a = RealMatrix::Zero(6, 3);
    a.topRows(5) = testing::gaussian_matrix(5, 3, rng);
    const auto rep = min_l1_on_sphere(a);
    CHECK(rep.degenerate_count > 0);
    const auto oracle = min_l1_descent(a, 1000, SeedPath{2, "descent", 0});
    CHECK(rep.min_l1 >= oracle.value - 1e-8);
    CHECK(rep.min_l1 <= oracle.value * (1 + 1e-8));
}

TEST_CASE("preconditions") {
    CHECK_THROWS_AS(min_l1_on_sphere(RealMatrix::Ones(3, 3)), DimensionError);
    auto rng = testing::rng_for("budget");
    const RealMatrix big = testing::gaussian_matrix(40, 20, rng);
    CHECK_THROWS_AS(min_l1_on_sphere(big), ResourceError);
    CHECK_THROWS_AS(min_l1_on_sphere(RealMatrix::Zero(5, 3)), DegenerateInputError);
}

TEST_CASE("vertex invariants: unit l1 norm, support inside J, kernel of the complement") {
    for (std::uint64_t t = 0; t < 5; ++t) {
        auto rng = testing::rng_for("vertices", t);
        const RealMatrix a = testing::gaussian_matrix(8, 5, rng);
        SectionOptions opts;
        opts.keep_vertices = true;
        const auto rep = octahedron_section(a, opts);
        REQUIRE(rep.vertices.size() == rep.subsets - rep.degenerate_count);
        const double norm_a = a.norm();
        double min_seen = INFINITY;
        for (const auto& v : rep.vertices) {
            CHECK(std::abs(v.v.lpNorm<1>() - 1.0) <= 1e-12);
            CHECK(std::abs(v.y.norm() - 1.0) <= 1e-12);
            const std::set<std::size_t> j(v.subset.begin(), v.subset.end());
            CHECK(j.size() == rep.m);
            const Vector ay = a * v.y;
            for (Eigen::Index i = 0; i < ay.size(); ++i)
                if (!j.count(static_cast<std::size_t>(i))) CHECK(std::abs(ay(i)) <= 1e-9 * norm_a);
            CHECK(v.l1 == ay.lpNorm<1>());
            min_seen = std::min(min_seen, v.l1);
        }
        CHECK(min_seen == rep.min_l1);
        // The minimum is attained at the reported minimizer.
        CHECK((a * rep.minimizer).lpNorm<1>() == rep.min_l1);
    }
}

TEST_CASE("enumeration is a lower bound and matches the descent oracle") {
    for (std::uint64_t t = 0; t < 3; ++t) {
        auto rng = testing::rng_for("two-sided", t);
        const RealMatrix a = testing::gaussian_matrix(9, 6, rng);
        const auto rep = min_l1_on_sphere(a);
        CHECK(rep.min_l1 <= sampled_min_l1(a, 20'000, "two-sided-samples"));
        const auto oracle = min_l1_descent(a, 1000, SeedPath{3, "descent", t});
        CHECK(std::abs(rep.min_l1 - oracle.value) <= 1e-6 * rep.min_l1);
    }
}

TEST_CASE("homogeneity and worker independence") {
    auto rng = testing::rng_for("scale");
    const RealMatrix a = testing::gaussian_matrix(10, 6, rng);
    const auto base = min_l1_on_sphere(a);
    const auto scaled = min_l1_on_sphere(3.5 * a);
    CHECK(scaled.min_l1 == doctest::Approx(3.5 * base.min_l1).epsilon(1e-12));
    CHECK(scaled.argmin_subset == base.argmin_subset);

    SectionOptions four;
    four.workers = 4;
    four.keep_vertices = true;
    SectionOptions one = four;
    one.workers = 1;
    std::ostringstream s1, s4;
    write_section_csv(s1, octahedron_section(a, one));
    write_section_csv(s4, octahedron_section(a, four));
    CHECK(s1.str() == s4.str());
}

TEST_CASE("coordinate subspace section has diameter 2") {
    RealMatrix a = RealMatrix::Zero(7, 4);
    a.topRows(4) = RealMatrix::Identity(4, 4);
    SectionOptions opts;
    opts.jitter = 1e-9;
    opts.jitter_seed = SeedPath{4, "jitter", 0};
    const auto rep = octahedron_section(a, opts);
    CHECK(rep.diameter() == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("Kashin ratio: at least 1, at most 100 for 9 x 6 Gaussian sections") {
    for (std::uint64_t t = 0; t < 10; ++t) {
        const RealMatrix a = sample_matrix(EnsembleSpec::gaussian(9, 6), SeedPath{5, "kashin", t});
        const auto rep = octahedron_section(a);
        CHECK(rep.kashin_ratio() >= 1.0);
        CHECK(rep.kashin_ratio() <= 100.0);
    }
}

TEST_CASE("Khinchin p = 2 is exact on an isometry") {
    auto rng = testing::rng_for("isometry");
    const RealMatrix g = testing::gaussian_matrix(12, 4, rng);
    const RealMatrix q = Eigen::HouseholderQR<RealMatrix>(g).householderQ() * RealMatrix::Identity(12, 4);
    const auto est = khinchin_constants(std::sqrt(12.0) * q, 2.0, SeedPath{});
    CHECK(est.alpha_exact);
    CHECK(est.beta_exact);
    CHECK(est.alpha == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.beta == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Khinchin p = 1 with repeated sign rows") {
    // Merging parallel rows must not change the exact minimum.
    const RealMatrix small = sample_matrix(EnsembleSpec::rademacher(12, 4), SeedPath{6, "small", 0});
    const auto est_small = khinchin_constants(small, 1.0, SeedPath{6, "starts", 0}, 200);
    CHECK(est_small.alpha_exact);
    CHECK(est_small.alpha == doctest::Approx(min_l1_on_sphere(small).min_l1 / 12.0).epsilon(1e-12));

    const RealMatrix x = sample_matrix(EnsembleSpec::rademacher(64, 6), SeedPath{6, "rows", 0});
    const auto est = khinchin_constants(x, 1.0, SeedPath{6, "starts", 1});
    CHECK(est.alpha_exact);
    CHECK_FALSE(est.beta_exact);
    CHECK(est.alpha <= est.beta);
    CHECK(est.alpha * 64.0 <= sampled_min_l1(x, 10'000, "p1-samples") + 1e-12);
    // |Ax|_1 <= sqrt(N) |A| |x|_2.
    CHECK(est.beta <= singular_values(x).largest() / std::sqrt(64.0) + 1e-12);

    // Fewer distinct directions than dimensions: a unit y kills every row.
    RealMatrix rank_one(5, 3);
    for (Eigen::Index i = 0; i < 5; ++i) rank_one.row(i) << (i % 2 ? -1.0 : 1.0), 1.0, 1.0;
    CHECK(khinchin_constants(rank_one, 1.0, SeedPath{}, 10).alpha == 0.0);
}

TEST_CASE("Khinchin p = 4 at N = n^2 over 20 seeds") {
    for (std::uint64_t t = 0; t < 20; ++t) {
        const RealMatrix x = sample_matrix(EnsembleSpec::rademacher(625, 5), SeedPath{7, "p4", t});
        const auto est = khinchin_constants(x, 4.0, SeedPath{7, "p4-starts", t});
        CHECK_FALSE(est.alpha_exact);
        CHECK(est.alpha >= 0.1);
        CHECK(est.beta <= 3.0 * std::sqrt(4.0));
        CHECK(est.alpha <= est.beta);
    }
}

TEST_CASE("sandwich audit") {
    std::size_t passed = 0;
    bool middle = true;
    for (std::uint64_t t = 0; t < 50; ++t) {
        const RealMatrix a = sample_matrix(EnsembleSpec::gaussian(30, 20), SeedPath{8, "sandwich", t});
        const auto rep = sandwich_audit(a, 0.05, 0.5, 10.0, 10'000, SeedPath{8, "sandwich-x", t});
        middle = middle && rep.middle_holds;
        passed += rep.passed();
        CHECK(rep.min_l1_seen <= rep.max_l2_seen * std::sqrt(30.0) + 1e-12);
    }
    CHECK(middle);
    CHECK(passed == 50);

    const auto zero = sandwich_audit(RealMatrix::Zero(9, 6), 0.05, 0.5, 10.0, 100, SeedPath{});
    CHECK_FALSE(zero.lower_holds);
    CHECK(zero.middle_holds);
    CHECK_FALSE(zero.passed());

    const RealMatrix small = sample_matrix(EnsembleSpec::gaussian(9, 6), SeedPath{8, "small", 0});
    CHECK(sandwich_audit(small, 0.05, 0.5, 10.0, 100, SeedPath{}).exact_minimizer_checked);
    CHECK_THROWS_AS(sandwich_audit(small, 0.05, 0.4, 10.0, 100, SeedPath{}), DimensionError);
}

}  // TEST_SUITE
