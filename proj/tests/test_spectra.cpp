#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "helpers.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/spectra.hpp"
#include "rmtlab/structure.hpp"

using namespace rmt;

TEST_SUITE("spectra") {

TEST_CASE("diagonal and identity spectra") {
    RealMatrix d = RealMatrix::Zero(3, 3);
    d(0, 0) = 1;
    d(1, 1) = 3;
    d(2, 2) = 2;
    const auto s = singular_values(d);
    REQUIRE(s.values.size() == 3);
    CHECK(s.values[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(s.values[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s.values[2] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(smallest_singular_value(d) == doctest::Approx(1.0).epsilon(1e-14));

    const auto id = singular_values(RealMatrix(RealMatrix::Identity(7, 7)));
    for (double v : id.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(condition_number(RealMatrix::Identity(7, 7)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("rank-deficient matrix has infinite condition number") {
    RealMatrix m(2, 2);
    m << 1, 2, 2, 4;
    CHECK(std::isinf(condition_number(m)));
}

TEST_CASE("spectrum matches an independent symmetric eigensolver") {
    for (std::uint64_t t = 0; t < 50; ++t) {
        auto rng = testing::rng_for("svd-oracle", t);
        const RealMatrix m = testing::gaussian_matrix(5, 3, rng);
        const auto s = singular_values(m);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.transpose() * m);
        std::vector<double> expected;
        for (Eigen::Index i = 0; i < 3; ++i) expected.push_back(std::sqrt(std::max(0.0, eig.eigenvalues()(i))));
        std::sort(expected.rbegin(), expected.rend());
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(s.values[i] - expected[i]) <= 1e-8 * expected[0]);
        CHECK(smallest_singular_value(m) == doctest::Approx(s.values.back()).epsilon(1e-10));
        for (std::size_t i = 1; i < s.values.size(); ++i) CHECK(s.values[i] <= s.values[i - 1]);
    }
}

TEST_CASE("complex and wide inputs") {
    auto rng = testing::rng_for("complex");
    ComplexMatrix c(4, 6);
    const RealMatrix re = testing::gaussian_matrix(4, 6, rng), im = testing::gaussian_matrix(4, 6, rng);
    c.real() = re;
    c.imag() = im;
    const auto s = singular_values(c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(c * c.adjoint());
    REQUIRE(s.values.size() == 4);
    for (Eigen::Index i = 0; i < 4; ++i)
        CHECK(std::abs(s.values[static_cast<std::size_t>(3 - i)] - std::sqrt(eig.eigenvalues()(i))) <= 1e-8 * s.largest());
    CHECK_THROWS_AS(smallest_singular_value(c), DimensionError);

    const auto v = singular_values_verified(c);
    CHECK(v.residual < 1e-8);
}

TEST_CASE("verification residual and power iteration cross-check") {
    for (std::uint64_t t = 0; t < 20; ++t) {
        auto rng = testing::rng_for("verify", t);
        const RealMatrix m = testing::gaussian_matrix(8 + t % 5, 6, rng);
        const auto v = singular_values_verified(m);
        CHECK(v.residual < 1e-8);
        CHECK(std::abs(power_iteration_norm(m) - v.spectrum.largest()) <= 1e-8 * v.spectrum.largest());
    }
}

TEST_CASE("non-finite entries are rejected") {
    RealMatrix m = RealMatrix::Ones(2, 2);
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(singular_values(m), ValidationError);
    CHECK_THROWS_AS(smallest_singular_value(RealMatrix(RealMatrix::Ones(2, 3))), DimensionError);
}

TEST_CASE("smallest singular value is below every sampled |Mx|") {
    auto rng = testing::rng_for("sampled-min");
    const RealMatrix m = testing::gaussian_matrix(7, 4, rng);
    const double sn = smallest_singular_value(m);
    double sampled = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 10'000; ++i) sampled = std::min(sampled, (m * testing::unit_gaussian(4, rng)).norm());
    CHECK(sn <= sampled + 1e-10);
}

TEST_CASE("product of singular values equals |det| (cofactor oracle)") {
    for (std::size_t n = 1; n <= 8; ++n) {
        auto rng = testing::rng_for("det", n);
        const RealMatrix m = testing::gaussian_matrix(n, n, rng);
        double prod = 1.0;
        for (double v : singular_values(m).values) prod *= v;
        const double det = std::abs(testing::cofactor_det(m));
        CHECK(std::abs(prod - det) <= 1e-6 * det);
    }
}

TEST_CASE("distance_to_span") {
    Vector x(2), b(2);
    x << 1, 0;
    b << 0, 1;
    std::vector<Vector> basis{b};
    CHECK(distance_to_span(x, basis) == doctest::Approx(1.0));
    CHECK(distance_to_span(b * 3.0, basis) < 1e-12);
    CHECK(distance_to_span(x, std::vector<Vector>{}) == doctest::Approx(1.0));

    for (std::uint64_t t = 0; t < 20; ++t) {
        auto rng = testing::rng_for("lsq", t);
        std::vector<Vector> cols;
        RealMatrix bm(6, 5);
        for (int k = 0; k < 5; ++k) {
            cols.push_back(testing::unit_gaussian(6, rng) * 2.0);
            bm.col(k) = cols.back();
        }
        const Vector y = testing::unit_gaussian(6, rng);
        const Eigen::VectorXd coef = bm.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(y);
        const double oracle = (y - bm * coef).norm();
        CHECK(std::abs(distance_to_span(y, cols) - oracle) <= 1e-9);

        // Hyperplane case: the distance is |<Z, y>|.
        const Vector z = random_normal_vector(cols);
        CHECK(distance_to_span(y, cols) == doctest::Approx(std::abs(z.dot(y))).epsilon(1e-10));
    }
}

TEST_CASE("random normal vector") {
    {
        Vector c(2);
        c << 1, 0;
        const Vector z = random_normal_vector(std::vector<Vector>{c});
        CHECK(z(0) == doctest::Approx(0.0));
        CHECK(z(1) == doctest::Approx(1.0));
    }
    {
        Vector e1 = Vector::Unit(3, 0), e2 = Vector::Unit(3, 1);
        const Vector z = random_normal_vector(std::vector<Vector>{e1, e2});
        CHECK(std::abs(z(0)) < 1e-15);
        CHECK(std::abs(z(1)) < 1e-15);
        CHECK(z(2) == doctest::Approx(1.0));
    }
    for (std::uint64_t t = 0; t < 50; ++t) {
        auto rng = testing::rng_for("normal", t);
        const RealMatrix rows = testing::gaussian_matrix(7, 8, rng);
        const Vector z = random_normal_vector(rows);
        CHECK(std::abs(z.norm() - 1.0) < 1e-12);
        CHECK((rows * z).cwiseAbs().maxCoeff() < 1e-9);
        Eigen::Index first = 0;
        while (std::abs(z(first)) <= 1e-12) ++first;
        CHECK(z(first) > 0.0);
    }
    Vector a(3), b(3);
    a << 1, 2, 3;
    b = 2.0 * a;
    CHECK_THROWS_AS(random_normal_vector(std::vector<Vector>{a, b}), DegenerateInputError);
    CHECK_THROWS_AS(random_normal_vector(std::vector<Vector>{a}), DimensionError);
}

TEST_CASE("invertibility via distance on random 10x10 instances") {
    for (std::uint64_t t = 0; t < 20; ++t) {
        auto rng = testing::rng_for("via-distance", t);
        const RealMatrix a = testing::gaussian_matrix(10, 10, rng);
        const Vector x = testing::unit_gaussian(10, rng);
        const auto report = classify(x, 0.25, 0.5);
        if (report.klass != Compressibility::incompressible) continue;
        double rhs = 0.0;
        for (std::size_t k : report.spread_set) {
            std::vector<Vector> others;
            for (Eigen::Index j = 0; j < 10; ++j)
                if (j != static_cast<Eigen::Index>(k)) others.push_back(a.col(j));
            rhs = std::max(rhs, std::abs(x(static_cast<Eigen::Index>(k))) * distance_to_span(a.col(static_cast<Eigen::Index>(k)), others));
        }
        CHECK((a * x).norm() >= rhs - 1e-12);
    }
}

}  // TEST_SUITE
