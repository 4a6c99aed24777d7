#include "rmtlab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "rmtlab/errors.hpp"
#include "rmtlab/seed.hpp"

namespace rmt {
namespace {

constexpr int kMaxSweeps = 80;
constexpr double kJacobiTolerance = 1e-15;

template <class Scalar>
using Work = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m) {
    if (!m.allFinite()) throw ValidationError("matrix has non-finite entries");
}

inline double conjugate(double x) { return x; }
inline std::complex<double> conjugate(std::complex<double> z) { return std::conj(z); }

// Orthogonalises the columns of w in place; when v is non-null the same
// right rotations are applied to it. On return the column norms of w are
// the singular values.
template <class Scalar>
void hestenes_jacobi(Work<Scalar>& w, Work<Scalar>* v) {
    const Eigen::Index n = w.cols();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double alpha = w.col(p).squaredNorm();
                const double beta = w.col(q).squaredNorm();
                const Scalar gamma = w.col(p).dot(w.col(q));
                const double g = std::abs(gamma);
                if (g == 0.0 || g <= kJacobiTolerance * std::sqrt(alpha * beta)) continue;
                rotated = true;

                // Rotate column q by the conjugate phase so that <w_p, w_q> = g is real.
                const Scalar phase = gamma / g;
                const double zeta = (beta - alpha) / (2.0 * g);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;

                auto rotate = [&](Work<Scalar>& a) {
                    auto cp = a.col(p).eval();
                    auto cq = (a.col(q) * conjugate(phase)).eval();
                    a.col(p) = c * cp - s * cq;
                    a.col(q) = s * cp + c * cq;
                };
                rotate(w);
                if (v) rotate(*v);
            }
        }
        if (!rotated) break;
    }
}

template <class Scalar>
struct JacobiOutput {
    SingularSpectrum spectrum;
    double residual = 0.0;
};

template <class Scalar, class Input>
JacobiOutput<Scalar> jacobi_svd(const Input& input, bool verify) {
    require_finite(input);
    Work<Scalar> processed = input.rows() >= input.cols() ? Work<Scalar>(input) : Work<Scalar>(input.adjoint());
    const Eigen::Index n = processed.cols();

    Work<Scalar> w;
    if (processed.rows() > n) {
        Eigen::HouseholderQR<Work<Scalar>> qr(processed);
        w = qr.matrixQR().topRows(n).template triangularView<Eigen::Upper>();
    } else {
        w = processed;
    }

    Work<Scalar> v;
    if (verify) v = Work<Scalar>::Identity(n, n);
    hestenes_jacobi<Scalar>(w, verify ? &v : nullptr);

    std::vector<double> norms(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) norms[static_cast<std::size_t>(j)] = w.col(j).norm();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return norms[static_cast<std::size_t>(a)] > norms[static_cast<std::size_t>(b)];
    });

    JacobiOutput<Scalar> out;
    out.spectrum.values.reserve(order.size());
    for (auto j : order) out.spectrum.values.push_back(norms[static_cast<std::size_t>(j)]);

    if (verify) {
        Work<Scalar> vs(n, n);
        for (Eigen::Index k = 0; k < n; ++k) vs.col(k) = v.col(order[static_cast<std::size_t>(k)]);
        Eigen::VectorXd sigma2(n);
        for (Eigen::Index k = 0; k < n; ++k) sigma2(k) = out.spectrum.values[static_cast<std::size_t>(k)] * out.spectrum.values[static_cast<std::size_t>(k)];
        const Work<Scalar> gram = processed.adjoint() * processed;
        const Work<Scalar> rebuilt = vs * sigma2.asDiagonal() * vs.adjoint();
        const double s1 = out.spectrum.largest();
        const double scale = s1 > 0.0 ? s1 * s1 : 1.0;
        out.residual = (gram - rebuilt).cwiseAbs().maxCoeff() / scale;
    }
    return out;
}

}  // namespace

double SingularSpectrum::condition_number() const {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (smallest() == 0.0) return std::numeric_limits<double>::infinity();
    return largest() / smallest();
}

SingularSpectrum singular_values(const RealMatrix& m) {
    return jacobi_svd<double>(m, false).spectrum;
}

SingularSpectrum singular_values(const ComplexMatrix& m) {
    return jacobi_svd<std::complex<double>>(m, false).spectrum;
}

VerifiedSpectrum singular_values_verified(const RealMatrix& m) {
    auto out = jacobi_svd<double>(m, true);
    return {std::move(out.spectrum), out.residual};
}

VerifiedSpectrum singular_values_verified(const ComplexMatrix& m) {
    auto out = jacobi_svd<std::complex<double>>(m, true);
    return {std::move(out.spectrum), out.residual};
}

double smallest_singular_value(const RealMatrix& m) {
    if (m.rows() < m.cols()) throw DimensionError("smallest_singular_value needs rows >= cols");
    return singular_values(m).smallest();
}

double smallest_singular_value(const ComplexMatrix& m) {
    if (m.rows() < m.cols()) throw DimensionError("smallest_singular_value needs rows >= cols");
    return singular_values(m).smallest();
}

double condition_number(const RealMatrix& m) {
    return singular_values(m).condition_number();
}

double power_iteration_norm(const RealMatrix& m, std::uint64_t seed, int max_iterations) {
    require_finite(m);
    if (m.size() == 0) return 0.0;
    Rng rng(seed);
    std::normal_distribution<double> normal;
    Vector x(m.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    x.normalize();

    double estimate = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        Vector y = m.transpose() * (m * x);
        const double norm = y.norm();
        if (norm == 0.0) return 0.0;
        x = y / norm;
        const double next = std::sqrt(norm);
        if (std::abs(next - estimate) <= 1e-15 * next) {
            estimate = next;
            break;
        }
        estimate = next;
    }
    return (m * x).norm();
}

double distance_to_span(const Vector& x, std::span<const Vector> basis) {
    if (basis.empty()) return x.norm();
    const Eigen::Index n = x.size();
    Eigen::MatrixXd b(n, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) {
        if (basis[j].size() != n) throw DimensionError("distance_to_span: basis vector dimension mismatch");
        b.col(static_cast<Eigen::Index>(j)) = basis[j];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b);
    qr.setThreshold(1e-12);
    const Eigen::Index rank = qr.rank();
    const Eigen::VectorXd coords = qr.householderQ().adjoint() * x;
    return coords.tail(n - rank).norm();
}

Vector random_normal_vector(std::span<const Vector> columns) {
    if (columns.empty()) throw DimensionError("random_normal_vector: need n-1 >= 1 vectors (use n = 1 explicitly)");
    const Eigen::Index n = columns.front().size();
    RealMatrix rows(static_cast<Eigen::Index>(columns.size()), n);
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].size() != n) throw DimensionError("random_normal_vector: vectors of unequal dimension");
        rows.row(static_cast<Eigen::Index>(j)) = columns[j].transpose();
    }
    return random_normal_vector(rows);
}

Vector random_normal_vector(const RealMatrix& rows) {
    const Eigen::Index n = rows.cols();
    if (rows.rows() != n - 1) throw DimensionError("random_normal_vector: need exactly n-1 vectors in R^n");
    if (n == 1) return Vector::Ones(1);
    require_finite(rows);

    const auto spectrum = singular_values(rows);
    if (!(spectrum.smallest() >= kRankTolerance * spectrum.largest()) || spectrum.largest() == 0.0)
        throw DegenerateInputError("random_normal_vector: vectors are linearly dependent");

    Eigen::MatrixXd b = rows.transpose();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
    Eigen::MatrixXd q = qr.householderQ();
    Vector z = q.col(n - 1);
    z.normalize();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(z(i)) > 1e-12) {
            if (z(i) < 0.0) z = -z;
            break;
        }
    }
    return z;
}

}  // namespace rmt
