#include "rmtlab/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rmtlab/errors.hpp"

namespace rmt {
namespace {

constexpr double kMomentTolerance = 1e-12;

struct AtomMoments {
    double total = 0, mean = 0, second = 0, fourth = 0;
};

AtomMoments atom_moments(const std::vector<Atom>& atoms) {
    AtomMoments m;
    for (const auto& a : atoms) {
        m.total += a.probability;
        m.mean += a.probability * a.value;
        m.second += a.probability * a.value * a.value;
        m.fourth += a.probability * a.value * a.value * a.value * a.value;
    }
    return m;
}

bool uses_atoms(ScalarKind kind) {
    return kind == ScalarKind::discrete || kind == ScalarKind::heavy_tail_4th_moment;
}

std::vector<Atom> declared_atoms(const EnsembleSpec& spec) {
    if (spec.kind == ScalarKind::heavy_tail_4th_moment && spec.atoms.empty()) return heavy_tail_atoms();
    return spec.atoms;
}

}  // namespace

std::string to_string(ScalarKind kind) {
    switch (kind) {
    case ScalarKind::gaussian: return "gaussian";
    case ScalarKind::rademacher: return "rademacher";
    case ScalarKind::uniform_symmetric: return "uniform_symmetric";
    case ScalarKind::discrete: return "discrete";
    case ScalarKind::heavy_tail_4th_moment: return "heavy_tail_4th_moment";
    }
    return "unknown";
}

ScalarKind parse_scalar_kind(const std::string& name) {
    if (name == "gaussian") return ScalarKind::gaussian;
    if (name == "rademacher") return ScalarKind::rademacher;
    if (name == "uniform_symmetric" || name == "uniform") return ScalarKind::uniform_symmetric;
    if (name == "discrete") return ScalarKind::discrete;
    if (name == "heavy_tail_4th_moment" || name == "heavy_tail") return ScalarKind::heavy_tail_4th_moment;
    throw ValidationError("unknown ensemble kind '" + name + "'");
}

std::vector<Atom> heavy_tail_atoms(double mass) {
    if (!(mass > 0.0 && mass <= 1.0)) throw ValidationError("heavy_tail_atoms: mass must lie in (0, 1]");
    const double a = 1.0 / std::sqrt(mass);
    return {{-a, mass / 2.0}, {0.0, 1.0 - mass}, {a, mass / 2.0}};
}

EnsembleSpec EnsembleSpec::gaussian(std::size_t rows, std::size_t cols) {
    return {ScalarKind::gaussian, {}, rows, cols, true};
}

EnsembleSpec EnsembleSpec::rademacher(std::size_t rows, std::size_t cols) {
    return {ScalarKind::rademacher, {}, rows, cols, true};
}

void EnsembleSpec::validate() const {
    if (rows < 1 || cols < 1) throw ValidationError("ensemble dimensions must be positive");
    if (!uses_atoms(kind)) {
        if (!atoms.empty()) throw ValidationError("atoms given for non-discrete ensemble " + to_string(kind));
        return;
    }
    const auto declared = declared_atoms(*this);
    if (declared.empty()) throw ValidationError("discrete ensemble needs at least one atom");
    for (const auto& a : declared) {
        if (!std::isfinite(a.value) || !std::isfinite(a.probability))
            throw ValidationError("discrete atom has non-finite value or probability");
        if (a.probability < 0.0) throw ValidationError("discrete atom probability is negative");
    }
    const auto m = atom_moments(declared);
    if (std::abs(m.total - 1.0) > kMomentTolerance)
        throw ValidationError("discrete atom probabilities sum to " + std::to_string(m.total) + ", not 1");
    if (unit_variance) {
        if (std::abs(m.mean) > kMomentTolerance)
            throw ValidationError("unit_variance requires a centered law; atom mean is " + std::to_string(m.mean));
        if (!(m.second > 0.0)) throw ValidationError("unit_variance requires positive variance");
        const auto scaled = atom_moments(effective_atoms());
        if (std::abs(scaled.second - scaled.mean * scaled.mean - 1.0) > kMomentTolerance)
            throw ValidationError("rescaled atoms do not have unit variance");
    }
}

std::vector<Atom> EnsembleSpec::effective_atoms() const {
    if (kind == ScalarKind::rademacher) return {{-1.0, 0.5}, {1.0, 0.5}};
    if (!uses_atoms(kind)) return {};
    auto out = declared_atoms(*this);
    if (unit_variance) {
        const auto m = atom_moments(out);
        const double sd = std::sqrt(m.second - m.mean * m.mean);
        if (sd > 0.0)
            for (auto& a : out) a.value /= sd;
    }
    return out;
}

double EnsembleSpec::mean() const {
    if (kind == ScalarKind::gaussian || kind == ScalarKind::uniform_symmetric) return 0.0;
    return atom_moments(effective_atoms()).mean;
}

double EnsembleSpec::variance() const {
    switch (kind) {
    case ScalarKind::gaussian: return 1.0;
    case ScalarKind::uniform_symmetric: return unit_variance ? 1.0 : 1.0 / 3.0;
    default: {
        const auto m = atom_moments(effective_atoms());
        return m.second - m.mean * m.mean;
    }
    }
}

double EnsembleSpec::fourth_moment() const {
    switch (kind) {
    case ScalarKind::gaussian: return 3.0;
    case ScalarKind::uniform_symmetric: return unit_variance ? 9.0 / 5.0 : 1.0 / 5.0;
    default: return atom_moments(effective_atoms()).fourth;
    }
}

ScalarSampler::ScalarSampler(const EnsembleSpec& spec) : kind_(spec.kind) {
    spec.validate();
    if (kind_ == ScalarKind::uniform_symmetric) scale_ = spec.unit_variance ? std::sqrt(3.0) : 1.0;
    if (uses_atoms(kind_)) {
        double acc = 0.0;
        for (const auto& a : spec.effective_atoms()) {
            acc += a.probability;
            values_.push_back(a.value);
            cumulative_.push_back(acc);
        }
    }
}

double ScalarSampler::operator()(Rng& rng) {
    switch (kind_) {
    case ScalarKind::gaussian: return normal_(rng);
    case ScalarKind::rademacher: return (rng() >> 63) ? 1.0 : -1.0;
    case ScalarKind::uniform_symmetric: return scale_ * (2.0 * rng.uniform01() - 1.0);
    case ScalarKind::discrete:
    case ScalarKind::heavy_tail_4th_moment: {
        const double u = rng.uniform01() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        return values_[static_cast<std::size_t>(it - cumulative_.begin())];
    }
    }
    return 0.0;
}

RealMatrix sample_matrix(const EnsembleSpec& spec, const SeedPath& seed) {
    ScalarSampler draw(spec);
    Rng rng(seed);
    RealMatrix m(static_cast<Eigen::Index>(spec.rows), static_cast<Eigen::Index>(spec.cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = draw(rng);
    return m;
}

RealMatrix sample_haar_orthogonal(std::size_t n, const SeedPath& seed, bool special) {
    if (n < 1) throw ValidationError("sample_haar_orthogonal: n must be positive");
    const auto dim = static_cast<Eigen::Index>(n);
    Rng rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = normal(rng);

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const auto r = qr.matrixQR().diagonal();
    for (Eigen::Index j = 0; j < dim; ++j)
        if (r(j) < 0.0) q.col(j) *= -1.0;
    if (special && q.determinant() < 0.0) q.col(0) *= -1.0;
    return q;
}

ComplexMatrix sample_haar_unitary(std::size_t n, const SeedPath& seed) {
    if (n < 1) throw ValidationError("sample_haar_unitary: n must be positive");
    const auto dim = static_cast<Eigen::Index>(n);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    Eigen::MatrixXcd g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double re = normal(rng);
            const double im = normal(rng);
            g(i, j) = {re, im};
        }

    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    const auto r = qr.matrixQR().diagonal();
    for (Eigen::Index j = 0; j < dim; ++j) {
        const double mod = std::abs(r(j));
        if (mod > 0.0) q.col(j) *= r(j) / mod;
    }
    return q;
}

double estimate_psi2(std::span<const double> samples, int p_max) {
    if (samples.empty()) throw ValidationError("estimate_psi2: empty sample");
    if (samples.size() < 100) throw ValidationError("estimate_psi2: need at least 100 samples");
    if (p_max < 2) throw ValidationError("estimate_psi2: p_max must be at least 2");

    double best = 0.0;
    for (int p = 1; p <= p_max; ++p) {
        double acc = 0.0;
        for (double x : samples) acc += std::pow(std::abs(x), p);
        const double moment = acc / static_cast<double>(samples.size());
        best = std::max(best, std::pow(moment, 1.0 / p) / std::sqrt(static_cast<double>(p)));
    }
    return best;
}

}  // namespace rmt
