#include "rmtlab/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "rmtlab/csv.hpp"
#include "rmtlab/ensembles.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/parallel.hpp"
#include "rmtlab/spectra.hpp"

namespace rmt {

std::string to_string(Group g) {
    switch (g) {
    case Group::unitary: return "unitary";
    case Group::orthogonal: return "orthogonal";
    case Group::special_orthogonal: return "special_orthogonal";
    }
    return "unknown";
}

Group parse_group(const std::string& name) {
    if (name == "unitary") return Group::unitary;
    if (name == "orthogonal") return Group::orthogonal;
    if (name == "special_orthogonal") return Group::special_orthogonal;
    throw ValidationError("unknown group '" + name + "' (expected unitary, orthogonal or special_orthogonal)");
}

namespace {

double max_deviation_from_one(const SingularSpectrum& s) {
    double d = 0.0;
    for (double v : s.values) d = std::max(d, std::abs(v - 1.0));
    return d;
}

void check_thresholds(std::span<const double> thresholds) {
    if (thresholds.empty()) throw ValidationError("perturbation_tail: at least one threshold is required");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0)) throw ValidationError("perturbation_tail: thresholds must be positive");
        if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
            throw ValidationError("perturbation_tail: thresholds must be strictly increasing");
    }
}

void finish(TailCurve& curve, std::span<const double> thresholds) {
    std::vector<double> sorted = curve.smallest;
    std::sort(sorted.begin(), sorted.end());
    curve.thresholds.assign(thresholds.begin(), thresholds.end());
    for (double t : thresholds) {
        const auto count = static_cast<std::uint64_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
        curve.counts.push_back(count);
        curve.probs.push_back(static_cast<double>(count) / static_cast<double>(curve.trials));
        curve.ci.push_back(wilson_interval(count, curve.trials));
    }
}

}  // namespace

double dist_to_orthogonal(const RealMatrix& d) {
    if (d.rows() != d.cols()) throw DimensionError("dist_to_orthogonal: matrix must be square");
    return max_deviation_from_one(singular_values(d));
}

double dist_to_unitary(const ComplexMatrix& d) {
    if (d.rows() != d.cols()) throw DimensionError("dist_to_unitary: matrix must be square");
    return max_deviation_from_one(singular_values(d));
}

double degeneracy_tolerance(double norm_d) {
    return 1e-8 * (norm_d + 1.0);
}

TailCurve perturbation_tail(const ComplexMatrix& d, Group group, std::span<const double> thresholds,
                            std::uint64_t trials, const SeedPath& seed, unsigned workers) {
    if (group != Group::unitary) {
        if (d.imag().cwiseAbs().maxCoeff() != 0.0)
            throw ValidationError("perturbation_tail: complex D requires the unitary group");
        return perturbation_tail(RealMatrix(d.real()), group, thresholds, trials, seed, workers);
    }
    if (d.rows() != d.cols() || d.rows() == 0) throw DimensionError("perturbation_tail: D must be square and nonempty");
    if (!d.allFinite()) throw ValidationError("perturbation_tail: D must be finite");
    if (trials == 0) throw ValidationError("perturbation_tail: trials must be positive");
    check_thresholds(thresholds);

    TailCurve curve;
    curve.n = static_cast<std::size_t>(d.rows());
    curve.group = group;
    curve.trials = trials;
    curve.seed = seed.master_seed;
    const auto s = singular_values(d);
    curve.norm_d = s.largest();
    curve.dist_to_group = max_deviation_from_one(s);
    curve.smallest.resize(trials);
    parallel_for(trials, workers, [&](std::size_t t) {
        const ComplexMatrix u = sample_haar_unitary(curve.n, seed.with_trial(t));
        curve.smallest[t] = smallest_singular_value(ComplexMatrix(d + u));
    });
    finish(curve, thresholds);
    return curve;
}

TailCurve perturbation_tail(const RealMatrix& d, Group group, std::span<const double> thresholds, std::uint64_t trials,
                            const SeedPath& seed, unsigned workers) {
    if (group == Group::unitary)
        return perturbation_tail(ComplexMatrix(d.cast<std::complex<double>>()), group, thresholds, trials, seed, workers);
    if (d.rows() != d.cols() || d.rows() == 0) throw DimensionError("perturbation_tail: D must be square and nonempty");
    if (!d.allFinite()) throw ValidationError("perturbation_tail: D must be finite");
    if (trials == 0) throw ValidationError("perturbation_tail: trials must be positive");
    check_thresholds(thresholds);

    TailCurve curve;
    curve.n = static_cast<std::size_t>(d.rows());
    curve.group = group;
    curve.trials = trials;
    curve.seed = seed.master_seed;
    const auto s = singular_values(d);
    curve.norm_d = s.largest();
    curve.dist_to_group = max_deviation_from_one(s);
    curve.smallest.resize(trials);
    const bool special = group == Group::special_orthogonal;
    parallel_for(trials, workers, [&](std::size_t t) {
        const RealMatrix u = sample_haar_orthogonal(curve.n, seed.with_trial(t), special);
        curve.smallest[t] = smallest_singular_value(RealMatrix(d + u));
    });
    finish(curve, thresholds);
    return curve;
}

bool tail_envelope_check(const TailCurve& curve, double c, double big_c) {
    const double n = static_cast<double>(curve.n);
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        const double envelope = std::pow(curve.thresholds[i], c) * std::pow(n, big_c);
        if (curve.probs[i] > envelope + curve.half_width(i)) return false;
    }
    return true;
}

void write_tail_csv(std::ostream& out, const TailCurve& curve) {
    CsvRow()
        .add("group").add("n").add("t").add("prob").add("ci_low").add("ci_high")
        .add("trials").add("norm_D").add("dist_to_On").add("seed")
        .write(out);
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        CsvRow()
            .add(to_string(curve.group))
            .add(static_cast<std::uint64_t>(curve.n))
            .add(curve.thresholds[i])
            .add(curve.probs[i])
            .add(curve.ci[i].low)
            .add(curve.ci[i].high)
            .add(curve.trials)
            .add(curve.norm_d)
            .add(curve.dist_to_group)
            .add(curve.seed)
            .write(out);
    }
}

}  // namespace rmt
