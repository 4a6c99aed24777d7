#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace rmt {

// Address of one reproducible random stream. The stream is a pure function
// of the three fields, so trials can be generated in any order and on any
// number of workers without changing results.
struct SeedPath {
    std::uint64_t master_seed = 0;
    std::string experiment_label;
    std::uint64_t trial_index = 0;

    SeedPath with_trial(std::uint64_t index) const { return {master_seed, experiment_label, index}; }
    SeedPath with_label(std::string label) const { return {master_seed, std::move(label), trial_index}; }
    // Appends "/suffix" to the label; used for nested sub-streams.
    SeedPath child(std::string_view suffix) const;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

// 64-bit key of the stream addressed by `path`.
std::uint64_t derive_key(const SeedPath& path);

// Counter-based generator: output k is splitmix64(key + k * golden).
// Satisfies UniformRandomBitGenerator, cheap to construct per trial.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(const SeedPath& path) : key_(derive_key(path)) {}
    explicit Rng(std::uint64_t key) : key_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        counter_ += 0x9e3779b97f4a7c15ULL;
        return splitmix64(key_ + counter_);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace rmt
