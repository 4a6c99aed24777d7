#include "rmtlab/seed.hpp"

namespace rmt {

SeedPath SeedPath::child(std::string_view suffix) const {
    std::string label = experiment_label;
    label += '/';
    label += suffix;
    return {master_seed, std::move(label), trial_index};
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_key(const SeedPath& path) {
    std::uint64_t h = splitmix64(path.master_seed);
    h = splitmix64(h ^ fnv1a64(path.experiment_label));
    h = splitmix64(h ^ splitmix64(path.trial_index + 0x632be59bd9b4e019ULL));
    return h;
}

}  // namespace rmt
