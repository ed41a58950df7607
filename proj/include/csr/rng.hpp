#pragma once

#include <cstdint>
#include <random>

namespace csr {

// Deterministic RNG used everywhere; seed-splitting gives independent
// streams so parallel or multi-stage generation stays reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_base_(seed), gen_(splitmix(seed)) {}

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(gen_);
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        std::normal_distribution<double> d(mean, stddev);
        return d(gen_);
    }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
        return d(gen_);
    }

    bool bernoulli(double p) {
        std::bernoulli_distribution d(p);
        return d(gen_);
    }

    // Disjoint child stream for the given id.
    Rng split(std::uint64_t stream_id) const {
        return Rng(splitmix(seed_base_) ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1)));
    }

    std::mt19937_64& engine() { return gen_; }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_base_;
    std::mt19937_64 gen_;
};

}  // namespace csr
