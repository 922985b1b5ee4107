#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace ssllab {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Seed for an independent stream, a pure function of the base seed and the stream path.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

// mt19937_64 engine with portable uniform, Box-Muller normal and index sampling.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next() { return engine_(); }
    double uniform();  // [0, 1), 53 bits
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    std::size_t below(std::size_t n);  // uniform in [0, n)

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ssllab
