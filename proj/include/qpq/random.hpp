// Deterministic random streams: a master seed plus a stream index yields an
// independent engine, so Monte Carlo batches reproduce bit-for-bit no matter
// how trials are scheduled.
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace qpq {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    // Counter-based derivation: (master, index) is mixed through SplitMix64
    // so neighbouring indices land far apart in the engine's seed space.
    static RandomStream derive(std::uint64_t master_seed, std::uint64_t index) {
        std::uint64_t s = master_seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
        const std::uint64_t a = splitmix64_next(s);
        const std::uint64_t b = splitmix64_next(s);
        return RandomStream(a ^ (b << 1));
    }

    std::uint64_t u64() { return engine_(); }

    // 53-bit uniform in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    int bit() { return static_cast<int>(engine_() >> 63); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform integer in [0, n). Lemire multiply-shift; bias is below 2^-64.
    std::size_t index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("RandomStream::index: empty range");
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[index(i)]);
        }
    }

    // k distinct entries drawn uniformly from pool, returned sorted.
    std::vector<std::size_t> sample(std::vector<std::size_t> pool, std::size_t k) {
        if (k > pool.size()) k = pool.size();
        for (std::size_t i = 0; i < k; ++i) {
            std::swap(pool[i], pool[i + index(pool.size() - i)]);
        }
        pool.resize(k);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace qpq
