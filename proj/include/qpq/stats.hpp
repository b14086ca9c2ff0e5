// Streaming statistics plus the two classical hypothesis tests the
// protocol checks rely on.
#pragma once

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace qpq {

// Welford accumulator with a deterministic pairwise merge, so per-trial
// partials can be reduced in trial order regardless of execution order.
class StatBucket {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    void merge(const StatBucket& other) {
        if (other.n_ == 0) return;
        if (n_ == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(n_);
        const double nb = static_cast<double>(other.n_);
        const double delta = other.mean_ - mean_;
        mean_ += delta * nb / (na + nb);
        m2_ += other.m2_ + delta * delta * na * nb / (na + nb);
        n_ += other.n_;
    }

    std::uint64_t count() const { return n_; }
    double mean() const { return n_ == 0 ? 0.0 : mean_; }
    double sample_variance() const {
        return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    }
    double standard_error() const {
        return n_ > 1 ? std::sqrt(sample_variance() / static_cast<double>(n_)) : 0.0;
    }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Two-sided binomial test: p-value of observing a count at least as far from
// n*p as k, distance measured symmetrically around the mean.
inline double binomial_two_sided_pvalue(std::uint64_t k, std::uint64_t n, double p) {
    if (n == 0) return 1.0;
    if (p <= 0.0 || p >= 1.0) {
        const double expected = p <= 0.0 ? 0.0 : static_cast<double>(n);
        return static_cast<double>(k) == expected ? 1.0 : 0.0;
    }
    const boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
    const double mu = static_cast<double>(n) * p;
    const double d = std::abs(static_cast<double>(k) - mu);

    double lower = 0.0;
    const double lo = std::floor(mu - d + 1e-9);
    if (lo >= 0.0) lower = boost::math::cdf(dist, lo);

    double upper = 0.0;
    const double hi = std::ceil(mu + d - 1e-9);
    if (hi <= 0.0) {
        upper = 1.0;
    } else if (hi <= static_cast<double>(n)) {
        upper = boost::math::cdf(boost::math::complement(dist, hi - 1.0));
    }
    return std::min(1.0, lower + upper);
}

// Pearson chi-square goodness-of-fit p-value for observed category counts
// against a fixed probability vector.
inline double chi_square_pvalue(std::span<const std::uint64_t> counts,
                                std::span<const double> probs) {
    if (counts.size() != probs.size() || counts.empty()) {
        throw std::invalid_argument("chi_square_pvalue: size mismatch");
    }
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) return 1.0;

    double stat = 0.0;
    std::size_t dof = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double expected = static_cast<double>(total) * probs[i];
        if (expected <= 0.0) {
            if (counts[i] != 0) return 0.0;
            continue;
        }
        const double diff = static_cast<double>(counts[i]) - expected;
        stat += diff * diff / expected;
        ++dof;
    }
    if (dof < 2) return 1.0;
    const boost::math::chi_squared_distribution<double> dist(static_cast<double>(dof - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace qpq
