// Minimum-error discrimination of two prior-weighted mixed states, and
// support-based feasibility of unambiguous discrimination.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "qpq/quantum/density.hpp"
#include "qpq/quantum/measurement.hpp"
#include "qpq/quantum/spectrum.hpp"
#include "qpq/random.hpp"

namespace qpq {

struct WeightedStatePair {
    double p1;
    DensityMatrix rho1;
    double p2;
    DensityMatrix rho2;

    WeightedStatePair(double prior1, DensityMatrix state1, double prior2, DensityMatrix state2)
        : p1(prior1), rho1(std::move(state1)), p2(prior2), rho2(std::move(state2)) {
        if (p1 < 0.0 || p2 < 0.0 || std::abs(p1 + p2 - 1.0) > 1e-10) {
            throw std::invalid_argument("WeightedStatePair: priors must be a distribution");
        }
        if (rho1.dim() != rho2.dim()) {
            throw std::invalid_argument("WeightedStatePair: dimension mismatch");
        }
    }

    SquareMatrix weighted_difference() const {
        return p1 * rho1.entries() - p2 * rho2.entries();
    }
};

// Two-outcome POVM. Outcome 1 <-> effect1, outcome 2 <-> effect2.
class BinaryMeasurement {
public:
    BinaryMeasurement(SquareMatrix effect1, SquareMatrix effect2)
        : e1_(std::move(effect1)), e2_(std::move(effect2)) {
        if (e1_.dim() != e2_.dim()) {
            throw std::invalid_argument("BinaryMeasurement: dimension mismatch");
        }
        if (max_abs_diff(e1_ + e2_, SquareMatrix::identity(e1_.dim())) > 1e-9) {
            throw std::invalid_argument("BinaryMeasurement: effects must sum to identity");
        }
        for (const auto* e : {&e1_, &e2_}) {
            const EigenSystem es = hermitian_spectrum(*e, 1e-9);
            if (es.eigenvalues.back() < -1e-9) {
                throw std::invalid_argument("BinaryMeasurement: effect not positive semidefinite");
            }
        }
    }

    const SquareMatrix& effect1() const { return e1_; }
    const SquareMatrix& effect2() const { return e2_; }

    // <psi| E1 |psi>, clamped into [0, 1].
    double probability_effect1(const PureState& s) const {
        if (s.dim() != e1_.dim()) {
            throw std::invalid_argument("BinaryMeasurement: state dimension mismatch");
        }
        Complex acc{};
        for (std::size_t r = 0; r < s.dim(); ++r)
            for (std::size_t c = 0; c < s.dim(); ++c)
                acc += std::conj(s[r]) * e1_(r, c) * s[c];
        return std::clamp(std::real(acc), 0.0, 1.0);
    }

    int sample(const PureState& s, RandomStream& rng) const {
        return rng.uniform01() < probability_effect1(s) ? 1 : 2;
    }

private:
    SquareMatrix e1_, e2_;
};

// Helstrom bound: (1 - ||p1 rho1 - p2 rho2||_1) / 2.
inline double helstrom_error(const WeightedStatePair& pair) {
    return 0.5 * (1.0 - trace_norm(pair.weighted_difference()));
}

// The optimal measurement: effect1 projects onto the nonnegative eigenspace
// of the weighted difference. Eigenvalues within 1e-12 of zero count as
// nonnegative, which pins down the otherwise arbitrary tie directions.
inline BinaryMeasurement helstrom_measurement(const WeightedStatePair& pair) {
    const SquareMatrix diff = pair.weighted_difference();
    const EigenSystem es = hermitian_spectrum(diff);
    const std::size_t n = diff.dim();
    SquareMatrix e1(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (es.eigenvalues[j] < -1e-12) continue;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                e1(r, c) += es.eigenvectors(r, j) * std::conj(es.eigenvectors(c, j));
    }
    SquareMatrix e2 = SquareMatrix::identity(n) - e1;
    return BinaryMeasurement(std::move(e1), std::move(e2));
}

// can_identify_i is true iff supp(rho_i) is not contained in supp(rho_other);
// only then does a measurement exist that sometimes names state i without
// ever being wrong.
inline std::pair<bool, bool> unambiguous_feasible(const DensityMatrix& rho1,
                                                  const DensityMatrix& rho2,
                                                  double tol = 1e-9) {
    if (rho1.dim() != rho2.dim()) {
        throw std::invalid_argument("unambiguous_feasible: dimension mismatch");
    }
    const SquareMatrix p1 = support_projector(rho1, tol);
    const SquareMatrix p2 = support_projector(rho2, tol);
    const SquareMatrix id = SquareMatrix::identity(rho1.dim());
    const bool can1 = ((id - p2) * p1).max_abs() > tol;
    const bool can2 = ((id - p1) * p2).max_abs() > tol;
    return {can1, can2};
}

}  // namespace qpq
