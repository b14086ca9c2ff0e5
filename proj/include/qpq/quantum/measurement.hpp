// Projective measurement of a single qubit inside a composite pure state.
//
// Outcomes use the announcement convention throughout: outcome 0 means the
// qubit was found in |0> (Z basis) or |+> (X basis), outcome 1 means |1>
// or |->. Measurement never mutates its input; the collapsed state is
// returned as a fresh value.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qpq/quantum/state.hpp"
#include "qpq/random.hpp"

namespace qpq {

namespace detail {
inline std::size_t qubit_shift(const PureState& s, std::size_t which) {
    if (which >= s.qubit_count()) {
        throw std::invalid_argument("measure: subsystem index out of range");
    }
    return s.qubit_count() - 1 - which;
}
}  // namespace detail

// Born probabilities of outcomes (0, 1) for measuring qubit `which`.
inline std::array<double, 2> subsystem_probabilities(const PureState& s, std::size_t which,
                                                     Basis basis) {
    const std::size_t shift = detail::qubit_shift(s, which);
    const std::size_t bit = std::size_t{1} << shift;
    double p0 = 0.0, p1 = 0.0;
    if (basis == Basis::Z) {
        for (std::size_t i = 0; i < s.dim(); ++i) {
            ((i & bit) ? p1 : p0) += std::norm(s[i]);
        }
    } else {
        for (std::size_t i = 0; i < s.dim(); ++i) {
            if (i & bit) continue;
            const Complex a0 = s[i], a1 = s[i | bit];
            p0 += 0.5 * std::norm(a0 + a1);
            p1 += 0.5 * std::norm(a0 - a1);
        }
    }
    return {p0, p1};
}

// Renormalized post-measurement state for a forced outcome.
inline PureState collapse_subsystem(const PureState& s, std::size_t which, Basis basis,
                                    int outcome) {
    if (outcome != 0 && outcome != 1) throw std::invalid_argument("collapse: outcome not a bit");
    const std::size_t shift = detail::qubit_shift(s, which);
    const std::size_t bit = std::size_t{1} << shift;

    std::vector<Complex> amps(s.dim());
    double norm2 = 0.0;
    if (basis == Basis::Z) {
        for (std::size_t i = 0; i < s.dim(); ++i) {
            if (((i & bit) != 0) == (outcome == 1)) {
                amps[i] = s[i];
                norm2 += std::norm(s[i]);
            }
        }
    } else {
        const double sign = outcome == 0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < s.dim(); ++i) {
            if (i & bit) continue;
            const Complex proj = 0.5 * (s[i] + sign * s[i | bit]);
            amps[i] = proj;
            amps[i | bit] = sign * proj;
            norm2 += 2.0 * std::norm(proj);
        }
    }
    if (norm2 < 1e-12) {
        throw std::invalid_argument("collapse: outcome has zero probability");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& a : amps) a *= inv;
    return PureState(std::move(amps));
}

struct MeasurementOutcome {
    int outcome;
    PureState collapsed;
};

inline MeasurementOutcome measure_subsystem(const PureState& s, std::size_t which, Basis basis,
                                            RandomStream& rng) {
    const auto p = subsystem_probabilities(s, which, basis);
    const int outcome = rng.uniform01() < p[0] ? 0 : 1;
    return {outcome, collapse_subsystem(s, which, basis, outcome)};
}

// Removes a qubit whose value is already determined (all amplitude mass on
// one side), returning the state of the remaining qubits.
inline PureState drop_settled_qubit(const PureState& s, std::size_t which, int outcome) {
    if (s.qubit_count() < 2) throw std::invalid_argument("drop_settled_qubit: nothing left");
    const std::size_t shift = detail::qubit_shift(s, which);
    const std::size_t bit = std::size_t{1} << shift;
    const std::size_t low_mask = bit - 1;

    std::vector<Complex> amps(s.dim() / 2);
    double discarded = 0.0;
    for (std::size_t i = 0; i < s.dim(); ++i) {
        const bool one = (i & bit) != 0;
        if (one != (outcome == 1)) {
            discarded += std::norm(s[i]);
            continue;
        }
        const std::size_t j = ((i >> (shift + 1)) << shift) | (i & low_mask);
        amps[j] = s[i];
    }
    if (discarded > 1e-18) {
        throw std::invalid_argument("drop_settled_qubit: qubit is not settled");
    }
    return PureState(std::move(amps));
}

}  // namespace qpq
