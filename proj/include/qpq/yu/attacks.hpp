// The two cheating strategies against the honesty-checked protocol.
//
// Holder side: the basis-random measurement is split into two commuting
// halves over ancillas b (basis register) and s (outcome register). The s
// half answers the announcement; the b half is deferred and performed only
// for audited rounds, which reproduces the honest reply distribution
// exactly. On unaudited rounds the retained (c, b) pair feeds a Helstrom
// measurement that guesses whether the user's bit was conclusive.
//
// User side: audit positions are drawn from inconclusive rounds only, so
// discarding them inflates the conclusive fraction of what remains.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qpq/discrimination.hpp"
#include "qpq/quantum/density.hpp"
#include "qpq/quantum/measurement.hpp"
#include "qpq/quantum/state.hpp"
#include "qpq/yu/protocol.hpp"

namespace qpq::yu {

// The splitting unitary on (c, b, s):
//   |0><0|_c x |0><0|_b x I_s  +  |1><1|_c x |0><0|_b x X_s
// + |+><+|_c x |1><1|_b x I_s  +  |-><-|_c x |1><1|_b x X_s
inline const UnitaryOperator& two_step_unitary() {
    static const UnitaryOperator u = [] {
        SquareMatrix x(2);
        x(0, 1) = 1.0;
        x(1, 0) = 1.0;
        const SquareMatrix id = SquareMatrix::identity(2);
        const SquareMatrix m =
            kron(kron(projector(ket(PreparedSymbol::Z0)), projector(ket(PreparedSymbol::Z0))), id) +
            kron(kron(projector(ket(PreparedSymbol::Z1)), projector(ket(PreparedSymbol::Z0))), x) +
            kron(kron(projector(ket(PreparedSymbol::XPlus)), projector(ket(PreparedSymbol::Z1))), id) +
            kron(kron(projector(ket(PreparedSymbol::XMinus)), projector(ket(PreparedSymbol::Z1))), x);
        return UnitaryOperator(m);
    }();
    return u;
}

// Ancillas start as |+>_b |0>_s; the received qubit is system c.
inline PureState two_step_input(PreparedSymbol prepared) {
    return tensor(tensor(ket(prepared), ket(PreparedSymbol::XPlus)), ket(PreparedSymbol::Z0));
}

inline PureState two_step_post_unitary(PreparedSymbol prepared) {
    return apply(two_step_unitary(), two_step_input(prepared));
}

struct TwoStepRoundState {
    PureState residual_cb;          // systems (c, b) after the s measurement
    int s_outcome = 0;
    std::optional<int> b_outcome;   // set once the round has been audited
};

struct TwoStepAnnounce {
    int announcement = 0;
    TwoStepRoundState state;
};

// First half: measure s in the computational basis and announce the outcome.
inline TwoStepAnnounce two_step_announce(PreparedSymbol prepared, RandomStream& rng) {
    const auto m = measure_subsystem(two_step_post_unitary(prepared), 2, Basis::Z, rng);
    return {m.outcome, {drop_settled_qubit(m.collapsed, 2, m.outcome), m.outcome, std::nullopt}};
}

// Second half, audited rounds only: measure b in the computational basis and
// answer with the state the honest holder would have reported.
// (b, s) -> |0>, |1>, |+>, |-> for (0,0), (0,1), (1,0), (1,1).
inline PreparedSymbol two_step_check_reply(TwoStepRoundState& round, RandomStream& rng) {
    if (round.b_outcome) {
        throw std::logic_error("two_step_check_reply: round already answered");
    }
    const auto m = measure_subsystem(round.residual_cb, 1, Basis::Z, rng);
    round.b_outcome = m.outcome;
    round.residual_cb = m.collapsed;
    return make_symbol(basis_from_bit(m.outcome), round.s_outcome);
}

struct ConclusivenessEnsemble {
    double prior_conclusive = 0.0;
    DensityMatrix rho_conclusive;
    DensityMatrix rho_inconclusive;
};

// Conditions the four post-unitary states on the announced s outcome and
// sorts the residual (c, b) states by whether the user's bit is conclusive
// (announcement different from the prepared state's bit). The s = 0 case
// reproduces the pair {1/4 rho_c, 3/4 rho_in}; s = 1 is its mirror image.
inline ConclusivenessEnsemble make_conclusiveness_ensemble(int s_outcome) {
    std::vector<double> w_con, w_inc;
    std::vector<PureState> st_con, st_inc;
    double total = 0.0, total_con = 0.0;
    for (PreparedSymbol prep : all_symbols) {
        const PureState state = two_step_post_unitary(prep);
        const double p = subsystem_probabilities(state, 2, Basis::Z)[s_outcome] * 0.25;
        if (p <= 1e-12) continue;
        const PureState residual =
            drop_settled_qubit(collapse_subsystem(state, 2, Basis::Z, s_outcome), 2, s_outcome);
        total += p;
        if (s_outcome != bit_of(prep)) {
            total_con += p;
            w_con.push_back(p);
            st_con.push_back(residual);
        } else {
            w_inc.push_back(p);
            st_inc.push_back(residual);
        }
    }
    for (auto& w : w_con) w /= total_con;
    for (auto& w : w_inc) w /= (total - total_con);
    return {total_con / total, mixture(w_con, st_con), mixture(w_inc, st_inc)};
}

inline const ConclusivenessEnsemble& conclusiveness_ensemble(int s_outcome) {
    static const std::array<ConclusivenessEnsemble, 2> cache = {
        make_conclusiveness_ensemble(0), make_conclusiveness_ensemble(1)};
    return cache.at(static_cast<std::size_t>(s_outcome));
}

// Pair ordered (inconclusive, conclusive) so the measurement's zero-eigenvalue
// directions land on effect1 and ties resolve toward the likelier guess.
inline const BinaryMeasurement& conclusiveness_measurement(int s_outcome) {
    static const std::array<BinaryMeasurement, 2> cache = [] {
        auto build = [](int s) {
            const ConclusivenessEnsemble& e = conclusiveness_ensemble(s);
            return helstrom_measurement(WeightedStatePair(
                1.0 - e.prior_conclusive, e.rho_inconclusive, e.prior_conclusive,
                e.rho_conclusive));
        };
        return std::array<BinaryMeasurement, 2>{build(0), build(1)};
    }();
    return cache.at(static_cast<std::size_t>(s_outcome));
}

enum class ConclusivenessGuess { Conclusive, Inconclusive };

// Unaudited rounds: minimum-error guess of the user's knowledge state from
// the retained (c, b) pair.
inline ConclusivenessGuess two_step_guess_conclusive(const TwoStepRoundState& round,
                                                     RandomStream& rng) {
    if (round.b_outcome) {
        throw std::logic_error("two_step_guess_conclusive: round was used for checking");
    }
    const int effect = conclusiveness_measurement(round.s_outcome).sample(round.residual_cb, rng);
    return effect == 1 ? ConclusivenessGuess::Inconclusive : ConclusivenessGuess::Conclusive;
}

// --- Analytic distributions for the indistinguishability claims ---

// Joint probability of (announcement, reply symbol); index = ann * 4 + symbol.
using JointDistribution = std::array<double, 8>;

inline JointDistribution honest_joint_distribution(PreparedSymbol prepared) {
    JointDistribution joint{};
    for (Basis basis : {Basis::Z, Basis::X}) {
        const auto probs = subsystem_probabilities(ket(prepared), 0, basis);
        for (int outcome : {0, 1}) {
            const auto reply = make_symbol(basis, outcome);
            joint[static_cast<std::size_t>(outcome) * 4 + static_cast<std::size_t>(reply)] +=
                0.5 * probs[outcome];
        }
    }
    return joint;
}

inline JointDistribution two_step_joint_distribution(PreparedSymbol prepared) {
    JointDistribution joint{};
    const PureState state = two_step_post_unitary(prepared);
    const auto ps = subsystem_probabilities(state, 2, Basis::Z);
    for (int s = 0; s < 2; ++s) {
        if (ps[s] <= 0.0) continue;
        const PureState given_s = collapse_subsystem(state, 2, Basis::Z, s);
        const auto pb = subsystem_probabilities(given_s, 1, Basis::Z);
        for (int b = 0; b < 2; ++b) {
            const auto reply = make_symbol(basis_from_bit(b), s);
            joint[static_cast<std::size_t>(s) * 4 + static_cast<std::size_t>(reply)] +=
                ps[s] * pb[b];
        }
    }
    return joint;
}

// Same joint, but with b measured before s; the two halves commute, so this
// must match two_step_joint_distribution exactly.
inline JointDistribution two_step_joint_distribution_b_first(PreparedSymbol prepared) {
    JointDistribution joint{};
    const PureState state = two_step_post_unitary(prepared);
    const auto pb = subsystem_probabilities(state, 1, Basis::Z);
    for (int b = 0; b < 2; ++b) {
        if (pb[b] <= 0.0) continue;
        const PureState given_b = collapse_subsystem(state, 1, Basis::Z, b);
        const auto ps = subsystem_probabilities(given_b, 2, Basis::Z);
        for (int s = 0; s < 2; ++s) {
            const auto reply = make_symbol(basis_from_bit(b), s);
            joint[static_cast<std::size_t>(s) * 4 + static_cast<std::size_t>(reply)] +=
                pb[b] * ps[s];
        }
    }
    return joint;
}

// --- Dishonest user: checking-qubit selection ---

struct CheatSelection {
    std::vector<std::size_t> positions;
    double achieved_fraction = 0.0;  // |positions| / raw_length
    bool pool_exhausted = false;     // fewer inconclusive rounds than requested
};

// Draws round(f * raw_length) audit positions from the inconclusive rounds
// only; if fewer exist, every inconclusive round is audited.
inline CheatSelection cheating_select_checks(const Transcript& t, double fraction,
                                             RandomStream& rng) {
    const auto target = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(t.records.size())));
    auto pool = inconclusive_positions(t);
    CheatSelection sel;
    sel.pool_exhausted = pool.size() <= target;
    sel.positions = sel.pool_exhausted ? std::move(pool) : rng.sample(std::move(pool), target);
    sel.achieved_fraction = t.records.empty()
                                ? 0.0
                                : static_cast<double>(sel.positions.size()) /
                                      static_cast<double>(t.records.size());
    return sel;
}

// The full-break variant: audit every inconclusive round, leaving a raw key
// that is conclusive everywhere.
inline CheatSelection cheating_select_all_inconclusive(const Transcript& t) {
    CheatSelection sel;
    sel.positions = inconclusive_positions(t);
    sel.pool_exhausted = true;
    sel.achieved_fraction = t.records.empty()
                                ? 0.0
                                : static_cast<double>(sel.positions.size()) /
                                      static_cast<double>(t.records.size());
    return sel;
}

}  // namespace qpq::yu
