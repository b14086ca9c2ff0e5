// Honest party machinery for the honesty-checked oblivious-key protocol:
// the user prepares conjugate-coding states, the database holder measures in
// a key-bit-selected basis and announces the outcome bit, and the user audits
// a random subset of her conclusive positions.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qpq/postprocess.hpp"
#include "qpq/quantum/measurement.hpp"
#include "qpq/quantum/state.hpp"
#include "qpq/quantum/symbols.hpp"
#include "qpq/random.hpp"

namespace qpq::yu {

struct YuParams {
    std::size_t raw_length = 100000;   // k * N rounds before checking
    std::size_t substring_count = 4;   // k
    std::size_t database_size = 25000; // N
    double check_fraction = 0.1;       // f, relative to raw_length
    std::size_t max_restarts = 50;

    void validate() const {
        if (raw_length < 1) throw std::invalid_argument("YuParams: raw_length must be >= 1");
        if (substring_count < 1) throw std::invalid_argument("YuParams: substrings must be >= 1");
        if (database_size < 1) throw std::invalid_argument("YuParams: database size must be >= 1");
        if (raw_length != substring_count * database_size) {
            throw std::invalid_argument("YuParams: raw_length must equal substrings * db size");
        }
        if (check_fraction < 0.0 || check_fraction >= 1.0) {
            throw std::invalid_argument("YuParams: check fraction must lie in [0, 1)");
        }
    }
};

enum class Verdict { Pending, Pass, Fail, Aborted };

struct Transcript {
    std::vector<RawKeyRecord> records;
    std::vector<std::size_t> checking_positions;
    std::map<std::size_t, PreparedSymbol> check_replies;
    Verdict verdict = Verdict::Pending;
};

struct RoundResult {
    int announcement = 0;
    std::optional<int> conclusive;  // the user's deduced key bit, when any
};

// One oblivious-key round: the holder measures the prepared state in the
// basis named by bob_bit (0 -> Z, 1 -> X) and announces the outcome bit.
// The user learns the key bit exactly when the announcement could not have
// come from measuring in the preparation's own basis, i.e. when it differs
// from the prepared state's bit; the deduced value is then the other basis.
inline RoundResult stage1_round(int bob_bit, PreparedSymbol prepared, RandomStream& rng) {
    const Basis measured = basis_from_bit(bob_bit);
    const auto outcome = measure_subsystem(ket(prepared), 0, measured, rng);
    RoundResult r;
    r.announcement = outcome.outcome;
    if (r.announcement != bit_of(prepared)) {
        r.conclusive = basis_bit(other_basis(basis_of(prepared)));
    }
    return r;
}

// Runs stage 1 for every key bit; preparations are drawn uniformly.
inline Transcript run_stage1(const YuParams& params, const std::vector<int>& bob_bits,
                             RandomStream& rng) {
    if (bob_bits.size() != params.raw_length) {
        throw std::invalid_argument("run_stage1: key length must equal raw_length");
    }
    Transcript t;
    t.records.reserve(bob_bits.size());
    for (std::size_t i = 0; i < bob_bits.size(); ++i) {
        const auto prepared = all_symbols[rng.index(4)];
        const RoundResult r = stage1_round(bob_bits[i], prepared, rng);
        t.records.push_back({i, bob_bits[i], r.announcement, r.conclusive, prepared});
    }
    return t;
}

inline std::vector<std::size_t> conclusive_positions(const Transcript& t) {
    std::vector<std::size_t> out;
    for (const auto& rec : t.records)
        if (rec.conclusive) out.push_back(rec.position);
    return out;
}

inline std::vector<std::size_t> inconclusive_positions(const Transcript& t) {
    std::vector<std::size_t> out;
    for (const auto& rec : t.records)
        if (!rec.conclusive) out.push_back(rec.position);
    return out;
}

// The honest user audits round(f * raw_length) of her conclusive positions,
// capped by how many there are.
inline std::vector<std::size_t> honest_select_checks(const Transcript& t, double fraction,
                                                     RandomStream& rng) {
    const auto target = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(t.records.size())));
    return rng.sample(conclusive_positions(t), target);
}

// What an honest holder answers at a checked position: the state it actually
// observed, i.e. the measured basis with the announced outcome bit.
inline std::map<std::size_t, PreparedSymbol> honest_check_replies(
    const Transcript& t, const std::vector<std::size_t>& positions) {
    std::map<std::size_t, PreparedSymbol> replies;
    for (std::size_t p : positions) {
        const RawKeyRecord& rec = t.records.at(p);
        replies.emplace(p, make_symbol(basis_from_bit(rec.bob_bit), rec.announcement));
    }
    return replies;
}

// At a conclusive position the user knows both the holder's basis and the
// outcome, so exactly one reply is acceptable. At an inconclusive position
// (reachable only through dishonest selection) she has no way to verify and
// accepts anything. A missing reply fails.
inline bool verify_check_replies(const Transcript& t,
                                 const std::map<std::size_t, PreparedSymbol>& replies) {
    for (std::size_t p : t.checking_positions) {
        const auto it = replies.find(p);
        if (it == replies.end()) return false;
        const RawKeyRecord& rec = t.records.at(p);
        if (!rec.conclusive) continue;
        const PreparedSymbol expected =
            make_symbol(other_basis(basis_of(rec.prepared)), rec.announcement);
        if (it->second != expected) return false;
    }
    return true;
}

// Raw key left after the checked positions are discarded, original order.
inline std::vector<RawKeyRecord> drop_checked(const Transcript& t) {
    std::vector<bool> checked(t.records.size(), false);
    for (std::size_t p : t.checking_positions) checked.at(p) = true;
    std::vector<RawKeyRecord> out;
    out.reserve(t.records.size() - t.checking_positions.size());
    for (const auto& rec : t.records)
        if (!checked[rec.position]) out.push_back(rec);
    return out;
}

}  // namespace qpq::yu
