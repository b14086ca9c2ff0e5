// Honest party machinery for the reordering protocol: the holder sends
// conjugate-coding states, the user measures each in Z with probability eta
// (X otherwise), returns the group in a secret order, and announces bases
// and outcomes. The holder then re-measures what came back (step 3) and
// audits where the X-prepared originals went (step 4).
//
// Every state that ever travels is a basis eigenstate, so groups are
// simulated symbolically and re-measurement in the matching basis is exact.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qpq/postprocess.hpp"
#include "qpq/quantum/symbols.hpp"
#include "qpq/random.hpp"
#include "qpq/stats.hpp"

namespace qpq::chang {

struct ChangParams {
    double eta = 0.5;             // probability of a Z-basis measurement
    std::size_t group_size = 6;   // n
    std::size_t group_count = 2000;
    std::size_t database_size = 1000;
    std::size_t substring_count = 4;  // k
    double significance = 0.01;       // for the statistical sub-checks
    std::size_t max_restarts = 50;

    void validate() const {
        if (!(eta > 0.0 && eta < 1.0)) {
            throw std::invalid_argument("ChangParams: eta must lie strictly in (0, 1)");
        }
        if (group_size < 4) throw std::invalid_argument("ChangParams: group size must be >= 4");
        if (group_count < 1) throw std::invalid_argument("ChangParams: need at least one group");
        if (substring_count < 1) throw std::invalid_argument("ChangParams: substrings must be >= 1");
        if (!(significance > 0.0 && significance < 1.0)) {
            throw std::invalid_argument("ChangParams: significance must lie in (0, 1)");
        }
    }
};

using Announcement = std::pair<Basis, PreparedSymbol>;

struct GroupTranscript {
    std::vector<PreparedSymbol> sent;       // original order
    std::vector<Basis> alice_bases;         // original order
    std::vector<PreparedSymbol> alice_outcomes;
    std::vector<std::size_t> permutation;   // original position -> announced slot
    std::vector<Announcement> announced;    // slot order; doubles as returned qubits
};

// Measuring a basis eigenstate: matching basis reproduces it, the conjugate
// basis yields either of its states with probability 1/2.
inline PreparedSymbol measure_symbol(PreparedSymbol state, Basis basis, RandomStream& rng) {
    if (basis_of(state) == basis) return state;
    return make_symbol(basis, rng.bit());
}

inline std::vector<PreparedSymbol> chang_prepare(const ChangParams& params, RandomStream& rng) {
    std::vector<PreparedSymbol> out;
    out.reserve(params.group_count * params.group_size);
    for (std::size_t i = 0; i < params.group_count * params.group_size; ++i) {
        out.push_back(all_symbols[rng.index(4)]);
    }
    return out;
}

inline GroupTranscript alice_measure_group(std::vector<PreparedSymbol> sent, double eta,
                                           RandomStream& rng) {
    const std::size_t n = sent.size();
    GroupTranscript g;
    g.sent = std::move(sent);
    g.alice_bases.reserve(n);
    g.alice_outcomes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Basis basis = rng.bernoulli(eta) ? Basis::Z : Basis::X;
        g.alice_bases.push_back(basis);
        g.alice_outcomes.push_back(measure_symbol(g.sent[i], basis, rng));
    }
    g.permutation.resize(n);
    std::iota(g.permutation.begin(), g.permutation.end(), 0);
    rng.shuffle(g.permutation);
    g.announced.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.announced[g.permutation[i]] = {g.alice_bases[i], g.alice_outcomes[i]};
    }
    return g;
}

struct CheckResult {
    std::size_t deterministic_failures = 0;
    double pvalue = 1.0;
    bool statistical_pass = true;
    bool pass() const { return deterministic_failures == 0 && statistical_pass; }
};

// Step 3, run over every returned qubit of the run: re-measure in the
// announced basis and compare with the announced outcome, then test the
// announced Z fraction against eta. `returned` must be slot-ordered per
// group, matching each group's `announced`.
inline CheckResult bob_step3_check(const std::vector<GroupTranscript>& groups,
                                   const std::vector<std::vector<PreparedSymbol>>& returned,
                                   double eta, double significance, RandomStream& rng) {
    if (returned.size() != groups.size()) {
        throw std::invalid_argument("bob_step3_check: group count mismatch");
    }
    CheckResult r;
    std::uint64_t z_count = 0, total = 0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& announced = groups[gi].announced;
        if (returned[gi].size() != announced.size()) {
            throw std::invalid_argument("bob_step3_check: slot count mismatch");
        }
        for (std::size_t j = 0; j < announced.size(); ++j) {
            const auto [basis, symbol] = announced[j];
            if (measure_symbol(returned[gi][j], basis, rng) != symbol) {
                ++r.deterministic_failures;
            }
            z_count += basis == Basis::Z ? 1 : 0;
            ++total;
        }
    }
    r.pvalue = binomial_two_sided_pvalue(z_count, total, eta);
    r.statistical_pass = r.pvalue >= significance;
    return r;
}

inline std::vector<std::size_t> x_basis_positions(const std::vector<PreparedSymbol>& sent) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < sent.size(); ++i) {
        if (basis_of(sent[i]) == Basis::X) out.push_back(i);
    }
    return out;
}

// An honest user's step-4 disclosure: where each X original actually went.
inline std::vector<std::size_t> honest_step4_disclosure(const GroupTranscript& g) {
    std::vector<std::size_t> out;
    for (std::size_t i : x_basis_positions(g.sent)) out.push_back(g.permutation[i]);
    return out;
}

struct Step4GroupResult {
    bool malformed = false;              // wrong count or duplicate slot
    std::size_t deterministic_failures = 0;
    std::uint64_t x_announced = 0;       // disclosed slots announced in X
    std::uint64_t disclosed = 0;
};

// Per-group deterministic part of step 4. `disclosed[k]` is the announced
// slot claimed for the k-th X-basis original. An X-announced slot must show
// exactly the original state (an X eigenstate re-measured in X is itself);
// a Z-announced slot is uncheckable and accepted.
inline Step4GroupResult bob_step4_group_check(const GroupTranscript& g,
                                              const std::vector<std::size_t>& disclosed) {
    Step4GroupResult r;
    const auto x_positions = x_basis_positions(g.sent);
    if (disclosed.size() != x_positions.size()) {
        r.malformed = true;
        return r;
    }
    std::vector<bool> seen(g.announced.size(), false);
    for (std::size_t k = 0; k < disclosed.size(); ++k) {
        const std::size_t slot = disclosed[k];
        if (slot >= g.announced.size() || seen[slot]) {
            r.malformed = true;
            return r;
        }
        seen[slot] = true;
        const auto [basis, symbol] = g.announced[slot];
        ++r.disclosed;
        if (basis == Basis::X) {
            ++r.x_announced;
            if (symbol != g.sent[x_positions[k]]) ++r.deterministic_failures;
        }
    }
    return r;
}

// Step 4 over the whole run: group checks plus a binomial test that the
// X-announced fraction among disclosed slots is consistent with 1 - eta.
inline CheckResult bob_step4_check(const std::vector<GroupTranscript>& groups,
                                   const std::vector<std::vector<std::size_t>>& disclosures,
                                   double eta, double significance) {
    if (disclosures.size() != groups.size()) {
        throw std::invalid_argument("bob_step4_check: group count mismatch");
    }
    CheckResult r;
    std::uint64_t x_announced = 0, disclosed = 0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const Step4GroupResult gr = bob_step4_group_check(groups[gi], disclosures[gi]);
        if (gr.malformed) {
            ++r.deterministic_failures;
            continue;
        }
        r.deterministic_failures += gr.deterministic_failures;
        x_announced += gr.x_announced;
        disclosed += gr.disclosed;
    }
    r.pvalue = binomial_two_sided_pvalue(x_announced, disclosed, 1.0 - eta);
    r.statistical_pass = r.pvalue >= significance;
    return r;
}

// Step 5: X originals are discarded; every surviving position was prepared
// in Z, so the holder's bit is the prepared bit and the user knows it
// exactly when she measured that qubit in Z.
inline std::vector<RawKeyRecord> build_raw_key(const std::vector<GroupTranscript>& groups) {
    std::vector<RawKeyRecord> out;
    std::size_t position = 0;
    for (const auto& g : groups) {
        for (std::size_t i = 0; i < g.sent.size(); ++i) {
            if (basis_of(g.sent[i]) == Basis::X) continue;
            RawKeyRecord rec;
            rec.position = position++;
            rec.bob_bit = bit_of(g.sent[i]);
            rec.prepared = g.sent[i];
            rec.announcement = bit_of(g.alice_outcomes[i]);
            if (g.alice_bases[i] == Basis::Z) rec.conclusive = bit_of(g.alice_outcomes[i]);
            out.push_back(rec);
        }
    }
    return out;
}

}  // namespace qpq::chang
