// The two cheating strategies against the reordering protocol.
//
// Holder side: the announced multiset of bases and outcomes within a group,
// together with the known multiset of originals, supports exact Bayesian
// inference about which originals were measured in X (and hence contribute
// inconclusive raw-key bits). Enumeration collapses identical symbols, so a
// group costs contingency tables instead of n! permutations.
//
// User side: store the received qubits unmeasured, send a fabricated group
// whose composition matches the expected eta proportions, and postpone every
// real measurement until the audits reveal which basis is safe.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qpq/chang/protocol.hpp"
#include "qpq/quantum/symbols.hpp"
#include "qpq/random.hpp"
#include "qpq/stats.hpp"

namespace qpq::chang {

inline constexpr std::size_t kCountingMaxGroup = 8;  // n! guard for the oracle path

struct PositionPosterior {
    std::size_t original_position = 0;
    double p_measured_x = 0.0;
};

namespace detail {

inline double symbol_likelihood(PreparedSymbol original, PreparedSymbol announced, double eta) {
    const Basis basis = basis_of(announced);
    const double basis_prob = basis == Basis::Z ? eta : 1.0 - eta;
    if (basis_of(original) == basis) {
        return original == announced ? basis_prob : 0.0;
    }
    return 0.5 * basis_prob;
}

inline constexpr std::array<double, 9> kFactorial{1, 1, 2, 6, 24, 120, 720, 5040, 40320};

}  // namespace detail

// Exact posterior, per original position, that the user measured that qubit
// in the X basis, given the announced (basis, outcome) multiset. Assignments
// of originals to announced slots are enumerated as count tables over the
// four symbol classes; identical symbols share one table cell, so the sum
// over all n! permutations reduces to a handful of tables.
inline std::vector<PositionPosterior> counting_infer(
    const std::vector<PreparedSymbol>& sent, const std::vector<Announcement>& announced,
    double eta) {
    const std::size_t n = sent.size();
    if (announced.size() != n) throw std::invalid_argument("counting_infer: size mismatch");
    if (n == 0 || n > kCountingMaxGroup) {
        throw std::invalid_argument("counting_infer: group size must be in [1, 8]");
    }
    if (!(eta > 0.0 && eta < 1.0)) {
        throw std::invalid_argument("counting_infer: eta must lie strictly in (0, 1)");
    }

    std::array<std::size_t, 4> sent_count{};
    for (PreparedSymbol s : sent) ++sent_count[static_cast<std::size_t>(s)];
    std::array<std::size_t, 4> slot_count{};
    for (const auto& [basis, symbol] : announced) {
        if (basis_of(symbol) != basis) {
            throw std::invalid_argument("counting_infer: announced outcome outside its basis");
        }
        ++slot_count[static_cast<std::size_t>(symbol)];
    }

    std::array<std::array<double, 4>, 4> likelihood{};
    for (std::size_t o = 0; o < 4; ++o)
        for (std::size_t a = 0; a < 4; ++a)
            likelihood[o][a] = detail::symbol_likelihood(static_cast<PreparedSymbol>(o),
                                                         static_cast<PreparedSymbol>(a), eta);

    double total_weight = 0.0;
    std::array<double, 4> x_weight{};  // weighted expected count of class-o originals in X slots

    std::array<std::size_t, 4> capacity = slot_count;
    std::array<std::array<std::size_t, 4>, 4> table{};

    // Depth-first over original classes; within a class, over the split of
    // its count across the four slot classes.
    auto place = [&](auto&& self, std::size_t o, std::size_t a, std::size_t left,
                     double row_weight) -> void {
        if (a == 3) {
            if (left > capacity[3] || (left > 0 && likelihood[o][3] == 0.0)) return;
            table[o][3] = left;
            capacity[3] -= left;
            const double w = row_weight * std::pow(likelihood[o][3], static_cast<double>(left)) /
                             detail::kFactorial[left];
            // advance to the next populated original class
            std::size_t next = o + 1;
            while (next < 4 && sent_count[next] == 0) ++next;
            if (next == 4) {
                total_weight += w;
                for (std::size_t oc = 0; oc < 4; ++oc) {
                    if (sent_count[oc] == 0) continue;
                    const double x_cells = static_cast<double>(
                        table[oc][static_cast<std::size_t>(PreparedSymbol::XPlus)] +
                        table[oc][static_cast<std::size_t>(PreparedSymbol::XMinus)]);
                    x_weight[oc] += w * x_cells / static_cast<double>(sent_count[oc]);
                }
            } else {
                self(self, next, 0, sent_count[next],
                     w * detail::kFactorial[sent_count[next]]);
            }
            capacity[3] += left;
            table[o][3] = 0;
            return;
        }
        const std::size_t max_here =
            likelihood[o][a] == 0.0 ? 0 : std::min(left, capacity[a]);
        for (std::size_t m = 0; m <= max_here; ++m) {
            table[o][a] = m;
            capacity[a] -= m;
            self(self, o, a + 1, left - m,
                 row_weight * std::pow(likelihood[o][a], static_cast<double>(m)) /
                     detail::kFactorial[m]);
            capacity[a] += m;
            table[o][a] = 0;
        }
    };

    std::size_t first = 0;
    while (first < 4 && sent_count[first] == 0) ++first;
    place(place, first, 0, sent_count[first], detail::kFactorial[sent_count[first]]);

    if (total_weight <= 0.0) {
        throw std::domain_error("counting_infer: announced data inconsistent with sent states");
    }

    std::vector<PositionPosterior> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({i, x_weight[static_cast<std::size_t>(sent[i])] / total_weight});
    }
    return out;
}

struct LeakageStats {
    StatBucket posterior;   // every position; calibrates to 1 - eta
    StatBucket abs_shift;   // |posterior - (1 - eta)|
    StatBucket certain;     // Z originals with posterior pinned to 0 or 1
    std::uint64_t groups = 0;
};

// Monte Carlo over honest groups: how much the announced multisets reveal.
inline LeakageStats counting_leakage(std::size_t groups, std::size_t group_size, double eta,
                                     RandomStream& rng) {
    LeakageStats stats;
    const double prior_x = 1.0 - eta;
    for (std::size_t gi = 0; gi < groups; ++gi) {
        std::vector<PreparedSymbol> sent;
        sent.reserve(group_size);
        for (std::size_t i = 0; i < group_size; ++i) sent.push_back(all_symbols[rng.index(4)]);
        const GroupTranscript g = alice_measure_group(std::move(sent), eta, rng);
        const auto posteriors = counting_infer(g.sent, g.announced, eta);
        for (std::size_t i = 0; i < posteriors.size(); ++i) {
            const double p = posteriors[i].p_measured_x;
            stats.posterior.add(p);
            stats.abs_shift.add(std::abs(p - prior_x));
            if (basis_of(g.sent[i]) == Basis::Z) {
                stats.certain.add((p <= 1e-9 || p >= 1.0 - 1e-9) ? 1.0 : 0.0);
            }
        }
        ++stats.groups;
    }
    return stats;
}

// --- Dishonest user: store-and-fake ---

struct FakeSequencePlan {
    std::vector<PreparedSymbol> symbols;
    std::vector<bool> used;
};

// Deterministic composition for the fabricated group: the Z share is the
// nearest integer to n*eta (keeping the step-3 statistic on target), split
// within each basis as evenly as possible.
inline std::array<std::size_t, 4> fake_composition(std::size_t n, double eta) {
    auto z = static_cast<std::size_t>(std::llround(eta * static_cast<double>(n)));
    if (z > n) z = n;
    const std::size_t x = n - z;
    const std::size_t z0 = (z + 1) / 2;
    const std::size_t xp = (x + 1) / 2;
    return {z0, z - z0, xp, x - xp};
}

struct StoreFakeGroup {
    std::vector<PreparedSymbol> stored;  // received originals, unmeasured
    FakeSequencePlan fake;
    std::vector<Announcement> announced;
};

// Step 2: keep the real qubits, return a shuffled fabricated group and
// announce exactly what the fabricated qubits are. The holder's step-3
// re-measurement then matches slot by slot.
inline StoreFakeGroup store_fake_step2(const std::vector<PreparedSymbol>& received, double eta,
                                       RandomStream& rng) {
    StoreFakeGroup g;
    g.stored = received;
    const auto counts = fake_composition(received.size(), eta);
    for (std::size_t s = 0; s < 4; ++s) {
        g.fake.symbols.insert(g.fake.symbols.end(), counts[s], static_cast<PreparedSymbol>(s));
    }
    rng.shuffle(g.fake.symbols);
    g.fake.used.assign(g.fake.symbols.size(), false);
    g.announced.reserve(g.fake.symbols.size());
    for (PreparedSymbol s : g.fake.symbols) g.announced.push_back({basis_of(s), s});
    return g;
}

struct StoreFakeReply {
    std::vector<std::size_t> disclosed;  // aligned with x_positions
    std::size_t fallback_count = 0;      // per-qubit draws converted to fit the pools
    std::size_t unsafe_count = 0;        // forced onto a mismatched X slot
};

// Step 4: measure each stored X original in X (deterministic), then claim a
// matching fabricated X position with probability 1 - eta or a fabricated Z
// position otherwise. The holder announces every X position at once, so the
// per-qubit draws are realized as one allocation over the whole group:
// whenever a draw collides with an exhausted slot class it is converted to
// the other safe class (and counted as a fallback). A disclosure lands on a
// mismatched X slot, where the holder can catch it, only when no safe
// assignment of the group exists at all.
inline StoreFakeReply store_fake_step4_reply(const std::vector<PreparedSymbol>& stored,
                                             FakeSequencePlan& fake,
                                             const std::vector<std::size_t>& x_positions,
                                             double eta, RandomStream& rng) {
    StoreFakeReply reply;
    reply.disclosed.assign(x_positions.size(), 0);
    if (x_positions.empty()) return reply;

    // Originals by measured X symbol (side 0: |+>, side 1: |->), with their
    // per-qubit draws; wanters first so conversions stay rare.
    std::array<std::vector<std::size_t>, 2> wanters, settlers;
    for (std::size_t k = 0; k < x_positions.size(); ++k) {
        const PreparedSymbol outcome = stored.at(x_positions[k]);
        if (basis_of(outcome) != Basis::X) {
            throw std::invalid_argument("store_fake_step4_reply: position is not an X original");
        }
        const std::size_t side = outcome == PreparedSymbol::XMinus ? 1 : 0;
        (rng.bernoulli(1.0 - eta) ? wanters : settlers)[side].push_back(k);
    }

    // Unused slots by class.
    std::array<std::vector<std::size_t>, 2> x_pool;
    std::vector<std::size_t> z_pool;
    for (std::size_t j = 0; j < fake.symbols.size(); ++j) {
        if (fake.used[j]) continue;
        const PreparedSymbol s = fake.symbols[j];
        if (basis_of(s) == Basis::Z) {
            z_pool.push_back(j);
        } else {
            x_pool[s == PreparedSymbol::XMinus ? 1 : 0].push_back(j);
        }
    }
    for (auto& pool : x_pool) rng.shuffle(pool);
    rng.shuffle(z_pool);

    const std::size_t total = x_positions.size();
    const std::array<std::size_t, 2> count{wanters[0].size() + settlers[0].size(),
                                           wanters[1].size() + settlers[1].size()};
    const std::array<std::size_t, 2> cap{std::min(count[0], x_pool[0].size()),
                                         std::min(count[1], x_pool[1].size())};
    const std::size_t x_hi = cap[0] + cap[1];
    const std::size_t x_lo = total > z_pool.size() ? total - z_pool.size() : 0;

    // Number of X disclosures: the drawn count, clamped by what the pools
    // can absorb safely.
    std::array<std::size_t, 2> grant{std::min(wanters[0].size(), cap[0]),
                                     std::min(wanters[1].size(), cap[1])};
    std::size_t x_total;
    if (x_lo > x_hi) {
        grant = cap;  // no safe assignment exists; the shortfall goes unsafe
        x_total = x_hi;
        reply.unsafe_count = x_lo - x_hi;
    } else {
        x_total = std::clamp(wanters[0].size() + wanters[1].size(), x_lo, x_hi);
    }
    while (grant[0] + grant[1] < x_total) {
        const int side = cap[0] - grant[0] >= cap[1] - grant[1] ? 0 : 1;
        ++grant[side];
    }
    while (grant[0] + grant[1] > x_total) {
        const int side = grant[0] >= grant[1] ? 0 : 1;
        --grant[side];
    }

    auto claim = [&](std::size_t original_index, std::vector<std::size_t>& pool) {
        const std::size_t slot = pool.back();
        pool.pop_back();
        fake.used[slot] = true;
        reply.disclosed[original_index] = slot;
    };

    // Matching grants first (wanters ahead of converted settlers), then the
    // Z slots, and only an infeasible remainder lands on mismatched X slots.
    std::vector<std::size_t> overflow;
    for (int side : {0, 1}) {
        rng.shuffle(wanters[side]);
        rng.shuffle(settlers[side]);
        std::vector<std::size_t> ordered = wanters[side];
        ordered.insert(ordered.end(), settlers[side].begin(), settlers[side].end());
        for (std::size_t r = 0; r < ordered.size(); ++r) {
            const bool wanted_match = r < wanters[side].size();
            if (r < grant[side]) {
                claim(ordered[r], x_pool[side]);
                reply.fallback_count += wanted_match ? 0 : 1;
            } else if (!z_pool.empty()) {
                claim(ordered[r], z_pool);
                reply.fallback_count += wanted_match ? 1 : 0;
            } else {
                overflow.push_back(ordered[r]);
            }
        }
    }
    for (std::size_t original_index : overflow) {
        claim(original_index, x_pool[x_pool[0].empty() ? 1 : 0]);
    }
    return reply;
}

// Step 5: with the X originals dropped, every stored survivor is a Z
// eigenstate, so measuring in Z reads off the holder's raw key exactly.
inline std::vector<int> store_fake_extract(const std::vector<PreparedSymbol>& stored,
                                           const std::vector<std::size_t>& x_positions) {
    std::vector<bool> is_x(stored.size(), false);
    for (std::size_t i : x_positions) is_x.at(i) = true;
    std::vector<int> bits;
    for (std::size_t i = 0; i < stored.size(); ++i) {
        if (is_x[i]) continue;
        if (basis_of(stored[i]) != Basis::X) {
            bits.push_back(bit_of(stored[i]));
        } else {
            throw std::invalid_argument("store_fake_extract: X original not listed for step 4");
        }
    }
    return bits;
}

}  // namespace qpq::chang
