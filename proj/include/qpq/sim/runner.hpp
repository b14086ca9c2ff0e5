// Scenario runner: executes seeded Monte Carlo batches and aggregates
// metrics. Per-trial random streams are derived from (master_seed, trial
// index), and per-trial results are reduced in trial order, so a report is
// reproducible bit-for-bit regardless of how trials are scheduled (the
// wall-clock duration_ms field is the one exception).
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <iterator>
#include <map>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "qpq/chang/attacks.hpp"
#include "qpq/chang/protocol.hpp"
#include "qpq/discrimination.hpp"
#include "qpq/postprocess.hpp"
#include "qpq/sim/config.hpp"
#include "qpq/sim/report.hpp"
#include "qpq/stats.hpp"
#include "qpq/yu/attacks.hpp"
#include "qpq/yu/protocol.hpp"

namespace qpq::sim {

struct TrialData {
    std::map<std::string, StatBucket> stats;
    std::map<std::string, bool> verdicts;

    void add(const std::string& key, double value) { stats[key].add(value); }
    void add_bucket(const std::string& key, const StatBucket& bucket) {
        stats[key].merge(bucket);
    }
    void verdict(const std::string& key, bool value) {
        auto [it, inserted] = verdicts.emplace(key, value);
        if (!inserted) it->second = it->second && value;
    }
    void merge(const TrialData& other) {
        for (const auto& [k, b] : other.stats) stats[k].merge(b);
        for (const auto& [k, v] : other.verdicts) verdict(k, v);
    }
};

namespace detail {

// Final key sized for the database: floor(|raw|/k) positions, capped at the
// configured database size.
inline FinalKey fold_for_database(std::span<const RawKeyRecord> raw, std::size_t k,
                                  std::size_t db_cap) {
    if (k < 1 || raw.size() < k) {
        throw std::runtime_error("fold: raw key too short for the substring count");
    }
    const std::size_t n_final = std::min(raw.size() / k, db_cap);
    if (n_final < 1) throw std::runtime_error("fold: empty final key");
    return fold_key(raw.first(k * n_final), k);
}

inline Database make_database(const ExperimentConfig& cfg, std::size_t n, RandomStream& rng) {
    if (cfg.database_file) {
        Database db = load_database(*cfg.database_file);
        if (db.size() != n) {
            throw std::runtime_error("database file holds " + std::to_string(db.size()) +
                                     " bits but the run needs " + std::to_string(n));
        }
        return db;
    }
    return random_database(n, rng);
}

inline std::size_t pick_known_position(const FinalKey& key, RandomStream& rng) {
    auto it = key.alice_known.begin();
    std::advance(it, static_cast<long>(rng.index(key.alice_known.size())));
    return it->first;
}

// Shared tail of the Yu-style trials: fold, then retrieve one random item
// with one random known final-key bit.
inline void yu_postprocess_and_retrieve(const ExperimentConfig& cfg,
                                        std::span<const RawKeyRecord> kept, RandomStream& rng,
                                        TrialData& out, bool& knows_nothing) {
    const FinalKey key =
        fold_for_database(kept, cfg.yu.substring_count, cfg.yu.database_size);
    const double n_final = static_cast<double>(key.bits.size());
    out.add("known_final_bits", static_cast<double>(key.alice_known.size()));
    out.add("known_final_fraction", static_cast<double>(key.alice_known.size()) / n_final);
    out.add("database_recovery_fraction",
            static_cast<double>(key.alice_known.size()) / n_final);
    knows_nothing = key.alice_known.empty();
    if (knows_nothing) return;

    const Database db = make_database(cfg, key.bits.size(), rng);
    const std::size_t j = pick_known_position(key, rng);
    const std::size_t i = rng.index(db.size());
    const long long s = announced_shift(ShiftConvention::YuJMinusI, j, i);
    const auto ciphertext = encrypt_database(db, key.bits, encryption_shift(
        ShiftConvention::YuJMinusI, s));
    const int got = retrieve(ciphertext, key, j, i, ShiftConvention::YuJMinusI);
    const bool correct = got == db.bits[i];
    out.add("retrieval_success", correct ? 1.0 : 0.0);
    out.verdict("all_retrievals_correct", correct);
}

inline void trial_yu_honest(const ExperimentConfig& cfg, RandomStream& rng, TrialData& out) {
    const yu::YuParams& p = cfg.yu;
    std::size_t restarts = 0;
    bool aborted = false;
    for (;;) {
        std::vector<int> bob_bits;
        bob_bits.reserve(p.raw_length);
        for (std::size_t i = 0; i < p.raw_length; ++i) bob_bits.push_back(rng.bit());

        yu::Transcript t = yu::run_stage1(p, bob_bits, rng);
        bool conclusive_ok = true;
        for (const auto& rec : t.records) {
            out.add("conclusive_fraction", rec.conclusive ? 1.0 : 0.0);
            if (rec.conclusive && *rec.conclusive != rec.bob_bit) conclusive_ok = false;
        }
        out.verdict("conclusive_values_correct", conclusive_ok);

        t.checking_positions = yu::honest_select_checks(t, p.check_fraction, rng);
        t.check_replies = yu::honest_check_replies(t, t.checking_positions);
        const bool pass = yu::verify_check_replies(t, t.check_replies);
        t.verdict = pass ? yu::Verdict::Pass : yu::Verdict::Fail;
        out.add("detection_rate", pass ? 0.0 : 1.0);
        out.verdict("all_checks_passed", pass);

        const auto kept = yu::drop_checked(t);
        for (const auto& rec : kept) {
            out.add("post_drop_conclusive_fraction", rec.conclusive ? 1.0 : 0.0);
        }
        bool knows_nothing = false;
        yu_postprocess_and_retrieve(cfg, kept, rng, out, knows_nothing);
        if (!knows_nothing) break;
        if (++restarts > p.max_restarts) {
            aborted = true;
            break;
        }
    }
    out.add("restarts", static_cast<double>(restarts));
    out.verdict("no_aborts", !aborted);
}

inline void trial_yu_two_step(const ExperimentConfig& cfg, RandomStream& rng, TrialData& out) {
    const yu::YuParams& p = cfg.yu;
    const auto target = static_cast<std::size_t>(
        std::llround(p.check_fraction * static_cast<double>(p.raw_length)));

    auto record_round = [&](PreparedSymbol prep, int announcement) {
        const bool conclusive = announcement != bit_of(prep);
        out.add("conclusive_fraction", conclusive ? 1.0 : 0.0);
        out.add(announcement == 0 ? "conclusive_given_ann0" : "conclusive_given_ann1",
                conclusive ? 1.0 : 0.0);
        return conclusive;
    };
    auto guess_round = [&](const yu::TwoStepRoundState& st, bool conclusive) {
        const bool guessed = yu::two_step_guess_conclusive(st, rng) ==
                             yu::ConclusivenessGuess::Conclusive;
        out.add("guess_error_rate", guessed != conclusive ? 1.0 : 0.0);
    };

    // The user audits only conclusive rounds, so the attacker's inconclusive
    // rounds can be guessed on the fly; conclusive rounds are held until the
    // audit set is known.
    struct HeldRound {
        PreparedSymbol prep;
        int announcement;
        yu::TwoStepRoundState state;
    };
    std::vector<HeldRound> held;
    bool detected = false;
    for (std::size_t i = 0; i < p.raw_length; ++i) {
        const PreparedSymbol prep = all_symbols[rng.index(4)];
        auto a = yu::two_step_announce(prep, rng);
        const bool conclusive = record_round(prep, a.announcement);
        if (!conclusive) {
            guess_round(a.state, false);
        } else if (target == 0) {
            guess_round(a.state, true);
        } else {
            held.push_back({prep, a.announcement, std::move(a.state)});
        }
    }
    if (target > 0) {
        std::vector<std::size_t> ids(held.size());
        std::iota(ids.begin(), ids.end(), 0);
        const auto checked = rng.sample(std::move(ids), target);
        std::vector<bool> is_checked(held.size(), false);
        for (std::size_t id : checked) is_checked[id] = true;
        for (std::size_t id = 0; id < held.size(); ++id) {
            HeldRound& r = held[id];
            if (!is_checked[id]) {
                guess_round(r.state, true);
                continue;
            }
            const PreparedSymbol reply = yu::two_step_check_reply(r.state, rng);
            const PreparedSymbol expected =
                make_symbol(other_basis(basis_of(r.prep)), r.announcement);
            const bool caught = reply != expected;
            detected = detected || caught;
            out.add("detection_rate", caught ? 1.0 : 0.0);
        }
    }
    out.verdict("never_detected", !detected);
}

inline void trial_yu_cheating_user(const ExperimentConfig& cfg, RandomStream& rng,
                                   TrialData& out) {
    const yu::YuParams& p = cfg.yu;
    std::vector<int> bob_bits;
    bob_bits.reserve(p.raw_length);
    for (std::size_t i = 0; i < p.raw_length; ++i) bob_bits.push_back(rng.bit());
    yu::Transcript t = yu::run_stage1(p, bob_bits, rng);

    // At the expected inconclusive rate or above, the budget covers the whole
    // pool: audit every inconclusive round and take the full break.
    const yu::CheatSelection sel = p.check_fraction >= 0.75
                                       ? yu::cheating_select_all_inconclusive(t)
                                       : yu::cheating_select_checks(t, p.check_fraction, rng);
    t.checking_positions = sel.positions;
    t.check_replies = yu::honest_check_replies(t, t.checking_positions);
    const bool pass = yu::verify_check_replies(t, t.check_replies);
    t.verdict = pass ? yu::Verdict::Pass : yu::Verdict::Fail;
    out.add("achieved_check_fraction", sel.achieved_fraction);
    out.verdict("all_checks_passed", pass);

    const auto kept = yu::drop_checked(t);
    for (const auto& rec : kept) {
        out.add("post_drop_conclusive_fraction", rec.conclusive ? 1.0 : 0.0);
    }
    bool knows_nothing = false;
    yu_postprocess_and_retrieve(cfg, kept, rng, out, knows_nothing);
    out.verdict("knows_at_least_one_bit", !knows_nothing);
}

inline void trial_chang_honest(const ExperimentConfig& cfg, RandomStream& rng, TrialData& out) {
    const chang::ChangParams& p = cfg.chang;
    std::size_t restarts = 0;
    bool aborted = false;
    for (;;) {
        const auto symbols = chang::chang_prepare(p, rng);
        std::vector<chang::GroupTranscript> groups;
        std::vector<std::vector<PreparedSymbol>> returned;
        std::vector<std::vector<std::size_t>> disclosures;
        groups.reserve(p.group_count);
        for (std::size_t g = 0; g < p.group_count; ++g) {
            std::vector<PreparedSymbol> sent(
                symbols.begin() + static_cast<long>(g * p.group_size),
                symbols.begin() + static_cast<long>((g + 1) * p.group_size));
            groups.push_back(chang::alice_measure_group(std::move(sent), p.eta, rng));
            std::vector<PreparedSymbol> ret;
            for (const auto& [basis, symbol] : groups.back().announced) ret.push_back(symbol);
            returned.push_back(std::move(ret));
            disclosures.push_back(chang::honest_step4_disclosure(groups.back()));
        }

        const auto step3 = chang::bob_step3_check(groups, returned, p.eta, p.significance, rng);
        const auto step4 = chang::bob_step4_check(groups, disclosures, p.eta, p.significance);
        out.add("step3_mismatches", static_cast<double>(step3.deterministic_failures));
        out.add("step4_deterministic_failures",
                static_cast<double>(step4.deterministic_failures));
        out.add("step3_stat_fail", step3.statistical_pass ? 0.0 : 1.0);
        out.add("step4_stat_fail", step4.statistical_pass ? 0.0 : 1.0);
        out.add("groups_run", static_cast<double>(p.group_count));
        out.verdict("deterministic_checks_clean",
                    step3.deterministic_failures == 0 && step4.deterministic_failures == 0);

        const auto raw = chang::build_raw_key(groups);
        bool conclusive_ok = true;
        for (const auto& rec : raw) {
            out.add("conclusive_fraction", rec.conclusive ? 1.0 : 0.0);
            if (rec.conclusive && *rec.conclusive != rec.bob_bit) conclusive_ok = false;
        }
        out.verdict("conclusive_values_correct", conclusive_ok);

        const bool proceed = step3.pass() && step4.pass();
        out.add("checks_passed", proceed ? 1.0 : 0.0);
        if (!proceed) break;  // statistical abort: no retrieval this run

        const FinalKey key =
            detail::fold_for_database(raw, p.substring_count, p.database_size);
        const double n_final = static_cast<double>(key.bits.size());
        out.add("known_final_bits", static_cast<double>(key.alice_known.size()));
        out.add("known_final_fraction",
                static_cast<double>(key.alice_known.size()) / n_final);
        if (!key.alice_known.empty()) {
            const Database db = detail::make_database(cfg, key.bits.size(), rng);
            const std::size_t j = detail::pick_known_position(key, rng);
            const std::size_t i = rng.index(db.size());
            const long long s = announced_shift(ShiftConvention::ChangIMinusJ, j, i);
            const auto ciphertext = encrypt_database(
                db, key.bits, encryption_shift(ShiftConvention::ChangIMinusJ, s));
            const int got = retrieve(ciphertext, key, j, i, ShiftConvention::ChangIMinusJ);
            const bool correct = got == db.bits[i];
            out.add("retrieval_success", correct ? 1.0 : 0.0);
            out.verdict("all_retrievals_correct", correct);
            break;
        }
        if (++restarts > p.max_restarts) {
            aborted = true;
            break;
        }
    }
    out.add("restarts", static_cast<double>(restarts));
    out.verdict("no_aborts", !aborted);
}

inline void trial_chang_counting(const ExperimentConfig& cfg, RandomStream& rng,
                                 TrialData& out) {
    const chang::ChangParams& p = cfg.chang;
    const auto stats = chang::counting_leakage(p.group_count, p.group_size, p.eta, rng);
    out.add_bucket("posterior_mean", stats.posterior);
    out.add_bucket("posterior_abs_shift", stats.abs_shift);
    out.add_bucket("certain_inference_rate", stats.certain);
    out.add("groups_run", static_cast<double>(stats.groups));
}

inline void trial_chang_store_fake(const ExperimentConfig& cfg, RandomStream& rng,
                                   TrialData& out) {
    const chang::ChangParams& p = cfg.chang;
    const auto symbols = chang::chang_prepare(p, rng);

    std::vector<chang::GroupTranscript> groups;
    std::vector<std::vector<PreparedSymbol>> returned;
    std::vector<std::vector<std::size_t>> disclosures;
    std::vector<int> alice_raw, bob_raw;
    for (std::size_t g = 0; g < p.group_count; ++g) {
        std::vector<PreparedSymbol> received(
            symbols.begin() + static_cast<long>(g * p.group_size),
            symbols.begin() + static_cast<long>((g + 1) * p.group_size));
        auto sf = chang::store_fake_step2(received, p.eta, rng);

        chang::GroupTranscript t;
        t.sent = received;
        t.announced = sf.announced;
        returned.push_back(sf.fake.symbols);

        const auto x_pos = chang::x_basis_positions(received);
        const auto reply =
            chang::store_fake_step4_reply(sf.stored, sf.fake, x_pos, p.eta, rng);
        out.add("step4_fallbacks", static_cast<double>(reply.fallback_count));
        out.add("step4_unsafe_disclosures", static_cast<double>(reply.unsafe_count));
        disclosures.push_back(reply.disclosed);
        groups.push_back(std::move(t));

        const auto extracted = chang::store_fake_extract(sf.stored, x_pos);
        std::size_t idx = 0;
        for (std::size_t i = 0; i < received.size(); ++i) {
            if (basis_of(received[i]) == Basis::X) continue;
            const int bob_bit = bit_of(received[i]);
            bob_raw.push_back(bob_bit);
            alice_raw.push_back(extracted.at(idx));
            out.add("raw_key_recovery", extracted.at(idx) == bob_bit ? 1.0 : 0.0);
            ++idx;
        }
    }

    const auto step3 = chang::bob_step3_check(groups, returned, p.eta, p.significance, rng);
    const auto step4 = chang::bob_step4_check(groups, disclosures, p.eta, p.significance);
    out.add("deterministic_check_failures",
            static_cast<double>(step3.deterministic_failures + step4.deterministic_failures));
    out.add("step3_stat_fail", step3.statistical_pass ? 0.0 : 1.0);
    out.add("step4_stat_fail", step4.statistical_pass ? 0.0 : 1.0);
    out.add("groups_run", static_cast<double>(p.group_count));
    out.verdict("never_caught_deterministically",
                step3.deterministic_failures == 0 && step4.deterministic_failures == 0);

    // Alice now holds the entire raw key; fold it as she would.
    std::vector<RawKeyRecord> records;
    records.reserve(bob_raw.size());
    for (std::size_t i = 0; i < bob_raw.size(); ++i) {
        RawKeyRecord rec;
        rec.position = i;
        rec.bob_bit = bob_raw[i];
        rec.conclusive = alice_raw[i];
        records.push_back(rec);
    }
    const FinalKey key =
        detail::fold_for_database(records, p.substring_count, p.database_size);
    const double recovery = static_cast<double>(key.alice_known.size()) /
                            static_cast<double>(key.bits.size());
    out.add("known_final_bits", static_cast<double>(key.alice_known.size()));
    out.add("database_recovery_fraction", recovery);
    out.verdict("full_database_recovered", recovery == 1.0);
}

inline void trial_discriminate(const ExperimentConfig&, RandomStream&, TrialData& out) {
    const yu::ConclusivenessEnsemble& e0 = yu::conclusiveness_ensemble(0);
    const yu::ConclusivenessEnsemble& e1 = yu::conclusiveness_ensemble(1);
    const WeightedStatePair pair0(e0.prior_conclusive, e0.rho_conclusive,
                                  1.0 - e0.prior_conclusive, e0.rho_inconclusive);
    const WeightedStatePair pair1(e1.prior_conclusive, e1.rho_conclusive,
                                  1.0 - e1.prior_conclusive, e1.rho_inconclusive);
    out.add("helstrom_error", helstrom_error(pair0));
    out.add("helstrom_error_s1", helstrom_error(pair1));
    out.add("trace_norm_weighted_difference", trace_norm(pair0.weighted_difference()));
    out.add("prior_conclusive", e0.prior_conclusive);

    const auto feas = unambiguous_feasible(e0.rho_conclusive, e0.rho_inconclusive);
    out.verdict("can_identify_conclusive", feas.first);
    out.verdict("can_identify_inconclusive", feas.second);
    out.verdict("supports_identical",
                max_abs_diff(support_projector(e0.rho_conclusive),
                             support_projector(e0.rho_inconclusive)) <= 1e-9);
}

inline void run_trial(const ExperimentConfig& cfg, RandomStream& rng, TrialData& out) {
    switch (cfg.scenario) {
        case Scenario::YuHonest: return trial_yu_honest(cfg, rng, out);
        case Scenario::YuBobTwoStep: return trial_yu_two_step(cfg, rng, out);
        case Scenario::YuAliceInconclusiveChecks: return trial_yu_cheating_user(cfg, rng, out);
        case Scenario::ChangHonest: return trial_chang_honest(cfg, rng, out);
        case Scenario::ChangBobCounting: return trial_chang_counting(cfg, rng, out);
        case Scenario::ChangAliceStoreFake: return trial_chang_store_fake(cfg, rng, out);
        case Scenario::Discriminate: return trial_discriminate(cfg, rng, out);
    }
    throw std::logic_error("run_trial: bad scenario");
}

}  // namespace detail

inline ExperimentReport run_scenario(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<TrialData> slots(cfg.trials);
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto workers =
        static_cast<unsigned>(std::min<std::uint64_t>(hw, cfg.trials));
    auto body = [&](unsigned w) {
        for (std::uint64_t i = w; i < cfg.trials; i += workers) {
            RandomStream rng = RandomStream::derive(cfg.master_seed, i);
            detail::run_trial(cfg, rng, slots[i]);
        }
    };
    if (workers <= 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    body(w);
                } catch (...) {
                    const std::scoped_lock lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    TrialData all;
    for (const auto& s : slots) all.merge(s);

    ExperimentReport report;
    report.scenario = scenario_name(cfg.scenario);
    report.config = cfg.echo();
    report.seed = cfg.master_seed;
    for (const auto& [name, bucket] : all.stats) {
        report.metrics[name] = {bucket.mean(), bucket.standard_error(), bucket.count()};
    }
    report.verdicts = all.verdicts;
    report.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    return report;
}

}  // namespace qpq::sim
