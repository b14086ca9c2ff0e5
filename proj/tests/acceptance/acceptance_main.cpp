// Acceptance suite: one function per criterion, one PASS/FAIL line each.
// Exit code is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qpq/chang/attacks.hpp"
#include "qpq/discrimination.hpp"
#include "qpq/postprocess.hpp"
#include "qpq/sim/runner.hpp"
#include "qpq/yu/attacks.hpp"
#include "support/oracles.hpp"

using namespace qpq;

namespace {

int g_failures = 0;

void run_criterion(const std::string& name, const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string error;
    try {
        body();
    } catch (const std::exception& e) {
        error = e.what();
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    if (error.empty()) {
        std::printf("[PASS] %s (%lld ms)\n", name.c_str(), static_cast<long long>(ms));
    } else {
        ++g_failures;
        std::printf("[FAIL] %s (%lld ms): %s\n", name.c_str(), static_cast<long long>(ms),
                    error.c_str());
    }
    std::fflush(stdout);
}

void require(bool ok, const std::string& message) {
    if (!ok) throw std::runtime_error(message);
}

void require_close(double actual, double expected, double tol, const std::string& what) {
    if (std::abs(actual - expected) > tol) {
        std::ostringstream os;
        os << what << ": got " << actual << ", expected " << expected << " +- " << tol;
        throw std::runtime_error(os.str());
    }
}

// c1 * a + c2 * b over amplitude vectors; the result must be normalized.
PureState combine(double c1, const PureState& a, double c2, const PureState& b) {
    std::vector<Complex> amps(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) amps[i] = c1 * a[i] + c2 * b[i];
    return PureState(std::move(amps));
}

PureState cb(PreparedSymbol c, PreparedSymbol b) { return tensor(ket(c), ket(b)); }

// --- criteria -------------------------------------------------------------

void criterion_1_helstrom_pin() {
    const auto& e0 = yu::conclusiveness_ensemble(0);
    const WeightedStatePair pair(0.25, e0.rho_conclusive, 0.75, e0.rho_inconclusive);
    const double error = helstrom_error(pair);
    require_close(error, 0.1464, 1e-4, "minimum discrimination error");
    // cross-check against the mixtures built from the published states
    const WeightedStatePair direct(0.25, oracles::rho_conclusive(), 0.75,
                                   oracles::rho_inconclusive());
    require_close(helstrom_error(direct), (2.0 - std::numbers::sqrt2) / 4.0, 1e-10,
                  "closed form (2 - sqrt2)/4");
    require_close(trace_norm(direct.weighted_difference()), std::numbers::sqrt2 / 2.0, 1e-10,
                  "trace-norm oracle sqrt2/2");
}

void criterion_2_unambiguous_infeasible() {
    const auto& e0 = yu::conclusiveness_ensemble(0);
    const auto feas = unambiguous_feasible(e0.rho_conclusive, e0.rho_inconclusive, 1e-9);
    require(!feas.first && !feas.second,
            "states with equal supports admit no unambiguous discrimination");
}

void criterion_3_equation_identities() {
    const UnitaryOperator& u = yu::two_step_unitary();
    require(max_abs_diff(u.matrix().adjoint() * u.matrix(), SquareMatrix::identity(8)) <= 1e-10,
            "U^dagger U = I within 1e-10");

    const double c_major = std::numbers::sqrt3 / 2.0;
    const double r23 = std::sqrt(2.0 / 3.0), r13 = std::sqrt(1.0 / 3.0);
    using PS = PreparedSymbol;
    const PureState psi1 = combine(r23, cb(PS::Z0, PS::Z0), r13, cb(PS::XPlus, PS::Z1));
    const PureState psi2 = combine(r23, cb(PS::Z1, PS::Z0), -r13, cb(PS::XMinus, PS::Z1));
    const PureState psi3 = combine(r23, cb(PS::XPlus, PS::Z1), r13, cb(PS::Z0, PS::Z0));
    const PureState psi4 = combine(r23, cb(PS::XMinus, PS::Z1), -r13, cb(PS::Z1, PS::Z0));

    const struct {
        PS prepared;
        PureState rhs;
    } cases[] = {
        {PS::Z0, combine(c_major, tensor(psi1, ket(PS::Z0)), 0.5,
                         tensor(cb(PS::XMinus, PS::Z1), ket(PS::Z1)))},
        {PS::Z1, combine(c_major, tensor(psi2, ket(PS::Z1)), 0.5,
                         tensor(cb(PS::XPlus, PS::Z1), ket(PS::Z0)))},
        {PS::XPlus, combine(c_major, tensor(psi3, ket(PS::Z0)), 0.5,
                            tensor(cb(PS::Z1, PS::Z0), ket(PS::Z1)))},
        {PS::XMinus, combine(c_major, tensor(psi4, ket(PS::Z1)), 0.5,
                             tensor(cb(PS::Z0, PS::Z0), ket(PS::Z0)))},
    };
    for (const auto& c : cases) {
        const PureState lhs = apply(u, yu::two_step_input(c.prepared));
        require(max_abs_diff(lhs, c.rhs) <= 1e-10,
                std::string("splitting identity for ") + to_string(c.prepared));
    }
}

void criterion_4_two_step_indistinguishability() {
    for (PreparedSymbol prep : all_symbols) {
        const auto honest = yu::honest_joint_distribution(prep);
        const auto attacked = yu::two_step_joint_distribution(prep);
        const auto swapped = yu::two_step_joint_distribution_b_first(prep);
        for (std::size_t i = 0; i < honest.size(); ++i) {
            require(std::abs(honest[i] - attacked[i]) <= 1e-10,
                    std::string("joint (announcement, reply) equality for ") +
                        to_string(prep));
            require(std::abs(attacked[i] - swapped[i]) <= 1e-10,
                    "partial measurements commute");
        }
    }

    RandomStream rng(11001);
    std::size_t checked = 0, detections = 0;
    while (checked < 100000) {
        const PreparedSymbol prep = all_symbols[rng.index(4)];
        auto a = yu::two_step_announce(prep, rng);
        if (a.announcement == bit_of(prep)) continue;  // user audits conclusive rounds
        ++checked;
        const PreparedSymbol reply = yu::two_step_check_reply(a.state, rng);
        const PreparedSymbol expected =
            make_symbol(other_basis(basis_of(prep)), a.announcement);
        detections += reply == expected ? 0 : 1;
    }
    require(detections == 0, "detection rate must be exactly 0 over 1e5 checked positions");
}

void criterion_5_conclusiveness_statistics() {
    RandomStream rng(11002);
    yu::YuParams p;
    p.substring_count = 1;
    p.database_size = 100000;
    p.raw_length = 100000;
    std::vector<int> bob_bits;
    for (std::size_t i = 0; i < p.raw_length; ++i) bob_bits.push_back(rng.bit());
    const auto t = yu::run_stage1(p, bob_bits, rng);

    std::array<std::size_t, 2> by_ann{}, conclusive_by_ann{};
    std::size_t conclusive = 0;
    for (const auto& rec : t.records) {
        ++by_ann[static_cast<std::size_t>(rec.announcement)];
        if (rec.conclusive) {
            ++conclusive;
            ++conclusive_by_ann[static_cast<std::size_t>(rec.announcement)];
        }
    }
    require_close(static_cast<double>(conclusive) / static_cast<double>(p.raw_length), 0.25,
                  0.01, "overall conclusive fraction");
    for (int ann : {0, 1}) {
        require_close(static_cast<double>(conclusive_by_ann[ann]) /
                          static_cast<double>(by_ann[ann]),
                      0.25, 0.01, "P(conclusive | announcement)");
    }
}

void criterion_6_attack_error_rate() {
    RandomStream rng(11003);
    const std::size_t rounds = 1000000;
    std::size_t errors = 0;
    for (std::size_t i = 0; i < rounds; ++i) {
        const PreparedSymbol prep = all_symbols[rng.index(4)];
        auto a = yu::two_step_announce(prep, rng);
        const bool conclusive = a.announcement != bit_of(prep);
        const bool guessed = yu::two_step_guess_conclusive(a.state, rng) ==
                             yu::ConclusivenessGuess::Conclusive;
        errors += guessed != conclusive ? 1 : 0;
    }
    require_close(static_cast<double>(errors) / static_cast<double>(rounds), 0.1464, 0.005,
                  "conclusiveness-guess error over 1e6 rounds");
}

void criterion_7_amplification_law() {
    auto run_at = [](double f) {
        sim::ExperimentConfig cfg;
        cfg.scenario = sim::Scenario::YuAliceInconclusiveChecks;
        cfg.trials = 30;
        cfg.master_seed = 11004;
        cfg.yu.substring_count = 4;
        cfg.yu.database_size = 25000;
        cfg.yu.raw_length = 100000;
        cfg.yu.check_fraction = f;
        return sim::run_scenario(cfg);
    };

    double honest_known_fraction = 0.0, cheat_known_fraction = 0.0;
    for (double f : {0.0, 0.25, 0.5}) {
        const auto report = run_at(f);
        require_close(report.metrics.at("post_drop_conclusive_fraction").mean,
                      0.25 / (1.0 - f), 0.01,
                      "post-drop conclusive fraction at f = " + std::to_string(f));
        if (f == 0.0) honest_known_fraction = report.metrics.at("known_final_fraction").mean;
        if (f == 0.5) cheat_known_fraction = report.metrics.at("known_final_fraction").mean;
    }

    const auto full = run_at(0.75);
    require(full.metrics.at("post_drop_conclusive_fraction").mean == 1.0,
            "post-drop conclusive fraction must be exactly 1 at f = 0.75");
    require(full.metrics.at("database_recovery_fraction").mean == 1.0,
            "database recovery must be exactly 1 at f = 0.75");

    const double ratio = cheat_known_fraction / honest_known_fraction;
    const double predicted = std::pow((0.25 / 0.5) / 0.25, 4.0);  // (p_cheat/p_honest)^k
    require(std::abs(ratio - predicted) <= 0.2 * predicted,
            "known-final-bit ratio " + std::to_string(ratio) + " vs (p_cheat/p_honest)^k = " +
                std::to_string(predicted) + " within 20%");
}

void criterion_8_chang_honest_completeness() {
    sim::ExperimentConfig cfg;
    cfg.scenario = sim::Scenario::ChangHonest;
    cfg.trials = 500;
    cfg.master_seed = 11005;
    cfg.chang.group_count = 20;  // 1e4 groups in total
    cfg.chang.group_size = 6;
    cfg.chang.eta = 0.5;
    cfg.chang.substring_count = 4;
    cfg.chang.database_size = 1000;
    cfg.chang.significance = 0.01;
    const auto report = sim::run_scenario(cfg);

    require(report.metrics.at("groups_run").mean * cfg.trials >= 10000, "group budget");
    require(report.metrics.at("step3_mismatches").mean == 0.0,
            "step-3 re-measurement must match everywhere");
    require(report.metrics.at("step4_deterministic_failures").mean == 0.0,
            "step-4 deterministic sub-checks must pass everywhere");
    require(report.verdicts.at("conclusive_values_correct"), "conclusive values equal key bits");

    const double stat_fail_rate = 1.0 - report.metrics.at("checks_passed").mean;
    require(stat_fail_rate <= 2.0 * cfg.chang.significance,
            "statistical checks fail at rate " + std::to_string(stat_fail_rate) +
                " > 2 alpha");
    if (report.metrics.count("retrieval_success")) {
        require(report.metrics.at("retrieval_success").mean == 1.0,
                "retrieval must be correct whenever a final bit is known");
    }
}

void criterion_9_counting_attack_pin() {
    using PS = PreparedSymbol;
    const std::vector<PS> sent{PS::Z0, PS::Z1, PS::Z1, PS::Z1, PS::XPlus, PS::XMinus};
    const std::vector<chang::Announcement> announced{
        {Basis::Z, PS::Z1}, {Basis::X, PS::XPlus},  {Basis::X, PS::XPlus},
        {Basis::Z, PS::Z1}, {Basis::X, PS::XMinus}, {Basis::X, PS::XMinus}};
    const auto posteriors = chang::counting_infer(sent, announced, 0.5);
    require(std::abs(posteriors[0].p_measured_x - 1.0) <= 1e-12,
            "the worked n=6 group pins the Z0 original to an X measurement");

    sim::ExperimentConfig cfg;
    cfg.scenario = sim::Scenario::ChangBobCounting;
    cfg.trials = 10;
    cfg.master_seed = 11006;
    cfg.chang.group_count = 1000;  // 1e4 groups in total
    cfg.chang.group_size = 6;
    cfg.chang.eta = 0.5;
    const auto report = sim::run_scenario(cfg);

    const auto& certain = report.metrics.at("certain_inference_rate");
    require(certain.mean > 0.0 && certain.mean > 3.0 * certain.stderr_of_mean,
            "certain-inference rate clears zero by 3 standard errors");
    require_close(report.metrics.at("posterior_mean").mean, 0.5, 0.01,
                  "posterior calibration to 1 - eta");
}

void criterion_10_store_and_fake_break() {
    sim::ExperimentConfig cfg;
    cfg.scenario = sim::Scenario::ChangAliceStoreFake;
    cfg.trials = 10;
    cfg.master_seed = 11007;
    cfg.chang.group_count = 1000;  // 1e4 groups in total
    cfg.chang.group_size = 24;     // composition tails vanish at this size
    cfg.chang.eta = 0.5;
    cfg.chang.substring_count = 4;
    cfg.chang.database_size = 1000;
    const auto report = sim::run_scenario(cfg);

    require(report.metrics.at("deterministic_check_failures").mean == 0.0,
            "zero deterministic check failures over 1e4 groups");
    require(report.metrics.at("raw_key_recovery").mean == 1.0, "raw key recovered exactly");
    require(report.metrics.at("database_recovery_fraction").mean == 1.0,
            "database recovery fraction 1.0");
    require(report.verdicts.at("full_database_recovered"),
            "database recovered in every trial");
}

void criterion_11_oracle_equivalence() {
    RandomStream rng(11008);

    // counting inference vs the unmemoized n! oracle
    for (std::size_t n : {4, 5, 6}) {
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<PreparedSymbol> sent;
            for (std::size_t i = 0; i < n; ++i) sent.push_back(all_symbols[rng.index(4)]);
            const auto g = chang::alice_measure_group(std::move(sent), 0.5, rng);
            const auto fast = chang::counting_infer(g.sent, g.announced, 0.5);
            const auto slow = oracles::counting_posterior_bruteforce(g.sent, g.announced, 0.5);
            for (std::size_t i = 0; i < n; ++i) {
                require(std::abs(fast[i].p_measured_x - slow[i]) <= 1e-12,
                        "counting posterior equals the factorial oracle");
            }
        }
    }

    // fold/encrypt/retrieve round trips vs the direct bit-level oracle
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t k = 1 + rng.index(4);
        const std::size_t n = 2 + rng.index(40);
        std::vector<int> bits, mask;
        std::vector<RawKeyRecord> records;
        for (std::size_t i = 0; i < n * k; ++i) {
            bits.push_back(rng.bit());
            mask.push_back(rng.bernoulli(0.6) ? 1 : 0);
            RawKeyRecord rec;
            rec.position = i;
            rec.bob_bit = bits.back();
            if (mask.back()) rec.conclusive = bits.back();
            records.push_back(rec);
        }
        const FinalKey key = fold_key(records, k);
        const auto oracle = oracles::fold_bits_oracle(bits, mask, k);
        require(key.bits == oracle.final_bits, "folded key equals the bit-level oracle");
        for (std::size_t j = 0; j < oracle.known.size(); ++j) {
            const bool lib_knows = key.alice_known.count(j) == 1;
            require(lib_knows == (oracle.known[j] >= 0), "knowledge mask matches");
            if (lib_knows) {
                require(key.alice_known.at(j) == oracle.known[j], "known value matches");
            }
        }

        Database db = random_database(n, rng);
        const std::size_t j = rng.index(n), i = rng.index(n);
        for (ShiftConvention conv :
             {ShiftConvention::YuJMinusI, ShiftConvention::ChangIMinusJ}) {
            const long long s = announced_shift(conv, j, i);
            const long long eff = encryption_shift(conv, s);
            const auto ct = encrypt_database(db, key.bits, eff);
            const int got = retrieve(ct, j, key.bits[j], i, conv);
            require(got == db.bits[i], "retrieval returns the database bit");
            require(oracles::retrieve_oracle(db.bits, key.bits, j, i, eff) == db.bits[i],
                    "bit-level oracle agrees");
        }
    }
}

}  // namespace

int main() {
    std::printf("acceptance suite: protocol and attack criteria\n");
    run_criterion("criterion 1: minimum-error pin 0.1464", criterion_1_helstrom_pin);
    run_criterion("criterion 2: unambiguous discrimination infeasible",
                  criterion_2_unambiguous_infeasible);
    run_criterion("criterion 3: splitting-unitary identities", criterion_3_equation_identities);
    run_criterion("criterion 4: two-step attack indistinguishable",
                  criterion_4_two_step_indistinguishability);
    run_criterion("criterion 5: conclusiveness statistics 1/4",
                  criterion_5_conclusiveness_statistics);
    run_criterion("criterion 6: attack guess-error 0.1464 over 1e6 rounds",
                  criterion_6_attack_error_rate);
    run_criterion("criterion 7: checking-qubit amplification law",
                  criterion_7_amplification_law);
    run_criterion("criterion 8: reordering protocol honest completeness",
                  criterion_8_chang_honest_completeness);
    run_criterion("criterion 9: counting-attack pin and calibration",
                  criterion_9_counting_attack_pin);
    run_criterion("criterion 10: store-and-fake full break", criterion_10_store_and_fake_break);
    run_criterion("criterion 11: oracle equivalence", criterion_11_oracle_equivalence);

    if (g_failures == 0) {
        std::printf("all criteria passed\n");
    } else {
        std::printf("%d criteria FAILED\n", g_failures);
    }
    return g_failures;
}
