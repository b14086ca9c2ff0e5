#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qpq/chang/attacks.hpp"
#include "support/oracles.hpp"

using namespace qpq;
using namespace qpq::chang;
using Catch::Matchers::WithinAbs;

namespace {
std::vector<PreparedSymbol> uniform_group(std::size_t n, RandomStream& rng) {
    std::vector<PreparedSymbol> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(all_symbols[rng.index(4)]);
    return out;
}
}  // namespace

TEST_CASE("counting inference pins the published n=6 group", "[chang-attack]") {
    using PS = PreparedSymbol;
    const std::vector<PS> sent{PS::Z0, PS::Z1, PS::Z1, PS::Z1, PS::XPlus, PS::XMinus};
    const std::vector<Announcement> announced{
        {Basis::Z, PS::Z1}, {Basis::X, PS::XPlus},  {Basis::X, PS::XPlus},
        {Basis::Z, PS::Z1}, {Basis::X, PS::XMinus}, {Basis::X, PS::XMinus}};
    const auto posteriors = counting_infer(sent, announced, 0.5);
    // no |0> among the outcomes: the |0> original was measured in X, for sure
    CHECK_THAT(posteriors[0].p_measured_x, WithinAbs(1.0, 1e-12));
    // identical originals share a posterior
    CHECK(posteriors[1].p_measured_x == posteriors[2].p_measured_x);
    CHECK(posteriors[1].p_measured_x == posteriors[3].p_measured_x);
}

TEST_CASE("counting inference corner cases", "[chang-attack]") {
    using PS = PreparedSymbol;

    SECTION("all-Z0 sent and announced: nothing was measured in X") {
        const std::vector<PS> sent(4, PS::Z0);
        const std::vector<Announcement> announced(4, {Basis::Z, PS::Z0});
        for (const auto& p : counting_infer(sent, announced, 0.5)) {
            CHECK_THAT(p.p_measured_x, WithinAbs(0.0, 1e-12));
        }
    }

    SECTION("two-position hand enumeration") {
        // sent {|0>, |+>}, announced {(Z,|0>), (X,|+>)}: the straight
        // assignment weighs eta(1-eta), the crossed one eta(1-eta)/4,
        // so P(|0> measured in X) = 1/5 at every eta.
        const std::vector<PS> sent{PS::Z0, PS::XPlus};
        const std::vector<Announcement> announced{{Basis::Z, PS::Z0}, {Basis::X, PS::XPlus}};
        for (double eta : {0.3, 0.5, 0.8}) {
            const auto p = counting_infer(sent, announced, eta);
            CHECK_THAT(p[0].p_measured_x, WithinAbs(0.2, 1e-12));
            const auto oracle = oracles::counting_posterior_bruteforce(sent, announced, eta);
            CHECK_THAT(p[0].p_measured_x, WithinAbs(oracle[0], 1e-12));
            CHECK_THAT(p[1].p_measured_x, WithinAbs(oracle[1], 1e-12));
        }
    }

    SECTION("guards") {
        const std::vector<PS> sent(9, PS::Z0);
        const std::vector<Announcement> announced(9, {Basis::Z, PS::Z0});
        CHECK_THROWS_AS(counting_infer(sent, announced, 0.5), std::invalid_argument);

        const std::vector<PS> two(2, PS::Z0);
        const std::vector<Announcement> bad_basis{{Basis::X, PS::Z0}, {Basis::Z, PS::Z0}};
        CHECK_THROWS_AS(counting_infer(two, bad_basis, 0.5), std::invalid_argument);

        // impossible data: a |1> outcome in Z from an all-|0> group
        const std::vector<Announcement> impossible{{Basis::Z, PS::Z1}, {Basis::Z, PS::Z0}};
        CHECK_THROWS_AS(counting_infer(two, impossible, 0.5), std::domain_error);
    }
}

TEST_CASE("counting inference equals the factorial oracle on random groups",
          "[chang-attack][slow]") {
    RandomStream rng(301);
    for (std::size_t n : {4, 5, 6}) {
        for (int rep = 0; rep < 100; ++rep) {
            const double eta = 0.2 + 0.6 * rng.uniform01();
            const GroupTranscript g = alice_measure_group(uniform_group(n, rng), eta, rng);
            const auto fast = counting_infer(g.sent, g.announced, eta);
            const auto slow = oracles::counting_posterior_bruteforce(g.sent, g.announced, eta);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK_THAT(fast[i].p_measured_x, WithinAbs(slow[i], 1e-12));
            }
        }
    }
}

TEST_CASE("leakage statistics calibrate to the prior", "[chang-attack][slow]") {
    RandomStream rng(302);
    const auto stats = counting_leakage(10000, 6, 0.5, rng);
    CHECK(stats.groups == 10000);
    // exact posteriors average to the prior P(X) = 1 - eta
    CHECK_THAT(stats.posterior.mean(), WithinAbs(0.5, 0.01));
    // the published group occurs with positive probability, so certain calls
    // exist; demand three standard errors of clearance
    CHECK(stats.certain.mean() > 0.0);
    CHECK(stats.certain.mean() > 3.0 * stats.certain.standard_error());
    CHECK(stats.abs_shift.mean() > 0.0);
}

TEST_CASE("fake sequence composition", "[chang-attack]") {
    SECTION("exact eta=1/2 split at n=8") {
        const auto c = fake_composition(8, 0.5);
        CHECK(c == std::array<std::size_t, 4>{2, 2, 2, 2});
    }
    SECTION("the Z share is the rounded eta target") {
        for (std::size_t n : {4, 5, 6, 7, 8, 24}) {
            for (double eta : {0.3, 0.5, 0.7}) {
                const auto c = fake_composition(n, eta);
                CHECK(c[0] + c[1] + c[2] + c[3] == n);
                const auto z = static_cast<std::size_t>(
                    std::llround(eta * static_cast<double>(n)));
                CHECK(c[0] + c[1] == z);
            }
        }
    }
}

TEST_CASE("store-and-fake passes the checks and recovers everything",
          "[chang-attack][slow]") {
    RandomStream rng(303);
    const double eta = 0.5;
    const std::size_t n = 24;

    std::vector<GroupTranscript> groups;
    std::vector<std::vector<PreparedSymbol>> returned;
    std::vector<std::vector<std::size_t>> disclosures;
    std::size_t recovered = 0, total = 0;
    for (int g = 0; g < 2000; ++g) {
        const auto received = uniform_group(n, rng);
        auto sf = store_fake_step2(received, eta, rng);
        CHECK(sf.stored == received);  // stored untouched

        GroupTranscript t;
        t.sent = received;
        t.announced = sf.announced;
        returned.push_back(sf.fake.symbols);

        const auto x_pos = x_basis_positions(received);
        const auto reply = store_fake_step4_reply(sf.stored, sf.fake, x_pos, eta, rng);
        CHECK(reply.disclosed.size() == x_pos.size());
        disclosures.push_back(reply.disclosed);
        groups.push_back(std::move(t));

        const auto bits = store_fake_extract(sf.stored, x_pos);
        std::size_t idx = 0;
        for (std::size_t i = 0; i < received.size(); ++i) {
            if (basis_of(received[i]) == Basis::X) continue;
            ++total;
            recovered += bits.at(idx) == bit_of(received[i]) ? 1 : 0;
            ++idx;
        }
    }
    CHECK(recovered == total);  // the whole raw key

    const auto step3 = bob_step3_check(groups, returned, eta, 0.01, rng);
    CHECK(step3.deterministic_failures == 0);
    CHECK(step3.statistical_pass);
    const auto step4 = bob_step4_check(groups, disclosures, eta, 0.01);
    CHECK(step4.deterministic_failures == 0);
    CHECK(step4.statistical_pass);
}

TEST_CASE("step-4 reply rule details", "[chang-attack]") {
    RandomStream rng(305);
    const double eta = 0.5;

    SECTION("disclosed slots are distinct and X slots carry matching symbols") {
        for (int rep = 0; rep < 500; ++rep) {
            const auto received = uniform_group(8, rng);
            auto sf = store_fake_step2(received, eta, rng);
            const auto x_pos = x_basis_positions(received);
            const auto reply = store_fake_step4_reply(sf.stored, sf.fake, x_pos, eta, rng);
            std::vector<bool> seen(8, false);
            for (std::size_t k = 0; k < reply.disclosed.size(); ++k) {
                const std::size_t slot = reply.disclosed[k];
                REQUIRE_FALSE(seen[slot]);
                seen[slot] = true;
                if (reply.unsafe_count == 0 &&
                    basis_of(sf.fake.symbols[slot]) == Basis::X) {
                    CHECK(sf.fake.symbols[slot] == received[x_pos[k]]);
                }
            }
        }
    }

    SECTION("the X-announced fraction among disclosures tracks 1 - eta") {
        std::size_t x_disclosed = 0, disclosed = 0;
        for (int rep = 0; rep < 4000; ++rep) {
            const auto received = uniform_group(24, rng);
            auto sf = store_fake_step2(received, eta, rng);
            const auto x_pos = x_basis_positions(received);
            const auto reply = store_fake_step4_reply(sf.stored, sf.fake, x_pos, eta, rng);
            for (std::size_t slot : reply.disclosed) {
                ++disclosed;
                x_disclosed += basis_of(sf.fake.symbols[slot]) == Basis::X ? 1 : 0;
            }
        }
        CHECK(binomial_two_sided_pvalue(x_disclosed, disclosed, 1.0 - eta) > 0.001);
    }

    SECTION("tiny groups force detectable disclosures at the predicted rate") {
        // With n = 6 and eta = 1/2 the fabricated group holds one X symbol
        // only once, so a group whose X outcomes overflow the matching and Z
        // pools has no safe disclosure; that happens for about 0.5% of
        // groups, and only then is the attack catchable.
        std::size_t unsafe_groups = 0, caught_groups = 0;
        const int groups = 20000;
        for (int rep = 0; rep < groups; ++rep) {
            const auto received = uniform_group(6, rng);
            auto sf = store_fake_step2(received, eta, rng);
            const auto x_pos = x_basis_positions(received);
            const auto reply = store_fake_step4_reply(sf.stored, sf.fake, x_pos, eta, rng);
            GroupTranscript t;
            t.sent = received;
            t.announced = sf.announced;
            const auto check = bob_step4_group_check(t, reply.disclosed);
            unsafe_groups += reply.unsafe_count > 0 ? 1 : 0;
            caught_groups += check.deterministic_failures > 0 ? 1 : 0;
        }
        CHECK(unsafe_groups == caught_groups);  // unsafe exactly when caught
        const double rate = static_cast<double>(unsafe_groups) / groups;
        CHECK(rate > 0.0);
        CHECK_THAT(rate, Catch::Matchers::WithinAbs(20.0 / 4096.0, 0.003));
    }

    SECTION("a non-X position is rejected") {
        const std::vector<PreparedSymbol> received{PreparedSymbol::Z0, PreparedSymbol::XPlus,
                                                   PreparedSymbol::Z1, PreparedSymbol::Z1};
        auto sf = store_fake_step2(received, eta, rng);
        CHECK_THROWS_AS(store_fake_step4_reply(sf.stored, sf.fake, {0}, eta, rng),
                        std::invalid_argument);
    }

    SECTION("extract requires every X original to be listed") {
        const std::vector<PreparedSymbol> received{PreparedSymbol::Z0, PreparedSymbol::XPlus};
        CHECK_THROWS_AS(store_fake_extract(received, {}), std::invalid_argument);
        CHECK(store_fake_extract(received, {1}) == std::vector<int>{0});
        CHECK(store_fake_extract({}, {}).empty());
    }
}
