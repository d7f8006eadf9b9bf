#include <doctest.h>

#include <sstream>

#include "confound_ope/simulator.hpp"
#include "test_support.hpp"

using namespace confound_ope;
using confound_ope::testing::binomial_sd;

TEST_CASE("SplitMix64 reference stream") {
    // First outputs for seed 1234567 published with the reference implementation.
    SplitMix64 g(1234567);
    CHECK(g.next() == 6457827717110365317ULL);
    CHECK(g.next() == 3203168211198807973ULL);
    CHECK(g.next() == 9817491932198370423ULL);
}

TEST_CASE("uniform draws lie in [0,1)") {
    SplitMix64 g(3);
    for (int i = 0; i < 10000; ++i) {
        const double u = g.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("sampling is deterministic in (env, seed)") {
    const auto env = paper_env(0.9, 0.1);
    const auto a = sample_full_log(env, {5000, 42});
    const auto b = sample_full_log(env, {5000, 42});
    CHECK(a == b);
    std::ostringstream sa, sb;
    write_log_csv(sa, a);
    write_log_csv(sb, b);
    CHECK(sa.str() == sb.str());

    const auto c = sample_full_log(env, {100, 43});
    const auto a100 = sample_full_log(env, {100, 42});
    CHECK(c != a100);
}

TEST_CASE("records carry their logging propensity") {
    const auto env = paper_env(0.8, 0.3);
    for (const auto& r : sample_full_log(env, {2000, 9})) {
        CHECK(r.logged_propensity == env.logging_policy(r.context, r.action));
        CHECK(r.reward <= 1);
    }
}

TEST_CASE("degenerate logging policy always picks its action") {
    EnvironmentSpec env = paper_env(0.7, 0.0);
    env.logging_policy = Table(2, 2, {1.0, 0.0, 1.0, 0.0});
    for (const auto& r : sample_full_log(env, {1000, 1})) CHECK(r.action == 0);
}

TEST_CASE("invalid inputs are rejected") {
    auto env = paper_env(0.9, 0.1);
    env.context_probs = {0.5, 0.6};
    CHECK_THROWS_AS(sample_full_log(env, {10, 1}), ValidationError);
    CHECK_THROWS_AS(sample_full_log(paper_env(0.9, 0.1), {0, 1}), ValidationError);
}

TEST_CASE("censor is an order-preserving projection") {
    const FullLog one{{0, 1, 1, 0.1}};
    const auto c = censor(one);
    REQUIRE(c.size() == 1);
    CHECK(c[0] == CensoredLogRecord{1, 1});
    CHECK(censor(FullLog{}).empty());

    const auto full = sample_full_log(paper_env(0.9, 0.2), {3000, 5});
    const auto cens = censor(full);
    REQUIRE(cens.size() == full.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
        CHECK(cens[i].action == full[i].action);
        CHECK(cens[i].reward == full[i].reward);
    }
}

TEST_CASE("empirical_frequencies") {
    const CensoredLog balanced{{0, 1}, {0, 0}, {1, 1}, {1, 0}};
    CHECK(empirical_frequencies(balanced, 2) == std::vector<double>{0.5, 0.5});
    const CensoredLog only_one{{1, 0}, {1, 1}};
    CHECK(empirical_frequencies(only_one, 2) == std::vector<double>{0.0, 1.0});
    CHECK_THROWS_AS(empirical_frequencies(CensoredLog{}, 2), EmptyInputError);
    CHECK_THROWS_AS(empirical_frequencies(only_one, 1), RangeError);
}

TEST_CASE("marginal action frequency converges to the enumeration oracle") {
    // sum_x P(x) pi0(a0|x) = 0.1 * 0.9 + 0.9 * 0.1
    const double expected = 0.18;
    const std::size_t n = 2'000'000;
    const auto log = sample_full_log(paper_env(0.9, 0.1), {n, 2023});
    const auto freq = empirical_frequencies(log, 2);
    CHECK(std::fabs(freq[0] - expected) < 0.001);
    CHECK(std::fabs(freq[1] - (1.0 - expected)) < 0.001);
    CHECK(std::fabs(freq[0] + freq[1] - 1.0) < 1e-12);
}

TEST_CASE("context and conditional reward frequencies converge") {
    const auto env = paper_env(0.75, 0.2);
    const std::size_t n = 1'000'000;
    const auto log = sample_full_log(env, {n, 77});
    std::size_t count[2][2] = {};
    std::size_t reward[2][2] = {};
    std::size_t ctx[2] = {};
    for (const auto& r : log) {
        ++ctx[r.context];
        ++count[r.context][r.action];
        reward[r.context][r.action] += r.reward;
    }
    CHECK(std::fabs(static_cast<double>(ctx[1]) / n - 0.75) < 4 * binomial_sd(0.75, n));
    for (int x = 0; x < 2; ++x) {
        for (int a = 0; a < 2; ++a) {
            const double nxa = static_cast<double>(count[x][a]);
            REQUIRE(nxa > 0);
            const double mean = static_cast<double>(reward[x][a]) / nxa;
            const double mu = env.reward_means(x, a);
            INFO("x=", x, " a=", a);
            CHECK(std::fabs(mean - mu) <= std::max(4 * binomial_sd(mu, nxa), 1e-12));
            const double p = env.logging_policy(x, a);
            CHECK(std::fabs(nxa / ctx[x] - p) < 4 * binomial_sd(p, ctx[x]));
        }
    }
}

TEST_CASE("log CSV round trip") {
    const auto full = sample_full_log(paper_env(0.9, 0.1), {200, 3});
    std::stringstream ss;
    write_log_csv(ss, full);
    const auto parsed = read_log_csv(ss);
    CHECK(parsed.has_context);
    CHECK(parsed.full == full);
    CHECK(parsed.censored == censor(full));

    std::stringstream cs;
    write_log_csv(cs, censor(full));
    CHECK(cs.str().rfind("action,reward\n", 0) == 0);
    const auto parsed_c = read_log_csv(cs);
    CHECK_FALSE(parsed_c.has_context);
    CHECK(parsed_c.censored == censor(full));
}

TEST_CASE("log CSV format details") {
    std::ostringstream os;
    write_log_csv(os, FullLog{{1, 0, 1, 0.1}});
    CHECK(os.str() == "context,action,reward,propensity\n1,0,1,0.10000000000000001\n");
}

TEST_CASE("log CSV reader rejects malformed input") {
    std::istringstream bad_header("a,b\n");
    CHECK_THROWS_AS(read_log_csv(bad_header), ValidationError);
    std::istringstream bad_reward("action,reward\n0,2\n");
    CHECK_THROWS_AS(read_log_csv(bad_reward), ValidationError);
    std::istringstream bad_prop("context,action,reward,propensity\n0,0,1,0\n");
    CHECK_THROWS_AS(read_log_csv(bad_prop), ValidationError);
    std::istringstream short_row("action,reward\n0\n");
    CHECK_THROWS_AS(read_log_csv(short_row), ValidationError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_log_csv(empty), IoError);
}

TEST_CASE("derived seeds differ across tasks") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}
