#include "reference_watkins.hpp"
#include "support.hpp"
#include "ttql/learner.hpp"
#include "ttql/metrics.hpp"
#include "ttql/oracle.hpp"

#include <doctest.h>

#include <charconv>
#include <cmath>
#include <sstream>

using namespace ttql;

TEST_CASE("never_transfer matches reference Watkins bit for bit") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Mdp m = test::small_random(seed, 6, 3, 0.85);
        const auto q_star = solve_q_star(m, 1e-10).q_star;
        LearnerConfig cfg;
        cfg.horizon = 300;
        cfg.gate = GateMode::never_transfer;
        Rng rng = Rng(seed).substream(2);
        const auto trace = run(m, std::nullopt, cfg, q_star, rng);
        CHECK(trace_to_csv(trace) == test::reference_watkins_csv(m, q_star, 300, Rng(seed).substream(2)));
    }
}

TEST_CASE("ttql_step is the averaged target backup") {
    const Mdp m(2, 1, {0.2, 0.6}, {0, 1, 1, 0}, 0.5);
    const QTable q(2, 1, std::vector<double>{1.0, 2.0});
    const QTable target(2, 1, std::vector<double>{10.0, 20.0});
    Rng rng(0);
    const QTable next = ttql_step(q, target, m, 3, rng);
    // Deterministic successors: 0 -> 1, 1 -> 0; alpha = 1/4.
    CHECK(next(0, 0) == doctest::Approx(0.75 * 1.0 + 0.25 * (0.2 + 0.5 * 20.0)));
    CHECK(next(1, 0) == doctest::Approx(0.75 * 2.0 + 0.25 * (0.6 + 0.5 * 10.0)));
    CHECK(rng.counter() == 2);
    CHECK_THROWS_AS((void)ttql_step(q, target, m, 0, rng), std::invalid_argument);
    CHECK_THROWS_AS((void)ttql_step(QTable(3, 1), target, m, 1, rng), std::invalid_argument);
}

TEST_CASE("safe condition compares Bellman errors under the new model") {
    const Mdp m = test::small_random(9, 5, 2, 0.9);
    const auto q_star = solve_q_star(m, 1e-12).q_star;
    const auto d1 = safe_condition(q_star, QTable(5, 2), m);
    CHECK(d1.flag);
    CHECK(d1.source_mnbe < d1.current_mnbe);
    const auto d2 = safe_condition(QTable(5, 2), q_star, m);
    CHECK_FALSE(d2.flag);
    const auto tie = safe_condition(q_star, q_star, m);
    CHECK(tie.flag);
}

TEST_CASE("oracle source keeps the gate open and drives the error down") {
    const Mdp m = test::small_random(4, 8, 4, 0.9);
    const auto q_star = solve_q_star(m, 1e-12).q_star;
    LearnerConfig cfg;
    cfg.horizon = 2000;
    Rng a(1);
    const auto gated = run(m, q_star, cfg, q_star, a);
    for (const auto& rec : gated.steps) {
        REQUIRE(rec.transfer_flag);
        CHECK(rec.beta_hat <= 1e-9);
    }
    cfg.gate = GateMode::never_transfer;
    Rng b(1);
    const auto plain = run(m, std::nullopt, cfg, q_star, b);
    CHECK(gated.steps.back().mne < 0.1 * plain.steps.back().mne);
    CHECK(gated.initial_mne == plain.initial_mne);
}

TEST_CASE("a useless source leaves the trace identical to Q-learning") {
    const Mdp m = test::small_random(6, 6, 3, 0.8);
    const auto q_star = solve_q_star(m, 1e-12).q_star;
    const QTable junk(6, 3, 1e6);
    LearnerConfig cfg;
    cfg.horizon = 500;
    Rng a(3);
    const auto gated = run(m, junk, cfg, q_star, a);
    cfg.gate = GateMode::never_transfer;
    Rng b(3);
    const auto plain = run(m, std::nullopt, cfg, q_star, b);
    CHECK(gated.final_q == plain.final_q);
    for (std::size_t i = 0; i < gated.steps.size(); ++i) {
        REQUIRE_FALSE(gated.steps[i].transfer_flag);
        CHECK(gated.steps[i].mne == plain.steps[i].mne);
    }
}

TEST_CASE("always_transfer ignores the gate") {
    const Mdp m = test::small_random(6, 6, 3, 0.8);
    const auto q_star = solve_q_star(m, 1e-12).q_star;
    LearnerConfig cfg;
    cfg.horizon = 50;
    cfg.gate = GateMode::always_transfer;
    Rng a(3);
    const auto trace = run(m, QTable(6, 3, 1e6), cfg, q_star, a);
    for (const auto& rec : trace.steps) CHECK(rec.transfer_flag);
}

TEST_CASE("gate is evaluated every safe_check_period steps") {
    const Mdp m = test::small_random(8, 6, 3, 0.9);
    const auto q_star = solve_q_star(m, 1e-12).q_star;
    // A mediocre source: the gate opens early and closes once Q_t catches up.
    std::vector<double> v(q_star.values().begin(), q_star.values().end());
    for (double& x : v) x += 0.05;
    const QTable source(6, 3, v);
    LearnerConfig cfg;
    cfg.horizon = 400;
    cfg.safe_check_period = 7;
    Rng rng(2);
    const auto trace = run(m, source, cfg, q_star, rng);
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& rec = trace.steps[i];
        CHECK(rec.gate_checked == (i % 7 == 0));
        if (!rec.gate_checked) CHECK(rec.transfer_flag == trace.steps[i - 1].transfer_flag);
    }
}

TEST_CASE("distance_oracle gate reads the oracle error") {
    const Mdp m = test::small_random(8, 6, 3, 0.9);
    const auto q_star = solve_q_star(m, 1e-12).q_star;
    LearnerConfig cfg;
    cfg.horizon = 20;
    cfg.gate = GateMode::distance_oracle;
    Rng rng(2);
    const auto trace = run(m, q_star, cfg, q_star, rng);
    for (const auto& rec : trace.steps) CHECK(rec.transfer_flag);
}

TEST_CASE("run validates its inputs") {
    const Mdp m = test::small_random(8, 4, 2, 0.9);
    const auto q_star = solve_q_star(m, 1e-10).q_star;
    Rng rng(0);
    LearnerConfig cfg;
    cfg.horizon = 5;
    CHECK_THROWS_AS((void)run(m, std::nullopt, cfg, q_star, rng), std::invalid_argument);
    cfg.gate = GateMode::never_transfer;
    cfg.horizon = 0;
    CHECK_THROWS_AS((void)run(m, std::nullopt, cfg, q_star, rng), std::invalid_argument);
    cfg.horizon = 5;
    cfg.safe_check_period = 0;
    CHECK_THROWS_AS((void)run(m, std::nullopt, cfg, q_star, rng), std::invalid_argument);
    cfg.safe_check_period = 1;
    CHECK_THROWS_AS((void)run(m, QTable(3, 2), cfg, q_star, rng), std::invalid_argument);
    CHECK_THROWS_AS((void)run(m, std::nullopt, cfg, QTable(3, 2), rng), std::invalid_argument);
    cfg.init = InitConstant{NAN};
    CHECK_THROWS_AS((void)run(m, std::nullopt, cfg, q_star, rng), std::invalid_argument);
}

TEST_CASE("initial table options") {
    const Mdp m = test::small_random(8, 4, 2, 0.9);
    const auto q_star = solve_q_star(m, 1e-10).q_star;
    LearnerConfig cfg;
    cfg.horizon = 1;
    cfg.gate = GateMode::never_transfer;
    cfg.init = q_star;
    Rng rng(0);
    CHECK(run(m, std::nullopt, cfg, q_star, rng).initial_mne == 0.0);
    cfg.init = InitConstant{2.5};
    const auto t = run(m, std::nullopt, cfg, q_star, rng);
    CHECK(t.initial_mne == doctest::Approx(mne(QTable(4, 2, 2.5), q_star)));
}

TEST_CASE("traces are reproducible and well formed") {
    const Mdp m = test::small_random(8, 4, 2, 0.9);
    const auto q_star = solve_q_star(m, 1e-10).q_star;
    LearnerConfig cfg;
    cfg.horizon = 50;
    cfg.gate = GateMode::never_transfer;
    Rng a(5);
    Rng b(5);
    const auto csv = trace_to_csv(run(m, std::nullopt, cfg, q_star, a));
    CHECK(csv == trace_to_csv(run(m, std::nullopt, cfg, q_star, b)));
    CHECK(csv.rfind("step,mne,mnbe,transfer_flag,beta_hat,alpha\n1,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);
}

TEST_CASE("format_double round trips") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) {
        const auto text = format_double(x);
        double back = 0.0;
        std::from_chars(text.data(), text.data() + text.size(), back);
        CHECK(back == x);
    }
    CHECK(format_double(NAN) == "nan");
    CHECK(format_double(-INFINITY) == "-inf");
}

TEST_CASE("gate names") {
    CHECK(parse_gate_mode("bellman") == GateMode::bellman_gate);
    CHECK(parse_gate_mode("never") == GateMode::never_transfer);
    CHECK(parse_gate_mode("always_transfer") == GateMode::always_transfer);
    CHECK_THROWS_AS((void)parse_gate_mode("sometimes"), std::invalid_argument);
}
