#include <doctest.h>

#include <cmath>

#include "odmdcpd/evaluation.hpp"

using namespace odmdcpd;

namespace {

// hand-rolled reference for single-window cases
double sigmoid_credit(double y) { return 2.0 / (1.0 + std::exp(5.0 * y)) - 1.0; }

}  // namespace

TEST_CASE("the null detector scores exactly zero") {
    ScoringRun run;
    run.labels = {100, 400, 900};
    run.window_length = 50;
    CHECK(nab_score(run, NabProfile::standard()) == 0.0);
    CHECK(nab_score(run, NabProfile::low_fp()) == 0.0);
    CHECK(nab_score(run, NabProfile::low_fn()) == 0.0);
}

TEST_CASE("alarms at every window start attain the profile maximum") {
    ScoringRun run;
    run.labels = {100, 400, 900};
    run.alarms = {100, 400, 900};
    run.window_length = 50;
    CHECK(nab_score(run, NabProfile::standard()) == doctest::Approx(100.0));
    CHECK(nab_score(run, NabProfile::low_fp()) == doctest::Approx(100.0));
    CHECK(nab_score(run, NabProfile::low_fn()) == doctest::Approx(100.0));
}

TEST_CASE("an alarm ahead of the window counts as a false positive") {
    const NabProfile prof = NabProfile::standard();
    ScoringRun run;
    run.labels = {100};
    run.window_length = 50;
    run.alarms = {99};  // one snapshot early

    // raw = fp + fn (window missed); reference computed by hand
    const double raw = prof.fp_weight + prof.fn_weight;
    const double null_raw = prof.fn_weight;
    const double perfect = prof.tp_weight * sigmoid_credit(-1.0);
    const double want = 100.0 * (raw - null_raw) / (perfect - null_raw);
    CHECK(nab_score(run, prof) == doctest::Approx(want));
    CHECK(nab_score(run, prof) < 0.0);
}

TEST_CASE("positional credit decays from the window start") {
    const NabProfile prof = NabProfile::standard();
    double prev = 101.0;
    for (long long pos : {0, 10, 25, 49}) {
        ScoringRun run;
        run.labels = {100};
        run.window_length = 50;
        run.alarms = {100 + pos};
        const double s = nab_score(run, prof);
        CHECK(s < prev);
        CHECK(s > 0.0);
        prev = s;
    }
}

TEST_CASE("only the earliest in-window alarm earns credit; extras are free") {
    ScoringRun one;
    one.labels = {100};
    one.window_length = 50;
    one.alarms = {105};

    ScoringRun many = one;
    many.alarms = {105, 110, 120, 140};
    CHECK(nab_score(one, NabProfile::standard()) ==
          doctest::Approx(nab_score(many, NabProfile::standard())));
}

TEST_CASE("adding an out-of-window alarm never increases the score") {
    ScoringRun run;
    run.labels = {100, 500};
    run.window_length = 40;
    run.alarms = {110, 505};
    const double base = nab_score(run, NabProfile::standard());
    for (long long fp : {10, 300, 700}) {
        ScoringRun worse = run;
        worse.alarms.push_back(fp);
        CHECK(nab_score(worse, NabProfile::standard()) < base);
    }
}

TEST_CASE("overlapping windows are merged") {
    ScoringRun run;
    run.labels = {100, 120};  // windows overlap with L=50 -> one merged window
    run.window_length = 50;
    run.alarms = {100};
    CHECK(nab_score(run, NabProfile::standard()) == doctest::Approx(100.0));
}

TEST_CASE("empty label sets are rejected") {
    ScoringRun run;
    run.window_length = 10;
    CHECK_THROWS_AS(nab_score(run, NabProfile::standard()), ConfigError);
}

TEST_CASE("profile lookups and weight validation") {
    CHECK(NabProfile::by_name("standard").fp_weight == doctest::Approx(-0.11));
    CHECK(NabProfile::by_name("lowFP").fp_weight == doctest::Approx(-0.22));
    CHECK(NabProfile::by_name("lowFN").fn_weight == doctest::Approx(-2.0));
    CHECK_THROWS_AS(NabProfile::by_name("bogus"), ConfigError);

    NabProfile bad;
    bad.fp_weight = 0.3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("threshold sweep") {
    SUBCASE("an all-zero score stream matches the null detector at every threshold") {
        std::vector<CpdScore> scores(200);
        for (int i = 0; i < 200; ++i) scores[i].step = i;
        const ThresholdSweep sweep =
            sweep_threshold(scores, {50, 120}, NabProfile::standard(), 20);
        for (const auto& [t, s] : sweep.curve) CHECK(s == 0.0);
        CHECK(sweep.best_score == 0.0);
    }
    SUBCASE("a single clean alarm scores the same below its height") {
        std::vector<CpdScore> scores(200);
        for (int i = 0; i < 200; ++i) scores[i].step = i;
        scores[100].ratio = 5.0;  // alarm right at the label
        const ThresholdSweep sweep =
            sweep_threshold(scores, {100}, NabProfile::standard(), 20);
        for (const auto& [t, s] : sweep.curve)
            if (t < 5.0) CHECK(s == doctest::Approx(100.0));
        CHECK(sweep.best_score == doctest::Approx(100.0));
    }
    SUBCASE("the sweep finds the threshold separating signal from noise") {
        std::vector<CpdScore> scores(300);
        for (int i = 0; i < 300; ++i) {
            scores[i].step = i;
            scores[i].ratio = (i % 7 == 0) ? 0.2 : 0.0;  // background chatter
        }
        scores[150].ratio = 3.0;  // true event at the label
        const ThresholdSweep sweep =
            sweep_threshold(scores, {150}, NabProfile::standard(), 25);
        CHECK(sweep.best_threshold >= 0.2);
        CHECK(sweep.best_score == doctest::Approx(100.0));
    }
}

TEST_CASE("default window length follows the span convention") {
    CHECK(default_window_length(1000, 10) == 10);
    CHECK(default_window_length(5, 10) == 1);
    CHECK_THROWS_AS(default_window_length(100, 0), ConfigError);
}
