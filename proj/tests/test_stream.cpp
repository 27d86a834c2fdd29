#include <doctest.h>

#include <random>

#include "odmdcpd/stream.hpp"

using namespace odmdcpd;

namespace {

// Columns whose single entry equals the global index make slice positions
// directly observable.
Eigen::MatrixXd tagged(long long k) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = static_cast<double>(k);
    return m;
}

EmbeddedWindows push(SnapshotStore& store, long long k) {
    return store.advance(tagged(k), tagged(k) * 10.0, Eigen::VectorXd(),
                         {static_cast<double>(k)});
}

}  // namespace

TEST_CASE("compensation and augmentation") {
    Eigen::MatrixXd x(3, 4), xp(3, 4), theta(2, 4);
    x.setRandom();
    xp.setRandom();
    theta.setRandom();

    SUBCASE("zero control with known matrix leaves the pair untouched") {
        const Eigen::MatrixXd b = Eigen::MatrixXd::Random(3, 2);
        const PreparedPair out = prepare_pair(x, xp, Eigen::MatrixXd::Zero(2, 4), b);
        CHECK((out.xp - xp).cwiseAbs().maxCoeff() == 0.0);
        CHECK((out.x - x).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("unknown control stacks state and control rows") {
        const PreparedPair out = prepare_pair(x, xp, theta);
        CHECK(out.x.rows() == 5);
        CHECK((out.x.topRows(3) - x).cwiseAbs().maxCoeff() == 0.0);
        CHECK((out.x.bottomRows(2) - theta).cwiseAbs().maxCoeff() == 0.0);
        CHECK((out.xp - xp).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("identity control matrix with theta = xp compensates to zero") {
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
        const PreparedPair out = prepare_pair(x, xp, xp, eye);
        CHECK(out.xp.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("shape mismatches are configuration errors") {
        CHECK_THROWS_AS(prepare_pair(x, xp.leftCols(3), theta), ConfigError);
        CHECK_THROWS_AS(prepare_pair(x, xp, theta.leftCols(3)), ConfigError);
        CHECK_THROWS_AS(prepare_pair(x, xp, theta, Eigen::MatrixXd::Identity(2, 2)), ConfigError);
    }
}

TEST_CASE("full store exposes one revert and one new column per unit batch") {
    const WindowLayout layout{2, 1, 3, 4};  // a=2 b=1 c=3 d=4, capacity 8
    SnapshotStore store(layout);
    EmbeddedWindows win;
    for (long long k = 0; k < 20; ++k) win = push(store, k);

    // head = 20; learning slice covers [head-1-b-c-d, head-b-c) = [11, 16)
    CHECK(win.revert_count == 1);
    CHECK(win.new_count == 1);
    REQUIRE(win.learn_x.cols() == 5);
    CHECK(win.learn_x(0, 0) == 11);
    CHECK(win.learn_x(0, 4) == 15);
    CHECK(win.learn_xp(0, 4) == 150);
    CHECK(win.windows_ready);
    REQUIRE(win.base_x.cols() == 2);
    REQUIRE(win.test_x.cols() == 3);
    // base = [head-a-b-c, head-b-c) = [14, 16), test = [17, 20)
    CHECK(win.base_x(0, 0) == 14);
    CHECK(win.base_x(0, 1) == 15);
    CHECK(win.test_x(0, 0) == 17);
    CHECK(win.test_x(0, 2) == 19);
}

TEST_CASE("no revert columns while the store is filling") {
    SnapshotStore store(WindowLayout{2, 1, 3, 4});
    for (long long k = 0; k < 8; ++k) {
        const EmbeddedWindows win = push(store, k);
        CHECK(win.revert_count == 0);
    }
}

TEST_CASE("reference layout slices the published base and test ranges") {
    // a=100, b=0, c=100, d=300: base = [k-200, k-100), test = [k-100, k)
    SnapshotStore store(WindowLayout{100, 0, 100, 300});
    EmbeddedWindows win;
    for (long long k = 0; k < 600; ++k) win = push(store, k);
    REQUIRE(win.windows_ready);
    CHECK(win.base_x(0, 0) == 400);
    CHECK(win.base_x(0, 99) == 499);
    CHECK(win.test_x(0, 0) == 500);
    CHECK(win.test_x(0, 99) == 599);
}

TEST_CASE("base and test are disjoint and separated by exactly the gap") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const int a = 1 + static_cast<int>(rng() % 4);
        const int b = static_cast<int>(rng() % 3);
        const int c = 1 + static_cast<int>(rng() % 4);
        const int d = a + static_cast<int>(rng() % 4);
        SnapshotStore store(WindowLayout{a, b, c, d});
        EmbeddedWindows win;
        for (long long k = 0; k < 40; ++k) win = push(store, k);
        REQUIRE(win.windows_ready);
        const double base_last = win.base_x(0, a - 1);
        const double test_first = win.test_x(0, 0);
        CHECK(test_first - base_last - 1 == b);
    }
}

TEST_CASE("mini-batches larger than the test window are rejected") {
    SnapshotStore store(WindowLayout{2, 0, 2, 4});
    Eigen::MatrixXd x(1, 3), xp(1, 3);
    x.setRandom();
    xp.setRandom();
    CHECK_THROWS_AS(store.advance(x, xp, Eigen::VectorXd(), {0.0, 1.0, 2.0}), ConfigError);
}

TEST_CASE("batched replay yields the same windows as column-by-column") {
    const WindowLayout layout{3, 1, 4, 6};
    SnapshotStore one(layout);
    SnapshotStore batched(layout);

    EmbeddedWindows win_one, win_batched;
    const int j = 2;  // j divides the stream, j <= c
    for (long long k = 0; k < 60; k += j) {
        for (int i = 0; i < j; ++i) win_one = push(one, k + i);
        Eigen::MatrixXd x(1, j), xp(1, j);
        std::vector<double> ts;
        for (int i = 0; i < j; ++i) {
            x(0, i) = static_cast<double>(k + i);
            xp(0, i) = static_cast<double>((k + i) * 10);
            ts.push_back(static_cast<double>(k + i));
        }
        win_batched = batched.advance(x, xp, Eigen::VectorXd(), ts);

        CHECK(win_one.head == win_batched.head);
        CHECK(win_one.windows_ready == win_batched.windows_ready);
        if (win_one.windows_ready) {
            CHECK((win_one.base_x - win_batched.base_x).cwiseAbs().maxCoeff() == 0.0);
            CHECK((win_one.test_x - win_batched.test_x).cwiseAbs().maxCoeff() == 0.0);
        }
        // batched learning slice covers the union of the unit-batch slices
        if (win_batched.learn_x.cols() > 0 && win_one.learn_x.cols() > 0) {
            CHECK(win_one.learn_x(0, win_one.learn_x.cols() - 1) ==
                  win_batched.learn_x(0, win_batched.learn_x.cols() - 1));
        }
    }
}

TEST_CASE("batch invariants are validated") {
    RawBatch batch;
    batch.states = Eigen::MatrixXd::Random(2, 3);
    batch.shifted = Eigen::MatrixXd::Random(2, 3);
    batch.controls = Eigen::MatrixXd(0, 3);
    batch.timestamps = {0.0, 1.0, 2.0};
    CHECK_NOTHROW(batch.validate());

    batch.timestamps = {0.0, 2.0, 1.0};
    CHECK_THROWS_AS(batch.validate(), DataError);
    batch.timestamps = {0.0, 1.0, 2.0};

    batch.shifted = Eigen::MatrixXd::Random(2, 2);
    CHECK_THROWS_AS(batch.validate(), DataError);
}
