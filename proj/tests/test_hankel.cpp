#include <doctest.h>

#include <random>

#include "odmdcpd/hankel.hpp"

using namespace odmdcpd;

TEST_CASE("zero delays pass columns through unchanged") {
    Eigen::MatrixXd data(2, 5);
    data << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10;
    const Eigen::MatrixXd out = hankelize(data, HankelConfig{0, 1});
    CHECK(out.rows() == 2);
    CHECK(out.cols() == 5);
    CHECK((out - data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unit-stride embedding stacks trailing snapshots") {
    // stream [1,2,3,4], h=2: columns [1,2,3] and [2,3,4]
    Eigen::MatrixXd data(1, 4);
    data << 1, 2, 3, 4;
    const Eigen::MatrixXd out = hankelize(data, HankelConfig{2, 1});
    REQUIRE(out.rows() == 3);
    REQUIRE(out.cols() == 2);
    CHECK(out(0, 0) == 1);
    CHECK(out(1, 0) == 2);
    CHECK(out(2, 0) == 3);
    CHECK(out(0, 1) == 2);
    CHECK(out(1, 1) == 3);
    CHECK(out(2, 1) == 4);
}

TEST_CASE("strided embedding samples at delay-step intervals") {
    // stream [1..5], h=4, h_d=2: single column [1,3,5]
    Eigen::MatrixXd data(1, 5);
    data << 1, 2, 3, 4, 5;
    const Eigen::MatrixXd out = hankelize(data, HankelConfig{4, 2});
    REQUIRE(out.rows() == 3);
    REQUIRE(out.cols() == 1);
    CHECK(out(0, 0) == 1);
    CHECK(out(1, 0) == 3);
    CHECK(out(2, 0) == 5);
}

TEST_CASE("warm-up emits nothing until h prior columns exist") {
    Hankelizer hk(1, HankelConfig{3, 1});
    Eigen::MatrixXd one(1, 1);
    for (int k = 0; k < 3; ++k) {
        one(0, 0) = k;
        CHECK(hk.feed(one).cols() == 0);
        CHECK(!hk.warm());
    }
    one(0, 0) = 3;
    const Eigen::MatrixXd out = hk.feed(one);
    CHECK(hk.warm());
    REQUIRE(out.cols() == 1);
    CHECK(out(0, 0) == 0);
    CHECK(out(3, 0) == 3);
}

TEST_CASE("streaming feed matches one-shot embedding for random splits") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 1 + static_cast<int>(rng() % 3);
        const int stride = 1 + static_cast<int>(rng() % 3);
        const int h = stride * static_cast<int>(rng() % 4);
        const int n = 20 + static_cast<int>(rng() % 30);
        Eigen::MatrixXd data(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) data(i, j) = gauss(rng);

        const HankelConfig cfg{h, stride};
        const Eigen::MatrixXd whole = hankelize(data, cfg);

        Hankelizer hk(m, cfg);
        Eigen::MatrixXd streamed(whole.rows(), 0);
        int at = 0;
        while (at < n) {
            const int j = std::min<int>(1 + static_cast<int>(rng() % 5), n - at);
            const Eigen::MatrixXd part = hk.feed(data.middleCols(at, j));
            streamed.conservativeResize(Eigen::NoChange, streamed.cols() + part.cols());
            streamed.rightCols(part.cols()) = part;
            at += j;
        }
        REQUIRE(streamed.cols() == whole.cols());
        CHECK((streamed - whole).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("invalid delay configurations are rejected") {
    CHECK_THROWS_AS(HankelConfig{-1, 1}.validate(), ConfigError);
    CHECK_THROWS_AS(HankelConfig{4, 0}.validate(), ConfigError);
    CHECK_THROWS_AS(HankelConfig{5, 2}.validate(), ConfigError);  // h % h_d != 0
    CHECK_NOTHROW(HankelConfig{6, 2}.validate());
}
