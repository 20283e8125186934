#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "mobs/csf.hpp"
#include "mobs/error.hpp"

#include "csf_golden.hpp"

using mobs::DomainError;
using namespace mobs::csf;
using mobs::testing::kGolden;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("default parameters") {
    const BartenParams p;
    CHECK(p.k_crozier == 3.0);
    CHECK(p.eta == 0.03);
    CHECK(p.phi0 == 3e-8);
    CHECK(p.x_max == 12.0);
    CHECK(p.n_max == 15.0);
    CHECK(p.t_int == 0.1);
    CHECK(p.p_photon == 1.285e6);
    CHECK(p.sigma0 == 0.5);
    CHECK(p.c_ab == 0.08);
    CHECK(p.u0 == 7.0);
    CHECK(p.n1 == 7.0);
    CHECK(p.n2 == 4.0);
    CHECK(p.tau10 == 0.032);
    CHECK(p.tau20 == 0.018);
    CHECK_NOTHROW(p.validate());

    BartenParams bad;
    bad.eta = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("pupil diameter") {
    CHECK(pupil_diameter(1600.0, 1.0) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(pupil_diameter(100.0, 4.0) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(pupil_diameter(1e30, 10.0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(pupil_diameter(1e-30, 10.0) == doctest::Approx(8.0).epsilon(1e-9));
    CHECK(rel(pupil_diameter(150.0, 9.1428), 2.9690500799236770025) < 1e-12);
    CHECK_THROWS_AS(pupil_diameter(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(pupil_diameter(10.0, -1.0), DomainError);
}

TEST_CASE("retinal illuminance") {
    CHECK(rel(retinal_illuminance(100.0, 5.0), 1493.6953590865335335) < 1e-12);
    CHECK(retinal_illuminance(200.0, 5.0) == doctest::Approx(2.0 * retinal_illuminance(100.0, 5.0)));
    CHECK_THROWS_AS(retinal_illuminance(0.0, 5.0), DomainError);
    CHECK_THROWS_AS(retinal_illuminance(100.0, 0.0), DomainError);
    CHECK_THROWS_AS(retinal_illuminance(100.0, 9.0), DomainError);
    CHECK_THROWS_AS(retinal_illuminance(100.0, 9.7), DomainError);
}

TEST_CASE("sub-term anchors") {
    CHECK(optical_mtf(0.0, 3.0) == 1.0);
    CHECK(lateral_inhibition(0.0) == 1.0);
    CHECK(temporal_filter(0.0, 0.02, 7.0) == 1.0);
    CHECK(temporal_filter(0.0, 0.01, 4.0) == 1.0);
    // Each sub-term is a decreasing function of its frequency.
    CHECK(optical_mtf(10.0, 3.0) < optical_mtf(5.0, 3.0));
    CHECK(lateral_inhibition(10.0) < lateral_inhibition(1.0));
    CHECK(temporal_filter(20.0, 0.02, 7.0) < temporal_filter(2.0, 0.02, 7.0));
}

TEST_CASE("csf golden values") {
    for (const auto& g : kGolden) {
        CAPTURE(g.u);
        CAPTURE(g.w);
        CAPTURE(g.l);
        CHECK(rel(csf(g.u, g.w, {g.x0, g.l}), g.s) < 1e-9);
    }
}

TEST_CASE("csf at the origin vanishes") {
    CHECK(csf(0.0, 0.0, {9.0, 150.0}) == 0.0);
}

TEST_CASE("csf rejects negative frequencies") {
    CHECK_THROWS_AS(csf(-1.0, 0.0, {9.0, 150.0}), DomainError);
    CHECK_THROWS_AS(csf(1.0, -0.5, {9.0, 150.0}), DomainError);
    CHECK_THROWS_AS(csf(1.0, 1.0, {0.0, 150.0}), DomainError);
}

TEST_CASE("csf stress grid is finite and non-negative") {
    for (double l : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
        for (double x0 : {0.5, 2.0, 9.0, 40.0}) {
            const CsfEvaluator s({x0, l});
            for (double u = 0.0; u <= 60.0; u += 1.5) {
                for (double w = 0.0; w <= 60.0; w += 1.5) {
                    const double v = s(u, w);
                    REQUIRE(std::isfinite(v));
                    REQUIRE(v >= 0.0);
                }
            }
        }
    }
}

TEST_CASE("higher luminance gives higher sensitivity on the sampled grid") {
    // Below ~1 cycle/deg with temporal modulation the luminance-dependent
    // time constants flip the ordering by a few percent, so the temporal
    // axis is only sampled where the spatial frequency is >= 2 cycles/deg.
    for (double x0 : {64.0 / 14.0, 64.0 / 7.0, 64.0 / 3.0}) {
        for (auto [lo, hi] : {std::pair{50.0, 150.0}, std::pair{1.5, 300.0}, std::pair{10.0, 100.0}}) {
            const CsfEvaluator low({x0, lo});
            const CsfEvaluator high({x0, hi});
            for (double u : {0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 30.0}) {
                CAPTURE(u);
                CHECK(high(u, 0.0) > low(u, 0.0));
            }
            for (double u : {2.0, 4.0, 8.0, 16.0, 30.0}) {
                for (double w : {0.5, 2.0, 5.0, 10.0, 20.0, 40.0}) {
                    CAPTURE(u);
                    CAPTURE(w);
                    CHECK(high(u, w) > low(u, w));
                }
            }
        }
    }
}

TEST_CASE("detection probability") {
    CHECK(std::abs(detection_probability(0.25, 4.0) - 0.5) <= 1e-12);
    CHECK(std::abs(detection_probability(1.0, 1.0) - 0.5) <= 1e-12);
    CHECK(detection_probability(0.0, 300.0) == doctest::Approx(0.0013498980316300945267).epsilon(1e-12));
    CHECK(detection_probability(1.0, 1e6) == doctest::Approx(1.0));
    CHECK(detection_probability(0.01, 50.0) > 0.0);
    CHECK(detection_probability(0.01, 50.0) < 1.0);
    CHECK_THROWS_AS(detection_probability(-0.1, 10.0), DomainError);
    CHECK_THROWS_AS(detection_probability(0.1, -10.0), DomainError);
}

TEST_CASE("detection probability is monotone in m and S") {
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double p = detection_probability(i * 0.003, 1.0);
        REQUIRE(p >= prev);
        prev = p;
    }
    prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double p = detection_probability(0.01, i * 0.3);
        REQUIRE(p >= prev);
        prev = p;
    }
}
