#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <vector>

#include "mobs/error.hpp"
#include "mobs/fft.hpp"
#include "mobs/seed.hpp"
#include "mobs/stackgen.hpp"

using namespace mobs;

TEST_CASE("same seed gives bit-identical backgrounds") {
    const auto a = generate_background(32, 32, 16, 3.0, 77);
    const auto b = generate_background(32, 32, 16, 3.0, 77);
    const auto c = generate_background(32, 32, 16, 3.0, 78);
    CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
    CHECK_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
    CHECK(a.seed() == 77);
    CHECK(a.label() == Label::signal_absent);
}

TEST_CASE("background spans exactly [0, 1]") {
    const auto s = generate_background(16, 16, 8, 2.0, 5);
    const auto [lo, hi] = std::minmax_element(s.data().begin(), s.data().end());
    CHECK(*lo == 0.0);
    CHECK(*hi == 1.0);
}

TEST_CASE("background rejects unsupported dimensions") {
    CHECK_THROWS_AS(generate_background(6, 6, 8, 3.0, 1), DimensionError);
    CHECK_THROWS_AS(generate_background(16, 16, 9, 3.0, 1), DimensionError);
    CHECK_THROWS_AS(generate_background(16, 16, 8, -1.0, 1), DomainError);
}

TEST_CASE("beta = 0 is white: lag-1 autocorrelation within 3 sigma of zero") {
    const auto s = generate_background(64, 64, 32, 0.0, 1234);
    const auto d = s.data();
    const double mean = s.mean();
    double num = 0.0, den = 0.0;
    std::size_t pairs = 0;
    for (std::size_t t = 0; t < s.nt(); ++t) {
        for (std::size_t y = 0; y < s.ny(); ++y) {
            for (std::size_t x = 0; x + 1 < s.nx(); ++x) {
                num += (s.at(x, y, t) - mean) * (s.at(x + 1, y, t) - mean);
                ++pairs;
            }
        }
    }
    for (double v : d) den += (v - mean) * (v - mean);
    const double r = (num / static_cast<double>(pairs)) / (den / static_cast<double>(d.size()));
    CHECK(std::abs(r) < 3.0 / std::sqrt(static_cast<double>(pairs)));
}

TEST_CASE("beta = 3 has a -3 log-log power spectrum slope") {
    const Dims dims{32, 32, 16};
    const Fft3d fft(dims);
    // Mean periodogram, binned on integer radius in normalized-frequency units.
    std::map<int, std::pair<double, std::size_t>> bins;
    std::vector<std::complex<double>> buf(dims.size());
    for (std::uint64_t r = 0; r < 50; ++r) {
        const auto s = generate_background(dims.nx, dims.ny, dims.nt, 3.0, 1000 + r);
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = s.data()[i];
        fft.forward(buf);
        for (std::size_t t = 0; t < dims.nt; ++t) {
            for (std::size_t y = 0; y < dims.ny; ++y) {
                for (std::size_t x = 0; x < dims.nx; ++x) {
                    auto fold = [](std::size_t k, std::size_t n) {
                        return static_cast<double>(std::min(k, n - k)) / static_cast<double>(n);
                    };
                    const double f = std::sqrt(std::pow(fold(x, dims.nx), 2) +
                                               std::pow(fold(y, dims.ny), 2) +
                                               std::pow(fold(t, dims.nt), 2));
                    if (f == 0.0 || f > 0.5) continue;
                    auto& b = bins[static_cast<int>(std::lround(f * 64.0))];
                    b.first += std::norm(buf[s.index(x, y, t)]);
                    b.second += 1;
                }
            }
        }
    }
    std::vector<double> lx, ly;
    for (const auto& [k, b] : bins) {
        if (k < 2) continue;
        lx.push_back(std::log(k / 64.0));
        ly.push_back(std::log(b.first / static_cast<double>(b.second)));
    }
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    CAPTURE(slope);
    CHECK(slope == doctest::Approx(-3.0).epsilon(0.1));
}

TEST_CASE("lesion insertion") {
    const Dims dims{16, 16, 8};
    const ImageStack zero(dims);

    SUBCASE("amplitude 0 only flips the label") {
        const auto s = generate_background(16, 16, 8, 3.0, 9);
        const auto out = insert_lesion(s, LesionSpec::centered(dims, 0.0));
        CHECK(out.label() == Label::signal_present);
        CHECK(std::equal(s.data().begin(), s.data().end(), out.data().begin()));
    }

    SUBCASE("peak voxel increases by exactly the amplitude") {
        const auto s = generate_background(16, 16, 8, 3.0, 9);
        const auto lesion = LesionSpec::centered(dims, 0.25, 3.0, 2.0);
        const auto out = insert_lesion(s, lesion);
        CHECK(out.at(8, 8, 4) - s.at(8, 8, 4) == doctest::Approx(0.25).epsilon(1e-14));
        for (std::size_t i = 0; i < s.size(); ++i) REQUIRE(out.data()[i] >= s.data()[i]);
    }

    SUBCASE("added energy equals amplitude² times the product of Gaussian norms") {
        const LesionSpec lesion{0.7, 2.5, 1.5, {5, 9, 3}};
        const auto out = insert_lesion(zero, lesion);
        double brute = 0.0;
        for (std::size_t t = 0; t < dims.nt; ++t) {
            for (std::size_t y = 0; y < dims.ny; ++y) {
                for (std::size_t x = 0; x < dims.nx; ++x) {
                    const double dx = double(x) - 5.0, dy = double(y) - 9.0, dt = double(t) - 3.0;
                    const double g = 0.7 * std::exp(-(dx * dx + dy * dy) / (2 * 2.5 * 2.5) -
                                                    dt * dt / (2 * 1.5 * 1.5));
                    brute += g * g;
                }
            }
        }
        auto norm = [](std::size_t n, double c, double sigma) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = double(i) - c;
                s += std::exp(-d * d / (sigma * sigma));
            }
            return s;
        };
        const double factored = 0.49 * norm(16, 5.0, 2.5) * norm(16, 9.0, 2.5) * norm(8, 3.0, 1.5);
        double energy = 0.0;
        for (double v : out.data()) energy += v * v;
        CHECK(energy == doctest::Approx(brute).epsilon(1e-12));
        CHECK(energy == doctest::Approx(factored).epsilon(1e-12));
    }

    SUBCASE("present minus absent from the same background is the lesion term") {
        const auto s = generate_background(16, 16, 8, 3.0, 31);
        const auto lesion = LesionSpec::centered(dims, 0.3);
        const auto with = insert_lesion(s, lesion);
        const auto bump = insert_lesion(zero, lesion);
        for (std::size_t i = 0; i < s.size(); ++i) {
            REQUIRE(with.data()[i] - s.data()[i] == doctest::Approx(bump.data()[i]).epsilon(1e-12));
        }
    }

    SUBCASE("invalid lesions") {
        CHECK_THROWS_AS(insert_lesion(zero, LesionSpec{0.1, 1.0, 1.0, {16, 0, 0}}), DomainError);
        CHECK_THROWS_AS(insert_lesion(zero, LesionSpec{0.1, 1.0, 1.0, {0, 0, 8}}), DomainError);
        CHECK_THROWS_AS(insert_lesion(zero, LesionSpec{0.1, 0.0, 1.0, {0, 0, 0}}), DomainError);
        CHECK_THROWS_AS(insert_lesion(zero, LesionSpec{-0.1, 1.0, 1.0, {0, 0, 0}}), DomainError);
    }
}

TEST_CASE("display normalization") {
    const ViewingConditions vc;  // 300 cd/m², C = 200
    const auto s = generate_background(16, 16, 8, 3.0, 4);

    const auto out = normalize_to_display(s, vc);
    const auto [lo, hi] = std::minmax_element(out.data().begin(), out.data().end());
    CHECK(*lo == 1.5);
    CHECK(*hi == 300.0);

    const auto again = normalize_to_display(out, vc);
    for (std::size_t i = 0; i < out.size(); ++i) {
        REQUIRE(again.data()[i] == doctest::Approx(out.data()[i]).epsilon(1e-14));
    }

    // Input spans [0, 1], so the output mean is 1.5 + 298.5·mean.
    double brute = 0.0;
    for (double v : out.data()) brute += v;
    brute /= static_cast<double>(out.size());
    CHECK(brute == doctest::Approx(1.5 + 298.5 * s.mean()).epsilon(1e-12));

    CHECK_THROWS_AS(normalize_to_display(ImageStack(Dims{8, 8, 8}), vc), DegenerateInputError);
    ViewingConditions bad;
    bad.contrast = 1.0;
    CHECK_THROWS_AS(normalize_to_display(s, bad), ConfigError);
}

TEST_CASE("generate, insert, normalize stays finite and in range") {
    const ViewingConditions vc{500.0, 50.0, 7.0, 25.0};
    const Dims dims{16, 16, 8};
    const auto s = normalize_to_display(
        insert_lesion(generate_background(16, 16, 8, 3.0, 8), LesionSpec::centered(dims, 0.4)), vc);
    for (double v : s.data()) {
        REQUIRE(std::isfinite(v));
        REQUIRE(v >= 10.0);
        REQUIRE(v <= 500.0);
    }
}

TEST_CASE("corpus layout and seeding") {
    CorpusSpec spec;
    spec.n_pairs = 3;
    spec.dims = {16, 16, 8};
    CHECK(spec.n_cases() == 6);
    CHECK(spec.label_of(2) == Label::signal_absent);
    CHECK(spec.label_of(3) == Label::signal_present);
    CHECK(spec.seed_of(1) ==
          derive_seed(spec.master_seed, SeedStream::background_absent, 1));
    CHECK(spec.seed_of(4) ==
          derive_seed(spec.master_seed, SeedStream::background_present, 1));

    const auto a = make_case(spec, 4);
    const auto b = make_case(spec, 4);
    CHECK(a.label() == Label::signal_present);
    CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
    CHECK_THROWS_AS(make_case(spec, 6), DomainError);

    spec.n_pairs = 1;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}
