#include "mobs/stackgen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include "mobs/error.hpp"
#include "mobs/fft.hpp"
#include "mobs/seed.hpp"

namespace mobs {

namespace {

double folded_frequency(std::size_t k, std::size_t n) {
    return static_cast<double>(std::min(k, n - k)) / static_cast<double>(n);
}

}  // namespace

LesionSpec LesionSpec::centered(const Dims& dims, double amplitude, double sigma_xy,
                                double sigma_t) {
    return LesionSpec{amplitude, sigma_xy, sigma_t, {dims.nx / 2, dims.ny / 2, dims.nt / 2}};
}

ImageStack generate_background(std::size_t nx, std::size_t ny, std::size_t nt, double beta,
                               std::uint64_t seed) {
    if (nx < 8 || ny < 8 || nt < 8) throw DimensionError("background dimensions must be >= 8");
    if (nx % 2 || ny % 2 || nt % 2) throw DimensionError("background dimensions must be even");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be >= 0");

    const Dims dims{nx, ny, nt};
    ImageStack stack(dims, Label::signal_absent, seed);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::complex<double>> field(dims.size());
    for (auto& v : field) v = normal(rng);

    const Fft3d fft(dims);
    fft.forward(field);
    const double half_beta = 0.5 * beta;
    for (std::size_t t = 0; t < nt; ++t) {
        const double ft = folded_frequency(t, nt);
        for (std::size_t y = 0; y < ny; ++y) {
            const double fy = folded_frequency(y, ny);
            for (std::size_t x = 0; x < nx; ++x) {
                const double fx = folded_frequency(x, nx);
                const double f2 = fx * fx + fy * fy + ft * ft;
                const std::size_t i = stack.index(x, y, t);
                field[i] *= f2 > 0.0 ? std::pow(f2, -0.5 * half_beta) : 0.0;
            }
        }
    }
    fft.inverse(field);

    auto out = stack.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = field[i].real();
    const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
    const double min = *lo;
    const double range = *hi - min;
    for (auto& v : out) v = (v - min) / range;
    return stack;
}

ImageStack insert_lesion(ImageStack stack, const LesionSpec& lesion) {
    const auto& [cx, cy, ct] = lesion.center;
    if (cx >= stack.nx() || cy >= stack.ny() || ct >= stack.nt()) {
        throw DomainError("lesion center outside the volume");
    }
    if (!(lesion.amplitude >= 0.0) || !(lesion.sigma_xy > 0.0) || !(lesion.sigma_t > 0.0)) {
        throw DomainError("lesion amplitude must be >= 0 and sigmas > 0");
    }
    stack.set_label(Label::signal_present);
    if (lesion.amplitude == 0.0) return stack;

    auto profile = [](std::size_t n, std::size_t c, double sigma) {
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = static_cast<double>(i) - static_cast<double>(c);
            g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        }
        return g;
    };
    const auto gx = profile(stack.nx(), cx, lesion.sigma_xy);
    const auto gy = profile(stack.ny(), cy, lesion.sigma_xy);
    const auto gt = profile(stack.nt(), ct, lesion.sigma_t);
    for (std::size_t t = 0; t < stack.nt(); ++t) {
        for (std::size_t y = 0; y < stack.ny(); ++y) {
            const double gyt = lesion.amplitude * gy[y] * gt[t];
            for (std::size_t x = 0; x < stack.nx(); ++x) stack.at(x, y, t) += gyt * gx[x];
        }
    }
    return stack;
}

ImageStack normalize_to_display(ImageStack stack, const ViewingConditions& vc) {
    vc.validate();
    auto data = stack.data();
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    const double min = *lo;
    const double max = *hi;
    if (!(max > min)) throw DegenerateInputError("cannot normalize a constant stack");

    const double l_min = vc.l_min();
    const double scale = (vc.l_max - l_min) / (max - min);
    for (auto& v : data) {
        if (v == max) {
            v = vc.l_max;
        } else {
            v = l_min + (v - min) * scale;
        }
    }
    return stack;
}

std::uint64_t CorpusSpec::seed_of(std::size_t case_index) const noexcept {
    const bool present = label_of(case_index) == Label::signal_present;
    const std::size_t pair = present ? case_index - n_pairs : case_index;
    return derive_seed(master_seed,
                       present ? SeedStream::background_present : SeedStream::background_absent,
                       pair);
}

void CorpusSpec::validate() const {
    if (n_pairs < 2) throw ConfigError("corpus.n_pairs", "need at least 2 pairs");
    if (dims.nx != dims.ny) throw ConfigError("corpus.nx", "slices must be square");
    if (dims.nx < 8 || dims.nt < 8 || dims.nx % 2 || dims.nt % 2) {
        throw ConfigError("corpus.nx", "dimensions must be even and >= 8");
    }
    if (!(beta >= 0.0)) throw ConfigError("corpus.beta", "must be >= 0");
    if (!(lesion_amplitude >= 0.0)) throw ConfigError("corpus.lesion.amplitude", "must be >= 0");
    if (!(lesion_sigma_xy > 0.0)) throw ConfigError("corpus.lesion.sigma_xy", "must be > 0");
    if (!(lesion_sigma_t > 0.0)) throw ConfigError("corpus.lesion.sigma_t", "must be > 0");
}

ImageStack make_case(const CorpusSpec& spec, std::size_t case_index) {
    if (case_index >= spec.n_cases()) throw DomainError("case index out of range");
    auto stack = generate_background(spec.dims.nx, spec.dims.ny, spec.dims.nt, spec.beta,
                                     spec.seed_of(case_index));
    if (spec.label_of(case_index) == Label::signal_present) {
        stack = insert_lesion(std::move(stack),
                              LesionSpec::centered(spec.dims, spec.lesion_amplitude,
                                                   spec.lesion_sigma_xy, spec.lesion_sigma_t));
    }
    return stack;
}

}  // namespace mobs
