#include "mobs/percept.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mobs/error.hpp"
#include "mobs/fft.hpp"
#include "mobs/seed.hpp"

namespace mobs::percept {

std::string_view to_string(Method method) noexcept {
    switch (method) {
        case Method::lf: return "LF";
        case Method::pm: return "PM";
        case Method::mc: return "MC";
    }
    return "?";
}

Method parse_method(std::string_view text) {
    if (text == "LF" || text == "lf") return Method::lf;
    if (text == "PM" || text == "pm") return Method::pm;
    if (text == "MC" || text == "mc") return Method::mc;
    throw DomainError("unknown perception method '" + std::string(text) + "'");
}

SpectralStack::SpectralStack(Dims dims, std::vector<std::complex<double>> coeffs)
    : dims_(dims), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != dims_.size()) throw DimensionError("spectrum size mismatch");
}

double SpectralStack::mean_lum() const noexcept {
    return coeffs_.empty() ? 0.0 : coeffs_[0].real() / static_cast<double>(coeffs_.size());
}

Index3 SpectralStack::unravel(std::size_t i) const noexcept {
    const std::size_t x = i % dims_.nx;
    const std::size_t rest = i / dims_.nx;
    return {x, rest % dims_.ny, rest / dims_.ny};
}

std::size_t SpectralStack::mirror(std::size_t i) const noexcept {
    const auto [x, y, t] = unravel(i);
    return index((dims_.nx - x) % dims_.nx, (dims_.ny - y) % dims_.ny, (dims_.nt - t) % dims_.nt);
}

SpectralStack forward(const ImageStack& stack) {
    const Dims& d = stack.dims();
    if (d.nx % 2 || d.ny % 2 || d.nt % 2) {
        throw DimensionError("perception requires even dimensions");
    }
    std::vector<std::complex<double>> coeffs(stack.data().begin(), stack.data().end());
    Fft3d(d).forward(coeffs);
    return SpectralStack(d, std::move(coeffs));
}

ImageStack inverse(const SpectralStack& spec, Label label, std::uint64_t seed,
                   double* imag_residue) {
    std::vector<std::complex<double>> buf = spec.coeffs();
    Fft3d(spec.dims()).inverse(buf);
    const double inv_n = 1.0 / static_cast<double>(buf.size());
    std::vector<double> data(buf.size());
    double max_re = 0.0;
    double max_im = 0.0;
    for (std::size_t i = 0; i < buf.size(); ++i) {
        data[i] = buf[i].real() * inv_n;
        max_re = std::max(max_re, std::abs(buf[i].real()));
        max_im = std::max(max_im, std::abs(buf[i].imag()));
    }
    if (imag_residue) *imag_residue = max_re > 0.0 ? max_im / max_re : max_im;
    return ImageStack(spec.dims(), std::move(data), label, seed);
}

double modulation(const SpectralStack& spec, Index3 k) {
    const std::size_t i = spec.index(k);
    if (i == 0) throw DomainError("the DC bin has no modulation");
    if (k.x >= spec.dims().nx || k.y >= spec.dims().ny || k.t >= spec.dims().nt) {
        throw DomainError("frequency index outside the spectrum");
    }
    const double mean = spec.mean_lum();
    if (!(mean > 0.0)) throw DomainError("mean luminance must be positive");
    const double scale = spec.self_conjugate(i) ? 1.0 : 2.0;
    return scale * std::abs(spec[i]) / (static_cast<double>(spec.size()) * mean);
}

namespace {

std::vector<double> axis_frequencies(std::size_t n, double rate) {
    std::vector<double> f(n);
    for (std::size_t k = 0; k < n; ++k) {
        f[k] = static_cast<double>(std::min(k, n - k)) / static_cast<double>(n) * rate;
    }
    return f;
}

// Visits the representative of every conjugate pair except DC, in parallel
// over t-planes. rule(i, j, kx, ky, kt) may write bins i and j.
template <class Rule>
std::size_t for_each_pair(const SpectralStack& spec, Rule&& rule) {
    const Dims& d = spec.dims();
    const auto nt = static_cast<long long>(d.nt);
    std::size_t visited = 0;
#pragma omp parallel for schedule(static) reduction(+ : visited)
    for (long long t = 0; t < nt; ++t) {
        const auto kt = static_cast<std::size_t>(t);
        for (std::size_t ky = 0; ky < d.ny; ++ky) {
            for (std::size_t kx = 0; kx < d.nx; ++kx) {
                const std::size_t i = spec.index(kx, ky, kt);
                const std::size_t j = spec.index((d.nx - kx) % d.nx, (d.ny - ky) % d.ny,
                                                 (d.nt - kt) % d.nt);
                if (i == 0 || j < i) continue;
                rule(i, j, kx, ky, kt);
                ++visited;
            }
        }
    }
    return visited;
}

// Writes magnitude `mag` with the phase of `c` into bin i and its conjugate
// into j. Self-conjugate bins take the sign of Re(c).
inline void assign_pair(SpectralStack& spec, std::size_t i, std::size_t j,
                        std::complex<double> c, double mag) {
    if (i == j) {
        spec[i] = {c.real() < 0.0 ? -mag : mag, 0.0};
        return;
    }
    const double a = std::abs(c);
    const std::complex<double> out = a > 0.0 ? c * (mag / a) : std::complex<double>(mag, 0.0);
    spec[i] = out;
    spec[j] = std::conj(out);
}

double checked_norm(const SpectralStack& spec) {
    const double mean = spec.mean_lum();
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        throw DomainError("perception needs a positive mean luminance");
    }
    return static_cast<double>(spec.size()) * mean;
}

void clean_dc(SpectralStack& spec) { spec[0] = {spec[0].real(), 0.0}; }

}  // namespace

FrequencyMap FrequencyMap::make(const Dims& dims, const ViewingConditions& vc) {
    vc.validate();
    return {axis_frequencies(dims.nx, vc.ssr), axis_frequencies(dims.ny, vc.ssr),
            axis_frequencies(dims.nt, vc.browse_speed)};
}

double FrequencyMap::spatial(std::size_t kx, std::size_t ky) const noexcept {
    return std::hypot(u1[kx], u2[ky]);
}

SensitivityGrid::SensitivityGrid(const Dims& dims)
    : dims_(dims), hx_(dims.nx / 2 + 1), hy_(dims.ny / 2 + 1), ht_(dims.nt / 2 + 1),
      values_(hx_ * hy_ * ht_, 0.0) {}

SensitivityGrid SensitivityGrid::barten(const Dims& dims, const FrequencyMap& freq,
                                        const csf::CsfEvaluator& csf) {
    SensitivityGrid grid(dims);
    for (std::size_t t = 0; t < grid.ht_; ++t) {
        for (std::size_t y = 0; y < grid.hy_; ++y) {
            for (std::size_t x = 0; x < grid.hx_; ++x) {
                grid.values_[x + grid.hx_ * (y + grid.hy_ * t)] =
                    csf.evaluate(freq.spatial(x, y), freq.w[t]);
            }
        }
    }
    return grid;
}

SensitivityGrid SensitivityGrid::constant(const Dims& dims, double value) {
    SensitivityGrid grid(dims);
    std::fill(grid.values_.begin(), grid.values_.end(), value);
    return grid;
}

double SensitivityGrid::at(std::size_t kx, std::size_t ky, std::size_t kt) const noexcept {
    const std::size_t x = std::min(kx, dims_.nx - kx);
    const std::size_t y = std::min(ky, dims_.ny - ky);
    const std::size_t t = std::min(kt, dims_.nt - kt);
    return values_[x + hx_ * (y + hy_ * t)];
}

csf::FieldGeometry geometry_for(const SpectralStack& spec, const ViewingConditions& vc) {
    return {vc.field_size(spec.dims().nx), spec.mean_lum()};
}

SpectralStack apply_lf(SpectralStack spec, const SensitivityGrid& sensitivity,
                       KernelStats* stats) {
    clean_dc(spec);
    const std::size_t visited =
        for_each_pair(spec, [&](std::size_t i, std::size_t j, std::size_t kx, std::size_t ky,
                                std::size_t kt) {
            const std::complex<double> out = spec[i] * sensitivity.at(kx, ky, kt);
            if (i == j) {
                spec[i] = {out.real(), 0.0};
            } else {
                spec[i] = out;
                spec[j] = std::conj(out);
            }
        });
    if (stats) stats->bins_visited = visited;
    return spec;
}

SpectralStack apply_pm(SpectralStack spec, const SensitivityGrid& sensitivity,
                       const ProbabilityRule& probability, KernelStats* stats) {
    const double norm = checked_norm(spec);
    clean_dc(spec);
    const std::size_t visited =
        for_each_pair(spec, [&](std::size_t i, std::size_t j, std::size_t kx, std::size_t ky,
                                std::size_t kt) {
            const double scale = i == j ? 1.0 : 2.0;
            const std::complex<double> c = spec[i];
            const double m = scale * std::abs(c) / norm;
            const double p = probability(m, sensitivity.at(kx, ky, kt));
            assign_pair(spec, i, j, c, p * norm / scale);
        });
    if (stats) stats->bins_visited = visited;
    return spec;
}

SpectralStack apply_mc(SpectralStack spec, const SensitivityGrid& sensitivity,
                       const ProbabilityRule& probability, std::uint64_t seed,
                       KernelStats* stats) {
    const double norm = checked_norm(spec);
    clean_dc(spec);
    const std::size_t visited =
        for_each_pair(spec, [&](std::size_t i, std::size_t j, std::size_t kx, std::size_t ky,
                                std::size_t kt) {
            const double scale = i == j ? 1.0 : 2.0;
            const std::complex<double> c = spec[i];
            const double m = scale * std::abs(c) / norm;
            const double p = probability(m, sensitivity.at(kx, ky, kt));
            // One draw per pair, keyed by the representative's index.
            const bool keep = uniform01(seed, i) < p;
            assign_pair(spec, i, j, c, keep ? norm / scale : 0.0);
        });
    if (stats) stats->bins_visited = visited;
    return spec;
}

ProbabilityRule psychometric(double k_crozier) {
    if (!(k_crozier > 0.0)) throw DomainError("k_crozier must be positive");
    return [k_crozier](double m, double s) {
        return csf::detection_probability_unchecked(m, s, k_crozier);
    };
}

namespace {

SensitivityGrid barten_grid(const SpectralStack& spec, const ViewingConditions& vc,
                            const csf::FieldGeometry& geom, const csf::BartenParams& params) {
    const csf::CsfEvaluator evaluator(geom, params);
    return SensitivityGrid::barten(spec.dims(), FrequencyMap::make(spec.dims(), vc), evaluator);
}

}  // namespace

SpectralStack apply_lf(SpectralStack spec, const ViewingConditions& vc,
                       const csf::FieldGeometry& geom, const csf::BartenParams& params) {
    auto grid = barten_grid(spec, vc, geom, params);
    return apply_lf(std::move(spec), grid);
}

SpectralStack apply_pm(SpectralStack spec, const ViewingConditions& vc,
                       const csf::FieldGeometry& geom, const csf::BartenParams& params) {
    auto grid = barten_grid(spec, vc, geom, params);
    return apply_pm(std::move(spec), grid, psychometric(params.k_crozier));
}

SpectralStack apply_mc(SpectralStack spec, const ViewingConditions& vc,
                       const csf::FieldGeometry& geom, std::uint64_t seed,
                       const csf::BartenParams& params) {
    auto grid = barten_grid(spec, vc, geom, params);
    return apply_mc(std::move(spec), grid, psychometric(params.k_crozier), seed);
}

ImageStack perceive(const ImageStack& stack, const PerceptMethod& method,
                    const ViewingConditions& vc, const csf::BartenParams& params,
                    double* imag_residue) {
    SpectralStack spec = forward(stack);
    const csf::FieldGeometry geom = geometry_for(spec, vc);
    switch (method.kind) {
        case Method::lf: spec = apply_lf(std::move(spec), vc, geom, params); break;
        case Method::pm: spec = apply_pm(std::move(spec), vc, geom, params); break;
        case Method::mc: spec = apply_mc(std::move(spec), vc, geom, method.seed, params); break;
    }
    return inverse(spec, stack.label(), stack.seed(), imag_residue);
}

}  // namespace mobs::percept
