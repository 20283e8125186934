#include "mobs/percept_reference.hpp"

#include <cmath>

#include "mobs/error.hpp"
#include "mobs/seed.hpp"

namespace mobs::percept::reference {

SpectralStack apply(SpectralStack spec, const PerceptMethod& method, const ViewingConditions& vc,
                    const csf::BartenParams& params) {
    const Dims d = spec.dims();
    const double n = static_cast<double>(spec.size());
    const double mean = spec.mean_lum();
    if (!(mean > 0.0)) throw DomainError("perception needs a positive mean luminance");
    const csf::CsfEvaluator csf(csf::FieldGeometry{vc.field_size(d.nx), mean}, params);

    spec[0] = {spec[0].real(), 0.0};
    for (std::size_t i = 1; i < spec.size(); ++i) {
        const std::size_t j = spec.mirror(i);
        if (j < i) continue;
        const Index3 k = spec.unravel(i);
        auto fold = [](std::size_t idx, std::size_t len) {
            return static_cast<double>(std::min(idx, len - idx)) / static_cast<double>(len);
        };
        const double u = std::sqrt(std::pow(fold(k.x, d.nx) * vc.ssr, 2) +
                                   std::pow(fold(k.y, d.ny) * vc.ssr, 2));
        const double w = fold(k.t, d.nt) * vc.browse_speed;
        const double s = csf(u, w);

        const std::complex<double> c = spec[i];
        std::complex<double> out;
        if (method.kind == Method::lf) {
            out = c * s;
        } else {
            const double scale = (i == j) ? 1.0 : 2.0;
            const double m = scale * std::abs(c) / (n * mean);
            const double p = csf::detection_probability(m, s, params.k_crozier);
            double mag;
            if (method.kind == Method::pm) {
                mag = p * n * mean / scale;
            } else {
                mag = uniform01(method.seed, i) < p ? n * mean / scale : 0.0;
            }
            if (i == j) {
                out = {c.real() < 0.0 ? -mag : mag, 0.0};
            } else {
                out = std::abs(c) > 0.0 ? std::polar(mag, std::arg(c))
                                        : std::complex<double>(mag, 0.0);
            }
        }
        if (i == j) {
            spec[i] = {out.real(), 0.0};
        } else {
            spec[i] = out;
            spec[j] = std::conj(out);
        }
    }
    return spec;
}

ImageStack perceive(const ImageStack& stack, const PerceptMethod& method,
                    const ViewingConditions& vc, const csf::BartenParams& params) {
    SpectralStack spec = apply(forward(stack), method, vc, params);
    return inverse(spec, stack.label(), stack.seed());
}

}  // namespace mobs::percept::reference
