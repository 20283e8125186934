#pragma once

/// Spatiotemporal perception of a displayed stack: forward 3D DFT, per-bin
/// application of one of three rules (linear filtering, probability map,
/// Monte Carlo keep/discard), inverse DFT.
///
/// Every rule works on conjugate pairs: the representative bin of a pair is
/// the one with the smaller linear index, its mirror receives the exact
/// conjugate, and self-conjugate bins (every index 0 or N/2) stay real. The
/// DC bin always passes through unchanged.
///
/// Amplitudes follow the modulation convention: a non-self-conjugate bin of
/// magnitude |c| carries modulation m = 2|c|/(N·L̄), a self-conjugate bin
/// m = |c|/(N·L̄). The probability-map and Monte Carlo rules write their
/// outputs (p, or 1 for kept bins) back in that same convention, phase
/// preserved.

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "mobs/csf.hpp"
#include "mobs/stack.hpp"

namespace mobs::percept {

enum class Method { lf, pm, mc };

struct PerceptMethod {
    Method kind = Method::lf;
    std::uint64_t seed = 0;  // only used by Method::mc

    static PerceptMethod lf() { return {Method::lf, 0}; }
    static PerceptMethod pm() { return {Method::pm, 0}; }
    static PerceptMethod mc(std::uint64_t seed) { return {Method::mc, seed}; }
};

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view text);

struct Index3 {
    std::size_t x, y, t;
};

class SpectralStack {
public:
    SpectralStack(Dims dims, std::vector<std::complex<double>> coeffs);

    const Dims& dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return coeffs_.size(); }
    /// Mean luminance, Re(DC)/N.
    double mean_lum() const noexcept;

    std::size_t index(std::size_t x, std::size_t y, std::size_t t) const noexcept {
        return x + dims_.nx * (y + dims_.ny * t);
    }
    std::size_t index(Index3 k) const noexcept { return index(k.x, k.y, k.t); }
    Index3 unravel(std::size_t i) const noexcept;
    /// Linear index of −k mod N.
    std::size_t mirror(std::size_t i) const noexcept;
    bool self_conjugate(std::size_t i) const noexcept { return mirror(i) == i; }

    std::complex<double>& operator[](std::size_t i) noexcept { return coeffs_[i]; }
    const std::complex<double>& operator[](std::size_t i) const noexcept { return coeffs_[i]; }
    std::vector<std::complex<double>>& coeffs() noexcept { return coeffs_; }
    const std::vector<std::complex<double>>& coeffs() const noexcept { return coeffs_; }

private:
    Dims dims_;
    std::vector<std::complex<double>> coeffs_;
};

/// Forward transform. Dimensions must be even.
SpectralStack forward(const ImageStack& stack);

/// Inverse transform; `imag_residue`, when given, receives
/// max|Im| / max|Re| of the unnormalized result before the imaginary part is
/// dropped.
ImageStack inverse(const SpectralStack& spec, Label label = Label::signal_absent,
                   std::uint64_t seed = 0, double* imag_residue = nullptr);

/// Modulation of a non-DC bin; throws DomainError for the DC index.
double modulation(const SpectralStack& spec, Index3 k);

/// Physical frequency of every DFT index: u_i(k) = min(k, N−k)/N · SSR in
/// cycles/deg, w(k) = min(k, N−k)/N · browse speed in cycles/s.
struct FrequencyMap {
    std::vector<double> u1;  // along x
    std::vector<double> u2;  // along y
    std::vector<double> w;   // along t

    static FrequencyMap make(const Dims& dims, const ViewingConditions& vc);
    double spatial(std::size_t kx, std::size_t ky) const noexcept;
};

/// Contrast sensitivity sampled on the folded index grid
/// (0..nx/2) × (0..ny/2) × (0..nt/2).
class SensitivityGrid {
public:
    static SensitivityGrid barten(const Dims& dims, const FrequencyMap& freq,
                                  const csf::CsfEvaluator& csf);
    static SensitivityGrid constant(const Dims& dims, double value);

    double at(std::size_t kx, std::size_t ky, std::size_t kt) const noexcept;

private:
    SensitivityGrid(const Dims& dims);
    Dims dims_;
    std::size_t hx_, hy_, ht_;
    std::vector<double> values_;
};

/// Display geometry seen by the CSF: X0 = nx/SSR, L = mean luminance.
csf::FieldGeometry geometry_for(const SpectralStack& spec, const ViewingConditions& vc);

struct KernelStats {
    std::size_t bins_visited = 0;
};

/// Maps (modulation, sensitivity) to a detection probability.
using ProbabilityRule = std::function<double(double modulation, double sensitivity)>;

SpectralStack apply_lf(SpectralStack spec, const SensitivityGrid& sensitivity,
                       KernelStats* stats = nullptr);
SpectralStack apply_pm(SpectralStack spec, const SensitivityGrid& sensitivity,
                       const ProbabilityRule& probability, KernelStats* stats = nullptr);
SpectralStack apply_mc(SpectralStack spec, const SensitivityGrid& sensitivity,
                       const ProbabilityRule& probability, std::uint64_t seed,
                       KernelStats* stats = nullptr);

/// Psychometric rule with the given Crozier coefficient.
ProbabilityRule psychometric(double k_crozier);

// Barten-driven convenience forms.
SpectralStack apply_lf(SpectralStack spec, const ViewingConditions& vc,
                       const csf::FieldGeometry& geom, const csf::BartenParams& params = {});
SpectralStack apply_pm(SpectralStack spec, const ViewingConditions& vc,
                       const csf::FieldGeometry& geom, const csf::BartenParams& params = {});
SpectralStack apply_mc(SpectralStack spec, const ViewingConditions& vc,
                       const csf::FieldGeometry& geom, std::uint64_t seed,
                       const csf::BartenParams& params = {});

/// forward → method → inverse. Output keeps the input's label and seed.
ImageStack perceive(const ImageStack& stack, const PerceptMethod& method,
                    const ViewingConditions& vc, const csf::BartenParams& params = {},
                    double* imag_residue = nullptr);

}  // namespace mobs::percept
