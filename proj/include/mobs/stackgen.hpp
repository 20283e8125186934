#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "mobs/stack.hpp"

namespace mobs {

/// Separable 3D Gaussian lesion. `center` is a voxel coordinate (x, y, t).
struct LesionSpec {
    double amplitude = 0.1;
    double sigma_xy = 6.0;  // pixels
    double sigma_t = 3.0;   // slices
    std::array<std::size_t, 3> center{};

    /// Centered lesion for a volume of the given size.
    static LesionSpec centered(const Dims& dims, double amplitude, double sigma_xy = 6.0,
                               double sigma_t = 3.0);
};

/// Power-law ("1/f^beta") filtered Gaussian noise, remapped to [0, 1].
/// Deterministic given `seed`. Dimensions must be >= 8 and even.
ImageStack generate_background(std::size_t nx, std::size_t ny, std::size_t nt, double beta,
                               std::uint64_t seed);

/// Adds the Gaussian bump and flips the label to signal-present.
ImageStack insert_lesion(ImageStack stack, const LesionSpec& lesion);

/// Linear map of [min, max] onto [l_max/contrast, l_max]. Throws
/// DegenerateInputError for a constant stack.
ImageStack normalize_to_display(ImageStack stack, const ViewingConditions& vc);

/// Recipe for a reproducible synthetic case set: `n_pairs` signal-absent and
/// `n_pairs` signal-present stacks, each with its own background.
struct CorpusSpec {
    std::size_t n_pairs = 200;
    Dims dims{64, 64, 32};
    double beta = 3.0;
    double lesion_amplitude = 0.14;
    double lesion_sigma_xy = 6.0;
    double lesion_sigma_t = 3.0;
    std::uint64_t master_seed = 20140215;

    std::size_t n_cases() const noexcept { return 2 * n_pairs; }
    /// Cases [0, n_pairs) are signal-absent, [n_pairs, 2·n_pairs) present.
    Label label_of(std::size_t case_index) const noexcept {
        return case_index < n_pairs ? Label::signal_absent : Label::signal_present;
    }
    /// Background seed of a case: derive_seed(master, stream(label), pair index).
    std::uint64_t seed_of(std::size_t case_index) const noexcept;
    void validate() const;
};

/// Builds one (un-normalized) case of the corpus.
ImageStack make_case(const CorpusSpec& spec, std::size_t case_index);

}  // namespace mobs
