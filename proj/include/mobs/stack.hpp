#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mobs {

enum class Label : std::uint32_t { signal_absent = 0, signal_present = 1 };

std::string_view to_string(Label label) noexcept;
Label parse_label(std::string_view text);

struct Dims {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::size_t nt = 0;

    std::size_t size() const noexcept { return nx * ny * nt; }
    std::size_t slice_size() const noexcept { return nx * ny; }
    friend bool operator==(const Dims&, const Dims&) = default;
};

/// X×Y×T scalar volume, x fastest, then y, then t. Values are luminances in
/// cd/m² once normalized for display; generator output is in [0, 1].
class ImageStack {
public:
    ImageStack() = default;
    /// Throws DimensionError for zero or non-square dimensions.
    ImageStack(Dims dims, Label label = Label::signal_absent, std::uint64_t seed = 0);
    ImageStack(Dims dims, std::vector<double> data, Label label = Label::signal_absent,
               std::uint64_t seed = 0);

    const Dims& dims() const noexcept { return dims_; }
    std::size_t nx() const noexcept { return dims_.nx; }
    std::size_t ny() const noexcept { return dims_.ny; }
    std::size_t nt() const noexcept { return dims_.nt; }
    std::size_t size() const noexcept { return data_.size(); }

    Label label() const noexcept { return label_; }
    void set_label(Label label) noexcept { label_ = label; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::size_t index(std::size_t x, std::size_t y, std::size_t t) const noexcept {
        return x + dims_.nx * (y + dims_.ny * t);
    }
    double& at(std::size_t x, std::size_t y, std::size_t t) noexcept { return data_[index(x, y, t)]; }
    double at(std::size_t x, std::size_t y, std::size_t t) const noexcept {
        return data_[index(x, y, t)];
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<const double> slice(std::size_t t) const noexcept {
        return std::span<const double>(data_).subspan(t * dims_.slice_size(), dims_.slice_size());
    }

    double mean() const noexcept;

private:
    Dims dims_;
    std::vector<double> data_;
    Label label_ = Label::signal_absent;
    std::uint64_t seed_ = 0;
};

/// Display and viewing parameters.
struct ViewingConditions {
    double l_max = 300.0;        // cd/m²
    double contrast = 200.0;     // effective contrast L_max / L_min
    double ssr = 7.0;            // pixels/degree
    double browse_speed = 25.0;  // slices/second

    double l_min() const noexcept { return l_max / contrast; }
    /// Apparent size in degrees of an `n_pixels`-wide slice.
    double field_size(std::size_t n_pixels) const noexcept {
        return static_cast<double>(n_pixels) / ssr;
    }
    void validate() const;
};

}  // namespace mobs
