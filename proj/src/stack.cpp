#include "mobs/stack.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "mobs/error.hpp"

namespace mobs {

std::string_view to_string(Label label) noexcept {
    return label == Label::signal_present ? "present" : "absent";
}

Label parse_label(std::string_view text) {
    if (text == "present") return Label::signal_present;
    if (text == "absent") return Label::signal_absent;
    throw DomainError("unknown label '" + std::string(text) + "'");
}

namespace {

void check_dims(const Dims& dims) {
    if (dims.nx == 0 || dims.ny == 0 || dims.nt == 0) {
        throw DimensionError("stack dimensions must be non-zero");
    }
    if (dims.nx != dims.ny) {
        throw DimensionError("stack slices must be square, got " + std::to_string(dims.nx) +
                             "x" + std::to_string(dims.ny));
    }
}

}  // namespace

ImageStack::ImageStack(Dims dims, Label label, std::uint64_t seed)
    : dims_(dims), label_(label), seed_(seed) {
    check_dims(dims_);
    data_.assign(dims_.size(), 0.0);
}

ImageStack::ImageStack(Dims dims, std::vector<double> data, Label label, std::uint64_t seed)
    : dims_(dims), data_(std::move(data)), label_(label), seed_(seed) {
    check_dims(dims_);
    if (data_.size() != dims_.size()) {
        throw DimensionError("payload has " + std::to_string(data_.size()) +
                             " values, dimensions require " + std::to_string(dims_.size()));
    }
}

double ImageStack::mean() const noexcept {
    if (data_.empty()) return 0.0;
    return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

void ViewingConditions::validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(l_max)) throw ConfigError("l_max", "must be positive");
    if (!(contrast > 1.0) || !std::isfinite(contrast)) throw ConfigError("contrast", "must exceed 1");
    if (!positive(ssr)) throw ConfigError("ssr", "must be positive");
    if (!positive(browse_speed)) throw ConfigError("browse_speed", "must be positive");
}

}  // namespace mobs
