#pragma once

/// Multi-slice channelized Hotelling observer, type 'b': Laguerre-Gauss
/// channels on every slice, a Hotelling template fitted on the central
/// slice and applied to all slices, and a second Hotelling stage over the
/// resulting per-slice scalars.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mobs/stack.hpp"

namespace mobs::observer {

/// Laguerre-Gauss channels exp(−πr²/a²)·L_j(2πr²/a²), centred on
/// ((nx−1)/2, (ny−1)/2), each scaled to unit energy on the pixel grid.
class LgChannelSet {
public:
    LgChannelSet(std::size_t nx, std::size_t ny, std::size_t n_channels = 15,
                 double spread = 10.0);

    std::size_t n_channels() const noexcept { return n_channels_; }
    double spread() const noexcept { return spread_; }
    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    /// n_channels × (nx·ny); row j is channel j, x fastest.
    const Eigen::MatrixXd& matrix() const noexcept { return channels_; }

private:
    std::size_t nx_, ny_, n_channels_;
    double spread_;
    Eigen::MatrixXd channels_;
};

/// Channel responses v_j = ⟨slice, c_j⟩.
Eigen::VectorXd channelize(std::span<const double> slice, const LgChannelSet& channels);

/// Per-slice channel responses: nt × n_channels, row t is slice t.
using StackFeatures = Eigen::MatrixXd;
StackFeatures channelize_stack(const ImageStack& stack, const LgChannelSet& channels);

/// Rows are cases. Weights w = (Σ̄ + ridge·I)⁻¹(μ₊ − μ₋) with Σ̄ the average of
/// the two unbiased class covariances and ridge = ridge_factor·trace(Σ̄)/dim.
struct HotellingFit {
    Eigen::VectorXd weights;
    Eigen::VectorXd mean_absent;
    Eigen::VectorXd mean_present;
    Eigen::MatrixXd covariance;  // Σ̄ before regularization
    double ridge = 0.0;
};

inline constexpr double kDefaultRidgeFactor = 1e-6;

HotellingFit fit_hotelling(const Eigen::MatrixXd& absent, const Eigen::MatrixXd& present,
                           double ridge_factor = kDefaultRidgeFactor);

struct LabeledFeatures {
    const StackFeatures* features;
    Label label;
};

struct ChoModel {
    std::size_t n_channels = 0;
    double spread = 0.0;
    std::size_t nx = 0;
    std::size_t nt = 0;
    std::size_t central_slice = 0;
    std::uint64_t split_seed = 0;
    HotellingFit channel_stage;  // template on central-slice channel vectors
    HotellingFit slice_stage;    // weights over per-slice template outputs

    const Eigen::VectorXd& template_central() const noexcept { return channel_stage.weights; }
    const Eigen::VectorXd& slice_weights() const noexcept { return slice_stage.weights; }
};

/// Needs at least two cases per class; throws DegenerateInputError otherwise
/// and NumericalError if a regularized covariance is still not positive
/// definite.
ChoModel train(std::span<const LabeledFeatures> cases, const LgChannelSet& channels,
               double ridge_factor = kDefaultRidgeFactor);
ChoModel train(std::span<const ImageStack> stacks, const LgChannelSet& channels,
               double ridge_factor = kDefaultRidgeFactor);

double score(const ChoModel& model, const StackFeatures& features);
double score(const ChoModel& model, const ImageStack& stack, const LgChannelSet& channels);

nlohmann::json to_json(const ChoModel& model);
ChoModel model_from_json(const nlohmann::json& j);
void save_model(const ChoModel& model, const std::filesystem::path& path);
ChoModel load_model(const std::filesystem::path& path);

}  // namespace mobs::observer
