#include "mobs/observer.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

#include "mobs/error.hpp"

namespace mobs::observer {

namespace {

double laguerre(std::size_t n, double x) {
    double prev = 1.0;
    if (n == 0) return prev;
    double cur = 1.0 - x;
    for (std::size_t k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

Eigen::VectorXd column_mean(const Eigen::MatrixXd& rows) { return rows.colwise().mean(); }

Eigen::MatrixXd unbiased_covariance(const Eigen::MatrixXd& rows, const Eigen::VectorXd& mean) {
    const Eigen::MatrixXd centered = rows.rowwise() - mean.transpose();
    return centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
}

}  // namespace

LgChannelSet::LgChannelSet(std::size_t nx, std::size_t ny, std::size_t n_channels, double spread)
    : nx_(nx), ny_(ny), n_channels_(n_channels), spread_(spread) {
    if (nx == 0 || ny == 0 || n_channels == 0) throw DimensionError("empty channel grid");
    if (!(spread > 0.0)) throw DomainError("channel spread must be positive");

    channels_.resize(static_cast<Eigen::Index>(n_channels), static_cast<Eigen::Index>(nx * ny));
    const double cx = (static_cast<double>(nx) - 1.0) / 2.0;
    const double cy = (static_cast<double>(ny) - 1.0) / 2.0;
    const double a2 = spread * spread;
    for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t x = 0; x < nx; ++x) {
            const double dx = static_cast<double>(x) - cx;
            const double dy = static_cast<double>(y) - cy;
            const double r2 = dx * dx + dy * dy;
            const double envelope = std::exp(-std::numbers::pi * r2 / a2);
            const double arg = 2.0 * std::numbers::pi * r2 / a2;
            for (std::size_t j = 0; j < n_channels; ++j) {
                channels_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(x + nx * y)) =
                    envelope * laguerre(j, arg);
            }
        }
    }
    for (Eigen::Index j = 0; j < channels_.rows(); ++j) channels_.row(j).normalize();
}

Eigen::VectorXd channelize(std::span<const double> slice, const LgChannelSet& channels) {
    if (slice.size() != channels.nx() * channels.ny()) {
        throw DimensionError("slice size does not match the channel grid");
    }
    const Eigen::Map<const Eigen::VectorXd> v(slice.data(), static_cast<Eigen::Index>(slice.size()));
    return channels.matrix() * v;
}

StackFeatures channelize_stack(const ImageStack& stack, const LgChannelSet& channels) {
    if (stack.nx() != channels.nx() || stack.ny() != channels.ny()) {
        throw DimensionError("stack slices do not match the channel grid");
    }
    // Column-major map: column t is slice t.
    const Eigen::Map<const Eigen::MatrixXd> slices(stack.data().data(),
                                                   static_cast<Eigen::Index>(stack.nx() * stack.ny()),
                                                   static_cast<Eigen::Index>(stack.nt()));
    return (channels.matrix() * slices).transpose();
}

HotellingFit fit_hotelling(const Eigen::MatrixXd& absent, const Eigen::MatrixXd& present,
                           double ridge_factor) {
    if (absent.rows() < 2 || present.rows() < 2) {
        throw DegenerateInputError("Hotelling fit needs at least two cases per class");
    }
    if (absent.cols() != present.cols()) throw DimensionError("class feature sizes differ");
    if (!(ridge_factor > 0.0)) throw DomainError("ridge factor must be positive");

    HotellingFit fit;
    fit.mean_absent = column_mean(absent);
    fit.mean_present = column_mean(present);
    fit.covariance = 0.5 * (unbiased_covariance(absent, fit.mean_absent) +
                            unbiased_covariance(present, fit.mean_present));
    const auto dim = static_cast<double>(fit.covariance.rows());
    fit.ridge = ridge_factor * fit.covariance.trace() / dim;

    Eigen::MatrixXd regularized = fit.covariance;
    regularized.diagonal().array() += fit.ridge;
    const Eigen::LLT<Eigen::MatrixXd> llt(regularized);
    if (!(fit.ridge > 0.0) || llt.info() != Eigen::Success) {
        throw NumericalError("class covariance is singular even after regularization");
    }
    fit.weights = llt.solve(fit.mean_present - fit.mean_absent);
    return fit;
}

ChoModel train(std::span<const LabeledFeatures> cases, const LgChannelSet& channels,
               double ridge_factor) {
    if (cases.empty()) throw DegenerateInputError("no training cases");
    const auto nt = static_cast<std::size_t>(cases.front().features->rows());
    const auto nc = static_cast<Eigen::Index>(channels.n_channels());
    std::size_t n_present = 0;
    for (const auto& c : cases) {
        if (static_cast<std::size_t>(c.features->rows()) != nt || c.features->cols() != nc) {
            throw DimensionError("training feature matrices differ in shape");
        }
        n_present += c.label == Label::signal_present;
    }
    const std::size_t n_absent = cases.size() - n_present;
    if (n_present < 2 || n_absent < 2) {
        throw DegenerateInputError("training needs at least two cases of each class");
    }

    ChoModel model;
    model.n_channels = channels.n_channels();
    model.spread = channels.spread();
    model.nx = channels.nx();
    model.nt = nt;
    model.central_slice = nt / 2;

    const auto central = static_cast<Eigen::Index>(model.central_slice);
    Eigen::MatrixXd absent(static_cast<Eigen::Index>(n_absent), nc);
    Eigen::MatrixXd present(static_cast<Eigen::Index>(n_present), nc);
    Eigen::Index ia = 0, ip = 0;
    for (const auto& c : cases) {
        auto& dst = c.label == Label::signal_present ? present : absent;
        auto& row = c.label == Label::signal_present ? ip : ia;
        dst.row(row++) = c.features->row(central);
    }
    model.channel_stage = fit_hotelling(absent, present, ridge_factor);

    const auto slices = static_cast<Eigen::Index>(nt);
    Eigen::MatrixXd absent_slices(static_cast<Eigen::Index>(n_absent), slices);
    Eigen::MatrixXd present_slices(static_cast<Eigen::Index>(n_present), slices);
    ia = ip = 0;
    for (const auto& c : cases) {
        auto& dst = c.label == Label::signal_present ? present_slices : absent_slices;
        auto& row = c.label == Label::signal_present ? ip : ia;
        dst.row(row++) = (*c.features * model.channel_stage.weights).transpose();
    }
    model.slice_stage = fit_hotelling(absent_slices, present_slices, ridge_factor);
    return model;
}

ChoModel train(std::span<const ImageStack> stacks, const LgChannelSet& channels,
               double ridge_factor) {
    std::vector<StackFeatures> features;
    features.reserve(stacks.size());
    for (const auto& s : stacks) features.push_back(channelize_stack(s, channels));
    std::vector<LabeledFeatures> cases;
    for (std::size_t i = 0; i < stacks.size(); ++i) cases.push_back({&features[i], stacks[i].label()});
    return train(cases, channels, ridge_factor);
}

double score(const ChoModel& model, const StackFeatures& features) {
    if (static_cast<std::size_t>(features.rows()) != model.nt ||
        static_cast<std::size_t>(features.cols()) != model.n_channels) {
        throw DimensionError("feature matrix does not match the trained model");
    }
    return (features * model.channel_stage.weights).dot(model.slice_stage.weights);
}

double score(const ChoModel& model, const ImageStack& stack, const LgChannelSet& channels) {
    if (stack.nx() != model.nx || stack.nt() != model.nt) {
        throw DimensionError("stack does not match the trained model");
    }
    return score(model, channelize_stack(stack, channels));
}

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json fit_to_json(const HotellingFit& fit) {
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) {
        cov.push_back(vec_to_json(fit.covariance.row(r).transpose()));
    }
    return {{"weights", vec_to_json(fit.weights)},
            {"mean_absent", vec_to_json(fit.mean_absent)},
            {"mean_present", vec_to_json(fit.mean_present)},
            {"covariance", cov},
            {"ridge", fit.ridge}};
}

HotellingFit fit_from_json(const nlohmann::json& j) {
    HotellingFit fit;
    fit.weights = vec_from_json(j.at("weights"));
    fit.mean_absent = vec_from_json(j.at("mean_absent"));
    fit.mean_present = vec_from_json(j.at("mean_present"));
    const auto& cov = j.at("covariance");
    const auto n = static_cast<Eigen::Index>(cov.size());
    fit.covariance.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) fit.covariance.row(r) = vec_from_json(cov.at(r)).transpose();
    fit.ridge = j.at("ridge").get<double>();
    return fit;
}

}  // namespace

nlohmann::json to_json(const ChoModel& model) {
    return {{"format", "mobs-cho-b"},
            {"version", 1},
            {"channels", {{"n_channels", model.n_channels}, {"spread", model.spread}}},
            {"nx", model.nx},
            {"nt", model.nt},
            {"central_slice", model.central_slice},
            {"split_seed", model.split_seed},
            {"channel_stage", fit_to_json(model.channel_stage)},
            {"slice_stage", fit_to_json(model.slice_stage)}};
}

ChoModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "mobs-cho-b") {
            throw FormatError("model", "not a channelized Hotelling model");
        }
        ChoModel model;
        model.n_channels = j.at("channels").at("n_channels").get<std::size_t>();
        model.spread = j.at("channels").at("spread").get<double>();
        model.nx = j.at("nx").get<std::size_t>();
        model.nt = j.at("nt").get<std::size_t>();
        model.central_slice = j.at("central_slice").get<std::size_t>();
        model.split_seed = j.at("split_seed").get<std::uint64_t>();
        model.channel_stage = fit_from_json(j.at("channel_stage"));
        model.slice_stage = fit_from_json(j.at("slice_stage"));
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("model", e.what());
    }
}

void save_model(const ChoModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("io", "cannot open " + path.string() + " for writing");
    out << to_json(model).dump(2) << '\n';
}

ChoModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("io", "cannot open " + path.string());
    try {
        return model_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("model", e.what());
    }
}

}  // namespace mobs::observer
