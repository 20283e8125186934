#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mobs/csf.hpp"
#include "mobs/percept.hpp"
#include "mobs/readers.hpp"
#include "mobs/stackgen.hpp"
#include "mobs/stats.hpp"

namespace mobs::sweep {

enum class Parameter { contrast, l_max, ssr, browse_speed };

std::string_view to_string(Parameter p) noexcept;
Parameter parse_parameter(std::string_view text);
/// Default grid for a swept parameter.
std::vector<double> default_grid(Parameter p);

/// Display size used to turn SSR into a viewing distance.
struct DisplayGeometry {
    double width_cm = 3.0;
    double width_px = 64.0;
};

/// d = W / (2·tan(n_px·π / (360·SSR))) in cm. Throws DomainError when the
/// half-angle reaches π/2.
double viewing_distance(double ssr, const DisplayGeometry& display = {});

struct ObserverSpec {
    std::size_t n_channels = 15;
    double spread = 10.0;
    std::size_t n_readers = 4;
    double train_fraction = 0.8;
    double ridge_factor = 1e-6;
};

inline constexpr int kConfigSchemaVersion = 1;

/// Frozen lesion amplitude of the default corpus.
inline constexpr double kDefaultLesionAmplitude = 0.14;

struct SweepConfig {
    std::vector<percept::Method> methods{percept::Method::lf, percept::Method::pm,
                                         percept::Method::mc};
    Parameter parameter = Parameter::contrast;
    std::vector<double> values;
    ViewingConditions base;  // 25 slice/s, 300 cd/m², C = 200, 7 px/deg
    DisplayGeometry display;
    CorpusSpec corpus;
    /// When set, cases are read from this manifest instead of generated.
    std::optional<std::filesystem::path> manifest;
    ObserverSpec observer;
    csf::BartenParams barten;

    /// Viewing conditions at one sweep value.
    ViewingConditions at(double value) const;
    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Parses the versioned JSON config. Unknown keys are rejected.
SweepConfig parse_config(const nlohmann::json& j);
SweepConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const SweepConfig& config);

struct SweepRow {
    percept::Method method;
    ViewingConditions vc;
    double viewing_distance_cm;
    stats::MrmcResult result;
    std::size_t n_cases;  // size of the common test set
    std::size_t n_readers;
    std::uint64_t master_seed;
};

std::string csv_header();
std::string csv_row(const SweepRow& row);

enum class Trend { increasing, decreasing, constant, peaked };
std::string_view to_string(Trend t) noexcept;

/// Monotone when no successive difference is significantly against the
/// direction and the endpoints differ significantly; peaked when an interior
/// point exceeds both endpoints significantly. "Significantly" means beyond
/// the root-sum-square of the two error bars. Needs >= 3 points.
Trend classify_trend(const std::vector<double>& values, const std::vector<double>& error_bars);

struct MethodTrend {
    percept::Method method;
    std::vector<double> d_prime;
    std::vector<double> d_prime_error_bar;
    std::vector<double> normalized;  // d′/d′_max, clamped to [0, 1]
    std::optional<Trend> trend;      // nullopt when inconclusive
    std::string note;
};

struct TrendReport {
    Parameter parameter;
    std::vector<double> values;
    std::vector<MethodTrend> methods;
};

TrendReport make_report(const SweepConfig& config, const std::vector<SweepRow>& rows);
void print_report(const TrendReport& report, std::ostream& out);
nlohmann::json to_json(const TrendReport& report);

/// Called once per finished (method, value) point, in output order.
using RowSink = std::function<void(const SweepRow&)>;
/// Receives the trained readers of every point (model audits).
using ReaderSink = std::function<void(const SweepRow&, const std::vector<stats::Reader>&)>;

/// Runs every (method, value) point: renormalize the corpus for the point's
/// viewing conditions, perceive, train the virtual readers, score, and
/// compute the MRMC figures. Rows come out method-major, then in sweep
/// order. Deterministic given the config.
std::vector<SweepRow> run_sweep(const SweepConfig& config, const RowSink& sink = {},
                                const ReaderSink& reader_sink = {});

}  // namespace mobs::sweep
