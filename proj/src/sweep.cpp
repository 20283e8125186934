#include "mobs/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "mobs/error.hpp"
#include "mobs/observer.hpp"
#include "mobs/readers.hpp"
#include "mobs/stack_io.hpp"

namespace mobs::sweep {

using nlohmann::json;

std::string_view to_string(Parameter p) noexcept {
    switch (p) {
        case Parameter::contrast: return "contrast";
        case Parameter::l_max: return "l_max";
        case Parameter::ssr: return "ssr";
        case Parameter::browse_speed: return "browse_speed";
    }
    return "?";
}

Parameter parse_parameter(std::string_view text) {
    if (text == "contrast") return Parameter::contrast;
    if (text == "l_max") return Parameter::l_max;
    if (text == "ssr") return Parameter::ssr;
    if (text == "browse_speed") return Parameter::browse_speed;
    throw ConfigError("sweep.parameter", "unknown parameter '" + std::string(text) + "'");
}

std::vector<double> default_grid(Parameter p) {
    switch (p) {
        case Parameter::contrast: return {50, 100, 200, 400, 800};
        case Parameter::l_max: return {100, 200, 300, 500, 800};
        case Parameter::ssr: return {3, 5, 7, 10, 14};
        case Parameter::browse_speed: return {5, 10, 25, 50, 100};
    }
    return {};
}

double viewing_distance(double ssr, const DisplayGeometry& display) {
    if (!(ssr > 0.0)) throw DomainError("ssr must be positive");
    const double half_angle = display.width_px * std::numbers::pi / (360.0 * ssr);
    if (half_angle >= std::numbers::pi / 2.0) {
        throw DomainError("ssr too small: the slice would subtend 180 degrees or more");
    }
    return display.width_cm / (2.0 * std::tan(half_angle));
}

ViewingConditions SweepConfig::at(double value) const {
    ViewingConditions vc = base;
    switch (parameter) {
        case Parameter::contrast: vc.contrast = value; break;
        case Parameter::l_max: vc.l_max = value; break;
        case Parameter::ssr: vc.ssr = value; break;
        case Parameter::browse_speed: vc.browse_speed = value; break;
    }
    return vc;
}

void SweepConfig::validate() const {
    if (methods.empty()) throw ConfigError("methods", "must list at least one method");
    if (values.empty()) throw ConfigError("sweep.values", "must not be empty");
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1])) {
            throw ConfigError("sweep.values", "must be strictly increasing");
        }
    }
    base.validate();
    for (double v : values) {
        try {
            at(v).validate();
        } catch (const ConfigError& e) {
            throw ConfigError("sweep.values", std::string("invalid value: ") + e.what());
        }
    }
    if (parameter == Parameter::ssr) {
        for (double v : values) {
            try {
                viewing_distance(v, display);
            } catch (const DomainError& e) {
                throw ConfigError("sweep.values", e.what());
            }
        }
    }
    if (!(display.width_cm > 0.0)) throw ConfigError("display.width_cm", "must be positive");
    if (!(display.width_px > 0.0)) throw ConfigError("display.width_px", "must be positive");
    if (!manifest) corpus.validate();
    if (observer.n_channels == 0) throw ConfigError("observer.n_channels", "must be positive");
    if (!(observer.spread > 0.0)) throw ConfigError("observer.spread", "must be positive");
    if (observer.n_readers == 0) throw ConfigError("observer.n_readers", "must be positive");
    if (!(observer.train_fraction > 0.0 && observer.train_fraction <= 1.0)) {
        throw ConfigError("observer.train_fraction", "must be in (0, 1]");
    }
    if (!(observer.ridge_factor > 0.0)) throw ConfigError("observer.ridge_factor", "must be positive");
    try {
        barten.validate();
    } catch (const DomainError& e) {
        throw ConfigError("barten", e.what());
    }
}

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ConfigError(where.empty() ? "<root>" : where, "must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
        }
    }
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where.empty() ? key : where + "." + key, "wrong type");
    }
}

}  // namespace

SweepConfig parse_config(const json& j) {
    reject_unknown(j, "", {"schema_version", "methods", "sweep", "viewing", "display", "corpus",
                           "observer", "barten"});
    SweepConfig c;
    int version = 0;
    read(j, "schema_version", "", version);
    if (version != kConfigSchemaVersion) {
        throw ConfigError("schema_version", "expected " + std::to_string(kConfigSchemaVersion));
    }
    if (j.contains("methods")) {
        std::vector<std::string> names;
        read(j, "methods", "", names);
        c.methods.clear();
        for (const auto& n : names) {
            try {
                c.methods.push_back(percept::parse_method(n));
            } catch (const DomainError& e) {
                throw ConfigError("methods", e.what());
            }
        }
    }
    if (!j.contains("sweep")) throw ConfigError("sweep", "required");
    const json& s = j.at("sweep");
    reject_unknown(s, "sweep", {"parameter", "values"});
    std::string param;
    read(s, "parameter", "sweep", param);
    if (param.empty()) throw ConfigError("sweep.parameter", "required");
    c.parameter = parse_parameter(param);
    c.values = default_grid(c.parameter);
    read(s, "values", "sweep", c.values);

    if (j.contains("viewing")) {
        const json& v = j.at("viewing");
        reject_unknown(v, "viewing", {"l_max", "contrast", "ssr", "browse_speed"});
        read(v, "l_max", "viewing", c.base.l_max);
        read(v, "contrast", "viewing", c.base.contrast);
        read(v, "ssr", "viewing", c.base.ssr);
        read(v, "browse_speed", "viewing", c.base.browse_speed);
    }
    if (j.contains("display")) {
        const json& d = j.at("display");
        reject_unknown(d, "display", {"width_cm", "width_px"});
        read(d, "width_cm", "display", c.display.width_cm);
        read(d, "width_px", "display", c.display.width_px);
    }
    c.corpus.lesion_amplitude = kDefaultLesionAmplitude;
    if (j.contains("corpus")) {
        const json& k = j.at("corpus");
        reject_unknown(k, "corpus", {"n_pairs", "nx", "nt", "beta", "master_seed", "lesion",
                                     "manifest"});
        read(k, "n_pairs", "corpus", c.corpus.n_pairs);
        std::size_t nx = c.corpus.dims.nx;
        read(k, "nx", "corpus", nx);
        c.corpus.dims.nx = c.corpus.dims.ny = nx;
        read(k, "nt", "corpus", c.corpus.dims.nt);
        read(k, "beta", "corpus", c.corpus.beta);
        read(k, "master_seed", "corpus", c.corpus.master_seed);
        if (k.contains("manifest")) {
            std::string path;
            read(k, "manifest", "corpus", path);
            c.manifest = path;
        }
        if (k.contains("lesion")) {
            const json& l = k.at("lesion");
            reject_unknown(l, "corpus.lesion", {"amplitude", "sigma_xy", "sigma_t"});
            read(l, "amplitude", "corpus.lesion", c.corpus.lesion_amplitude);
            read(l, "sigma_xy", "corpus.lesion", c.corpus.lesion_sigma_xy);
            read(l, "sigma_t", "corpus.lesion", c.corpus.lesion_sigma_t);
        }
    }
    if (j.contains("observer")) {
        const json& o = j.at("observer");
        reject_unknown(o, "observer", {"n_channels", "spread", "n_readers", "train_fraction",
                                       "ridge_factor"});
        read(o, "n_channels", "observer", c.observer.n_channels);
        read(o, "spread", "observer", c.observer.spread);
        read(o, "n_readers", "observer", c.observer.n_readers);
        read(o, "train_fraction", "observer", c.observer.train_fraction);
        read(o, "ridge_factor", "observer", c.observer.ridge_factor);
    }
    if (j.contains("barten")) {
        const json& b = j.at("barten");
        reject_unknown(b, "barten", {"k_crozier", "eta", "phi0", "x_max", "n_max", "t_int",
                                     "p_photon", "sigma0", "c_ab", "u0", "n1", "n2", "tau10",
                                     "tau20"});
        auto& p = c.barten;
        read(b, "k_crozier", "barten", p.k_crozier);
        read(b, "eta", "barten", p.eta);
        read(b, "phi0", "barten", p.phi0);
        read(b, "x_max", "barten", p.x_max);
        read(b, "n_max", "barten", p.n_max);
        read(b, "t_int", "barten", p.t_int);
        read(b, "p_photon", "barten", p.p_photon);
        read(b, "sigma0", "barten", p.sigma0);
        read(b, "c_ab", "barten", p.c_ab);
        read(b, "u0", "barten", p.u0);
        read(b, "n1", "barten", p.n1);
        read(b, "n2", "barten", p.n2);
        read(b, "tau10", "barten", p.tau10);
        read(b, "tau20", "barten", p.tau20);
    }
    c.validate();
    return c;
}

SweepConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    SweepConfig c = parse_config(j);
    if (c.manifest && c.manifest->is_relative()) c.manifest = path.parent_path() / *c.manifest;
    return c;
}

json to_json(const SweepConfig& c) {
    json methods = json::array();
    for (auto m : c.methods) methods.push_back(std::string(percept::to_string(m)));
    json corpus = {{"n_pairs", c.corpus.n_pairs},
                   {"nx", c.corpus.dims.nx},
                   {"nt", c.corpus.dims.nt},
                   {"beta", c.corpus.beta},
                   {"master_seed", c.corpus.master_seed},
                   {"lesion",
                    {{"amplitude", c.corpus.lesion_amplitude},
                     {"sigma_xy", c.corpus.lesion_sigma_xy},
                     {"sigma_t", c.corpus.lesion_sigma_t}}}};
    if (c.manifest) corpus["manifest"] = c.manifest->string();
    return {{"schema_version", kConfigSchemaVersion},
            {"methods", methods},
            {"sweep", {{"parameter", std::string(to_string(c.parameter))}, {"values", c.values}}},
            {"viewing",
             {{"l_max", c.base.l_max},
              {"contrast", c.base.contrast},
              {"ssr", c.base.ssr},
              {"browse_speed", c.base.browse_speed}}},
            {"display", {{"width_cm", c.display.width_cm}, {"width_px", c.display.width_px}}},
            {"corpus", corpus},
            {"observer",
             {{"n_channels", c.observer.n_channels},
              {"spread", c.observer.spread},
              {"n_readers", c.observer.n_readers},
              {"train_fraction", c.observer.train_fraction},
              {"ridge_factor", c.observer.ridge_factor}}}};
}

namespace {

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::string csv_header() {
    return "method,contrast,l_max,ssr,viewing_distance_cm,browse_speed,auc,auc_var,error_bar,"
           "d_prime,n_cases,n_readers,master_seed";
}

std::string csv_row(const SweepRow& row) {
    std::string s;
    s += percept::to_string(row.method);
    for (double v : {row.vc.contrast, row.vc.l_max, row.vc.ssr, row.viewing_distance_cm,
                     row.vc.browse_speed, row.result.auc_mean, row.result.auc_variance,
                     row.result.error_bar, row.result.d_prime}) {
        s += ',';
        s += fmt(v);
    }
    s += ',' + std::to_string(row.n_cases) + ',' + std::to_string(row.n_readers) + ',' +
         std::to_string(row.master_seed);
    return s;
}

std::string_view to_string(Trend t) noexcept {
    switch (t) {
        case Trend::increasing: return "increasing";
        case Trend::decreasing: return "decreasing";
        case Trend::constant: return "constant";
        case Trend::peaked: return "peaked";
    }
    return "?";
}

Trend classify_trend(const std::vector<double>& v, const std::vector<double>& eb) {
    if (v.size() < 3) throw DomainError("trend classification needs at least 3 points");
    if (eb.size() != v.size()) throw DimensionError("one error bar per point is required");
    auto bar = [&](std::size_t a, std::size_t b) { return std::hypot(eb[a], eb[b]); };
    const std::size_t last = v.size() - 1;

    for (std::size_t k = 1; k < last; ++k) {
        if (v[k] - v[0] > bar(k, 0) && v[k] - v[last] > bar(k, last)) return Trend::peaked;
    }
    auto monotone = [&](double sign) {
        for (std::size_t i = 0; i < last; ++i) {
            if (sign * (v[i + 1] - v[i]) < -bar(i, i + 1)) return false;
        }
        return sign * (v[last] - v[0]) > bar(0, last);
    };
    if (monotone(+1.0)) return Trend::increasing;
    if (monotone(-1.0)) return Trend::decreasing;
    return Trend::constant;
}

TrendReport make_report(const SweepConfig& config, const std::vector<SweepRow>& rows) {
    TrendReport report{config.parameter, config.values, {}};
    for (const auto method : config.methods) {
        MethodTrend mt;
        mt.method = method;
        for (const auto& row : rows) {
            if (row.method != method) continue;
            mt.d_prime.push_back(row.result.d_prime);
            mt.d_prime_error_bar.push_back(
                stats::d_prime_error_bar(row.result.auc_mean, row.result.error_bar));
        }
        const bool finite = std::all_of(mt.d_prime.begin(), mt.d_prime.end(),
                                        [](double d) { return std::isfinite(d); });
        const double d_max = mt.d_prime.empty()
                                 ? 0.0
                                 : *std::max_element(mt.d_prime.begin(), mt.d_prime.end());
        if (!finite) {
            mt.note = "inconclusive: saturated d'";
            mt.normalized.assign(mt.d_prime.size(), 0.0);
        } else if (!(d_max > 0.0)) {
            mt.note = "inconclusive: all d' <= 0";
            mt.normalized.assign(mt.d_prime.size(), 0.0);
        } else {
            for (double d : mt.d_prime) mt.normalized.push_back(std::clamp(d / d_max, 0.0, 1.0));
        }
        if (finite && mt.d_prime.size() >= 3) {
            mt.trend = classify_trend(mt.d_prime, mt.d_prime_error_bar);
        } else if (mt.note.empty()) {
            mt.note = "fewer than 3 sweep points";
        }
        report.methods.push_back(std::move(mt));
    }
    return report;
}

void print_report(const TrendReport& report, std::ostream& out) {
    out << "sweep over " << to_string(report.parameter) << '\n';
    out << std::left << std::setw(8) << "method";
    for (double v : report.values) out << std::setw(22) << fmt(v);
    out << "trend\n";
    for (const auto& m : report.methods) {
        out << std::setw(8) << percept::to_string(m.method);
        for (std::size_t i = 0; i < m.d_prime.size(); ++i) {
            char cell[64];
            std::snprintf(cell, sizeof(cell), "%.3f+-%.3f (%.2f)", m.d_prime[i],
                          m.d_prime_error_bar[i], m.normalized[i]);
            out << std::setw(22) << cell;
        }
        out << (m.trend ? std::string(to_string(*m.trend)) : std::string("n/a"));
        if (!m.note.empty()) out << "  [" << m.note << ']';
        out << '\n';
    }
}

json to_json(const TrendReport& report) {
    json methods = json::array();
    for (const auto& m : report.methods) {
        methods.push_back({{"method", std::string(percept::to_string(m.method))},
                           {"d_prime", m.d_prime},
                           {"d_prime_error_bar", m.d_prime_error_bar},
                           {"normalized", m.normalized},
                           {"trend", m.trend ? json(std::string(to_string(*m.trend))) : json()},
                           {"note", m.note}});
    }
    return {{"parameter", std::string(to_string(report.parameter))},
            {"values", report.values},
            {"methods", methods}};
}

namespace {

struct Corpus {
    std::vector<ImageStack> stacks;  // raw, not display-normalized
    std::vector<Label> labels;
};

Corpus load_corpus(const SweepConfig& config) {
    Corpus corpus;
    if (config.manifest) {
        const Manifest manifest = read_manifest(*config.manifest);
        const auto base = config.manifest->parent_path();
        std::optional<Dims> dims;
        for (const auto& entry : manifest.stacks) {
            std::filesystem::path p = entry.path;
            if (p.is_relative()) p = base / p;
            ImageStack s = read_stack(p, dims);
            dims = s.dims();
            s.set_label(entry.label);
            corpus.labels.push_back(entry.label);
            corpus.stacks.push_back(std::move(s));
        }
        return corpus;
    }
    const std::size_t n = config.corpus.n_cases();
    corpus.stacks.resize(n);
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        corpus.stacks[static_cast<std::size_t>(i)] = make_case(config.corpus, static_cast<std::size_t>(i));
    }
    for (const auto& s : corpus.stacks) corpus.labels.push_back(s.label());
    return corpus;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& config, const RowSink& sink,
                                const ReaderSink& reader_sink) {
    config.validate();
    const Corpus corpus = load_corpus(config);
    if (corpus.stacks.empty()) throw DegenerateInputError("empty corpus");
    const std::uint64_t seed = config.manifest ? read_manifest(*config.manifest).master_seed
                                               : config.corpus.master_seed;
    const observer::LgChannelSet channels(corpus.stacks.front().nx(), corpus.stacks.front().ny(),
                                          config.observer.n_channels, config.observer.spread);
    stats::ReaderOptions options;
    options.n_readers = config.observer.n_readers;
    options.train_fraction = config.observer.train_fraction;
    options.ridge_factor = config.observer.ridge_factor;

    std::vector<SweepRow> rows;
    for (const auto method : config.methods) {
        for (const double value : config.values) {
            const ViewingConditions vc = config.at(value);
            stats::FeatureRequest request;
            request.method = method;
            request.vc = vc;
            request.params = config.barten;
            request.n_realizations = method == percept::Method::mc ? options.n_readers : 1;
            request.master_seed = seed;
            const stats::CaseSource source = [&](std::size_t i) {
                return normalize_to_display(corpus.stacks[i], vc);
            };
            const auto bank =
                stats::extract_features(source, corpus.stacks.size(), request, channels);
            const auto readers = stats::make_readers(bank, corpus.labels, channels, seed, options);

            SweepRow row{method,
                         vc,
                         viewing_distance(vc.ssr, config.display),
                         stats::mrmc_one_shot(stats::to_mrmc_input(readers)),
                         readers.front().scores.scores.size(),
                         readers.size(),
                         seed};
            if (reader_sink) reader_sink(row, readers);
            if (sink) sink(row);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace mobs::sweep
