#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "mobs/error.hpp"
#include "mobs/sweep.hpp"

using mobs::ConfigError;
using mobs::DomainError;
using namespace mobs::sweep;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string field_of(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<accepted>";
}

// Small corpus so a sweep point runs in well under a second.
json small_config(const std::string& parameter, std::vector<double> values,
                  std::vector<std::string> methods) {
    return {{"schema_version", 1},
            {"methods", methods},
            {"sweep", {{"parameter", parameter}, {"values", values}}},
            {"corpus", {{"n_pairs", 12}, {"nx", 32}, {"nt", 16}, {"lesion", {{"amplitude", 0.3}}}}},
            {"observer", {{"n_channels", 6}, {"spread", 6.0}}}};
}

std::string to_csv(const std::vector<SweepRow>& rows) {
    std::string s = csv_header() + "\n";
    for (const auto& r : rows) s += csv_row(r) + "\n";
    return s;
}

fs::path scratch_dir() {
    auto dir = fs::temp_directory_path() / ("mobs_sweep_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int status;
    std::string out;
    std::string err;
};

Run run_cli(const std::string& args) {
    const auto dir = scratch_dir();
    const auto out = dir / "stdout.txt";
    const auto err = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + MOBS_SIMULATE_EXE + "\" " + args + " >\"" +
                            out.string() + "\" 2>\"" + err.string() + "\"";
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

}  // namespace

TEST_CASE("viewing distance") {
    CHECK(viewing_distance(7.0) == doctest::Approx(18.760267472035229977).epsilon(1e-14));

    double prev = 0.0;
    for (double ssr = 1.0; ssr <= 200.0; ssr *= 1.25) {
        const double d = viewing_distance(ssr);
        CHECK(d > prev);
        prev = d;
    }
    for (double ssr : {3.0, 7.0, 14.0}) {
        CHECK(viewing_distance(ssr, {6.0, 64.0}) ==
              doctest::Approx(2.0 * viewing_distance(ssr)).epsilon(1e-14));
    }
    // 64 px at 0.35 px/deg would span more than 180 degrees.
    CHECK_THROWS_AS(viewing_distance(0.35), DomainError);
    CHECK_THROWS_AS(viewing_distance(0.0), DomainError);
}

TEST_CASE("trend classification") {
    const std::vector<double> tiny(3, 1e-3);
    CHECK(classify_trend({1, 2, 3}, tiny) == Trend::increasing);
    CHECK(classify_trend({3, 2, 1}, tiny) == Trend::decreasing);
    CHECK(classify_trend({1, 3, 1}, tiny) == Trend::peaked);
    CHECK(classify_trend({1.0, 1.1, 0.9}, {0.5, 0.5, 0.5}) == Trend::constant);
    // A significant step against the direction breaks monotonicity.
    CHECK(classify_trend({1, 3, 2, 4}, std::vector<double>(4, 1e-3)) == Trend::constant);
    CHECK(classify_trend({1, 0.5, 2, 3}, std::vector<double>(4, 1e-3)) == Trend::constant);
    // An interior maximum is peaked even when the ends differ.
    CHECK(classify_trend({1, 4, 3, 2}, std::vector<double>(4, 1e-3)) == Trend::peaked);
    // Endpoints within the combined bar: not monotone.
    CHECK(classify_trend({1.0, 1.2, 1.4}, {0.3, 0.3, 0.3}) == Trend::constant);

    CHECK_THROWS_AS(classify_trend({1, 2}, {0.1, 0.1}), DomainError);
    CHECK_THROWS_AS(classify_trend({1, 2, 3}, {0.1, 0.1}), mobs::DimensionError);
}

TEST_CASE("config parsing") {
    const json base = {{"schema_version", 1}, {"sweep", {{"parameter", "contrast"}}}};

    SUBCASE("defaults") {
        const auto c = parse_config(base);
        CHECK(c.values == default_grid(Parameter::contrast));
        CHECK(c.methods.size() == 3);
        CHECK(c.corpus.lesion_amplitude == kDefaultLesionAmplitude);
        CHECK(c.corpus.n_pairs == 200);
        CHECK(c.observer.n_channels == 15);
        CHECK(c.observer.spread == 10.0);
        CHECK(c.observer.n_readers == 4);
        CHECK(c.base.l_max == 300.0);
        CHECK(c.base.browse_speed == 25.0);
    }
    SUBCASE("unknown keys name their field") {
        json j = base;
        j["colour"] = 1;
        CHECK(field_of(j) == "colour");
        j = base;
        j["corpus"] = {{"lesion", {{"x", 1}}}};
        CHECK(field_of(j) == "corpus.lesion.x");
        j = base;
        j["sweep"]["step"] = 2;
        CHECK(field_of(j) == "sweep.step");
        j = base;
        j["barten"] = {{"k", 3}};
        CHECK(field_of(j) == "barten.k");
    }
    SUBCASE("invalid values") {
        json j = base;
        j["schema_version"] = 2;
        CHECK(field_of(j) == "schema_version");
        CHECK(field_of(json{{"schema_version", 1}}) == "sweep");
        j = base;
        j["sweep"]["parameter"] = "zoom";
        CHECK(field_of(j) == "sweep.parameter");
        j = base;
        j["sweep"]["values"] = {200, 100};
        CHECK(field_of(j) == "sweep.values");
        j = base;
        j["sweep"]["values"] = {0.5, 100};  // contrast below 1
        CHECK(field_of(j) == "sweep.values");
        j = base;
        j["methods"] = {"LF", "XX"};
        CHECK(field_of(j) == "methods");
        j = base;
        j["observer"] = {{"train_fraction", 1.5}};
        CHECK(field_of(j) == "observer.train_fraction");
        j = base;
        j["corpus"] = {{"n_pairs", "many"}};
        CHECK(field_of(j) == "corpus.n_pairs");
        j = {{"schema_version", 1}, {"sweep", {{"parameter", "ssr"}, {"values", {0.3, 7}}}}};
        CHECK(field_of(j) == "sweep.values");
    }
    SUBCASE("round trip") {
        const auto c = parse_config(small_config("l_max", {100, 300}, {"PM"}));
        const auto back = parse_config(to_json(c));
        CHECK(to_json(back) == to_json(c));
    }
}

TEST_CASE("shipped configs parse") {
    std::size_t n = 0;
    for (const auto& entry : fs::directory_iterator(fs::path(MOBS_SOURCE_DIR) / "configs")) {
        if (entry.path().extension() != ".json") continue;
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(load_config(entry.path()));
        ++n;
    }
    CHECK(n >= 4);
}

TEST_CASE("csv layout") {
    CHECK(csv_header() ==
          "method,contrast,l_max,ssr,viewing_distance_cm,browse_speed,auc,auc_var,error_bar,"
          "d_prime,n_cases,n_readers,master_seed");
    SweepRow row{mobs::percept::Method::pm, {}, 18.75, {}, 100, 4, 42};
    row.result.auc_mean = 0.75;
    row.result.auc_variance = 0.001;
    row.result.error_bar = 0.0632;
    row.result.d_prime = 0.95;
    CHECK(csv_row(row) == "PM,200,300,7,18.75,25,0.75,0.001,0.0632,0.95,100,4,42");
}

TEST_CASE("sweep runs") {
    SUBCASE("one point, LF only") {
        const auto c = parse_config(small_config("contrast", {200}, {"LF"}));
        const auto rows = run_sweep(c);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].method == mobs::percept::Method::lf);
        CHECK(rows[0].n_readers == 4);
        CHECK(rows[0].n_cases == 12);
        CHECK(rows[0].result.auc_mean > 0.5);
        const auto report = make_report(c, rows);
        CHECK_FALSE(report.methods[0].trend.has_value());
    }
    SUBCASE("row order and determinism") {
        const auto c = parse_config(small_config("browse_speed", {5, 25, 100}, {"LF", "MC"}));
        std::vector<std::string> streamed;
        const auto rows = run_sweep(c, [&](const SweepRow& r) { streamed.push_back(csv_row(r)); });
        REQUIRE(rows.size() == 6);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            CHECK(rows[i].method == (i < 3 ? mobs::percept::Method::lf : mobs::percept::Method::mc));
            CHECK(rows[i].vc.browse_speed == c.values[i % 3]);
            CHECK(streamed[i] == csv_row(rows[i]));
        }
        CHECK(to_csv(run_sweep(c)) == to_csv(rows));

        const auto report = make_report(c, rows);
        for (const auto& m : report.methods) {
            REQUIRE(m.normalized.size() == 3);
            CHECK(*std::max_element(m.normalized.begin(), m.normalized.end()) == 1.0);
            CHECK(m.trend.has_value());
        }
    }
    SUBCASE("effective contrast improves PM detectability") {
        // Default corpus and observer; the effect is small, so the tiny
        // corpus above is too noisy to show it.
        const json j = {{"schema_version", 1},
                        {"methods", {"PM"}},
                        {"sweep", {{"parameter", "contrast"}, {"values", {100, 200, 400, 800}}}}};
        const auto rows = run_sweep(parse_config(j));
        REQUIRE(rows.size() == 4);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            CHECK(rows[i].result.d_prime > rows[i - 1].result.d_prime);
        }
    }
}

TEST_CASE("report flags") {
    const auto c = parse_config(small_config("contrast", {50, 100, 200}, {"LF"}));
    std::vector<SweepRow> rows(3, SweepRow{mobs::percept::Method::lf, {}, 1.0, {}, 10, 4, 1});
    for (auto& r : rows) r.result.d_prime = -0.2;
    auto report = make_report(c, rows);
    CHECK(report.methods[0].note == "inconclusive: all d' <= 0");

    rows[1].result.d_prime = INFINITY;
    report = make_report(c, rows);
    CHECK(report.methods[0].note == "inconclusive: saturated d'");
    CHECK_FALSE(report.methods[0].trend.has_value());
}

TEST_CASE("command line") {
    SUBCASE("csf eval") {
        const auto r = run_cli("csf eval --u 4 --w 0 --l 150 --x0 9.142857142857142 --m 0");
        CHECK(r.status == 0);
        double s = 0.0, p = 1.0;
        REQUIRE(std::sscanf(r.out.c_str(), "%lf %lf", &s, &p) == 2);
        CHECK(s > 1.0);
        // Zero modulation: p = Phi(-k) with k = 3.
        CHECK(p == doctest::Approx(0.5 * std::erfc(3.0 / std::sqrt(2.0))).epsilon(1e-12));
    }
    SUBCASE("bad flags give usage error JSON") {
        const auto r = run_cli("csf eval --w 0");
        CHECK(r.status == 2);
        const auto j = json::parse(r.err);
        CHECK(j.at("error") == "usage");
        CHECK(j.contains("message"));
    }
    SUBCASE("domain error JSON") {
        const auto r = run_cli("csf eval --u -1 --w 0");
        CHECK(r.status == 2);
        CHECK(json::parse(r.err).at("error") == "domain");
    }
    SUBCASE("config error names the field") {
        const auto cfg = scratch_dir() / "bad.json";
        std::ofstream(cfg) << R"({"schema_version":1,"sweep":{"parameter":"ssr"},"viewing":{"lmax":3}})";
        const auto r = run_cli("sweep --config \"" + cfg.string() + "\" --out \"" +
                               (scratch_dir() / "bad.csv").string() + "\"");
        CHECK(r.status == 2);
        const auto j = json::parse(r.err);
        CHECK(j.at("error") == "config");
        CHECK(j.at("field") == "viewing.lmax");
    }
    SUBCASE("sweep writes csv and report") {
        const auto dir = scratch_dir();
        std::ofstream(dir / "ok.json") << small_config("ssr", {5, 7, 10}, {"LF"}).dump();
        const auto r = run_cli("sweep --config \"" + (dir / "ok.json").string() + "\" --out \"" +
                               (dir / "ok.csv").string() + "\" --report \"" +
                               (dir / "ok_report.json").string() + "\"");
        CHECK(r.status == 0);
        const auto csv = slurp(dir / "ok.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
        const auto report = json::parse(slurp(dir / "ok_report.json"));
        CHECK(report.at("parameter") == "ssr");
        CHECK(report.at("methods").size() == 1);
        CHECK(r.out.find("sweep over ssr") != std::string::npos);
    }
}
