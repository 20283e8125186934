// simulate: command-line front end for the perception/observer pipeline.
//
//   simulate sweep --config run.json --out results.csv [--threads N]
//   simulate gen-corpus --out-dir DIR [--config run.json] [--n-pairs N] ...
//   simulate perceive --in a.stk --out b.stk --method PM [viewing flags]
//   simulate csf eval --u 4 --w 0 --l 150 --x0 9.14 --m 0.01
//
// Exit code 0 on success; failures print one JSON object on stderr.

#include <CLI11.hpp>
#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <nlohmann/json.hpp>

#include "mobs/csf.hpp"
#include "mobs/error.hpp"
#include "mobs/observer.hpp"
#include "mobs/percept.hpp"
#include "mobs/stack_io.hpp"
#include "mobs/stackgen.hpp"
#include "mobs/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int report_error(const std::string& kind, const std::string& message,
                 const std::optional<std::string>& field = std::nullopt) {
    json j = {{"error", kind}, {"message", message}};
    if (field) j["field"] = *field;
    std::cerr << j.dump() << '\n';
    return 2;
}

void add_viewing_flags(CLI::App* app, mobs::ViewingConditions& vc) {
    app->add_option("--l-max", vc.l_max, "Maximum display luminance, cd/m2")->capture_default_str();
    app->add_option("--contrast", vc.contrast, "Effective contrast L_max/L_min")->capture_default_str();
    app->add_option("--ssr", vc.ssr, "Spatial sampling rate, pixels/degree")->capture_default_str();
    app->add_option("--browse-speed", vc.browse_speed, "Browsing speed, slices/second")
        ->capture_default_str();
}

int run_sweep_command(const fs::path& config_path, const fs::path& out_path,
                      const std::optional<fs::path>& report_path,
                      const std::optional<fs::path>& models_dir) {
    const auto config = mobs::sweep::load_config(config_path);
    std::ofstream csv(out_path, std::ios::trunc);
    if (!csv) throw mobs::FormatError("io", "cannot open " + out_path.string());
    csv << mobs::sweep::csv_header() << '\n';
    csv.flush();

    std::size_t done = 0;
    const auto sink = [&](const mobs::sweep::SweepRow& row) {
        csv << mobs::sweep::csv_row(row) << '\n';
        csv.flush();
        ++done;
    };
    mobs::sweep::ReaderSink reader_sink;
    if (models_dir) {
        fs::create_directories(*models_dir);
        reader_sink = [&](const mobs::sweep::SweepRow& row,
                          const std::vector<mobs::stats::Reader>& readers) {
            for (const auto& r : readers) {
                char name[128];
                std::snprintf(name, sizeof(name), "%s_point%02zu_reader%zu.json",
                              std::string(mobs::percept::to_string(row.method)).c_str(),
                              done % config.values.size(), r.scores.reader_id);
                mobs::observer::save_model(r.model, *models_dir / name);
            }
        };
    }

    std::vector<mobs::sweep::SweepRow> rows;
    try {
        rows = mobs::sweep::run_sweep(config, sink, reader_sink);
    } catch (const std::exception& e) {
        const auto* err = dynamic_cast<const mobs::Error*>(&e);
        std::ofstream manifest(out_path.string() + ".error.json");
        manifest << json{{"error", err ? err->kind() : "internal"},
                         {"message", e.what()},
                         {"completed_rows", done},
                         {"expected_rows", config.methods.size() * config.values.size()},
                         {"config", mobs::sweep::to_json(config)}}
                        .dump(2)
                 << '\n';
        throw;
    }
    const auto report = mobs::sweep::make_report(config, rows);
    mobs::sweep::print_report(report, std::cout);
    if (report_path) {
        std::ofstream out(*report_path);
        out << mobs::sweep::to_json(report).dump(2) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatiotemporal CSF model observer simulation"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "OpenMP worker threads (0 = runtime default)");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a viewing-condition sweep");
    fs::path config_path, out_path;
    std::optional<fs::path> report_path, models_dir;
    sweep_cmd->add_option("--config", config_path, "Run configuration (JSON)")->required();
    sweep_cmd->add_option("--out", out_path, "Results CSV")->required();
    sweep_cmd->add_option("--report", report_path, "Trend report JSON");
    sweep_cmd->add_option("--models-dir", models_dir, "Dump every trained reader model here");
    sweep_cmd->add_option("--threads", threads, "OpenMP worker threads");

    // gen-corpus
    auto* gen_cmd = app.add_subcommand("gen-corpus", "Write a synthetic stack corpus to disk");
    fs::path out_dir;
    std::optional<fs::path> gen_config;
    mobs::CorpusSpec corpus;
    corpus.lesion_amplitude = mobs::sweep::kDefaultLesionAmplitude;
    gen_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
    gen_cmd->add_option("--config", gen_config, "Take corpus settings from a run configuration");
    gen_cmd->add_option("--n-pairs", corpus.n_pairs)->capture_default_str();
    gen_cmd->add_option("--nx", corpus.dims.nx)->capture_default_str();
    gen_cmd->add_option("--nt", corpus.dims.nt)->capture_default_str();
    gen_cmd->add_option("--beta", corpus.beta)->capture_default_str();
    gen_cmd->add_option("--seed", corpus.master_seed)->capture_default_str();
    gen_cmd->add_option("--amplitude", corpus.lesion_amplitude)->capture_default_str();
    gen_cmd->add_option("--sigma-xy", corpus.lesion_sigma_xy)->capture_default_str();
    gen_cmd->add_option("--sigma-t", corpus.lesion_sigma_t)->capture_default_str();

    // perceive
    auto* perceive_cmd = app.add_subcommand("perceive", "Apply LF, PM or MC perception to a stack");
    fs::path in_stack, out_stack;
    std::string method_name = "PM";
    std::uint64_t mc_seed = 1;
    bool skip_normalize = false;
    mobs::ViewingConditions vc;
    perceive_cmd->add_option("--in", in_stack, "Input stack file")->required();
    perceive_cmd->add_option("--out", out_stack, "Output stack file")->required();
    perceive_cmd->add_option("--method", method_name, "LF, PM or MC")->capture_default_str();
    perceive_cmd->add_option("--seed", mc_seed, "MC seed")->capture_default_str();
    perceive_cmd->add_flag("--no-normalize", skip_normalize,
                           "Input is already normalized for display");
    add_viewing_flags(perceive_cmd, vc);

    // csf eval
    auto* csf_cmd = app.add_subcommand("csf", "Contrast sensitivity diagnostics");
    csf_cmd->require_subcommand(1);
    auto* eval_cmd = csf_cmd->add_subcommand("eval", "Print S(u, w) and p(m, S), one per line");
    double u = 0, w = 0, l_avg = 150, x0 = 64.0 / 7.0, m = 0, k = 3;
    eval_cmd->add_option("--u", u, "Spatial frequency, cycles/deg")->required();
    eval_cmd->add_option("--w", w, "Temporal frequency, cycles/s")->required();
    eval_cmd->add_option("--l", l_avg, "Average luminance, cd/m2")->capture_default_str();
    eval_cmd->add_option("--x0", x0, "Field size, deg")->capture_default_str();
    eval_cmd->add_option("--m", m, "Modulation")->capture_default_str();
    eval_cmd->add_option("--k", k, "Crozier coefficient")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what());
    }

    if (threads > 0) omp_set_num_threads(threads);

    try {
        if (*sweep_cmd) return run_sweep_command(config_path, out_path, report_path, models_dir);

        if (*gen_cmd) {
            if (gen_config) corpus = mobs::sweep::load_config(*gen_config).corpus;
            corpus.dims.ny = corpus.dims.nx;
            corpus.validate();
            fs::create_directories(out_dir);
            mobs::Manifest manifest{corpus.master_seed, {}};
            for (std::size_t i = 0; i < corpus.n_cases(); ++i) {
                char name[64];
                std::snprintf(name, sizeof(name), "case_%05zu.stk", i);
                mobs::write_stack(mobs::make_case(corpus, i), out_dir / name);
                manifest.stacks.push_back({name, corpus.label_of(i)});
            }
            mobs::write_manifest(manifest, out_dir / "manifest.json");
            std::cout << out_dir / "manifest.json" << '\n';
            return 0;
        }

        if (*perceive_cmd) {
            vc.validate();
            auto stack = mobs::read_stack(in_stack);
            if (!skip_normalize) stack = mobs::normalize_to_display(std::move(stack), vc);
            auto kind = mobs::percept::parse_method(method_name);
            double residue = 0.0;
            const auto out = mobs::percept::perceive(stack, {kind, mc_seed}, vc, {}, &residue);
            mobs::write_stack(out, out_stack);
            return 0;
        }

        if (*eval_cmd) {
            mobs::csf::BartenParams params;
            params.k_crozier = k;
            const double s = mobs::csf::csf(u, w, {x0, l_avg}, params);
            const double p = mobs::csf::detection_probability(m, s, k);
            std::printf("%.17g\n%.17g\n", s, p);
            return 0;
        }
    } catch (const mobs::ConfigError& e) {
        return report_error(e.kind(), e.what(), e.field());
    } catch (const mobs::Error& e) {
        return report_error(e.kind(), e.what());
    } catch (const std::exception& e) {
        return report_error("internal", e.what());
    }
    return 0;
}
