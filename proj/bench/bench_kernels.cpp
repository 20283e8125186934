// Serial reference vs OpenMP kernels on default-size stacks.
//
//   bench_kernels --benchmark_filter=Perceive

#include <benchmark/benchmark.h>

#include <vector>

#include "mobs/observer.hpp"
#include "mobs/percept.hpp"
#include "mobs/percept_reference.hpp"
#include "mobs/readers.hpp"
#include "mobs/stackgen.hpp"

using namespace mobs;

namespace {

const ViewingConditions kVc;

const ImageStack& sample_stack() {
    static const ImageStack s = normalize_to_display(generate_background(64, 64, 32, 3.0, 11), kVc);
    return s;
}

percept::PerceptMethod method_of(int i) {
    switch (i) {
        case 0: return percept::PerceptMethod::lf();
        case 1: return percept::PerceptMethod::pm();
        default: return percept::PerceptMethod::mc(5);
    }
}

void BM_PerceiveReference(benchmark::State& state) {
    const auto method = method_of(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(percept::reference::perceive(sample_stack(), method, kVc));
    }
    state.SetLabel(std::string(percept::to_string(method.kind)));
}

void BM_PerceiveParallel(benchmark::State& state) {
    const auto method = method_of(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(percept::perceive(sample_stack(), method, kVc));
    }
    state.SetLabel(std::string(percept::to_string(method.kind)));
}

BENCHMARK(BM_PerceiveReference)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PerceiveParallel)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

struct FeatureFixture {
    std::vector<ImageStack> cases;
    observer::LgChannelSet channels{64, 64};
    stats::FeatureRequest request;

    FeatureFixture() {
        CorpusSpec spec;
        spec.n_pairs = 8;
        for (std::size_t i = 0; i < spec.n_cases(); ++i) {
            cases.push_back(normalize_to_display(make_case(spec, i), kVc));
        }
        request.method = percept::Method::pm;
        request.vc = kVc;
        request.master_seed = spec.master_seed;
    }
    stats::CaseSource source() const {
        return [this](std::size_t i) { return cases[i]; };
    }
};

const FeatureFixture& features() {
    static const FeatureFixture f;
    return f;
}

void BM_ExtractFeaturesSerial(benchmark::State& state) {
    const auto& f = features();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            stats::extract_features_serial(f.source(), f.cases.size(), f.request, f.channels));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(f.cases.size()));
}

void BM_ExtractFeaturesParallel(benchmark::State& state) {
    const auto& f = features();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            stats::extract_features(f.source(), f.cases.size(), f.request, f.channels));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(f.cases.size()));
}

BENCHMARK(BM_ExtractFeaturesSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ExtractFeaturesParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
