#include "mobs/readers.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>

#include "mobs/error.hpp"
#include "mobs/seed.hpp"

namespace mobs::stats {

std::uint64_t mc_seed(std::uint64_t master_seed, std::size_t realization, std::size_t case_index) {
    return derive_seed(derive_seed(master_seed, SeedStream::mc_perception, realization), 0,
                       case_index);
}

namespace {

std::size_t realizations_for(const FeatureRequest& request) {
    if (request.method == percept::Method::mc) return std::max<std::size_t>(1, request.n_realizations);
    return 1;
}

void extract_one(const CaseSource& source, std::size_t i, const FeatureRequest& request,
                 const observer::LgChannelSet& channels, FeatureBank& bank) {
    const ImageStack stack = source(i);
    for (std::size_t r = 0; r < bank.size(); ++r) {
        if (!request.method) {
            bank[r][i] = observer::channelize_stack(stack, channels);
            continue;
        }
        const percept::PerceptMethod method{*request.method,
                                            mc_seed(request.master_seed, r, i)};
        bank[r][i] = observer::channelize_stack(
            percept::perceive(stack, method, request.vc, request.params), channels);
    }
}

FeatureBank empty_bank(std::size_t n_cases, const FeatureRequest& request) {
    return FeatureBank(realizations_for(request), std::vector<observer::StackFeatures>(n_cases));
}

}  // namespace

FeatureBank extract_features(const CaseSource& source, std::size_t n_cases,
                             const FeatureRequest& request, const observer::LgChannelSet& channels) {
    FeatureBank bank = empty_bank(n_cases, request);
    std::exception_ptr failure;
    const auto n = static_cast<long long>(n_cases);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) {
        try {
            extract_one(source, static_cast<std::size_t>(i), request, channels, bank);
        } catch (...) {
#pragma omp critical(mobs_feature_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return bank;
}

FeatureBank extract_features_serial(const CaseSource& source, std::size_t n_cases,
                                    const FeatureRequest& request,
                                    const observer::LgChannelSet& channels) {
    FeatureBank bank = empty_bank(n_cases, request);
    for (std::size_t i = 0; i < n_cases; ++i) extract_one(source, i, request, channels, bank);
    return bank;
}

CaseSplit split_cases(std::span<const Label> labels, std::uint64_t master_seed) {
    CaseSplit split;
    for (const Label label : {Label::signal_absent, Label::signal_present}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == label) members.push_back(i);
        }
        std::mt19937_64 rng(derive_seed(master_seed, SeedStream::split,
                                        static_cast<std::uint64_t>(label)));
        std::shuffle(members.begin(), members.end(), rng);
        const std::size_t half = members.size() / 2;
        split.test.insert(split.test.end(), members.begin(), members.begin() + half);
        split.train_pool.insert(split.train_pool.end(), members.begin() + half, members.end());
    }
    std::sort(split.test.begin(), split.test.end());
    std::sort(split.train_pool.begin(), split.train_pool.end());
    return split;
}

std::vector<Reader> make_readers(const FeatureBank& bank, std::span<const Label> labels,
                                 const observer::LgChannelSet& channels, std::uint64_t master_seed,
                                 const ReaderOptions& options) {
    if (options.n_readers == 0) throw ConfigError("observer.n_readers", "must be at least 1");
    if (!(options.train_fraction > 0.0 && options.train_fraction <= 1.0)) {
        throw ConfigError("observer.train_fraction", "must be in (0, 1]");
    }
    if (bank.empty()) throw DegenerateInputError("no feature realizations");
    for (const auto& realization : bank) {
        if (realization.size() != labels.size()) throw DimensionError("feature bank size mismatch");
    }
    const CaseSplit split = split_cases(labels, master_seed);

    std::vector<Reader> readers;
    for (std::size_t r = 0; r < options.n_readers; ++r) {
        const auto& features = bank[r % bank.size()];
        Reader reader;
        std::mt19937_64 rng(derive_seed(master_seed, SeedStream::reader_train, r));
        for (const Label label : {Label::signal_absent, Label::signal_present}) {
            std::vector<std::size_t> pool;
            for (std::size_t i : split.train_pool) {
                if (labels[i] == label) pool.push_back(i);
            }
            std::shuffle(pool.begin(), pool.end(), rng);
            const auto take = static_cast<std::size_t>(
                std::llround(options.train_fraction * static_cast<double>(pool.size())));
            if (take < 2) {
                throw DegenerateInputError("insufficient cases: each reader needs two training "
                                           "cases per class");
            }
            reader.train_cases.insert(reader.train_cases.end(), pool.begin(), pool.begin() + take);
        }
        std::sort(reader.train_cases.begin(), reader.train_cases.end());

        std::vector<observer::LabeledFeatures> training;
        for (std::size_t i : reader.train_cases) training.push_back({&features[i], labels[i]});
        reader.model = observer::train(training, channels, options.ridge_factor);
        reader.model.split_seed = master_seed;

        reader.scores.reader_id = r;
        for (std::size_t i : split.test) {
            reader.scores.scores.push_back(observer::score(reader.model, features[i]));
            reader.scores.labels.push_back(labels[i]);
        }
        readers.push_back(std::move(reader));
    }
    return readers;
}

std::vector<Reader> make_readers(std::span<const ImageStack> cases, std::size_t n_readers,
                                 std::uint64_t master_seed, const observer::LgChannelSet& channels,
                                 const std::optional<FeatureRequest>& perception,
                                 ReaderOptions options) {
    options.n_readers = n_readers;
    FeatureRequest request;
    if (perception) {
        request = *perception;
        request.n_realizations = n_readers;
    }
    const CaseSource source = [&](std::size_t i) { return cases[i]; };
    const FeatureBank bank = extract_features(source, cases.size(), request, channels);
    std::vector<Label> labels;
    for (const auto& c : cases) labels.push_back(c.label());
    return make_readers(bank, labels, channels, master_seed, options);
}

MrmcInput to_mrmc_input(const std::vector<Reader>& readers) {
    MrmcInput input;
    for (const auto& r : readers) input.readers.push_back(r.scores);
    return input;
}

}  // namespace mobs::stats
