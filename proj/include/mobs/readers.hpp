#pragma once

/// Virtual readers: independently trained msCHO instances scoring one common
/// held-out case set, plus the batched perceive→channelize feature pass that
/// feeds them.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mobs/csf.hpp"
#include "mobs/observer.hpp"
#include "mobs/percept.hpp"
#include "mobs/stats.hpp"

namespace mobs::stats {

/// Returns case i, ready for display (already normalized). Must be safe to
/// call concurrently.
using CaseSource = std::function<ImageStack(std::size_t)>;

/// features[realization][case]. LF and PM produce one realization shared by
/// all readers; MC produces one per reader, each with its own seeds.
using FeatureBank = std::vector<std::vector<observer::StackFeatures>>;

struct FeatureRequest {
    std::optional<percept::Method> method;  // nullopt: channelize the stacks as given
    ViewingConditions vc;
    csf::BartenParams params;
    std::size_t n_realizations = 1;
    std::uint64_t master_seed = 0;
};

/// MC seed of (realization, case): derive_seed(derive_seed(master,
/// mc_perception, realization), 0, case).
std::uint64_t mc_seed(std::uint64_t master_seed, std::size_t realization, std::size_t case_index);

/// Parallel over cases (OpenMP). Output is independent of the schedule.
FeatureBank extract_features(const CaseSource& source, std::size_t n_cases,
                             const FeatureRequest& request, const observer::LgChannelSet& channels);
/// Serial reference of extract_features, kept for tests and benchmarks.
FeatureBank extract_features_serial(const CaseSource& source, std::size_t n_cases,
                                    const FeatureRequest& request,
                                    const observer::LgChannelSet& channels);

/// Fixed 50/50 split per class: `test` is shared by every reader, readers
/// draw their training sets from `train_pool`.
struct CaseSplit {
    std::vector<std::size_t> test;
    std::vector<std::size_t> train_pool;
};
CaseSplit split_cases(std::span<const Label> labels, std::uint64_t master_seed);

struct ReaderOptions {
    std::size_t n_readers = 4;
    /// Fraction of each class of the train pool drawn (without replacement)
    /// for every reader.
    double train_fraction = 0.8;
    double ridge_factor = observer::kDefaultRidgeFactor;
};

struct Reader {
    observer::ChoModel model;
    std::vector<std::size_t> train_cases;
    CaseScores scores;  // over CaseSplit::test, in that order
};

/// Trains the readers on feature realizations. Reader r uses
/// bank[r % bank.size()].
std::vector<Reader> make_readers(const FeatureBank& bank, std::span<const Label> labels,
                                 const observer::LgChannelSet& channels, std::uint64_t master_seed,
                                 const ReaderOptions& options = {});

/// Convenience form over in-memory, display-normalized stacks. With
/// `perception` set, stacks are perceived first (per reader for MC).
std::vector<Reader> make_readers(std::span<const ImageStack> cases, std::size_t n_readers,
                                 std::uint64_t master_seed, const observer::LgChannelSet& channels,
                                 const std::optional<FeatureRequest>& perception = std::nullopt,
                                 ReaderOptions options = {});

MrmcInput to_mrmc_input(const std::vector<Reader>& readers);

}  // namespace mobs::stats
