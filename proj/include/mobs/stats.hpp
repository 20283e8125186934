#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mobs/stack.hpp"

namespace mobs::stats {

struct CaseScores {
    std::vector<double> scores;
    std::vector<Label> labels;
    std::size_t reader_id = 0;
};

/// Mann-Whitney AUC with ψ = 1 (present > absent), ½ (tie), 0 otherwise.
/// Throws DegenerateInputError when a class is empty.
double auc(const CaseScores& scores);

/// Readers scored over one common, identically ordered case set.
struct MrmcInput {
    std::vector<CaseScores> readers;
};

struct MrmcResult {
    double auc_mean = 0.0;
    double auc_variance = 0.0;
    double error_bar = 0.0;  // 2·σ
    double d_prime = 0.0;    // ±inf when auc_mean is 0 or 1
    bool d_prime_saturated = false;
    /// Set when fewer than two readers were given: the variance is then the
    /// single-reader, case-only U-statistic variance.
    bool single_reader_fallback = false;
    /// Set when the unbiased variance estimate came out negative and was
    /// clamped to zero.
    bool variance_clamped = false;
    std::vector<double> reader_aucs;
    /// Success-outcome moments indexed by bitmask (bit 2: same reader,
    /// bit 1: same signal-absent case, bit 0: same signal-present case);
    /// unavailable moments are NaN.
    std::array<double, 8> moments{};
};

/// One-shot MRMC estimate of the variance of the reader-averaged AUC for a
/// fully-crossed design. Var = AUC² − μ̂₀₀₀ where μ̂₀₀₀ is the unbiased
/// estimate of E[s_r(i,j)·s_r'(i',j')] over distinct readers and cases.
MrmcResult mrmc_one_shot(const MrmcInput& input);

/// d′ = 2·erf⁻¹(2·AUC − 1). Throws DomainError (saturation) for AUC ∉ (0, 1).
double d_prime(double auc);

/// Delta-method half-width of d′ for an AUC half-width.
double d_prime_error_bar(double auc, double auc_error_bar);

/// Inverse error function on (−1, 1), accurate to ~1e−15 after Newton
/// refinement.
double erfinv(double x);

}  // namespace mobs::stats
