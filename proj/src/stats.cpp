#include "mobs/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "mobs/error.hpp"

namespace mobs::stats {

double auc(const CaseScores& cases) {
    if (cases.scores.size() != cases.labels.size()) {
        throw DimensionError("scores and labels differ in length");
    }
    const std::size_t n = cases.scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return cases.scores[a] < cases.scores[b]; });

    // Mid-ranks (doubled to stay integral) of the present cases.
    double rank_sum2 = 0.0;
    std::size_t n_present = 0;
    for (std::size_t lo = 0; lo < n;) {
        std::size_t hi = lo + 1;
        while (hi < n && cases.scores[order[hi]] == cases.scores[order[lo]]) ++hi;
        const double mid2 = static_cast<double>(lo + 1 + hi);  // 2 × mean rank of the run
        for (std::size_t k = lo; k < hi; ++k) {
            if (cases.labels[order[k]] == Label::signal_present) {
                rank_sum2 += mid2;
                ++n_present;
            }
        }
        lo = hi;
    }
    const std::size_t n_absent = n - n_present;
    if (n_present == 0 || n_absent == 0) {
        throw DegenerateInputError("AUC needs at least one case of each class");
    }
    const double np = static_cast<double>(n_present);
    const double u = rank_sum2 / 2.0 - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(n_absent));
}

namespace {

double psi(double absent, double present) {
    if (present > absent) return 1.0;
    if (present == absent) return 0.5;
    return 0.0;
}

}  // namespace

MrmcResult mrmc_one_shot(const MrmcInput& input) {
    if (input.readers.empty()) throw DegenerateInputError("MRMC needs at least one reader");
    const auto& labels = input.readers.front().labels;
    for (const auto& r : input.readers) {
        if (r.labels != labels || r.scores.size() != labels.size()) {
            throw DimensionError("readers must score the same, identically labeled cases");
        }
    }
    std::vector<std::size_t> absent, present;
    for (std::size_t c = 0; c < labels.size(); ++c) {
        (labels[c] == Label::signal_present ? present : absent).push_back(c);
    }
    const std::size_t nr = input.readers.size();
    const std::size_t n0 = absent.size();
    const std::size_t n1 = present.size();
    if (n0 == 0 || n1 == 0) throw DegenerateInputError("MRMC needs both classes");

    // Partial sums of the success matrix s[r][i][j].
    std::vector<double> sum_ri(nr * n0, 0.0), sum_rj(nr * n1, 0.0), sum_r(nr, 0.0);
    std::vector<double> sum_ij(n0 * n1, 0.0), sum_i(n0, 0.0), sum_j(n1, 0.0);
    std::vector<double> sq_ij(n0 * n1, 0.0);  // Σ_r s²
    double total = 0.0;
    for (std::size_t r = 0; r < nr; ++r) {
        const auto& sc = input.readers[r].scores;
        for (std::size_t i = 0; i < n0; ++i) {
            for (std::size_t j = 0; j < n1; ++j) {
                const double s = psi(sc[absent[i]], sc[present[j]]);
                sum_ri[r * n0 + i] += s;
                sum_rj[r * n1 + j] += s;
                sum_r[r] += s;
                sum_ij[i * n1 + j] += s;
                sq_ij[i * n1 + j] += s * s;
                sum_i[i] += s;
                sum_j[j] += s;
                total += s;
            }
        }
    }
    auto sum_sq = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0, [](double a, double x) { return a + x * x; });
    };
    // t[f]: sum of s·s' over index tuples equal wherever bit f is set.
    std::array<double, 8> t{};
    t[0b111] = std::accumulate(sq_ij.begin(), sq_ij.end(), 0.0);
    t[0b110] = sum_sq(sum_ri);
    t[0b101] = sum_sq(sum_rj);
    t[0b100] = sum_sq(sum_r);
    t[0b011] = sum_sq(sum_ij);
    t[0b010] = sum_sq(sum_i);
    t[0b001] = sum_sq(sum_j);
    t[0b000] = total * total;

    // Möbius inversion to sums over tuples that differ wherever bit f is clear.
    std::array<double, 8> exact{};
    for (unsigned f = 0; f < 8; ++f) {
        double acc = 0.0;
        for (unsigned g = 0; g < 8; ++g) {
            if ((g & f) != f) continue;
            const int extra = std::popcount(g) - std::popcount(f);
            acc += (extra % 2 ? -1.0 : 1.0) * t[g];
        }
        exact[f] = acc;
    }
    const double dims[3] = {static_cast<double>(n1), static_cast<double>(n0),
                            static_cast<double>(nr)};  // bit 0, 1, 2
    MrmcResult result;
    for (unsigned f = 0; f < 8; ++f) {
        double count = 1.0;
        for (int b = 0; b < 3; ++b) count *= (f >> b) & 1U ? dims[b] : dims[b] * (dims[b] - 1.0);
        result.moments[f] = count > 0.0 ? exact[f] / count : std::numeric_limits<double>::quiet_NaN();
    }

    result.auc_mean = total / (static_cast<double>(nr) * n0 * n1);
    for (std::size_t r = 0; r < nr; ++r) result.reader_aucs.push_back(sum_r[r] / (double(n0) * n1));

    double variance;
    if (nr >= 2) {
        variance = result.auc_mean * result.auc_mean - result.moments[0b000];
    } else {
        result.single_reader_fallback = true;
        variance = result.auc_mean * result.auc_mean - result.moments[0b100];
    }
    if (n0 < 2 || n1 < 2) variance = std::numeric_limits<double>::quiet_NaN();
    if (variance < 0.0) {
        result.variance_clamped = true;
        variance = 0.0;
    }
    result.auc_variance = variance;
    result.error_bar = 2.0 * std::sqrt(variance);
    if (result.auc_mean <= 0.0 || result.auc_mean >= 1.0) {
        result.d_prime_saturated = true;
        result.d_prime = result.auc_mean >= 1.0 ? std::numeric_limits<double>::infinity()
                                                : -std::numeric_limits<double>::infinity();
    } else {
        result.d_prime = d_prime(result.auc_mean);
    }
    return result;
}

double erfinv(double x) {
    if (!(x > -1.0 && x < 1.0)) {
        if (x == 1.0) return std::numeric_limits<double>::infinity();
        if (x == -1.0) return -std::numeric_limits<double>::infinity();
        throw DomainError("erfinv argument outside [-1, 1]");
    }
    // Single-precision rational approximation as the starting point.
    const double w0 = -std::log((1.0 - x) * (1.0 + x));
    double p;
    if (w0 < 5.0) {
        const double w = w0 - 2.5;
        p = 2.81022636e-08;
        p = 3.43273939e-07 + p * w;
        p = -3.5233877e-06 + p * w;
        p = -4.39150654e-06 + p * w;
        p = 0.00021858087 + p * w;
        p = -0.00125372503 + p * w;
        p = -0.00417768164 + p * w;
        p = 0.246640727 + p * w;
        p = 1.50140941 + p * w;
    } else {
        const double w = std::sqrt(w0) - 3.0;
        p = -0.000200214257;
        p = 0.000100950558 + p * w;
        p = 0.00134934322 + p * w;
        p = -0.00367342844 + p * w;
        p = 0.00573950773 + p * w;
        p = -0.0076224613 + p * w;
        p = 0.00943887047 + p * w;
        p = 1.00167406 + p * w;
        p = 2.83297682 + p * w;
    }
    double y = p * x;
    // Newton on erf(y) − x; erf′(y) = 2/√π·exp(−y²).
    for (int it = 0; it < 3; ++it) {
        const double err = std::erf(y) - x;
        y -= err / (2.0 / std::sqrt(std::numbers::pi) * std::exp(-y * y));
    }
    return y;
}

double d_prime(double auc_value) {
    if (!(auc_value > 0.0 && auc_value < 1.0)) {
        throw DomainError("d' saturates for AUC outside (0, 1)");
    }
    return 2.0 * erfinv(2.0 * auc_value - 1.0);
}

double d_prime_error_bar(double auc_value, double auc_error_bar) {
    if (!(auc_value > 0.0 && auc_value < 1.0)) return std::numeric_limits<double>::infinity();
    // d′ = √2·Φ⁻¹(AUC), so dd′/dAUC = √2 / φ(d′/√2).
    const double z = d_prime(auc_value) / std::numbers::sqrt2;
    const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return auc_error_bar * std::numbers::sqrt2 / density;
}

}  // namespace mobs::stats
