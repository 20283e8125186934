#include "mobs/csf.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mobs/error.hpp"

namespace mobs::csf {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(name) + " must be positive and finite, got " +
                          std::to_string(v));
    }
}

void require_nonnegative(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(name) + " must be non-negative and finite, got " +
                          std::to_string(v));
    }
}

constexpr double pi = std::numbers::pi;

// sqrt(1 - exp(-x²)) evaluated without cancellation for small x.
double one_minus_f(double u, double u0) {
    const double x = u / u0;
    return std::sqrt(-std::expm1(-x * x));
}

}  // namespace

void BartenParams::validate() const {
    require_positive(k_crozier, "k_crozier");
    require_positive(eta, "eta");
    require_positive(phi0, "phi0");
    require_positive(x_max, "x_max");
    require_positive(n_max, "n_max");
    require_positive(t_int, "t_int");
    require_positive(p_photon, "p_photon");
    require_positive(sigma0, "sigma0");
    require_positive(c_ab, "c_ab");
    require_positive(u0, "u0");
    require_positive(n1, "n1");
    require_positive(n2, "n2");
    require_positive(tau10, "tau10");
    require_positive(tau20, "tau20");
}

void FieldGeometry::validate() const {
    require_positive(x0, "x0");
    require_positive(l_avg, "l_avg");
}

double pupil_diameter(double l_avg, double x0) {
    require_positive(l_avg, "l_avg");
    require_positive(x0, "x0");
    return 5.0 - 3.0 * std::tanh(0.4 * std::log(l_avg * x0 * x0 / (40.0 * 40.0)));
}

double retinal_illuminance(double l_avg, double d_pupil) {
    require_positive(l_avg, "l_avg");
    if (!(d_pupil > 0.0 && d_pupil < 9.0)) {
        throw DomainError("pupil diameter outside (0, 9) mm: " + std::to_string(d_pupil));
    }
    const double a = d_pupil / 9.7;
    const double b = d_pupil / 12.4;
    return pi * d_pupil * d_pupil * l_avg / 4.0 * (1.0 - a * a + b * b * b * b);
}

double optical_mtf(double u, double d_pupil, const BartenParams& params) {
    const double sigma = std::sqrt(params.sigma0 * params.sigma0 +
                                   (params.c_ab * d_pupil) * (params.c_ab * d_pupil)) / 60.0;
    const double x = pi * sigma * u;
    return std::exp(-2.0 * x * x);
}

double lateral_inhibition(double u, const BartenParams& params) {
    return 1.0 - one_minus_f(u, params.u0);
}

double temporal_filter(double w, double tau, double order) {
    const double x = 2.0 * pi * tau * w;
    return std::exp(-0.5 * order * std::log1p(x * x));
}

double tau1(double x0, double illuminance, const BartenParams& params) {
    const double d_field = 2.0 * x0 / std::sqrt(pi);
    return params.tau10 /
           (1.0 + 0.55 * std::log1p(std::pow(1.0 + d_field, 0.6) * illuminance / 3.5));
}

double tau2(double x0, double illuminance, const BartenParams& params) {
    const double d_field = 2.0 * x0 / std::sqrt(pi);
    return params.tau20 /
           (1.0 + 0.37 * std::log1p(std::pow(1.0 + d_field / 3.2, 5.0) * illuminance / 120.0));
}

CsfEvaluator::CsfEvaluator(FieldGeometry geom, BartenParams params)
    : geom_(geom), params_(params) {
    geom_.validate();
    params_.validate();
    pupil_ = pupil_diameter(geom_.l_avg, geom_.x0);
    illuminance_ = retinal_illuminance(geom_.l_avg, pupil_);
    tau1_ = tau1(geom_.x0, illuminance_, params_);
    tau2_ = tau2(geom_.x0, illuminance_, params_);
    photon_noise_ = 1.0 / (params_.eta * params_.p_photon * illuminance_);
    sigma_deg_ = std::sqrt(params_.sigma0 * params_.sigma0 +
                           (params_.c_ab * pupil_) * (params_.c_ab * pupil_)) / 60.0;
    inv_field_ = 1.0 / (geom_.x0 * geom_.x0) + 1.0 / (params_.x_max * params_.x_max);
}

double CsfEvaluator::operator()(double u, double w) const {
    require_nonnegative(u, "u");
    require_nonnegative(w, "w");
    return evaluate(u, w);
}

double CsfEvaluator::evaluate(double u, double w) const noexcept {
    const double x = pi * sigma_deg_ * u;
    const double mtf = std::exp(-2.0 * x * x);

    // 1 - H2·F = (1 - H2) + H2·(1 - F), both parts free of cancellation.
    const double a2 = 2.0 * pi * tau2_ * w;
    const double log_h2 = -0.5 * params_.n2 * std::log1p(a2 * a2);
    const double h2 = std::exp(log_h2);
    const double inhibition = -std::expm1(log_h2) + h2 * one_minus_f(u, params_.u0);
    if (inhibition <= 0.0) {
        // u = w = 0: the neural-noise term diverges and S vanishes.
        return 0.0;
    }
    const double h1 = temporal_filter(w, tau1_, params_.n1);
    const double band = h1 * inhibition;

    const double spatial =
        2.0 / params_.t_int * (inv_field_ + u * u / (params_.n_max * params_.n_max));
    const double noise = photon_noise_ + params_.phi0 / (band * band);
    return mtf / (params_.k_crozier * std::sqrt(spatial * noise));
}

double csf(double u, double w, const FieldGeometry& geom, const BartenParams& params) {
    return CsfEvaluator(geom, params)(u, w);
}

double detection_probability(double m, double s, double k_crozier) {
    require_nonnegative(m, "modulation");
    require_nonnegative(s, "sensitivity");
    require_positive(k_crozier, "k_crozier");
    return detection_probability_unchecked(m, s, k_crozier);
}

double detection_probability_unchecked(double m, double s, double k_crozier) noexcept {
    // ½(1 + erf(z/√2)) == ½·erfc(−z/√2); erfc keeps full relative accuracy in
    // the lower tail.
    const double z = k_crozier * (m * s - 1.0);
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

}  // namespace mobs::csf
