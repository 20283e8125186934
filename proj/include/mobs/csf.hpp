#pragma once

/// Barten spatiotemporal contrast sensitivity and the psychometric
/// detection probability built on top of it.
///
/// Units: spatial frequency in cycles/deg, temporal frequency in cycles/s,
/// luminance in cd/m², field size in degrees, pupil diameter in mm.
/// `sigma0` is in arcmin and `c_ab` in arcmin/mm; the 1/60 factor of the
/// line-spread width converts arcmin to degrees.

namespace mobs::csf {

struct BartenParams {
    double k_crozier = 3.0;
    double eta = 0.03;
    double phi0 = 3e-8;      // s·deg²
    double x_max = 12.0;     // deg
    double n_max = 15.0;     // cycles
    double t_int = 0.1;      // s
    double p_photon = 1.285e6;
    double sigma0 = 0.5;     // arcmin
    double c_ab = 0.08;      // arcmin/mm
    double u0 = 7.0;         // cycles/deg
    double n1 = 7.0;
    double n2 = 4.0;
    double tau10 = 0.032;    // s
    double tau20 = 0.018;    // s

    /// Throws DomainError unless every field is strictly positive and finite.
    void validate() const;
};

/// Apparent field size and its average luminance.
struct FieldGeometry {
    double x0;     // deg
    double l_avg;  // cd/m²

    void validate() const;
};

/// Pupil diameter in mm (Barten/Le Grand fit); in (2, 8).
double pupil_diameter(double l_avg, double x0);

/// Retinal illuminance in Trolands. Rejects pupil diameters outside (0, 9) mm
/// where the Stiles-Crawford polynomial stops being monotone.
double retinal_illuminance(double l_avg, double d_pupil);

// Sub-terms, exposed for testing.
double optical_mtf(double u, double d_pupil, const BartenParams& params = {});
double lateral_inhibition(double u, const BartenParams& params = {});
double temporal_filter(double w, double tau, double order);
double tau1(double x0, double illuminance, const BartenParams& params = {});
double tau2(double x0, double illuminance, const BartenParams& params = {});

/// Evaluates S(u, w) for one field geometry. The geometry-dependent terms
/// (pupil, illuminance, time constants) are computed once in the
/// constructor; `operator()` is then cheap and thread-safe.
class CsfEvaluator {
public:
    explicit CsfEvaluator(FieldGeometry geom, BartenParams params = {});

    /// u, w must be non-negative; throws DomainError otherwise.
    double operator()(double u, double w) const;

    /// Same as operator() without argument checks; for inner loops that
    /// already pass folded magnitudes.
    double evaluate(double u, double w) const noexcept;

    const BartenParams& params() const noexcept { return params_; }
    const FieldGeometry& geometry() const noexcept { return geom_; }
    double pupil() const noexcept { return pupil_; }
    double illuminance() const noexcept { return illuminance_; }

private:
    FieldGeometry geom_;
    BartenParams params_;
    double pupil_;
    double illuminance_;
    double tau1_;
    double tau2_;
    double photon_noise_;  // 1/(eta·p·E)
    double sigma_deg_;
    double inv_field_;     // 1/X0² + 1/Xmax²
};

/// Convenience wrapper: builds an evaluator and evaluates a single point.
double csf(double u, double w, const FieldGeometry& geom, const BartenParams& params = {});

/// z = k(m·S − 1), p = ½ + ½·erf(z/√2). Throws DomainError for negative or
/// non-finite m or s.
double detection_probability(double m, double s, double k_crozier = 3.0);

/// Unchecked variant used by the perception kernels.
double detection_probability_unchecked(double m, double s, double k_crozier) noexcept;

}  // namespace mobs::csf
