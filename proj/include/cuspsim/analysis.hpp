#pragma once
#include "cuspsim/lattice.hpp"

#include <optional>
#include <vector>

namespace cuspsim {

struct CuspReport {
    std::vector<double> cusp_times;
    std::vector<double> spacings;            ///< successive differences of cusp_times
    std::vector<double> tip_values;
    std::vector<double> envelope_residuals;  ///< |tip - (1 + sign cos(omega t))/2| per cusp
    std::vector<std::size_t> sample_indices;
    double threshold = 0.0;                  ///< second-difference magnitude cut actually used

    bool empty() const { return cusp_times.empty(); }
    double mean_spacing() const;
};

struct CuspDetectorOptions {
    /// Hits must exceed kappa times the median centred second-difference magnitude.
    double kappa = 5.0;
    /// Minimum sampling density relative to the expected period T.
    int min_samples_per_period = 40;
    /// Lag w of the second difference x[i+w] - 2x[i] + x[i-w], in samples.
    /// 0 picks round(samples_per_period / 8), which spans the rounding of
    /// finite-lattice cusps and averages out their fast ripple.
    int stride = 0;
    /// Hits closer than this fraction of T are merged, keeping the strongest.
    double suppression = 0.4;
    /// Refine each hit by intersecting lines fitted on either side instead of
    /// reporting the sample itself.
    bool refine = false;
    /// Envelope used to fill envelope_residuals: +1 for (1 + cos wt)/2, -1 for (1 - cos wt)/2.
    int envelope_sign = 1;
};

/**
 Cusp detector on a uniformly sampled series.
 With lag w, d[i] = x[i+w] - 2x[i] + x[i-w] is centred on its median (which
 removes the constant curvature of the smooth stretches), and a cusp is a
 sample where |d[i] - median| is a local maximum above
 max(kappa * median|d - median|, 1e-9 * max(1, max|x|)). A slope break turns
 into a triangle of half-width w peaked at the break, so hits stay within a
 sample of it. Samples closer than 2w to either end are ignored. Hits closer
 than suppression * T are merged, keeping the strongest. Returns an empty
 report (not an error) when nothing crosses the threshold. Throws
 ConfigError for non-uniform sampling or fewer than min_samples_per_period
 samples per T.
 */
CuspReport detect_cusps(const RealSeries& series, const IdealModelParams& params, CuspDetectorOptions opts = {});

/// Union of cusp times from several reports; times within `tolerance` collapse to the earliest.
std::vector<double> merge_cusp_times(const std::vector<CuspReport>& reports, double tolerance);

/// (1 + sign cos(omega t)) / 2
double cusp_envelope(const IdealModelParams& params, double t, int sign);

std::vector<double> envelope_residuals(const CuspReport& report, const IdealModelParams& params, int sign);

/// Max envelope residual over all cusps; throws ConfigError on an empty report.
double envelope_residual(const CuspReport& report, const IdealModelParams& params, int sign);

struct RoundingWidth {
    double width;          ///< full width at half maximum of |a - b| around the cusp
    double peak_deviation; ///< max |a - b| in the window
    double peak_time;
};

/**
 Size of the smoothing of one cusp: a is the finite-lattice series, b the
 sharp reference on the same grid. Looks at |t - centre| <= half_window and
 returns the FWHM of the deviation bump containing the largest |a - b|,
 with linear interpolation at the half-maximum crossings.
 */
RoundingWidth rounding_width(const RealSeries& a, const RealSeries& b, double centre, double half_window);

struct PeriodError {
    long period;
    double max_abs_error;
    double rms_error;
};

struct ComparisonReport {
    double max_abs_error = 0.0;
    double rms_error = 0.0;
    std::size_t samples = 0;
    std::vector<PeriodError> per_period; ///< filled when a period is supplied
};

/// |a - b| statistics on identical time grids (ConfigError otherwise).
ComparisonReport compare_series(const RealSeries& a, const RealSeries& b, std::optional<double> period = std::nullopt);

struct LinearFit {
    double slope;
    double intercept;
    double r_squared;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

} // namespace cuspsim
