#include "cuspsim/analysis.hpp"
#include "cuspsim/errors.hpp"
#include "cuspsim/ideal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cuspsim {

double CuspReport::mean_spacing() const {
    if (spacings.empty()) return 0.0;
    return (cusp_times.back() - cusp_times.front()) / static_cast<double>(spacings.size());
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

// Intersection of the line through samples (i-2, i-1) with the line through (i+1, i+2).
std::pair<double, double> refine_hit(const RealSeries& s, std::size_t i) {
    const auto& t = s.times;
    const auto& x = s.values;
    if (i < 2 || i + 2 >= t.size()) return {t[i], x[i]};
    const double left_slope = (x[i - 1] - x[i - 2]) / (t[i - 1] - t[i - 2]);
    const double right_slope = (x[i + 2] - x[i + 1]) / (t[i + 2] - t[i + 1]);
    const double dslope = left_slope - right_slope;
    if (std::abs(dslope) < 1e-300) return {t[i], x[i]};
    // x[i-1] + ls (t - t[i-1]) = x[i+1] + rs (t - t[i+1])
    double tc = (x[i + 1] - x[i - 1] + left_slope * t[i - 1] - right_slope * t[i + 1]) / dslope;
    tc = std::clamp(tc, t[i - 1], t[i + 1]);
    return {tc, x[i - 1] + left_slope * (tc - t[i - 1])};
}

} // namespace

CuspReport detect_cusps(const RealSeries& series, const IdealModelParams& params, CuspDetectorOptions opts) {
    validate_series(series);
    if (!(opts.kappa > 0.0)) throw ConfigError("kappa must be positive");
    CuspReport report;
    const std::size_t n = series.size();
    if (n < 3) return report;

    const double dt = (series.times.back() - series.times.front()) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        const double step = series.times[i] - series.times[i - 1];
        if (std::abs(step - dt) > 1e-6 * dt) throw ConfigError("cusp detection needs uniform sampling");
    }
    const double per_period = params.heisenberg_time / dt;
    if (per_period + 1e-9 < opts.min_samples_per_period) {
        throw ConfigError("cusp detection needs >= " + std::to_string(opts.min_samples_per_period) +
                          " samples per period, got " + std::to_string(per_period));
    }

    if (opts.stride < 0) throw ConfigError("stride must be >= 0");
    if (!(opts.suppression > 0.0 && opts.suppression < 0.5)) throw ConfigError("suppression must lie in (0, 0.5)");
    const std::size_t w = opts.stride > 0 ? static_cast<std::size_t>(opts.stride)
                                          : static_cast<std::size_t>(std::max(1.0, std::round(per_period / 8.0)));
    if (n <= 4 * w + 2) return report;

    const auto& x = series.values;
    std::vector<double> d2(n, 0.0);
    for (std::size_t i = w; i + w < n; ++i) d2[i] = x[i + w] - 2.0 * x[i] + x[i - w];
    const double centre = median_of(std::vector<double>(d2.begin() + w, d2.end() - w));
    std::vector<double> mag(n, 0.0);
    for (std::size_t i = w; i + w < n; ++i) mag[i] = std::abs(d2[i] - centre);

    const double scale = std::max(1.0, std::abs(*std::max_element(x.begin(), x.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    })));
    const double median = median_of(std::vector<double>(mag.begin() + w, mag.end() - w));
    report.threshold = std::max(opts.kappa * median, 1e-9 * scale);

    std::vector<std::size_t> hits;
    for (std::size_t i = 2 * w; i + 2 * w < n; ++i) {
        if (mag[i] <= report.threshold) continue;
        // Plateaus resolve to their first sample.
        if (mag[i] > mag[i - 1] && mag[i] >= mag[i + 1]) hits.push_back(i);
    }

    // Strongest first; a hit survives if no stronger one lies within the radius.
    std::stable_sort(hits.begin(), hits.end(), [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });
    const double radius = opts.suppression * per_period;
    std::vector<std::size_t> kept;
    for (std::size_t h : hits) {
        const bool clear = std::none_of(kept.begin(), kept.end(), [&](std::size_t k) {
            return std::abs(static_cast<double>(h) - static_cast<double>(k)) <= radius;
        });
        if (clear) kept.push_back(h);
    }
    std::sort(kept.begin(), kept.end());

    for (std::size_t i : kept) {
        report.sample_indices.push_back(i);
        if (opts.refine) {
            const auto [tc, xc] = refine_hit(series, i);
            report.cusp_times.push_back(tc);
            report.tip_values.push_back(xc);
        } else {
            report.cusp_times.push_back(series.times[i]);
            report.tip_values.push_back(x[i]);
        }
    }
    for (std::size_t i = 1; i < report.cusp_times.size(); ++i) {
        report.spacings.push_back(report.cusp_times[i] - report.cusp_times[i - 1]);
    }
    report.envelope_residuals = envelope_residuals(report, params, opts.envelope_sign);
    return report;
}

std::vector<double> merge_cusp_times(const std::vector<CuspReport>& reports, double tolerance) {
    std::vector<double> all;
    for (const auto& r : reports) all.insert(all.end(), r.cusp_times.begin(), r.cusp_times.end());
    std::sort(all.begin(), all.end());
    std::vector<double> merged;
    for (double t : all) {
        if (merged.empty() || t - merged.back() > tolerance) merged.push_back(t);
    }
    return merged;
}

double cusp_envelope(const IdealModelParams& params, double t, int sign) {
    if (sign != 1 && sign != -1) throw ConfigError("envelope sign must be +1 or -1");
    return 0.5 * (1.0 + sign * std::cos(params.omega * t));
}

std::vector<double> envelope_residuals(const CuspReport& report, const IdealModelParams& params, int sign) {
    std::vector<double> out;
    out.reserve(report.cusp_times.size());
    for (std::size_t i = 0; i < report.cusp_times.size(); ++i) {
        out.push_back(std::abs(report.tip_values[i] - cusp_envelope(params, report.cusp_times[i], sign)));
    }
    return out;
}

double envelope_residual(const CuspReport& report, const IdealModelParams& params, int sign) {
    if (report.empty()) throw ConfigError("envelope residual of an empty cusp report");
    const auto r = envelope_residuals(report, params, sign);
    return *std::max_element(r.begin(), r.end());
}

RoundingWidth rounding_width(const RealSeries& a, const RealSeries& b, double centre, double half_window) {
    validate_series(a);
    validate_series(b);
    if (a.size() != b.size()) throw ConfigError("rounding width: series lengths differ");
    if (!(half_window > 0.0)) throw ConfigError("rounding width: half window must be positive");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a.times[i] - centre) <= half_window) idx.push_back(i);
    }
    if (idx.size() < 3) throw ConfigError("rounding width: fewer than 3 samples in the window");
    std::vector<double> dev(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) dev[k] = std::abs(a.values[idx[k]] - b.values[idx[k]]);
    const std::size_t peak = static_cast<std::size_t>(std::max_element(dev.begin(), dev.end()) - dev.begin());
    const double half = 0.5 * dev[peak];
    auto time_at = [&](std::size_t k) { return a.times[idx[k]]; };
    auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double f = (dev[inside] - half) / (dev[inside] - dev[outside]);
        return time_at(inside) + f * (time_at(outside) - time_at(inside));
    };
    std::size_t lo = peak;
    while (lo > 0 && dev[lo - 1] >= half) --lo;
    std::size_t hi = peak;
    while (hi + 1 < dev.size() && dev[hi + 1] >= half) ++hi;
    const double left = lo > 0 ? crossing(lo, lo - 1) : time_at(0);
    const double right = hi + 1 < dev.size() ? crossing(hi, hi + 1) : time_at(dev.size() - 1);
    return {right - left, dev[peak], time_at(peak)};
}

ComparisonReport compare_series(const RealSeries& a, const RealSeries& b, std::optional<double> period) {
    validate_series(a);
    validate_series(b);
    if (a.size() != b.size()) throw ConfigError("compare: series lengths differ");
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double tol = 1e-12 * std::max(1.0, std::abs(a.times[i]));
        if (std::abs(a.times[i] - b.times[i]) > tol) throw ConfigError("compare: time grids differ");
    }
    if (period && !(*period > 0.0)) throw ConfigError("compare: period must be positive");

    ComparisonReport out;
    out.samples = a.size();
    double sum_sq = 0.0;
    std::vector<PeriodError> buckets;
    std::vector<double> bucket_sq;
    std::vector<std::size_t> bucket_count;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = std::abs(a.values[i] - b.values[i]);
        out.max_abs_error = std::max(out.max_abs_error, e);
        sum_sq += e * e;
        if (period) {
            const long r = decompose_period(a.times[i], *period).r;
            if (buckets.empty() || buckets.back().period != r) {
                buckets.push_back({r, 0.0, 0.0});
                bucket_sq.push_back(0.0);
                bucket_count.push_back(0);
            }
            buckets.back().max_abs_error = std::max(buckets.back().max_abs_error, e);
            bucket_sq.back() += e * e;
            ++bucket_count.back();
        }
    }
    if (out.samples > 0) out.rms_error = std::sqrt(sum_sq / static_cast<double>(out.samples));
    for (std::size_t k = 0; k < buckets.size(); ++k) {
        buckets[k].rms_error = std::sqrt(bucket_sq[k] / static_cast<double>(bucket_count[k]));
    }
    out.per_period = std::move(buckets);
    return out;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("linear fit needs >= 2 paired points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ConfigError("linear fit needs distinct x values");
    const double slope = sxy / sxx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (my + slope * (x[i] - mx));
        ss_res += r * r;
    }
    const double r2 = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
    return {slope, my - slope * mx, r2};
}

} // namespace cuspsim
