#include "combsep/lcc.hpp"
#include "combsep/format.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace combsep
{
namespace
{
constexpr double kIndexSlack = 1e-9;

struct WindowSpan
{
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
    bool truncated = false;
};

WindowSpan window_span(const FrequencyGrid &grid, double center_hz, double width_hz)
{
    const double lo = std::ceil(grid.position(center_hz - 0.5 * width_hz) - kIndexSlack);
    const double hi = std::floor(grid.position(center_hz + 0.5 * width_hz) + kIndexSlack);
    const double last = static_cast<double>(grid.size() - 1);
    WindowSpan span;
    span.truncated = lo < 0.0 || hi > last;
    const double clo = std::clamp(lo, 0.0, last);
    const double chi = std::clamp(hi, 0.0, last);
    span.begin = static_cast<std::size_t>(clo);
    span.end = chi >= clo ? static_cast<std::size_t>(chi) + 1 : span.begin;
    return span;
}
} // namespace

PeakSet detect_peaks(const AmplitudeTrace &trace, double prominence_floor)
{
    if (trace.values.empty())
        throw std::invalid_argument("detect_peaks: empty trace");
    if (trace.values.size() != trace.grid.size())
        throw std::invalid_argument("detect_peaks: trace length does not match its grid");
    if (!(prominence_floor > 0.0 && prominence_floor < 1.0))
        throw std::invalid_argument("detect_peaks: prominence floor must be in (0, 1)");

    PeakSet set;
    set.source_grid = trace.grid;
    const auto &v = trace.values;
    const double top = *std::max_element(v.begin(), v.end());
    if (!(top > 0.0))
        return set;
    const double threshold = prominence_floor * top;

    const std::size_t n = v.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (!(v[i] > v[i - 1])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && v[j + 1] == v[i])
            ++j;
        if (j + 1 < n && v[j + 1] < v[i] && v[i] >= threshold)
            set.peaks.push_back({i, trace.frequency(i), v[i]});
        i = j + 1;
    }
    return set;
}

std::string_view to_string(Correlation c)
{
    return c == Correlation::centered ? "centered" : "uncentered";
}

Correlation correlation_from_string(std::string_view name)
{
    if (name == "centered")
        return Correlation::centered;
    if (name == "uncentered")
        return Correlation::uncentered;
    throw std::invalid_argument("unknown correlation kind '" + std::string(name) + "'");
}

double correlate_window(std::span<const double> x, std::span<const double> y, Correlation kind)
{
    if (x.size() != y.size())
        throw std::invalid_argument("correlate_window: windows differ in length");
    const std::size_t n = x.size();
    if (n < 2)
        throw std::invalid_argument("correlate_window: need at least two samples");

    double mx = 0.0;
    double my = 0.0;
    if (kind == Correlation::centered) {
        for (std::size_t i = 0; i < n; ++i) {
            mx += x[i];
            my += y[i];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
    }
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = x[i] - mx;
        const double b = y[i] - my;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        throw std::invalid_argument("correlate_window: zero-norm window, correlation undefined");
    const double r = sxy / (std::sqrt(sxx) * std::sqrt(syy));
    return std::clamp(r, -1.0, 1.0);
}

WindowConfig WindowConfig::fraction_of(double opo_fsr_hz, double fraction)
{
    if (!(opo_fsr_hz > 0.0) || !(fraction > 0.0))
        throw std::invalid_argument("window fraction and fsr must be positive");
    WindowConfig w;
    w.definition = WindowDefinition::fraction_of_fsr;
    w.fsr_fraction = fraction;
    w.width_hz = fraction * opo_fsr_hz;
    return w;
}

WindowConfig WindowConfig::absolute_width(double width_hz)
{
    if (!(width_hz > 0.0))
        throw std::invalid_argument("window width must be positive");
    WindowConfig w;
    w.width_hz = width_hz;
    return w;
}

bool WindowConfig::within_linewidth_bounds(double opo_linewidth_hz) const
{
    return width_hz >= kWindowMinLinewidths * opo_linewidth_hz &&
           width_hz <= kWindowMaxLinewidths * opo_linewidth_hz;
}

WindowConfig WindowConfig::clamped(double opo_linewidth_hz) const
{
    WindowConfig w = *this;
    w.width_hz = std::clamp(width_hz, kWindowMinLinewidths * opo_linewidth_hz,
                            kWindowMaxLinewidths * opo_linewidth_hz);
    return w;
}

double interpolate(const AmplitudeTrace &trace, double f_hz)
{
    const auto &v = trace.values;
    const double p = trace.grid.position(f_hz);
    const double last = static_cast<double>(v.size() - 1);
    if (!(p > 0.0))
        return v.front();
    if (p >= last)
        return v.back();
    const double base = std::floor(p);
    const auto i = static_cast<std::size_t>(base);
    const double frac = p - base;
    if (frac == 0.0)
        return v[i];
    return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

std::vector<OverlapScore> lcc_overlap(const AmplitudeTrace &opo, const AmplitudeTrace &rfc,
                                      const WindowConfig &window, double prominence_floor,
                                      unsigned threads)
{
    if (!(window.width_hz > 0.0))
        throw std::invalid_argument("lcc_overlap: window width must be positive");
    if (window.max_lag_steps < 0)
        throw std::invalid_argument("lcc_overlap: max_lag_steps must be non-negative");
    if (rfc.values.empty() || rfc.values.size() != rfc.grid.size())
        throw std::invalid_argument("lcc_overlap: malformed RFC trace");

    const PeakSet peaks = detect_peaks(opo, prominence_floor);
    std::vector<OverlapScore> scores(peaks.peaks.size());
    const bool shared_grid = opo.grid == rfc.grid;
    const double step = opo.grid.step();

    detail::parallel_chunks(scores.size(), threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> x;
        std::vector<double> y;
        for (std::size_t p = begin; p < end; ++p) {
            const Peak &peak = peaks.peaks[p];
            OverlapScore &score = scores[p];
            score.peak_index = p;
            score.center_hz = peak.frequency_hz;

            const WindowSpan span = window_span(opo.grid, peak.frequency_hz, window.width_hz);
            score.truncated = span.truncated;
            x.assign(opo.values.begin() + static_cast<std::ptrdiff_t>(span.begin),
                     opo.values.begin() + static_cast<std::ptrdiff_t>(span.end));
            y.resize(x.size());

            double best = -std::numeric_limits<double>::infinity();
            bool any = false;
            for (int lag = -window.max_lag_steps; lag <= window.max_lag_steps; ++lag) {
                for (std::size_t k = 0; k < x.size(); ++k) {
                    const auto idx = static_cast<std::ptrdiff_t>(span.begin + k) + lag;
                    if (shared_grid && idx >= 0 && idx < static_cast<std::ptrdiff_t>(rfc.values.size()))
                        y[k] = rfc.values[static_cast<std::size_t>(idx)];
                    else
                        y[k] = interpolate(rfc, opo.grid.at(span.begin + k) + lag * step);
                }
                try {
                    const double r = correlate_window(x, y, window.correlation);
                    if (r > best) {
                        best = r;
                        score.lag_steps = lag;
                    }
                    any = true;
                } catch (const std::invalid_argument &) {
                    // zero variance at this lag; try the others
                }
            }
            score.degenerate = !any;
            score.r = any ? best : 0.0;
        }
    });
    return scores;
}

void write_overlap_csv(std::ostream &out, const std::vector<OverlapScore> &scores)
{
    out << "peak_index,center_hz,R\n";
    for (const auto &s : scores)
        out << s.peak_index << ',' << format_double(s.center_hz) << ',' << format_double(s.r) << '\n';
}

} // namespace combsep
