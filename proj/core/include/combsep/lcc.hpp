#ifndef COMBSEP_LCC_HPP
#define COMBSEP_LCC_HPP

#include "combsep/cavity.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace combsep
{
struct Peak
{
    std::size_t index = 0;  // grid index in the source trace
    double frequency_hz = 0.0;
    double amplitude = 0.0;
};

struct PeakSet
{
    std::vector<Peak> peaks;
    FrequencyGrid source_grid;
};

// Strict 3-point local maxima with amplitude >= prominence_floor * max(trace),
// sorted by frequency. A flat-topped run counts once, at its leftmost point,
// when both its neighbours are lower. Grid endpoints are never peaks.
PeakSet detect_peaks(const AmplitudeTrace &trace, double prominence_floor = 0.5);

enum class Correlation
{
    // Mean-removed Pearson coefficient, in [-1, 1].
    centered,
    // sum(XY)/sqrt(sum(X^2) sum(Y^2)); in [0, 1] for non-negative data.
    uncentered,
};

std::string_view to_string(Correlation c);
Correlation correlation_from_string(std::string_view name);

// Normalized correlation of two equal-length windows. Throws
// std::invalid_argument on length mismatch, n < 2, or a window with zero
// norm (zero variance for the centered form).
double correlate_window(std::span<const double> x, std::span<const double> y,
                        Correlation kind = Correlation::centered);

enum class WindowDefinition
{
    fraction_of_fsr,
    absolute,
};

struct WindowConfig
{
    double width_hz = 0.0;
    WindowDefinition definition = WindowDefinition::absolute;
    double fsr_fraction = 0.0;  // meaningful for fraction_of_fsr
    // Lag search in grid steps; 0 scores only the co-located windows.
    int max_lag_steps = 0;
    Correlation correlation = Correlation::centered;

    static WindowConfig fraction_of(double opo_fsr_hz, double fraction);
    static WindowConfig absolute_width(double width_hz);

    // Allowed widths are [0.2, 1.0] x OPO linewidth.
    bool within_linewidth_bounds(double opo_linewidth_hz) const;
    WindowConfig clamped(double opo_linewidth_hz) const;
};

inline constexpr double kWindowMinLinewidths = 0.2;
inline constexpr double kWindowMaxLinewidths = 1.0;

struct OverlapScore
{
    std::size_t peak_index = 0;
    double center_hz = 0.0;
    double r = 0.0;
    int lag_steps = 0;       // lag at which r was attained
    bool truncated = false;  // window clipped by the grid boundary
    bool degenerate = false; // a window had zero variance; r reported as 0
};

// Linear interpolation of the trace at f; clamps to the end values outside
// the grid.
double interpolate(const AmplitudeTrace &trace, double f_hz);

// Scores every OPO peak: both traces are cut to the window around the peak,
// the RFC window is linearly interpolated onto the OPO window's grid points,
// and the best correlation over the configured lags is kept. Output is in
// peak-frequency order regardless of `threads`.
std::vector<OverlapScore> lcc_overlap(const AmplitudeTrace &opo, const AmplitudeTrace &rfc,
                                      const WindowConfig &window, double prominence_floor = 0.5,
                                      unsigned threads = 1);

// CSV `peak_index,center_hz,R`.
void write_overlap_csv(std::ostream &out, const std::vector<OverlapScore> &scores);

} // namespace combsep

#endif // COMBSEP_LCC_HPP
