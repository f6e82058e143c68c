#include "combsep/cavity.hpp"
#include "combsep/format.hpp"

#include "parallel.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace combsep
{
namespace
{
constexpr double kPi = std::numbers::pi;

// Grid sizes are computed from a floating ratio; allow for rounding when
// stop sits exactly on a grid point.
constexpr double kGridSlack = 1e-9;

double coupling_numerator(const CavitySpec &c)
{
    const double a = c.r1();
    const double b = c.r2();
    return std::sqrt((1.0 - a * a) * (1.0 - b * b));
}
} // namespace

std::string format_double(double value)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void CavitySpec::validate() const
{
    if (!(fsr_hz > 0.0) || !std::isfinite(fsr_hz))
        throw std::invalid_argument("cavity fsr must be positive, got " + format_double(fsr_hz));
    if (!(t_in > 0.0 && t_in <= 1.0))
        throw std::invalid_argument("cavity t_in must be in (0, 1], got " + format_double(t_in));
    if (!(t_out >= 0.0 && t_out <= 1.0))
        throw std::invalid_argument("cavity t_out must be in [0, 1], got " + format_double(t_out));
    if (!(round_trip_loss >= 0.0 && round_trip_loss < 1.0))
        throw std::invalid_argument("cavity round_trip_loss must be in [0, 1), got " +
                                    format_double(round_trip_loss));
    if (!(r1r2() < 1.0))
        throw std::invalid_argument("cavity r1*r2 must be below 1");
}

double CavitySpec::r1() const { return std::sqrt(1.0 - t_in); }

double CavitySpec::r2() const { return std::sqrt((1.0 - t_out) * (1.0 - round_trip_loss)); }

double CavitySpec::finesse() const
{
    const double g = r1r2();
    return kPi * std::sqrt(g) / (1.0 - g);
}

double CavitySpec::linewidth() const
{
    const double f = finesse();
    if (!(f > 0.0))
        throw std::domain_error("cavity has no resonance (r1*r2 == 0), linewidth undefined");
    return fsr_hz / f;
}

CavitySpec CavitySpec::symmetric_for_linewidth(double fsr_hz, double linewidth_hz)
{
    if (!(fsr_hz > 0.0) || !(linewidth_hz > 0.0))
        throw std::invalid_argument("fsr and linewidth must be positive");
    // pi*s/(1 - s^2) = F with s = sqrt(r1 r2); positive root of F s^2 + pi s - F.
    const double f = fsr_hz / linewidth_hz;
    const double s = (-kPi + std::sqrt(kPi * kPi + 4.0 * f * f)) / (2.0 * f);
    const double t = 1.0 - s * s;
    CavitySpec c{fsr_hz, t, t, 0.0};
    c.validate();
    return c;
}

std::complex<double> transfer_amplitude(const CavitySpec &cavity, double f_hz)
{
    const double g = cavity.r1r2();
    if (!(g < 1.0))
        throw std::invalid_argument("transfer_amplitude: r1*r2 >= 1 is unphysical");
    // e^{i pi f/fsr} has period 2*fsr; reducing first keeps large offsets exact.
    const double reduced = std::fmod(f_hz, 2.0 * cavity.fsr_hz);
    const std::complex<double> half = std::polar(1.0, kPi * reduced / cavity.fsr_hz);
    return coupling_numerator(cavity) * half / (1.0 - g * half * half);
}

std::complex<double> reflection_amplitude(const CavitySpec &cavity, double f_hz)
{
    const double g = cavity.r1r2();
    if (!(g < 1.0))
        throw std::invalid_argument("reflection_amplitude: r1*r2 >= 1 is unphysical");
    const double reduced = std::fmod(f_hz, cavity.fsr_hz);
    const std::complex<double> round_trip = std::polar(1.0, 2.0 * kPi * reduced / cavity.fsr_hz);
    return (cavity.r1() - cavity.r2() * round_trip) / (1.0 - g * round_trip);
}

double transmission_magnitude(const CavitySpec &cavity, double f_hz)
{
    const double g = cavity.r1r2();
    const double reduced = std::fmod(f_hz, cavity.fsr_hz);
    const double s = std::sin(kPi * reduced / cavity.fsr_hz);
    // |1 - g e^{i theta}|^2 = (1 - g)^2 + 4 g sin^2(theta/2)
    return coupling_numerator(cavity) / std::sqrt((1.0 - g) * (1.0 - g) + 4.0 * g * s * s);
}

double cavity_linewidth(const CavitySpec &cavity)
{
    cavity.validate();
    return cavity.linewidth();
}

double measured_fwhm(const CavitySpec &cavity)
{
    cavity.validate();
    const double peak = transmission_magnitude(cavity, 0.0);
    const double half_power = 0.5 * peak * peak;
    auto power = [&](double f) {
        const double a = transmission_magnitude(cavity, f);
        return a * a;
    };
    double lo = 0.0;
    double hi = 0.5 * cavity.fsr_hz;
    if (power(hi) > half_power)
        throw std::domain_error("measured_fwhm: resonance never drops to half power");
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        (power(mid) > half_power ? lo : hi) = mid;
    }
    return lo + hi;
}

FrequencyGrid::FrequencyGrid(double start_hz, double stop_hz, double step_hz)
    : start_(start_hz), stop_(stop_hz), step_(step_hz)
{
    if (!std::isfinite(start_hz) || !std::isfinite(stop_hz) || !std::isfinite(step_hz))
        throw std::invalid_argument("frequency grid bounds must be finite");
    if (!(start_hz < stop_hz))
        throw std::invalid_argument("frequency grid requires start < stop");
    if (!(step_hz > 0.0))
        throw std::invalid_argument("frequency grid requires step > 0");
    const double span = (stop_hz - start_hz) / step_hz;
    size_ = static_cast<std::size_t>(std::floor(span * (1.0 + kGridSlack))) + 1;
    if (size_ < 2)
        throw std::invalid_argument("frequency grid needs at least two points");
}

AmplitudeTrace sample_comb_response(const CavitySpec &cavity, const FrequencyGrid &grid,
                                    double detune_hz, unsigned threads)
{
    cavity.validate();
    AmplitudeTrace trace;
    trace.grid = grid;
    trace.values.resize(grid.size());
    const double lw = cavity.finesse() > 0.0 ? cavity.linewidth() : 0.0;
    trace.coarse_warning = lw > 0.0 && grid.step() > 0.25 * lw;

    double *out = trace.values.data();
    detail::parallel_chunks(grid.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out[i] = transmission_magnitude(cavity, grid.at(i) - detune_hz);
    });
    return trace;
}

void write_trace_csv(std::ostream &out, const AmplitudeTrace &trace, std::size_t stride)
{
    if (stride == 0)
        throw std::invalid_argument("write_trace_csv: stride must be positive");
    out << "frequency_hz,amplitude\n";
    std::string line;
    for (std::size_t i = 0; i < trace.values.size(); i += stride) {
        line.clear();
        line += format_double(trace.frequency(i));
        line += ',';
        line += format_double(trace.values[i]);
        line += '\n';
        out << line;
    }
}

int SidebandComb::order_count() const
{
    if (!(opo_fsr_hz > 0.0) || !(max_offset_hz >= 0.0))
        throw std::invalid_argument("sideband comb requires opo_fsr > 0 and max_offset >= 0");
    return static_cast<int>(std::floor(max_offset_hz / opo_fsr_hz));
}

std::vector<SidebandOrder> enumerate_orders(const SidebandComb &comb)
{
    const int count = comb.order_count();
    std::vector<SidebandOrder> orders;
    orders.reserve(static_cast<std::size_t>(count));
    for (int n = 1; n <= count; ++n) {
        const double offset = n * comb.opo_fsr_hz;
        orders.push_back({n, offset, -offset});
    }
    return orders;
}

} // namespace combsep
