#ifndef COMBSEP_CAVITY_HPP
#define COMBSEP_CAVITY_HPP

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace combsep
{
// Two-coupler optical resonator. All frequencies are in Hz and measured as
// offsets from the half-pump carrier.
//
// Round-trip loss is folded into the output-side amplitude reflectance, so a
// lossy cavity keeps the two-mirror transfer function form while its
// on-resonance transmission drops below one.
struct CavitySpec
{
    double fsr_hz = 0.0;
    double t_in = 0.0;             // input coupler power transmissivity
    double t_out = 0.0;            // output coupler power transmissivity
    double round_trip_loss = 0.0;  // excess power loss per round trip

    // Throws std::invalid_argument when the invariants do not hold.
    void validate() const;

    double r1() const;
    double r2() const;
    double r1r2() const { return r1() * r2(); }

    // pi*sqrt(r1 r2)/(1 - r1 r2). Zero when r1 r2 == 0.
    double finesse() const;

    // fsr / finesse. Throws std::domain_error for a cavity without feedback
    // (r1 r2 == 0), where the resonance has no width.
    double linewidth() const;

    // Impedance-matched lossless cavity (t_in == t_out) whose analytic
    // linewidth equals the requested value.
    static CavitySpec symmetric_for_linewidth(double fsr_hz, double linewidth_hz);
};

// Complex field transmission t(f) of the cavity at offset f from resonance.
std::complex<double> transfer_amplitude(const CavitySpec &cavity, double f_hz);

// Two-port reflection complement of transfer_amplitude; |t|^2 + |r|^2 == 1
// for a lossless cavity.
std::complex<double> reflection_amplitude(const CavitySpec &cavity, double f_hz);

// |t(f)| in closed form (no complex division). Used for bulk trace sampling.
double transmission_magnitude(const CavitySpec &cavity, double f_hz);

double cavity_linewidth(const CavitySpec &cavity);

// FWHM of |t(f)|^2 located numerically by bisection on the half-power point.
double measured_fwhm(const CavitySpec &cavity);

// Uniform grid start, start + step, ... up to stop (inclusive when it lands
// on a grid point).
class FrequencyGrid
{
public:
    FrequencyGrid() = default;
    FrequencyGrid(double start_hz, double stop_hz, double step_hz);

    double start() const { return start_; }
    double stop() const { return stop_; }
    double step() const { return step_; }
    std::size_t size() const { return size_; }

    double at(std::size_t i) const { return start_ + static_cast<double>(i) * step_; }

    // Fractional grid coordinate of f, (f - start)/step.
    double position(double f_hz) const { return (f_hz - start_) / step_; }

    bool operator==(const FrequencyGrid &other) const = default;

private:
    double start_ = 0.0;
    double stop_ = 1.0;
    double step_ = 1.0;
    std::size_t size_ = 2;
};

struct AmplitudeTrace
{
    FrequencyGrid grid;
    std::vector<double> values;
    // Set when the grid step exceeds a quarter linewidth of the sampled
    // cavity, so resonance peaks may fall between grid points.
    bool coarse_warning = false;

    double frequency(std::size_t i) const { return grid.at(i); }
};

// Samples |t(f - detune)| over the grid. Work is split into contiguous
// chunks across `threads` workers; each element is computed independently
// so the result does not depend on the thread count.
AmplitudeTrace sample_comb_response(const CavitySpec &cavity, const FrequencyGrid &grid,
                                    double detune_hz = 0.0, unsigned threads = 1);

// Writes `frequency_hz,amplitude` rows with 17 significant digits. `stride`
// keeps every stride-th grid point.
void write_trace_csv(std::ostream &out, const AmplitudeTrace &trace, std::size_t stride = 1);

struct SidebandOrder
{
    int n = 0;
    double upper_hz = 0.0;
    double lower_hz = 0.0;

    double separation_hz() const { return upper_hz - lower_hz; }
};

// EPR sideband pairs at +-n * opo_fsr inside the modulator bandwidth.
struct SidebandComb
{
    double opo_fsr_hz = 0.0;
    double max_offset_hz = 0.0;

    int order_count() const;
    int tooth_count() const { return 2 * order_count(); }
};

std::vector<SidebandOrder> enumerate_orders(const SidebandComb &comb);

} // namespace combsep

#endif // COMBSEP_CAVITY_HPP
