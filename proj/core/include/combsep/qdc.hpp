#ifndef COMBSEP_QDC_HPP
#define COMBSEP_QDC_HPP

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace combsep
{
// Capacities are in nats per channel use.

// (1/2) ln(1 + s/n).
double shannon_capacity(double signal, double noise);

// Holevo limit of a single-mode bosonic channel:
// (1 + n) ln(1 + n) - n ln n, with the n == 0 limit equal to 0.
double fock_capacity(double n_bar);

// Mean photons spent on the entangled resource, (g + 1/g - 2)/4 with
// g = sqrt(v_x v_y).
double entanglement_photons(double v_x, double v_y);

// Powers maximizing sum (1/2) ln(1 + S_i/N_i) under sum S_i == total.
std::vector<double> water_fill(std::span<const double> noise, double total_power);

struct Allocation
{
    double s_x = 0.0;
    double s_y = 0.0;
};

struct DenseCodingConfig
{
    double v_x = 1.0;
    double v_y = 1.0;
    double n_bar = 0.0;
    // Unset means water-filled under n_bar = (S_x + S_y)/2 + n_epr.
    std::optional<Allocation> allocation;

    void validate() const;
};

struct CapacityResult
{
    double c_qdc = 0.0;
    double c_fock = 0.0;
    bool exceeds = false;
    Allocation allocation;
    double n_epr = 0.0;
};

// Throws std::invalid_argument when the entanglement alone exceeds n_bar or a
// given allocation overspends the budget.
CapacityResult qdc_capacity(const DenseCodingConfig &cfg);

struct ThresholdResult
{
    std::optional<double> db;  // empty: no crossing in (0, 15] dB
};

// Smallest symmetric entanglement level (dB) at which QDC beats the Fock
// limit: 0.1 dB scan for the first crossing, then bisection to 0.01 dB.
ThresholdResult threshold_entanglement(double n_bar);

inline constexpr double kThresholdMaxDb = 15.0;

// Variance after undoing a post-detection efficiency (visibility, photodiode
// efficiency, electronic noise folded into one factor).
double detection_corrected_variance(double measured_variance, double detection_efficiency);

struct Tone
{
    double frequency_hz = 0.0;
    double signal_power = 0.0;  // SNL units
};

struct TonePeak
{
    double frequency_hz = 0.0;
    double height_db = 0.0;  // above the noise floor
};

struct SpectrumBand
{
    double start_hz = 1e5;
    double stop_hz = 1e6;
    double step_hz = 1e3;
};

struct SpectrumTrace
{
    std::vector<double> frequency_hz;
    std::vector<double> db_re_snl;
    double floor_db = 0.0;
    double rbw_hz = 20e3;
    double vbw_hz = 50.0;
    std::vector<TonePeak> tones;
};

struct SpectrumPair
{
    SpectrumTrace amplitude_sum;
    SpectrumTrace phase_difference;
};

// Analytic decoded spectra: flat floor at 10 log10(v_eff) with each tone
// raised to 10 log10(v_eff + S) at its nearest grid bin.
SpectrumPair synthesize_spectrum(double v_eff, std::span<const Tone> tones, const SpectrumBand &band = {});

// Decoded SNR over the SNL-referenced classical channel: -10 log10(v_eff).
double decoded_snr_gain_db(double v_eff);

// CSV `frequency_hz,db_re_snl`.
void write_spectrum_csv(std::ostream &out, const SpectrumTrace &trace);

// CSV `v_x,v_y,c_qdc` over a square grid of variances. Points whose
// entanglement cost exceeds n_bar are skipped.
void write_capacity_contour_csv(std::ostream &out, std::span<const double> v_values, double n_bar);

} // namespace combsep

#endif // COMBSEP_QDC_HPP
