#include "combsep/qdc.hpp"
#include "combsep/format.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace combsep
{
namespace
{
constexpr double kBudgetSlack = 1e-12;
constexpr double kScanStepDb = 0.1;
constexpr double kBisectionTolDb = 0.01;

double db_to_variance(double db) { return std::pow(10.0, -db / 10.0); }

bool exceeds_at(double db, double n_bar)
{
    const double v = db_to_variance(db);
    if (entanglement_photons(v, v) > n_bar)
        return false;
    return qdc_capacity({v, v, n_bar, std::nullopt}).exceeds;
}
} // namespace

double shannon_capacity(double signal, double noise)
{
    if (!(noise > 0.0))
        throw std::invalid_argument("shannon_capacity: noise power must be positive");
    if (!(signal >= 0.0))
        throw std::invalid_argument("shannon_capacity: signal power must be non-negative");
    return 0.5 * std::log1p(signal / noise);
}

double fock_capacity(double n_bar)
{
    if (!(n_bar >= 0.0))
        throw std::invalid_argument("fock_capacity: mean photon number must be non-negative");
    if (n_bar == 0.0)
        return 0.0;
    return (1.0 + n_bar) * std::log1p(n_bar) - n_bar * std::log(n_bar);
}

double entanglement_photons(double v_x, double v_y)
{
    if (!(v_x > 0.0) || !(v_y > 0.0))
        throw std::invalid_argument("entanglement_photons: variances must be positive");
    const double g = std::sqrt(v_x * v_y);
    return (g + 1.0 / g - 2.0) / 4.0;
}

std::vector<double> water_fill(std::span<const double> noise, double total_power)
{
    if (noise.empty())
        throw std::invalid_argument("water_fill: no channels");
    if (!(total_power >= 0.0))
        throw std::invalid_argument("water_fill: total power must be non-negative");
    for (double n : noise)
        if (!(n > 0.0))
            throw std::invalid_argument("water_fill: channel noise must be positive");

    std::vector<std::size_t> order(noise.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return noise[a] < noise[b]; });

    // Largest active set whose water level sits above every member's noise.
    double level = 0.0;
    double prefix = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        prefix += noise[order[k]];
        const double candidate = (total_power + prefix) / static_cast<double>(k + 1);
        if (k + 1 < order.size() && candidate <= noise[order[k + 1]]) {
            level = candidate;
            break;
        }
        level = candidate;
    }
    std::vector<double> power(noise.size());
    for (std::size_t i = 0; i < noise.size(); ++i)
        power[i] = std::max(0.0, level - noise[i]);
    return power;
}

void DenseCodingConfig::validate() const
{
    if (!(v_x > 0.0) || !(v_y > 0.0))
        throw std::invalid_argument("dense coding: variances must be positive");
    if (!(n_bar >= 0.0))
        throw std::invalid_argument("dense coding: n_bar must be non-negative");
    if (allocation && (!(allocation->s_x >= 0.0) || !(allocation->s_y >= 0.0)))
        throw std::invalid_argument("dense coding: signal powers must be non-negative");
}

CapacityResult qdc_capacity(const DenseCodingConfig &cfg)
{
    cfg.validate();
    CapacityResult out;
    out.n_epr = entanglement_photons(cfg.v_x, cfg.v_y);
    if (out.n_epr > cfg.n_bar + kBudgetSlack)
        throw std::invalid_argument("qdc_capacity: entanglement photons " + format_double(out.n_epr) +
                                    " exceed the budget n_bar = " + format_double(cfg.n_bar));
    const double signal_budget = 2.0 * std::max(0.0, cfg.n_bar - out.n_epr);

    if (cfg.allocation) {
        if ((cfg.allocation->s_x + cfg.allocation->s_y) > signal_budget * (1.0 + kBudgetSlack) + kBudgetSlack)
            throw std::invalid_argument("qdc_capacity: allocation exceeds the photon budget");
        out.allocation = *cfg.allocation;
    } else {
        const double noise[2] = {cfg.v_x, cfg.v_y};
        const auto p = water_fill(noise, signal_budget);
        out.allocation = {p[0], p[1]};
    }
    out.c_qdc = shannon_capacity(out.allocation.s_x, cfg.v_x) + shannon_capacity(out.allocation.s_y, cfg.v_y);
    out.c_fock = fock_capacity(cfg.n_bar);
    out.exceeds = out.c_qdc > out.c_fock;
    return out;
}

ThresholdResult threshold_entanglement(double n_bar)
{
    if (!(n_bar > 0.0))
        throw std::invalid_argument("threshold_entanglement: n_bar must be positive");
    const int steps = static_cast<int>(std::lround(kThresholdMaxDb / kScanStepDb));
    double lo = 0.0;
    double hi = -1.0;
    for (int k = 1; k <= steps; ++k) {
        const double db = k * kScanStepDb;
        if (exceeds_at(db, n_bar)) {
            hi = db;
            break;
        }
        lo = db;
    }
    if (hi < 0.0)
        return {};
    while (hi - lo > kBisectionTolDb) {
        const double mid = 0.5 * (lo + hi);
        (exceeds_at(mid, n_bar) ? hi : lo) = mid;
    }
    return {hi};
}

double detection_corrected_variance(double measured_variance, double detection_efficiency)
{
    if (!(detection_efficiency > 0.0 && detection_efficiency <= 1.0))
        throw std::invalid_argument("detection efficiency must be in (0, 1]");
    const double v = (measured_variance - (1.0 - detection_efficiency)) / detection_efficiency;
    if (!(v > 0.0))
        throw std::invalid_argument("detection correction yields a non-positive variance");
    return v;
}

double decoded_snr_gain_db(double v_eff)
{
    if (!(v_eff > 0.0))
        throw std::invalid_argument("decoded_snr_gain_db: variance must be positive");
    return -10.0 * std::log10(v_eff);
}

SpectrumPair synthesize_spectrum(double v_eff, std::span<const Tone> tones, const SpectrumBand &band)
{
    if (!(v_eff > 0.0))
        throw std::invalid_argument("synthesize_spectrum: variance must be positive");
    if (!(band.start_hz < band.stop_hz) || !(band.step_hz > 0.0))
        throw std::invalid_argument("synthesize_spectrum: invalid band");

    SpectrumTrace trace;
    trace.floor_db = 10.0 * std::log10(v_eff);
    const auto count =
        static_cast<std::size_t>(std::floor((band.stop_hz - band.start_hz) / band.step_hz * (1.0 + 1e-9))) + 1;
    trace.frequency_hz.resize(count);
    trace.db_re_snl.assign(count, trace.floor_db);
    for (std::size_t i = 0; i < count; ++i)
        trace.frequency_hz[i] = band.start_hz + static_cast<double>(i) * band.step_hz;

    for (const Tone &t : tones) {
        if (!(t.frequency_hz >= band.start_hz && t.frequency_hz <= band.stop_hz))
            throw std::invalid_argument("synthesize_spectrum: tone at " + format_double(t.frequency_hz) +
                                        " Hz lies outside the band");
        if (!(t.signal_power >= 0.0))
            throw std::invalid_argument("synthesize_spectrum: tone power must be non-negative");
        const auto bin = static_cast<std::size_t>(std::lround((t.frequency_hz - band.start_hz) / band.step_hz));
        const double level = 10.0 * std::log10(v_eff + t.signal_power);
        trace.db_re_snl[std::min(bin, count - 1)] = std::max(trace.db_re_snl[std::min(bin, count - 1)], level);
        trace.tones.push_back({t.frequency_hz, 10.0 * std::log10(1.0 + t.signal_power / v_eff)});
    }
    return {trace, trace};
}

void write_spectrum_csv(std::ostream &out, const SpectrumTrace &trace)
{
    out << "frequency_hz,db_re_snl\n";
    for (std::size_t i = 0; i < trace.frequency_hz.size(); ++i)
        out << format_double(trace.frequency_hz[i]) << ',' << format_double(trace.db_re_snl[i]) << '\n';
}

void write_capacity_contour_csv(std::ostream &out, std::span<const double> v_values, double n_bar)
{
    out << "v_x,v_y,c_qdc\n";
    for (double vx : v_values) {
        for (double vy : v_values) {
            if (entanglement_photons(vx, vy) > n_bar)
                continue;
            const auto res = qdc_capacity({vx, vy, n_bar, std::nullopt});
            out << format_double(vx) << ',' << format_double(vy) << ',' << format_double(res.c_qdc) << '\n';
        }
    }
}

} // namespace combsep
