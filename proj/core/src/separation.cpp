#include "combsep/separation.hpp"
#include "combsep/format.hpp"

#include "parallel.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace combsep
{
namespace
{
double power(std::complex<double> a) { return std::norm(a); }

// Correlation of the OPO response and a locked RFC over a window centred on
// `center_hz`, sampled every `step_hz` with a grid point on the centre.
double local_overlap(const CavitySpec &opo, const CavitySpec &rfc, double rfc_lock_hz,
                     double center_hz, const WindowConfig &window, double step_hz)
{
    const auto half = static_cast<long>(std::floor(0.5 * window.width_hz / step_hz + 1e-9));
    const std::size_t n = static_cast<std::size_t>(2 * half + 1);
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = center_hz + static_cast<double>(static_cast<long>(k) - half) * step_hz;
        x[k] = transmission_magnitude(opo, f);
        y[k] = transmission_magnitude(rfc, f - rfc_lock_hz);
    }
    try {
        return correlate_window(x, y, window.correlation);
    } catch (const std::invalid_argument &) {
        return 0.0;
    }
}

std::size_t candidate_count(const FsrSearch &search)
{
    if (!(search.start_hz > 0.0) || !(search.stop_hz >= search.start_hz))
        throw std::invalid_argument("optimize_fsr: empty or non-positive search interval");
    if (search.stop_hz == search.start_hz)
        return 1;
    if (!(search.step_hz > 0.0))
        throw std::invalid_argument("optimize_fsr: search step must be positive");
    const double span = (search.stop_hz - search.start_hz) / search.step_hz;
    return static_cast<std::size_t>(std::floor(span * (1.0 + 1e-9))) + 1;
}
} // namespace

double opposite_tooth_detuning(int order, double opo_fsr_hz, double rfc_fsr_hz)
{
    if (!(rfc_fsr_hz > 0.0))
        throw std::invalid_argument("opposite_tooth_detuning: rfc fsr must be positive");
    const double separation = 2.0 * order * opo_fsr_hz;
    const double m = std::fmod(std::fabs(separation), rfc_fsr_hz);
    return std::min(m, rfc_fsr_hz - m);
}

double cross_talk(int order, double opo_fsr_hz, const CavitySpec &rfc)
{
    const double delta = opposite_tooth_detuning(order, opo_fsr_hz, rfc.fsr_hz);
    return power(transfer_amplitude(rfc, delta));
}

std::vector<SeparabilityRecord> classify(const CascadeSpec &cascade, const ClassifyOptions &options)
{
    cascade.rfc1.validate();
    cascade.rfc2.validate();
    if (options.window) {
        cascade.opo.validate();
        if (!(options.lcc_step_hz > 0.0))
            throw std::invalid_argument("classify: lcc step must be positive");
    }
    const double fo = cascade.comb.opo_fsr_hz;
    const auto orders = enumerate_orders(cascade.comb);

    const double plus_target = power(transfer_amplitude(cascade.rfc1, 0.0));
    const double minus_target = power(transfer_amplitude(cascade.rfc2, 0.0));
    const double rfc1_reflect_at_lock = power(reflection_amplitude(cascade.rfc1, 0.0));

    std::vector<SeparabilityRecord> records;
    records.reserve(orders.size());
    for (const auto &o : orders) {
        SeparabilityRecord rec;
        rec.order = o.n;
        rec.detuning_hz = opposite_tooth_detuning(o.n, fo, cascade.rfc1.fsr_hz);

        // EPR+: RFC1 locked on the upper tooth; the lower tooth leaks through.
        const double plus_cross = power(transfer_amplitude(cascade.rfc1, rec.detuning_hz));
        // EPR-: RFC2 locked on the lower tooth sees the upper tooth only after
        // RFC1 reflected it.
        const double delta2 = opposite_tooth_detuning(o.n, fo, cascade.rfc2.fsr_hz);
        const double minus_cross = rfc1_reflect_at_lock * power(transfer_amplitude(cascade.rfc2, delta2));

        rec.epr_plus_efficiency = plus_target;
        rec.epr_minus_efficiency =
            power(reflection_amplitude(cascade.rfc1, rec.detuning_hz)) * minus_target;
        rec.target_transmission = std::min(plus_target, minus_target);
        rec.cross_talk = std::max(plus_cross, minus_cross);

        const bool plus_ok = plus_target >= options.thresholds.pass && plus_cross <= options.thresholds.reject;
        const bool minus_ok = minus_target >= options.thresholds.pass && minus_cross <= options.thresholds.reject;
        rec.separable = plus_ok && minus_ok;

        if (options.window) {
            rec.lcc_target = local_overlap(cascade.opo, cascade.rfc1, o.upper_hz, o.upper_hz,
                                           *options.window, options.lcc_step_hz);
            rec.lcc_cross = local_overlap(cascade.opo, cascade.rfc1, o.upper_hz, o.lower_hz,
                                          *options.window, options.lcc_step_hz);
        }
        records.push_back(rec);
    }
    return records;
}

std::vector<int> excluded_orders(const std::vector<SeparabilityRecord> &records)
{
    std::vector<int> out;
    for (const auto &r : records)
        if (!r.separable)
            out.push_back(r.order);
    return out;
}

FsrSweepResult optimize_fsr(const CascadeSpec &cascade, const FsrSearch &search,
                            const Thresholds &thresholds, unsigned threads)
{
    const std::size_t count = candidate_count(search);
    FsrSweepResult result;
    result.fsr_hz.resize(count);
    result.separable.resize(count);
    result.excluded.resize(count);

    ClassifyOptions options;
    options.thresholds = thresholds;

    detail::parallel_chunks(count, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double fsr = search.start_hz + static_cast<double>(i) * search.step_hz;
            CascadeSpec candidate = cascade;
            candidate.rfc1.fsr_hz = fsr;
            candidate.rfc2.fsr_hz = fsr;
            const auto records = classify(candidate, options);
            result.fsr_hz[i] = fsr;
            result.separable[i] = separable_count(records);
            result.excluded[i] = excluded_orders(records);
        }
    });

    for (std::size_t i = 0; i < count; ++i) {
        if (result.separable[i] > result.best_count) {
            result.best_count = result.separable[i];
            result.best_fsr_hz.clear();
        }
        if (result.separable[i] == result.best_count)
            result.best_fsr_hz.push_back(result.fsr_hz[i]);
    }
    return result;
}

PhaseDelay phase_delay(const CavitySpec &rfc, double f_hz)
{
    rfc.validate();
    const double h = rfc.linewidth() / 1000.0;
    const double up = std::arg(transfer_amplitude(rfc, f_hz + h));
    const double down = std::arg(transfer_amplitude(rfc, f_hz - h));
    const double dphi = std::remainder(up - down, 2.0 * std::numbers::pi);
    PhaseDelay out;
    out.phase_rad = std::arg(transfer_amplitude(rfc, f_hz));
    out.group_delay_s = dphi / (2.0 * std::numbers::pi * 2.0 * h);
    return out;
}

void write_sweep_csv(std::ostream &out, const FsrSweepResult &sweep)
{
    out << "fsr_hz,separable_count,excluded_orders\n";
    for (std::size_t i = 0; i < sweep.fsr_hz.size(); ++i) {
        out << format_double(sweep.fsr_hz[i]) << ',' << sweep.separable[i] << ',';
        for (std::size_t k = 0; k < sweep.excluded[i].size(); ++k)
            out << (k ? ";" : "") << sweep.excluded[i][k];
        out << '\n';
    }
}

void write_classification_csv(std::ostream &out, const std::vector<SeparabilityRecord> &records)
{
    out << "order,target_transmission,cross_talk,separable\n";
    for (const auto &r : records)
        out << r.order << ',' << format_double(r.target_transmission) << ','
            << format_double(r.cross_talk) << ',' << (r.separable ? "true" : "false") << '\n';
}

} // namespace combsep
