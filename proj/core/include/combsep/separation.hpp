#ifndef COMBSEP_SEPARATION_HPP
#define COMBSEP_SEPARATION_HPP

#include "combsep/cavity.hpp"
#include "combsep/lcc.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace combsep
{
// RFC1 transmits the upper tooth of an order (EPR+) and reflects the rest
// toward RFC2, which transmits the lower tooth (EPR-). Both filters are
// relocked per order onto that order's teeth.
struct CascadeSpec
{
    CavitySpec opo;
    CavitySpec rfc1;
    CavitySpec rfc2;
    SidebandComb comb;
};

struct Thresholds
{
    double pass = 0.9;    // minimum wanted-tooth transmission
    double reject = 0.5;  // maximum opposite-tooth leakage
};

// Distance from the opposite tooth (2n * opo_fsr away from the lock) to the
// nearest RFC resonance. Always in [0, rfc_fsr / 2].
double opposite_tooth_detuning(int order, double opo_fsr_hz, double rfc_fsr_hz);

// |t(delta_n)|^2 of an RFC locked on the wanted tooth of `order`.
double cross_talk(int order, double opo_fsr_hz, const CavitySpec &rfc);

struct SeparabilityRecord
{
    int order = 0;
    double detuning_hz = 0.0;          // delta_n for RFC1
    double target_transmission = 0.0;  // worse of the two wanted-tooth transmissions
    double cross_talk = 0.0;           // worse of the two opposite-tooth leakages
    double epr_plus_efficiency = 0.0;  // RFC1 transmission at lock
    double epr_minus_efficiency = 0.0; // RFC1 reflection at the lower tooth x RFC2 transmission
    double lcc_target = 0.0;
    double lcc_cross = 0.0;
    bool separable = false;
};

struct ClassifyOptions
{
    Thresholds thresholds;
    // When set, lcc_target/lcc_cross are scored on local windows sampled at
    // `lcc_step_hz`; otherwise both stay 0.
    std::optional<WindowConfig> window;
    double lcc_step_hz = 1e3;
};

std::vector<SeparabilityRecord> classify(const CascadeSpec &cascade, const ClassifyOptions &options = {});

inline int separable_count(const std::vector<SeparabilityRecord> &records)
{
    int count = 0;
    for (const auto &r : records)
        count += r.separable ? 1 : 0;
    return count;
}

std::vector<int> excluded_orders(const std::vector<SeparabilityRecord> &records);

struct FsrSearch
{
    double start_hz = 0.0;
    double stop_hz = 0.0;
    double step_hz = 0.0;
};

struct FsrSweepResult
{
    std::vector<double> fsr_hz;
    std::vector<int> separable;
    std::vector<std::vector<int>> excluded;
    int best_count = 0;
    std::vector<double> best_fsr_hz;  // ascending; the first entry wins ties
};

// Re-evaluates `classify` with both RFCs moved to each candidate FSR, keeping
// their mirror transmissivities. Candidates are start + i*step up to stop.
FsrSweepResult optimize_fsr(const CascadeSpec &cascade, const FsrSearch &search,
                            const Thresholds &thresholds = {}, unsigned threads = 1);

struct PhaseDelay
{
    double phase_rad = 0.0;
    double group_delay_s = 0.0;
};

// Transmitted-field phase and group delay dphi/domega (centered difference,
// step linewidth/1000). The transfer phase grows with frequency for a
// delayed field, so the delay is positive on resonance.
PhaseDelay phase_delay(const CavitySpec &rfc, double f_hz);

// CSV `fsr_hz,separable_count,excluded_orders` (orders joined by ';').
void write_sweep_csv(std::ostream &out, const FsrSweepResult &sweep);

// CSV `order,target_transmission,cross_talk,separable`.
void write_classification_csv(std::ostream &out, const std::vector<SeparabilityRecord> &records);

} // namespace combsep

#endif // COMBSEP_SEPARATION_HPP
