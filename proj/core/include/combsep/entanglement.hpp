#ifndef COMBSEP_ENTANGLEMENT_HPP
#define COMBSEP_ENTANGLEMENT_HPP

#include "combsep/separation.hpp"

#include <iosfwd>
#include <vector>

namespace combsep
{
// Variances are normalized so the shot-noise limit of the sum/difference
// quadrature combinations equals 1.

struct LossBudget
{
    double escape = 1.0;
    double visibility = 1.0;  // enters squared (mode overlap on both beams)
    double propagation = 1.0;
    double pd_quantum = 1.0;
    double rfc_path = 1.0;

    void validate() const;
};

double total_efficiency(const LossBudget &budget);

// Beam-splitter loss: eta*v + (1 - eta).
double apply_loss(double variance, double eta);

// Inverse of apply_loss. Throws std::invalid_argument for eta <= 0 or when the
// inferred input variance would be non-positive.
double remove_loss(double variance, double eta);

// -10 log10(v).
double entanglement_db(double variance);

// 10^(-db/10); inverse of entanglement_db.
double variance_from_db(double db);

struct SqueezeSource
{
    double squeezing_db = 0.0;      // below SNL
    double antisqueezing_db = 0.0;  // above SNL

    void validate() const;
    double squeezed_variance() const { return variance_from_db(squeezing_db); }
    double antisqueezed_variance() const { return 1.0 / variance_from_db(antisqueezing_db); }
    bool pure() const;

    // Source state inferred by undoing `eta` from a measured squeezing level.
    // Anti-squeezing defaults to the pure-state value.
    static SqueezeSource from_measurement(double measured_db, double eta);
};

struct EprVariance
{
    int order = 0;
    double v_sum = 1.0;
    double v_diff = 1.0;
    double entanglement_db = 0.0;
    bool separable = true;
};

// Mixes the lossy squeezed variance with a cross_talk-weighted share of the
// lossy anti-squeezed variance. `budget.rfc_path` is multiplied by the
// record's EPR- path efficiency. Non-separable records are still evaluated
// and returned with separable == false.
EprVariance predict_order_variance(const SqueezeSource &source, const LossBudget &budget,
                                   const SeparabilityRecord &record);

// rfc_path that makes a leak-free order reach `target_variance`.
double solve_rfc_path(const SqueezeSource &source, const LossBudget &budget, double target_variance);

// Below-threshold OPO spectrum, V(f) = 1 +- eta*4x/((1 -+ x)^2 + (2f/kappa)^2),
// with x the pump parameter sqrt(P/P_th). `anti` selects the + branch.
double opo_spectral_variance(bool anti, double eta, double pump_ratio, double f_hz, double kappa_hz);

// CSV `order,v_sum,v_diff,entanglement_db,separable`.
void write_entanglement_csv(std::ostream &out, const std::vector<EprVariance> &map);

} // namespace combsep

#endif // COMBSEP_ENTANGLEMENT_HPP
