#include "combsep/entanglement.hpp"
#include "combsep/format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace combsep
{
namespace
{
void check_fraction(double value, const char *name)
{
    if (!(value >= 0.0 && value <= 1.0))
        throw std::invalid_argument(std::string("loss budget ") + name + " must be in [0, 1], got " +
                                    format_double(value));
}
} // namespace

void LossBudget::validate() const
{
    check_fraction(escape, "escape");
    check_fraction(visibility, "visibility");
    check_fraction(propagation, "propagation");
    check_fraction(pd_quantum, "pd_quantum");
    check_fraction(rfc_path, "rfc_path");
}

double total_efficiency(const LossBudget &budget)
{
    budget.validate();
    return budget.escape * budget.visibility * budget.visibility * budget.propagation *
           budget.pd_quantum * budget.rfc_path;
}

double apply_loss(double variance, double eta)
{
    if (!(variance > 0.0))
        throw std::invalid_argument("apply_loss: variance must be positive");
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("apply_loss: efficiency must be in [0, 1]");
    return eta * variance + (1.0 - eta);
}

double remove_loss(double variance, double eta)
{
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("remove_loss: efficiency must be in (0, 1]");
    const double v = (variance - (1.0 - eta)) / eta;
    if (!(v > 0.0))
        throw std::invalid_argument("remove_loss: variance " + format_double(variance) +
                                    " is not reachable through efficiency " + format_double(eta));
    return v;
}

double entanglement_db(double variance)
{
    if (!(variance > 0.0))
        throw std::invalid_argument("entanglement_db: variance must be positive");
    return -10.0 * std::log10(variance);
}

double variance_from_db(double db) { return std::pow(10.0, -db / 10.0); }

void SqueezeSource::validate() const
{
    if (!(squeezing_db >= 0.0))
        throw std::invalid_argument("squeeze source: squeezing_db must be >= 0");
    if (!(antisqueezing_db >= squeezing_db))
        throw std::invalid_argument("squeeze source: antisqueezing_db must be >= squeezing_db");
}

bool SqueezeSource::pure() const
{
    return std::fabs(squeezed_variance() * antisqueezed_variance() - 1.0) < 1e-12;
}

SqueezeSource SqueezeSource::from_measurement(double measured_db, double eta)
{
    const double v = remove_loss(variance_from_db(measured_db), eta);
    const double db = entanglement_db(v);
    return {db, db};
}

EprVariance predict_order_variance(const SqueezeSource &source, const LossBudget &budget,
                                   const SeparabilityRecord &record)
{
    source.validate();
    LossBudget per_order = budget;
    per_order.rfc_path = budget.rfc_path * record.epr_minus_efficiency;
    const double eta = total_efficiency(per_order);
    const double leak = record.cross_talk;
    if (!(leak >= 0.0 && leak <= 1.0))
        throw std::invalid_argument("predict_order_variance: cross_talk must be in [0, 1]");

    const double v = (1.0 - leak) * apply_loss(source.squeezed_variance(), eta) +
                     leak * apply_loss(source.antisqueezed_variance(), eta);
    EprVariance out;
    out.order = record.order;
    out.v_sum = v;
    out.v_diff = v;
    out.entanglement_db = entanglement_db(std::max(out.v_sum, out.v_diff));
    out.separable = record.separable;
    return out;
}

double solve_rfc_path(const SqueezeSource &source, const LossBudget &budget, double target_variance)
{
    LossBudget base = budget;
    base.rfc_path = 1.0;
    const double v0 = source.squeezed_variance();
    if (!(target_variance > v0 && target_variance < 1.0))
        throw std::invalid_argument("solve_rfc_path: target variance must lie between source and SNL");
    const double eta = (1.0 - target_variance) / (1.0 - v0);
    const double path = eta / total_efficiency(base);
    if (path > 1.0)
        throw std::invalid_argument("solve_rfc_path: target needs more than unit RFC efficiency");
    return path;
}

double opo_spectral_variance(bool anti, double eta, double pump_ratio, double f_hz, double kappa_hz)
{
    if (!(pump_ratio >= 0.0 && pump_ratio < 1.0))
        throw std::invalid_argument("opo_spectral_variance: pump ratio must be in [0, 1)");
    if (!(kappa_hz > 0.0))
        throw std::invalid_argument("opo_spectral_variance: kappa must be positive");
    const double x = pump_ratio;
    const double sign = anti ? 1.0 : -1.0;
    const double d = 1.0 - sign * x;
    const double w = 2.0 * f_hz / kappa_hz;
    return 1.0 + sign * eta * 4.0 * x / (d * d + w * w);
}

void write_entanglement_csv(std::ostream &out, const std::vector<EprVariance> &map)
{
    out << "order,v_sum,v_diff,entanglement_db,separable\n";
    for (const auto &e : map)
        out << e.order << ',' << format_double(e.v_sum) << ',' << format_double(e.v_diff) << ','
            << format_double(e.entanglement_db) << ',' << (e.separable ? "true" : "false") << '\n';
}

} // namespace combsep
