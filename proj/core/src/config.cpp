#include "combsep/format.hpp"
#include "combsep/pipeline.hpp"

#include <toml.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace combsep
{
namespace
{
constexpr double kOpoFsrHz = 474.7e6;
constexpr double kOpoLinewidthHz = 12.36e6;
constexpr double kRfcFsrHz = 1.288e9;

// Pulls typed values out of one TOML table and remembers which keys were
// read, so leftovers can be reported as unknown.
class TableReader
{
public:
    TableReader(const toml::table *table, std::string prefix, std::vector<Diagnostic> &diags)
        : table_(table), prefix_(std::move(prefix)), diags_(diags)
    {
    }

    bool present() const { return table_ != nullptr; }
    bool has(std::string_view key) const { return table_ && table_->contains(key); }

    void number(std::string_view key, double &dst)
    {
        if (auto v = fetch(key)) {
            if (auto d = v->value<double>())
                dst = *d;
            else
                type_error(key, *v, "a number");
        }
    }

    std::optional<double> optional_number(std::string_view key)
    {
        if (!has(key))
            return std::nullopt;
        double d = 0.0;
        number(key, d);
        return d;
    }

    template <typename Int>
    void integer(std::string_view key, Int &dst)
    {
        if (auto v = fetch(key)) {
            if (auto i = v->value<std::int64_t>(); i && v->is_integer())
                dst = static_cast<Int>(*i);
            else
                type_error(key, *v, "an integer");
        }
    }

    void boolean(std::string_view key, bool &dst)
    {
        if (auto v = fetch(key)) {
            if (auto b = v->value<bool>(); b && v->is_boolean())
                dst = *b;
            else
                type_error(key, *v, "a boolean");
        }
    }

    void string(std::string_view key, std::string &dst)
    {
        if (auto v = fetch(key)) {
            if (auto s = v->value<std::string>())
                dst = *s;
            else
                type_error(key, *v, "a string");
        }
    }

    void number_list(std::string_view key, std::vector<double> &dst)
    {
        auto v = fetch(key);
        if (!v)
            return;
        const auto *arr = v->as_array();
        if (!arr) {
            type_error(key, *v, "an array of numbers");
            return;
        }
        std::vector<double> out;
        for (const auto &el : *arr) {
            auto d = el.value<double>();
            if (!d) {
                type_error(key, el, "an array of numbers");
                return;
            }
            out.push_back(*d);
        }
        dst = std::move(out);
    }

    void int_list(std::string_view key, std::vector<int> &dst)
    {
        auto v = fetch(key);
        if (!v)
            return;
        const auto *arr = v->as_array();
        if (!arr) {
            type_error(key, *v, "an array of integers");
            return;
        }
        std::vector<int> out;
        for (const auto &el : *arr) {
            if (!el.is_integer()) {
                type_error(key, el, "an array of integers");
                return;
            }
            out.push_back(static_cast<int>(*el.value<std::int64_t>()));
        }
        dst = std::move(out);
    }

    void report_unknown()
    {
        if (!table_)
            return;
        for (const auto &[k, v] : *table_) {
            if (!seen_.count(std::string(k.str())))
                diags_.push_back({path(k.str()), describe(v), "unknown key"});
        }
    }

    std::string path(std::string_view key) const { return prefix_ + "." + std::string(key); }

private:
    const toml::node *fetch(std::string_view key)
    {
        seen_.insert(std::string(key));
        if (!table_)
            return nullptr;
        return table_->get(key);
    }

    void type_error(std::string_view key, const toml::node &v, const char *expected)
    {
        diags_.push_back({path(key), describe(v), std::string("must be ") + expected});
    }

    static std::string describe(const toml::node &v)
    {
        std::ostringstream os;
        v.visit([&](const auto &n) { os << n; });
        return os.str();
    }

    const toml::table *table_;
    std::string prefix_;
    std::vector<Diagnostic> &diags_;
    std::set<std::string> seen_;
};

void read_cavity(TableReader &r, CavitySpec &cavity)
{
    r.number("fsr_hz", cavity.fsr_hz);
    if (r.has("linewidth_hz")) {
        double lw = 0.0;
        r.number("linewidth_hz", lw);
        if (lw > 0.0 && cavity.fsr_hz > 0.0)
            cavity = CavitySpec::symmetric_for_linewidth(cavity.fsr_hz, lw);
    }
    r.number("t_in", cavity.t_in);
    r.number("t_out", cavity.t_out);
    r.number("round_trip_loss", cavity.round_trip_loss);
}

void check_cavity(const CavitySpec &c, const std::string &prefix, std::vector<Diagnostic> &diags)
{
    if (!(c.fsr_hz > 0.0))
        diags.push_back({prefix + ".fsr_hz", format_double(c.fsr_hz), "must be > 0"});
    if (!(c.t_in > 0.0 && c.t_in <= 1.0))
        diags.push_back({prefix + ".t_in", format_double(c.t_in), "must be in (0, 1]"});
    if (!(c.t_out >= 0.0 && c.t_out <= 1.0))
        diags.push_back({prefix + ".t_out", format_double(c.t_out), "must be in [0, 1]"});
    if (!(c.round_trip_loss >= 0.0 && c.round_trip_loss < 1.0))
        diags.push_back({prefix + ".round_trip_loss", format_double(c.round_trip_loss), "must be in [0, 1)"});
    else if (c.t_in > 0.0 && c.t_in <= 1.0 && c.t_out >= 0.0 && c.t_out <= 1.0 && !(c.r1r2() > 0.0))
        diags.push_back({prefix, "r1*r2 = 0", "cavity must have feedback (r1*r2 > 0)"});
}

void check_fraction(double v, const std::string &path, std::vector<Diagnostic> &diags)
{
    if (!(v >= 0.0 && v <= 1.0))
        diags.push_back({path, format_double(v), "must be in [0, 1]"});
}

void check_order_list(const std::vector<OrderVariance> &list, int max_order, const std::string &prefix,
                      std::vector<Diagnostic> &diags)
{
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto &ov = list[i];
        const std::string idx = "[" + std::to_string(i) + "]";
        if (ov.order < 1 || ov.order > max_order)
            diags.push_back({prefix + ".orders" + idx, std::to_string(ov.order),
                             "must be an order in [1, " + std::to_string(max_order) + "]"});
        if (!(ov.variance > 0.0))
            diags.push_back({prefix + ".variances" + idx, format_double(ov.variance), "must be > 0"});
    }
}

std::vector<OrderVariance> zip_orders(const std::vector<int> &orders, const std::vector<double> &vars,
                                      const std::string &prefix, std::vector<Diagnostic> &diags)
{
    if (orders.size() != vars.size()) {
        diags.push_back({prefix + ".variances", std::to_string(vars.size()) + " entries",
                         "must have one entry per order (" + std::to_string(orders.size()) + ")"});
        return {};
    }
    std::vector<OrderVariance> out;
    for (std::size_t i = 0; i < orders.size(); ++i)
        out.push_back({orders[i], vars[i]});
    return out;
}
} // namespace

std::string to_string(const Diagnostic &d) { return d.path + " = " + d.value + ": " + d.constraint; }

ConfigError::ConfigError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error([&] {
          std::string msg = "invalid configuration";
          for (const auto &d : diagnostics)
              msg += "\n  " + to_string(d);
          return msg;
      }()),
      diagnostics_(std::move(diagnostics))
{
}

ExperimentConfig ExperimentConfig::reference_defaults()
{
    ExperimentConfig c;
    c.opo = CavitySpec::symmetric_for_linewidth(kOpoFsrHz, kOpoLinewidthHz);
    c.rfc1 = {kRfcFsrHz, 0.10, 0.10, 0.0};
    c.rfc2 = c.rfc1;
    c.mode_cleaner = CavitySpec{kRfcFsrHz, 0.01, 0.01, 0.0};
    c.comb = {kOpoFsrHz, 20e9};

    c.grid_start_hz = 0.0;
    c.grid_stop_hz = 40e9;
    c.grid_step_hz = 1e3;
    c.window = WindowConfig::fraction_of(kOpoFsrHz, 0.01);

    c.sweep = FsrSearch{1.0e9, 1.5e9, 1e6};

    c.budget = {0.978, 0.960, 0.972, 0.985, 1.0};

    c.qdc_orders = {{6, 0.209}, {12, 0.232}, {24, 0.219}, {32, 0.204}};
    c.tone_frequencies_hz = {300e3, 700e3};
    c.spectrum_orders = {{6, 0.2884}, {12, 0.3090}, {24, 0.2951}, {32, 0.2818}};
    return c;
}

ExperimentConfig parse_config(std::string_view toml_text, std::string_view source_name)
{
    toml::table root;
    try {
        root = toml::parse(toml_text, source_name);
    } catch (const toml::parse_error &e) {
        std::ostringstream where;
        where << e.source().begin;
        throw ConfigError({{std::string(source_name), where.str(), std::string(e.description())}});
    }

    ExperimentConfig c = ExperimentConfig::reference_defaults();
    std::vector<Diagnostic> diags;
    auto section = [&](std::string_view name) { return TableReader(root[name].as_table(), std::string(name), diags); };

    {
        auto r = section("opo");
        read_cavity(r, c.opo);
        c.comb.opo_fsr_hz = c.opo.fsr_hz;
        r.report_unknown();
    }
    {
        auto r = section("rfc1");
        read_cavity(r, c.rfc1);
        r.report_unknown();
    }
    {
        auto r = section("rfc2");
        read_cavity(r, c.rfc2);
        r.report_unknown();
    }
    {
        auto r = section("mode_cleaner");
        if (r.present()) {
            bool enabled = true;
            r.boolean("enabled", enabled);
            CavitySpec mc = c.mode_cleaner.value_or(CavitySpec{});
            read_cavity(r, mc);
            c.mode_cleaner = enabled ? std::optional<CavitySpec>(mc) : std::nullopt;
        }
        r.report_unknown();
    }
    {
        auto r = section("comb");
        r.number("max_offset_hz", c.comb.max_offset_hz);
        r.report_unknown();
    }
    {
        auto r = section("lcc");
        r.number("grid_start_hz", c.grid_start_hz);
        r.number("grid_stop_hz", c.grid_stop_hz);
        r.number("grid_step_hz", c.grid_step_hz);
        r.number("rfc_detune_hz", c.rfc_detune_hz);
        r.number("prominence_floor", c.prominence_floor);
        if (r.has("window_width_hz") && r.has("window_fsr_fraction"))
            diags.push_back({r.path("window_width_hz"), "set together with window_fsr_fraction",
                             "give either an absolute width or a fraction of the OPO FSR"});
        if (auto w = r.optional_number("window_width_hz")) {
            c.window.definition = WindowDefinition::absolute;
            c.window.fsr_fraction = 0.0;
            c.window.width_hz = *w;
        }
        if (auto f = r.optional_number("window_fsr_fraction")) {
            c.window.definition = WindowDefinition::fraction_of_fsr;
            c.window.fsr_fraction = *f;
        }
        if (c.window.definition == WindowDefinition::fraction_of_fsr)
            c.window.width_hz = c.window.fsr_fraction * c.opo.fsr_hz;
        r.integer("max_lag_steps", c.window.max_lag_steps);
        std::string corr(to_string(c.window.correlation));
        r.string("correlation", corr);
        try {
            c.window.correlation = correlation_from_string(corr);
        } catch (const std::invalid_argument &) {
            diags.push_back({r.path("correlation"), corr, "must be \"centered\" or \"uncentered\""});
        }
        r.report_unknown();
    }
    {
        auto r = section("plan");
        r.number("pass", c.thresholds.pass);
        r.number("reject", c.thresholds.reject);
        FsrSearch s = c.sweep.value_or(FsrSearch{});
        r.number("sweep_start_hz", s.start_hz);
        r.number("sweep_stop_hz", s.stop_hz);
        r.number("sweep_step_hz", s.step_hz);
        // A reversed range means "no sweep".
        c.sweep = s.stop_hz < s.start_hz ? std::nullopt : std::optional<FsrSearch>(s);
        r.report_unknown();
    }
    {
        auto r = section("entanglement");
        r.number("escape", c.budget.escape);
        r.number("visibility", c.budget.visibility);
        r.number("propagation", c.budget.propagation);
        r.number("pd_quantum", c.budget.pd_quantum);
        if (auto p = r.optional_number("rfc_path")) {
            c.budget.rfc_path = *p;
            c.calibrate_rfc_path = false;
        }
        r.number("calibration_variance", c.calibration_variance);
        r.number("measured_carrier_db", c.measured_carrier_db);
        c.source_squeezing_db = r.optional_number("source_squeezing_db");
        c.source_antisqueezing_db = r.optional_number("source_antisqueezing_db");
        r.report_unknown();
    }
    {
        auto r = section("qdc");
        r.number("n_bar", c.n_bar);
        r.number("detection_efficiency", c.detection_efficiency);
        std::vector<int> orders;
        std::vector<double> vars;
        for (const auto &ov : c.qdc_orders) {
            orders.push_back(ov.order);
            vars.push_back(ov.variance);
        }
        r.int_list("orders", orders);
        r.number_list("variances", vars);
        c.qdc_orders = zip_orders(orders, vars, "qdc", diags);
        r.number("contour_min", c.contour_min);
        r.number("contour_max", c.contour_max);
        r.integer("contour_points", c.contour_points);
        r.report_unknown();
    }
    {
        auto r = section("spectrum");
        r.number("start_hz", c.spectrum_band.start_hz);
        r.number("stop_hz", c.spectrum_band.stop_hz);
        r.number("step_hz", c.spectrum_band.step_hz);
        r.number_list("tone_frequencies_hz", c.tone_frequencies_hz);
        r.number("tone_power", c.tone_power);
        std::vector<int> orders;
        std::vector<double> vars;
        for (const auto &ov : c.spectrum_orders) {
            orders.push_back(ov.order);
            vars.push_back(ov.variance);
        }
        r.int_list("orders", orders);
        r.number_list("variances", vars);
        c.spectrum_orders = zip_orders(orders, vars, "spectrum", diags);
        r.report_unknown();
    }
    {
        auto r = section("output");
        std::string dir = c.output_dir.string();
        r.string("dir", dir);
        c.output_dir = dir;
        std::int64_t stride = static_cast<std::int64_t>(c.trace_stride);
        r.integer("trace_stride", stride);
        if (stride < 1)
            diags.push_back({r.path("trace_stride"), std::to_string(stride), "must be >= 1"});
        else
            c.trace_stride = static_cast<std::size_t>(stride);
        std::int64_t threads = c.threads;
        r.integer("threads", threads);
        if (threads < 1)
            diags.push_back({r.path("threads"), std::to_string(threads), "must be >= 1"});
        else
            c.threads = static_cast<unsigned>(threads);
        r.report_unknown();
    }

    static const std::set<std::string> known = {"opo",  "rfc1", "rfc2",         "mode_cleaner", "comb",
                                                "lcc",  "plan", "entanglement", "qdc",          "spectrum",
                                                "output"};
    for (const auto &[k, v] : root)
        if (!known.count(std::string(k.str())))
            diags.push_back({std::string(k.str()), "", "unknown section"});

    if (!diags.empty())
        throw ConfigError(std::move(diags));
    return c;
}

ExperimentConfig load_config(const std::filesystem::path &file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read config file " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), file.string());
}

std::vector<Diagnostic> validate(const ExperimentConfig &c)
{
    std::vector<Diagnostic> d;
    check_cavity(c.opo, "opo", d);
    check_cavity(c.rfc1, "rfc1", d);
    check_cavity(c.rfc2, "rfc2", d);
    if (c.mode_cleaner)
        check_cavity(*c.mode_cleaner, "mode_cleaner", d);

    if (!(c.comb.opo_fsr_hz > 0.0))
        d.push_back({"opo.fsr_hz", format_double(c.comb.opo_fsr_hz), "must be > 0"});
    if (!(c.comb.max_offset_hz >= 0.0))
        d.push_back({"comb.max_offset_hz", format_double(c.comb.max_offset_hz), "must be >= 0"});

    if (!(c.grid_step_hz > 0.0))
        d.push_back({"lcc.grid_step_hz", format_double(c.grid_step_hz), "must be > 0"});
    if (!(c.grid_start_hz < c.grid_stop_hz))
        d.push_back({"lcc.grid_stop_hz", format_double(c.grid_stop_hz), "must exceed lcc.grid_start_hz"});
    else if (c.grid_step_hz > 0.0 && (c.grid_stop_hz - c.grid_start_hz) < c.grid_step_hz)
        d.push_back({"lcc.grid_step_hz", format_double(c.grid_step_hz), "grid must contain at least two points"});
    if (!(c.prominence_floor > 0.0 && c.prominence_floor < 1.0))
        d.push_back({"lcc.prominence_floor", format_double(c.prominence_floor), "must be in (0, 1)"});
    if (c.window.max_lag_steps < 0)
        d.push_back({"lcc.max_lag_steps", std::to_string(c.window.max_lag_steps), "must be >= 0"});

    const std::string width_path =
        c.window.definition == WindowDefinition::fraction_of_fsr ? "lcc.window_fsr_fraction" : "lcc.window_width_hz";
    if (!(c.window.width_hz > 0.0)) {
        d.push_back({width_path, format_double(c.window.width_hz), "window width must be > 0"});
    } else if (c.opo.fsr_hz > 0.0 && c.opo.t_in > 0.0 && c.opo.t_in <= 1.0 && c.opo.r1r2() > 0.0 &&
               c.opo.r1r2() < 1.0) {
        const double lw = c.opo.linewidth();
        if (!c.window.within_linewidth_bounds(lw))
            d.push_back({width_path, format_double(c.window.width_hz) + " Hz",
                         "window width must be within [0.2, 1.0] x OPO linewidth = [" +
                             format_double(kWindowMinLinewidths * lw) + ", " +
                             format_double(kWindowMaxLinewidths * lw) + "] Hz"});
    }

    if (!(c.thresholds.pass > 0.0 && c.thresholds.pass <= 1.0))
        d.push_back({"plan.pass", format_double(c.thresholds.pass), "must be in (0, 1]"});
    if (!(c.thresholds.reject >= 0.0 && c.thresholds.reject <= 1.0))
        d.push_back({"plan.reject", format_double(c.thresholds.reject), "must be in [0, 1]"});
    if (c.sweep) {
        if (!(c.sweep->start_hz > 0.0))
            d.push_back({"plan.sweep_start_hz", format_double(c.sweep->start_hz), "must be > 0"});
        if (c.sweep->stop_hz > c.sweep->start_hz && !(c.sweep->step_hz > 0.0))
            d.push_back({"plan.sweep_step_hz", format_double(c.sweep->step_hz), "must be > 0"});
    }

    check_fraction(c.budget.escape, "entanglement.escape", d);
    check_fraction(c.budget.visibility, "entanglement.visibility", d);
    check_fraction(c.budget.propagation, "entanglement.propagation", d);
    check_fraction(c.budget.pd_quantum, "entanglement.pd_quantum", d);
    check_fraction(c.budget.rfc_path, "entanglement.rfc_path", d);
    if (c.calibrate_rfc_path && !(c.calibration_variance > 0.0 && c.calibration_variance < 1.0))
        d.push_back({"entanglement.calibration_variance", format_double(c.calibration_variance),
                     "must be in (0, 1)"});
    if (c.source_squeezing_db) {
        if (!(*c.source_squeezing_db >= 0.0))
            d.push_back({"entanglement.source_squeezing_db", format_double(*c.source_squeezing_db), "must be >= 0"});
        if (c.source_antisqueezing_db && !(*c.source_antisqueezing_db >= *c.source_squeezing_db))
            d.push_back({"entanglement.source_antisqueezing_db", format_double(*c.source_antisqueezing_db),
                         "must be >= source_squeezing_db"});
    } else if (!(c.measured_carrier_db > 0.0)) {
        d.push_back({"entanglement.measured_carrier_db", format_double(c.measured_carrier_db), "must be > 0"});
    }

    if (!(c.n_bar >= 0.0))
        d.push_back({"qdc.n_bar", format_double(c.n_bar), "must be >= 0"});
    if (!(c.detection_efficiency > 0.0 && c.detection_efficiency <= 1.0))
        d.push_back({"qdc.detection_efficiency", format_double(c.detection_efficiency), "must be in (0, 1]"});
    int max_order = 0;
    if (c.comb.opo_fsr_hz > 0.0 && c.comb.max_offset_hz >= 0.0)
        max_order = c.comb.order_count();
    check_order_list(c.qdc_orders, max_order, "qdc", d);
    if (!(c.contour_min > 0.0))
        d.push_back({"qdc.contour_min", format_double(c.contour_min), "must be > 0"});
    if (!(c.contour_max >= c.contour_min))
        d.push_back({"qdc.contour_max", format_double(c.contour_max), "must be >= qdc.contour_min"});
    if (c.contour_points < 2)
        d.push_back({"qdc.contour_points", std::to_string(c.contour_points), "must be >= 2"});

    const auto &b = c.spectrum_band;
    if (!(b.start_hz < b.stop_hz))
        d.push_back({"spectrum.stop_hz", format_double(b.stop_hz), "must exceed spectrum.start_hz"});
    if (!(b.step_hz > 0.0))
        d.push_back({"spectrum.step_hz", format_double(b.step_hz), "must be > 0"});
    for (std::size_t i = 0; i < c.tone_frequencies_hz.size(); ++i) {
        const double f = c.tone_frequencies_hz[i];
        if (!(f >= b.start_hz && f <= b.stop_hz))
            d.push_back({"spectrum.tone_frequencies_hz[" + std::to_string(i) + "]", format_double(f),
                         "must lie inside the spectrum band"});
    }
    if (!(c.tone_power >= 0.0))
        d.push_back({"spectrum.tone_power", format_double(c.tone_power), "must be >= 0"});
    check_order_list(c.spectrum_orders, max_order, "spectrum", d);

    if (c.trace_stride < 1)
        d.push_back({"output.trace_stride", std::to_string(c.trace_stride), "must be >= 1"});
    if (c.threads < 1)
        d.push_back({"output.threads", std::to_string(c.threads), "must be >= 1"});
    if (c.output_dir.empty())
        d.push_back({"output.dir", "\"\"", "must not be empty"});
    return d;
}

std::vector<Diagnostic> validate_file(const std::filesystem::path &file)
{
    try {
        return validate(load_config(file));
    } catch (const ConfigError &e) {
        return e.diagnostics();
    }
}

} // namespace combsep
