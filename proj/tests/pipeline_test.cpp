#include "combsep/pipeline.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

using namespace combsep;
namespace fs = std::filesystem;

namespace
{
// Reduced grid so pipeline tests finish quickly.
constexpr const char *kSmall = R"(
[lcc]
grid_stop_hz = 3e9
grid_step_hz = 2e3

[plan]
sweep_start_hz = 1.28e9
sweep_stop_hz = 1.29e9
sweep_step_hz = 1e6

[qdc]
contour_points = 8
)";

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string &name)
{
    const auto dir = fs::temp_directory_path() / ("combsep_test_" + name);
    fs::remove_all(dir);
    return dir;
}

bool has_path(const std::vector<Diagnostic> &d, const std::string &path)
{
    for (const auto &x : d)
        if (x.path == path)
            return true;
    return false;
}
} // namespace

TEST_SUITE("config")
{
    TEST_CASE("shipped default file equals the built-in defaults")
    {
        const auto file = load_config(COMBSEP_DEFAULT_CONFIG);
        const auto ref = ExperimentConfig::reference_defaults();
        CHECK(validate(file).empty());
        CHECK(file.opo.t_in == doctest::Approx(ref.opo.t_in).epsilon(1e-15));
        CHECK(file.rfc1.fsr_hz == ref.rfc1.fsr_hz);
        CHECK(file.rfc2.t_out == ref.rfc2.t_out);
        REQUIRE(file.mode_cleaner.has_value());
        CHECK(file.mode_cleaner->t_in == 0.01);
        CHECK(file.comb.opo_fsr_hz == ref.comb.opo_fsr_hz);
        CHECK(file.comb.max_offset_hz == ref.comb.max_offset_hz);
        CHECK(file.grid_stop_hz == ref.grid_stop_hz);
        CHECK(file.window.width_hz == doctest::Approx(ref.window.width_hz));
        CHECK(file.window.correlation == Correlation::centered);
        REQUIRE(file.sweep.has_value());
        CHECK(file.sweep->step_hz == ref.sweep->step_hz);
        CHECK(file.budget.visibility == ref.budget.visibility);
        CHECK(file.qdc_orders.size() == 4u);
        CHECK(file.spectrum_orders[1].variance == ref.spectrum_orders[1].variance);
        CHECK(file.trace_stride == ref.trace_stride);
    }

    TEST_CASE("built-in defaults validate")
    {
        CHECK(validate(ExperimentConfig::reference_defaults()).empty());
    }

    TEST_CASE("absent keys keep their defaults")
    {
        const auto c = parse_config("[rfc1]\nt_in = 0.2\n");
        CHECK(c.rfc1.t_in == 0.2);
        CHECK(c.rfc1.t_out == 0.1);
        CHECK(c.rfc2.t_in == 0.1);
    }

    TEST_CASE("unknown keys and sections are reported")
    {
        try {
            parse_config("[rfc1]\nfinese = 3\n[extra]\nx = 1\n");
            FAIL("expected ConfigError");
        } catch (const ConfigError &e) {
            CHECK(has_path(e.diagnostics(), "rfc1.finese"));
            CHECK(has_path(e.diagnostics(), "extra"));
        }
    }

    TEST_CASE("type mismatches and syntax errors")
    {
        CHECK_THROWS_AS(parse_config("[rfc1]\nt_in = \"wide\"\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("[rfc1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("[qdc]\norders = [1, 2]\nvariances = [0.2]\n"), ConfigError);
    }

    TEST_CASE("range violations name the offending key")
    {
        auto c = parse_config("[lcc]\nwindow_width_hz = 50e6\n[qdc]\nn_bar = -1\n");
        const auto d = validate(c);
        CHECK(has_path(d, "lcc.window_width_hz"));
        CHECK(has_path(d, "qdc.n_bar"));

        c = parse_config("[rfc1]\nt_in = 1.5\n[lcc]\nwindow_fsr_fraction = 0.001\n");
        const auto d2 = validate(c);
        CHECK(has_path(d2, "rfc1.t_in"));
        CHECK(has_path(d2, "lcc.window_fsr_fraction"));
        for (const auto &x : d2)
            CHECK_FALSE(to_string(x).empty());
    }

    TEST_CASE("window keys are exclusive")
    {
        CHECK_THROWS_AS(parse_config("[lcc]\nwindow_width_hz = 5e6\nwindow_fsr_fraction = 0.01\n"), ConfigError);
        const auto c = parse_config("[lcc]\nwindow_width_hz = 5e6\n");
        CHECK(c.window.definition == WindowDefinition::absolute);
        CHECK(c.window.width_hz == 5e6);
    }

    TEST_CASE("mode cleaner can be disabled")
    {
        CHECK_FALSE(parse_config("[mode_cleaner]\nenabled = false\n").mode_cleaner.has_value());
    }

    TEST_CASE("reversed sweep range disables the sweep")
    {
        CHECK_FALSE(parse_config("[plan]\nsweep_start_hz = 2e9\nsweep_stop_hz = 1e9\n").sweep.has_value());
    }

    TEST_CASE("validate_file reports syntax errors as diagnostics")
    {
        const auto dir = scratch("syntax");
        fs::create_directories(dir);
        std::ofstream(dir / "bad.toml") << "[rfc1\n";
        CHECK_FALSE(validate_file(dir / "bad.toml").empty());
        CHECK_THROWS(validate_file(dir / "missing.toml"));
    }

    TEST_CASE("stage names round trip")
    {
        for (Stage s : kAllStages)
            CHECK(stage_from_string(to_string(s)) == s);
        CHECK_FALSE(stage_from_string("everything").has_value());
    }
}

TEST_SUITE("pipeline")
{
    TEST_CASE("full run writes every export and is byte-reproducible")
    {
        auto cfg = parse_config(kSmall);
        const auto a = scratch("run_a");
        const auto b = scratch("run_b");
        cfg.output_dir = a;
        const auto report = run_pipeline(cfg, {std::begin(kAllStages), std::end(kAllStages)});
        CHECK(report.executed.size() == 7u);
        cfg.output_dir = b;
        cfg.threads = 3;
        run_pipeline(cfg, {std::begin(kAllStages), std::end(kAllStages)});

        for (const char *name : {"opo_trace.csv", "rfc_trace.csv", "overlap.csv", "overlap.json",
                                 "classification.csv", "sweep.csv", "entanglement.csv", "capacity_contour.csv",
                                 "capacity.json", "spectrum_order06_amplitude_sum.csv",
                                 "spectrum_order32_phase_difference.csv", "summary.json"}) {
            CAPTURE(name);
            REQUIRE(fs::exists(a / name));
            CHECK(slurp(a / name) == slurp(b / name));
        }
        CHECK(slurp(a / "classification.csv").find("19,1,") != std::string::npos);
        CHECK(slurp(a / "summary.json").find("\"separable_pairs\": 40") != std::string::npos);
    }

    TEST_CASE("a single stage writes the same bytes as a full run")
    {
        auto cfg = parse_config(kSmall);
        const auto full = scratch("full");
        const auto part = scratch("part");
        cfg.output_dir = full;
        run_pipeline(cfg, {std::begin(kAllStages), std::end(kAllStages)});
        cfg.output_dir = part;
        const auto report = run_pipeline(cfg, {Stage::entanglement});
        REQUIRE(report.executed == std::vector<Stage>{Stage::entanglement});
        CHECK(slurp(part / "entanglement.csv") == slurp(full / "entanglement.csv"));
        CHECK_FALSE(fs::exists(part / "opo_trace.csv"));
    }

    TEST_CASE("invalid configuration is refused before any stage runs")
    {
        auto cfg = parse_config(kSmall);
        cfg.n_bar = -1.0;
        cfg.output_dir = scratch("invalid");
        CHECK_THROWS_AS(run_pipeline(cfg, {Stage::qdc}), ConfigError);
        CHECK_FALSE(fs::exists(cfg.output_dir / "summary.json"));
    }

    TEST_CASE("unwritable output is a stage error")
    {
        auto cfg = parse_config(kSmall);
        const auto dir = scratch("blocked");
        fs::create_directories(dir);
        std::ofstream(dir / "file") << "x";
        cfg.output_dir = dir / "file" / "sub";
        CHECK_THROWS_AS(run_pipeline(cfg, {Stage::classify}), StageError);
    }
}
