#ifndef COMBSEP_PIPELINE_HPP
#define COMBSEP_PIPELINE_HPP

#include "combsep/cavity.hpp"
#include "combsep/entanglement.hpp"
#include "combsep/lcc.hpp"
#include "combsep/qdc.hpp"
#include "combsep/separation.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace combsep
{
struct OrderVariance
{
    int order = 0;
    double variance = 1.0;
};

struct ExperimentConfig
{
    CavitySpec opo;
    CavitySpec rfc1;
    CavitySpec rfc2;
    std::optional<CavitySpec> mode_cleaner;
    SidebandComb comb;

    // LCC traces
    double grid_start_hz = 0.0;
    double grid_stop_hz = 0.0;
    double grid_step_hz = 0.0;
    double rfc_detune_hz = 0.0;
    WindowConfig window;
    double prominence_floor = 0.5;

    Thresholds thresholds;
    std::optional<FsrSearch> sweep;  // unset or empty range: stage skipped

    LossBudget budget;
    bool calibrate_rfc_path = true;
    double calibration_variance = 0.224;
    double measured_carrier_db = 8.0;
    std::optional<double> source_squeezing_db;
    std::optional<double> source_antisqueezing_db;

    double n_bar = 20.0;
    double detection_efficiency = 1.0;
    std::vector<OrderVariance> qdc_orders;
    double contour_min = 0.05;
    double contour_max = 1.0;
    int contour_points = 40;

    SpectrumBand spectrum_band;
    std::vector<double> tone_frequencies_hz;
    double tone_power = 10.0;
    std::vector<OrderVariance> spectrum_orders;

    std::filesystem::path output_dir = "out";
    std::size_t trace_stride = 1000;
    unsigned threads = 1;

    // Configuration matching the reference experiment.
    static ExperimentConfig reference_defaults();
};

struct Diagnostic
{
    std::string path;
    std::string value;
    std::string constraint;
};

std::string to_string(const Diagnostic &d);

class ConfigError : public std::runtime_error
{
public:
    explicit ConfigError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic> &diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

// Runtime failure inside a stage (I/O, numerical domain errors).
class StageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Parses a TOML document. Unknown keys and type mismatches become
// diagnostics; keys that are absent keep their reference_defaults() value.
// Throws ConfigError on syntax or type errors.
ExperimentConfig parse_config(std::string_view toml_text, std::string_view source_name = "config");
ExperimentConfig load_config(const std::filesystem::path &file);

// Empty iff the configuration satisfies every module invariant.
std::vector<Diagnostic> validate(const ExperimentConfig &config);

// Reads and validates a file. Throws std::runtime_error if unreadable;
// syntax errors are returned as diagnostics.
std::vector<Diagnostic> validate_file(const std::filesystem::path &file);

enum class Stage
{
    cavity,
    lcc,
    classify,
    sweep,
    entanglement,
    qdc,
    spectrum,
};

inline constexpr Stage kAllStages[] = {Stage::cavity,       Stage::lcc, Stage::classify, Stage::sweep,
                                       Stage::entanglement, Stage::qdc, Stage::spectrum};

std::string_view to_string(Stage s);
std::optional<Stage> stage_from_string(std::string_view name);

struct RunReport
{
    std::vector<Stage> executed;
    std::vector<std::filesystem::path> files;
};

// Validates, then runs the requested stages in dependency order and writes
// their exports plus summary.json into config.output_dir. Inputs a stage
// needs from earlier stages are recomputed in memory when those stages were
// not selected, so a single stage writes the same bytes as a full run.
// Throws ConfigError or StageError.
RunReport run_pipeline(const ExperimentConfig &config, const std::vector<Stage> &stages);

} // namespace combsep

#endif // COMBSEP_PIPELINE_HPP
