#include "combsep/format.hpp"
#include "combsep/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace combsep
{
namespace
{
using Json = nlohmann::ordered_json;

constexpr std::array<std::string_view, 7> kStageNames = {"cavity", "lcc",  "classify", "sweep",
                                                         "entanglement", "qdc", "spectrum"};

std::string order_tag(int order)
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "order%02d", order);
    return buf;
}

class Run
{
public:
    explicit Run(const ExperimentConfig &cfg) : cfg_(cfg) {}

    RunReport execute(const std::vector<Stage> &selected)
    {
        std::error_code ec;
        std::filesystem::create_directories(cfg_.output_dir, ec);
        if (ec || !std::filesystem::is_directory(cfg_.output_dir))
            throw StageError("cannot create output directory " + cfg_.output_dir.string() + ": " + ec.message());

        for (Stage s : kAllStages) {
            if (std::find(selected.begin(), selected.end(), s) == selected.end())
                continue;
            if (s == Stage::sweep && !cfg_.sweep)
                continue;
            switch (s) {
            case Stage::cavity: stage_cavity(); break;
            case Stage::lcc: stage_lcc(); break;
            case Stage::classify: stage_classify(); break;
            case Stage::sweep: stage_sweep(); break;
            case Stage::entanglement: stage_entanglement(); break;
            case Stage::qdc: stage_qdc(); break;
            case Stage::spectrum: stage_spectrum(); break;
            }
            report_.executed.push_back(s);
        }
        write("summary.json", [&](std::ostream &os) { os << summary_.dump(2) << '\n'; });
        return report_;
    }

private:
    void write(const std::string &name, const std::function<void(std::ostream &)> &body)
    {
        const auto path = cfg_.output_dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw StageError("cannot write " + path.string());
        body(out);
        out.flush();
        if (!out)
            throw StageError("write failed for " + path.string());
        report_.files.push_back(path);
    }

    FrequencyGrid grid() const { return {cfg_.grid_start_hz, cfg_.grid_stop_hz, cfg_.grid_step_hz}; }

    const AmplitudeTrace &opo_trace()
    {
        if (!opo_trace_)
            opo_trace_ = sample_comb_response(cfg_.opo, grid(), 0.0, cfg_.threads);
        return *opo_trace_;
    }

    const AmplitudeTrace &rfc_trace()
    {
        if (!rfc_trace_)
            rfc_trace_ = sample_comb_response(cfg_.rfc1, grid(), cfg_.rfc_detune_hz, cfg_.threads);
        return *rfc_trace_;
    }

    CascadeSpec cascade() const { return {cfg_.opo, cfg_.rfc1, cfg_.rfc2, cfg_.comb}; }

    const std::vector<SeparabilityRecord> &records()
    {
        if (!records_) {
            ClassifyOptions opts;
            opts.thresholds = cfg_.thresholds;
            opts.window = cfg_.window;
            opts.lcc_step_hz = cfg_.grid_step_hz;
            records_ = classify(cascade(), opts);
        }
        return *records_;
    }

    static Json cavity_json(const CavitySpec &c)
    {
        Json j;
        j["fsr_hz"] = c.fsr_hz;
        j["t_in"] = c.t_in;
        j["t_out"] = c.t_out;
        j["round_trip_loss"] = c.round_trip_loss;
        j["finesse"] = c.finesse();
        j["linewidth_hz"] = c.linewidth();
        return j;
    }

    void stage_cavity()
    {
        const auto &opo = opo_trace();
        const auto &rfc = rfc_trace();
        write("opo_trace.csv", [&](std::ostream &os) { write_trace_csv(os, opo, cfg_.trace_stride); });
        write("rfc_trace.csv", [&](std::ostream &os) { write_trace_csv(os, rfc, cfg_.trace_stride); });

        Json cav;
        cav["opo"] = cavity_json(cfg_.opo);
        cav["rfc1"] = cavity_json(cfg_.rfc1);
        cav["rfc1"]["measured_fwhm_hz"] = measured_fwhm(cfg_.rfc1);
        cav["rfc2"] = cavity_json(cfg_.rfc2);
        if (cfg_.mode_cleaner)
            cav["mode_cleaner"] = cavity_json(*cfg_.mode_cleaner);
        cav["order_count"] = cfg_.comb.order_count();
        cav["tooth_count"] = cfg_.comb.tooth_count();
        cav["grid_points"] = opo.values.size();
        cav["coarse_grid_warning"] = opo.coarse_warning || rfc.coarse_warning;
        summary_["cavity"] = cav;
    }

    void stage_lcc()
    {
        const auto scores = lcc_overlap(opo_trace(), rfc_trace(), cfg_.window, cfg_.prominence_floor, cfg_.threads);
        write("overlap.csv", [&](std::ostream &os) { write_overlap_csv(os, scores); });

        Json doc;
        Json w;
        w["width_hz"] = cfg_.window.width_hz;
        w["definition"] =
            cfg_.window.definition == WindowDefinition::fraction_of_fsr ? "fraction_of_fsr" : "absolute";
        w["fsr_fraction"] = cfg_.window.fsr_fraction;
        w["max_lag_steps"] = cfg_.window.max_lag_steps;
        w["correlation"] = std::string(to_string(cfg_.window.correlation));
        doc["window"] = w;
        doc["prominence_floor"] = cfg_.prominence_floor;
        doc["rfc_detune_hz"] = cfg_.rfc_detune_hz;
        Json list = Json::array();
        std::size_t truncated = 0;
        double best = -1.0;
        for (const auto &s : scores) {
            Json e;
            e["peak_index"] = s.peak_index;
            e["center_hz"] = s.center_hz;
            e["R"] = s.r;
            e["lag_steps"] = s.lag_steps;
            e["truncated"] = s.truncated;
            e["degenerate"] = s.degenerate;
            list.push_back(e);
            truncated += s.truncated ? 1 : 0;
            best = std::max(best, s.r);
        }
        doc["scores"] = list;
        write("overlap.json", [&](std::ostream &os) { os << doc.dump(2) << '\n'; });

        Json sum;
        sum["peaks"] = scores.size();
        sum["truncated_windows"] = truncated;
        sum["max_r"] = scores.empty() ? 0.0 : best;
        summary_["lcc"] = sum;
    }

    void stage_classify()
    {
        const auto &recs = records();
        write("classification.csv", [&](std::ostream &os) { write_classification_csv(os, recs); });
        summary_["separable_pairs"] = separable_count(recs);
        summary_["excluded_orders"] = excluded_orders(recs);
    }

    void stage_sweep()
    {
        const auto sweep = optimize_fsr(cascade(), *cfg_.sweep, cfg_.thresholds, cfg_.threads);
        write("sweep.csv", [&](std::ostream &os) { write_sweep_csv(os, sweep); });
        Json s;
        s["candidates"] = sweep.fsr_hz.size();
        s["best_count"] = sweep.best_count;
        s["best_fsr_hz"] = sweep.best_fsr_hz.empty() ? 0.0 : sweep.best_fsr_hz.front();
        s["argmax_size"] = sweep.best_fsr_hz.size();
        int configured = -1;
        double nearest = 0.0;
        for (std::size_t i = 0; i < sweep.fsr_hz.size(); ++i) {
            if (configured < 0 || std::abs(sweep.fsr_hz[i] - cfg_.rfc1.fsr_hz) < std::abs(nearest - cfg_.rfc1.fsr_hz)) {
                configured = sweep.separable[i];
                nearest = sweep.fsr_hz[i];
            }
        }
        s["configured_fsr_hz"] = cfg_.rfc1.fsr_hz;
        s["configured_fsr_count"] = configured;
        s["configured_fsr_attains_best"] = configured == sweep.best_count;
        summary_["sweep"] = s;
    }

    SqueezeSource source() const
    {
        LossBudget detection = cfg_.budget;
        detection.rfc_path = 1.0;
        if (cfg_.source_squeezing_db) {
            SqueezeSource src{*cfg_.source_squeezing_db, *cfg_.source_squeezing_db};
            if (cfg_.source_antisqueezing_db)
                src.antisqueezing_db = *cfg_.source_antisqueezing_db;
            return src;
        }
        SqueezeSource src = SqueezeSource::from_measurement(cfg_.measured_carrier_db, total_efficiency(detection));
        if (cfg_.source_antisqueezing_db)
            src.antisqueezing_db = *cfg_.source_antisqueezing_db;
        return src;
    }

    void stage_entanglement()
    {
        const SqueezeSource src = source();
        LossBudget budget = cfg_.budget;
        if (cfg_.calibrate_rfc_path)
            budget.rfc_path = solve_rfc_path(src, budget, cfg_.calibration_variance);

        std::vector<EprVariance> map;
        for (const auto &rec : records())
            map.push_back(predict_order_variance(src, budget, rec));
        write("entanglement.csv", [&](std::ostream &os) { write_entanglement_csv(os, map); });

        LossBudget detection = budget;
        detection.rfc_path = 1.0;
        Json e;
        e["detection_efficiency"] = total_efficiency(detection);
        e["source_squeezing_db"] = src.squeezing_db;
        e["source_antisqueezing_db"] = src.antisqueezing_db;
        e["rfc_path"] = budget.rfc_path;
        const EprVariance *best = nullptr;
        for (const auto &m : map)
            if (m.separable && (!best || m.entanglement_db > best->entanglement_db))
                best = &m;
        e["max_entanglement_order"] = best ? best->order : 0;
        e["max_entanglement_db"] = best ? best->entanglement_db : 0.0;
        summary_["entanglement"] = e;
    }

    void stage_qdc()
    {
        std::vector<double> grid_v(static_cast<std::size_t>(cfg_.contour_points));
        for (int i = 0; i < cfg_.contour_points; ++i)
            grid_v[static_cast<std::size_t>(i)] =
                cfg_.contour_min + (cfg_.contour_max - cfg_.contour_min) * i / (cfg_.contour_points - 1);
        write("capacity_contour.csv",
              [&](std::ostream &os) { write_capacity_contour_csv(os, grid_v, cfg_.n_bar); });

        Json doc;
        doc["n_bar"] = cfg_.n_bar;
        doc["c_fock"] = fock_capacity(cfg_.n_bar);
        Json orders = Json::array();
        for (const auto &ov : cfg_.qdc_orders) {
            const double v = detection_corrected_variance(ov.variance, cfg_.detection_efficiency);
            Json o;
            o["order"] = ov.order;
            o["v_x"] = v;
            o["v_y"] = v;
            try {
                const auto res = qdc_capacity({v, v, cfg_.n_bar, std::nullopt});
                o["s_x"] = res.allocation.s_x;
                o["s_y"] = res.allocation.s_y;
                o["c_qdc"] = res.c_qdc;
                o["exceeds"] = res.exceeds;
            } catch (const std::invalid_argument &) {
                o["c_qdc"] = nullptr;
                o["exceeds"] = false;
            }
            orders.push_back(o);
        }
        doc["orders"] = orders;
        if (cfg_.n_bar > 0.0) {
            const auto thr = threshold_entanglement(cfg_.n_bar);
            doc["threshold_db"] = thr.db ? Json(*thr.db) : Json(nullptr);
        } else {
            doc["threshold_db"] = nullptr;
        }
        write("capacity.json", [&](std::ostream &os) { os << doc.dump(2) << '\n'; });

        summary_["c_fock"] = doc["c_fock"];
        Json q;
        q["threshold_db"] = doc["threshold_db"];
        q["orders"] = orders;
        summary_["qdc"] = q;
    }

    void stage_spectrum()
    {
        std::vector<Tone> tones;
        for (double f : cfg_.tone_frequencies_hz)
            tones.push_back({f, cfg_.tone_power});
        Json gains = Json::array();
        for (const auto &ov : cfg_.spectrum_orders) {
            const auto pair = synthesize_spectrum(ov.variance, tones, cfg_.spectrum_band);
            const std::string tag = "spectrum_" + order_tag(ov.order);
            write(tag + "_amplitude_sum.csv", [&](std::ostream &os) { write_spectrum_csv(os, pair.amplitude_sum); });
            write(tag + "_phase_difference.csv",
                  [&](std::ostream &os) { write_spectrum_csv(os, pair.phase_difference); });
            Json g;
            g["order"] = ov.order;
            g["floor_db"] = pair.amplitude_sum.floor_db;
            g["snr_gain_db"] = decoded_snr_gain_db(ov.variance);
            gains.push_back(g);
        }
        summary_["spectrum"] = gains;
    }

    const ExperimentConfig &cfg_;
    std::optional<AmplitudeTrace> opo_trace_;
    std::optional<AmplitudeTrace> rfc_trace_;
    std::optional<std::vector<SeparabilityRecord>> records_;
    Json summary_ = Json::object();
    RunReport report_;
};
} // namespace

std::string_view to_string(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

std::optional<Stage> stage_from_string(std::string_view name)
{
    for (std::size_t i = 0; i < kStageNames.size(); ++i)
        if (kStageNames[i] == name)
            return static_cast<Stage>(i);
    return std::nullopt;
}

RunReport run_pipeline(const ExperimentConfig &config, const std::vector<Stage> &stages)
{
    if (auto diags = validate(config); !diags.empty())
        throw ConfigError(std::move(diags));
    try {
        return Run(config).execute(stages);
    } catch (const StageError &) {
        throw;
    } catch (const std::exception &e) {
        throw StageError(e.what());
    }
}

} // namespace combsep
