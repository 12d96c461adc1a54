// lactate_lab: lactate threshold estimation and Dmax protocol precision
// analysis for incremental treadmill tests.
//
// Subcommands: estimate, dmax, precision, report, synth. Stdout carries the
// machine-readable JSON document, stderr the human-readable summary and any
// validation findings. Exit codes: 0 success, 2 input/validation error,
// 3 configuration error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lactate/curve_fit.hpp"
#include "lactate/dmax.hpp"
#include "lactate/errors.hpp"
#include "lactate/heuristic.hpp"
#include "lactate/io.hpp"
#include "lactate/model.hpp"
#include "lactate/precision.hpp"
#include "lactate/stats.hpp"
#include "lactate/synth.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

struct CommonInput {
    std::string input_path;
    double initial_speed_kmh = 9.0;
};

lactate::TestProtocol protocol_for(const CommonInput& common) {
    lactate::TestProtocol protocol;
    protocol.initial_speed_kmh = common.initial_speed_kmh;
    if (common.initial_speed_kmh != 9.0) {
        // Keep the ladder anchored to the same boundary shape.
        protocol.validate();
    }
    return protocol;
}

/// Loads and validates the input file; findings are fatal for analysis
/// commands, so every problem is reported in one pass before exiting.
std::vector<lactate::AthleteTest> load_tests(const CommonInput& common) {
    lactate::io::ParseResult parsed =
        lactate::io::parse_csv_file(common.input_path, protocol_for(common));
    if (!parsed.findings.empty()) {
        for (const auto& f : parsed.findings) {
            std::cerr << "finding: athlete " << f.athlete_id << ": " << f.invariant << " ("
                      << f.message << ")\n";
        }
        throw lactate::DomainError("input failed validation; see findings above");
    }
    return parsed.tests;
}

ordered_json json_interval(const lactate::BcaInterval& ci) {
    return ordered_json{{"low", ci.low}, {"high", ci.high},
                        {"percentile_fallback", ci.percentile_fallback}};
}

ordered_json json_verdict(const lactate::AcceptanceVerdict& v) {
    return ordered_json{{"system_accuracy_pct", v.system_accuracy_pct},
                        {"ceiling_accuracy_pct", v.ceiling_accuracy_pct},
                        {"threshold_pct", v.threshold_pct},
                        {"gap_points", v.gap_points},
                        {"relative_accuracy_pct", v.relative_accuracy_pct},
                        {"absolute_pass", v.absolute_pass},
                        {"relative_pass", v.relative_pass},
                        {"pass", v.pass}};
}

ordered_json json_flags(const std::vector<lactate::OutlierFlag>& flags) {
    ordered_json arr = ordered_json::array();
    for (const auto& f : flags) {
        arr.push_back({{"athlete_id", f.athlete_id}, {"reason", f.reason}, {"manual", f.manual}});
    }
    return arr;
}

void emit(const ordered_json& doc) { std::cout << doc.dump(2) << "\n"; }

int cmd_estimate(const CommonInput& common, double fraction, const std::string& csv_out) {
    const auto tests = load_tests(common);
    ordered_json athletes = ordered_json::array();
    std::string csv = "athlete_id,pts_kmh,ersr_kmh,lt_kmh,lt_pct_ersr,pace_min_per_km\n";
    for (const auto& test : tests) {
        const auto reserve =
            lactate::speed_reserve(test.pts_kmh, test.protocol.initial_speed_kmh);
        const double lt = lactate::heuristic_lt(reserve, fraction);
        const double pct = lactate::transform_lt(lt, reserve).percent;
        const lactate::Pace pace = lactate::speed_to_pace(lt);
        athletes.push_back({{"athlete_id", test.athlete_id},
                            {"pts_kmh", test.pts_kmh},
                            {"ersr_kmh", reserve.ersr_kmh},
                            {"lt_kmh", lt},
                            {"lt_pct_ersr", pct},
                            {"pace_min_per_km", pace.min_per_km},
                            {"pace_display", lactate::io::format_pace_clock(pace.min_per_km)}});
        csv += test.athlete_id + ',' + lactate::io::format_number(test.pts_kmh) + ',' +
               lactate::io::format_number(reserve.ersr_kmh) + ',' +
               lactate::io::format_number(lt) + ',' + lactate::io::format_number(pct) + ',' +
               lactate::io::format_number(pace.min_per_km) + '\n';
        std::cerr << test.athlete_id << ": LT " << lactate::io::format_number(lt) << " km/h, "
                  << lactate::io::format_pace_clock(pace.min_per_km) << " min/km\n";
    }
    if (!csv_out.empty()) lactate::io::write_text_file(csv_out, csv);

    ordered_json doc{{"schema_version", "1"},
                     {"command", "estimate"},
                     {"config", {{"input", common.input_path},
                                 {"initial_speed_kmh", common.initial_speed_kmh},
                                 {"fraction", fraction}}},
                     {"results", {{"athletes", athletes}}}};
    emit(doc);
    return kExitOk;
}

int cmd_dmax(const CommonInput& common, int degree, double rss_threshold,
             const std::vector<std::string>& exclude_ids) {
    const auto tests = load_tests(common);
    const auto flags = lactate::flag_outliers(tests, exclude_ids, {degree, rss_threshold});

    ordered_json athletes = ordered_json::array();
    for (const auto& test : tests) {
        ordered_json row{{"athlete_id", test.athlete_id}, {"pts_kmh", test.pts_kmh}};
        try {
            const auto curve = lactate::fit_lactate_curve(test.points, degree);
            const auto est = lactate::dmax_lt(curve, test.points.front(), test.points.back());
            const auto reserve =
                lactate::speed_reserve(test.pts_kmh, test.protocol.initial_speed_kmh);
            const lactate::Pace pace = lactate::speed_to_pace(est.lt_speed_kmh);
            row["lt_kmh"] = est.lt_speed_kmh;
            row["lt_lactate_mmol_l"] = est.lt_lactate_mmol_l;
            row["lt_pct_ersr"] = lactate::transform_lt(est.lt_speed_kmh, reserve).percent;
            row["pace_min_per_km"] = pace.min_per_km;
            row["pace_display"] = lactate::io::format_pace_clock(pace.min_per_km);
            row["max_distance"] = est.max_distance;
            row["fit"] = {{"degree", curve.degree},
                          {"coefficients", curve.poly.coef},
                          {"rss", curve.rss},
                          {"speed_min_kmh", curve.speed_min_kmh},
                          {"speed_max_kmh", curve.speed_max_kmh}};
            std::cerr << test.athlete_id << ": Dmax LT "
                      << lactate::io::format_number(est.lt_speed_kmh) << " km/h ("
                      << lactate::io::format_pace_clock(pace.min_per_km) << " min/km)\n";
        } catch (const lactate::Error& e) {
            row["error"] = e.what();
            std::cerr << test.athlete_id << ": Dmax failed: " << e.what() << "\n";
        }
        athletes.push_back(row);
    }

    ordered_json doc{{"schema_version", "1"},
                     {"command", "dmax"},
                     {"config", {{"input", common.input_path},
                                 {"initial_speed_kmh", common.initial_speed_kmh},
                                 {"degree", degree},
                                 {"rss_threshold", rss_threshold},
                                 {"exclude", exclude_ids}}},
                     {"results", {{"athletes", athletes}, {"advisories", json_flags(flags)}}}};
    emit(doc);
    return kExitOk;
}

int cmd_precision(const CommonInput& common, const lactate::PrecisionConfig& config,
                  const std::string& samples_out) {
    const auto tests = load_tests(common);
    const auto report = lactate::dmax_precision(tests, config);

    ordered_json rows = ordered_json::array();
    for (const auto& g : report.per_point_count) {
        rows.push_back({{"point_count", g.point_count},
                        {"n_athletes", g.n_athletes},
                        {"n_samples", g.n_samples},
                        {"n_dropped", g.n_dropped},
                        {"sem_pct_ersr", g.sem_pct_ersr},
                        {"sem_kmh", g.sem_kmh},
                        {"r_squared", g.r_squared}});
        std::cerr << g.point_count << " lactate points: SEM "
                  << lactate::io::format_number(g.sem_pct_ersr) << " %ERSR ("
                  << lactate::io::format_number(g.sem_kmh) << " km/h), R^2 "
                  << lactate::io::format_number(g.r_squared) << "\n";
    }
    std::cerr << "ceiling accuracy: " << lactate::io::format_number(report.ceiling_accuracy_pct)
              << "%\n";
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";

    if (!samples_out.empty()) {
        lactate::io::write_text_file(samples_out,
                                     lactate::io::error_samples_csv(report.error_samples));
    }

    // n_threads is an execution detail: it never changes the numbers, so it
    // stays out of the echoed config to keep reruns byte-identical.
    ordered_json doc{
        {"schema_version", "1"},
        {"command", "precision"},
        {"config", {{"input", common.input_path},
                    {"initial_speed_kmh", common.initial_speed_kmh},
                    {"measurement_sd", config.measurement_sd},
                    {"bootstrap_resamples", config.n_bootstrap_resamples},
                    {"random_samples", config.n_random_samples},
                    {"seed", config.master_seed},
                    {"degree", config.degree}}},
        {"results", {{"per_point_count", rows},
                     {"ceiling_accuracy_pct", report.ceiling_accuracy_pct},
                     {"n_samples_total", report.n_samples_total},
                     {"n_dropped_total", report.n_dropped_total},
                     {"drop_rate", report.drop_rate},
                     {"n_scope_skipped", report.n_scope_skipped},
                     {"warnings", report.warnings}}}};
    emit(doc);
    return kExitOk;
}

int cmd_report(const CommonInput& common, const lactate::PopulationConfig& config,
               const std::string& residuals_out) {
    const auto tests = load_tests(common);
    const auto report = lactate::build_population_report(tests, config);

    ordered_json residuals = ordered_json::array();
    for (const auto& r : report.residuals) {
        residuals.push_back({{"athlete_id", r.athlete_id},
                             {"reference_lt_kmh", r.reference_lt_kmh},
                             {"estimated_lt_kmh", r.estimated_lt_kmh},
                             {"residual_s_per_km", r.residual_s_km},
                             {"acceptable_limit_s_per_km", r.acceptable_limit_s_km},
                             {"within", r.within}});
    }
    ordered_json exclusions = ordered_json::array();
    for (const auto& e : report.exclusions) {
        exclusions.push_back({{"athlete_id", e.athlete_id}, {"reason", e.reason}});
    }

    if (!residuals_out.empty()) {
        lactate::io::write_text_file(residuals_out, lactate::io::residuals_csv(report.residuals));
    }

    std::cerr << "included " << report.n_included << ", excluded " << report.n_excluded << "\n";
    std::cerr << "mean transformed LT " << lactate::io::format_number(report.mean_transformed_lt_pct)
              << "% ERSR, CI (" << lactate::io::format_number(report.ci.low) << " - "
              << lactate::io::format_number(report.ci.high) << ")\n";
    std::cerr << "system accuracy " << lactate::io::format_number(report.system_accuracy_pct)
              << "%, ceiling " << lactate::io::format_number(report.ceiling_accuracy_pct)
              << (report.ceiling_computed ? "% (computed)" : "% (zero-noise default)") << "\n";
    std::cerr << "verdict: " << (report.verdict.pass ? "PASS" : "FAIL") << " (relative accuracy "
              << lactate::io::format_number(report.verdict.relative_accuracy_pct)
              << "% vs threshold " << lactate::io::format_number(config.acceptance_threshold_pct)
              << "%)\n";

    ordered_json config_json{{"input", common.input_path},
                             {"initial_speed_kmh", common.initial_speed_kmh},
                             {"fraction", config.fraction},
                             {"degree", config.degree},
                             {"exclude", config.exclude_ids},
                             {"threshold_pct", config.acceptance_threshold_pct},
                             {"bca_resamples", config.bca_resamples},
                             {"bca_confidence", config.bca_confidence},
                             {"seed", config.seed},
                             {"rss_threshold", config.rss_threshold}};
    if (config.precision.has_value()) {
        config_json["measurement_sd"] = config.precision->measurement_sd;
        config_json["bootstrap_resamples"] = config.precision->n_bootstrap_resamples;
        config_json["random_samples"] = config.precision->n_random_samples;
    }

    ordered_json doc{
        {"schema_version", "1"},
        {"command", "report"},
        {"config", config_json},
        {"results",
         {{"n_included", report.n_included},
          {"n_excluded", report.n_excluded},
          {"mean_transformed_lt_pct", report.mean_transformed_lt_pct},
          {"ci", json_interval(report.ci)},
          {"system_accuracy_pct", report.system_accuracy_pct},
          {"ceiling_accuracy_pct", report.ceiling_accuracy_pct},
          {"ceiling_source", report.ceiling_computed ? "computed" : "zero-noise-default"},
          {"total_accuracy_gap_points", report.total_accuracy_gap},
          {"verdict", json_verdict(report.verdict)},
          {"residuals", residuals},
          {"advisories", json_flags(report.advisories)},
          {"exclusions", exclusions}}}};
    emit(doc);
    return kExitOk;
}

int cmd_synth(const lactate::SynthConfig& config, const std::string& out_path) {
    const auto population = lactate::generate_population(config);
    const std::string csv = lactate::io::to_csv(population);
    if (out_path == "-") {
        std::cout << csv;
        return kExitOk;
    }
    lactate::io::write_text_file(out_path, csv);

    std::size_t n_points = 0;
    for (const auto& t : population) n_points += t.points.size();
    std::cerr << "wrote " << population.size() << " athletes (" << n_points << " points) to "
              << out_path << "\n";

    ordered_json doc{{"schema_version", "1"},
                     {"command", "synth"},
                     {"config", {{"athletes", config.n_athletes},
                                 {"points", config.points_per_athlete},
                                 {"seed", config.seed},
                                 {"lt_percent_mean", config.lt_percent_mean},
                                 {"lt_percent_sd", config.lt_percent_sd},
                                 {"pts_min_kmh", config.pts_range_kmh.first},
                                 {"pts_max_kmh", config.pts_range_kmh.second},
                                 {"baseline_lactate", config.baseline_lactate_mmol_l},
                                 {"curve_noise_sd", config.curve_noise_sd},
                                 {"out", out_path}}},
                     {"results", {{"n_athletes", population.size()}, {"n_points", n_points}}}};
    emit(doc);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lactate threshold estimation and Dmax protocol precision analysis"};
    app.require_subcommand(1);

    // estimate
    CommonInput est_in;
    double est_fraction = 0.60;
    std::string est_csv;
    auto* estimate = app.add_subcommand("estimate", "Speed-reserve heuristic LT per athlete");
    estimate->add_option("--input", est_in.input_path, "Input test CSV")->required();
    estimate->add_option("--initial-speed", est_in.initial_speed_kmh, "Protocol initial speed (km/h)");
    estimate->add_option("--fraction", est_fraction, "Fraction of ERSR (default 0.60)");
    estimate->add_option("--csv", est_csv, "Also write per-athlete results CSV here");

    // dmax
    CommonInput dmax_in;
    int dmax_degree = 3;
    double dmax_rss = 2.0;
    std::vector<std::string> dmax_exclude;
    auto* dmax = app.add_subcommand("dmax", "Blood-sample Dmax LT per athlete");
    dmax->add_option("--input", dmax_in.input_path, "Input test CSV")->required();
    dmax->add_option("--initial-speed", dmax_in.initial_speed_kmh, "Protocol initial speed (km/h)");
    dmax->add_option("--degree", dmax_degree, "Polynomial degree (default 3)");
    dmax->add_option("--rss-threshold", dmax_rss, "Advisory RSS threshold");
    dmax->add_option("--exclude", dmax_exclude, "Athlete ids to flag as manual outliers");

    // precision
    CommonInput prec_in;
    lactate::PrecisionConfig prec_config;
    std::string prec_samples_out;
    auto* precision = app.add_subcommand("precision", "Dmax protocol precision via Monte Carlo");
    precision->add_option("--input", prec_in.input_path, "Input test CSV")->required();
    precision->add_option("--initial-speed", prec_in.initial_speed_kmh, "Protocol initial speed (km/h)");
    precision->add_option("--measurement-sd", prec_config.measurement_sd,
                          "Blood lactate analyzer precision SD (mmol/L)")->required();
    precision->add_option("--bootstrap", prec_config.n_bootstrap_resamples, "Bootstrap resamples");
    precision->add_option("--samples", prec_config.n_random_samples,
                          "Random samples per measurement");
    precision->add_option("--seed", prec_config.master_seed, "Master seed")
        ->envname("LACTATE_LAB_SEED");
    precision->add_option("--degree", prec_config.degree, "Polynomial degree (default 3)");
    precision->add_option("--threads", prec_config.n_threads,
                          "Worker threads (0 = hardware); never changes results");
    precision->add_option("--samples-out", prec_samples_out,
                          "Write the aggregated error samples CSV here");

    // report
    CommonInput rep_in;
    lactate::PopulationConfig rep_config;
    lactate::PrecisionConfig rep_precision;
    bool rep_has_sd = false;
    std::string rep_residuals_out;
    auto* report = app.add_subcommand("report", "Population report: heuristic vs Dmax");
    report->add_option("--input", rep_in.input_path, "Input test CSV")->required();
    report->add_option("--initial-speed", rep_in.initial_speed_kmh, "Protocol initial speed (km/h)");
    report->add_option("--exclude", rep_config.exclude_ids, "Athlete ids to exclude (manual outliers)");
    report->add_option("--threshold", rep_config.acceptance_threshold_pct,
                       "Acceptance threshold in % (default 95)");
    report->add_option("--fraction", rep_config.fraction, "Heuristic fraction (default 0.60)");
    report->add_option("--degree", rep_config.degree, "Polynomial degree (default 3)");
    report->add_option("--bca-resamples", rep_config.bca_resamples, "Bootstrap resamples for the CI");
    report->add_option("--seed", rep_config.seed, "Seed for the CI bootstrap and precision engine")
        ->envname("LACTATE_LAB_SEED");
    report->add_option("--rss-threshold", rep_config.rss_threshold, "Advisory RSS threshold");
    report->add_option("--measurement-sd", rep_precision.measurement_sd,
                       "Enable computed ceiling accuracy with this analyzer SD (mmol/L)");
    report->add_option("--bootstrap", rep_precision.n_bootstrap_resamples,
                       "Precision bootstrap resamples");
    report->add_option("--samples", rep_precision.n_random_samples,
                       "Precision random samples per measurement");
    report->add_option("--threads", rep_precision.n_threads,
                       "Precision worker threads (0 = hardware); never changes results");
    report->add_option("--residuals-out", rep_residuals_out, "Write residual plot data CSV here");
    report->parse_complete_callback([&]() {
        rep_has_sd = report->count("--measurement-sd") > 0;
    });

    // synth
    lactate::SynthConfig synth_config;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic test population CSV");
    synth->add_option("--athletes", synth_config.n_athletes, "Number of athletes")->required();
    synth->add_option("--points", synth_config.points_per_athlete, "Lactate points per athlete")
        ->required();
    synth->add_option("--seed", synth_config.seed, "Seed")->envname("LACTATE_LAB_SEED");
    synth->add_option("--out", synth_out, "Output CSV path ('-' for stdout)")->required();
    synth->add_option("--lt-mean", synth_config.lt_percent_mean, "Target LT mean (% ERSR)");
    synth->add_option("--lt-sd", synth_config.lt_percent_sd, "Target LT SD (% ERSR)");
    synth->add_option("--noise-sd", synth_config.curve_noise_sd, "Observation noise SD (mmol/L)");
    synth->add_option("--pts-min", synth_config.pts_range_kmh.first, "Lowest PTS (km/h)");
    synth->add_option("--pts-max", synth_config.pts_range_kmh.second, "Highest PTS (km/h)");
    synth->add_option("--baseline", synth_config.baseline_lactate_mmol_l,
                      "Baseline lactate (mmol/L)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (estimate->parsed()) return cmd_estimate(est_in, est_fraction, est_csv);
        if (dmax->parsed()) return cmd_dmax(dmax_in, dmax_degree, dmax_rss, dmax_exclude);
        if (precision->parsed()) return cmd_precision(prec_in, prec_config, prec_samples_out);
        if (report->parsed()) {
            if (rep_has_sd) {
                rep_precision.master_seed = rep_config.seed;
                rep_precision.degree = rep_config.degree;
                rep_config.precision = rep_precision;
            }
            return cmd_report(rep_in, rep_config, rep_residuals_out);
        }
        if (synth->parsed()) return cmd_synth(synth_config, synth_out);
    } catch (const lactate::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const lactate::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitConfig;
}
