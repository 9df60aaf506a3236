#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "wdf/baselines.hpp"
#include "wdf/clustering.hpp"
#include "wdf/eval.hpp"
#include "wdf/forecaster.hpp"
#include "wdf/repr.hpp"
#include "wdf/synth.hpp"

// The orchestration layer behind the `wdf` command line tool: one declarative
// JSON config drives synthetic data generation or ingestion, representation
// learning, clustering, forecaster/baseline training, rolling evaluation,
// comparison tables and figures. Every artifact lands in a run directory
// named by the config hash, and a manifest records what was produced.
namespace wdf::pipeline {

struct DataConfig {
    std::string meters_csv;     // empty: generate from the synth section instead
    std::string weather_csv;
    std::string holidays_file;  // optional
    int utc_offset_hours = 0;
    std::string gap_policy = "interpolate_short";
    int max_gap_hours = 6;
};

struct SynthSection {
    int weeks = 0;  // 0 marks the section absent
    std::uint64_t seed = 1;
    std::vector<synth::ArchetypeSpec> archetypes;
};

struct SplitSection {
    int test_weeks = 26;
    double val_fraction = 0.10;
};

struct ProfilesSection {
    int window_weeks = 12;
    int stride_weeks = 4;
};

struct ClusterSection {
    int k_max = 4;
};

struct ArimaSection {
    bool auto_order = true;                    // small AIC grid search when set
    baselines::ArimaOrder order;               // used directly otherwise
};

struct EvaluateSection {
    std::size_t stride = 24;      // hours between rolling-evaluation origins
    bool per_day_average = false; // average per-origin MAPEs instead of pooling hours
    double epsilon = 1e-6;        // zero-demand exclusion threshold, m^3/h
};

struct PipelineConfig {
    std::uint64_t seed = 0;  // master seed; stage seeds default to it
    std::string out_dir = "runs";
    DataConfig data;
    SynthSection synth;
    SplitSection split;
    ProfilesSection profiles;
    repr::EncoderConfig encoder;
    repr::ContrastConfig contrast;
    ClusterSection cluster;
    std::vector<std::string> wavelet_candidates;  // default gaus1..gaus8
    forecaster::ForecastConfig forecast;          // wavelet may be "auto"
    baselines::LstmConfig lstm;
    ArimaSection arima;
    EvaluateSection evaluate;

    std::string canonical_json;   // the effective config, sorted keys
    std::uint64_t config_hash = 0;

    // <out_dir>/run-<16 hex digits of the config hash>
    std::string run_dir() const;
};

std::uint64_t fnv1a64(std::string_view text);

// Parses config JSON, applies defaults, rejects unknown keys, and stamps the
// canonical serialization + hash. Overrides are dot-path assignments applied
// before validation, e.g. "forecast.scales=12" or "synth.seed=3".
PipelineConfig parse_config(const std::string& json_text,
                            const std::vector<std::string>& overrides = {});
PipelineConfig load_config(const std::string& path,
                           const std::vector<std::string>& overrides = {});

struct LoadedData {
    data::DmaDataset dataset;
    std::map<std::string, std::string> labels;  // synthetic ground truth, may be empty
    int filled_hours = 0;                       // gap-filled hours during ingestion
};

// Materializes the dataset the config describes: from the CSV paths when
// data.meters_csv is set, otherwise deterministically from the synth section.
LoadedData load_dataset(const PipelineConfig& config);

// Pass-through unless forecast.wavelet is "auto", which picks the candidate
// with the lowest mean entropy-to-energy ratio over train-split weekly
// windows of the total demand.
std::string resolve_wavelet(const PipelineConfig& config, const std::vector<double>& total,
                            std::size_t train_end);

// Rewrites <run_dir>/manifest.json: config hash, seed, the full effective
// config, and every artifact file with its size. No timestamps, so reruns
// with identical inputs rewrite identical bytes.
void write_manifest(const PipelineConfig& config);

// Model keys accepted by train-forecast/evaluate/plot: "attention",
// "ablation", "lstm", "arima", "naive".
std::string model_display_name(const std::string& key);

void cmd_synth_generate(const PipelineConfig& config);
void cmd_ingest(const PipelineConfig& config);
void cmd_train_repr(const PipelineConfig& config);
void cmd_embed(const PipelineConfig& config);
void cmd_cluster(const PipelineConfig& config);
void cmd_train_forecast(const PipelineConfig& config, const std::string& model);
eval::MetricReport cmd_evaluate(const PipelineConfig& config, const std::string& model);
// Empty model list: compare every report present in the run directory.
eval::Comparison cmd_compare(const PipelineConfig& config, std::vector<std::string> models = {});
void cmd_plot(const PipelineConfig& config, const std::string& model, int weeks = 2);

// The `wdf` entry point; returns a process exit code. Usage problems (unknown
// subcommand, bad flags, invalid config) exit non-zero with a message.
int run_cli(int argc, const char* const* argv);

}  // namespace wdf::pipeline
