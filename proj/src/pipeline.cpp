#include "wdf/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wdf/csv_io.hpp"
#include "wdf/data_ops.hpp"
#include "wdf/errors.hpp"
#include "wdf/log.hpp"
#include "wdf/plots.hpp"
#include "wdf/profiles.hpp"
#include "wdf/wavelets.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace wdf::pipeline {

namespace {

std::string hex16(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string format_2f(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// ---- config parsing -------------------------------------------------------

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        throw InvalidArgumentError("config: '" + path + "' must be an object");
    }
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (item.key() == a) {
                known = true;
                break;
            }
        }
        if (!known) {
            const std::string full = path.empty() ? item.key() : path + "." + item.key();
            throw InvalidArgumentError("config: unknown key '" + full + "'");
        }
    }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        const std::string full = path.empty() ? key : path + "." + key;
        throw InvalidArgumentError("config: wrong type for '" + full + "'");
    }
}

// Dot-path assignment into the raw JSON tree; the value is parsed as JSON
// when it is valid JSON and kept as a string otherwise, so both
// `forecast.scales=12` and `forecast.wavelet=gaus3` read naturally.
void apply_override(json& root, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw InvalidArgumentError("config override must look like section.key=value: '" + spec +
                                   "'");
    }
    const std::string path = spec.substr(0, eq);
    const std::string raw = spec.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;
    }
    json* node = &root;
    std::size_t begin = 0;
    while (true) {
        const auto dot = path.find('.', begin);
        const std::string key =
            dot == std::string::npos ? path.substr(begin) : path.substr(begin, dot - begin);
        if (key.empty()) {
            throw InvalidArgumentError("config override has an empty path segment: '" + spec +
                                       "'");
        }
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        if (!node->is_object() && !node->is_null()) {
            throw InvalidArgumentError("config override descends through a non-object: '" + spec +
                                       "'");
        }
        begin = dot + 1;
    }
}

json config_to_json(const PipelineConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;

    j["data"]["meters_csv"] = c.data.meters_csv;
    j["data"]["weather_csv"] = c.data.weather_csv;
    j["data"]["holidays_file"] = c.data.holidays_file;
    j["data"]["utc_offset_hours"] = c.data.utc_offset_hours;
    j["data"]["gap_policy"] = c.data.gap_policy;
    j["data"]["max_gap_hours"] = c.data.max_gap_hours;

    j["synth"]["weeks"] = c.synth.weeks;
    j["synth"]["seed"] = c.synth.seed;
    json archetypes = json::array();
    for (const auto& a : c.synth.archetypes) {
        json e;
        e["kind"] = synth::to_string(a.kind);
        e["count"] = a.count;
        e["base_level"] = a.base_level;
        e["noise_std"] = a.noise_std;
        e["seed"] = a.seed;
        archetypes.push_back(std::move(e));
    }
    j["synth"]["archetypes"] = std::move(archetypes);

    j["split"]["test_weeks"] = c.split.test_weeks;
    j["split"]["val_fraction"] = c.split.val_fraction;

    j["profiles"]["window_weeks"] = c.profiles.window_weeks;
    j["profiles"]["stride_weeks"] = c.profiles.stride_weeks;

    j["encoder"]["input_channels"] = c.encoder.input_channels;
    j["encoder"]["hidden_dim"] = c.encoder.hidden_dim;
    j["encoder"]["kernel_size"] = c.encoder.kernel_size;
    j["encoder"]["blocks"] = c.encoder.blocks;
    j["encoder"]["output_dim"] = c.encoder.output_dim;

    j["contrast"]["alpha"] = c.contrast.alpha;
    j["contrast"]["batch_size"] = c.contrast.batch_size;
    j["contrast"]["max_epochs"] = c.contrast.max_epochs;
    j["contrast"]["learning_rate"] = c.contrast.learning_rate;
    j["contrast"]["min_improvement"] = c.contrast.min_improvement;
    j["contrast"]["patience"] = c.contrast.patience;

    j["cluster"]["k_max"] = c.cluster.k_max;

    j["wavelet_candidates"] = c.wavelet_candidates;

    j["forecast"]["horizon"] = c.forecast.horizon;
    j["forecast"]["context"] = c.forecast.context;
    j["forecast"]["scales"] = c.forecast.scales;
    j["forecast"]["learning_rate"] = c.forecast.learning_rate;
    j["forecast"]["batch_size"] = c.forecast.batch_size;
    j["forecast"]["patience"] = c.forecast.patience;
    j["forecast"]["max_epochs"] = c.forecast.max_epochs;
    j["forecast"]["origin_stride"] = c.forecast.origin_stride;
    j["forecast"]["wavelet"] = c.forecast.wavelet;
    j["forecast"]["seed"] = c.forecast.seed;
    j["forecast"]["d_model"] = c.forecast.d_model;
    j["forecast"]["conv_channels1"] = c.forecast.conv_channels1;
    j["forecast"]["conv_channels2"] = c.forecast.conv_channels2;
    j["forecast"]["ffn1"] = c.forecast.ffn1;
    j["forecast"]["ffn2"] = c.forecast.ffn2;
    j["forecast"]["ffn3"] = c.forecast.ffn3;

    j["lstm"]["horizon"] = c.lstm.horizon;
    j["lstm"]["lag"] = c.lstm.lag;
    j["lstm"]["hidden"] = c.lstm.hidden;
    j["lstm"]["learning_rate"] = c.lstm.learning_rate;
    j["lstm"]["batch_size"] = c.lstm.batch_size;
    j["lstm"]["patience"] = c.lstm.patience;
    j["lstm"]["max_epochs"] = c.lstm.max_epochs;
    j["lstm"]["origin_stride"] = c.lstm.origin_stride;
    j["lstm"]["seed"] = c.lstm.seed;

    j["arima"]["auto_order"] = c.arima.auto_order;
    j["arima"]["p"] = c.arima.order.p;
    j["arima"]["d"] = c.arima.order.d;
    j["arima"]["q"] = c.arima.order.q;

    j["evaluate"]["stride"] = c.evaluate.stride;
    j["evaluate"]["per_day_average"] = c.evaluate.per_day_average;
    j["evaluate"]["epsilon"] = c.evaluate.epsilon;
    return j;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw InvalidArgumentError(message);
}

std::string require_artifact(const PipelineConfig& cfg, const std::string& rel,
                             const std::string& producer) {
    const auto path = cfg.run_dir() + "/" + rel;
    if (!fs::exists(path)) {
        throw InvalidArgumentError("missing artifact '" + path + "'; run `wdf " + producer +
                                   "` first");
    }
    return path;
}

// ---- dataset assembly -----------------------------------------------------

LoadedData generate_synthetic(const PipelineConfig& cfg) {
    require(cfg.synth.weeks > 0 && !cfg.synth.archetypes.empty(),
            "config: the synth section needs weeks > 0 and at least one archetype");
    const auto dma =
        synth::generate_dma(cfg.synth.archetypes, cfg.synth.weeks, cfg.synth.seed,
                            cfg.split.test_weeks);
    LoadedData out;
    out.dataset = dma.dataset;
    out.labels = dma.labels;
    out.dataset.split = data::chronological_split(out.dataset.hours(), cfg.split.test_weeks,
                                                  cfg.split.val_fraction);
    return out;
}

LoadedData ingest_files(const PipelineConfig& cfg) {
    require(!cfg.data.weather_csv.empty(), "config: data.weather_csv is required for ingestion");
    const auto policy = data::gap_policy_from_string(cfg.data.gap_policy);
    const auto raw = data::load_meter_csv(cfg.data.meters_csv);
    require(!raw.empty(), "ingest: '" + cfg.data.meters_csv + "' holds no meters");

    LoadedData out;
    for (const auto& meter : raw) {
        auto rr = data::resample_hourly(meter, policy, cfg.data.max_gap_hours);
        if (rr.dropped) {
            // too gappy to interpolate: keep the observed hours in the DMA
            // total (zeros elsewhere) but leave the meter out of profiling
            auto zeroed = data::resample_hourly(meter, data::GapPolicy::zero_fill,
                                                cfg.data.max_gap_hours);
            out.dataset.meters.push_back(std::move(*zeroed.series));
            out.dataset.clustering_excluded.push_back(meter.meter_id);
            log::warn("ingest: meter '" + meter.meter_id + "' dropped from profiling (gap of " +
                      std::to_string(rr.longest_gap) + " h)");
        } else {
            out.dataset.meters.push_back(std::move(*rr.series));
            out.filled_hours += rr.filled_hours;
        }
    }
    const auto& first = out.dataset.meters.front();
    for (const auto& m : out.dataset.meters) {
        if (m.start != first.start || m.values.size() != first.values.size()) {
            throw AlignmentError("ingest: meter '" + m.meter_id +
                                 "' does not share the common hourly grid");
        }
    }
    out.dataset.weather = data::load_weather_csv(cfg.data.weather_csv);
    if (out.dataset.weather.start != first.start ||
        out.dataset.weather.size() != first.values.size()) {
        throw AlignmentError("ingest: weather grid does not match the meter grid");
    }
    if (!cfg.data.holidays_file.empty()) {
        out.dataset.holidays = data::load_holiday_file(cfg.data.holidays_file);
    }
    out.dataset.utc_offset_hours = cfg.data.utc_offset_hours;
    out.dataset.split = data::chronological_split(out.dataset.hours(), cfg.split.test_weeks,
                                                  cfg.split.val_fraction);
    return out;
}

std::vector<profiles::ProfileSample> profile_samples(const PipelineConfig& cfg,
                                                     const data::DmaDataset& dataset) {
    const std::set<std::string> excluded(dataset.clustering_excluded.begin(),
                                         dataset.clustering_excluded.end());
    const std::size_t end = dataset.split.train_end;
    const int windows =
        profiles::window_count(end, cfg.profiles.window_weeks, cfg.profiles.stride_weeks);
    if (windows < 1) {
        throw InsufficientDataError(
            "profiles: the train split is shorter than one profile window (" +
            std::to_string(cfg.profiles.window_weeks) + " weeks)");
    }
    std::vector<profiles::ProfileSample> samples;
    for (const auto& meter : dataset.meters) {
        if (excluded.count(meter.meter_id)) continue;
        for (int w = 0; w < windows; ++w) {
            samples.push_back(profiles::build_sample(meter, 0, end, dataset.utc_offset_hours, w,
                                                     cfg.profiles.window_weeks,
                                                     cfg.profiles.stride_weeks));
        }
    }
    if (samples.empty()) {
        throw InsufficientDataError("profiles: every meter is excluded from profiling");
    }
    return samples;
}

std::vector<data::DemandSeries> load_cluster_demands(const PipelineConfig& cfg,
                                                     const data::DmaDataset& dataset) {
    const auto path = require_artifact(cfg, "clusters.csv", "cluster");
    const auto assignment = clustering::load_assignment_csv(path);
    clustering::ClusterResult result;
    result.assignment = assignment;
    for (const auto& [id, c] : assignment) result.k = std::max(result.k, c + 1);
    std::vector<data::MeterSeries> assigned;
    for (const auto& m : dataset.meters) {
        if (assignment.count(m.meter_id)) assigned.push_back(m);
    }
    return clustering::cluster_demands(result, assigned);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string PipelineConfig::run_dir() const { return out_dir + "/run-" + hex16(config_hash); }

PipelineConfig parse_config(const std::string& json_text,
                            const std::vector<std::string>& overrides) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    for (const auto& ov : overrides) apply_override(root, ov);

    check_keys(root, "",
               {"seed", "out_dir", "data", "synth", "split", "profiles", "encoder", "contrast",
                "cluster", "wavelet_candidates", "forecast", "lstm", "arima", "evaluate"});

    PipelineConfig cfg;
    read_field(root, "seed", cfg.seed, "");
    read_field(root, "out_dir", cfg.out_dir, "");
    require(!cfg.out_dir.empty(), "config: out_dir must not be empty");

    // stage seeds follow the master seed unless set explicitly below
    cfg.synth.seed = cfg.seed;
    cfg.forecast.seed = cfg.seed;
    cfg.lstm.seed = cfg.seed;
    cfg.wavelet_candidates = {"gaus1", "gaus2", "gaus3", "gaus4",
                              "gaus5", "gaus6", "gaus7", "gaus8"};

    if (const auto* d = find(root, "data")) {
        check_keys(*d, "data",
                   {"meters_csv", "weather_csv", "holidays_file", "utc_offset_hours",
                    "gap_policy", "max_gap_hours"});
        read_field(*d, "meters_csv", cfg.data.meters_csv, "data");
        read_field(*d, "weather_csv", cfg.data.weather_csv, "data");
        read_field(*d, "holidays_file", cfg.data.holidays_file, "data");
        read_field(*d, "utc_offset_hours", cfg.data.utc_offset_hours, "data");
        read_field(*d, "gap_policy", cfg.data.gap_policy, "data");
        read_field(*d, "max_gap_hours", cfg.data.max_gap_hours, "data");
        (void)data::gap_policy_from_string(cfg.data.gap_policy);  // name validation
    }

    if (const auto* s = find(root, "synth")) {
        check_keys(*s, "synth", {"weeks", "seed", "archetypes"});
        read_field(*s, "weeks", cfg.synth.weeks, "synth");
        read_field(*s, "seed", cfg.synth.seed, "synth");
        if (const auto* arr = find(*s, "archetypes")) {
            if (!arr->is_array()) {
                throw InvalidArgumentError("config: 'synth.archetypes' must be an array");
            }
            int index = 0;
            for (const auto& a : *arr) {
                check_keys(a, "synth.archetypes[]",
                           {"kind", "count", "base_level", "noise_std", "seed"});
                synth::ArchetypeSpec spec;
                spec.seed = cfg.synth.seed + 1 + static_cast<std::uint64_t>(index);
                std::string kind = "residential";
                read_field(a, "kind", kind, "synth.archetypes[]");
                spec.kind = synth::archetype_from_string(kind);
                read_field(a, "count", spec.count, "synth.archetypes[]");
                read_field(a, "base_level", spec.base_level, "synth.archetypes[]");
                read_field(a, "noise_std", spec.noise_std, "synth.archetypes[]");
                read_field(a, "seed", spec.seed, "synth.archetypes[]");
                cfg.synth.archetypes.push_back(spec);
                ++index;
            }
        }
        require(cfg.synth.weeks <= 0 || !cfg.synth.archetypes.empty(),
                "config: synth.weeks is set but synth.archetypes is empty");
    }

    if (const auto* s = find(root, "split")) {
        check_keys(*s, "split", {"test_weeks", "val_fraction"});
        read_field(*s, "test_weeks", cfg.split.test_weeks, "split");
        read_field(*s, "val_fraction", cfg.split.val_fraction, "split");
    }

    if (const auto* s = find(root, "profiles")) {
        check_keys(*s, "profiles", {"window_weeks", "stride_weeks"});
        read_field(*s, "window_weeks", cfg.profiles.window_weeks, "profiles");
        read_field(*s, "stride_weeks", cfg.profiles.stride_weeks, "profiles");
        require(cfg.profiles.window_weeks > 0 && cfg.profiles.stride_weeks > 0,
                "config: profile window/stride must be positive");
    }

    if (const auto* s = find(root, "encoder")) {
        check_keys(*s, "encoder",
                   {"input_channels", "hidden_dim", "kernel_size", "blocks", "output_dim"});
        read_field(*s, "input_channels", cfg.encoder.input_channels, "encoder");
        read_field(*s, "hidden_dim", cfg.encoder.hidden_dim, "encoder");
        read_field(*s, "kernel_size", cfg.encoder.kernel_size, "encoder");
        read_field(*s, "blocks", cfg.encoder.blocks, "encoder");
        read_field(*s, "output_dim", cfg.encoder.output_dim, "encoder");
    }

    if (const auto* s = find(root, "contrast")) {
        check_keys(*s, "contrast",
                   {"alpha", "batch_size", "max_epochs", "learning_rate", "min_improvement",
                    "patience"});
        read_field(*s, "alpha", cfg.contrast.alpha, "contrast");
        read_field(*s, "batch_size", cfg.contrast.batch_size, "contrast");
        read_field(*s, "max_epochs", cfg.contrast.max_epochs, "contrast");
        read_field(*s, "learning_rate", cfg.contrast.learning_rate, "contrast");
        read_field(*s, "min_improvement", cfg.contrast.min_improvement, "contrast");
        read_field(*s, "patience", cfg.contrast.patience, "contrast");
    }

    if (const auto* s = find(root, "cluster")) {
        check_keys(*s, "cluster", {"k_max"});
        read_field(*s, "k_max", cfg.cluster.k_max, "cluster");
    }

    read_field(root, "wavelet_candidates", cfg.wavelet_candidates, "");
    require(!cfg.wavelet_candidates.empty(), "config: wavelet_candidates must not be empty");
    for (const auto& name : cfg.wavelet_candidates) (void)wavelets::get_wavelet(name);

    if (const auto* s = find(root, "forecast")) {
        check_keys(*s, "forecast",
                   {"horizon", "context", "scales", "learning_rate", "batch_size", "patience",
                    "max_epochs", "origin_stride", "wavelet", "seed", "d_model", "conv_channels1",
                    "conv_channels2", "ffn1", "ffn2", "ffn3"});
        read_field(*s, "horizon", cfg.forecast.horizon, "forecast");
        read_field(*s, "context", cfg.forecast.context, "forecast");
        read_field(*s, "scales", cfg.forecast.scales, "forecast");
        read_field(*s, "learning_rate", cfg.forecast.learning_rate, "forecast");
        read_field(*s, "batch_size", cfg.forecast.batch_size, "forecast");
        read_field(*s, "patience", cfg.forecast.patience, "forecast");
        read_field(*s, "max_epochs", cfg.forecast.max_epochs, "forecast");
        read_field(*s, "origin_stride", cfg.forecast.origin_stride, "forecast");
        read_field(*s, "wavelet", cfg.forecast.wavelet, "forecast");
        read_field(*s, "seed", cfg.forecast.seed, "forecast");
        read_field(*s, "d_model", cfg.forecast.d_model, "forecast");
        read_field(*s, "conv_channels1", cfg.forecast.conv_channels1, "forecast");
        read_field(*s, "conv_channels2", cfg.forecast.conv_channels2, "forecast");
        read_field(*s, "ffn1", cfg.forecast.ffn1, "forecast");
        read_field(*s, "ffn2", cfg.forecast.ffn2, "forecast");
        read_field(*s, "ffn3", cfg.forecast.ffn3, "forecast");
    }
    if (cfg.forecast.wavelet != "auto") (void)wavelets::get_wavelet(cfg.forecast.wavelet);

    if (const auto* s = find(root, "lstm")) {
        check_keys(*s, "lstm",
                   {"horizon", "lag", "hidden", "learning_rate", "batch_size", "patience",
                    "max_epochs", "origin_stride", "seed"});
        read_field(*s, "horizon", cfg.lstm.horizon, "lstm");
        read_field(*s, "lag", cfg.lstm.lag, "lstm");
        read_field(*s, "hidden", cfg.lstm.hidden, "lstm");
        read_field(*s, "learning_rate", cfg.lstm.learning_rate, "lstm");
        read_field(*s, "batch_size", cfg.lstm.batch_size, "lstm");
        read_field(*s, "patience", cfg.lstm.patience, "lstm");
        read_field(*s, "max_epochs", cfg.lstm.max_epochs, "lstm");
        read_field(*s, "origin_stride", cfg.lstm.origin_stride, "lstm");
        read_field(*s, "seed", cfg.lstm.seed, "lstm");
    }

    if (const auto* s = find(root, "arima")) {
        check_keys(*s, "arima", {"auto_order", "p", "d", "q"});
        read_field(*s, "auto_order", cfg.arima.auto_order, "arima");
        read_field(*s, "p", cfg.arima.order.p, "arima");
        read_field(*s, "d", cfg.arima.order.d, "arima");
        read_field(*s, "q", cfg.arima.order.q, "arima");
    }

    if (const auto* s = find(root, "evaluate")) {
        check_keys(*s, "evaluate", {"stride", "per_day_average", "epsilon"});
        read_field(*s, "stride", cfg.evaluate.stride, "evaluate");
        read_field(*s, "per_day_average", cfg.evaluate.per_day_average, "evaluate");
        read_field(*s, "epsilon", cfg.evaluate.epsilon, "evaluate");
        require(cfg.evaluate.stride > 0, "config: evaluate.stride must be positive");
    }

    cfg.canonical_json = config_to_json(cfg).dump();
    cfg.config_hash = fnv1a64(cfg.canonical_json);
    return cfg;
}

PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("config: cannot open '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), overrides);
}

LoadedData load_dataset(const PipelineConfig& config) {
    if (!config.data.meters_csv.empty()) return ingest_files(config);
    if (config.synth.weeks > 0) return generate_synthetic(config);
    throw InvalidArgumentError(
        "config: set data.meters_csv to ingest files or a synth section to generate data");
}

std::string resolve_wavelet(const PipelineConfig& config, const std::vector<double>& total,
                            std::size_t train_end) {
    if (config.forecast.wavelet != "auto") return config.forecast.wavelet;
    std::vector<std::vector<double>> windows;
    for (std::size_t b = 0; b + 168 <= train_end && windows.size() < 16; b += 168) {
        windows.emplace_back(total.begin() + static_cast<std::ptrdiff_t>(b),
                             total.begin() + static_cast<std::ptrdiff_t>(b + 168));
    }
    if (windows.empty()) {
        throw InsufficientDataError("wavelet selection needs one full training week");
    }
    const auto name =
        wavelets::select_wavelet(config.wavelet_candidates, windows, config.forecast.scales);
    log::info("wavelet selection over " + std::to_string(windows.size()) + " windows: " + name);
    return name;
}

void write_manifest(const PipelineConfig& config) {
    const fs::path dir = config.run_dir();
    fs::create_directories(dir);
    std::vector<std::pair<std::string, std::uintmax_t>> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), dir).generic_string();
        if (rel == "manifest.json") continue;
        files.emplace_back(rel, entry.file_size());
    }
    std::sort(files.begin(), files.end());

    json j;
    j["config_hash"] = hex16(config.config_hash);
    j["seed"] = config.seed;
    j["config"] = json::parse(config.canonical_json);
    json artifacts = json::array();
    for (const auto& [path, bytes] : files) {
        json e;
        e["path"] = path;
        e["bytes"] = bytes;
        artifacts.push_back(std::move(e));
    }
    j["artifacts"] = std::move(artifacts);
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw InvalidArgumentError("manifest: cannot open " + (dir / "manifest.json").string());
    out << j.dump(2) << "\n";
}

std::string model_display_name(const std::string& key) {
    if (key == "naive") return "seasonal_naive";
    if (key == "arima") return "arima";
    if (key == "lstm") return "lstm_baseline";
    if (key == "ablation") return "wavelet_cnn_ablation";
    if (key == "attention") return "attention_forecaster";
    throw InvalidArgumentError("unknown model '" + key +
                               "' (expected attention, ablation, lstm, arima or naive)");
}

void cmd_synth_generate(const PipelineConfig& config) {
    const auto loaded = generate_synthetic(config);
    const auto dir = config.run_dir() + "/dataset";
    fs::create_directories(dir);
    data::write_meter_csv(dir + "/meters.csv", loaded.dataset.meters);
    data::write_weather_csv(dir + "/weather.csv", loaded.dataset.weather);
    data::write_holiday_file(dir + "/holidays.txt", loaded.dataset.holidays);
    data::write_labels_csv(dir + "/labels.csv", loaded.labels);
    log::info("synth-generate: " + std::to_string(loaded.dataset.meters.size()) + " meters, " +
              std::to_string(loaded.dataset.hours()) + " hours -> " + dir);
    write_manifest(config);
}

void cmd_ingest(const PipelineConfig& config) {
    require(!config.data.meters_csv.empty(), "ingest: config has no data.meters_csv");
    const auto loaded = ingest_files(config);
    const auto& split = loaded.dataset.split;

    json summary;
    summary["meters"] = loaded.dataset.meters.size();
    summary["hours"] = loaded.dataset.hours();
    summary["filled_hours"] = loaded.filled_hours;
    summary["profiling_excluded"] = loaded.dataset.clustering_excluded;
    summary["split"]["train_end"] = split.train_end;
    summary["split"]["val_end"] = split.val_end;
    summary["split"]["test_end"] = split.test_end;
    fs::create_directories(config.run_dir());
    std::ofstream out(config.run_dir() + "/ingest_summary.json", std::ios::binary);
    out << summary.dump(2) << "\n";
    log::info("ingest: " + std::to_string(loaded.dataset.meters.size()) + " meters over " +
              std::to_string(loaded.dataset.hours()) + " hours, " +
              std::to_string(loaded.filled_hours) + " gap hours filled");
    write_manifest(config);
}

void cmd_train_repr(const PipelineConfig& config) {
    const auto loaded = load_dataset(config);
    const auto samples = profile_samples(config, loaded.dataset);
    log::info("train-repr: " + std::to_string(samples.size()) + " profile samples");
    const auto outcome = repr::train_encoder(samples, config.encoder, config.contrast,
                                             config.seed);
    fs::create_directories(config.run_dir());
    repr::save_encoder(config.run_dir() + "/encoder.bin", outcome.encoder, config.config_hash);
    log::info("train-repr: " + std::to_string(outcome.epochs_run) + " epochs, final loss " +
              format_2f(outcome.loss_history.back()));
    write_manifest(config);
}

void cmd_embed(const PipelineConfig& config) {
    const auto path = require_artifact(config, "encoder.bin", "train-repr");
    const auto loaded = load_dataset(config);
    const auto samples = profile_samples(config, loaded.dataset);
    const auto encoder = repr::load_encoder(path);
    const auto rows = repr::embed_all(samples, encoder);
    repr::write_embeddings_csv(config.run_dir() + "/embeddings.csv", rows);
    log::info("embed: " + std::to_string(rows.size()) + " meter embeddings");
    write_manifest(config);
}

void cmd_cluster(const PipelineConfig& config) {
    const auto path = require_artifact(config, "embeddings.csv", "embed");
    const auto embeddings = repr::load_embeddings_csv(path);
    const auto result = clustering::select_k(embeddings, config.seed, config.cluster.k_max);
    clustering::write_assignment_csv(config.run_dir() + "/clusters.csv", result);
    log::info("cluster: k=" + std::to_string(result.k) + ", silhouette " +
              format_2f(result.silhouette));
    write_manifest(config);
}

void cmd_train_forecast(const PipelineConfig& config, const std::string& model) {
    const auto display = model_display_name(model);
    if (model == "naive" || model == "arima") {
        throw InvalidArgumentError("train-forecast: " + display +
                                   " has no trainable parameters; run `wdf evaluate --model " +
                                   model + "` directly");
    }
    const auto loaded = load_dataset(config);
    fs::create_directories(config.run_dir() + "/models");

    if (model == "lstm") {
        const auto outcome = baselines::train_lstm(loaded.dataset, config.lstm);
        baselines::save_lstm(config.run_dir() + "/models/lstm.bin", outcome.model,
                             config.config_hash);
        log::info("train-forecast lstm_baseline: " + std::to_string(outcome.parameter_count) +
                  " parameters, best val MSE " +
                  format_2f(outcome.val_history[static_cast<std::size_t>(outcome.best_epoch)]));
        write_manifest(config);
        return;
    }

    const auto total = data::aggregate_dma(loaded.dataset.meters).values;
    auto fcfg = config.forecast;
    fcfg.wavelet = resolve_wavelet(config, total, loaded.dataset.split.train_end);
    if (model == "attention") {
        const auto demands = load_cluster_demands(config, loaded.dataset);
        const auto outcome = forecaster::train_forecaster(loaded.dataset, demands, fcfg);
        forecaster::save_model(config.run_dir() + "/models/attention.bin", outcome.model,
                               config.config_hash);
        log::info("train-forecast attention_forecaster: " +
                  std::to_string(outcome.parameter_count) + " parameters, best val MSE " +
                  format_2f(outcome.val_history[static_cast<std::size_t>(outcome.best_epoch)]));
    } else {  // ablation
        const auto outcome = baselines::train_ablation(loaded.dataset, fcfg);
        baselines::save_ablation(config.run_dir() + "/models/ablation.bin", outcome.model,
                                 config.config_hash);
        log::info("train-forecast wavelet_cnn_ablation: " +
                  std::to_string(outcome.parameter_count) + " parameters, best val MSE " +
                  format_2f(outcome.val_history[static_cast<std::size_t>(outcome.best_epoch)]));
    }
    write_manifest(config);
}

eval::MetricReport cmd_evaluate(const PipelineConfig& config, const std::string& model) {
    const auto display = model_display_name(model);
    const auto loaded = load_dataset(config);
    const auto& split = loaded.dataset.split;
    const auto total = data::aggregate_dma(loaded.dataset.meters).values;
    const int horizon = model == "lstm" ? config.lstm.horizon : config.forecast.horizon;

    eval::ForecastFn fn;
    if (model == "naive") {
        fn = [&total, horizon](std::size_t t) {
            return baselines::seasonal_naive(total, t, 168, horizon);
        };
    } else if (model == "arima") {
        const auto order = config.arima.auto_order
                               ? baselines::select_arima_order(total, split.val_end)
                               : config.arima.order;
        const auto fitted = baselines::fit_arima(total, split.val_end, order);
        log::info("evaluate arima: order (" + std::to_string(fitted.order.p) + "," +
                  std::to_string(fitted.order.d) + "," + std::to_string(fitted.order.q) + ")");
        fn = [fitted, &total, horizon](std::size_t t) {
            return baselines::arima_predict(fitted, total, t, horizon);
        };
    } else {
        const auto wavelet = resolve_wavelet(config, total, split.train_end);
        if (model == "attention") {
            const auto path =
                require_artifact(config, "models/attention.bin", "train-forecast --model attention");
            auto net = std::make_shared<forecaster::Model<float>>(forecaster::load_model(path));
            const auto demands = load_cluster_demands(config, loaded.dataset);
            auto ctx = std::make_shared<forecaster::FeatureContext>(
                forecaster::make_feature_context(loaded.dataset, demands, wavelet));
            fn = [net, ctx](std::size_t t) { return forecaster::predict(*net, *ctx, t).forecast; };
        } else if (model == "ablation") {
            const auto path =
                require_artifact(config, "models/ablation.bin", "train-forecast --model ablation");
            auto net = std::make_shared<baselines::AblationModel>(baselines::load_ablation(path));
            auto ctx = std::make_shared<forecaster::FeatureContext>(
                forecaster::make_feature_context(loaded.dataset, {}, wavelet));
            fn = [net, ctx](std::size_t t) {
                return baselines::ablation_predict(*net, *ctx, t).forecast;
            };
        } else {  // lstm
            const auto path =
                require_artifact(config, "models/lstm.bin", "train-forecast --model lstm");
            auto net = std::make_shared<baselines::LstmModel>(baselines::load_lstm(path));
            auto ctx = std::make_shared<forecaster::FeatureContext>(
                forecaster::make_feature_context(loaded.dataset, {}, wavelet));
            fn = [net, ctx](std::size_t t) {
                return baselines::lstm_predict(*net, *ctx, t).forecast;
            };
        }
    }

    eval::RollingOptions options;
    options.stride = config.evaluate.stride;
    options.horizon = horizon;
    options.epsilon = config.evaluate.epsilon;
    options.per_day_average = config.evaluate.per_day_average;
    options.config_hash = config.config_hash;
    options.seed = config.seed;
    auto report = eval::rolling_evaluate(display, fn, total, split.val_end, split.test_end,
                                         options);

    fs::create_directories(config.run_dir() + "/forecasts");
    fs::create_directories(config.run_dir() + "/reports");
    forecaster::write_forecast_csv(config.run_dir() + "/forecasts/" + model + ".csv",
                                   report.records);
    eval::write_report_csv(config.run_dir() + "/reports/" + model + ".csv", report);
    log::info("evaluate " + display + ": MAPE " + format_2f(report.mape_percent) + "%, MAE " +
              format_2f(report.mae_lh) + " l/h over " + std::to_string(report.origins) +
              " origins");
    write_manifest(config);
    return report;
}

eval::Comparison cmd_compare(const PipelineConfig& config, std::vector<std::string> models) {
    const auto dir = config.run_dir() + "/reports";
    if (models.empty()) {
        if (fs::is_directory(dir)) {
            for (const auto& entry : fs::directory_iterator(dir)) {
                if (entry.path().extension() == ".csv") {
                    models.push_back(entry.path().stem().string());
                }
            }
        }
        std::sort(models.begin(), models.end());
        if (models.empty()) {
            throw InvalidArgumentError("compare: no reports under '" + dir +
                                       "'; run `wdf evaluate` first");
        }
    }
    std::vector<eval::MetricReport> reports;
    for (const auto& key : models) {
        (void)model_display_name(key);
        const auto path = require_artifact(config, "reports/" + key + ".csv",
                                           "evaluate --model " + key);
        reports.push_back(eval::load_report_csv(path));
    }
    std::string baseline = model_display_name("ablation");
    if (std::none_of(reports.begin(), reports.end(),
                     [&](const eval::MetricReport& r) { return r.model == baseline; })) {
        baseline = std::min_element(reports.begin(), reports.end(),
                                    [](const auto& a, const auto& b) { return a.model < b.model; })
                       ->model;
        log::warn("compare: no ablation report; improvements measured against '" + baseline +
                  "'");
    }
    const auto comparison = eval::compare_models(reports, baseline);
    eval::write_comparison_csv(config.run_dir() + "/comparison.csv", comparison);
    const auto text = eval::comparison_text(comparison);
    std::ofstream out(config.run_dir() + "/comparison.txt", std::ios::binary);
    out << text;
    std::cout << text;
    write_manifest(config);
    return comparison;
}

void cmd_plot(const PipelineConfig& config, const std::string& model, int weeks) {
    const auto display = model_display_name(model);
    const auto path = require_artifact(config, "forecasts/" + model + ".csv",
                                       "evaluate --model " + model);
    auto records = forecaster::load_forecast_csv(path);
    std::sort(records.begin(), records.end(),
              [](const auto& a, const auto& b) { return a.origin < b.origin; });
    if (weeks > 0 && !records.empty()) {
        const std::size_t cutoff = records.front().origin +
                                   static_cast<std::size_t>(weeks) * 168;
        records.erase(std::remove_if(records.begin(), records.end(),
                                     [&](const auto& r) { return r.origin >= cutoff; }),
                      records.end());
    }
    fs::create_directories(config.run_dir() + "/plots");
    plots::write_forecast_svg(config.run_dir() + "/plots/forecast_" + model + ".svg", records,
                              "measured vs forecast (" + display + ")");

    if (fs::exists(config.run_dir() + "/clusters.csv")) {
        const auto loaded = load_dataset(config);
        const auto demands = load_cluster_demands(config, loaded.dataset);
        const auto begin = loaded.dataset.split.val_end;
        const auto span = weeks > 0 ? static_cast<std::size_t>(weeks) * 168
                                    : loaded.dataset.hours() - begin;
        const auto end = std::min(loaded.dataset.hours(), begin + span);
        plots::write_cluster_demand_svg(config.run_dir() + "/plots/cluster_demand.svg", demands,
                                        begin, end, "per-cluster demand");
    } else {
        log::warn("plot: no clustering artifact; skipped the per-cluster figure");
    }
    write_manifest(config);
}

}  // namespace wdf::pipeline
