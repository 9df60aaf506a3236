#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wdf/series.hpp"

namespace wdf::synth {

using data::DmaDataset;
using data::MeterSeries;
using data::WeatherSeries;

enum class ArchetypeKind { residential, commercial, corporate, poultry_farm, irrigation };

ArchetypeKind archetype_from_string(const std::string& name);
std::string to_string(ArchetypeKind kind);

struct ArchetypeSpec {
    ArchetypeKind kind = ArchetypeKind::residential;
    int count = 1;
    double base_level = 0.1;  // m^3/h
    double noise_std = 0.0;   // m^3/h
    std::uint64_t seed = 1;
};

struct SynthDma {
    DmaDataset dataset;
    std::map<std::string, std::string> labels;  // meter_id -> archetype kind
    bool single_class = false;
};

// Monday 2017-09-04 00:00 UTC. Synthetic grids start on a Monday so week-hour
// 0 sits at index 0.
time::HourStamp default_start();

// Hourly weather on a grid starting at `start`: annual sinusoid (mean 8 degC,
// amplitude 10) plus a daily cycle and noise; humidity anti-correlated with
// temperature and clipped to [20, 100].
WeatherSeries generate_weather(int weeks, std::uint64_t seed, time::HourStamp start);

// Meters for one archetype on the weather grid. Deterministic in (spec, weeks).
std::vector<MeterSeries> generate_archetype(const ArchetypeSpec& spec, int weeks,
                                            const WeatherSeries& weather);

// A full labeled synthetic DMA. test_weeks = -1 selects 26 when the span
// allows it and 0 otherwise. Checks archetype separability when every spec
// is low-noise (noise_std <= 10% of base_level).
SynthDma generate_dma(const std::vector<ArchetypeSpec>& specs, int weeks, std::uint64_t seed,
                      int test_weeks = -1);

// Mean weekly profile of each archetype kind, L2-normalized; used by the
// generation-time separability check and exposed for tests.
std::map<std::string, std::vector<double>> kind_mean_profiles(const SynthDma& dma);

}  // namespace wdf::synth
