#include "wdf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

#include "wdf/data_ops.hpp"
#include "wdf/errors.hpp"
#include "wdf/rng.hpp"

namespace wdf::synth {

namespace {

// Waveform constants. Shapes are dimensionless multipliers of base_level as a
// function of local hour; they are fixed here so generated fixtures stay stable.
constexpr double kResidentialNight = 0.15;
constexpr double kCommercialStandby = 0.05;
constexpr double kCorporateNight = 0.05;    // weekday nights
constexpr double kCorporateStandby = 0.005; // Friday evening through Monday morning
constexpr double kPoultryCleanout = 0.02;   // washdown days at the end of a cycle
constexpr int kPoultryCleanoutDays = 3;
constexpr double kIrrigationTempThreshold = 12.0;  // degC

double bump(double h, double mu, double sigma) {
    const double d = (h - mu) / sigma;
    return std::exp(-0.5 * d * d);
}

// Double daily peak on weekdays, later and flatter on weekends. morning_scale
// trades morning against evening peak height per meter.
double residential_shape(int wday, int h, double morning_scale) {
    if (wday < 5) {
        return kResidentialNight + 0.9 * morning_scale * bump(h, 7.5, 1.3) +
               1.2 * (2.0 - morning_scale) * bump(h, 19.0, 1.8);
    }
    return kResidentialNight + 0.9 * bump(h, 10.0, 1.8) + 1.0 * bump(h, 19.5, 2.2) +
           0.25 * bump(h, 14.0, 3.0);
}

// Business plateau Monday through Saturday with one-hour ramps.
double commercial_shape(int wday, int h) {
    if (wday == 6) return kCommercialStandby;
    if (h >= 8 && h < 18) return 1.0;
    if (h == 7 || h == 18) return 0.5;
    return kCommercialStandby;
}

// Office-hours plateau; standby from Friday 18:00 until Monday 07:00.
double corporate_shape(int wday, int h) {
    const bool weekend_window =
        (wday == 4 && h >= 18) || wday == 5 || wday == 6 || (wday == 0 && h < 7);
    if (weekend_window) return kCorporateStandby;
    if (h >= 8 && h < 17) return 1.0;
    return kCorporateNight;
}

// Round-the-clock drinking with a soft daytime swell.
double poultry_daily_shape(int h) {
    if (h >= 6 && h < 20) return 0.6 + 0.4 * std::sin(M_PI * (h - 6) / 14.0);
    return 0.4;
}

// Early-morning and evening watering windows.
double irrigation_schedule(int h) {
    return bump(h, 5.5, 1.5) + 0.8 * bump(h, 20.5, 1.5);
}

struct MeterParams {
    double amplitude = 1.0;
    double morning_scale = 1.0;  // residential only
    int cycle_days = 45;         // poultry only
    int cycle_phase_days = 0;    // poultry only
};

MeterParams draw_params(ArchetypeKind kind, Rng& rng, int cycle_days) {
    MeterParams p;
    p.amplitude = rng.uniform(0.85, 1.15);
    p.cycle_days = cycle_days;
    switch (kind) {
        case ArchetypeKind::residential:
            p.morning_scale = rng.uniform(0.85, 1.15);
            break;
        case ArchetypeKind::poultry_farm:
            p.cycle_phase_days = static_cast<int>(rng.below(15));
            break;
        default:
            break;
    }
    return p;
}

}  // namespace

time::HourStamp default_start() { return time::days_from_civil({2017, 9, 4}) * 24; }

ArchetypeKind archetype_from_string(const std::string& name) {
    if (name == "residential") return ArchetypeKind::residential;
    if (name == "commercial") return ArchetypeKind::commercial;
    if (name == "corporate") return ArchetypeKind::corporate;
    if (name == "poultry_farm") return ArchetypeKind::poultry_farm;
    if (name == "irrigation") return ArchetypeKind::irrigation;
    throw InvalidArgumentError("unknown archetype '" + name + "'");
}

std::string to_string(ArchetypeKind kind) {
    switch (kind) {
        case ArchetypeKind::residential: return "residential";
        case ArchetypeKind::commercial: return "commercial";
        case ArchetypeKind::corporate: return "corporate";
        case ArchetypeKind::poultry_farm: return "poultry_farm";
        case ArchetypeKind::irrigation: return "irrigation";
    }
    return "?";
}

WeatherSeries generate_weather(int weeks, std::uint64_t seed, time::HourStamp start) {
    if (weeks < 1) throw InvalidArgumentError("generate_weather: weeks must be >= 1");
    const std::size_t n = static_cast<std::size_t>(weeks) * time::kHoursPerWeek;
    WeatherSeries w;
    w.start = start;
    w.temperature_max.resize(n);
    w.humidity.resize(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double annual =
            8.0 + 10.0 * std::sin(2.0 * M_PI * static_cast<double>(i) / 8760.0 - M_PI / 2.0);
        const int hod = time::hour_of_day(start + static_cast<time::HourStamp>(i), 0);
        const double daily = 2.5 * std::sin(2.0 * M_PI * (hod - 9) / 24.0);
        const double temp = annual + daily + rng.normal(0.0, 1.2);
        const double hum = std::clamp(78.0 - 1.8 * (temp - 8.0) + rng.normal(0.0, 4.0), 20.0, 100.0);
        w.temperature_max[i] = temp;
        w.humidity[i] = hum;
    }
    return w;
}

std::vector<MeterSeries> generate_archetype(const ArchetypeSpec& spec, int weeks,
                                            const WeatherSeries& weather) {
    if (weeks < 16) throw InvalidArgumentError("generate_archetype: weeks must be >= 16");
    if (spec.count < 1) throw InvalidArgumentError("generate_archetype: count must be >= 1");
    if (spec.noise_std < 0.0) throw InvalidArgumentError("generate_archetype: noise_std must be >= 0");
    const std::size_t n = static_cast<std::size_t>(weeks) * time::kHoursPerWeek;
    if (weather.size() < n) throw InvalidArgumentError("generate_archetype: weather shorter than span");

    // One growing-cycle length per farm; every barn meter shares it.
    Rng spec_rng(spec.seed);
    const int cycle_days = 42 + static_cast<int>(spec_rng.below(15));

    std::vector<MeterSeries> meters;
    meters.reserve(static_cast<std::size_t>(spec.count));
    for (int m = 0; m < spec.count; ++m) {
        Rng rng(Rng::mix(spec.seed, static_cast<std::uint64_t>(m)));
        const MeterParams p = draw_params(spec.kind, rng, cycle_days);

        MeterSeries series;
        series.meter_id = to_string(spec.kind) + "-" + std::to_string(m);
        series.start = weather.start;
        series.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const time::HourStamp h = weather.start + static_cast<time::HourStamp>(i);
            const int wh = time::week_hour(h, 0);
            const int wday = wh / 24;
            const int hod = wh % 24;
            double shape = 0.0;
            switch (spec.kind) {
                case ArchetypeKind::residential:
                    shape = residential_shape(wday, hod, p.morning_scale);
                    break;
                case ArchetypeKind::commercial:
                    shape = commercial_shape(wday, hod);
                    break;
                case ArchetypeKind::corporate:
                    shape = corporate_shape(wday, hod);
                    break;
                case ArchetypeKind::poultry_farm: {
                    const std::int64_t day = static_cast<std::int64_t>(i / 24) + p.cycle_phase_days;
                    const int day_in_cycle = static_cast<int>(day % p.cycle_days);
                    const int grow_days = p.cycle_days - kPoultryCleanoutDays;
                    const double env = day_in_cycle < grow_days
                                           ? 0.08 + 0.92 * static_cast<double>(day_in_cycle) / grow_days
                                           : kPoultryCleanout;
                    shape = env * poultry_daily_shape(hod);
                    break;
                }
                case ArchetypeKind::irrigation: {
                    const double drive =
                        std::max(0.0, weather.temperature_max[i] - kIrrigationTempThreshold) / 10.0;
                    shape = 0.05 + drive * irrigation_schedule(hod);
                    break;
                }
            }
            double v = spec.base_level * p.amplitude * shape;
            if (spec.noise_std > 0.0) v += rng.normal(0.0, spec.noise_std);
            series.values[i] = std::max(0.0, v);
        }
        meters.push_back(std::move(series));
    }
    return meters;
}

SynthDma generate_dma(const std::vector<ArchetypeSpec>& specs, int weeks, std::uint64_t seed,
                      int test_weeks) {
    if (specs.empty()) throw InvalidArgumentError("generate_dma: no archetype specs");
    SynthDma dma;
    dma.dataset.utc_offset_hours = 0;
    dma.dataset.weather = generate_weather(weeks, Rng::mix(seed, 0), default_start());

    for (std::size_t s = 0; s < specs.size(); ++s) {
        ArchetypeSpec spec = specs[s];
        // Spec seed 0 means "derive from the DMA seed and position".
        if (spec.seed == 0) spec.seed = Rng::mix(seed, 0x100 + s);
        auto meters = generate_archetype(spec, weeks, dma.dataset.weather);
        for (std::size_t m = 0; m < meters.size(); ++m) {
            meters[m].meter_id =
                to_string(spec.kind) + "-" + std::to_string(s) + "-" + std::to_string(m);
            dma.labels[meters[m].meter_id] = to_string(spec.kind);
            dma.dataset.meters.push_back(std::move(meters[m]));
        }
    }

    // Fixed-date public holidays for every calendar year in the span.
    const auto first = time::civil_from_days(default_start() / 24);
    const auto last = time::civil_from_days(
        (default_start() + static_cast<time::HourStamp>(weeks) * time::kHoursPerWeek) / 24);
    for (int year = first.year; year <= last.year; ++year) {
        for (auto [mth, day] : {std::pair<unsigned, unsigned>{1, 1},
                                {5, 1},
                                {6, 5},
                                {12, 24},
                                {12, 25},
                                {12, 26}}) {
            dma.dataset.holidays.days.insert(time::days_from_civil({year, mth, day}));
        }
    }

    int tw = test_weeks;
    if (tw < 0) tw = (weeks >= 28) ? 26 : 0;
    dma.dataset.split = data::chronological_split(dma.dataset.hours(), tw, 0.10);

    std::set<std::string> kinds;
    for (const auto& [id, kind] : dma.labels) kinds.insert(kind);
    dma.single_class = kinds.size() < 2;

    bool low_noise = true;
    for (const auto& spec : specs) {
        if (spec.noise_std > 0.10 * spec.base_level) low_noise = false;
    }
    if (low_noise && !dma.single_class) {
        const auto profiles = kind_mean_profiles(dma);
        for (auto a = profiles.begin(); a != profiles.end(); ++a) {
            for (auto b = std::next(a); b != profiles.end(); ++b) {
                double d2 = 0.0;
                for (std::size_t i = 0; i < a->second.size(); ++i) {
                    const double d = a->second[i] - b->second[i];
                    d2 += d * d;
                }
                if (std::sqrt(d2) < 0.5) {
                    throw std::logic_error("archetype separability violated: " + a->first + " vs " +
                                           b->first + " at distance " + std::to_string(std::sqrt(d2)));
                }
            }
        }
    }
    data::validate_dataset(dma.dataset, tw > 0 ? tw : -1);
    return dma;
}

std::map<std::string, std::vector<double>> kind_mean_profiles(const SynthDma& dma) {
    std::map<std::string, std::vector<double>> sums;
    std::map<std::string, int> counts;
    for (const auto& meter : dma.dataset.meters) {
        const std::string& kind = dma.labels.at(meter.meter_id);
        auto& acc = sums[kind];
        acc.resize(time::kHoursPerWeek, 0.0);
        std::vector<int> cnt(time::kHoursPerWeek, 0);
        std::vector<double> profile(time::kHoursPerWeek, 0.0);
        for (std::size_t i = 0; i < meter.values.size(); ++i) {
            const int wh = time::week_hour(meter.start + static_cast<time::HourStamp>(i),
                                           dma.dataset.utc_offset_hours);
            profile[wh] += meter.values[i];
            cnt[wh] += 1;
        }
        for (int wh = 0; wh < time::kHoursPerWeek; ++wh)
            acc[wh] += profile[wh] / std::max(1, cnt[wh]);
        counts[kind] += 1;
    }
    for (auto& [kind, acc] : sums) {
        for (double& v : acc) v /= counts[kind];
        double norm = 0.0;
        for (double v : acc) norm += v * v;
        norm = std::sqrt(norm);
        if (norm > 0.0)
            for (double& v : acc) v /= norm;
    }
    return sums;
}

}  // namespace wdf::synth
