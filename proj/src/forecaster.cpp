#include "wdf/forecaster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "wdf/data_ops.hpp"
#include "wdf/log.hpp"
#include "wdf/timeutil.hpp"
#include "wdf/weights_io.hpp"

namespace wdf::forecaster {

FeatureStats train_stats(const std::vector<double>& series, std::size_t train_end) {
    if (train_end == 0 || train_end > series.size()) {
        throw InvalidArgumentError("train_stats: train split out of range");
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < train_end; ++i) mean += series[i];
    mean /= static_cast<double>(train_end);
    double var = 0.0;
    for (std::size_t i = 0; i < train_end; ++i) {
        var += (series[i] - mean) * (series[i] - mean);
    }
    var /= static_cast<double>(train_end);
    return {mean, std::max(std::sqrt(var), 1e-6)};
}

std::vector<double> weekly_seasonal_profile(const std::vector<double>& series,
                                            std::size_t train_end, int week_hour0) {
    if (train_end > series.size()) {
        throw InvalidArgumentError("weekly_seasonal_profile: train split out of range");
    }
    if (train_end < 2u * time::kHoursPerWeek) {
        throw InsufficientDataError(
            "weekly_seasonal_profile: need at least two full training weeks");
    }
    // centered 2x168 moving average keeps the trend estimate symmetric around
    // each hour despite the even period
    std::vector<double> sum(168, 0.0);
    std::vector<int> count(168, 0);
    for (std::size_t i = 84; i + 84 < train_end; ++i) {
        double trend = 0.5 * series[i - 84] + 0.5 * series[i + 84];
        for (std::size_t j = i - 83; j <= i + 83; ++j) trend += series[j];
        trend /= 168.0;
        const int w = static_cast<int>((week_hour0 + i) % 168);
        sum[w] += series[i] - trend;
        ++count[w];
    }
    std::vector<double> seasonal(168);
    double level = 0.0;
    for (int w = 0; w < 168; ++w) {
        seasonal[w] = sum[w] / count[w];
        level += seasonal[w];
    }
    level /= 168.0;
    for (auto& v : seasonal) v -= level;  // classical centering
    return seasonal;
}

int FeatureContext::week_hour_at(std::size_t t) const {
    return time::week_hour(dataset->start() + static_cast<time::HourStamp>(t),
                           dataset->utc_offset_hours);
}

namespace {

std::vector<double> standardized(const std::vector<double>& series, const FeatureStats& stats) {
    std::vector<double> z(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) z[i] = standardize(series[i], stats);
    return z;
}

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += names[i];
    }
    return out;
}

std::vector<std::string> query_feature_names() {
    return {"lag24_demand",   "lag168_demand",  "lag24_seasonal",
            "lag168_seasonal", "holiday_target", "weekday_target"};
}

std::vector<std::string> kv_feature_names(std::size_t clusters) {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < clusters; ++c) {
        names.push_back("cluster" + std::to_string(c) + "_lag24");
    }
    names.push_back("temperature_target");
    names.push_back("humidity_target");
    names.push_back("dow_sin_target");
    names.push_back("dow_cos_target");
    return names;
}

void check_stats(const FeatureStats& s, const std::string& what) {
    if (!std::isfinite(s.mean) || !std::isfinite(s.stddev)) {
        throw InvalidArgumentError("feature context: non-finite values in " + what);
    }
}

void check_origin(const FeatureContext& ctx, std::size_t t) {
    if (t < kMinOrigin) {
        throw InsufficientDataError("forecast origin " + std::to_string(t) + " needs at least " +
                                    std::to_string(kMinOrigin) + " hours of history");
    }
    if (t + 24 > ctx.hours()) {
        throw InsufficientDataError("forecast origin " + std::to_string(t) +
                                    " has no exogenous data over the target day");
    }
}

// standardized demand window of the `length` hours ending at `end` (exclusive)
std::vector<double> window_ending(const std::vector<double>& z, std::size_t end,
                                  std::size_t length) {
    return std::vector<double>(z.begin() + static_cast<long>(end - length),
                               z.begin() + static_cast<long>(end));
}

}  // namespace

// Demand windows carry extra leading context hours while target-day sequences
// are exactly the horizon, so the two groups go through the transform
// separately and join here (the layout is feature-major).
wavelets::ScalogramStack merge_stacks(wavelets::ScalogramStack a,
                                      const wavelets::ScalogramStack& b) {
    if (a.scales != b.scales || a.times != b.times) {
        throw InvalidArgumentError("merge_stacks: scale/time grids differ");
    }
    a.feature_names.insert(a.feature_names.end(), b.feature_names.begin(),
                           b.feature_names.end());
    a.tensor.insert(a.tensor.end(), b.tensor.begin(), b.tensor.end());
    return a;
}

FeatureContext make_feature_context(const DmaDataset& dataset,
                                    const std::vector<DemandSeries>& cluster_demands,
                                    const std::string& wavelet_name) {
    if (dataset.meters.empty()) throw InvalidArgumentError("feature context: dataset has no meters");
    const std::size_t hours = dataset.hours();
    if (dataset.weather.size() != hours) {
        throw AlignmentError("feature context: weather grid does not match the demand grid");
    }
    FeatureContext ctx;
    ctx.dataset = &dataset;
    ctx.wavelet = wavelets::get_wavelet(wavelet_name);

    const auto total = data::aggregate_dma(dataset.meters);
    ctx.total_raw = total.values;
    const std::size_t train_end = dataset.split.train_end;
    ctx.total_stats = train_stats(ctx.total_raw, train_end);
    check_stats(ctx.total_stats, "total demand");
    ctx.total_z = standardized(ctx.total_raw, ctx.total_stats);
    ctx.seasonal168 = weekly_seasonal_profile(ctx.total_z, train_end, ctx.week_hour_at(0));

    for (const auto& cd : cluster_demands) {
        if (cd.values.size() != hours || cd.start != dataset.start()) {
            throw AlignmentError("feature context: cluster demand " + cd.label +
                                 " is not on the dataset grid");
        }
        ctx.cluster_stats.push_back(train_stats(cd.values, train_end));
        check_stats(ctx.cluster_stats.back(), "cluster demand " + cd.label);
        ctx.cluster_z.push_back(standardized(cd.values, ctx.cluster_stats.back()));
    }
    ctx.temperature_stats = train_stats(dataset.weather.temperature_max, train_end);
    check_stats(ctx.temperature_stats, "temperature");
    ctx.humidity_stats = train_stats(dataset.weather.humidity, train_end);
    check_stats(ctx.humidity_stats, "humidity");

    log::info("feature registry (query): " + join_names(query_feature_names()));
    log::info("feature registry (kv): " + join_names(kv_feature_names(cluster_demands.size())));
    return ctx;
}

wavelets::ScalogramStack build_query_stack(const FeatureContext& ctx, std::size_t t, int scales,
                                           int context) {
    check_origin(ctx, t);
    const std::size_t ext_len = kCwtContextHours + 24;
    const auto names = query_feature_names();

    std::vector<std::vector<double>> lagged;
    lagged.push_back(window_ending(ctx.total_z, t, ext_len));
    lagged.push_back(window_ending(ctx.total_z, t - 144, ext_len));
    std::vector<double> season24(ext_len), season168(ext_len);
    for (std::size_t i = 0; i < ext_len; ++i) {
        season24[i] = ctx.seasonal168[ctx.week_hour_at(t - ext_len + i)];
        season168[i] = ctx.seasonal168[ctx.week_hour_at(t - 144 - ext_len + i)];
    }
    lagged.push_back(std::move(season24));
    lagged.push_back(std::move(season168));

    const auto& ds = *ctx.dataset;
    std::vector<double> holiday(24), weekday_flag(24);
    for (int j = 0; j < 24; ++j) {
        const time::HourStamp h = ds.start() + static_cast<time::HourStamp>(t) + j;
        holiday[j] = ds.holidays.covers_hour(h, ds.utc_offset_hours) ? 1.0 : 0.0;
        weekday_flag[j] = time::weekday(h, ds.utc_offset_hours) < 5 ? 1.0 : 0.0;
    }

    return merge_stacks(
        wavelets::scalogram_stack(lagged, {names.begin(), names.begin() + 4}, ctx.wavelet,
                                  scales, context),
        wavelets::scalogram_stack({holiday, weekday_flag}, {names.begin() + 4, names.end()},
                                  ctx.wavelet, scales, context));
}

wavelets::ScalogramStack build_exogenous_stack(const FeatureContext& ctx, std::size_t t,
                                               int scales, int context) {
    check_origin(ctx, t);
    const auto& ds = *ctx.dataset;
    std::vector<double> temp(24), hum(24), dsin(24), dcos(24);
    for (int j = 0; j < 24; ++j) {
        temp[j] = standardize(ds.weather.temperature_max[t + j], ctx.temperature_stats);
        hum[j] = standardize(ds.weather.humidity[t + j], ctx.humidity_stats);
        const time::HourStamp h = ds.start() + static_cast<time::HourStamp>(t) + j;
        const double dow = time::weekday(h, ds.utc_offset_hours);
        dsin[j] = std::sin(2.0 * M_PI * dow / 7.0);
        dcos[j] = std::cos(2.0 * M_PI * dow / 7.0);
    }
    return wavelets::scalogram_stack(
        {temp, hum, dsin, dcos},
        {"temperature_target", "humidity_target", "dow_sin_target", "dow_cos_target"},
        ctx.wavelet, scales, context);
}

wavelets::ScalogramStack build_kv_stack(const FeatureContext& ctx, std::size_t t, int scales,
                                        int context) {
    check_origin(ctx, t);
    const std::size_t ext_len = kCwtContextHours + 24;
    const auto names = kv_feature_names(ctx.cluster_z.size());
    const auto split = names.end() - 4;

    std::vector<std::vector<double>> lagged;
    for (const auto& z : ctx.cluster_z) lagged.push_back(window_ending(z, t, ext_len));

    return merge_stacks(
        wavelets::scalogram_stack(lagged, {names.begin(), split}, ctx.wavelet, scales, context),
        build_exogenous_stack(ctx, t, scales, context));
}

wavelets::ScalogramStack build_query_stack(const DmaDataset& dataset, std::size_t t,
                                           const std::string& wavelet_name) {
    return build_query_stack(make_feature_context(dataset, {}, wavelet_name), t);
}

wavelets::ScalogramStack build_kv_stack(const DmaDataset& dataset,
                                        const std::vector<DemandSeries>& cluster_demands,
                                        std::size_t t, const std::string& wavelet_name) {
    return build_kv_stack(make_feature_context(dataset, cluster_demands, wavelet_name), t);
}

namespace {

// stack layout (feature, scale, time) -> network layout (scale, time, feature)
void copy_stack(const wavelets::ScalogramStack& stack, float* dst) {
    const int s = stack.scales, h = stack.times, d = stack.depth();
    for (int a = 0; a < s; ++a) {
        for (int b = 0; b < h; ++b) {
            for (int f = 0; f < d; ++f) {
                *dst++ = static_cast<float>(stack.at(f, a, b));
            }
        }
    }
}

nn::Tensor<float> single_stack_tensor(const wavelets::ScalogramStack& stack) {
    nn::Tensor<float> t({1, stack.scales, stack.times, stack.depth()});
    copy_stack(stack, t.data.data());
    return t;
}

std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::vector<double> forward(const Model<float>& model, const wavelets::ScalogramStack& q_stack,
                            const wavelets::ScalogramStack& kv_stack, ForwardTrace* trace) {
    const auto q = single_stack_tensor(q_stack);
    const auto kv = single_stack_tensor(kv_stack);
    nn::Tensor<float> attention({1});
    auto y = model.forward_standardized(q, kv, trace ? &attention : nullptr);
    if (trace) {
        trace->rows = attention.dim(1);
        trace->cols = attention.dim(2);
        trace->attention.assign(attention.data.begin(), attention.data.end());
    }
    std::vector<double> out(model.cfg.horizon);
    for (int j = 0; j < model.cfg.horizon; ++j) {
        out[j] = de_standardize(static_cast<double>(y->value(0, j)), model.target_stats);
    }
    return out;
}

namespace {

struct OriginData {
    std::vector<nn::Tensor<float>> q;   // per origin [scales, context, q_depth]
    std::vector<nn::Tensor<float>> kv;  // per origin [scales, context, kv_depth]
    std::vector<std::vector<float>> target;  // standardized next-horizon demand
};

OriginData precompute(const FeatureContext& ctx, const std::vector<std::size_t>& origins,
                      const ForecastConfig& cfg) {
    OriginData data;
    for (std::size_t t : origins) {
        const auto qs = build_query_stack(ctx, t, cfg.scales, cfg.context);
        const auto ks = build_kv_stack(ctx, t, cfg.scales, cfg.context);
        nn::Tensor<float> qt({cfg.scales, cfg.context, qs.depth()});
        nn::Tensor<float> kt({cfg.scales, cfg.context, ks.depth()});
        copy_stack(qs, qt.data.data());
        copy_stack(ks, kt.data.data());
        data.q.push_back(std::move(qt));
        data.kv.push_back(std::move(kt));
        std::vector<float> y(cfg.horizon);
        for (int j = 0; j < cfg.horizon; ++j) y[j] = static_cast<float>(ctx.total_z[t + j]);
        data.target.push_back(std::move(y));
    }
    return data;
}

// gather a batch of precomputed origins into contiguous network inputs
void gather(const OriginData& data, const std::vector<int>& order, std::size_t begin,
            std::size_t end, nn::Tensor<float>& q, nn::Tensor<float>& kv,
            nn::Tensor<float>& target) {
    const std::size_t rows = end - begin;
    const std::size_t q_step = data.q[0].size();
    const std::size_t kv_step = data.kv[0].size();
    const std::size_t y_step = data.target[0].size();
    for (std::size_t r = 0; r < rows; ++r) {
        const int idx = order[begin + r];
        std::copy(data.q[idx].data.begin(), data.q[idx].data.end(), q.data.begin() + r * q_step);
        std::copy(data.kv[idx].data.begin(), data.kv[idx].data.end(),
                  kv.data.begin() + r * kv_step);
        std::copy(data.target[idx].begin(), data.target[idx].end(),
                  target.data.begin() + r * y_step);
    }
}

std::vector<std::vector<float>> snapshot(const std::vector<nn::NodePtr<float>>& params) {
    std::vector<std::vector<float>> copy;
    for (const auto& p : params) copy.push_back(p->value.data);
    return copy;
}

void restore(const std::vector<nn::NodePtr<float>>& params,
             const std::vector<std::vector<float>>& copy) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value.data = copy[i];
}

}  // namespace

TrainOutcome train_forecaster(const DmaDataset& dataset,
                              const std::vector<DemandSeries>& cluster_demands,
                              const ForecastConfig& config) {
    if (config.batch_size < 1 || config.max_epochs < 1 || config.patience < 1 ||
        config.origin_stride < 1) {
        throw InvalidArgumentError("train_forecaster: batch, epochs, patience, and stride must "
                                   "be positive");
    }
    if (!(config.learning_rate > 0.0)) {
        throw InvalidArgumentError("train_forecaster: learning rate must be positive");
    }
    if (config.horizon < 1 || config.horizon > 24) {
        throw InvalidArgumentError("train_forecaster: horizon must be within the 24-hour "
                                   "feature window");
    }
    if (cluster_demands.empty()) {
        throw InvalidArgumentError("train_forecaster: need at least one cluster demand series");
    }
    const FeatureContext ctx = make_feature_context(dataset, cluster_demands, config.wavelet);
    const std::size_t train_end = dataset.split.train_end;
    const std::size_t val_end = dataset.split.val_end;

    std::vector<std::size_t> train_origins, val_origins;
    for (std::size_t t = kMinOrigin; t + config.horizon <= train_end;
         t += static_cast<std::size_t>(config.origin_stride)) {
        train_origins.push_back(t);
    }
    // validation origins continue the training origin grid so both splits see
    // the same phase when the stride is coarser than hourly
    const std::size_t stride = static_cast<std::size_t>(config.origin_stride);
    std::size_t val_begin = std::max(kMinOrigin, train_end);
    if ((val_begin - kMinOrigin) % stride != 0) {
        val_begin += stride - (val_begin - kMinOrigin) % stride;
    }
    for (std::size_t t = val_begin; t + config.horizon <= val_end; t += stride) {
        val_origins.push_back(t);
    }
    if (train_origins.empty() || val_origins.empty()) {
        throw InsufficientDataError("train_forecaster: split leaves no usable train or "
                                    "validation origins");
    }
    log::info("train_forecaster: " + std::to_string(train_origins.size()) + " train and " +
              std::to_string(val_origins.size()) + " validation origins (stride " +
              std::to_string(config.origin_stride) + ")");

    const OriginData train_data = precompute(ctx, train_origins, config);
    const OriginData val_data = precompute(ctx, val_origins, config);

    TrainOutcome outcome;
    Rng init_rng(Rng::mix(config.seed, 11));
    outcome.model = Model<float>::init(config, 6, static_cast<int>(cluster_demands.size()) + 4,
                                       init_rng);
    outcome.model.target_stats = ctx.total_stats;
    const auto params = outcome.model.parameters();
    outcome.parameter_count = nn::parameter_count(params);
    log::info("train_forecaster: " + std::to_string(outcome.parameter_count) +
              " trainable parameters");
    nn::Adam<float> adam(params, static_cast<float>(config.learning_rate));

    const int batch = config.batch_size;
    auto batch_tensors = [&](const OriginData& data, std::size_t rows) {
        return std::tuple<nn::Tensor<float>, nn::Tensor<float>, nn::Tensor<float>>(
            nn::Tensor<float>({static_cast<int>(rows), config.scales, config.context,
                               data.q[0].dim(2)}),
            nn::Tensor<float>({static_cast<int>(rows), config.scales, config.context,
                               data.kv[0].dim(2)}),
            nn::Tensor<float>({static_cast<int>(rows), config.horizon}));
    };

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<std::vector<float>> best_weights = snapshot(params);
    int stall = 0;
    std::vector<int> order(train_origins.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::vector<int> val_order(val_origins.size());
    for (std::size_t i = 0; i < val_order.size(); ++i) val_order[i] = static_cast<int>(i);

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        Rng shuffle_rng(Rng::mix(config.seed, 0x500u + static_cast<unsigned>(epoch)));
        shuffle_rng.shuffle(order);

        double train_sse = 0.0;
        std::size_t train_elems = 0;
        for (std::size_t begin = 0, bi = 0; begin < order.size(); begin += batch, ++bi) {
            const std::size_t end = std::min(order.size(), begin + batch);
            auto [q, kv, target] = batch_tensors(train_data, end - begin);
            gather(train_data, order, begin, end, q, kv, target);
            auto pred = outcome.model.forward_standardized(q, kv);
            auto loss = nn::mse(pred, nn::make_const(target));
            const double lv = static_cast<double>(loss->value(0));
            if (!std::isfinite(lv)) {
                throw TrainingDivergedError("forecaster loss became non-finite at epoch " +
                                            std::to_string(epoch + 1) + ", batch " +
                                            std::to_string(bi + 1));
            }
            train_sse += lv * static_cast<double>(target.size());
            train_elems += target.size();
            adam.zero_grad();
            nn::backward(loss);
            adam.step();
        }
        outcome.train_history.push_back(train_sse / static_cast<double>(train_elems));

        double val_sse = 0.0;
        std::size_t val_elems = 0;
        for (std::size_t begin = 0; begin < val_order.size(); begin += batch) {
            const std::size_t end = std::min(val_order.size(), begin + batch);
            auto [q, kv, target] = batch_tensors(val_data, end - begin);
            gather(val_data, val_order, begin, end, q, kv, target);
            auto pred = outcome.model.forward_standardized(q, kv);
            for (std::size_t i = 0; i < target.size(); ++i) {
                const double d = static_cast<double>(pred->value.data[i]) -
                                 static_cast<double>(target.data[i]);
                val_sse += d * d;
            }
            val_elems += target.size();
        }
        const double val_mse = val_sse / static_cast<double>(val_elems);
        if (!std::isfinite(val_mse)) {
            throw TrainingDivergedError("forecaster validation loss became non-finite at epoch " +
                                        std::to_string(epoch + 1));
        }
        outcome.val_history.push_back(val_mse);
        outcome.epochs_run = epoch + 1;

        if (val_mse < best_val) {
            best_val = val_mse;
            best_weights = snapshot(params);
            outcome.best_epoch = epoch;
            stall = 0;
        } else {
            ++stall;
        }
        if (stall >= config.patience) {
            log::info("train_forecaster: early stop after epoch " + std::to_string(epoch + 1) +
                      " (best validation MSE " + std::to_string(best_val) + " at epoch " +
                      std::to_string(outcome.best_epoch + 1) + ")");
            break;
        }
    }
    restore(params, best_weights);
    return outcome;
}

ForecastRecord predict(const Model<float>& model, const FeatureContext& ctx, std::size_t t) {
    const auto q = build_query_stack(ctx, t, model.cfg.scales, model.cfg.context);
    const auto kv = build_kv_stack(ctx, t, model.cfg.scales, model.cfg.context);
    ForecastRecord record;
    record.origin = t;
    record.forecast = forward(model, q, kv);
    if (t + static_cast<std::size_t>(model.cfg.horizon) <= ctx.total_raw.size()) {
        record.actual.assign(ctx.total_raw.begin() + static_cast<long>(t),
                             ctx.total_raw.begin() + static_cast<long>(t) + model.cfg.horizon);
    }
    return record;
}

void write_forecast_csv(const std::string& path, const std::vector<ForecastRecord>& records) {
    if (records.empty()) throw InvalidArgumentError("write_forecast_csv: no records");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << "origin,step,forecast_m3h,actual_m3h\n";
    for (const auto& r : records) {
        if (!r.actual.empty() && r.actual.size() != r.forecast.size()) {
            throw InvalidArgumentError("write_forecast_csv: actual/forecast length mismatch");
        }
        for (std::size_t j = 0; j < r.forecast.size(); ++j) {
            out << r.origin << "," << j << "," << format_g17(r.forecast[j]) << ",";
            if (!r.actual.empty()) out << format_g17(r.actual[j]);
            out << "\n";
        }
    }
    if (!out) throw ParseError("failed writing: " + path);
}

std::vector<ForecastRecord> load_forecast_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "origin,step,forecast_m3h,actual_m3h") {
        throw ParseError("expected header origin,step,forecast_m3h,actual_m3h", 1);
    }
    std::vector<ForecastRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.push_back("");
        if (fields.size() != 4) throw ParseError("expected 4 columns", line_no);

        char* end = nullptr;
        const unsigned long long origin = std::strtoull(fields[0].c_str(), &end, 10);
        if (end == fields[0].c_str() || *end != '\0') throw ParseError("bad origin", line_no);
        const long step = std::strtol(fields[1].c_str(), &end, 10);
        if (end == fields[1].c_str() || *end != '\0' || step < 0) {
            throw ParseError("bad step", line_no);
        }
        const double forecast = std::strtod(fields[2].c_str(), &end);
        if (end == fields[2].c_str() || *end != '\0') throw ParseError("bad forecast", line_no);

        if (records.empty() || records.back().origin != origin) {
            if (step != 0) throw ParseError("origin must start at step 0", line_no);
            records.push_back({static_cast<std::size_t>(origin), {}, {}});
        }
        auto& rec = records.back();
        if (static_cast<std::size_t>(step) != rec.forecast.size()) {
            throw ParseError("steps out of order", line_no);
        }
        rec.forecast.push_back(forecast);
        if (!fields[3].empty()) {
            const double actual = std::strtod(fields[3].c_str(), &end);
            if (end == fields[3].c_str() || *end != '\0') throw ParseError("bad actual", line_no);
            if (rec.actual.size() != rec.forecast.size() - 1) {
                throw ParseError("actuals must cover every step or none", line_no);
            }
            rec.actual.push_back(actual);
        } else if (!rec.actual.empty()) {
            throw ParseError("actuals must cover every step or none", line_no);
        }
    }
    if (records.empty()) throw ParseError("forecast file has no rows: " + path);
    return records;
}

namespace {

constexpr const char* kModelTag = "attention_forecaster";

weights::NamedTensor named(const std::string& name, const nn::NodePtr<float>& node) {
    return {name, node->value.shape, node->value.data};
}

nn::NodePtr<float> param_from(
    const std::map<std::string, const weights::NamedTensor*>& by_name, const std::string& name,
    const std::vector<int>& shape) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
        throw ParseError("forecaster weight file is missing tensor " + name);
    }
    if (it->second->shape != shape) {
        throw ParseError("forecaster weight tensor " + name + " has the wrong shape");
    }
    return nn::make_param(nn::Tensor<float>(it->second->shape, it->second->data));
}

}  // namespace

void save_model(const std::string& path, const Model<float>& model, std::uint64_t config_hash) {
    weights::WeightFile file;
    file.model_tag = kModelTag;
    file.config_hash = config_hash;
    const auto& c = model.cfg;
    file.meta = {c.horizon,
                 c.context,
                 c.scales,
                 c.d_model,
                 c.conv_channels1,
                 c.conv_channels2,
                 c.ffn1,
                 c.ffn2,
                 c.ffn3,
                 model.q_depth,
                 model.kv_depth,
                 std::bit_cast<std::int64_t>(model.target_stats.mean),
                 std::bit_cast<std::int64_t>(model.target_stats.stddev)};
    file.tensors = {named("query.conv1.w", model.qc1_w), named("query.conv1.b", model.qc1_b),
                    named("query.conv2.w", model.qc2_w), named("query.conv2.b", model.qc2_b),
                    named("query.token.w", model.q_tok_w), named("query.token.b", model.q_tok_b),
                    named("kv.conv1.w", model.kc1_w),     named("kv.conv1.b", model.kc1_b),
                    named("kv.conv2.w", model.kc2_w),     named("kv.conv2.b", model.kc2_b),
                    named("kv.token.w", model.k_tok_w),   named("kv.token.b", model.k_tok_b),
                    named("ffn1.w", model.f1_w),          named("ffn1.b", model.f1_b),
                    named("ffn2.w", model.f2_w),          named("ffn2.b", model.f2_b),
                    named("ffn3.w", model.f3_w),          named("ffn3.b", model.f3_b),
                    named("out.w", model.out_w),          named("out.b", model.out_b)};
    weights::save_weights(path, file);
}

Model<float> load_model(const std::string& path, std::uint64_t* config_hash) {
    const weights::WeightFile file = weights::load_weights(path);
    if (file.model_tag != kModelTag) {
        throw ParseError("weight file " + path + " holds a '" + file.model_tag +
                         "' model, not an attention forecaster");
    }
    if (file.meta.size() != 13) throw ParseError("forecaster weight file has malformed meta");
    if (config_hash) *config_hash = file.config_hash;

    Model<float> m;
    m.cfg.horizon = static_cast<int>(file.meta[0]);
    m.cfg.context = static_cast<int>(file.meta[1]);
    m.cfg.scales = static_cast<int>(file.meta[2]);
    m.cfg.d_model = static_cast<int>(file.meta[3]);
    m.cfg.conv_channels1 = static_cast<int>(file.meta[4]);
    m.cfg.conv_channels2 = static_cast<int>(file.meta[5]);
    m.cfg.ffn1 = static_cast<int>(file.meta[6]);
    m.cfg.ffn2 = static_cast<int>(file.meta[7]);
    m.cfg.ffn3 = static_cast<int>(file.meta[8]);
    m.q_depth = static_cast<int>(file.meta[9]);
    m.kv_depth = static_cast<int>(file.meta[10]);
    m.target_stats.mean = std::bit_cast<double>(file.meta[11]);
    m.target_stats.stddev = std::bit_cast<double>(file.meta[12]);

    std::map<std::string, const weights::NamedTensor*> by_name;
    for (const auto& t : file.tensors) by_name[t.name] = &t;

    const int c1 = m.cfg.conv_channels1, c2 = m.cfg.conv_channels2;
    const int token_in = m.cfg.context * c2;
    const int flat = m.cfg.scales * m.cfg.d_model;
    m.qc1_w = param_from(by_name, "query.conv1.w", {3, 3, m.q_depth, c1});
    m.qc1_b = param_from(by_name, "query.conv1.b", {c1});
    m.qc2_w = param_from(by_name, "query.conv2.w", {3, 3, c1, c2});
    m.qc2_b = param_from(by_name, "query.conv2.b", {c2});
    m.q_tok_w = param_from(by_name, "query.token.w", {token_in, m.cfg.d_model});
    m.q_tok_b = param_from(by_name, "query.token.b", {m.cfg.d_model});
    m.kc1_w = param_from(by_name, "kv.conv1.w", {3, 3, m.kv_depth, c1});
    m.kc1_b = param_from(by_name, "kv.conv1.b", {c1});
    m.kc2_w = param_from(by_name, "kv.conv2.w", {3, 3, c1, c2});
    m.kc2_b = param_from(by_name, "kv.conv2.b", {c2});
    m.k_tok_w = param_from(by_name, "kv.token.w", {token_in, m.cfg.d_model});
    m.k_tok_b = param_from(by_name, "kv.token.b", {m.cfg.d_model});
    m.f1_w = param_from(by_name, "ffn1.w", {flat, m.cfg.ffn1});
    m.f1_b = param_from(by_name, "ffn1.b", {m.cfg.ffn1});
    m.f2_w = param_from(by_name, "ffn2.w", {m.cfg.ffn1, m.cfg.ffn2});
    m.f2_b = param_from(by_name, "ffn2.b", {m.cfg.ffn2});
    m.f3_w = param_from(by_name, "ffn3.w", {m.cfg.ffn2, m.cfg.ffn3});
    m.f3_b = param_from(by_name, "ffn3.b", {m.cfg.ffn3});
    m.out_w = param_from(by_name, "out.w", {m.cfg.ffn3, m.cfg.horizon});
    m.out_b = param_from(by_name, "out.b", {m.cfg.horizon});
    return m;
}

}  // namespace wdf::forecaster
