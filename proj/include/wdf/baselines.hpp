#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wdf/errors.hpp"
#include "wdf/forecaster.hpp"
#include "wdf/nn.hpp"
#include "wdf/rng.hpp"
#include "wdf/series.hpp"
#include "wdf/wavelets.hpp"

// Reference forecasters the cross-attention model is judged against: seasonal
// naive, ARIMA, a recurrent network, and the single-branch wavelet-CNN
// ablation (same feature scalograms, no cluster inputs, no attention).
namespace wdf::baselines {

using data::DemandSeries;
using data::DmaDataset;
using forecaster::FeatureContext;
using forecaster::FeatureStats;
using forecaster::ForecastConfig;
using forecaster::ForecastRecord;

// ---------------------------------------------------------------------------
// seasonal naive

// Repeats the demand observed one season earlier: forecast[j] =
// history[t + j - season]. Throws InsufficientDataError when t < season.
std::vector<double> seasonal_naive(const std::vector<double>& history, std::size_t t,
                                   std::size_t season = 168, std::size_t horizon = 24);

// ---------------------------------------------------------------------------
// ARIMA

struct ArimaOrder {
    int p = 2;
    int d = 1;
    int q = 2;
};

// ARMA(p,q) with intercept on the d-times differenced series, fitted by
// conditional sum of squares. Internally the differenced series is
// standardized so the optimizer sees O(1) coefficients; the stored intercept
// and innovation variance are mapped back to raw units.
struct ArimaModel {
    ArimaOrder order;
    std::vector<double> ar;  // coefficients on lagged differenced values
    std::vector<double> ma;  // coefficients on lagged innovations
    double intercept = 0.0;  // raw-scale intercept of the differenced series
    double sigma2 = 0.0;     // innovation variance, raw units squared
    std::size_t n_fit = 0;   // observations entering the sum of squares
    double aic = 0.0;

    // standardization of the differenced series used during fitting
    double diff_mean = 0.0;
    double diff_scale = 1.0;
    double intercept_z = 0.0;
};

// Fit on history[0, train_end). Pure-AR orders (q = 0) solve the least-squares
// problem in closed form; mixed orders polish a Hannan-Rissanen start with
// Nelder-Mead. Throws InsufficientDataError below four weeks of history and
// TrainingDivergedError when no stationary/invertible optimum is found.
ArimaModel fit_arima(const std::vector<double>& history, std::size_t train_end, ArimaOrder order);

// Iterated multi-step forecast from origin t: innovations are rebuilt on
// history[0, t) with the fitted coefficients, future shocks are zero, and the
// differencing is inverted against the last observed levels.
std::vector<double> arima_predict(const ArimaModel& model, const std::vector<double>& history,
                                  std::size_t t, std::size_t horizon = 24);

// Convenience: fit on history[0, t), then forecast the next horizon hours.
std::vector<double> arima_forecast(const std::vector<double>& history, std::size_t t,
                                   ArimaOrder order = {}, std::size_t horizon = 24);

// Grid search over p, q in {0,1,2} and d in {0,1}, ranked by AIC on the train
// split; every candidate is logged. Falls back to (2,1,2) if nothing fits.
ArimaOrder select_arima_order(const std::vector<double>& history, std::size_t train_end);

// ---------------------------------------------------------------------------
// recurrent baseline

struct LstmConfig {
    int horizon = 24;
    int lag = 168;   // input window, hours
    int hidden = 64;
    double learning_rate = 0.001;
    int batch_size = 64;
    int patience = 15;
    int max_epochs = 100;
    int origin_stride = 24;
    std::uint64_t seed = 0;
};

// Single recurrent layer over the lag window; the output head combines the
// final hidden state with the known-future calendar/weather block.
struct LstmModel {
    LstmConfig cfg;
    int input_dim = 0;   // per-step features in the lag window
    int future_dim = 0;  // flattened known-future features entering the head
    FeatureStats target_stats;

    nn::NodePtr<float> wx, wh, b;            // gate blocks [in,4H], [H,4H], [4H]
    nn::NodePtr<float> head_w;               // [H, horizon]
    nn::NodePtr<float> head_fw;              // [future_dim, horizon]
    nn::NodePtr<float> head_b;               // [horizon]

    static LstmModel init(const LstmConfig& cfg, int input_dim, int future_dim, Rng& rng);
    std::vector<nn::NodePtr<float>> parameters() const;

    // seq: [B, lag, input_dim], future: [B, future_dim] -> [B, horizon]
    nn::NodePtr<float> forward_standardized(const nn::Tensor<float>& seq,
                                            const nn::Tensor<float>& future) const;
};

struct LstmOutcome {
    LstmModel model;
    std::vector<double> train_history;
    std::vector<double> val_history;
    int best_epoch = 0;
    int epochs_run = 0;
    long long parameter_count = 0;
};

// Per-step inputs over [t-lag, t): standardized demand, weekly seasonal,
// standardized temperature/humidity, day-of-week sine/cosine, holiday and
// weekday flags. Known-future head inputs over the target hours: the same
// calendar/weather block plus the seasonal profile.
LstmOutcome train_lstm(const DmaDataset& dataset, const LstmConfig& config);

ForecastRecord lstm_predict(const LstmModel& model, const FeatureContext& ctx, std::size_t t);

void save_lstm(const std::string& path, const LstmModel& model, std::uint64_t config_hash = 0);
LstmModel load_lstm(const std::string& path, std::uint64_t* config_hash = nullptr);

// ---------------------------------------------------------------------------
// single-branch wavelet-CNN ablation

// Same conv stack as one forecaster branch over the query + exogenous
// scalograms, then every activation feeds the feed-forward head directly:
// no cluster features, no attention, far more head parameters.
struct AblationModel {
    ForecastConfig cfg;
    int depth = 0;  // input stack depth
    FeatureStats target_stats;

    nn::NodePtr<float> c1_w, c1_b, c2_w, c2_b;
    nn::NodePtr<float> f1_w, f1_b, f2_w, f2_b, f3_w, f3_b, out_w, out_b;

    static AblationModel init(const ForecastConfig& cfg, int depth, Rng& rng);
    std::vector<nn::NodePtr<float>> parameters() const;

    // x: [B, scales, context, depth] -> [B, horizon]
    nn::NodePtr<float> forward_standardized(const nn::Tensor<float>& x) const;
};

struct AblationOutcome {
    AblationModel model;
    std::vector<double> train_history;
    std::vector<double> val_history;
    int best_epoch = 0;
    int epochs_run = 0;
    long long parameter_count = 0;
};

// Query features plus the exogenous target-hour block, depth 10.
wavelets::ScalogramStack build_ablation_stack(const FeatureContext& ctx, std::size_t t,
                                              int scales = 24, int context = 24);

AblationOutcome train_ablation(const DmaDataset& dataset, const ForecastConfig& config);

ForecastRecord ablation_predict(const AblationModel& model, const FeatureContext& ctx,
                                std::size_t t);

void save_ablation(const std::string& path, const AblationModel& model,
                   std::uint64_t config_hash = 0);
AblationModel load_ablation(const std::string& path, std::uint64_t* config_hash = nullptr);

}  // namespace wdf::baselines
