#include "wdf/baselines.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "wdf/log.hpp"
#include "wdf/timeutil.hpp"
#include "wdf/weights_io.hpp"

namespace wdf::baselines {

using forecaster::de_standardize;
using forecaster::standardize;

// ---------------------------------------------------------------------------
// seasonal naive

std::vector<double> seasonal_naive(const std::vector<double>& history, std::size_t t,
                                   std::size_t season, std::size_t horizon) {
    if (season == 0 || horizon == 0) {
        throw InvalidArgumentError("seasonal_naive: season and horizon must be positive");
    }
    if (t < season || t > history.size()) {
        throw InsufficientDataError("seasonal_naive: need at least one full season before the "
                                    "forecast origin");
    }
    std::vector<double> out(horizon);
    for (std::size_t j = 0; j < horizon; ++j) {
        // wrap within the most recent season when the horizon exceeds it
        out[j] = history[t - season + (j % season)];
    }
    return out;
}

// ---------------------------------------------------------------------------
// ARIMA

namespace {

constexpr std::size_t kMinArimaHistory = 4 * 168;

void validate_order(const ArimaOrder& order) {
    if (order.p < 0 || order.p > 5 || order.q < 0 || order.q > 5 || order.d < 0 || order.d > 2) {
        throw InvalidArgumentError("arima: order limited to p,q in [0,5], d in [0,2]");
    }
}

std::string order_label(const ArimaOrder& o) {
    return "(" + std::to_string(o.p) + "," + std::to_string(o.d) + "," + std::to_string(o.q) + ")";
}

std::vector<double> difference(const std::vector<double>& y, int d, std::size_t end) {
    std::vector<double> w(y.begin(), y.begin() + static_cast<long>(end));
    for (int k = 0; k < d; ++k) {
        for (std::size_t i = w.size() - 1; i > 0; --i) w[i] -= w[i - 1];
        w.erase(w.begin());
    }
    return w;
}

// spectral radius of the lag recursion must stay below one (stationarity for
// the AR block, invertibility for the MA block)
bool stable_lag_polynomial(const double* coeff, int k) {
    if (k == 0) return true;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) companion(0, i) = coeff[i];
    for (int i = 1; i < k; ++i) companion(i, i - 1) = 1.0;
    const Eigen::VectorXcd ev = companion.eigenvalues();
    for (int i = 0; i < k; ++i) {
        if (std::abs(ev[i]) >= 0.999) return false;
    }
    return true;
}

// conditional sum of squares of the ARMA recursion on the standardized
// differenced series; +inf outside the stationary/invertible region
double css_objective(const std::vector<double>& z, const ArimaOrder& order,
                     const std::vector<double>& params, std::vector<double>* resid = nullptr) {
    const int p = order.p, q = order.q;
    const double c = params[0];
    const double* phi = params.data() + 1;
    const double* theta = params.data() + 1 + p;
    std::vector<double> neg_theta(theta, theta + q);
    for (double& v : neg_theta) v = -v;
    if (!stable_lag_polynomial(phi, p) || !stable_lag_polynomial(neg_theta.data(), q)) {
        return std::numeric_limits<double>::infinity();
    }
    const std::size_t n = z.size();
    std::vector<double> e(n, 0.0);
    double css = 0.0;
    for (std::size_t t = static_cast<std::size_t>(p); t < n; ++t) {
        double pred = c;
        for (int i = 0; i < p; ++i) pred += phi[i] * z[t - 1 - static_cast<std::size_t>(i)];
        for (int j = 0; j < q; ++j) {
            if (t >= static_cast<std::size_t>(j) + 1) {
                pred += theta[j] * e[t - 1 - static_cast<std::size_t>(j)];
            }
        }
        const double err = z[t] - pred;
        e[t] = err;
        css += err * err;
    }
    if (resid) *resid = std::move(e);
    return css;
}

// compact Nelder-Mead; good enough for the 5-parameter CSS surfaces here
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> x0, double step, int max_iter) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> xs(n + 1, x0);
    std::vector<double> fx(n + 1);
    for (std::size_t i = 0; i < n; ++i) xs[i + 1][i] += step;
    for (std::size_t i = 0; i <= n; ++i) fx[i] = f(xs[i]);

    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<std::size_t> idx(n + 1);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return fx[a] < fx[b];
        });
        const std::size_t best = idx[0], worst = idx[n], second = idx[n - 1];
        if (std::isfinite(fx[worst]) &&
            fx[worst] - fx[best] < 1e-13 * (1.0 + std::abs(fx[best]))) {
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < n; ++k) centroid[k] += xs[i][k];
        }
        for (double& v : centroid) v /= static_cast<double>(n);

        auto blend = [&](double alpha) {
            std::vector<double> x(n);
            for (std::size_t k = 0; k < n; ++k) {
                x[k] = centroid[k] + alpha * (xs[worst][k] - centroid[k]);
            }
            return x;
        };
        const auto reflected = blend(-1.0);
        const double fr = f(reflected);
        if (fr < fx[idx[0]]) {
            const auto expanded = blend(-2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                xs[worst] = expanded;
                fx[worst] = fe;
            } else {
                xs[worst] = reflected;
                fx[worst] = fr;
            }
        } else if (fr < fx[second]) {
            xs[worst] = reflected;
            fx[worst] = fr;
        } else {
            const auto contracted = blend(fr < fx[worst] ? -0.5 : 0.5);
            const double fc = f(contracted);
            if (fc < std::min(fr, fx[worst])) {
                xs[worst] = contracted;
                fx[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t k = 0; k < n; ++k) {
                        xs[i][k] = xs[best][k] + 0.5 * (xs[i][k] - xs[best][k]);
                    }
                    fx[i] = f(xs[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (fx[i] < fx[best]) best = i;
    }
    return xs[best];
}

// least squares via QR; rank deficiency resolves to a pivoted solution
Eigen::VectorXd ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    return X.colPivHouseholderQr().solve(y);
}

// shrink AR/MA coefficients toward zero until the recursion is stable
void stabilize(std::vector<double>& params, const ArimaOrder& order) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<double> neg_theta(params.begin() + 1 + order.p, params.end());
        for (double& v : neg_theta) v = -v;
        if (stable_lag_polynomial(params.data() + 1, order.p) &&
            stable_lag_polynomial(neg_theta.data(), order.q)) {
            return;
        }
        for (std::size_t i = 1; i < params.size(); ++i) params[i] *= 0.9;
    }
    std::fill(params.begin() + 1, params.end(), 0.0);
}

}  // namespace

ArimaModel fit_arima(const std::vector<double>& history, std::size_t train_end,
                     ArimaOrder order) {
    validate_order(order);
    if (train_end > history.size()) {
        throw InvalidArgumentError("fit_arima: train split out of range");
    }
    if (train_end < kMinArimaHistory) {
        throw InsufficientDataError("fit_arima: need at least four weeks of history");
    }
    const std::vector<double> w = difference(history, order.d, train_end);
    const std::size_t n = w.size();
    const int p = order.p, q = order.q;
    if (n < static_cast<std::size_t>(p + q) + 16) {
        throw InsufficientDataError("fit_arima: differenced series too short for the order");
    }

    double m = 0.0;
    for (double v : w) m += v;
    m /= static_cast<double>(n);
    double var = 0.0;
    for (double v : w) var += (v - m) * (v - m);
    var /= static_cast<double>(n);
    const double s = std::max(std::sqrt(var), 1e-9);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (w[i] - m) / s;

    std::vector<double> params(1 + p + q, 0.0);
    if (p == 0 && q == 0) {
        double zm = 0.0;
        for (double v : z) zm += v;
        params[0] = zm / static_cast<double>(n);
    } else if (q == 0) {
        // pure AR: the conditional least-squares problem is linear
        const long rows = static_cast<long>(n) - p;
        Eigen::MatrixXd X(rows, 1 + p);
        Eigen::VectorXd y(rows);
        for (long r = 0; r < rows; ++r) {
            const std::size_t t = static_cast<std::size_t>(r + p);
            X(r, 0) = 1.0;
            for (int i = 0; i < p; ++i) X(r, 1 + i) = z[t - 1 - static_cast<std::size_t>(i)];
            y(r) = z[t];
        }
        const Eigen::VectorXd beta = ols(X, y);
        for (int k = 0; k <= p; ++k) params[static_cast<std::size_t>(k)] = beta(k);
        stabilize(params, order);
    } else {
        // Hannan-Rissanen start: innovations proxied by long-AR residuals,
        // then one linear regression on lagged values and lagged residuals
        const int long_p = std::min<int>(std::max(10, p + q + 5), static_cast<int>(n) / 4);
        std::vector<double> e(n, 0.0);
        {
            const long rows = static_cast<long>(n) - long_p;
            Eigen::MatrixXd X(rows, 1 + long_p);
            Eigen::VectorXd y(rows);
            for (long r = 0; r < rows; ++r) {
                const std::size_t t = static_cast<std::size_t>(r + long_p);
                X(r, 0) = 1.0;
                for (int i = 0; i < long_p; ++i) {
                    X(r, 1 + i) = z[t - 1 - static_cast<std::size_t>(i)];
                }
                y(r) = z[t];
            }
            const Eigen::VectorXd beta = ols(X, y);
            for (long r = 0; r < rows; ++r) {
                const std::size_t t = static_cast<std::size_t>(r + long_p);
                double pred = beta(0);
                for (int i = 0; i < long_p; ++i) {
                    pred += beta(1 + i) * z[t - 1 - static_cast<std::size_t>(i)];
                }
                e[t] = z[t] - pred;
            }
        }
        const int skip = std::max(long_p, std::max(p, q));
        const long rows = static_cast<long>(n) - skip;
        if (rows > 1 + p + q) {
            Eigen::MatrixXd X(rows, 1 + p + q);
            Eigen::VectorXd y(rows);
            for (long r = 0; r < rows; ++r) {
                const std::size_t t = static_cast<std::size_t>(r + skip);
                X(r, 0) = 1.0;
                for (int i = 0; i < p; ++i) X(r, 1 + i) = z[t - 1 - static_cast<std::size_t>(i)];
                for (int j = 0; j < q; ++j) {
                    X(r, 1 + p + j) = e[t - 1 - static_cast<std::size_t>(j)];
                }
                y(r) = z[t];
            }
            const Eigen::VectorXd beta = ols(X, y);
            for (int k = 0; k < 1 + p + q; ++k) params[static_cast<std::size_t>(k)] = beta(k);
        }
        stabilize(params, order);
        auto objective = [&](const std::vector<double>& x) { return css_objective(z, order, x); };
        params = nelder_mead(objective, params, 0.1,
                             400 * static_cast<int>(params.size()));
    }

    const double css = css_objective(z, order, params);
    if (!std::isfinite(css)) {
        throw TrainingDivergedError("fit_arima: no stationary and invertible optimum for order " +
                                    order_label(order));
    }

    ArimaModel model;
    model.order = order;
    model.diff_mean = m;
    model.diff_scale = s;
    model.intercept_z = params[0];
    model.ar.assign(params.begin() + 1, params.begin() + 1 + p);
    model.ma.assign(params.begin() + 1 + p, params.end());
    model.n_fit = n - static_cast<std::size_t>(p);
    const double sigma2_z = css / static_cast<double>(model.n_fit);
    model.sigma2 = s * s * sigma2_z;
    double phi_sum = 0.0;
    for (double v : model.ar) phi_sum += v;
    model.intercept = m * (1.0 - phi_sum) + s * params[0];
    model.aic = static_cast<double>(model.n_fit) * std::log(std::max(model.sigma2, 1e-300)) +
                2.0 * static_cast<double>(p + q + 1);
    return model;
}

std::vector<double> arima_predict(const ArimaModel& model, const std::vector<double>& history,
                                  std::size_t t, std::size_t horizon) {
    const int p = model.order.p, d = model.order.d, q = model.order.q;
    if (horizon == 0) throw InvalidArgumentError("arima_predict: horizon must be positive");
    if (t > history.size()) {
        throw InvalidArgumentError("arima_predict: origin beyond the end of the series");
    }
    if (t < static_cast<std::size_t>(d + p + q + 1)) {
        throw InsufficientDataError("arima_predict: origin leaves too little history for the "
                                    "model order");
    }

    std::vector<double> w = difference(history, d, t);
    const std::size_t n = w.size();
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (w[i] - model.diff_mean) / model.diff_scale;

    // rebuild in-sample innovations with the fitted coefficients
    std::vector<double> e(n, 0.0);
    for (std::size_t u = static_cast<std::size_t>(p); u < n; ++u) {
        double pred = model.intercept_z;
        for (int i = 0; i < p; ++i) pred += model.ar[i] * z[u - 1 - static_cast<std::size_t>(i)];
        for (int j = 0; j < q; ++j) {
            if (u >= static_cast<std::size_t>(j) + 1) {
                pred += model.ma[j] * e[u - 1 - static_cast<std::size_t>(j)];
            }
        }
        e[u] = z[u] - pred;
    }

    // iterate forward; future shocks are zero
    std::vector<double> zf = z;
    std::vector<double> what(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        const std::size_t idx = n + h;
        double pred = model.intercept_z;
        for (int i = 0; i < p; ++i) pred += model.ar[i] * zf[idx - 1 - static_cast<std::size_t>(i)];
        for (int j = 0; j < q; ++j) {
            const std::size_t lag = static_cast<std::size_t>(j) + 1;
            if (idx >= lag && idx - lag < n) pred += model.ma[j] * e[idx - lag];
        }
        zf.push_back(pred);
        what[h] = model.diff_mean + model.diff_scale * pred;
    }

    // invert the differencing against the last observed levels
    std::vector<double> out = std::move(what);
    for (int k = d; k >= 1; --k) {
        std::vector<double> level(history.begin(), history.begin() + static_cast<long>(t));
        for (int j = 0; j < k - 1; ++j) {
            for (std::size_t i = level.size() - 1; i > 0; --i) level[i] -= level[i - 1];
            level.erase(level.begin());
        }
        double prev = level.back();
        for (double& v : out) {
            v += prev;
            prev = v;
        }
    }
    return out;
}

std::vector<double> arima_forecast(const std::vector<double>& history, std::size_t t,
                                   ArimaOrder order, std::size_t horizon) {
    const ArimaModel model = fit_arima(history, t, order);
    return arima_predict(model, history, t, horizon);
}

ArimaOrder select_arima_order(const std::vector<double>& history, std::size_t train_end) {
    ArimaOrder best{2, 1, 2};
    double best_aic = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int d = 0; d <= 1; ++d) {
        for (int p = 0; p <= 2; ++p) {
            for (int q = 0; q <= 2; ++q) {
                const ArimaOrder order{p, d, q};
                try {
                    const ArimaModel model = fit_arima(history, train_end, order);
                    log::info("arima order " + order_label(order) +
                              ": aic=" + std::to_string(model.aic) +
                              " sigma2=" + std::to_string(model.sigma2));
                    if (model.aic < best_aic) {
                        best_aic = model.aic;
                        best = order;
                        found = true;
                    }
                } catch (const TrainingDivergedError& err) {
                    log::info("arima order " + order_label(order) + ": rejected (" +
                              std::string(err.what()) + ")");
                }
            }
        }
    }
    if (!found) {
        log::info("arima order search found no stable candidate; keeping the (2,1,2) default");
    } else {
        log::info("arima order search selected " + order_label(best));
    }
    return best;
}

// ---------------------------------------------------------------------------
// shared network training helpers

namespace {

std::vector<std::vector<float>> snapshot(const std::vector<nn::NodePtr<float>>& params) {
    std::vector<std::vector<float>> copy;
    for (const auto& p : params) copy.push_back(p->value.data);
    return copy;
}

void restore(const std::vector<nn::NodePtr<float>>& params,
             const std::vector<std::vector<float>>& weights) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value.data = weights[i];
}

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

weights::NamedTensor named(const std::string& name, const nn::NodePtr<float>& node) {
    return {name, node->value.shape, node->value.data};
}

nn::NodePtr<float> param_from(
    const std::map<std::string, const weights::NamedTensor*>& by_name, const std::string& name,
    const std::vector<int>& shape) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
        throw ParseError("weight file is missing tensor " + name);
    }
    if (it->second->shape != shape) {
        throw ParseError("weight tensor " + name + " has the wrong shape");
    }
    return nn::make_param(nn::Tensor<float>(it->second->shape, it->second->data));
}

// training/validation origin grids on a shared stride phase, as in the main
// forecaster
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> origin_grids(
    std::size_t min_origin, std::size_t stride, int horizon, std::size_t train_end,
    std::size_t val_end) {
    std::vector<std::size_t> train, val;
    for (std::size_t t = min_origin; t + static_cast<std::size_t>(horizon) <= train_end;
         t += stride) {
        train.push_back(t);
    }
    std::size_t val_begin = std::max(min_origin, train_end);
    if ((val_begin - min_origin) % stride != 0) {
        val_begin += stride - (val_begin - min_origin) % stride;
    }
    for (std::size_t t = val_begin; t + static_cast<std::size_t>(horizon) <= val_end;
         t += stride) {
        val.push_back(t);
    }
    return {std::move(train), std::move(val)};
}

}  // namespace

// ---------------------------------------------------------------------------
// recurrent baseline

namespace {

constexpr int kLstmStepFeatures = 8;
constexpr int kLstmFuturePerHour = 7;

// per-step inputs at hour tau: standardized demand, weekly seasonal,
// standardized weather, day-of-week sine/cosine, holiday and weekday flags
void lstm_step_features(const FeatureContext& ctx, std::size_t tau, float* dst) {
    const auto& ds = *ctx.dataset;
    const time::HourStamp h = ds.start() + static_cast<time::HourStamp>(tau);
    const double dow = time::weekday(h, ds.utc_offset_hours);
    dst[0] = static_cast<float>(ctx.total_z[tau]);
    dst[1] = static_cast<float>(ctx.seasonal168[static_cast<std::size_t>(ctx.week_hour_at(tau))]);
    dst[2] = static_cast<float>(
        standardize(ds.weather.temperature_max[tau], ctx.temperature_stats));
    dst[3] = static_cast<float>(standardize(ds.weather.humidity[tau], ctx.humidity_stats));
    dst[4] = static_cast<float>(std::sin(2.0 * M_PI * dow / 7.0));
    dst[5] = static_cast<float>(std::cos(2.0 * M_PI * dow / 7.0));
    dst[6] = ds.holidays.covers_hour(h, ds.utc_offset_hours) ? 1.0f : 0.0f;
    dst[7] = dow < 5 ? 1.0f : 0.0f;
}

// known-future block over the target hours: everything above except demand
void lstm_future_features(const FeatureContext& ctx, std::size_t origin, int horizon,
                          float* dst) {
    for (int j = 0; j < horizon; ++j) {
        float step[kLstmStepFeatures];
        lstm_step_features(ctx, origin + static_cast<std::size_t>(j), step);
        std::memcpy(dst + static_cast<std::size_t>(j) * kLstmFuturePerHour, step + 1,
                    kLstmFuturePerHour * sizeof(float));
    }
}

void check_lstm_origin(const FeatureContext& ctx, std::size_t t, const LstmConfig& cfg) {
    if (t < static_cast<std::size_t>(cfg.lag) ||
        t + static_cast<std::size_t>(cfg.horizon) > ctx.hours()) {
        throw InsufficientDataError("lstm: origin " + std::to_string(t) +
                                    " leaves too little history or target data");
    }
}

}  // namespace

LstmModel LstmModel::init(const LstmConfig& cfg, int input_dim, int future_dim, Rng& rng) {
    if (cfg.horizon < 1 || cfg.lag < 1 || cfg.hidden < 1 || input_dim < 1 || future_dim < 1) {
        throw InvalidArgumentError("lstm model: all dimensions must be positive");
    }
    LstmModel m;
    m.cfg = cfg;
    m.input_dim = input_dim;
    m.future_dim = future_dim;
    const int H = cfg.hidden;
    m.wx = nn::make_param(nn::fan_in_init<float>(rng, {input_dim, 4 * H}, input_dim));
    m.wh = nn::make_param(nn::fan_in_init<float>(rng, {H, 4 * H}, H));
    nn::Tensor<float> bias({4 * H});
    for (int i = H; i < 2 * H; ++i) bias.data[static_cast<std::size_t>(i)] = 1.0f;  // forget gate
    m.b = nn::make_param(std::move(bias));
    m.head_w = nn::make_param(nn::fan_in_init<float>(rng, {H, cfg.horizon}, H));
    m.head_fw = nn::make_param(nn::fan_in_init<float>(rng, {future_dim, cfg.horizon}, future_dim));
    m.head_b = nn::make_param(nn::Tensor<float>({cfg.horizon}));
    return m;
}

std::vector<nn::NodePtr<float>> LstmModel::parameters() const {
    return {wx, wh, b, head_w, head_fw, head_b};
}

nn::NodePtr<float> LstmModel::forward_standardized(const nn::Tensor<float>& seq,
                                                   const nn::Tensor<float>& future) const {
    if (seq.ndim() != 3 || seq.dim(1) != cfg.lag || seq.dim(2) != input_dim) {
        throw InvalidArgumentError("lstm forward: sequence must be [B, lag, input_dim]");
    }
    if (future.ndim() != 2 || future.dim(0) != seq.dim(0) || future.dim(1) != future_dim) {
        throw InvalidArgumentError("lstm forward: future block must be [B, future_dim]");
    }
    const int B = seq.dim(0), H = cfg.hidden;
    auto x = nn::make_const(seq);
    auto fut = nn::make_const(future);
    nn::NodePtr<float> h = nn::make_const(nn::Tensor<float>({B, H}));
    nn::NodePtr<float> c = nn::make_const(nn::Tensor<float>({B, H}));
    for (int s = 0; s < cfg.lag; ++s) {
        auto xs = nn::reshape(nn::slice_time(x, s, s + 1), {B, input_dim});
        auto gates = nn::add_bias(nn::add(nn::linear(xs, wx), nn::linear(h, wh)), b);
        auto i = nn::sigmoid(nn::slice_lastdim(gates, 0, H));
        auto f = nn::sigmoid(nn::slice_lastdim(gates, H, 2 * H));
        auto g = nn::tanh_op(nn::slice_lastdim(gates, 2 * H, 3 * H));
        auto o = nn::sigmoid(nn::slice_lastdim(gates, 3 * H, 4 * H));
        c = nn::add(nn::mul(f, c), nn::mul(i, g));
        h = nn::mul(o, nn::tanh_op(c));
    }
    return nn::add_bias(nn::add(nn::linear(h, head_w), nn::linear(fut, head_fw)), head_b);
}

LstmOutcome train_lstm(const DmaDataset& dataset, const LstmConfig& config) {
    if (config.batch_size < 1 || config.max_epochs < 1 || config.patience < 1 ||
        config.origin_stride < 1) {
        throw InvalidArgumentError("train_lstm: batch, epochs, patience, and stride must be "
                                   "positive");
    }
    if (!(config.learning_rate > 0.0)) {
        throw InvalidArgumentError("train_lstm: learning rate must be positive");
    }
    if (config.horizon < 1 || config.horizon > 24) {
        throw InvalidArgumentError("train_lstm: horizon must be within a day");
    }
    const FeatureContext ctx =
        forecaster::make_feature_context(dataset, {}, wavelets::kDefaultWavelet);
    const int fd = kLstmFuturePerHour * config.horizon;
    auto [train_origins, val_origins] =
        origin_grids(static_cast<std::size_t>(config.lag),
                     static_cast<std::size_t>(config.origin_stride), config.horizon,
                     dataset.split.train_end, dataset.split.val_end);
    if (train_origins.empty() || val_origins.empty()) {
        throw InsufficientDataError("train_lstm: split leaves no usable train or validation "
                                    "origins");
    }
    log::info("train_lstm: " + std::to_string(train_origins.size()) + " train and " +
              std::to_string(val_origins.size()) + " validation origins");

    const std::size_t seq_len = static_cast<std::size_t>(config.lag) * kLstmStepFeatures;
    auto precompute = [&](const std::vector<std::size_t>& origins) {
        std::tuple<std::vector<std::vector<float>>, std::vector<std::vector<float>>,
                   std::vector<std::vector<float>>>
            data;
        auto& [seqs, futs, targets] = data;
        for (std::size_t t : origins) {
            check_lstm_origin(ctx, t, config);
            std::vector<float> seq(seq_len);
            for (int s = 0; s < config.lag; ++s) {
                lstm_step_features(ctx, t - static_cast<std::size_t>(config.lag - s),
                                   seq.data() + static_cast<std::size_t>(s) * kLstmStepFeatures);
            }
            std::vector<float> fut(static_cast<std::size_t>(fd));
            lstm_future_features(ctx, t, config.horizon, fut.data());
            std::vector<float> y(static_cast<std::size_t>(config.horizon));
            for (int j = 0; j < config.horizon; ++j) {
                y[static_cast<std::size_t>(j)] =
                    static_cast<float>(ctx.total_z[t + static_cast<std::size_t>(j)]);
            }
            seqs.push_back(std::move(seq));
            futs.push_back(std::move(fut));
            targets.push_back(std::move(y));
        }
        return data;
    };
    const auto train_data = precompute(train_origins);
    const auto val_data = precompute(val_origins);

    LstmOutcome outcome;
    Rng init_rng(Rng::mix(config.seed, 17));
    outcome.model = LstmModel::init(config, kLstmStepFeatures, fd, init_rng);
    outcome.model.target_stats = ctx.total_stats;
    const auto params = outcome.model.parameters();
    outcome.parameter_count = nn::parameter_count(params);
    log::info("train_lstm: " + std::to_string(outcome.parameter_count) +
              " trainable parameters");
    nn::Adam<float> adam(params, static_cast<float>(config.learning_rate));

    const std::size_t batch = static_cast<std::size_t>(config.batch_size);
    auto gather = [&](const auto& data, const std::vector<int>& order, std::size_t begin,
                      std::size_t end, nn::Tensor<float>& seq, nn::Tensor<float>& fut,
                      nn::Tensor<float>& target) {
        const auto& [seqs, futs, targets] = data;
        for (std::size_t r = begin; r < end; ++r) {
            const std::size_t src = static_cast<std::size_t>(order[r]);
            std::memcpy(seq.data.data() + (r - begin) * seq_len, seqs[src].data(),
                        seq_len * sizeof(float));
            std::memcpy(fut.data.data() + (r - begin) * static_cast<std::size_t>(fd),
                        futs[src].data(), static_cast<std::size_t>(fd) * sizeof(float));
            std::memcpy(target.data.data() +
                            (r - begin) * static_cast<std::size_t>(config.horizon),
                        targets[src].data(),
                        static_cast<std::size_t>(config.horizon) * sizeof(float));
        }
    };
    auto batch_tensors = [&](std::size_t rows) {
        return std::tuple<nn::Tensor<float>, nn::Tensor<float>, nn::Tensor<float>>(
            nn::Tensor<float>({static_cast<int>(rows), config.lag, kLstmStepFeatures}),
            nn::Tensor<float>({static_cast<int>(rows), fd}),
            nn::Tensor<float>({static_cast<int>(rows), config.horizon}));
    };

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<std::vector<float>> best_weights = snapshot(params);
    int stall = 0;
    std::vector<int> order(train_origins.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> val_order(val_origins.size());
    std::iota(val_order.begin(), val_order.end(), 0);

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        Rng shuffle_rng(Rng::mix(config.seed, 0x600u + static_cast<unsigned>(epoch)));
        shuffle_rng.shuffle(order);

        double train_sse = 0.0;
        std::size_t train_elems = 0;
        for (std::size_t begin = 0, bi = 0; begin < order.size(); begin += batch, ++bi) {
            const std::size_t end = std::min(order.size(), begin + batch);
            auto [seq, fut, target] = batch_tensors(end - begin);
            gather(train_data, order, begin, end, seq, fut, target);
            auto pred = outcome.model.forward_standardized(seq, fut);
            auto loss = nn::mse(pred, nn::make_const(target));
            const double lv = static_cast<double>(loss->value(0));
            if (!std::isfinite(lv)) {
                throw TrainingDivergedError("lstm loss became non-finite at epoch " +
                                            std::to_string(epoch + 1) + ", batch " +
                                            std::to_string(bi + 1));
            }
            train_sse += lv * static_cast<double>(target.size());
            train_elems += static_cast<std::size_t>(target.size());
            adam.zero_grad();
            nn::backward(loss);
            adam.step();
        }
        outcome.train_history.push_back(train_sse / static_cast<double>(train_elems));

        double val_sse = 0.0;
        std::size_t val_elems = 0;
        for (std::size_t begin = 0; begin < val_order.size(); begin += batch) {
            const std::size_t end = std::min(val_order.size(), begin + batch);
            auto [seq, fut, target] = batch_tensors(end - begin);
            gather(val_data, val_order, begin, end, seq, fut, target);
            auto pred = outcome.model.forward_standardized(seq, fut);
            for (long long i = 0; i < target.size(); ++i) {
                const double diff = static_cast<double>(pred->value.data[i]) -
                                    static_cast<double>(target.data[i]);
                val_sse += diff * diff;
            }
            val_elems += static_cast<std::size_t>(target.size());
        }
        const double val_mse = val_sse / static_cast<double>(val_elems);
        if (!std::isfinite(val_mse)) {
            throw TrainingDivergedError("lstm validation loss became non-finite at epoch " +
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
            log::info("train_lstm: early stop after epoch " + std::to_string(epoch + 1));
            break;
        }
    }
    restore(params, best_weights);
    return outcome;
}

ForecastRecord lstm_predict(const LstmModel& model, const FeatureContext& ctx, std::size_t t) {
    check_lstm_origin(ctx, t, model.cfg);
    const int fd = model.future_dim;
    nn::Tensor<float> seq({1, model.cfg.lag, model.input_dim});
    for (int s = 0; s < model.cfg.lag; ++s) {
        lstm_step_features(ctx, t - static_cast<std::size_t>(model.cfg.lag - s),
                           seq.data.data() + static_cast<std::size_t>(s) * kLstmStepFeatures);
    }
    nn::Tensor<float> fut({1, fd});
    lstm_future_features(ctx, t, model.cfg.horizon, fut.data.data());
    auto y = model.forward_standardized(seq, fut);

    ForecastRecord record;
    record.origin = t;
    record.forecast.resize(static_cast<std::size_t>(model.cfg.horizon));
    for (int j = 0; j < model.cfg.horizon; ++j) {
        record.forecast[static_cast<std::size_t>(j)] =
            de_standardize(static_cast<double>(y->value(0, j)), model.target_stats);
    }
    if (t + static_cast<std::size_t>(model.cfg.horizon) <= ctx.total_raw.size()) {
        record.actual.assign(
            ctx.total_raw.begin() + static_cast<long>(t),
            ctx.total_raw.begin() + static_cast<long>(t + static_cast<std::size_t>(model.cfg.horizon)));
    }
    return record;
}

namespace {
constexpr const char* kLstmTag = "lstm_baseline";
}

void save_lstm(const std::string& path, const LstmModel& model, std::uint64_t config_hash) {
    weights::WeightFile file;
    file.model_tag = kLstmTag;
    file.config_hash = config_hash;
    file.meta = {model.cfg.horizon,
                 model.cfg.lag,
                 model.cfg.hidden,
                 model.input_dim,
                 model.future_dim,
                 std::bit_cast<std::int64_t>(model.target_stats.mean),
                 std::bit_cast<std::int64_t>(model.target_stats.stddev)};
    file.tensors = {named("rnn.wx", model.wx),       named("rnn.wh", model.wh),
                    named("rnn.b", model.b),         named("head.w", model.head_w),
                    named("head.fw", model.head_fw), named("head.b", model.head_b)};
    weights::save_weights(path, file);
}

LstmModel load_lstm(const std::string& path, std::uint64_t* config_hash) {
    const weights::WeightFile file = weights::load_weights(path);
    if (file.model_tag != kLstmTag) {
        throw ParseError("weight file " + path + " holds a '" + file.model_tag +
                         "' model, not the recurrent baseline");
    }
    if (file.meta.size() != 7) throw ParseError("lstm weight file has malformed meta");
    if (config_hash) *config_hash = file.config_hash;

    LstmModel m;
    m.cfg.horizon = static_cast<int>(file.meta[0]);
    m.cfg.lag = static_cast<int>(file.meta[1]);
    m.cfg.hidden = static_cast<int>(file.meta[2]);
    m.input_dim = static_cast<int>(file.meta[3]);
    m.future_dim = static_cast<int>(file.meta[4]);
    m.target_stats.mean = std::bit_cast<double>(file.meta[5]);
    m.target_stats.stddev = std::bit_cast<double>(file.meta[6]);
    if (m.cfg.horizon < 1 || m.cfg.lag < 1 || m.cfg.hidden < 1 || m.input_dim < 1 ||
        m.future_dim < 1) {
        throw ParseError("lstm weight file has non-positive dimensions");
    }

    std::map<std::string, const weights::NamedTensor*> by_name;
    for (const auto& tensor : file.tensors) by_name[tensor.name] = &tensor;
    const int H = m.cfg.hidden;
    m.wx = param_from(by_name, "rnn.wx", {m.input_dim, 4 * H});
    m.wh = param_from(by_name, "rnn.wh", {H, 4 * H});
    m.b = param_from(by_name, "rnn.b", {4 * H});
    m.head_w = param_from(by_name, "head.w", {H, m.cfg.horizon});
    m.head_fw = param_from(by_name, "head.fw", {m.future_dim, m.cfg.horizon});
    m.head_b = param_from(by_name, "head.b", {m.cfg.horizon});
    return m;
}

// ---------------------------------------------------------------------------
// single-branch wavelet-CNN ablation

wavelets::ScalogramStack build_ablation_stack(const FeatureContext& ctx, std::size_t t,
                                              int scales, int context) {
    return forecaster::merge_stacks(forecaster::build_query_stack(ctx, t, scales, context),
                                    forecaster::build_exogenous_stack(ctx, t, scales, context));
}

AblationModel AblationModel::init(const ForecastConfig& cfg, int depth, Rng& rng) {
    if (cfg.horizon < 1 || cfg.context < 1 || cfg.scales < 1 || cfg.conv_channels1 < 1 ||
        cfg.conv_channels2 < 1 || cfg.ffn1 < 1 || cfg.ffn2 < 1 || cfg.ffn3 < 1 || depth < 1) {
        throw InvalidArgumentError("ablation model: all dimensions must be positive");
    }
    AblationModel m;
    m.cfg = cfg;
    m.depth = depth;
    const int c1 = cfg.conv_channels1, c2 = cfg.conv_channels2;
    const int flat = cfg.scales * cfg.context * c2;
    auto lin_w = [&](int in, int out) {
        return nn::make_param(nn::fan_in_init<float>(rng, {in, out}, in));
    };
    auto vec_b = [&](int n) { return nn::make_param(nn::Tensor<float>({n})); };
    m.c1_w = nn::make_param(nn::fan_in_init<float>(rng, {3, 3, depth, c1}, 9 * depth));
    m.c1_b = vec_b(c1);
    m.c2_w = nn::make_param(nn::fan_in_init<float>(rng, {3, 3, c1, c2}, 9 * c1));
    m.c2_b = vec_b(c2);
    m.f1_w = lin_w(flat, cfg.ffn1);
    m.f1_b = vec_b(cfg.ffn1);
    m.f2_w = lin_w(cfg.ffn1, cfg.ffn2);
    m.f2_b = vec_b(cfg.ffn2);
    m.f3_w = lin_w(cfg.ffn2, cfg.ffn3);
    m.f3_b = vec_b(cfg.ffn3);
    m.out_w = lin_w(cfg.ffn3, cfg.horizon);
    m.out_b = vec_b(cfg.horizon);
    return m;
}

std::vector<nn::NodePtr<float>> AblationModel::parameters() const {
    return {c1_w, c1_b, c2_w, c2_b, f1_w, f1_b, f2_w, f2_b, f3_w, f3_b, out_w, out_b};
}

nn::NodePtr<float> AblationModel::forward_standardized(const nn::Tensor<float>& x) const {
    if (x.ndim() != 4 || x.dim(1) != cfg.scales || x.dim(2) != cfg.context || x.dim(3) != depth) {
        throw InvalidArgumentError("ablation forward: input must be [B, scales, context, depth]");
    }
    const int B = x.dim(0);
    auto h = nn::leaky_relu(nn::conv2d_same3x3(nn::make_const(x), c1_w, c1_b));
    h = nn::leaky_relu(nn::conv2d_same3x3(h, c2_w, c2_b));
    h = nn::reshape(h, {B, cfg.scales * cfg.context * cfg.conv_channels2});
    h = nn::relu(nn::add_bias(nn::linear(h, f1_w), f1_b));
    h = nn::relu(nn::add_bias(nn::linear(h, f2_w), f2_b));
    h = nn::relu(nn::add_bias(nn::linear(h, f3_w), f3_b));
    return nn::add_bias(nn::linear(h, out_w), out_b);
}

AblationOutcome train_ablation(const DmaDataset& dataset, const ForecastConfig& config) {
    if (config.batch_size < 1 || config.max_epochs < 1 || config.patience < 1 ||
        config.origin_stride < 1) {
        throw InvalidArgumentError("train_ablation: batch, epochs, patience, and stride must "
                                   "be positive");
    }
    if (!(config.learning_rate > 0.0)) {
        throw InvalidArgumentError("train_ablation: learning rate must be positive");
    }
    if (config.horizon < 1 || config.horizon > 24) {
        throw InvalidArgumentError("train_ablation: horizon must be within the 24-hour feature "
                                   "window");
    }
    const FeatureContext ctx = forecaster::make_feature_context(dataset, {}, config.wavelet);
    auto [train_origins, val_origins] =
        origin_grids(forecaster::kMinOrigin, static_cast<std::size_t>(config.origin_stride),
                     config.horizon, dataset.split.train_end, dataset.split.val_end);
    if (train_origins.empty() || val_origins.empty()) {
        throw InsufficientDataError("train_ablation: split leaves no usable train or validation "
                                    "origins");
    }
    log::info("train_ablation: " + std::to_string(train_origins.size()) + " train and " +
              std::to_string(val_origins.size()) + " validation origins");

    const std::size_t stack_len = static_cast<std::size_t>(config.scales) *
                                  static_cast<std::size_t>(config.context) * 10u;
    auto precompute = [&](const std::vector<std::size_t>& origins) {
        std::pair<std::vector<std::vector<float>>, std::vector<std::vector<float>>> data;
        auto& [stacks, targets] = data;
        for (std::size_t t : origins) {
            const auto stack = build_ablation_stack(ctx, t, config.scales, config.context);
            std::vector<float> flat(stack_len);
            copy_stack(stack, flat.data());
            std::vector<float> y(static_cast<std::size_t>(config.horizon));
            for (int j = 0; j < config.horizon; ++j) {
                y[static_cast<std::size_t>(j)] =
                    static_cast<float>(ctx.total_z[t + static_cast<std::size_t>(j)]);
            }
            stacks.push_back(std::move(flat));
            targets.push_back(std::move(y));
        }
        return data;
    };
    const auto train_data = precompute(train_origins);
    const auto val_data = precompute(val_origins);

    AblationOutcome outcome;
    Rng init_rng(Rng::mix(config.seed, 13));
    outcome.model = AblationModel::init(config, 10, init_rng);
    outcome.model.target_stats = ctx.total_stats;
    const auto params = outcome.model.parameters();
    outcome.parameter_count = nn::parameter_count(params);
    log::info("train_ablation: " + std::to_string(outcome.parameter_count) +
              " trainable parameters");
    nn::Adam<float> adam(params, static_cast<float>(config.learning_rate));

    const std::size_t batch = static_cast<std::size_t>(config.batch_size);
    auto gather = [&](const auto& data, const std::vector<int>& order, std::size_t begin,
                      std::size_t end, nn::Tensor<float>& x, nn::Tensor<float>& target) {
        const auto& [stacks, targets] = data;
        for (std::size_t r = begin; r < end; ++r) {
            const std::size_t src = static_cast<std::size_t>(order[r]);
            std::memcpy(x.data.data() + (r - begin) * stack_len, stacks[src].data(),
                        stack_len * sizeof(float));
            std::memcpy(target.data.data() +
                            (r - begin) * static_cast<std::size_t>(config.horizon),
                        targets[src].data(),
                        static_cast<std::size_t>(config.horizon) * sizeof(float));
        }
    };
    auto batch_tensors = [&](std::size_t rows) {
        return std::pair<nn::Tensor<float>, nn::Tensor<float>>(
            nn::Tensor<float>({static_cast<int>(rows), config.scales, config.context, 10}),
            nn::Tensor<float>({static_cast<int>(rows), config.horizon}));
    };

    double best_val = std::numeric_limits<double>::infinity();
    std::vector<std::vector<float>> best_weights = snapshot(params);
    int stall = 0;
    std::vector<int> order(train_origins.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> val_order(val_origins.size());
    std::iota(val_order.begin(), val_order.end(), 0);

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        Rng shuffle_rng(Rng::mix(config.seed, 0x700u + static_cast<unsigned>(epoch)));
        shuffle_rng.shuffle(order);

        double train_sse = 0.0;
        std::size_t train_elems = 0;
        for (std::size_t begin = 0, bi = 0; begin < order.size(); begin += batch, ++bi) {
            const std::size_t end = std::min(order.size(), begin + batch);
            auto [x, target] = batch_tensors(end - begin);
            gather(train_data, order, begin, end, x, target);
            auto pred = outcome.model.forward_standardized(x);
            auto loss = nn::mse(pred, nn::make_const(target));
            const double lv = static_cast<double>(loss->value(0));
            if (!std::isfinite(lv)) {
                throw TrainingDivergedError("ablation loss became non-finite at epoch " +
                                            std::to_string(epoch + 1) + ", batch " +
                                            std::to_string(bi + 1));
            }
            train_sse += lv * static_cast<double>(target.size());
            train_elems += static_cast<std::size_t>(target.size());
            adam.zero_grad();
            nn::backward(loss);
            adam.step();
        }
        outcome.train_history.push_back(train_sse / static_cast<double>(train_elems));

        double val_sse = 0.0;
        std::size_t val_elems = 0;
        for (std::size_t begin = 0; begin < val_order.size(); begin += batch) {
            const std::size_t end = std::min(val_order.size(), begin + batch);
            auto [x, target] = batch_tensors(end - begin);
            gather(val_data, val_order, begin, end, x, target);
            auto pred = outcome.model.forward_standardized(x);
            for (long long i = 0; i < target.size(); ++i) {
                const double diff = static_cast<double>(pred->value.data[i]) -
                                    static_cast<double>(target.data[i]);
                val_sse += diff * diff;
            }
            val_elems += static_cast<std::size_t>(target.size());
        }
        const double val_mse = val_sse / static_cast<double>(val_elems);
        if (!std::isfinite(val_mse)) {
            throw TrainingDivergedError("ablation validation loss became non-finite at epoch " +
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
            log::info("train_ablation: early stop after epoch " + std::to_string(epoch + 1));
            break;
        }
    }
    restore(params, best_weights);
    return outcome;
}

ForecastRecord ablation_predict(const AblationModel& model, const FeatureContext& ctx,
                                std::size_t t) {
    const auto stack = build_ablation_stack(ctx, t, model.cfg.scales, model.cfg.context);
    nn::Tensor<float> x({1, model.cfg.scales, model.cfg.context, model.depth});
    copy_stack(stack, x.data.data());
    auto y = model.forward_standardized(x);

    ForecastRecord record;
    record.origin = t;
    record.forecast.resize(static_cast<std::size_t>(model.cfg.horizon));
    for (int j = 0; j < model.cfg.horizon; ++j) {
        record.forecast[static_cast<std::size_t>(j)] =
            de_standardize(static_cast<double>(y->value(0, j)), model.target_stats);
    }
    if (t + static_cast<std::size_t>(model.cfg.horizon) <= ctx.total_raw.size()) {
        record.actual.assign(
            ctx.total_raw.begin() + static_cast<long>(t),
            ctx.total_raw.begin() + static_cast<long>(t + static_cast<std::size_t>(model.cfg.horizon)));
    }
    return record;
}

namespace {
constexpr const char* kAblationTag = "wavelet_cnn_ablation";
}

void save_ablation(const std::string& path, const AblationModel& model,
                   std::uint64_t config_hash) {
    weights::WeightFile file;
    file.model_tag = kAblationTag;
    file.config_hash = config_hash;
    const auto& c = model.cfg;
    file.meta = {c.horizon,
                 c.context,
                 c.scales,
                 c.conv_channels1,
                 c.conv_channels2,
                 c.ffn1,
                 c.ffn2,
                 c.ffn3,
                 model.depth,
                 std::bit_cast<std::int64_t>(model.target_stats.mean),
                 std::bit_cast<std::int64_t>(model.target_stats.stddev)};
    file.tensors = {named("conv1.w", model.c1_w), named("conv1.b", model.c1_b),
                    named("conv2.w", model.c2_w), named("conv2.b", model.c2_b),
                    named("ffn1.w", model.f1_w),  named("ffn1.b", model.f1_b),
                    named("ffn2.w", model.f2_w),  named("ffn2.b", model.f2_b),
                    named("ffn3.w", model.f3_w),  named("ffn3.b", model.f3_b),
                    named("out.w", model.out_w),  named("out.b", model.out_b)};
    weights::save_weights(path, file);
}

AblationModel load_ablation(const std::string& path, std::uint64_t* config_hash) {
    const weights::WeightFile file = weights::load_weights(path);
    if (file.model_tag != kAblationTag) {
        throw ParseError("weight file " + path + " holds a '" + file.model_tag +
                         "' model, not the wavelet-CNN ablation");
    }
    if (file.meta.size() != 11) throw ParseError("ablation weight file has malformed meta");
    if (config_hash) *config_hash = file.config_hash;

    AblationModel m;
    m.cfg.horizon = static_cast<int>(file.meta[0]);
    m.cfg.context = static_cast<int>(file.meta[1]);
    m.cfg.scales = static_cast<int>(file.meta[2]);
    m.cfg.conv_channels1 = static_cast<int>(file.meta[3]);
    m.cfg.conv_channels2 = static_cast<int>(file.meta[4]);
    m.cfg.ffn1 = static_cast<int>(file.meta[5]);
    m.cfg.ffn2 = static_cast<int>(file.meta[6]);
    m.cfg.ffn3 = static_cast<int>(file.meta[7]);
    m.depth = static_cast<int>(file.meta[8]);
    m.target_stats.mean = std::bit_cast<double>(file.meta[9]);
    m.target_stats.stddev = std::bit_cast<double>(file.meta[10]);
    if (m.cfg.horizon < 1 || m.cfg.context < 1 || m.cfg.scales < 1 || m.depth < 1) {
        throw ParseError("ablation weight file has non-positive dimensions");
    }

    std::map<std::string, const weights::NamedTensor*> by_name;
    for (const auto& tensor : file.tensors) by_name[tensor.name] = &tensor;
    const int c1 = m.cfg.conv_channels1, c2 = m.cfg.conv_channels2;
    const int flat = m.cfg.scales * m.cfg.context * c2;
    m.c1_w = param_from(by_name, "conv1.w", {3, 3, m.depth, c1});
    m.c1_b = param_from(by_name, "conv1.b", {c1});
    m.c2_w = param_from(by_name, "conv2.w", {3, 3, c1, c2});
    m.c2_b = param_from(by_name, "conv2.b", {c2});
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

}  // namespace wdf::baselines
