#include "wdf/wavelets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wdf/errors.hpp"
#include "wdf/log.hpp"

namespace wdf::wavelets {

namespace {

// Probabilists' Hermite polynomial He_n(t).
double hermite(int n, double t) {
    double h0 = 1.0, h1 = t;
    if (n == 0) return h0;
    for (int k = 1; k < n; ++k) {
        const double h2 = t * h1 - k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

// n-th derivative of exp(-t^2/2), via d^n/dt^n e^{-t^2/2} = (-1)^n He_n(t) e^{-t^2/2}.
double gauss_derivative(int n, double t) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return sign * hermite(n, t) * std::exp(-0.5 * t * t);
}

constexpr double kMorletOmega = 5.0;

// cos(w0 t) e^{-t^2/2} minus the correction that zeroes the mean exactly.
double morlet_real_raw(double t) {
    return (std::cos(kMorletOmega * t) - std::exp(-0.5 * kMorletOmega * kMorletOmega)) *
           std::exp(-0.5 * t * t);
}

double mexican_hat_raw(double t) { return (1.0 - t * t) * std::exp(-0.5 * t * t); }

// Unit-L2 normalization constant, computed once per wavelet by Simpson
// quadrature of the raw waveform's squared integral over [-10, 10].
double l2_norm(const std::function<double(double)>& raw) {
    const double lo = -10.0, hi = 10.0;
    const int n = 200000;  // even
    const double dt = (hi - lo) / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t = lo + i * dt;
        const double v = raw(t) * raw(t);
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += w * v;
    }
    return std::sqrt(sum * dt / 3.0);
}

std::vector<MotherWavelet> build_registry() {
    std::vector<MotherWavelet> reg;
    for (int n = 1; n <= 8; ++n) {
        auto raw = [n](double t) { return gauss_derivative(n, t); };
        const double norm = l2_norm(raw);
        reg.push_back({"gaus" + std::to_string(n),
                       [n, norm](double t) { return gauss_derivative(n, t) / norm; }, 8.0});
    }
    {
        const double norm = l2_norm(mexican_hat_raw);
        reg.push_back({"mexican_hat", [norm](double t) { return mexican_hat_raw(t) / norm; }, 8.0});
    }
    {
        const double norm = l2_norm(morlet_real_raw);
        reg.push_back({"morlet_real", [norm](double t) { return morlet_real_raw(t) / norm; }, 8.0});
    }
    return reg;
}

}  // namespace

const std::vector<MotherWavelet>& wavelet_registry() {
    static const std::vector<MotherWavelet> reg = build_registry();
    return reg;
}

const MotherWavelet& get_wavelet(const std::string& name) {
    for (const auto& w : wavelet_registry()) {
        if (w.name == name) return w;
    }
    throw InvalidArgumentError("unknown mother wavelet '" + name + "'");
}

std::vector<std::string> wavelet_names() {
    std::vector<std::string> names;
    for (const auto& w : wavelet_registry()) names.push_back(w.name);
    return names;
}

double eval_wavelet(const std::string& name, double t) { return get_wavelet(name).psi(t); }

Scalogram cwt(const std::vector<double>& signal, const std::vector<int>& scales,
              const MotherWavelet& wavelet) {
    if (signal.empty()) throw InvalidArgumentError("cwt: empty signal");
    if (scales.empty()) throw InvalidArgumentError("cwt: no scales");
    for (int a : scales) {
        if (a < 1) throw InvalidArgumentError("cwt: scales must be >= 1");
    }
    const int n = static_cast<int>(signal.size());
    const int a_max = *std::max_element(scales.begin(), scales.end());
    const int pad = static_cast<int>(std::ceil(wavelet.support * a_max));

    // Symmetric reflection with repeated folding (period 2n): index -1
    // mirrors to 0, n mirrors to n-1, and pads wider than the signal keep
    // bouncing between the edges.
    std::vector<double> padded(static_cast<std::size_t>(n + 2 * pad));
    const int period = 2 * n;
    for (int t = -pad; t < n + pad; ++t) {
        int src = ((t % period) + period) % period;
        if (src >= n) src = period - 1 - src;
        padded[static_cast<std::size_t>(t + pad)] = signal[static_cast<std::size_t>(src)];
    }

    Scalogram scal;
    scal.scales = static_cast<int>(scales.size());
    scal.times = n;
    scal.coeffs.assign(static_cast<std::size_t>(scal.scales) * n, 0.0);
    for (std::size_t row = 0; row < scales.size(); ++row) {
        const int a = scales[row];
        const double inv_sqrt_a = 1.0 / std::sqrt(static_cast<double>(a));
        for (int b = 0; b < n; ++b) {
            double acc = 0.0;
            for (int t = -pad; t < n + pad; ++t) {
                acc += padded[static_cast<std::size_t>(t + pad)] *
                       wavelet.psi(static_cast<double>(t - b) / a);
            }
            scal.coeffs[row * static_cast<std::size_t>(n) + b] = inv_sqrt_a * acc;
        }
    }
    return scal;
}

ScalogramStack scalogram_stack(const std::vector<std::vector<double>>& features,
                               const std::vector<std::string>& feature_names,
                               const MotherWavelet& wavelet, int s, int h) {
    if (features.empty()) throw InvalidArgumentError("scalogram_stack: no features");
    if (features.size() != feature_names.size()) {
        throw InvalidArgumentError("scalogram_stack: feature/name count mismatch");
    }
    const std::size_t len = features.front().size();
    if (len < static_cast<std::size_t>(h)) {
        throw InvalidArgumentError("scalogram_stack: features shorter than " + std::to_string(h));
    }
    std::vector<int> scales(static_cast<std::size_t>(s));
    for (int a = 0; a < s; ++a) scales[a] = a + 1;

    ScalogramStack stack;
    stack.scales = s;
    stack.times = h;
    stack.feature_names = feature_names;
    stack.tensor.assign(features.size() * static_cast<std::size_t>(s) * h, 0.0);
    for (std::size_t f = 0; f < features.size(); ++f) {
        if (features[f].size() != len) {
            throw InvalidArgumentError("scalogram_stack: feature '" + feature_names[f] +
                                       "' length differs");
        }
        const Scalogram scal = cwt(features[f], scales, wavelet);
        const int offset = static_cast<int>(len) - h;  // keep the final h columns
        for (int a = 0; a < s; ++a) {
            for (int b = 0; b < h; ++b) {
                stack.tensor[(f * s + a) * static_cast<std::size_t>(h) + b] = scal.at(a, offset + b);
            }
        }
    }
    return stack;
}

double entropy_energy_ratio(const Scalogram& scal) {
    double energy = 0.0;
    for (double c : scal.coeffs) energy += c * c;
    if (energy <= 0.0) {
        throw UndefinedMetricError("entropy_energy_ratio: all-zero scalogram");
    }
    double entropy = 0.0;
    for (double c : scal.coeffs) {
        const double p = c * c / energy;
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return entropy / energy;
}

std::string select_wavelet(const std::vector<std::string>& candidates,
                           const std::vector<std::vector<double>>& windows, int scales,
                           bool minimize) {
    if (candidates.empty()) throw InvalidArgumentError("select_wavelet: no candidates");
    if (windows.empty()) throw InvalidArgumentError("select_wavelet: no windows");
    std::vector<int> scale_list(static_cast<std::size_t>(scales));
    for (int a = 0; a < scales; ++a) scale_list[a] = a + 1;

    std::size_t best_idx = 0;
    double best_score = minimize ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
    bool any_scored = false;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const MotherWavelet& w = get_wavelet(candidates[c]);
        double sum = 0.0;
        int used = 0;
        for (const auto& window : windows) {
            const Scalogram scal = cwt(window, scale_list, w);
            try {
                sum += entropy_energy_ratio(scal);
                ++used;
            } catch (const UndefinedMetricError&) {
                // degenerate window; skip
            }
        }
        if (used == 0) continue;
        const double score = sum / used;
        log::info("wavelet '" + candidates[c] + "': mean entropy/energy " + std::to_string(score) +
                  " over " + std::to_string(used) + " window(s)");
        const bool better = minimize ? score < best_score : score > best_score;
        if (!any_scored || better) {
            best_idx = c;
            best_score = score;
            any_scored = true;
        }
    }
    if (!any_scored) {
        throw UndefinedMetricError("select_wavelet: every window was degenerate");
    }
    log::info("selected mother wavelet '" + candidates[best_idx] + "'");
    return candidates[best_idx];
}

}  // namespace wdf::wavelets
