#pragma once

#include <functional>
#include <string>
#include <vector>

namespace wdf::wavelets {

// A real-valued mother wavelet, unit L2 norm, (numerically) zero mean.
// `support` is the effective half-width: |psi(t)| is negligible beyond it.
struct MotherWavelet {
    std::string name;
    std::function<double(double)> psi;
    double support = 8.0;
};

// Registry order: gaus1..gaus8, mexican_hat, morlet_real.
const std::vector<MotherWavelet>& wavelet_registry();
const MotherWavelet& get_wavelet(const std::string& name);
std::vector<std::string> wavelet_names();
double eval_wavelet(const std::string& name, double t);

// Production default when selection is skipped.
inline constexpr const char* kDefaultWavelet = "gaus4";

struct Scalogram {
    int scales = 0;  // rows: dilation a = 1..scales
    int times = 0;   // columns: integer shifts b
    std::vector<double> coeffs;  // row-major scales x times

    double at(int scale_row, int b) const {
        return coeffs[static_cast<std::size_t>(scale_row) * times + b];
    }
};

// W(a,b) = a^{-1/2} * sum_t x[t] * psi((t-b)/a), at unit hourly steps and
// integer b over the signal extent. The signal is extended on both sides by
// symmetric reflection (pad k = ceil(support * a_max)) before summation.
Scalogram cwt(const std::vector<double>& signal, const std::vector<int>& scales,
              const MotherWavelet& wavelet);

// Per-feature scalograms over scales 1..s, cropped to the final h time
// columns and stacked along depth. Layout: tensor[(f*s + a)*h + b].
struct ScalogramStack {
    int scales = 0;
    int times = 0;
    std::vector<std::string> feature_names;
    std::vector<double> tensor;

    int depth() const { return static_cast<int>(feature_names.size()); }
    double at(int feature, int scale_row, int b) const {
        return tensor[(static_cast<std::size_t>(feature) * scales + scale_row) * times + b];
    }
};

ScalogramStack scalogram_stack(const std::vector<std::vector<double>>& features,
                               const std::vector<std::string>& feature_names,
                               const MotherWavelet& wavelet, int s = 24, int h = 24);

// E = sum c^2, p_ij = c_ij^2/E, H = -sum p ln p; returns H/E.
// Throws UndefinedMetricError on an all-zero scalogram.
double entropy_energy_ratio(const Scalogram& scal);

// Candidate with the best (by default: lowest) mean entropy-to-energy ratio
// across the windows; ties keep the earlier candidate. All-zero windows are
// skipped; if every window is degenerate an UndefinedMetricError propagates.
std::string select_wavelet(const std::vector<std::string>& candidates,
                           const std::vector<std::vector<double>>& windows, int scales = 24,
                           bool minimize = true);

}  // namespace wdf::wavelets
