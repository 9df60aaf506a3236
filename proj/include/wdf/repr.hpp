#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wdf/nn.hpp"
#include "wdf/profiles.hpp"
#include "wdf/rng.hpp"

// Contrastive representation learning over weekly-profile samples: a dilated
// causal residual encoder, the dual log-softmax hierarchical loss, the
// one-sample-per-meter batch sampler, and the training loop that turns meters
// into 16-dim embeddings.
namespace wdf::repr {

struct EncoderConfig {
    int input_channels = 2;
    int hidden_dim = 64;
    int kernel_size = 3;
    int blocks = 10;
    int output_dim = 16;
};

struct ContrastConfig {
    double alpha = 0.5;  // instance weight; 1-alpha goes to the temporal term
    int batch_size = 64;
    int max_epochs = 200;
    double learning_rate = 0.001;
    double min_improvement = 1e-4;  // early-stop threshold on the epoch mean loss
    int patience = 10;              // epochs without improvement before stopping
};

// Dilated causal conv encoder: per-timestep input projection, `blocks`
// residual blocks (two causal convs each, both at dilation 2^j), per-timestep
// output projection. Train mode zeroes each post-projection timestep with
// probability 0.5.
template <typename T>
struct Encoder {
    EncoderConfig cfg;
    nn::NodePtr<T> w_in, b_in;
    struct Block {
        nn::NodePtr<T> w1, b1, w2, b2;
    };
    std::vector<Block> blocks;
    nn::NodePtr<T> w_out, b_out;

    static Encoder init(const EncoderConfig& cfg, Rng& rng) {
        if (cfg.input_channels < 1 || cfg.hidden_dim < 1 || cfg.kernel_size < 1 ||
            cfg.blocks < 1 || cfg.blocks > 20 || cfg.output_dim < 1) {
            throw InvalidArgumentError("encoder config out of range");
        }
        Encoder e;
        e.cfg = cfg;
        e.w_in = nn::make_param(
            nn::fan_in_init<T>(rng, {cfg.input_channels, cfg.hidden_dim}, cfg.input_channels));
        e.b_in = nn::make_param(nn::fan_in_init<T>(rng, {cfg.hidden_dim}, cfg.input_channels));
        const long long conv_fan = static_cast<long long>(cfg.hidden_dim) * cfg.kernel_size;
        for (int j = 0; j < cfg.blocks; ++j) {
            Block b;
            b.w1 = nn::make_param(nn::fan_in_init<T>(
                rng, {cfg.kernel_size, cfg.hidden_dim, cfg.hidden_dim}, conv_fan));
            b.b1 = nn::make_param(nn::fan_in_init<T>(rng, {cfg.hidden_dim}, conv_fan));
            b.w2 = nn::make_param(nn::fan_in_init<T>(
                rng, {cfg.kernel_size, cfg.hidden_dim, cfg.hidden_dim}, conv_fan));
            b.b2 = nn::make_param(nn::fan_in_init<T>(rng, {cfg.hidden_dim}, conv_fan));
            e.blocks.push_back(std::move(b));
        }
        e.w_out = nn::make_param(
            nn::fan_in_init<T>(rng, {cfg.hidden_dim, cfg.output_dim}, cfg.hidden_dim));
        e.b_out = nn::make_param(nn::fan_in_init<T>(rng, {cfg.output_dim}, cfg.hidden_dim));
        return e;
    }

    std::vector<nn::NodePtr<T>> parameters() const {
        std::vector<nn::NodePtr<T>> p{w_in, b_in};
        for (const auto& b : blocks) {
            p.push_back(b.w1);
            p.push_back(b.b1);
            p.push_back(b.w2);
            p.push_back(b.b2);
        }
        p.push_back(w_out);
        p.push_back(b_out);
        return p;
    }

    // x: [B,T,input_channels] -> [B,T,output_dim]. mask_rng is consumed only
    // in train mode, one draw per (batch row, timestep) in flat order.
    nn::NodePtr<T> forward(const nn::Tensor<T>& x, bool train_mode, Rng* mask_rng) const {
        if (x.ndim() != 3 || x.dim(2) != cfg.input_channels) {
            throw InvalidArgumentError("encoder forward: need [B,T,input_channels]");
        }
        if (train_mode && mask_rng == nullptr) {
            throw InvalidArgumentError("encoder forward: train mode needs a mask rng");
        }
        auto h = nn::add_bias(nn::linear(nn::make_const(x), w_in), b_in);
        if (train_mode) {
            nn::Tensor<T> mask({x.dim(0), x.dim(1)});
            for (auto& m : mask.data) m = mask_rng->uniform() < 0.5 ? T(0) : T(1);
            h = nn::mask_timesteps(h, std::move(mask));
        }
        for (int j = 0; j < cfg.blocks; ++j) {
            const int dilation = 1 << j;
            auto c1 = nn::conv1d_causal(nn::gelu(h), blocks[j].w1, blocks[j].b1, dilation);
            auto c2 = nn::conv1d_causal(nn::gelu(c1), blocks[j].w2, blocks[j].b2, dilation);
            h = nn::add(h, c2);
        }
        return nn::add_bias(nn::linear(h, w_out), b_out);
    }
};

namespace detail {

template <typename T>
nn::Tensor<T> off_diagonal_mask(int n) {
    nn::Tensor<T> mask({n, n});
    mask.fill(T(1));
    for (int i = 0; i < n; ++i) mask(i, i) = T(0);
    return mask;
}

}  // namespace detail

// Instance-wise contrast: per timestep, the two views of the same meter are
// positives against the 2B-2 other-view/other-meter vectors at that timestep
// (2B-1 softmax candidates after removing self-similarity).
template <typename T>
nn::NodePtr<T> instance_contrastive_loss(const nn::NodePtr<T>& z1, const nn::NodePtr<T>& z2) {
    if (z1->value.shape != z2->value.shape || z1->value.ndim() != 3) {
        throw InvalidArgumentError("instance_contrastive_loss: need matching [B,T,C] views");
    }
    const int B = z1->value.dim(0), Tn = z1->value.dim(1);
    if (B < 2) {
        throw InvalidArgumentError("instance_contrastive_loss: batch of 1 has no negatives");
    }
    auto z = nn::permute102(nn::concat0(z1, z2));      // [T, 2B, C]
    auto sim = nn::bmm(z, z, /*trans_b=*/true);        // [T, 2B, 2B]
    const auto mask = detail::off_diagonal_mask<T>(2 * B);
    auto ls = nn::log_softmax_lastdim(sim, &mask);
    std::vector<long long> positives;
    positives.reserve(static_cast<std::size_t>(Tn) * 2 * B);
    for (int t = 0; t < Tn; ++t) {
        for (int i = 0; i < B; ++i) {
            positives.push_back((static_cast<long long>(t) * 2 * B + i) * 2 * B + (B + i));
            positives.push_back((static_cast<long long>(t) * 2 * B + B + i) * 2 * B + i);
        }
    }
    return nn::nll_selected(ls, std::move(positives));
}

// Temporal contrast: within one meter, the two views at the same timestep are
// positives against the sequence's other timesteps (2T-1 candidates).
template <typename T>
nn::NodePtr<T> temporal_contrastive_loss(const nn::NodePtr<T>& z1, const nn::NodePtr<T>& z2) {
    if (z1->value.shape != z2->value.shape || z1->value.ndim() != 3) {
        throw InvalidArgumentError("temporal_contrastive_loss: need matching [B,T,C] views");
    }
    const int B = z1->value.dim(0), Tn = z1->value.dim(1);
    auto z = nn::concat1(z1, z2);                      // [B, 2T, C]
    auto sim = nn::bmm(z, z, /*trans_b=*/true);        // [B, 2T, 2T]
    const auto mask = detail::off_diagonal_mask<T>(2 * Tn);
    auto ls = nn::log_softmax_lastdim(sim, &mask);
    std::vector<long long> positives;
    positives.reserve(static_cast<std::size_t>(B) * 2 * Tn);
    for (int b = 0; b < B; ++b) {
        for (int t = 0; t < Tn; ++t) {
            positives.push_back((static_cast<long long>(b) * 2 * Tn + t) * 2 * Tn + (Tn + t));
            positives.push_back((static_cast<long long>(b) * 2 * Tn + Tn + t) * 2 * Tn + t);
        }
    }
    return nn::nll_selected(ls, std::move(positives));
}

// Per level: alpha * instance + (1-alpha) * temporal, levels formed by
// max-pooling (kernel 2) along time until a single step remains; the final
// one-step level keeps only the instance term. The result is the mean over
// levels, so the total is affine in alpha.
template <typename T>
nn::NodePtr<T> hierarchical_contrastive_loss(const nn::NodePtr<T>& z1, const nn::NodePtr<T>& z2,
                                             T alpha) {
    if (z1->value.shape != z2->value.shape || z1->value.ndim() != 3) {
        throw InvalidArgumentError("hierarchical_contrastive_loss: need matching [B,T,C] views");
    }
    if (!(alpha >= T(0) && alpha <= T(1))) {
        throw InvalidArgumentError("hierarchical_contrastive_loss: alpha must be in [0,1]");
    }
    if (z1->value.dim(0) < 2) {
        throw InvalidArgumentError(
            "hierarchical_contrastive_loss: batch of 1 has no instance negatives");
    }
    std::vector<nn::NodePtr<T>> terms;
    std::vector<T> coeffs;
    auto a = z1;
    auto b = z2;
    int levels = 0;
    while (true) {
        if (alpha > T(0)) {
            terms.push_back(instance_contrastive_loss(a, b));
            coeffs.push_back(alpha);
        }
        ++levels;
        if (a->value.dim(1) <= 1) break;
        if (alpha < T(1)) {
            terms.push_back(temporal_contrastive_loss(a, b));
            coeffs.push_back(T(1) - alpha);
        }
        a = nn::maxpool_time2(a);
        b = nn::maxpool_time2(b);
    }
    if (terms.empty()) {
        // alpha == 0 with a single timestep: no contrastable pairs remain.
        return nn::make_const(nn::Tensor<T>({1}));
    }
    for (auto& c : coeffs) c /= static_cast<T>(levels);
    return nn::lincomb(terms, coeffs);
}

// ---- batching, training, embedding -------------------------------------------

// One epoch of batches (indices into `samples`). Every batch holds at most one
// sample per meter; each (meter, window) appears at most once per epoch. The
// quota is min(batch_size, distinct meters); a tail round that cannot fill the
// quota is dropped for the epoch (its samples rotate in on later epochs).
std::vector<std::vector<int>> sample_batches(const std::vector<profiles::ProfileSample>& samples,
                                             int batch_size, std::uint64_t seed);

struct TrainResult {
    Encoder<float> encoder;
    std::vector<double> loss_history;  // per-epoch mean batch loss
    int epochs_run = 0;
};

// ADAM training of the encoder on crop_views pairs under the hierarchical
// loss. Stops early once the epoch mean loss has improved by less than
// min_improvement for `patience` consecutive epochs. Throws
// TrainingDivergedError when the loss turns non-finite.
TrainResult train_encoder(const std::vector<profiles::ProfileSample>& samples,
                          const EncoderConfig& encoder_config,
                          const ContrastConfig& contrast_config, std::uint64_t seed);

struct MeterEmbedding {
    std::string meter_id;
    std::vector<double> vec;  // output_dim entries
};

// Per meter: eval-encode each full 168-row sample, max-pool over time, average
// over the meter's windows. Meter order follows first appearance in `samples`.
std::vector<MeterEmbedding> embed_all(const std::vector<profiles::ProfileSample>& samples,
                                      const Encoder<float>& encoder);

// CSV schema: meter_id,e0..e{dim-1}
void write_embeddings_csv(const std::string& path, const std::vector<MeterEmbedding>& rows);
std::vector<MeterEmbedding> load_embeddings_csv(const std::string& path);

void save_encoder(const std::string& path, const Encoder<float>& encoder,
                  std::uint64_t config_hash = 0);
Encoder<float> load_encoder(const std::string& path, std::uint64_t* config_hash = nullptr);

}  // namespace wdf::repr
