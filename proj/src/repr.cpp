#include "wdf/repr.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "wdf/errors.hpp"
#include "wdf/log.hpp"
#include "wdf/weights_io.hpp"

namespace wdf::repr {

namespace {

// meter ids in first-appearance order plus their sample indices
struct MeterIndex {
    std::vector<std::string> order;
    std::vector<std::vector<int>> windows;  // per meter, indices into samples
};

MeterIndex group_by_meter(const std::vector<profiles::ProfileSample>& samples) {
    MeterIndex idx;
    std::unordered_map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto [it, fresh] = slot.try_emplace(samples[i].meter_id, idx.order.size());
        if (fresh) {
            idx.order.push_back(samples[i].meter_id);
            idx.windows.emplace_back();
        }
        idx.windows[it->second].push_back(static_cast<int>(i));
    }
    return idx;
}

nn::Tensor<float> view_tensor(const profiles::CropView& view) {
    nn::Tensor<float> t({view.size(), 2});
    for (int r = 0; r < view.size(); ++r) {
        t(r, 0) = static_cast<float>(view.at(r, 0));
        t(r, 1) = static_cast<float>(view.at(r, 1));
    }
    return t;
}

nn::Tensor<float> stack_views(const std::vector<nn::Tensor<float>>& views,
                              const std::vector<int>& picks) {
    const int rows = views[picks[0]].dim(0);
    nn::Tensor<float> out({static_cast<int>(picks.size()), rows, 2});
    for (std::size_t b = 0; b < picks.size(); ++b) {
        std::copy(views[picks[b]].data.begin(), views[picks[b]].data.end(),
                  out.data.begin() + static_cast<long long>(b) * rows * 2);
    }
    return out;
}

std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::vector<std::vector<int>> sample_batches(const std::vector<profiles::ProfileSample>& samples,
                                             int batch_size, std::uint64_t seed) {
    if (batch_size < 1) throw InvalidArgumentError("sample_batches: batch_size must be >= 1");
    const MeterIndex idx = group_by_meter(samples);
    const int n_meters = static_cast<int>(idx.order.size());
    if (n_meters < 2) {
        throw InvalidArgumentError("sample_batches: need samples from at least 2 meters");
    }

    Rng rng(seed);
    std::vector<std::vector<int>> queues = idx.windows;
    for (auto& q : queues) rng.shuffle(q);
    std::vector<std::size_t> cursor(queues.size(), 0);

    const int quota = std::min(batch_size, n_meters);
    std::vector<std::vector<int>> batches;
    while (true) {
        std::vector<int> available;
        for (int m = 0; m < n_meters; ++m) {
            if (cursor[m] < queues[m].size()) available.push_back(m);
        }
        if (static_cast<int>(available.size()) < quota) break;
        rng.shuffle(available);
        std::vector<int> batch;
        batch.reserve(quota);
        for (int j = 0; j < quota; ++j) {
            const int m = available[j];
            batch.push_back(queues[m][cursor[m]++]);
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

TrainResult train_encoder(const std::vector<profiles::ProfileSample>& samples,
                          const EncoderConfig& encoder_config,
                          const ContrastConfig& contrast_config, std::uint64_t seed) {
    if (!(contrast_config.alpha >= 0.0 && contrast_config.alpha <= 1.0)) {
        throw InvalidArgumentError("train_encoder: alpha must be in [0,1]");
    }
    if (contrast_config.batch_size < 2) {
        throw InvalidArgumentError("train_encoder: instance contrast needs batches of 2+ meters");
    }
    const MeterIndex idx = group_by_meter(samples);
    if (idx.order.size() < 2) {
        throw InvalidArgumentError("train_encoder: need at least 2 meters");
    }

    // Views are fixed per sample; cut and convert them once.
    std::vector<nn::Tensor<float>> views_a, views_b;
    views_a.reserve(samples.size());
    views_b.reserve(samples.size());
    int overlap_begin_a = 0, overlap_begin_b = 0, overlap_len = 0;
    for (const auto& s : samples) {
        const profiles::CropPair pair = profiles::crop_views(s);
        views_a.push_back(view_tensor(pair.view_a));
        views_b.push_back(view_tensor(pair.view_b));
        overlap_begin_a = pair.overlap_begin - pair.view_a.offset;
        overlap_begin_b = pair.overlap_begin - pair.view_b.offset;
        overlap_len = pair.overlap_end - pair.overlap_begin;
    }

    Rng init_rng(Rng::mix(seed, 1));
    TrainResult result;
    result.encoder = Encoder<float>::init(encoder_config, init_rng);
    nn::Adam<float> adam(result.encoder.parameters(),
                         static_cast<float>(contrast_config.learning_rate));
    Rng mask_rng(Rng::mix(seed, 2));
    const float alpha = static_cast<float>(contrast_config.alpha);

    double best = std::numeric_limits<double>::infinity();
    int stall = 0;
    for (int epoch = 0; epoch < contrast_config.max_epochs; ++epoch) {
        const auto batches = sample_batches(samples, contrast_config.batch_size,
                                            Rng::mix(seed, 0x300u + static_cast<unsigned>(epoch)));
        double epoch_loss = 0.0;
        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            const auto x_a = stack_views(views_a, batches[bi]);
            const auto x_b = stack_views(views_b, batches[bi]);
            auto z_a = result.encoder.forward(x_a, /*train=*/true, &mask_rng);
            auto z_b = result.encoder.forward(x_b, /*train=*/true, &mask_rng);
            auto za_overlap = nn::slice_time(z_a, overlap_begin_a, overlap_begin_a + overlap_len);
            auto zb_overlap = nn::slice_time(z_b, overlap_begin_b, overlap_begin_b + overlap_len);
            auto loss = hierarchical_contrastive_loss(za_overlap, zb_overlap, alpha);
            const double lv = static_cast<double>(loss->value(0));
            if (!std::isfinite(lv)) {
                throw TrainingDivergedError("contrastive loss became non-finite at epoch " +
                                            std::to_string(epoch + 1) + ", batch " +
                                            std::to_string(bi + 1));
            }
            epoch_loss += lv;
            adam.zero_grad();
            nn::backward(loss);
            adam.step();
        }
        epoch_loss /= static_cast<double>(batches.size());
        result.loss_history.push_back(epoch_loss);
        result.epochs_run = epoch + 1;

        if (best - epoch_loss >= contrast_config.min_improvement) {
            stall = 0;
        } else {
            ++stall;
        }
        best = std::min(best, epoch_loss);
        if (stall >= contrast_config.patience) {
            log::info("encoder training stopped early after " + std::to_string(epoch + 1) +
                      " epochs (mean loss " + std::to_string(epoch_loss) + ")");
            break;
        }
    }
    return result;
}

std::vector<MeterEmbedding> embed_all(const std::vector<profiles::ProfileSample>& samples,
                                      const Encoder<float>& encoder) {
    const MeterIndex idx = group_by_meter(samples);
    std::vector<MeterEmbedding> out;
    out.reserve(idx.order.size());
    for (std::size_t m = 0; m < idx.order.size(); ++m) {
        const auto& windows = idx.windows[m];
        nn::Tensor<float> x({static_cast<int>(windows.size()), profiles::ProfileSample::rows,
                             profiles::ProfileSample::cols});
        for (std::size_t w = 0; w < windows.size(); ++w) {
            const auto& s = samples[windows[w]];
            for (int r = 0; r < profiles::ProfileSample::rows; ++r) {
                x(static_cast<int>(w), r, 0) = static_cast<float>(s.at(r, 0));
                x(static_cast<int>(w), r, 1) = static_cast<float>(s.at(r, 1));
            }
        }
        auto z = encoder.forward(x, /*train=*/false, nullptr);
        auto pooled = nn::max_over_time(z);  // [W, output_dim]
        MeterEmbedding e;
        e.meter_id = idx.order[m];
        e.vec.assign(encoder.cfg.output_dim, 0.0);
        for (int w = 0; w < pooled->value.dim(0); ++w) {
            for (int c = 0; c < encoder.cfg.output_dim; ++c) {
                e.vec[c] += static_cast<double>(pooled->value(w, c));
            }
        }
        for (auto& v : e.vec) v /= static_cast<double>(windows.size());
        out.push_back(std::move(e));
    }
    return out;
}

void write_embeddings_csv(const std::string& path, const std::vector<MeterEmbedding>& rows) {
    if (rows.empty()) throw InvalidArgumentError("write_embeddings_csv: no rows");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ParseError("cannot open for writing: " + path);
    const std::size_t dim = rows[0].vec.size();
    out << "meter_id";
    for (std::size_t c = 0; c < dim; ++c) out << ",e" << c;
    out << "\n";
    for (const auto& r : rows) {
        if (r.vec.size() != dim) {
            throw InvalidArgumentError("write_embeddings_csv: ragged embedding dimensions");
        }
        out << r.meter_id;
        for (double v : r.vec) out << "," << format_g17(v);
        out << "\n";
    }
    if (!out) throw ParseError("failed writing: " + path);
}

std::vector<MeterEmbedding> load_embeddings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty embeddings file: " + path);
    std::size_t dim = 0;
    {
        std::stringstream ss(line);
        std::string field;
        if (!std::getline(ss, field, ',') || field != "meter_id") {
            throw ParseError("embeddings header must start with meter_id", 1);
        }
        while (std::getline(ss, field, ',')) {
            if (field != "e" + std::to_string(dim)) {
                throw ParseError("unexpected embeddings column '" + field + "'", 1);
            }
            ++dim;
        }
        if (dim == 0) throw ParseError("embeddings header has no vector columns", 1);
    }
    std::vector<MeterEmbedding> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        MeterEmbedding e;
        if (!std::getline(ss, e.meter_id, ',') || e.meter_id.empty()) {
            throw ParseError("missing meter_id", line_no);
        }
        std::string field;
        while (std::getline(ss, field, ',')) {
            char* end = nullptr;
            const double v = std::strtod(field.c_str(), &end);
            if (end == field.c_str() || *end != '\0') {
                throw ParseError("bad embedding value '" + field + "'", line_no);
            }
            e.vec.push_back(v);
        }
        if (e.vec.size() != dim) throw ParseError("wrong embedding dimension", line_no);
        rows.push_back(std::move(e));
    }
    return rows;
}

namespace {

constexpr const char* kEncoderTag = "contrastive_encoder";

weights::NamedTensor named(const std::string& name, const nn::NodePtr<float>& node) {
    return {name, node->value.shape, node->value.data};
}

nn::NodePtr<float> param_from(const std::unordered_map<std::string, const weights::NamedTensor*>&
                                  by_name,
                              const std::string& name, const std::vector<int>& shape) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw ParseError("encoder weight file is missing tensor " + name);
    if (it->second->shape != shape) {
        throw ParseError("encoder weight tensor " + name + " has the wrong shape");
    }
    return nn::make_param(nn::Tensor<float>(it->second->shape, it->second->data));
}

}  // namespace

void save_encoder(const std::string& path, const Encoder<float>& encoder,
                  std::uint64_t config_hash) {
    weights::WeightFile file;
    file.model_tag = kEncoderTag;
    file.config_hash = config_hash;
    file.meta = {encoder.cfg.input_channels, encoder.cfg.hidden_dim, encoder.cfg.kernel_size,
                 encoder.cfg.blocks, encoder.cfg.output_dim};
    file.tensors.push_back(named("input.w", encoder.w_in));
    file.tensors.push_back(named("input.b", encoder.b_in));
    for (std::size_t j = 0; j < encoder.blocks.size(); ++j) {
        const std::string prefix = "block" + std::to_string(j) + ".";
        file.tensors.push_back(named(prefix + "conv1.w", encoder.blocks[j].w1));
        file.tensors.push_back(named(prefix + "conv1.b", encoder.blocks[j].b1));
        file.tensors.push_back(named(prefix + "conv2.w", encoder.blocks[j].w2));
        file.tensors.push_back(named(prefix + "conv2.b", encoder.blocks[j].b2));
    }
    file.tensors.push_back(named("output.w", encoder.w_out));
    file.tensors.push_back(named("output.b", encoder.b_out));
    weights::save_weights(path, file);
}

Encoder<float> load_encoder(const std::string& path, std::uint64_t* config_hash) {
    const weights::WeightFile file = weights::load_weights(path);
    if (file.model_tag != kEncoderTag) {
        throw ParseError("weight file " + path + " holds a '" + file.model_tag +
                         "' model, not a contrastive encoder");
    }
    if (file.meta.size() != 5) throw ParseError("encoder weight file has malformed meta");
    if (config_hash) *config_hash = file.config_hash;

    EncoderConfig cfg;
    cfg.input_channels = static_cast<int>(file.meta[0]);
    cfg.hidden_dim = static_cast<int>(file.meta[1]);
    cfg.kernel_size = static_cast<int>(file.meta[2]);
    cfg.blocks = static_cast<int>(file.meta[3]);
    cfg.output_dim = static_cast<int>(file.meta[4]);

    std::unordered_map<std::string, const weights::NamedTensor*> by_name;
    for (const auto& t : file.tensors) by_name[t.name] = &t;

    Encoder<float> enc;
    enc.cfg = cfg;
    enc.w_in = param_from(by_name, "input.w", {cfg.input_channels, cfg.hidden_dim});
    enc.b_in = param_from(by_name, "input.b", {cfg.hidden_dim});
    for (int j = 0; j < cfg.blocks; ++j) {
        const std::string prefix = "block" + std::to_string(j) + ".";
        typename Encoder<float>::Block b;
        b.w1 = param_from(by_name, prefix + "conv1.w",
                          {cfg.kernel_size, cfg.hidden_dim, cfg.hidden_dim});
        b.b1 = param_from(by_name, prefix + "conv1.b", {cfg.hidden_dim});
        b.w2 = param_from(by_name, prefix + "conv2.w",
                          {cfg.kernel_size, cfg.hidden_dim, cfg.hidden_dim});
        b.b2 = param_from(by_name, prefix + "conv2.b", {cfg.hidden_dim});
        enc.blocks.push_back(std::move(b));
    }
    enc.w_out = param_from(by_name, "output.w", {cfg.hidden_dim, cfg.output_dim});
    enc.b_out = param_from(by_name, "output.b", {cfg.output_dim});
    return enc;
}

}  // namespace wdf::repr
