#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wdf::weights {

struct NamedTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<float> data;
};

// Versioned binary container for model weights. Files are machine-local
// artifacts (native endianness); the tag identifies the model family and the
// meta vector carries its architecture integers so a file is self-describing.
struct WeightFile {
    std::string model_tag;
    std::uint64_t config_hash = 0;
    std::vector<std::int64_t> meta;
    std::vector<NamedTensor> tensors;
};

inline constexpr std::uint32_t kWeightFormatVersion = 1;

void save_weights(const std::string& path, const WeightFile& file);

// Throws ParseError on a malformed file or an unsupported format version.
WeightFile load_weights(const std::string& path);

}  // namespace wdf::weights
