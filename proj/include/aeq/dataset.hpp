#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "aeq/transforms.hpp"

namespace aeq {

/// Labeled square grayscale images. Pixels are u8 on disk and double in
/// [0, 1] in memory (divided by 255).
struct LabeledDataset {
    std::size_t side = 0;
    std::vector<std::vector<double>> images;
    std::vector<std::uint8_t> labels;

    std::size_t size() const { return images.size(); }
};

/// IDX container pair: images file magic 0x00000803 (u8, 3 dims), labels
/// file magic 0x00000801; all header fields big-endian u32. Malformed input
/// raises ParseError with the offending byte offset. Only square images are
/// accepted.
LabeledDataset read_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path);

void write_idx(const LabeledDataset& data, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path);

/// The menu of groups an augmentation draws from; empty means identity
/// (every image passes through unchanged).
struct AugmentationArray {
    std::vector<TransformGroup> groups;
};

/// Which transform was applied to one sample, for reproducibility and
/// inversion.
struct AppliedTransform {
    std::uint32_t group_index = 0;
    std::uint32_t element_index = 0;
};

/// Per sample: one group uniform, then one element uniform, using an rng
/// seeded with (seed ^ sample index) so results are order-independent.
/// Labels and dataset size never change.
LabeledDataset augment(const LabeledDataset& data, const AugmentationArray& aug,
                       std::uint64_t seed, std::vector<AppliedTransform>* log = nullptr,
                       std::size_t workers = 1);

/// Seeded uniform sample of n items without replacement; image/label pairs
/// stay aligned.
LabeledDataset subsample(const LabeledDataset& data, std::size_t n, std::uint64_t seed);

}  // namespace aeq
