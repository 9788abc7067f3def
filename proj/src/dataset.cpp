#include "aeq/dataset.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include "aeq/errors.hpp"

namespace aeq {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                      std::istreambuf_iterator<char>());
}

std::uint32_t read_u32_be(const std::vector<unsigned char>& buf, std::size_t offset) {
    if (offset + 4 > buf.size()) {
        throw ParseError("file truncated while reading a header field", offset);
    }
    return (static_cast<std::uint32_t>(buf[offset]) << 24) |
           (static_cast<std::uint32_t>(buf[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(buf[offset + 2]) << 8) |
           static_cast<std::uint32_t>(buf[offset + 3]);
}

void write_u32_be(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

}  // namespace

LabeledDataset read_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path) {
    const auto ibuf = read_file(images_path);
    if (read_u32_be(ibuf, 0) != kImagesMagic) {
        throw ParseError("wrong magic for images (expected 0x00000803)", 0);
    }
    const std::uint64_t count = read_u32_be(ibuf, 4);
    const std::uint64_t rows = read_u32_be(ibuf, 8);
    const std::uint64_t cols = read_u32_be(ibuf, 12);
    if (rows == 0 || cols == 0 || rows != cols) {
        throw ParseError("images must be square and non-empty", 8);
    }
    if (rows > 4096 || count > (1ull << 32)) {
        throw ParseError("image dimensions overflow sane bounds", 4);
    }
    const std::uint64_t pixel_bytes = count * rows * cols;
    if (16 + pixel_bytes != ibuf.size()) {
        throw ParseError("images payload has " + std::to_string(ibuf.size() - 16) +
                             " bytes, header implies " + std::to_string(pixel_bytes),
                         16);
    }

    const auto lbuf = read_file(labels_path);
    if (read_u32_be(lbuf, 0) != kLabelsMagic) {
        throw ParseError("wrong magic for labels (expected 0x00000801)", 0);
    }
    const std::uint64_t label_count = read_u32_be(lbuf, 4);
    if (label_count != count) {
        throw ParseError("label count " + std::to_string(label_count) +
                             " does not match image count " + std::to_string(count),
                         4);
    }
    if (8 + label_count != lbuf.size()) {
        throw ParseError("labels payload has " + std::to_string(lbuf.size() - 8) +
                             " bytes, header implies " + std::to_string(label_count),
                         8);
    }

    LabeledDataset data;
    data.side = rows;
    data.images.resize(count);
    data.labels.assign(lbuf.begin() + 8, lbuf.end());
    const std::size_t pixels = rows * cols;
    for (std::size_t i = 0; i < count; ++i) {
        auto& img = data.images[i];
        img.resize(pixels);
        const unsigned char* src = ibuf.data() + 16 + i * pixels;
        for (std::size_t p = 0; p < pixels; ++p) {
            img[p] = static_cast<double>(src[p]) / 255.0;
        }
    }
    return data;
}

void write_idx(const LabeledDataset& data, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path) {
    if (data.images.size() != data.labels.size()) {
        throw ValidationError("dataset has mismatched image/label counts");
    }
    const std::size_t pixels = data.side * data.side;

    std::ofstream iout(images_path, std::ios::binary);
    if (!iout) throw Error("cannot write images file: " + images_path.string());
    write_u32_be(iout, kImagesMagic);
    write_u32_be(iout, static_cast<std::uint32_t>(data.images.size()));
    write_u32_be(iout, static_cast<std::uint32_t>(data.side));
    write_u32_be(iout, static_cast<std::uint32_t>(data.side));
    std::vector<unsigned char> row(pixels);
    for (const auto& img : data.images) {
        if (img.size() != pixels) {
            throw ValidationError("image length does not match the dataset side");
        }
        for (std::size_t p = 0; p < pixels; ++p) {
            const double v = img[p] * 255.0;
            row[p] = static_cast<unsigned char>(std::lround(std::min(255.0, std::max(0.0, v))));
        }
        iout.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(pixels));
    }
    if (!iout) throw Error("failed writing images file: " + images_path.string());

    std::ofstream lout(labels_path, std::ios::binary);
    if (!lout) throw Error("cannot write labels file: " + labels_path.string());
    write_u32_be(lout, kLabelsMagic);
    write_u32_be(lout, static_cast<std::uint32_t>(data.labels.size()));
    lout.write(reinterpret_cast<const char*>(data.labels.data()),
               static_cast<std::streamsize>(data.labels.size()));
    if (!lout) throw Error("failed writing labels file: " + labels_path.string());
}

LabeledDataset augment(const LabeledDataset& data, const AugmentationArray& aug,
                       std::uint64_t seed, std::vector<AppliedTransform>* log,
                       std::size_t workers) {
    for (const TransformGroup& g : aug.groups) {
        if (g.action.domain_size() != data.side * data.side) {
            throw ConfigError("transform group '" + g.name + "' does not match the image grid");
        }
    }

    LabeledDataset out;
    out.side = data.side;
    out.labels = data.labels;
    out.images.resize(data.size());
    if (log) log->assign(data.size(), AppliedTransform{});

    auto process = [&](std::size_t i) {
        if (aug.groups.empty()) {
            out.images[i] = data.images[i];
            return;
        }
        std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(i));
        std::uniform_int_distribution<std::size_t> pick_group(0, aug.groups.size() - 1);
        const std::size_t gi = pick_group(rng);
        const TransformGroup& tg = aug.groups[gi];
        std::uniform_int_distribution<std::size_t> pick_elem(0, tg.order() - 1);
        const std::size_t ei = pick_elem(rng);
        out.images[i] = apply_transform(tg.action.perm(ei), data.images[i]);
        if (log) {
            (*log)[i] = AppliedTransform{static_cast<std::uint32_t>(gi),
                                         static_cast<std::uint32_t>(ei)};
        }
    };

    if (workers <= 1 || data.size() < 2) {
        for (std::size_t i = 0; i < data.size(); ++i) process(i);
    } else {
        const std::size_t n_threads = std::min(workers, data.size());
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = t; i < data.size(); i += n_threads) process(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

LabeledDataset subsample(const LabeledDataset& data, std::size_t n, std::uint64_t seed) {
    if (n > data.size()) {
        throw ConfigError("cannot subsample " + std::to_string(n) + " items from " +
                          std::to_string(data.size()));
    }
    std::vector<std::size_t> indices(data.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates: the first n slots become the sample.
    for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, indices.size() - 1);
        std::swap(indices[i], indices[pick(rng)]);
    }

    LabeledDataset out;
    out.side = data.side;
    out.images.reserve(n);
    out.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.images.push_back(data.images[indices[i]]);
        out.labels.push_back(data.labels[indices[i]]);
    }
    return out;
}

}  // namespace aeq
