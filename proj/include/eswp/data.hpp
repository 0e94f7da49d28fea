#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <utility>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eswp/rng.hpp"

namespace eswp {

// Samples with stable integer identities: ids are always 0..n-1 and the
// id <-> sample association never changes under shuffled presentation.
// `source_ids` keeps the mapping back to the parent dataset after split().
struct IndexedDataset {
    std::string name;
    std::size_t n = 0;
    std::size_t dim = 0;
    std::size_t classes = 0;
    std::vector<double> features;  // n x dim, row-major
    std::vector<int> labels;
    std::vector<std::size_t> ids;
    std::vector<std::size_t> source_ids;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw FormatError("truncated IDX file while reading " + what);
    }
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline void write_be32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace detail

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// IDX (MNIST-style) loader. Images: magic 0x00000803, count, rows, cols as
// big-endian 32-bit integers, then unsigned bytes row-major; labels: magic
// 0x00000801, count, bytes. Pixels are scaled to [0,1] by /255 and rows
// flattened to dim = rows * cols.
inline IndexedDataset load_idx(const std::string& images_path, const std::string& labels_path,
                               std::optional<std::size_t> limit = std::nullopt) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("cannot open images file: " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError("cannot open labels file: " + labels_path);

    const std::uint32_t img_magic = detail::read_be32(img, "images magic");
    if (img_magic != kIdxImagesMagic) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "0x%08x", img_magic);
        throw FormatError(std::string("bad images magic ") + buf + " in " + images_path);
    }
    const std::uint32_t lab_magic = detail::read_be32(lab, "labels magic");
    if (lab_magic != kIdxLabelsMagic) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "0x%08x", lab_magic);
        throw FormatError(std::string("bad labels magic ") + buf + " in " + labels_path);
    }

    const std::uint32_t img_count = detail::read_be32(img, "image count");
    const std::uint32_t rows = detail::read_be32(img, "row count");
    const std::uint32_t cols = detail::read_be32(img, "column count");
    const std::uint32_t lab_count = detail::read_be32(lab, "label count");
    if (img_count != lab_count) {
        throw FormatError("image/label count mismatch: " + std::to_string(img_count) + " vs " +
                          std::to_string(lab_count));
    }

    std::size_t n = img_count;
    if (limit && *limit < n) n = *limit;
    const std::size_t dim = std::size_t(rows) * cols;

    IndexedDataset ds;
    ds.name = images_path;
    ds.n = n;
    ds.dim = dim;
    ds.features.resize(n * dim);
    ds.labels.resize(n);

    std::vector<unsigned char> row(dim);
    for (std::size_t i = 0; i < n; ++i) {
        if (!img.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(dim))) {
            throw FormatError("truncated images file at sample " + std::to_string(i));
        }
        for (std::size_t j = 0; j < dim; ++j) {
            ds.features[i * dim + j] = row[j] / 255.0;
        }
        unsigned char y;
        if (!lab.read(reinterpret_cast<char*>(&y), 1)) {
            throw FormatError("truncated labels file at sample " + std::to_string(i));
        }
        ds.labels[i] = y;
    }
    int max_label = 0;
    for (int y : ds.labels) max_label = std::max(max_label, y);
    ds.classes = static_cast<std::size_t>(max_label) + 1;
    ds.ids.resize(n);
    std::iota(ds.ids.begin(), ds.ids.end(), 0);
    ds.source_ids = ds.ids;
    return ds;
}

// Writes a dataset as an IDX pair with dim packed as (dim x 1) images.
// Features are quantized to the byte grid, so a round trip reproduces
// values on the 1/255 grid exactly.
inline void write_idx(const IndexedDataset& ds, const std::string& images_path,
                      const std::string& labels_path) {
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("cannot write images file: " + images_path);
    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError("cannot write labels file: " + labels_path);
    detail::write_be32(img, kIdxImagesMagic);
    detail::write_be32(img, static_cast<std::uint32_t>(ds.n));
    detail::write_be32(img, static_cast<std::uint32_t>(ds.dim));
    detail::write_be32(img, 1);
    detail::write_be32(lab, kIdxLabelsMagic);
    detail::write_be32(lab, static_cast<std::uint32_t>(ds.n));
    std::vector<unsigned char> row(ds.dim);
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t j = 0; j < ds.dim; ++j) {
            const double v = std::clamp(ds.features[i * ds.dim + j], 0.0, 1.0);
            row[j] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        img.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(ds.dim));
        const unsigned char y = static_cast<unsigned char>(ds.labels[i]);
        lab.write(reinterpret_cast<const char*>(&y), 1);
    }
}

// Seeded isotropic Gaussian mixture: class means drawn once at radius
// `separation` from the origin, unit-variance noise, labels balanced
// round-robin (counts within +-1 of each other).
inline IndexedDataset gen_gaussian_mixture(std::size_t n, std::size_t d, std::size_t classes,
                                           double separation, std::uint64_t seed) {
    if (classes < 2 || n < classes || d == 0) {
        throw std::invalid_argument("gen_gaussian_mixture: need n >= classes >= 2 and d >= 1");
    }
    if (!(separation >= 0.0)) {
        throw std::invalid_argument("gen_gaussian_mixture: separation must be non-negative");
    }
    Rng rng = Rng::derive(seed, 0xda7a);

    std::vector<double> means(classes * d);
    for (std::size_t c = 0; c < classes; ++c) {
        double norm2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            means[c * d + j] = rng.normal();
            norm2 += means[c * d + j] * means[c * d + j];
        }
        const double scale = norm2 > 0.0 ? separation / std::sqrt(norm2) : 0.0;
        for (std::size_t j = 0; j < d; ++j) means[c * d + j] *= scale;
    }

    IndexedDataset ds;
    ds.name = "gaussian_mixture";
    ds.n = n;
    ds.dim = d;
    ds.classes = classes;
    ds.features.resize(n * d);
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % classes;
        ds.labels[i] = static_cast<int>(c);
        for (std::size_t j = 0; j < d; ++j) {
            ds.features[i * d + j] = means[c * d + j] + rng.normal();
        }
    }
    ds.ids.resize(n);
    std::iota(ds.ids.begin(), ds.ids.end(), 0);
    ds.source_ids = ds.ids;
    return ds;
}

// Seeded shuffle, then disjoint exhaustive split. Both halves are
// re-indexed 0..k-1; source_ids maps back to the parent dataset.
inline std::pair<IndexedDataset, IndexedDataset> split(const IndexedDataset& ds,
                                                       double test_fraction,
                                                       std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("split: test_fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> perm(ds.n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = Rng::derive(seed, 0x5911);
    for (std::size_t i = ds.n; i > 1; --i) {  // Fisher-Yates
        std::swap(perm[i - 1], perm[rng.below(i)]);
    }
    const std::size_t n_test = static_cast<std::size_t>(
        std::floor(test_fraction * static_cast<double>(ds.n)));
    const std::size_t n_train = ds.n - n_test;

    auto take = [&](std::size_t begin, std::size_t count, const std::string& suffix) {
        IndexedDataset out;
        out.name = ds.name + suffix;
        out.n = count;
        out.dim = ds.dim;
        out.classes = ds.classes;
        out.features.resize(count * ds.dim);
        out.labels.resize(count);
        out.source_ids.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t src = perm[begin + i];
            std::copy_n(ds.features.begin() + static_cast<std::ptrdiff_t>(src * ds.dim), ds.dim,
                        out.features.begin() + static_cast<std::ptrdiff_t>(i * ds.dim));
            out.labels[i] = ds.labels[src];
            out.source_ids[i] = ds.source_ids[src];
        }
        out.ids.resize(count);
        std::iota(out.ids.begin(), out.ids.end(), 0);
        return out;
    };
    return {take(0, n_train, "/train"), take(n_train, n_test, "/test")};
}

}  // namespace eswp
