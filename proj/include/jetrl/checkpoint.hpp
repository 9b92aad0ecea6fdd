#pragma once

// Binary checkpoint layout (all integers unsigned 32-bit little-endian, all
// values IEEE-754 binary32 little-endian):
//
//   "JQN1" | version | layer_count | per layer: rows cols W[rows*cols] (row-major) b[cols]
//   optional: "ADM1" | layer_count | t_low t_high | per layer: rows cols mW mb vW vb
//
// rows is the layer's fan-in, cols its fan-out.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "jetrl/errors.hpp"
#include "jetrl/qnet.hpp"

namespace jetrl {

inline constexpr std::array<char, 4> checkpoint_magic{'J', 'Q', 'N', '1'};
inline constexpr std::array<char, 4> adam_magic{'A', 'D', 'M', '1'};
inline constexpr std::uint32_t checkpoint_version = 1;

struct Checkpoint {
    NetworkParams<float> params;
    std::optional<AdamState<float>> adam;
};

namespace detail {

class ByteWriter {
  public:
    void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
        }
    }
    void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
    const std::vector<char>& bytes() const { return bytes_; }

  private:
    std::vector<char> bytes_;
};

class ByteReader {
  public:
    explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

    bool at_end() const { return pos_ == bytes_.size(); }
    std::uint64_t offset() const { return pos_; }

    std::array<char, 4> tag() {
        need(4, "tag");
        std::array<char, 4> t{};
        std::memcpy(t.data(), bytes_.data() + pos_, 4);
        pos_ += 4;
        return t;
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)]))
                 << (8 * i);
        }
        pos_ += 4;
        return v;
    }
    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  private:
    void need(std::size_t n, const char* what) {
        if (bytes_.size() - pos_ < n) {
            throw FormatError(std::string("truncated checkpoint while reading ") + what, pos_);
        }
    }

    std::vector<char> bytes_;
    std::size_t pos_ = 0;
};

inline void write_matrix(ByteWriter& w, const Matrix<float>& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            w.f32(m(r, c));
        }
    }
}

inline void write_vector(ByteWriter& w, const RowVector<float>& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        w.f32(v(i));
    }
}

inline Matrix<float> read_matrix(ByteReader& r, std::uint32_t rows, std::uint32_t cols) {
    Matrix<float> m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
        for (std::uint32_t j = 0; j < cols; ++j) {
            m(i, j) = r.f32("weight");
        }
    }
    return m;
}

inline RowVector<float> read_vector(ByteReader& r, std::uint32_t n) {
    RowVector<float> v(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        v(i) = r.f32("bias");
    }
    return v;
}

inline std::pair<std::uint32_t, std::uint32_t> read_shape(ByteReader& r, std::uint32_t expected_rows) {
    const std::uint64_t at = r.offset();
    const std::uint32_t rows = r.u32("rows");
    const std::uint32_t cols = r.u32("cols");
    if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20)) {
        throw FormatError("invalid layer shape " + std::to_string(rows) + "x" + std::to_string(cols), at);
    }
    if (expected_rows != 0 && rows != expected_rows) {
        throw FormatError("layer fan-in " + std::to_string(rows) + " does not match previous fan-out " +
                              std::to_string(expected_rows),
                          at);
    }
    return {rows, cols};
}

} // namespace detail

inline std::vector<char> encode_checkpoint(const NetworkParams<float>& params, const AdamState<float>* adam = nullptr) {
    detail::ByteWriter w;
    w.raw(checkpoint_magic.data(), 4);
    w.u32(checkpoint_version);
    w.u32(static_cast<std::uint32_t>(params.layers.size()));
    for (const auto& l : params.layers) {
        w.u32(static_cast<std::uint32_t>(l.weight.rows()));
        w.u32(static_cast<std::uint32_t>(l.weight.cols()));
        detail::write_matrix(w, l.weight);
        detail::write_vector(w, l.bias);
    }
    if (adam != nullptr) {
        w.raw(adam_magic.data(), 4);
        w.u32(static_cast<std::uint32_t>(adam->m.layers.size()));
        w.u32(static_cast<std::uint32_t>(adam->t & 0xFFFFFFFFu));
        w.u32(static_cast<std::uint32_t>(adam->t >> 32));
        for (std::size_t i = 0; i < adam->m.layers.size(); ++i) {
            const auto& m = adam->m.layers[i];
            const auto& v = adam->v.layers[i];
            w.u32(static_cast<std::uint32_t>(m.weight.rows()));
            w.u32(static_cast<std::uint32_t>(m.weight.cols()));
            detail::write_matrix(w, m.weight);
            detail::write_vector(w, m.bias);
            detail::write_matrix(w, v.weight);
            detail::write_vector(w, v.bias);
        }
    }
    return w.bytes();
}

inline Checkpoint decode_checkpoint(std::vector<char> bytes) {
    detail::ByteReader r(std::move(bytes));
    if (r.tag() != checkpoint_magic) {
        throw FormatError("bad checkpoint magic, expected JQN1", 0);
    }
    const std::uint64_t version_at = r.offset();
    if (const std::uint32_t version = r.u32("version"); version != checkpoint_version) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version), version_at);
    }
    const std::uint64_t count_at = r.offset();
    const std::uint32_t layer_count = r.u32("layer count");
    if (layer_count == 0 || layer_count > 64) {
        throw FormatError("invalid layer count " + std::to_string(layer_count), count_at);
    }
    Checkpoint ck;
    std::uint32_t prev_cols = 0;
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        const auto [rows, cols] = detail::read_shape(r, prev_cols);
        Layer<float> layer{detail::read_matrix(r, rows, cols), detail::read_vector(r, cols)};
        ck.params.layers.push_back(std::move(layer));
        prev_cols = cols;
    }
    if (r.at_end()) {
        return ck;
    }
    const std::uint64_t tag_at = r.offset();
    if (r.tag() != adam_magic) {
        throw FormatError("unexpected trailing data, expected ADM1 block", tag_at);
    }
    const std::uint64_t adam_count_at = r.offset();
    if (r.u32("adam layer count") != layer_count) {
        throw FormatError("optimizer block layer count does not match the network", adam_count_at);
    }
    AdamState<float> adam = AdamState<float>::for_params(ck.params);
    const std::uint64_t t_low = r.u32("adam timestep");
    const std::uint64_t t_high = r.u32("adam timestep");
    adam.t = t_low | (t_high << 32);
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        const std::uint64_t at = r.offset();
        const auto [rows, cols] = detail::read_shape(r, 0);
        const auto& ref = ck.params.layers[i].weight;
        if (rows != ref.rows() || cols != ref.cols()) {
            throw FormatError("optimizer moment shape does not match layer " + std::to_string(i), at);
        }
        adam.m.layers[i].weight = detail::read_matrix(r, rows, cols);
        adam.m.layers[i].bias = detail::read_vector(r, cols);
        adam.v.layers[i].weight = detail::read_matrix(r, rows, cols);
        adam.v.layers[i].bias = detail::read_vector(r, cols);
    }
    if (!r.at_end()) {
        throw FormatError("unexpected trailing data after optimizer block", r.offset());
    }
    ck.adam = std::move(adam);
    return ck;
}

inline void save_checkpoint(const std::filesystem::path& path, const NetworkParams<float>& params,
                            const AdamState<float>* adam = nullptr) {
    const std::vector<char> bytes = encode_checkpoint(params, adam);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open checkpoint for writing", path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed writing checkpoint", path.string());
    }
}

inline Checkpoint load_checkpoint_full(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open checkpoint", path.string());
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_checkpoint(std::move(bytes));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.message(), e.offset());
    }
}

inline NetworkParams<float> load_checkpoint(const std::filesystem::path& path) {
    return load_checkpoint_full(path).params;
}

} // namespace jetrl
