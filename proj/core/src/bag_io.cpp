#include "tgdfer/bag_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tgdfer/errors.hpp"

namespace tgdfer {

namespace {

constexpr char kBagMagic[4] = {'T', 'G', 'F', 'B'};
constexpr char kTextMagic[4] = {'T', 'G', 'T', 'E'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xffU));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + static_cast<std::size_t>(i)]) << (8 * i);
    return v;
}

struct Header {
    std::uint32_t rows, dim, label;
    std::string id;
    std::size_t payload_offset;
};

std::vector<std::uint8_t> encode(const char (&magic)[4], std::uint32_t label, const std::string& id,
                                 const Tensor& rows) {
    if (!rows.defined() || rows.rank() != 2) throw ShapeError("expected a [rows x d] feature matrix");
    std::vector<std::uint8_t> out;
    out.reserve(kBagHeaderBytes + id.size() + rows.numel() * 4);
    out.insert(out.end(), std::begin(magic), std::end(magic));
    put_u32(out, kBagFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(rows.dim(0)));
    put_u32(out, static_cast<std::uint32_t>(rows.dim(1)));
    put_u32(out, label);
    put_u32(out, static_cast<std::uint32_t>(id.size()));
    out.insert(out.end(), id.begin(), id.end());
    for (double v : rows.values()) {
        const float f = static_cast<float>(v);
        if (!std::isfinite(f)) throw FormatError("refusing to write a non-finite feature value");
        put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
    return out;
}

Header decode_header(std::span<const std::uint8_t> bytes, const char (&magic)[4]) {
    const std::string kind(magic, 4);
    if (bytes.size() < kBagHeaderBytes) throw FormatError(kind + ": truncated header");
    if (std::memcmp(bytes.data(), magic, 4) != 0) throw FormatError(kind + ": magic mismatch");
    const auto version = get_u32(bytes, 4);
    if (version != kBagFormatVersion) {
        throw FormatError(kind + ": version mismatch (file " + std::to_string(version) + ", expected " +
                          std::to_string(kBagFormatVersion) + ")");
    }
    Header h{get_u32(bytes, 8), get_u32(bytes, 12), get_u32(bytes, 16), {}, 0};
    const auto id_len = get_u32(bytes, 20);
    if (h.rows == 0 || h.dim == 0) throw FormatError(kind + ": zero rows or zero dimension");
    if (bytes.size() < kBagHeaderBytes + id_len) throw FormatError(kind + ": truncated id block");
    h.id.assign(reinterpret_cast<const char*>(bytes.data()) + kBagHeaderBytes, id_len);
    h.payload_offset = kBagHeaderBytes + id_len;
    const std::size_t expected = h.payload_offset + static_cast<std::size_t>(h.rows) * h.dim * 4;
    if (bytes.size() < expected) throw FormatError(kind + ": truncated payload");
    if (bytes.size() > expected) throw FormatError(kind + ": trailing bytes after payload");
    return h;
}

Tensor decode_rows(std::span<const std::uint8_t> bytes, const Header& h, const std::string& kind) {
    std::vector<double> values(static_cast<std::size_t>(h.rows) * h.dim);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const float f = std::bit_cast<float>(get_u32(bytes, h.payload_offset + 4 * i));
        if (!std::isfinite(f)) throw FormatError(kind + ": non-finite value in payload");
        values[i] = f;
    }
    return Tensor::matrix(h.rows, h.dim, std::move(values));
}

}  // namespace

std::vector<std::uint8_t> encode_bag(const FrameBag& bag) { return encode(kBagMagic, bag.label, bag.bag_id, bag.features); }

FrameBag decode_bag(std::span<const std::uint8_t> bytes, std::optional<std::size_t> expected_dim) {
    const Header h = decode_header(bytes, kBagMagic);
    if (expected_dim && *expected_dim != h.dim) {
        throw FormatError("TGFB: dimension " + std::to_string(h.dim) + " disagrees with manifest dimension " +
                          std::to_string(*expected_dim));
    }
    return FrameBag{h.id, decode_rows(bytes, h, "TGFB"), h.label, BagSource::imported};
}

std::vector<std::uint8_t> encode_text_embeddings(const TextEmbeddingTable& table) {
    return encode(kTextMagic, 0, table.name, table.rows);
}

TextEmbeddingTable decode_text_embeddings(std::span<const std::uint8_t> bytes) {
    const Header h = decode_header(bytes, kTextMagic);
    return TextEmbeddingTable{h.id, decode_rows(bytes, h, "TGTE")};
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw FormatError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_bag(const std::filesystem::path& path, const FrameBag& bag) { write_file_bytes(path, encode_bag(bag)); }

FrameBag read_bag(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
    return decode_bag(read_file_bytes(path), expected_dim);
}

void write_text_embeddings(const std::filesystem::path& path, const TextEmbeddingTable& table) {
    write_file_bytes(path, encode_text_embeddings(table));
}

TextEmbeddingTable read_text_embeddings(const std::filesystem::path& path) {
    return decode_text_embeddings(read_file_bytes(path));
}

}  // namespace tgdfer
