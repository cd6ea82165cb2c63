#include <array>
#include <cmath>

#include "plad/binary_io.hpp"
#include "plad/features.hpp"
#include "plad/png_io.hpp"

namespace plad {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'P', 'L', 'E', 'M'};
constexpr std::uint16_t kVersion = 1;

}  // namespace

std::vector<std::uint8_t> serialize_embeddings(const std::map<std::string, FeatureGrid, std::less<>>& entries) {
    binary::Writer w;
    w.bytes(kMagic);
    w.u16(kVersion);
    w.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& [name, grid] : entries) {
        w.string(name);
        w.u32(static_cast<std::uint32_t>(grid.grid_h));
        w.u32(static_cast<std::uint32_t>(grid.grid_w));
        w.u32(static_cast<std::uint32_t>(grid.dim));
        w.floats(grid.data);
    }
    w.u32(binary::crc32(w.buffer()));
    return w.take();
}

std::map<std::string, FeatureGrid, std::less<>> parse_embeddings(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMagic.size() + 2 + 4 + 4) fail(ErrorKind::Framing, "embedding file too short");
    const auto body = bytes.first(bytes.size() - 4);
    binary::Reader footer(bytes.last(4));
    if (footer.u32() != binary::crc32(body)) fail(ErrorKind::Corruption, "embedding file CRC mismatch");

    binary::Reader r(body);
    const auto magic = r.bytes(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) fail(ErrorKind::Framing, "bad embedding magic");
    if (const auto v = r.u16(); v != kVersion)
        fail(ErrorKind::Unsupported, "embedding file version " + std::to_string(v));
    const auto count = r.u32();
    std::map<std::string, FeatureGrid, std::less<>> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = r.string();
        FeatureGrid g;
        g.grid_h = r.u32();
        g.grid_w = r.u32();
        g.dim = r.u32();
        g.data = r.floats();
        if (g.data.size() != g.grid_h * g.grid_w * g.dim)
            fail(ErrorKind::Dimension, "embedding '" + name + "' holds " + std::to_string(g.data.size()) +
                                           " values for shape [" + std::to_string(g.grid_h) + ", " +
                                           std::to_string(g.grid_w) + ", " + std::to_string(g.dim) + "]");
        for (float v : g.data)
            if (!std::isfinite(v)) fail(ErrorKind::Numeric, "embedding '" + name + "' has non-finite values");
        out.emplace(std::move(name), std::move(g));
    }
    if (r.remaining() != 0) fail(ErrorKind::Framing, "trailing bytes in embedding file");
    return out;
}

std::map<std::string, FeatureGrid, std::less<>> read_embeddings(const std::filesystem::path& path) {
    return parse_embeddings(read_file(path));
}

}  // namespace plad
