#include "plad/container.hpp"

#include <zlib.h>

#include <array>
#include <cmath>
#include <optional>

#include "plad/binary_io.hpp"
#include "plad/error.hpp"
#include "plad/png_io.hpp"

namespace plad {

std::uint32_t binary::crc32(std::span<const std::uint8_t> data) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    std::size_t pos = 0;
    while (pos < data.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - pos, 1u << 30));
        crc = ::crc32(crc, data.data() + pos, chunk);
        pos += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'P', 'L', 'A', 'D'};

void write_body(binary::Writer& w, const Model& m) {
    w.bytes(kMagic);
    w.u16(kContainerVersion);
    w.u8(static_cast<std::uint8_t>(m.algorithm));

    w.u8(static_cast<std::uint8_t>(m.extractor.kind));
    w.u32(m.extractor.base_grid);
    w.u32(static_cast<std::uint32_t>(m.extractor.scales.size()));
    for (auto s : m.extractor.scales) w.u32(s);
    w.string(m.extractor.import_path);

    w.f64(m.calibration.threshold);
    w.f64(m.calibration.scale);
    w.f64(m.calibration.train_score_max);
    w.f64(m.calibration.train_score_median);
    w.f64(m.smoothing_sigma);

    if (const auto* g = std::get_if<padim::GaussianBank>(&m.payload)) {
        w.u32(static_cast<std::uint32_t>(g->grid_h));
        w.u32(static_cast<std::uint32_t>(g->grid_w));
        w.u32(static_cast<std::uint32_t>(g->dim));
        w.f64(g->epsilon);
        w.u64(g->reduce_seed);
        w.u32(g->n_train);
        w.u32(static_cast<std::uint32_t>(g->channels.size()));
        for (auto c : g->channels) w.u32(c);
        w.floats(g->means);
        w.floats(g->inv_cov);
    } else {
        const auto& b = std::get<patchcore::MemoryBank>(m.payload);
        w.u32(static_cast<std::uint32_t>(b.dim));
        w.f64(b.coreset_ratio);
        w.u64(b.coreset_seed);
        w.u64(b.n_source);
        w.floats(b.vectors);
    }
}

// Truncated input surfaces as a framing error from the reader.
Model read_body(binary::Reader& r) {
    const auto magic = r.bytes(4);
    if (!std::equal(magic.begin(), magic.end(), kMagic.begin()))
        fail(ErrorKind::Framing, "not a model container (bad magic)");
    if (const auto version = r.u16(); version != kContainerVersion)
        fail(ErrorKind::Unsupported, "container version " + std::to_string(version));
    Model m;
    const auto algo = r.u8();
    if (algo != 1 && algo != 2) fail(ErrorKind::Unsupported, "unknown algorithm id " + std::to_string(algo));
    m.algorithm = static_cast<Algorithm>(algo);

    const auto kind = r.u8();
    if (kind > 1) fail(ErrorKind::Unsupported, "unknown extractor kind " + std::to_string(kind));
    m.extractor.kind = static_cast<ExtractorKind>(kind);
    m.extractor.base_grid = r.u32();
    const auto n_scales = r.u32();
    if (n_scales > r.remaining() / 4) fail(ErrorKind::Framing, "scale list exceeds data");
    m.extractor.scales.resize(n_scales);
    for (auto& s : m.extractor.scales) s = r.u32();
    m.extractor.import_path = r.string();

    m.calibration.threshold = r.f64();
    m.calibration.scale = r.f64();
    m.calibration.train_score_max = r.f64();
    m.calibration.train_score_median = r.f64();
    m.smoothing_sigma = r.f64();

    if (m.algorithm == Algorithm::PaDiM) {
        padim::GaussianBank g;
        g.grid_h = r.u32();
        g.grid_w = r.u32();
        g.dim = r.u32();
        g.epsilon = r.f64();
        g.reduce_seed = r.u64();
        g.n_train = r.u32();
        const auto k = r.u32();
        if (k > r.remaining() / 4) fail(ErrorKind::Framing, "channel list exceeds data");
        g.channels.resize(k);
        for (auto& c : g.channels) c = r.u32();
        g.means = r.floats();
        g.inv_cov = r.floats();
        if (g.means.size() != g.cells() * g.dim || g.inv_cov.size() != g.cells() * g.dim * g.dim)
            fail(ErrorKind::Framing, "PaDiM arrays do not match declared shape");
        m.payload = std::move(g);
    } else {
        patchcore::MemoryBank b;
        b.dim = r.u32();
        b.coreset_ratio = r.f64();
        b.coreset_seed = r.u64();
        b.n_source = r.u64();
        b.vectors = r.floats();
        if (b.dim == 0 || b.vectors.size() % b.dim != 0 || b.vectors.empty())
            fail(ErrorKind::Framing, "PatchCore bank does not match declared dimension");
        m.payload = std::move(b);
    }
    return m;
}

}  // namespace

const char* to_string(Algorithm a) { return a == Algorithm::PaDiM ? "padim" : "patchcore"; }

Algorithm parse_algorithm(std::string_view name) {
    if (name == "padim") return Algorithm::PaDiM;
    if (name == "patchcore") return Algorithm::PatchCore;
    fail(ErrorKind::Argument, "unknown algorithm '" + std::string(name) + "' (expected padim or patchcore)");
}

std::vector<std::uint8_t> save(const Model& model) {
    binary::Writer w;
    write_body(w, model);
    w.u32(binary::crc32(w.buffer()));
    return w.take();
}

Model load(std::span<const std::uint8_t> bytes) {
    constexpr std::size_t kMinSize = 4 + 2 + 1 + 4;
    if (bytes.size() < kMinSize) fail(ErrorKind::Framing, "model container truncated (" + std::to_string(bytes.size()) + " bytes)");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        fail(ErrorKind::Framing, "not a model container (bad magic)");

    const auto body = bytes.first(bytes.size() - 4);
    binary::Reader footer(bytes.last(4));
    const bool crc_ok = footer.u32() == binary::crc32(body);

    binary::Reader r(body);
    std::optional<Model> parsed;
    try {
        parsed = read_body(r);
    } catch (const Error& e) {
        // A short file shows up as a framing failure; otherwise a CRC
        // mismatch takes precedence over whatever the damaged bytes decoded to.
        if (e.kind() == ErrorKind::Framing) fail(ErrorKind::Framing, std::string(e.what()) + (crc_ok ? "" : " (CRC mismatch)"));
        if (!crc_ok) fail(ErrorKind::Corruption, "model container CRC mismatch");
        throw;
    }
    if (!crc_ok) fail(ErrorKind::Corruption, "model container CRC mismatch");
    if (r.remaining() != 0) fail(ErrorKind::Framing, "trailing bytes after model payload");
    return std::move(*parsed);
}

void save_file(const std::filesystem::path& path, const Model& model) { write_file(path, save(model)); }

Model load_file(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return load(bytes);
}

}  // namespace plad
