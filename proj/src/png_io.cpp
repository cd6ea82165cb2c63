#include "plad/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <string>

#include "plad/error.hpp"

namespace plad {

namespace {

struct ReadContext {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
    std::string message;
};

void read_bytes(png_structp png, png_bytep out, png_size_t count) {
    auto* ctx = static_cast<ReadContext*>(png_get_io_ptr(png));
    if (ctx->offset + count > ctx->bytes.size()) {
        ctx->message = "unexpected end of data";
        png_longjmp(png, 1);
    }
    std::memcpy(out, ctx->bytes.data() + ctx->offset, count);
    ctx->offset += count;
}

void on_read_error(png_structp png, png_const_charp msg) {
    auto* ctx = static_cast<ReadContext*>(png_get_error_ptr(png));
    if (ctx->message.empty()) ctx->message = msg;
    png_longjmp(png, 1);
}

void on_warning(png_structp, png_const_charp) {}

enum class DecodeStatus { Ok, Malformed, Unsupported };

struct RawImage {
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int color_type = 0;
    int bit_depth = 0;
    std::vector<std::uint8_t> pixels;  // rows as stored, after strip of nothing
    std::size_t row_bytes = 0;
};

// All C++ objects touched across setjmp live in the caller so no destructor
// is skipped by png_longjmp.
DecodeStatus decode_raw(ReadContext& ctx, RawImage& raw, std::vector<png_bytep>& rows) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, on_read_error, on_warning);
    if (!png) {
        ctx.message = "png_create_read_struct failed";
        return DecodeStatus::Malformed;
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        ctx.message = "png_create_info_struct failed";
        return DecodeStatus::Malformed;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return DecodeStatus::Malformed;
    }
    png_set_read_fn(png, &ctx, read_bytes);
    png_read_info(png, info);

    raw.width = png_get_image_width(png, info);
    raw.height = png_get_image_height(png, info);
    raw.color_type = png_get_color_type(png, info);
    raw.bit_depth = png_get_bit_depth(png, info);
    const bool supported_type = raw.color_type == PNG_COLOR_TYPE_GRAY ||
                                raw.color_type == PNG_COLOR_TYPE_GRAY_ALPHA ||
                                raw.color_type == PNG_COLOR_TYPE_RGB ||
                                raw.color_type == PNG_COLOR_TYPE_RGB_ALPHA;
    if (raw.bit_depth != 8 || !supported_type) {
        png_destroy_read_struct(&png, &info, nullptr);
        return DecodeStatus::Unsupported;
    }
    if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
    if (raw.color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    raw.row_bytes = png_get_rowbytes(png, info);
    raw.pixels.resize(raw.row_bytes * raw.height);
    rows.resize(raw.height);
    for (png_uint_32 y = 0; y < raw.height; ++y) rows[y] = raw.pixels.data() + y * raw.row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return DecodeStatus::Ok;
}

void write_bytes(png_structp png, png_bytep data, png_size_t count) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + count);
}

void flush_noop(png_structp) {}

void on_write_error(png_structp png, png_const_charp) { png_longjmp(png, 1); }

bool encode_raw(std::vector<std::uint8_t>& out, const std::vector<std::uint8_t>& pixels,
                std::vector<png_bytep>& rows, png_uint_32 width, png_uint_32 height, int color_type) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, on_write_error, on_warning);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &out, write_bytes, flush_noop);
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = pixels.size() / height;
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(pixels.data() + y * stride);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

}  // namespace

ImageTensor decode_png(std::span<const std::uint8_t> bytes) {
    ReadContext ctx{bytes, 0, {}};
    RawImage raw;
    std::vector<png_bytep> rows;
    switch (decode_raw(ctx, raw, rows)) {
        case DecodeStatus::Malformed:
            throw DecodeError(ctx.offset, "malformed PNG: " + ctx.message);
        case DecodeStatus::Unsupported:
            fail(ErrorKind::UnsupportedFormat,
                 "only 8-bit grayscale/RGB PNG is supported (bit depth " + std::to_string(raw.bit_depth) +
                     ", color type " + std::to_string(raw.color_type) + ")");
        case DecodeStatus::Ok:
            break;
    }
    const std::size_t src_ch = (raw.color_type & PNG_COLOR_MASK_COLOR) ? 3 : 1;
    const std::size_t h = raw.height, w = raw.width;
    std::vector<float> data(h * w * 3);
    for (std::size_t y = 0; y < h; ++y) {
        const std::uint8_t* row = raw.pixels.data() + y * raw.row_bytes;
        for (std::size_t x = 0; x < w; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                const std::uint8_t v = row[x * src_ch + (src_ch == 3 ? c : 0)];
                data[(y * w + x) * 3 + c] = static_cast<float>(v) / 255.0f;
            }
        }
    }
    return ImageTensor(h, w, 3, std::move(data));
}

std::vector<std::uint8_t> encode_png(const ImageTensor& img) {
    if (img.empty()) fail(ErrorKind::Argument, "cannot encode an empty image");
    img.validate();
    std::vector<std::uint8_t> pixels(img.size());
    const auto d = img.data();
    for (std::size_t i = 0; i < d.size(); ++i)
        pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(d[i] * 255.0f), 0L, 255L));
    std::vector<std::uint8_t> out;
    std::vector<png_bytep> rows(img.height());
    const int color_type = img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    if (!encode_raw(out, pixels, rows, static_cast<png_uint_32>(img.width()),
                    static_cast<png_uint_32>(img.height()), color_type))
        fail(ErrorKind::Io, "PNG encoder failed");
    return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(ErrorKind::Io, "read failed: " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open for writing " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

ImageTensor read_png(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return decode_png(bytes);
    } catch (const DecodeError& e) {
        throw DecodeError(e.offset(), path.string() + ": malformed PNG");
    }
}

void write_png(const std::filesystem::path& path, const ImageTensor& img) {
    write_file(path, encode_png(img));
}

}  // namespace plad
