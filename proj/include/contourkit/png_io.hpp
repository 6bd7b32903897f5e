#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "contourkit/errors.hpp"
#include "contourkit/mask.hpp"

namespace contourkit::pngio {

struct Gray8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // row-major
};

struct Gray16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> pixels;
};

namespace detail {

struct MemWriter {
    std::vector<std::uint8_t>* out;
};

inline void mem_write_cb(png_structp png, png_bytep data, png_size_t len) {
    auto* writer = static_cast<MemWriter*>(png_get_io_ptr(png));
    writer->out->insert(writer->out->end(), data, data + len);
}

inline void mem_flush_cb(png_structp) {}

struct MemReader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

inline void mem_read_cb(png_structp png, png_bytep out, png_size_t len) {
    auto* reader = static_cast<MemReader*>(png_get_io_ptr(png));
    if (reader->pos + len > reader->size) {
        png_error(png, "png: truncated stream");
    }
    std::memcpy(out, reader->data + reader->pos, len);
    reader->pos += len;
}

inline void error_cb(png_structp png, png_const_charp msg) {
    auto* err = static_cast<std::string*>(png_get_error_ptr(png));
    if (err) *err = msg;
    longjmp(png_jmpbuf(png), 1);
}

inline void warning_cb(png_structp, png_const_charp) {}

/// Encodes 8- or 16-bit grayscale; 16-bit rows must already be big-endian.
inline std::vector<std::uint8_t> encode_gray(const std::uint8_t* rows, int width, int height,
                                             int bit_depth) {
    std::vector<std::uint8_t> out;
    std::string err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, error_cb, warning_cb);
    if (!png) throw PngError("png: failed to allocate write struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw PngError("png: failed to allocate info struct");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw PngError("png write: " + err);
    }
    MemWriter writer{&out};
    png_set_write_fn(png, &writer, mem_write_cb, mem_flush_cb);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * (bit_depth / 8);
    for (int y = 0; y < height; ++y) {
        png_write_row(png, const_cast<png_bytep>(rows + y * stride));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

} // namespace detail

inline std::vector<std::uint8_t> encode_gray8(const std::uint8_t* pixels, int width, int height) {
    return detail::encode_gray(pixels, width, height, 8);
}

inline std::vector<std::uint8_t> encode_gray16(const std::uint16_t* pixels, int width, int height) {
    std::vector<std::uint8_t> rows(static_cast<std::size_t>(width) * height * 2);
    for (std::size_t i = 0; i < static_cast<std::size_t>(width) * height; ++i) {
        rows[2 * i] = static_cast<std::uint8_t>(pixels[i] >> 8);
        rows[2 * i + 1] = static_cast<std::uint8_t>(pixels[i] & 0xFF);
    }
    return detail::encode_gray(rows.data(), width, height, 16);
}

/// Decodes any grayscale PNG (1/2/4/8-bit, or 16-bit stripped) to 8-bit.
/// Color images are rejected: masks and probability planes are grayscale.
inline Gray8 decode_gray8(const std::uint8_t* data, std::size_t size) {
    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err,
                                             detail::error_cb, detail::warning_cb);
    if (!png) throw PngError("png: failed to allocate read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw PngError("png: failed to allocate info struct");
    }
    std::vector<std::uint8_t>* pixels_guard = nullptr;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        (void)pixels_guard;
        throw PngError("png read: " + err);
    }
    detail::MemReader reader{data, size, 0};
    png_set_read_fn(png, &reader, detail::mem_read_cb);
    png_read_info(png, info);

    const png_byte color_type = png_get_color_type(png, info);
    if (color_type != PNG_COLOR_TYPE_GRAY) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw PngError("png read: expected 8-bit grayscale");
    }
    if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    png_read_update_info(png, info);

    Gray8 img;
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    pixels_guard = &img.pixels;
    for (int y = 0; y < img.height; ++y) {
        png_read_row(png, img.pixels.data() + static_cast<std::size_t>(y) * img.width, nullptr);
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

inline Gray16 decode_gray16(const std::uint8_t* data, std::size_t size) {
    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err,
                                             detail::error_cb, detail::warning_cb);
    if (!png) throw PngError("png: failed to allocate read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw PngError("png: failed to allocate info struct");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw PngError("png read: " + err);
    }
    detail::MemReader reader{data, size, 0};
    png_set_read_fn(png, &reader, detail::mem_read_cb);
    png_read_info(png, info);
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
        png_get_bit_depth(png, info) != 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw PngError("png read: expected 16-bit grayscale");
    }
    png_read_update_info(png, info);

    Gray16 img;
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width) * 2);
    for (int y = 0; y < img.height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < img.width; ++x) {
            img.pixels[static_cast<std::size_t>(y) * img.width + x] =
                static_cast<std::uint16_t>((row[2 * x] << 8) | row[2 * x + 1]);
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PngError("cannot open file: " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

inline void write_file_bytes(const std::filesystem::path& path,
                             const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw PngError("cannot write file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw PngError("short write: " + path.string());
}

// --- mask-level conveniences: foreground = 255, background = 0 ---

inline std::vector<std::uint8_t> encode_mask(const BinaryMask& mask) {
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(mask.width()) * mask.height(), 0);
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.get(x, y)) pixels[static_cast<std::size_t>(y) * mask.width() + x] = 255;
        }
    }
    return encode_gray8(pixels.data(), mask.width(), mask.height());
}

inline BinaryMask decode_mask(const std::uint8_t* data, std::size_t size) {
    const Gray8 img = decode_gray8(data, size);
    BinaryMask mask(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (img.pixels[static_cast<std::size_t>(y) * img.width + x] >= 128) {
                mask.set(x, y, true);
            }
        }
    }
    return mask;
}

inline void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
    write_file_bytes(path, encode_mask(mask));
}

inline BinaryMask read_mask_png(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    return decode_mask(bytes.data(), bytes.size());
}

// --- probability planes: 8-bit quantization v = round(p * 255) ---

inline std::vector<std::uint8_t> encode_probability(const ProbabilityMask& m) {
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(m.width()) * m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            pixels[static_cast<std::size_t>(y) * m.width() + x] =
                static_cast<std::uint8_t>(m.at(x, y) * 255.0f + 0.5f);
        }
    }
    return encode_gray8(pixels.data(), m.width(), m.height());
}

inline ProbabilityMask decode_probability(const std::uint8_t* data, std::size_t size) {
    const Gray8 img = decode_gray8(data, size);
    ProbabilityMask m(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            m.set(x, y, img.pixels[static_cast<std::size_t>(y) * img.width + x] / 255.0f);
        }
    }
    return m;
}

inline void write_probability_png(const std::filesystem::path& path, const ProbabilityMask& m) {
    write_file_bytes(path, encode_probability(m));
}

inline ProbabilityMask read_probability_png(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    return decode_probability(bytes.data(), bytes.size());
}

// --- 16-bit count maps (heatmaps) ---

inline void write_count_png(const std::filesystem::path& path,
                            const std::vector<std::uint32_t>& counts, int width, int height) {
    std::vector<std::uint16_t> pixels(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] > 65535) throw PngError("count map value exceeds 16-bit range");
        pixels[i] = static_cast<std::uint16_t>(counts[i]);
    }
    write_file_bytes(path, encode_gray16(pixels.data(), width, height));
}

inline Gray16 read_count_png(const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    return decode_gray16(bytes.data(), bytes.size());
}

} // namespace contourkit::pngio
