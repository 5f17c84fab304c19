#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <zlib.h>

#include "error.hpp"

namespace wavescope {

/// 8-bit RGB raster, row-major from the top-left corner.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    Image() = default;
    Image(int w, int h, std::array<std::uint8_t, 3> fill = {255, 255, 255})
        : width(w), height(h), rgb(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3)
    {
        for (std::size_t i = 0; i < rgb.size(); i += 3) {
            rgb[i] = fill[0];
            rgb[i + 1] = fill[1];
            rgb[i + 2] = fill[2];
        }
    }

    void set(int x, int y, std::array<std::uint8_t, 3> c)
    {
        if (x < 0 || y < 0 || x >= width || y >= height)
            return;
        auto* p = &rgb[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3];
        p[0] = c[0];
        p[1] = c[1];
        p[2] = c[2];
    }

    std::array<std::uint8_t, 3> get(int x, int y) const
    {
        const auto* p = &rgb[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3];
        return {p[0], p[1], p[2]};
    }
};

/// Encodes a truecolor PNG (no interlace, filter type 0 on every row).
/// Output bytes depend only on the pixels.
inline std::string encode_png(const Image& img)
{
    auto put32 = [](std::string& out, std::uint32_t v) {
        out += static_cast<char>((v >> 24) & 0xFF);
        out += static_cast<char>((v >> 16) & 0xFF);
        out += static_cast<char>((v >> 8) & 0xFF);
        out += static_cast<char>(v & 0xFF);
    };
    auto chunk = [&](std::string& out, const char* type, const std::string& data) {
        put32(out, static_cast<std::uint32_t>(data.size()));
        std::string body(type, 4);
        body += data;
        out += body;
        put32(out, static_cast<std::uint32_t>(
                       crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()))));
    };

    std::string raw;
    const std::size_t stride = static_cast<std::size_t>(img.width) * 3;
    raw.reserve((stride + 1) * static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) {
        raw += '\0';
        raw.append(reinterpret_cast<const char*>(&img.rgb[static_cast<std::size_t>(y) * stride]), stride);
    }
    uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
    std::string packed(packed_size, '\0');
    if (compress2(reinterpret_cast<Bytef*>(packed.data()), &packed_size, reinterpret_cast<const Bytef*>(raw.data()),
                  static_cast<uLong>(raw.size()), 6)
        != Z_OK)
        throw IoError("png: deflate failed");
    packed.resize(packed_size);

    std::string out("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    put32(ihdr, static_cast<std::uint32_t>(img.width));
    put32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr += '\x08'; // bit depth
    ihdr += '\x02'; // truecolor
    ihdr += std::string(3, '\0');
    chunk(out, "IHDR", ihdr);
    chunk(out, "IDAT", packed);
    chunk(out, "IEND", {});
    return out;
}

} // namespace wavescope
