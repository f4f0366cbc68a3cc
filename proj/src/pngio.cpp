#include "elevleak/imagerep.hpp"

#include "elevleak/errors.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

namespace elevleak::imagerep {

namespace {

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::vector<std::uint8_t>& payload) {
    append_u32(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const auto crc = crc32(0, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
    append_u32(out, static_cast<std::uint32_t>(crc));
}

} // namespace

std::vector<std::uint8_t> png_bytes(const ImageTensor& image, int scale) {
    const auto rgb = to_rgb8(image, scale);
    const std::uint32_t side = static_cast<std::uint32_t>(kImageSize * scale);

    // Raw scanlines, filter byte 0 per row.
    std::vector<std::uint8_t> raw;
    raw.reserve((side * 3 + 1) * side);
    for (std::uint32_t row = 0; row < side; ++row) {
        raw.push_back(0);
        const std::size_t offset = static_cast<std::size_t>(row) * side * 3;
        raw.insert(raw.end(), rgb.begin() + static_cast<std::ptrdiff_t>(offset),
                   rgb.begin() + static_cast<std::ptrdiff_t>(offset + side * 3));
    }

    uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(compressed_size);
    if (compress2(compressed.data(), &compressed_size, raw.data(), static_cast<uLong>(raw.size()),
                  Z_BEST_COMPRESSION) != Z_OK)
        throw InternalError("zlib compression failed");
    compressed.resize(compressed_size);

    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<std::uint8_t> ihdr;
    append_u32(ihdr, side);
    append_u32(ihdr, side);
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // color type: truecolor
    ihdr.push_back(0); // compression
    ihdr.push_back(0); // filter
    ihdr.push_back(0); // interlace
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", compressed);
    append_chunk(out, "IEND", {});
    return out;
}

void write_png(const std::string& path, const ImageTensor& image, int scale) {
    const auto bytes = png_bytes(image, scale);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

} // namespace elevleak::imagerep
