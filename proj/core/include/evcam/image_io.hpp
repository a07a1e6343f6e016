#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evcam/image.hpp"

namespace evcam {

/// Decodes PNG or JPEG (sniffed from the file signature) into an Image with
/// `channels` channels (1 = gray, 3 = RGB). Alpha is dropped, 16-bit PNGs are
/// reduced to 8 bits. Throws IoError.
Image read_image(const std::string& path, std::size_t channels = 3);
Image decode_image(std::span<const std::uint8_t> bytes, std::size_t channels = 3);

/// 8-bit PNG, samples mapped by round(v * 255). Output bytes are a pure
/// function of the image.
std::vector<std::uint8_t> encode_png(const Image& img);
void write_png(const std::string& path, const Image& img);

}  // namespace evcam
