#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rsf/tensor.hpp"

namespace rsf {

/// Decode an 8- or 16-bit PNG into a 3-channel [0,1] tensor.
/// Gray is expanded to RGB, alpha is dropped, palettes are expanded.
/// Throws DecodeError naming the byte offset where decoding stopped.
ImageTensor decode_png(std::span<const std::uint8_t> bytes);

/// Clamp to [0,1] and quantize round-to-nearest. 1- or 3-channel input.
std::vector<std::uint8_t> encode_png(const ImageTensor& img, int bit_depth = 8);

ImageTensor read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageTensor& img, int bit_depth = 8);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace rsf
