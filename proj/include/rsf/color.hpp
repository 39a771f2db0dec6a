#pragma once

#include "rsf/tensor.hpp"

namespace rsf {

// Full-range BT.601 on [0,1] data.
inline constexpr float kLumaR = 0.299f;
inline constexpr float kLumaG = 0.587f;
inline constexpr float kLumaB = 0.114f;
inline constexpr float kCbScale = 0.564f;
inline constexpr float kCrScale = 0.713f;

/// Channel 0 = Y, 1 = Cb, 2 = Cr. Chroma is offset by 0.5.
ImageTensor rgb_to_ycbcr(const ImageTensor& rgb);

/// Exact inverse of rgb_to_ycbcr, clamped to [0,1].
ImageTensor ycbcr_to_rgb(const ImageTensor& ycbcr);

/// Same as ycbcr_to_rgb without the clamp.
ImageTensor ycbcr_to_rgb_unclamped(const ImageTensor& ycbcr);

/// 1-channel luma. Identity copy for 1-channel input.
ImageTensor luma(const ImageTensor& img);

/// HSV value: per-pixel max(R,G,B).
ImageTensor brightness(const ImageTensor& rgb);

/// HSV saturation: (max-min)/max, 0 where max == 0.
ImageTensor saturation(const ImageTensor& rgb);

}  // namespace rsf
