#include "rsf/color.hpp"

#include <algorithm>

#include "rsf/error.hpp"

namespace rsf {

ImageTensor rgb_to_ycbcr(const ImageTensor& rgb) {
  require_channels(rgb, 3, "rgb_to_ycbcr");
  ImageTensor out = Tensor::like(rgb);
  auto r = rgb.plane(0), g = rgb.plane(1), b = rgb.plane(2);
  auto yy = out.plane(0), cb = out.plane(1), cr = out.plane(2);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const float y = kLumaR * r[i] + kLumaG * g[i] + kLumaB * b[i];
    yy[i] = y;
    cb[i] = kCbScale * (b[i] - y) + 0.5f;
    cr[i] = kCrScale * (r[i] - y) + 0.5f;
  }
  return out;
}

ImageTensor ycbcr_to_rgb_unclamped(const ImageTensor& ycbcr) {
  require_channels(ycbcr, 3, "ycbcr_to_rgb");
  ImageTensor out = Tensor::like(ycbcr);
  auto yy = ycbcr.plane(0), cb = ycbcr.plane(1), cr = ycbcr.plane(2);
  auto r = out.plane(0), g = out.plane(1), b = out.plane(2);
  for (std::size_t i = 0; i < yy.size(); ++i) {
    const float rv = yy[i] + (cr[i] - 0.5f) / kCrScale;
    const float bv = yy[i] + (cb[i] - 0.5f) / kCbScale;
    r[i] = rv;
    b[i] = bv;
    g[i] = (yy[i] - kLumaR * rv - kLumaB * bv) / kLumaG;
  }
  return out;
}

ImageTensor ycbcr_to_rgb(const ImageTensor& ycbcr) {
  return clamp(ycbcr_to_rgb_unclamped(ycbcr), 0.0f, 1.0f);
}

ImageTensor luma(const ImageTensor& img) {
  if (img.channels() == 1) return img;
  require_channels(img, 3, "luma");
  ImageTensor out(1, img.height(), img.width());
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  auto y = out.plane(0);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = kLumaR * r[i] + kLumaG * g[i] + kLumaB * b[i];
  return out;
}

ImageTensor brightness(const ImageTensor& rgb) {
  require_channels(rgb, 3, "brightness");
  ImageTensor out(1, rgb.height(), rgb.width());
  auto r = rgb.plane(0), g = rgb.plane(1), b = rgb.plane(2);
  auto v = out.plane(0);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max({r[i], g[i], b[i]});
  return out;
}

ImageTensor saturation(const ImageTensor& rgb) {
  require_channels(rgb, 3, "saturation");
  ImageTensor out(1, rgb.height(), rgb.width());
  auto r = rgb.plane(0), g = rgb.plane(1), b = rgb.plane(2);
  auto s = out.plane(0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const float mx = std::max({r[i], g[i], b[i]});
    const float mn = std::min({r[i], g[i], b[i]});
    s[i] = mx > 0.0f ? (mx - mn) / mx : 0.0f;
  }
  return out;
}

}  // namespace rsf
