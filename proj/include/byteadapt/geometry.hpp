#pragma once

#include <algorithm>
#include <array>
#include <stdexcept>

namespace byteadapt {

/// Axis-aligned box in real-valued pixel coordinates, stored as
/// top-left corner plus width/height (the MOT CSV column layout).
/// Boxes are never clamped to image bounds; predictions may leave the frame.
struct BBox {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const { return left + width; }
  double bottom() const { return top + height; }
  double area() const { return width * height; }
};

/// (cx, cy, aspect, h) measurement vector used at the Kalman boundary.
using StateVec4 = std::array<double, 4>;

/// Intersection over union in [0, 1]. Degenerate boxes (zero union area)
/// yield 0 against everything instead of erroring.
inline double iou(const BBox& a, const BBox& b) {
  if (a.left == b.left && a.top == b.top && a.width == b.width &&
      a.height == b.height) {
    // Identical boxes must score exactly 1; the corner arithmetic below
    // only gets within a few ulp of it.
    return a.area() > 0.0 ? 1.0 : 0.0;
  }
  const double iw =
      std::min(a.right(), b.right()) - std::max(a.left, b.left);
  const double ih =
      std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) {
    return 0.0;
  }
  // Rounding can push the ratio an ulp past 1 for near-identical boxes;
  // the documented range is hard.
  return std::min(inter / uni, 1.0);
}

/// tlwh -> (cx, cy, aspect, h). Requires height > 0.
inline StateVec4 to_state_vector(const BBox& b) {
  if (b.height <= 0.0) {
    throw std::invalid_argument("to_state_vector: degenerate box (height <= 0)");
  }
  return {b.left + b.width / 2.0, b.top + b.height / 2.0,
          b.width / b.height, b.height};
}

/// (cx, cy, aspect, h) -> tlwh. Requires h > 0 and aspect > 0.
/// The top-left corner may be negative; callers never clamp here.
inline BBox from_state_vector(const StateVec4& v) {
  const double aspect = v[2];
  const double h = v[3];
  if (h <= 0.0 || aspect <= 0.0) {
    throw std::invalid_argument(
        "from_state_vector: degenerate state (h <= 0 or aspect <= 0)");
  }
  const double w = aspect * h;
  return BBox{v[0] - w / 2.0, v[1] - h / 2.0, w, h};
}

}  // namespace byteadapt
