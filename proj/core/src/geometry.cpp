#include "crossguard/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crossguard/error.hpp"

namespace crossguard {

namespace {

bool valid_corners(double x1, double y1, double x2, double y2) noexcept {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
         std::isfinite(y2) && x1 < x2 && y1 < y2;
}

}  // namespace

BBox::BBox(double x1, double y1, double x2, double y2)
    : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {
  if (!valid_corners(x1, y1, x2, y2)) {
    std::ostringstream msg;
    msg << "degenerate box (" << x1 << ", " << y1 << ", " << x2 << ", " << y2
        << ")";
    throw Error(msg.str());
  }
}

std::optional<BBox> BBox::try_make(double x1, double y1, double x2,
                                   double y2) noexcept {
  if (!valid_corners(x1, y1, x2, y2)) return std::nullopt;
  return BBox(Unchecked{}, x1, y1, x2, y2);
}

double intersection_area(const BBox& a, const BBox& b) noexcept {
  const double width = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
  const double height = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
  return std::max(0.0, width) * std::max(0.0, height);
}

double iou(const BBox& a, const BBox& b) noexcept {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return std::min(1.0, inter / uni);
}

bool overlaps_roi(const BBox& box, const BBox& roi) noexcept {
  return intersection_area(box, roi) > 0.0;
}

}  // namespace crossguard
