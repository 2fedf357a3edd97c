#pragma once

#include <compare>
#include <optional>

namespace crossguard {

/// Axis-aligned box in image coordinates: (x1, y1) is the top-left corner,
/// (x2, y2) the bottom-right, y grows downward. Construction rejects boxes
/// without strictly positive width and height, so every BBox value has a
/// non-zero area.
class BBox {
 public:
  BBox(double x1, double y1, double x2, double y2);

  /// Returns nullopt instead of throwing for degenerate or non-finite input.
  static std::optional<BBox> try_make(double x1, double y1, double x2,
                                      double y2) noexcept;

  double x1() const noexcept { return x1_; }
  double y1() const noexcept { return y1_; }
  double x2() const noexcept { return x2_; }
  double y2() const noexcept { return y2_; }
  double width() const noexcept { return x2_ - x1_; }
  double height() const noexcept { return y2_ - y1_; }
  double area() const noexcept { return width() * height(); }

  friend bool operator==(const BBox&, const BBox&) = default;
  // Lexicographic on (x1, y1, x2, y2); coordinates are always finite.
  friend std::partial_ordering operator<=>(const BBox&, const BBox&) = default;

 private:
  struct Unchecked {};
  BBox(Unchecked, double x1, double y1, double x2, double y2) noexcept
      : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {}

  double x1_;
  double y1_;
  double x2_;
  double y2_;
};

/// Overlap area; zero for disjoint or edge-touching boxes.
double intersection_area(const BBox& a, const BBox& b) noexcept;

/// Intersection over union, in [0, 1].
double iou(const BBox& a, const BBox& b) noexcept;

/// Any positive-area overlap counts as occupancy.
bool overlaps_roi(const BBox& box, const BBox& roi) noexcept;

}  // namespace crossguard
