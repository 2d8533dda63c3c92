#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace trajmine {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
};

double distance(Point2 a, Point2 b);

/// Axis-aligned box in pixel coordinates. Construction rejects non-finite
/// coordinates and zero or negative extents.
class Box {
 public:
  Box(double x1, double y1, double x2, double y2);

  /// Returns nullopt instead of throwing for degenerate input.
  static std::optional<Box> try_make(double x1, double y1, double x2, double y2) noexcept;

  double x1() const noexcept { return x1_; }
  double y1() const noexcept { return y1_; }
  double x2() const noexcept { return x2_; }
  double y2() const noexcept { return y2_; }
  double width() const noexcept { return x2_ - x1_; }
  double height() const noexcept { return y2_ - y1_; }
  double area() const noexcept { return width() * height(); }
  Point2 center() const noexcept { return {(x1_ + x2_) / 2.0, (y1_ + y2_) / 2.0}; }

  Box translated(double dx, double dy) const { return {x1_ + dx, y1_ + dy, x2_ + dx, y2_ + dy}; }

  friend bool operator==(const Box&, const Box&) = default;

 private:
  double x1_, y1_, x2_, y2_;
};

std::optional<Box> intersection(const Box& a, const Box& b) noexcept;

/// Clips to [0, width) x [0, height); nullopt when nothing remains.
std::optional<Box> clip_to_frame(const Box& box, double width, double height) noexcept;

double iou(const Box& a, const Box& b) noexcept;

struct Polygon {
  std::vector<Point2> vertices;

  /// Shoelace area; positive for clockwise order in image coordinates.
  double signed_area() const noexcept;
  double area() const noexcept;
  /// Throws GeometryError for an empty polygon or zero-extent bounds.
  Box bounds() const;

  friend bool operator==(const Polygon&, const Polygon&) = default;
};

/// Corners of a box as a clockwise quad starting at the top-left.
Polygon box_polygon(const Box& box);

/// Oriented rectangle. Canonical form keeps the angle (degrees, measured from
/// the +x axis towards +y, i.e. clockwise on screen) in [-45, 45); a
/// quarter-turn is absorbed by swapping width and height.
struct RotatedRect {
  Point2 center;
  double width = 0.0;
  double height = 0.0;
  double angle_deg = 0.0;

  static RotatedRect canonical(Point2 center, double width, double height, double angle_deg);

  double area() const noexcept { return width * height; }
  /// Corners in construction order (not canonical order).
  std::array<Point2, 4> corners() const noexcept;
};

std::vector<Point2> convex_hull(std::span<const Point2> points);

/// Minimum-area enclosing rectangle via rotating calipers over the convex
/// hull. Throws GeometryError when the points are collinear or fewer than 3.
RotatedRect min_area_rect(std::span<const Point2> points);
RotatedRect min_area_rect(const Polygon& polygon);

/// Corner 0 minimises (y, then x); the rest follow clockwise on screen.
/// The result does not depend on the order of the input corners.
std::array<Point2, 4> order_corners(std::array<Point2, 4> corners);
std::array<Point2, 4> order_corners(const RotatedRect& rect);

/// Scale-then-rotate about `center`, then translate.
struct AffineParams {
  double theta_rot_deg = 0.0;
  double scale = 1.0;
  Point2 center;
  Point2 translation;

  static AffineParams identity(Point2 center = {}) { return {0.0, 1.0, center, {}}; }
  bool valid() const noexcept;

  friend bool operator==(const AffineParams&, const AffineParams&) = default;
};

/// Row-major 2x3 matrix [a b tx; c d ty].
struct AffineMatrix {
  double a = 1.0, b = 0.0, tx = 0.0;
  double c = 0.0, d = 1.0, ty = 0.0;

  Point2 apply(Point2 p) const noexcept { return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty}; }
  double determinant() const noexcept { return a * d - b * c; }
  /// Throws GeometryError when singular.
  AffineMatrix inverse() const;
};

AffineMatrix to_matrix(const AffineParams& params);
Point2 affine_point(const AffineParams& params, Point2 p);
Polygon affine_polygon(const AffineParams& params, const Polygon& polygon);

/// Angle, center and translation interpolate linearly; scale interpolates
/// log-linearly. Endpoints are returned exactly.
AffineParams lerp_affine(const AffineParams& a, const AffineParams& b, double s);

}  // namespace trajmine
