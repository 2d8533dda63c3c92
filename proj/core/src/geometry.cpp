#include "trajmine/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "trajmine/errors.hpp"

namespace trajmine {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

const char* to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Io: return "io";
    case ErrorCategory::Data: return "data";
  }
  return "unknown";
}

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

Box::Box(double x1, double y1, double x2, double y2) : x1_(x1), y1_(y1), x2_(x2), y2_(y2) {
  if (!std::isfinite(x1) || !std::isfinite(y1) || !std::isfinite(x2) || !std::isfinite(y2)) {
    throw GeometryError("box coordinates must be finite");
  }
  if (!(x1 < x2) || !(y1 < y2)) {
    throw GeometryError("degenerate box [" + std::to_string(x1) + ", " + std::to_string(y1) +
                        ", " + std::to_string(x2) + ", " + std::to_string(y2) + "]");
  }
}

std::optional<Box> Box::try_make(double x1, double y1, double x2, double y2) noexcept {
  if (!std::isfinite(x1) || !std::isfinite(y1) || !std::isfinite(x2) || !std::isfinite(y2) ||
      !(x1 < x2) || !(y1 < y2)) {
    return std::nullopt;
  }
  return Box(x1, y1, x2, y2);
}

std::optional<Box> intersection(const Box& a, const Box& b) noexcept {
  return Box::try_make(std::max(a.x1(), b.x1()), std::max(a.y1(), b.y1()),
                       std::min(a.x2(), b.x2()), std::min(a.y2(), b.y2()));
}

std::optional<Box> clip_to_frame(const Box& box, double width, double height) noexcept {
  return Box::try_make(std::max(box.x1(), 0.0), std::max(box.y1(), 0.0),
                       std::min(box.x2(), width), std::min(box.y2(), height));
}

double iou(const Box& a, const Box& b) noexcept {
  const double iw = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
  const double ih = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double Polygon::signed_area() const noexcept {
  const std::size_t n = vertices.size();
  if (n < 3) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    sum += vertices[j].x * vertices[i].y - vertices[i].x * vertices[j].y;
  }
  return sum / 2.0;
}

double Polygon::area() const noexcept { return std::abs(signed_area()); }

Box Polygon::bounds() const {
  if (vertices.empty()) throw GeometryError("bounds of an empty polygon");
  double x1 = vertices.front().x, x2 = x1, y1 = vertices.front().y, y2 = y1;
  for (const Point2& p : vertices) {
    x1 = std::min(x1, p.x);
    x2 = std::max(x2, p.x);
    y1 = std::min(y1, p.y);
    y2 = std::max(y2, p.y);
  }
  return Box(x1, y1, x2, y2);
}

Polygon box_polygon(const Box& box) {
  return Polygon{{{box.x1(), box.y1()}, {box.x2(), box.y1()}, {box.x2(), box.y2()}, {box.x1(), box.y2()}}};
}

RotatedRect RotatedRect::canonical(Point2 center, double width, double height, double angle_deg) {
  // Bring the angle into [-45, 45); each quarter turn swaps the sides.
  const double turns = std::floor((angle_deg + 45.0) / 90.0);
  double angle = angle_deg - 90.0 * turns;
  if (static_cast<long long>(turns) % 2 != 0) std::swap(width, height);
  // Values within rounding of +45 belong to the -45 end of the interval.
  if (angle >= 45.0 - 1e-9) {
    angle -= 90.0;
    std::swap(width, height);
  }
  if (angle < -45.0) angle = -45.0;
  return RotatedRect{center, width, height, angle};
}

std::array<Point2, 4> RotatedRect::corners() const noexcept {
  const double rad = angle_deg * kDegToRad;
  const Point2 u{std::cos(rad) * width / 2.0, std::sin(rad) * width / 2.0};
  const Point2 v{-std::sin(rad) * height / 2.0, std::cos(rad) * height / 2.0};
  return {center - u - v, center + u - v, center + u + v, center - u + v};
}

std::vector<Point2> convex_hull(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  // Andrew's monotone chain.
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point2& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

RotatedRect min_area_rect(std::span<const Point2> points) {
  const std::vector<Point2> hull = convex_hull(points);
  if (hull.size() < 3) throw GeometryError("min_area_rect: points are collinear");

  double extent = 0.0;
  for (const Point2& p : hull) extent = std::max({extent, std::abs(p.x), std::abs(p.y)});
  const Polygon hull_poly{hull};
  if (hull_poly.area() <= 1e-12 * std::max(1.0, extent * extent)) {
    throw GeometryError("min_area_rect: points are collinear");
  }

  double best_area = std::numeric_limits<double>::infinity();
  RotatedRect best;
  const std::size_t n = hull.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 edge = hull[(i + 1) % n] - hull[i];
    const double len = std::hypot(edge.x, edge.y);
    if (len == 0.0) continue;
    const Point2 u{edge.x / len, edge.y / len};
    const Point2 v{-u.y, u.x};
    double umin = std::numeric_limits<double>::infinity(), umax = -umin;
    double vmin = umin, vmax = -umin;
    for (const Point2& p : hull) {
      const double pu = p.x * u.x + p.y * u.y;
      const double pv = p.x * v.x + p.y * v.y;
      umin = std::min(umin, pu);
      umax = std::max(umax, pu);
      vmin = std::min(vmin, pv);
      vmax = std::max(vmax, pv);
    }
    const double area = (umax - umin) * (vmax - vmin);
    if (area < best_area * (1.0 - 1e-12)) {
      best_area = area;
      const double cu = (umin + umax) / 2.0;
      const double cv = (vmin + vmax) / 2.0;
      const Point2 center{cu * u.x + cv * v.x, cu * u.y + cv * v.y};
      best = RotatedRect::canonical(center, umax - umin, vmax - vmin, std::atan2(u.y, u.x) * kRadToDeg);
    }
  }
  return best;
}

RotatedRect min_area_rect(const Polygon& polygon) { return min_area_rect(std::span<const Point2>(polygon.vertices)); }

std::array<Point2, 4> order_corners(std::array<Point2, 4> corners) {
  Point2 centroid{};
  for (const Point2& p : corners) centroid = centroid + 0.25 * p;
  // With y pointing down, increasing atan2 runs clockwise on screen.
  std::sort(corners.begin(), corners.end(), [centroid](Point2 a, Point2 b) {
    return std::atan2(a.y - centroid.y, a.x - centroid.x) < std::atan2(b.y - centroid.y, b.x - centroid.x);
  });
  constexpr double kTie = 1e-9;
  std::size_t first = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    const Point2& p = corners[i];
    const Point2& q = corners[first];
    if (p.y < q.y - kTie || (std::abs(p.y - q.y) <= kTie && p.x < q.x)) first = i;
  }
  std::rotate(corners.begin(), corners.begin() + static_cast<std::ptrdiff_t>(first), corners.end());
  return corners;
}

std::array<Point2, 4> order_corners(const RotatedRect& rect) { return order_corners(rect.corners()); }

bool AffineParams::valid() const noexcept {
  return std::isfinite(theta_rot_deg) && std::isfinite(scale) && scale > 0.0 && std::isfinite(center.x) &&
         std::isfinite(center.y) && std::isfinite(translation.x) && std::isfinite(translation.y);
}

AffineMatrix AffineMatrix::inverse() const {
  const double det = determinant();
  if (det == 0.0 || !std::isfinite(det)) throw GeometryError("singular affine matrix");
  AffineMatrix inv;
  inv.a = d / det;
  inv.b = -b / det;
  inv.c = -c / det;
  inv.d = a / det;
  inv.tx = -(inv.a * tx + inv.b * ty);
  inv.ty = -(inv.c * tx + inv.d * ty);
  return inv;
}

AffineMatrix to_matrix(const AffineParams& params) {
  if (!params.valid()) throw GeometryError("invalid affine parameters");
  const double rad = params.theta_rot_deg * kDegToRad;
  const double cs = params.scale * std::cos(rad);
  const double sn = params.scale * std::sin(rad);
  AffineMatrix m;
  m.a = cs;
  m.b = -sn;
  m.c = sn;
  m.d = cs;
  const Point2 c = params.center;
  m.tx = c.x - (cs * c.x - sn * c.y) + params.translation.x;
  m.ty = c.y - (sn * c.x + cs * c.y) + params.translation.y;
  return m;
}

Point2 affine_point(const AffineParams& params, Point2 p) {
  const double rad = params.theta_rot_deg * kDegToRad;
  const double cs = std::cos(rad);
  const double sn = std::sin(rad);
  const Point2 rel = params.scale * (p - params.center);
  return Point2{cs * rel.x - sn * rel.y, sn * rel.x + cs * rel.y} + params.center + params.translation;
}

Polygon affine_polygon(const AffineParams& params, const Polygon& polygon) {
  Polygon out;
  out.vertices.reserve(polygon.vertices.size());
  for (const Point2& p : polygon.vertices) out.vertices.push_back(affine_point(params, p));
  return out;
}

AffineParams lerp_affine(const AffineParams& a, const AffineParams& b, double s) {
  if (s <= 0.0) return a;
  if (s >= 1.0) return b;
  const auto lerp = [s](double x, double y) { return (1.0 - s) * x + s * y; };
  AffineParams out;
  out.theta_rot_deg = lerp(a.theta_rot_deg, b.theta_rot_deg);
  out.scale = std::exp(lerp(std::log(a.scale), std::log(b.scale)));
  out.center = {lerp(a.center.x, b.center.x), lerp(a.center.y, b.center.y)};
  out.translation = {lerp(a.translation.x, b.translation.x), lerp(a.translation.y, b.translation.y)};
  return out;
}

}  // namespace trajmine
