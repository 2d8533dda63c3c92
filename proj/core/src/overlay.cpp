#include "trajmine/dataset_io.hpp"

#include <cmath>
#include <cstdlib>

#include "trajmine/errors.hpp"

namespace trajmine {

Rgb OverlayStyle::color(OverlayKind kind) const noexcept {
  switch (kind) {
    case OverlayKind::Detection: return detection;
    case OverlayKind::Tracking: return tracking;
    case OverlayKind::HardPositive: return hard_positive;
    case OverlayKind::HardNegative: return hard_negative;
  }
  return detection;
}

std::array<Point2, 4> overlay_quad(const Polygon& shape) {
  if (shape.vertices.size() == 4) {
    return {shape.vertices[0], shape.vertices[1], shape.vertices[2], shape.vertices[3]};
  }
  try {
    return order_corners(min_area_rect(shape));
  } catch (const GeometryError&) {
    const Polygon q = box_polygon(shape.bounds());
    return {q.vertices[0], q.vertices[1], q.vertices[2], q.vertices[3]};
  }
}

namespace {

Image to_rgb(const Image& img) {
  if (img.channels == 3) return img;
  Image out(img.width, img.height, 3);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y);
  return out;
}

void plot(Image& img, int x, int y, const Rgb& rgb) {
  if (!img.contains(x, y)) return;
  for (int c = 0; c < 3; ++c) img.at(x, y, c) = rgb[c];
}

// Bresenham; off-canvas pixels are skipped.
void draw_line(Image& img, Point2 a, Point2 b, const Rgb& rgb) {
  long x0 = std::lround(a.x), y0 = std::lround(a.y);
  const long x1 = std::lround(b.x), y1 = std::lround(b.y);
  const long dx = std::labs(x1 - x0), dy = -std::labs(y1 - y0);
  const long sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  long err = dx + dy;
  for (;;) {
    plot(img, static_cast<int>(x0), static_cast<int>(y0), rgb);
    if (x0 == x1 && y0 == y1) break;
    const long e2 = 2 * err;
    if (e2 >= dy) { err += dy; x0 += sx; }
    if (e2 <= dx) { err += dx; y0 += sy; }
  }
}

}  // namespace

Image render_overlay(const Image& frame, std::span<const OverlayItem> items, const OverlayStyle& style) {
  if (items.empty()) return frame;
  Image out = to_rgb(frame);
  for (const OverlayItem& item : items) {
    if (item.shape.vertices.empty()) continue;
    const auto q = overlay_quad(item.shape);
    const Rgb rgb = style.color(item.kind);
    for (int i = 0; i < 4; ++i) draw_line(out, q[i], q[(i + 1) % 4], rgb);
  }
  return out;
}

std::vector<OverlayItem> overlay_items(const PseudoFrame& frame) {
  std::vector<OverlayItem> items;
  for (const PseudoLabel& l : frame.labels) {
    const OverlayKind kind = l.provenance == Provenance::HardPositive ? OverlayKind::HardPositive : OverlayKind::Detection;
    items.push_back({l.mask.vertices.empty() ? box_polygon(l.box) : l.mask, kind});
  }
  for (const Detection& d : frame.hard_negatives) {
    items.push_back({d.mask.vertices.empty() ? box_polygon(d.box) : d.mask, OverlayKind::HardNegative});
  }
  return items;
}

std::vector<OverlayItem> overlay_items(std::span<const Trajectory> trajectories, std::int64_t frame) {
  std::vector<OverlayItem> items;
  for (const Trajectory& t : trajectories) {
    for (const TrajectoryEntry& e : t.entries) {
      if (e.frame != frame) continue;
      const OverlayKind kind = e.kind == EntryKind::Detection ? OverlayKind::Detection : OverlayKind::Tracking;
      items.push_back({e.mask ? *e.mask : box_polygon(e.box), kind});
    }
  }
  return items;
}

}  // namespace trajmine
