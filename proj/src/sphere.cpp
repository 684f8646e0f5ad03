#include "gtv/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gtv/errors.hpp"

namespace gtv {

namespace {

constexpr double kDeg = kPi / 180.0;

}  // namespace

double sphere_area(int d) {
  // a_d = 2 pi^{d/2} / Gamma(d/2)
  if (d < 2) throw InputError("sphere_area: dimension must be >= 2");
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

Direction::Direction(double x, double y, double z) {
  const double n = std::sqrt(x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) throw InputError("Direction: zero or non-finite vector");
  v_ = {x / n, y / n, z / n};
}

Direction Direction::from_lonlat(double lon_deg, double lat_deg) {
  if (!(lat_deg >= -90.0 && lat_deg <= 90.0))
    throw InputError("latitude out of range [-90, 90]: " + std::to_string(lat_deg));
  if (!std::isfinite(lon_deg)) throw InputError("longitude is not finite");
  const double lon = lon_deg * kDeg;
  const double lat = lat_deg * kDeg;
  return Direction(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat));
}

double Direction::lon_deg() const { return std::atan2(v_[1], v_[0]) / kDeg; }

double Direction::lat_deg() const { return std::asin(std::clamp(v_[2], -1.0, 1.0)) / kDeg; }

double chord_distance(const Direction& r, const Direction& s) { return chord_from_inner(r.dot(s)); }

double chord_from_inner(double t) { return std::sqrt(std::clamp(2.0 - 2.0 * t, 0.0, 4.0)); }

double inner_from_chord(double chord) { return 1.0 - 0.5 * chord * chord; }

// ---------------------------------------------------------------------------

SpatialIndex::SpatialIndex(std::span<const Direction> points) : points_(points.begin(), points.end()) {
  const std::size_t n = std::max<std::size_t>(points_.size(), 1);
  cell_angle_ = std::clamp(std::sqrt(4.0 * kPi / static_cast<double>(n)), 1e-4, kPi);
  const auto n_bands = static_cast<std::size_t>(std::ceil(kPi / cell_angle_));
  const double h = kPi / static_cast<double>(n_bands);

  std::size_t cells = 0;
  bands_.reserve(n_bands);
  for (std::size_t b = 0; b < n_bands; ++b) {
    const double lo = -0.5 * kPi + h * static_cast<double>(b);
    const double hi = (b + 1 == n_bands) ? 0.5 * kPi : lo + h;
    const double cos_max = (lo <= 0.0 && hi >= 0.0) ? 1.0 : std::max(std::cos(lo), std::cos(hi));
    const auto sectors = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(2.0 * kPi * cos_max / cell_angle_)));
    bands_.push_back({lo, hi, sectors, cells});
    cells += sectors;
  }

  std::vector<std::size_t> cell_of(points_.size());
  std::vector<std::size_t> counts(cells, 0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    const double lat = std::asin(std::clamp(p.z(), -1.0, 1.0));
    const double lon = std::atan2(p.y(), p.x());
    const Band& band = bands_[band_of(lat)];
    cell_of[i] = band.first_cell + sector_of(band, lon);
    ++counts[cell_of[i]];
  }
  cell_start_.assign(cells + 1, 0);
  for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] = cell_start_[c] + counts[c];
  cell_items_.resize(points_.size());
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) cell_items_[fill[cell_of[i]]++] = i;
}

std::size_t SpatialIndex::band_of(double lat) const {
  const double h = kPi / static_cast<double>(bands_.size());
  const auto b = static_cast<std::ptrdiff_t>(std::floor((lat + 0.5 * kPi) / h));
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(bands_.size()) - 1));
}

std::size_t SpatialIndex::sector_of(const Band& b, double lon) const {
  const double w = 2.0 * kPi / static_cast<double>(b.n_sectors);
  const auto s = static_cast<std::ptrdiff_t>(std::floor((lon + kPi) / w));
  const auto ns = static_cast<std::ptrdiff_t>(b.n_sectors);
  return static_cast<std::size_t>(((s % ns) + ns) % ns);
}

void SpatialIndex::for_each_within(const Direction& p, double chord,
                                   const std::function<void(std::size_t, double)>& fn) const {
  if (points_.empty() || chord < 0.0) return;
  const double t_min = inner_from_chord(std::min(chord, 2.0));
  const double alpha = 2.0 * std::asin(std::min(chord, 2.0) / 2.0) + 1e-9;
  const double lat = std::asin(std::clamp(p.z(), -1.0, 1.0));
  const double lon = std::atan2(p.y(), p.x());

  const bool wraps_pole = (lat + alpha >= 0.5 * kPi) || (lat - alpha <= -0.5 * kPi);
  double dlon = kPi;
  if (!wraps_pole) {
    const double s = std::sin(alpha) / std::cos(lat);
    if (s < 1.0) dlon = std::asin(s) + 1e-9;
  }

  const std::size_t b_lo = band_of(std::max(lat - alpha, -0.5 * kPi));
  const std::size_t b_hi = band_of(std::min(lat + alpha, 0.5 * kPi));
  for (std::size_t b = b_lo; b <= b_hi; ++b) {
    const Band& band = bands_[b];
    const auto ns = static_cast<std::ptrdiff_t>(band.n_sectors);
    std::ptrdiff_t s_first = 0, count = ns;
    if (dlon < kPi) {
      const double w = 2.0 * kPi / static_cast<double>(band.n_sectors);
      s_first = static_cast<std::ptrdiff_t>(std::floor((lon - dlon + kPi) / w));
      const auto s_last = static_cast<std::ptrdiff_t>(std::floor((lon + dlon + kPi) / w));
      count = std::min(ns, s_last - s_first + 1);
    }
    for (std::ptrdiff_t k = 0; k < count; ++k) {
      const std::size_t s = static_cast<std::size_t>((((s_first + k) % ns) + ns) % ns);
      const std::size_t cell = band.first_cell + s;
      for (std::size_t it = cell_start_[cell]; it < cell_start_[cell + 1]; ++it) {
        const std::size_t i = cell_items_[it];
        const double t = p.dot(points_[i]);
        if (t >= t_min) fn(i, t);
      }
    }
  }
}

double SpatialIndex::nearest_chord(const Direction& p) const {
  if (points_.empty()) throw InputError("nearest_chord: empty index");
  double radius = 2.0 * std::sin(0.5 * cell_angle_) * 1.5;
  for (;;) {
    radius = std::min(radius, 2.0);
    double best_t = -std::numeric_limits<double>::infinity();
    for_each_within(p, radius, [&](std::size_t, double t) { best_t = std::max(best_t, t); });
    if (best_t > -std::numeric_limits<double>::infinity()) {
      const double best = chord_from_inner(best_t);
      if (best <= radius || radius >= 2.0) return best;
    }
    if (radius >= 2.0) return 2.0;
    radius *= 2.0;
  }
}

// ---------------------------------------------------------------------------

KnotSet::KnotSet(std::vector<Direction> knots) : knots_(std::move(knots)) {
  index_ = std::make_shared<const SpatialIndex>(knots_);
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const auto& a = knots_[i].coords();
    index_->for_each_within(knots_[i], 1e-6, [&](std::size_t j, double) {
      if (j == i) return;
      const auto& b = knots_[j].coords();
      const double d = std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
      if (d <= kMinSeparation)
        throw InputError("KnotSet: knots " + std::to_string(std::min(i, j)) + " and " +
                         std::to_string(std::max(i, j)) + " coincide");
    });
  }
}

KnotSet KnotSet::with_nodal_width(double width) const {
  KnotSet out = *this;
  out.nodal_width_ = width;
  return out;
}

// ---------------------------------------------------------------------------

PatchBounds::PatchBounds(double lon_min_, double lon_max_, double lat_min_, double lat_max_)
    : lon_min(lon_min_), lon_max(lon_max_), lat_min(lat_min_), lat_max(lat_max_) {
  if (!(lon_min < lon_max && lon_max <= lon_min + 360.0))
    throw InputError("PatchBounds: need lon_min < lon_max <= lon_min + 360");
  if (!(lat_min >= -90.0 && lat_min < lat_max && lat_max <= 90.0))
    throw InputError("PatchBounds: need -90 <= lat_min < lat_max <= 90");
}

double PatchBounds::area() const {
  return (lon_max - lon_min) * kDeg * (std::sin(lat_max * kDeg) - std::sin(lat_min * kDeg));
}

Direction PatchBounds::centre() const {
  return Direction::from_lonlat(0.5 * (lon_min + lon_max), 0.5 * (lat_min + lat_max));
}

std::array<Direction, 4> PatchBounds::corners() const {
  return {Direction::from_lonlat(lon_min, lat_min), Direction::from_lonlat(lon_max, lat_min),
          Direction::from_lonlat(lon_min, lat_max), Direction::from_lonlat(lon_max, lat_max)};
}

// ---------------------------------------------------------------------------

KnotSet fibonacci_lattice(std::size_t n) {
  if (n == 0) throw InputError("fibonacci_lattice: N must be >= 1");
  const double golden = 1.0 - 2.0 / (1.0 + std::sqrt(5.0));
  std::vector<Direction> pts;
  pts.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const double k = static_cast<double>(i);
    const double phi = 2.0 * kPi * k * golden;
    const double theta = std::acos(std::clamp(1.0 - 2.0 * k / static_cast<double>(n), -1.0, 1.0));
    pts.emplace_back(std::cos(phi) * std::sin(theta), std::sin(phi) * std::sin(theta), std::cos(theta));
  }
  return KnotSet(std::move(pts));
}

double nodal_width(const KnotSet& knots, std::size_t probe_resolution) {
  if (knots.empty()) throw InputError("nodal_width: empty knot set");
  if (probe_resolution == 0) throw InputError("nodal_width: probe_resolution must be positive");
  const double golden = 1.0 - 2.0 / (1.0 + std::sqrt(5.0));
  const auto np = static_cast<double>(probe_resolution);
  double widest = 0.0;
  // Probes are generated on the fly; building a KnotSet for 10^5+ points is wasteful.
  for (std::size_t i = 1; i <= probe_resolution; ++i) {
    const double k = static_cast<double>(i);
    const double phi = 2.0 * kPi * k * golden;
    const double theta = std::acos(std::clamp(1.0 - 2.0 * k / np, -1.0, 1.0));
    const Direction probe(std::cos(phi) * std::sin(theta), std::sin(phi) * std::sin(theta), std::cos(theta));
    widest = std::max(widest, knots.index().nearest_chord(probe));
  }
  return widest;
}

double nodal_width(const KnotSet& knots) { return nodal_width(knots, 100 * std::max<std::size_t>(knots.size(), 1)); }

std::vector<PatchBounds> equal_angle_patch_grid(int n_lat, int n_lon) {
  if (n_lat < 1 || n_lon < 1) throw InputError("equal_angle_patch_grid: counts must be >= 1");
  std::vector<PatchBounds> out;
  out.reserve(static_cast<std::size_t>(n_lat) * static_cast<std::size_t>(n_lon));
  const double dlat = 180.0 / n_lat;
  const double dlon = 360.0 / n_lon;
  for (int i = 0; i < n_lat; ++i) {
    const double lat0 = -90.0 + dlat * i;
    const double lat1 = (i + 1 == n_lat) ? 90.0 : -90.0 + dlat * (i + 1);
    for (int j = 0; j < n_lon; ++j) {
      const double lon0 = -180.0 + dlon * j;
      const double lon1 = (j + 1 == n_lon) ? 180.0 : -180.0 + dlon * (j + 1);
      out.emplace_back(lon0, lon1, lat0, lat1);
    }
  }
  return out;
}

}  // namespace gtv
