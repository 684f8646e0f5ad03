#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace gtv {

inline constexpr double kPi = std::numbers::pi;

/// Surface area a_d of the unit sphere S^{d-1}; only d = 2 and d = 3 are needed.
double sphere_area(int d);

/// Unit vector on S^2. The constructor normalises its input.
class Direction {
 public:
  Direction() = default;
  Direction(double x, double y, double z);

  static Direction from_lonlat(double lon_deg, double lat_deg);

  double x() const { return v_[0]; }
  double y() const { return v_[1]; }
  double z() const { return v_[2]; }
  const std::array<double, 3>& coords() const { return v_; }

  double dot(const Direction& o) const {
    return v_[0] * o.v_[0] + v_[1] * o.v_[1] + v_[2] * o.v_[2];
  }
  Direction antipode() const { return Direction(-v_[0], -v_[1], -v_[2]); }

  double lon_deg() const;
  double lat_deg() const;

 private:
  std::array<double, 3> v_{1.0, 0.0, 0.0};
};

/// Euclidean distance between two points of the sphere, sqrt(2 - 2<r,s>) clamped to [0, 2].
double chord_distance(const Direction& r, const Direction& s);
double chord_from_inner(double t);
double inner_from_chord(double chord);

/// Bucket grid over latitude bands and longitude sectors for range queries.
class SpatialIndex {
 public:
  explicit SpatialIndex(std::span<const Direction> points);

  /// Calls fn(index, <p, point>) for every indexed point within `chord` of p.
  void for_each_within(const Direction& p, double chord,
                       const std::function<void(std::size_t, double)>& fn) const;

  /// Chord distance from p to the closest indexed point.
  double nearest_chord(const Direction& p) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Band {
    double lat_lo, lat_hi;  // radians
    std::size_t n_sectors;
    std::size_t first_cell;
  };

  std::size_t band_of(double lat) const;
  std::size_t sector_of(const Band& b, double lon) const;

  std::vector<Direction> points_;
  std::vector<Band> bands_;
  std::vector<std::size_t> cell_start_;  // CSR offsets into cell_items_
  std::vector<std::size_t> cell_items_;
  double cell_angle_ = kPi;
};

/// Ordered set of pairwise distinct knots.
class KnotSet {
 public:
  static constexpr double kMinSeparation = 1e-10;

  KnotSet() = default;
  explicit KnotSet(std::vector<Direction> knots);

  std::size_t size() const { return knots_.size(); }
  bool empty() const { return knots_.empty(); }
  const Direction& operator[](std::size_t i) const { return knots_[i]; }
  const std::vector<Direction>& knots() const { return knots_; }
  std::vector<Direction>::const_iterator begin() const { return knots_.begin(); }
  std::vector<Direction>::const_iterator end() const { return knots_.end(); }

  const SpatialIndex& index() const { return *index_; }

  std::optional<double> nodal_width_estimate() const { return nodal_width_; }
  KnotSet with_nodal_width(double width) const;

 private:
  std::vector<Direction> knots_;
  std::shared_ptr<const SpatialIndex> index_;
  std::optional<double> nodal_width_;
};

/// Longitude/latitude rectangle in degrees.
struct PatchBounds {
  double lon_min, lon_max, lat_min, lat_max;

  PatchBounds(double lon_min, double lon_max, double lat_min, double lat_max);

  /// Exact spherical area in steradians.
  double area() const;
  Direction centre() const;
  std::array<Direction, 4> corners() const;
};

/// Spiral lattice r_n with phi_n = 2 pi n (1 - 2/(1+sqrt5)), theta_n = acos(1 - 2n/N), n = 1..N.
KnotSet fibonacci_lattice(std::size_t n);

/// Brute-force lower bound on the nodal width: max over a Fibonacci probe set of
/// the chord distance to the closest knot.
double nodal_width(const KnotSet& knots, std::size_t probe_resolution);
double nodal_width(const KnotSet& knots);  // 100 probes per knot

/// n_lat x n_lon equal-angle tiling of [-180, 180] x [-90, 90].
std::vector<PatchBounds> equal_angle_patch_grid(int n_lat, int n_lon);

}  // namespace gtv
