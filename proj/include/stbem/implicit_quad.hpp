// High-order quadrature on implicitly defined planar domains
//   U = { p in box : g_k(p) < 0 for all k }
// using a quadtree of cells that are either entirely inside, cut by a single
// constraint whose zero set is a graph (height-function rule), or resolved
// down to depth r_max and then handled by the midpoint rule.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "stbem/errors.hpp"

namespace stbem {

using Point2 = std::array<double, 2>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval hull(double a, double b) { return a < b ? Interval{a, b} : Interval{b, a}; }
  bool definite() const { return lo > 0.0 || hi < 0.0; }
  double magnitude() const { return lo > 0.0 ? lo : (hi < 0.0 ? -hi : 0.0); }
};

inline Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator+(double c, Interval a) { return {a.lo + c, a.hi + c}; }
inline Interval operator*(double c, Interval a) { return Interval::hull(c * a.lo, c * a.hi); }
inline Interval operator*(Interval a, Interval b) {
  const double p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

// Range of cos (shift = 0) or sin (shift = pi/2 subtracted) over [a, b].
Interval cos_range(double a, double b);
Interval sin_range(double a, double b);

struct Box {
  Point2 lo{0.0, 0.0};
  Point2 hi{1.0, 1.0};

  double width(int d) const { return hi[d] - lo[d]; }
  double area() const { return width(0) * width(1); }
  Point2 center() const { return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])}; }
  bool empty() const { return !(hi[0] > lo[0]) || !(hi[1] > lo[1]); }
};

struct QuadConfig {
  int r_max = 7;
  int n_gauss = 8;
  // Graph cells whose interface slope bound |dg/dbase| w_base / (|dg/dheight| w_height)
  // exceeds this are subdivided while depth < r_max.
  double max_slope = 2.0;
  // Cells not entirely outside are split uniformly down to this depth, which
  // resolves integrands that vary on a scale finer than the root cell.
  int min_depth = 0;
};

enum class CellClass { inside, outside, graph_x1, graph_x2, ambiguous };

// Gauss-Legendre rule mapped to [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

struct RuleStats {
  std::size_t cells = 0;
  std::size_t inside_cells = 0;
  std::size_t graph_cells = 0;
  std::size_t fallback_cells = 0;
  std::size_t points = 0;
  std::size_t max_points_per_cell = 0;
};

// One constraint of a general region.  Only `value` is mandatory; gradients
// default to central differences and, without bounds, cells are classified
// from samples (corners, five points per edge, center).
struct LevelSet {
  std::function<double(const Point2&)> value;
  std::function<Point2(const Point2&)> gradient;
  std::function<std::optional<Interval>(const Box&)> bounds;
  std::function<std::optional<Interval>(const Box&, int)> derivative_bounds;

  // c0 + c1 x1 + c2 x2, with exact bounds.
  static LevelSet affine(double c0, double c1, double c2);
  static LevelSet from_function(std::function<double(const Point2&)> f);
};

struct ImplicitRegion {
  Box box;
  std::vector<LevelSet> constraints;
  double tolerance = 0.0;
};

CellClass classify_cell(const ImplicitRegion& region, const Box& cell);

double integrate_implicit(const ImplicitRegion& region, const std::function<double(const Point2&)>& f,
                          const QuadConfig& cfg, RuleStats* stats = nullptr);

// Emits the quadrature points and weights.
RuleStats implicit_rule(const ImplicitRegion& region, const QuadConfig& cfg,
                        const std::function<void(const Point2&, double)>& sink);

namespace detail {

// Safeguarded Newton on a bracket [a, b] with f(a) f(b) < 0.
template <class F, class DF>
double bracketed_root(const F& f, const DF& df, double a, double b, double fa, double fb) {
  if (fa > 0.0) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  // now f(a) < 0 < f(b) (a may exceed b)
  double x = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (fx < 0.0) a = x;
    else b = x;
    if (std::abs(b - a) <= 1e-14) return 0.5 * (a + b);
    const double d = df(x);
    double next = d != 0.0 ? x - fx / d : 0.5 * (a + b);
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (!(next > lo && next < hi)) next = 0.5 * (a + b);
    if (std::abs(next - x) <= 1e-14 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

// Region requirements:
//   std::size_t constraint_count() const;
//   double value(std::size_t k, const Point2&) const;
//   double derivative(std::size_t k, int dir, const Point2&) const;
//   std::optional<Interval> bounds(std::size_t k, const Box&) const;
//   std::optional<Interval> derivative_bounds(std::size_t k, int dir, const Box&) const;
//   double tolerance() const;
template <class Region>
class Quadtree {
 public:
  struct Decision {
    CellClass cls = CellClass::ambiguous;
    std::size_t active = 0;
    int height = -1;
  };

  Quadtree(const Region& region, const QuadConfig& cfg)
      : region_(region), cfg_(cfg), rule_(gauss_legendre(cfg.n_gauss)) {
    if (cfg.n_gauss < 1 || cfg.r_max < 0 || cfg.min_depth < 0) throw QuadratureError("invalid quadrature configuration");
  }

  template <class Sink>
  RuleStats run(const Box& root, Sink&& sink) {
    stats_ = RuleStats{};
    if (!root.empty()) visit(root, 0, sink);
    return stats_;
  }

  Decision classify(const Box& cell) const {
    Decision d;
    const std::size_t m = region_.constraint_count();
    std::size_t n_active = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const Status s = status(k, cell);
      if (s == Status::excluded) {
        d.cls = CellClass::outside;
        return d;
      }
      if (s == Status::active) {
        ++n_active;
        d.active = k;
      }
    }
    if (n_active == 0) {
      d.cls = CellClass::inside;
      return d;
    }
    if (n_active > 1) return d;
    double best = 0.0;
    for (int dir = 0; dir < 2; ++dir) {
      const double s = monotone_strength(d.active, dir, cell);
      if (s > best) {
        best = s;
        d.height = dir;
      }
    }
    if (d.height >= 0) d.cls = d.height == 1 ? CellClass::graph_x1 : CellClass::graph_x2;
    return d;
  }

 private:
  enum class Status { satisfied, excluded, active };

  Status status(std::size_t k, const Box& cell) const {
    const double tol = region_.tolerance();
    double lo, hi;
    if (auto b = region_.bounds(k, cell)) {
      lo = b->lo;
      hi = b->hi;
    } else {
      lo = std::numeric_limits<double>::infinity();
      hi = -lo;
      double slope = 0.0;
      for_each_sample(cell, [&](const Point2& p) {
        const double v = region_.value(k, p);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        slope = std::max(slope, std::hypot(region_.derivative(k, 0, p), region_.derivative(k, 1, p)));
      });
      // no point of the cell is farther than this from a sample
      const double margin = slope * 0.3 * std::hypot(cell.width(0), cell.width(1));
      lo -= margin;
      hi += margin;
    }
    if (lo >= -tol) return Status::excluded;
    if (hi <= tol) return Status::satisfied;
    return Status::active;
  }

  // min |d g / d x_dir| * width, or 0 if the sign is not definite
  double monotone_strength(std::size_t k, int dir, const Box& cell) const {
    if (auto b = region_.derivative_bounds(k, dir, cell)) return b->magnitude() * cell.width(dir);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for_each_sample(cell, [&](const Point2& p) {
      const double v = region_.derivative(k, dir, p);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    });
    return Interval{lo, hi}.magnitude() * cell.width(dir);
  }

  double slope(const Decision& d, const Box& cell) const {
    const int base = 1 - d.height;
    double num;
    if (auto b = region_.derivative_bounds(d.active, base, cell)) {
      num = std::max(std::abs(b->lo), std::abs(b->hi));
    } else {
      num = 0.0;
      for_each_sample(cell, [&](const Point2& p) { num = std::max(num, std::abs(region_.derivative(d.active, base, p))); });
    }
    return num * cell.width(base) / monotone_strength(d.active, d.height, cell);
  }

  template <class F>
  static void for_each_sample(const Box& c, F&& f) {
    // corners, five interior points per edge, center
    for (int i = 0; i <= 6; ++i) {
      const double s = i / 6.0;
      const double u = c.lo[0] + s * c.width(0), v = c.lo[1] + s * c.width(1);
      f(Point2{u, c.lo[1]});
      f(Point2{u, c.hi[1]});
      if (i > 0 && i < 6) {
        f(Point2{c.lo[0], v});
        f(Point2{c.hi[0], v});
      }
    }
    f(c.center());
  }

  template <class Sink>
  void emit(const Point2& p, double w, Sink& sink, std::size_t& count) {
    sink(p, w);
    ++count;
  }

  template <class Sink>
  void visit(const Box& cell, int depth, Sink& sink) {
    ++stats_.cells;
    const Decision d = classify(cell);
    if (d.cls == CellClass::outside) return;
    if (depth < cfg_.min_depth && depth < cfg_.r_max) {
      split(cell, depth, sink);
      return;
    }
    if (d.cls == CellClass::inside) {
      ++stats_.inside_cells;
      std::size_t count = 0;
      tensor(cell, sink, count);
      finish(count);
      return;
    }
    if (d.cls != CellClass::ambiguous && (depth >= cfg_.r_max || slope(d, cell) <= cfg_.max_slope)) {
      std::size_t count = 0;
      if (graph_rule(cell, d.active, d.height, sink, count)) {
        ++stats_.graph_cells;
        finish(count);
        return;
      }
    }
    if (depth >= cfg_.r_max) {
      ++stats_.fallback_cells;
      const Point2 c = cell.center();
      for (std::size_t k = 0; k < region_.constraint_count(); ++k)
        if (!(region_.value(k, c) < 0.0)) return;
      std::size_t count = 0;
      emit(c, cell.area(), sink, count);
      finish(count);
      return;
    }
    split(cell, depth, sink);
  }

  template <class Sink>
  void split(const Box& cell, int depth, Sink& sink) {
    const Point2 m = cell.center();
    visit(Box{{cell.lo[0], cell.lo[1]}, {m[0], m[1]}}, depth + 1, sink);
    visit(Box{{m[0], cell.lo[1]}, {cell.hi[0], m[1]}}, depth + 1, sink);
    visit(Box{{cell.lo[0], m[1]}, {m[0], cell.hi[1]}}, depth + 1, sink);
    visit(Box{{m[0], m[1]}, {cell.hi[0], cell.hi[1]}}, depth + 1, sink);
  }

  void finish(std::size_t count) {
    stats_.points += count;
    stats_.max_points_per_cell = std::max(stats_.max_points_per_cell, count);
  }

  template <class Sink>
  void tensor(const Box& c, Sink& sink, std::size_t& count) {
    const auto& x = rule_.nodes;
    const auto& w = rule_.weights;
    const double a = c.area();
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < x.size(); ++j)
        emit(Point2{c.lo[0] + x[i] * c.width(0), c.lo[1] + x[j] * c.width(1)}, a * w[i] * w[j], sink, count);
  }

  static Point2 make_point(int height, double b, double h) {
    Point2 p;
    p[1 - height] = b;
    p[height] = h;
    return p;
  }

  // Root of g(b, h_edge) in (b_lo, b_hi): returns false if the edge cannot be
  // certified to carry at most one root.
  bool edge_root(std::size_t k, int height, double b_lo, double b_hi, double h, std::optional<double>& root) const {
    root.reset();
    const int base = 1 - height;
    const double tol = region_.tolerance();
    auto g = [&](double b) { return region_.value(k, make_point(height, b, h)); };
    auto dg = [&](double b) { return region_.derivative(k, base, make_point(height, b, h)); };
    Box edge;
    edge.lo = make_point(height, b_lo, h);
    edge.hi = make_point(height, b_hi, h);
    if (auto vb = region_.bounds(k, edge)) {
      if (vb->hi <= tol || vb->lo >= -tol) return true;
      auto db = region_.derivative_bounds(k, base, edge);
      if (!db || !db->definite()) return false;
      const double fa = g(b_lo), fb = g(b_hi);
      if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) root = bracketed_root(g, dg, b_lo, b_hi, fa, fb);
      return true;
    }
    constexpr int n = 7;
    double prev_b = b_lo, prev_v = g(b_lo);
    int changes = 0;
    for (int i = 1; i <= n; ++i) {
      const double b = b_lo + (b_hi - b_lo) * i / n;
      const double v = g(b);
      if ((prev_v < 0.0 && v > 0.0) || (prev_v > 0.0 && v < 0.0)) {
        ++changes;
        root = bracketed_root(g, dg, prev_b, b, prev_v, v);
      }
      prev_b = b;
      prev_v = v;
    }
    return changes <= 1;
  }

  template <class Sink>
  bool graph_rule(const Box& cell, std::size_t k, int height, Sink& sink, std::size_t& count) {
    const int base = 1 - height;
    const double b_lo = cell.lo[base], b_hi = cell.hi[base];
    const double h_lo = cell.lo[height], h_hi = cell.hi[height];
    std::optional<double> r_lo, r_hi;
    if (!edge_root(k, height, b_lo, b_hi, h_lo, r_lo)) return false;
    if (!edge_root(k, height, b_lo, b_hi, h_hi, r_hi)) return false;

    double cuts[4];
    int nc = 0;
    cuts[nc++] = b_lo;
    if (r_lo) cuts[nc++] = *r_lo;
    if (r_hi) cuts[nc++] = *r_hi;
    cuts[nc++] = b_hi;
    std::sort(cuts, cuts + nc);

    const double increasing = region_.derivative(k, height, cell.center()) > 0.0;
    const auto& x = rule_.nodes;
    const auto& w = rule_.weights;
    auto g = [&](double b, double h) { return region_.value(k, make_point(height, b, h)); };

    for (int piece = 0; piece + 1 < nc; ++piece) {
      const double p = cuts[piece], q = cuts[piece + 1];
      if (!(q > p)) continue;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double b = p + x[i] * (q - p);
        const double wb = w[i] * (q - p);
        const double v_lo = g(b, h_lo), v_hi = g(b, h_hi);
        double lo = h_lo, hi = h_hi;
        const bool full = increasing ? v_hi < 0.0 : v_lo < 0.0;
        const bool none = increasing ? v_lo >= 0.0 : v_hi >= 0.0;
        if (none) continue;
        if (!full) {
          auto gh = [&](double h) { return g(b, h); };
          auto dgh = [&](double h) { return region_.derivative(k, height, make_point(height, b, h)); };
          const double r = bracketed_root(gh, dgh, h_lo, h_hi, v_lo, v_hi);
          if (increasing) hi = r;
          else lo = r;
        }
        const double len = hi - lo;
        if (!(len > 0.0)) continue;
        for (std::size_t j = 0; j < x.size(); ++j)
          emit(make_point(height, b, lo + x[j] * len), wb * w[j] * len, sink, count);
      }
    }
    return true;
  }

  const Region& region_;
  QuadConfig cfg_;
  const GaussRule& rule_;
  RuleStats stats_;
};

}  // namespace detail

}  // namespace stbem
