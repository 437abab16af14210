#include "stbem/implicit_quad.hpp"

#include <memory>
#include <mutex>
#include <numbers>

namespace stbem {

Interval cos_range(double a, double b) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (b - a >= two_pi) return {-1.0, 1.0};
  const double ca = std::cos(a), cb = std::cos(b);
  Interval r = Interval::hull(ca, cb);
  if (two_pi * std::ceil(a / two_pi) <= b) r.hi = 1.0;
  if (two_pi * std::ceil((a - std::numbers::pi) / two_pi) + std::numbers::pi <= b) r.lo = -1.0;
  return r;
}

Interval sin_range(double a, double b) {
  return cos_range(a - 0.5 * std::numbers::pi, b - 0.5 * std::numbers::pi);
}

namespace {

GaussRule compute_gauss(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      const double p = n == 1 ? x : p1;
      dp = n * (x * p - p0) / (x * x - 1.0);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    }
    r.nodes[i] = 0.5 * (1.0 - x);
    r.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 256) throw QuadratureError("gauss_legendre: unsupported order");
  static std::mutex mutex;
  static std::vector<std::unique_ptr<GaussRule>> cache(257);
  std::lock_guard<std::mutex> lock(mutex);
  if (!cache[n]) cache[n] = std::make_unique<GaussRule>(compute_gauss(n));
  return *cache[n];
}

LevelSet LevelSet::affine(double c0, double c1, double c2) {
  LevelSet s;
  s.value = [=](const Point2& p) { return c0 + c1 * p[0] + c2 * p[1]; };
  s.gradient = [=](const Point2&) { return Point2{c1, c2}; };
  s.bounds = [=](const Box& b) -> std::optional<Interval> {
    return c0 + (c1 * Interval{b.lo[0], b.hi[0]} + c2 * Interval{b.lo[1], b.hi[1]});
  };
  s.derivative_bounds = [=](const Box&, int dir) -> std::optional<Interval> {
    const double c = dir == 0 ? c1 : c2;
    return Interval{c, c};
  };
  return s;
}

LevelSet LevelSet::from_function(std::function<double(const Point2&)> f) {
  LevelSet s;
  s.value = std::move(f);
  return s;
}

namespace {

class GenericRegion {
 public:
  explicit GenericRegion(const ImplicitRegion& r) : r_(r) {
    for (const auto& c : r.constraints)
      if (!c.value) throw QuadratureError("level set without value function");
  }

  std::size_t constraint_count() const { return r_.constraints.size(); }
  double value(std::size_t k, const Point2& p) const { return r_.constraints[k].value(p); }
  double derivative(std::size_t k, int dir, const Point2& p) const {
    const auto& c = r_.constraints[k];
    if (c.gradient) return c.gradient(p)[dir];
    const double h = 1e-7 * std::max(1.0, std::abs(p[dir]));
    Point2 a = p, b = p;
    a[dir] -= h;
    b[dir] += h;
    return (c.value(b) - c.value(a)) / (2.0 * h);
  }
  std::optional<Interval> bounds(std::size_t k, const Box& b) const {
    const auto& c = r_.constraints[k];
    return c.bounds ? c.bounds(b) : std::nullopt;
  }
  std::optional<Interval> derivative_bounds(std::size_t k, int dir, const Box& b) const {
    const auto& c = r_.constraints[k];
    return c.derivative_bounds ? c.derivative_bounds(b, dir) : std::nullopt;
  }
  double tolerance() const { return r_.tolerance; }

 private:
  const ImplicitRegion& r_;
};

}  // namespace

CellClass classify_cell(const ImplicitRegion& region, const Box& cell) {
  GenericRegion g(region);
  detail::Quadtree<GenericRegion> tree(g, QuadConfig{});
  return tree.classify(cell).cls;
}

RuleStats implicit_rule(const ImplicitRegion& region, const QuadConfig& cfg,
                        const std::function<void(const Point2&, double)>& sink) {
  GenericRegion g(region);
  detail::Quadtree<GenericRegion> tree(g, cfg);
  return tree.run(region.box, sink);
}

double integrate_implicit(const ImplicitRegion& region, const std::function<double(const Point2&)>& f,
                          const QuadConfig& cfg, RuleStats* stats) {
  double sum = 0.0;
  GenericRegion g(region);
  detail::Quadtree<GenericRegion> tree(g, cfg);
  const RuleStats s = tree.run(region.box, [&](const Point2& p, double w) { sum += w * f(p); });
  if (stats) *stats = s;
  return sum;
}

}  // namespace stbem
