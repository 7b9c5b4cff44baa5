#include "splinelab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "splinelab/error.hpp"
#include "splinelab/rng.hpp"

namespace splinelab {

double Rectangle::volume() const noexcept {
  double v = 1.0;
  for (const auto& s : sides) v *= s.length();
  return v;
}

double Rectangle::diameter() const noexcept {
  double sum = 0.0;
  for (const auto& s : sides) sum += s.length() * s.length();
  return std::sqrt(sum);
}

bool Rectangle::contains(std::span<const double> point) const noexcept {
  if (point.size() != sides.size()) return false;
  for (std::size_t mu = 0; mu < sides.size(); ++mu) {
    if (!sides[mu].contains(point[mu])) return false;
  }
  return true;
}

KnotVector KnotVector::validate(std::span<const double> raw, int order) {
  if (order < 1) throw Error(ErrorCode::BadBoundary, "order must be >= 1");
  if (raw.empty()) throw Error(ErrorCode::BadBoundary, "empty knot sequence");
  const auto k = static_cast<std::size_t>(order);
  for (std::size_t i = 0; i + 1 < raw.size(); ++i) {
    if (!(raw[i] <= raw[i + 1])) {
      throw Error(ErrorCode::NotSorted, "knot " + std::to_string(i + 2) + " decreases");
    }
  }
  if (raw.size() < 2 * k) {
    throw Error(ErrorCode::BadBoundary, "need at least 2k knots");
  }
  const std::size_t n = raw.size() - k;
  for (std::size_t i = 0; i < k; ++i) {
    if (raw[i] != 0.0 || raw[n + i] != 1.0) {
      throw Error(ErrorCode::BadBoundary, "boundary knots must repeat 0 and 1 exactly k times");
    }
  }
  for (std::size_t i = 0; i + k < raw.size(); ++i) {
    if (!(raw[i] < raw[i + k])) {
      throw Error(ErrorCode::MultiplicityTooHigh,
                  "knot " + std::to_string(i + 1) + " has multiplicity above k");
    }
  }
  return KnotVector(std::vector<double>(raw.begin(), raw.end()), order);
}

std::vector<double> KnotVector::breakpoints() const {
  std::vector<double> out;
  for (double t : knots_) {
    if (out.empty() || out.back() != t) out.push_back(t);
  }
  return out;
}

std::size_t KnotVector::span(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::OutOfDomain, "x = " + std::to_string(x) + " outside [0,1]");
  }
  const std::size_t k = static_cast<std::size_t>(order_);
  const std::size_t n = size();
  if (x >= 1.0) {
    std::size_t s = n - 1;
    while (knots_[s] == knots_[s + 1]) --s;
    return s;
  }
  // first knot strictly greater than x, among t_k .. t_n
  const auto first = knots_.begin() + static_cast<std::ptrdiff_t>(k);
  const auto last = knots_.begin() + static_cast<std::ptrdiff_t>(n + 1);
  const auto it = std::upper_bound(first, last, x);
  return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

double KnotVector::diameter() const noexcept {
  double h = 0.0;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) h = std::max(h, knots_[i + 1] - knots_[i]);
  return h;
}

std::vector<double> KnotVector::greville() const {
  const std::size_t k = static_cast<std::size_t>(order_);
  std::vector<double> g(size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (k == 1) {
      g[i] = 0.5 * (knots_[i] + knots_[i + 1]);
      continue;
    }
    double s = 0.0;
    for (std::size_t r = 1; r < k; ++r) s += knots_[i + r];
    g[i] = s / static_cast<double>(k - 1);
  }
  return g;
}

IndexIntervals intervals(const KnotVector& kv, std::size_t i, std::size_t j) {
  const std::size_t n = kv.size();
  if (i >= n || j >= n) {
    throw Error(ErrorCode::IndexOutOfRange, "basis index outside [0, n)");
  }
  const auto k = static_cast<std::size_t>(kv.order());
  const std::size_t lo = std::min(i, j);
  const std::size_t hi = std::max(i, j);
  return IndexIntervals{
      Interval{kv.knot(i), kv.knot(i + 1)},
      Interval{kv.knot(lo), kv.knot(hi + 1)},
      Interval{kv.knot(lo), kv.knot(hi + k)},
  };
}

TensorMesh::TensorMesh(std::vector<KnotVector> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw Error(ErrorCode::DimensionMismatch, "mesh needs at least one axis");
}

std::vector<std::size_t> TensorMesh::shape() const {
  std::vector<std::size_t> s;
  s.reserve(axes_.size());
  for (const auto& a : axes_) s.push_back(a.size());
  return s;
}

double mesh_diameter(const TensorMesh& mesh) noexcept {
  double h = 0.0;
  for (const auto& a : mesh.axes()) h = std::max(h, a.diameter());
  return h;
}

namespace {

void check_multi(const TensorMesh& mesh, std::span<const std::size_t> i) {
  if (i.size() != mesh.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "multi-index has wrong dimension");
  }
}

}  // namespace

Rectangle cell_rectangle(const TensorMesh& mesh, std::span<const std::size_t> i) {
  check_multi(mesh, i);
  Rectangle r;
  for (std::size_t mu = 0; mu < mesh.dim(); ++mu) {
    r.sides.push_back(intervals(mesh.axis(mu), i[mu], i[mu]).cell);
  }
  return r;
}

Rectangle hull_rectangle(const TensorMesh& mesh, std::span<const std::size_t> i,
                         std::span<const std::size_t> j) {
  check_multi(mesh, i);
  check_multi(mesh, j);
  Rectangle r;
  for (std::size_t mu = 0; mu < mesh.dim(); ++mu) {
    r.sides.push_back(intervals(mesh.axis(mu), i[mu], j[mu]).hull);
  }
  return r;
}

Rectangle support_rectangle(const TensorMesh& mesh, std::span<const std::size_t> i,
                            std::span<const std::size_t> j) {
  check_multi(mesh, i);
  check_multi(mesh, j);
  Rectangle r;
  for (std::size_t mu = 0; mu < mesh.dim(); ++mu) {
    r.sides.push_back(intervals(mesh.axis(mu), i[mu], j[mu]).support);
  }
  return r;
}

MeshKind parse_mesh_kind(const std::string& name) {
  if (name == "uniform") return MeshKind::Uniform;
  if (name == "random") return MeshKind::Random;
  if (name == "geometric") return MeshKind::Geometric;
  throw Error(ErrorCode::UsageError, "unknown mesh kind '" + name + "'");
}

std::string to_string(MeshKind kind) {
  switch (kind) {
    case MeshKind::Uniform: return "uniform";
    case MeshKind::Random: return "random";
    case MeshKind::Geometric: return "geometric";
  }
  return "unknown";
}

namespace {

// Interior breakpoints 0 = x_0 < x_1 < ... < x_m = 1 with cell lengths in
// geometric progression. Computed as (r^c - 1) / (r^m - 1), rescaled for r > 1
// so that large m does not overflow.
std::vector<double> geometric_breakpoints(std::size_t cells, double ratio) {
  std::vector<double> x(cells + 1);
  x.front() = 0.0;
  x.back() = 1.0;
  const double m = static_cast<double>(cells);
  if (ratio == 1.0) {
    for (std::size_t c = 1; c < cells; ++c) x[c] = static_cast<double>(c) / m;
    return x;
  }
  const double lr = std::log(ratio);
  if (m * std::abs(lr) < 600.0) {
    // small enough to sum the cell lengths r^c directly
    std::vector<double> partial(cells + 1, 0.0);
    double len = 1.0;
    for (std::size_t c = 0; c < cells; ++c) {
      partial[c + 1] = partial[c] + len;
      len *= ratio;
    }
    for (std::size_t c = 1; c < cells; ++c) x[c] = partial[c] / partial[cells];
  } else if (ratio > 1.0) {
    const double denom = -std::expm1(-m * lr);
    for (std::size_t c = 1; c < cells; ++c) {
      const double cc = static_cast<double>(c);
      x[c] = std::exp((cc - m) * lr) * (-std::expm1(-cc * lr)) / denom;
    }
  } else {
    const double denom = std::expm1(m * lr);
    for (std::size_t c = 1; c < cells; ++c) {
      x[c] = std::expm1(static_cast<double>(c) * lr) / denom;
    }
  }
  for (std::size_t c = 0; c < cells; ++c) {
    if (!(x[c] < x[c + 1])) {
      throw Error(ErrorCode::InfeasibleSize, "geometric mesh: cells collapse in floating point");
    }
  }
  double smallest = 1.0;
  for (std::size_t c = 0; c < cells; ++c) smallest = std::min(smallest, x[c + 1] - x[c]);
  if (!(smallest >= 1e-250)) {
    throw Error(ErrorCode::InfeasibleSize, "geometric mesh: smallest cell underflows");
  }
  return x;
}

}  // namespace

KnotVector generate_mesh(MeshKind kind, std::size_t n, int order, double param,
                         std::uint64_t seed) {
  if (order < 1) throw Error(ErrorCode::InfeasibleSize, "order must be >= 1");
  const auto k = static_cast<std::size_t>(order);
  if (n < 1 || n < k) {
    throw Error(ErrorCode::InfeasibleSize, "need n >= max(1, k) basis functions");
  }
  const std::size_t cells = n - k + 1;
  std::vector<double> breaks;
  switch (kind) {
    case MeshKind::Uniform: {
      breaks.resize(cells + 1);
      for (std::size_t c = 0; c <= cells; ++c) {
        breaks[c] = static_cast<double>(c) / static_cast<double>(cells);
      }
      break;
    }
    case MeshKind::Geometric: {
      if (!(param > 0.0)) throw Error(ErrorCode::InfeasibleSize, "geometric ratio must be > 0");
      breaks = geometric_breakpoints(cells, param);
      break;
    }
    case MeshKind::Random: {
      Rng rng(seed);
      std::set<double> interior;
      while (interior.size() + 1 < cells) {
        const double u = rng.uniform();
        if (u > 0.0) interior.insert(u);  // collisions are simply redrawn
      }
      breaks.reserve(cells + 1);
      breaks.push_back(0.0);
      breaks.insert(breaks.end(), interior.begin(), interior.end());
      breaks.push_back(1.0);
      break;
    }
  }
  std::vector<double> knots;
  knots.reserve(n + k);
  for (std::size_t r = 1; r < k; ++r) knots.push_back(0.0);
  knots.insert(knots.end(), breaks.begin(), breaks.end());
  for (std::size_t r = 1; r < k; ++r) knots.push_back(1.0);
  return KnotVector::validate(knots, order);
}

void to_json(nlohmann::json& j, const KnotVector& kv) {
  j = nlohmann::json{{"k", kv.order()},
                     {"knots", std::vector<double>(kv.knots().begin(), kv.knots().end())}};
}

void from_json(const nlohmann::json& j, KnotVector& kv) {
  const auto knots = j.at("knots").get<std::vector<double>>();
  kv = KnotVector::validate(knots, j.at("k").get<int>());
}

nlohmann::json mesh_to_json(const TensorMesh& mesh) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : mesh.axes()) arr.push_back(a);
  return arr;
}

TensorMesh mesh_from_json(const nlohmann::json& j) {
  std::vector<KnotVector> axes;
  for (const auto& item : j) axes.push_back(item.get<KnotVector>());
  return TensorMesh(std::move(axes));
}

}  // namespace splinelab
