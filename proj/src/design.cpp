#include "rbfsearch/design.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace rbfsearch {

namespace {

constexpr int kMaxRegenerations = 100;
constexpr int kMaxPerturbationRounds = 1000;

std::vector<std::size_t> permutation(std::size_t k, RngStream& rng) {
  std::vector<std::size_t> p(k);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = k; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

struct Draft {
  std::vector<std::vector<std::size_t>> strata;  // [dim][point]
  std::vector<Point> unit;                       // [point][dim]
};

Draft draw(std::size_t n, std::size_t k, RngStream& rng) {
  Draft dr;
  dr.strata.resize(n);
  dr.unit.assign(k, Point(n));
  for (std::size_t i = 0; i < n; ++i) {
    dr.strata[i] = permutation(k, rng);
    for (std::size_t j = 0; j < k; ++j)
      dr.unit[j][i] = (static_cast<double>(dr.strata[i][j]) + rng.uniform()) /
                      static_cast<double>(k);
  }
  return dr;
}

std::vector<Point> snapped_raw(const Draft& dr, const BoxDomain& d) {
  std::vector<Point> pts;
  pts.reserve(dr.unit.size());
  for (const auto& u : dr.unit) pts.push_back(snap_integers(unscale(u, d), d));
  return pts;
}

std::vector<double> scaled_coords(const std::vector<Point>& pts, const BoxDomain& d) {
  std::vector<double> c;
  c.reserve(pts.size() * d.dim());
  for (const auto& p : pts) {
    const auto u = scale_to_unit(p, d);
    c.insert(c.end(), u.begin(), u.end());
  }
  return c;
}

// Indices of points that coincide with an earlier point.
std::vector<std::size_t> duplicate_rows(const std::vector<Point>& pts) {
  std::vector<std::size_t> dup;
  for (std::size_t a = 1; a < pts.size(); ++a)
    for (std::size_t b = 0; b < a; ++b)
      if (pts[a] == pts[b]) {
        dup.push_back(a);
        break;
      }
  return dup;
}

bool acceptable(const std::vector<Point>& pts, const BoxDomain& d) {
  return duplicate_rows(pts).empty() && is_poised(scaled_coords(pts, d), d.dim());
}

}  // namespace

bool is_poised(std::span<const double> coords, std::size_t n, double tol) {
  if (n == 0 || coords.size() % n != 0) throw ContractError("coords not a multiple of n");
  const std::size_t k = coords.size() / n;
  if (k < n + 1) return false;
  Eigen::MatrixXd a(k, n + 1);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < n; ++c) a(r, c) = coords[r * n + c];
    a(r, n) = 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s(0) <= 0.0) return false;
  return s(s.size() - 1) / s(0) > tol;
}

InitialDesign latin_hypercube(const BoxDomain& d, std::size_t k, RngStream& rng) {
  const std::size_t n = d.dim();
  if (k < n + 1)
    throw ContractError(fmt::format("design size {} below n+1 = {}", k, n + 1));

  InitialDesign out;
  Draft dr;
  for (int attempt = 1; attempt <= kMaxRegenerations; ++attempt) {
    dr = draw(n, k, rng);
    auto pts = snapped_raw(dr, d);
    out.attempts = attempt;
    if (acceptable(pts, d)) {
      out.points = std::move(pts);
      out.stratified = std::move(dr.unit);
      out.rank_ok = true;
      return out;
    }
  }

  // Keep the last strata assignment and redraw positions inside the strata of
  // offending rows: duplicates first, every row when the design is merely
  // rank deficient.
  out.perturbed = true;
  auto pts = snapped_raw(dr, d);
  for (int round = 0; round < kMaxPerturbationRounds; ++round) {
    auto rows = duplicate_rows(pts);
    if (rows.empty()) {
      rows.resize(k);
      std::iota(rows.begin(), rows.end(), 0);
    }
    for (auto j : rows) {
      for (std::size_t i = 0; i < n; ++i)
        dr.unit[j][i] = (static_cast<double>(dr.strata[i][j]) + rng.uniform()) /
                        static_cast<double>(k);
      pts[j] = snap_integers(unscale(dr.unit[j], d), d);
    }
    if (acceptable(pts, d)) {
      out.points = std::move(pts);
      out.stratified = std::move(dr.unit);
      out.rank_ok = true;
      return out;
    }
  }
  throw DesignError(fmt::format(
      "could not build a poised design of {} distinct points in {} dimensions "
      "({} integer) after {} regenerations and {} perturbation rounds",
      k, n, d.integer_dims().size(), kMaxRegenerations, kMaxPerturbationRounds));
}

}  // namespace rbfsearch
