#include "rbfsearch/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace rbfsearch {

namespace {

// Relative slack when testing box membership; absorbs scale/unscale rounding.
constexpr double kBoxSlack = 1e-12;

}  // namespace

BoxDomain::BoxDomain(std::vector<double> lower, std::vector<double> upper,
                     std::vector<std::size_t> integer_dims)
    : lower_(std::move(lower)),
      upper_(std::move(upper)),
      integer_dims_(std::move(integer_dims)) {
  if (lower_.empty()) throw ConfigError("domain must have at least one dimension");
  if (lower_.size() != upper_.size())
    throw ConfigError(fmt::format("bound vectors differ in length ({} vs {})",
                                  lower_.size(), upper_.size()));
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) ||
        !(lower_[i] < upper_[i]))
      throw ConfigError(fmt::format("dimension {}: need lower < upper, got [{}, {}]",
                                    i, lower_[i], upper_[i]));
  }
  std::sort(integer_dims_.begin(), integer_dims_.end());
  integer_dims_.erase(std::unique(integer_dims_.begin(), integer_dims_.end()),
                      integer_dims_.end());
  is_integer_.assign(lower_.size(), 0);
  for (auto i : integer_dims_) {
    if (i >= lower_.size())
      throw ConfigError(fmt::format("integer dimension {} out of range", i));
    if (lower_[i] != std::round(lower_[i]) || upper_[i] != std::round(upper_[i]))
      throw ConfigError(fmt::format("integer dimension {} has non-integer bounds", i));
    is_integer_[i] = 1;
  }
}

bool BoxDomain::contains(std::span<const double> x, double tol) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double slack = tol * width(i);
    if (!(x[i] >= lower_[i] - slack && x[i] <= upper_[i] + slack)) return false;
  }
  return true;
}

Point scale_to_unit(std::span<const double> x, const BoxDomain& d) {
  if (!d.contains(x, kBoxSlack))
    throw DomainError("point outside the domain box");
  Point u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    u[i] = std::clamp((x[i] - d.lower()[i]) / d.width(i), 0.0, 1.0);
  return u;
}

Point unscale(std::span<const double> u, const BoxDomain& d) {
  if (u.size() != d.dim()) throw DomainError("scaled point has wrong dimension");
  Point x(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] >= -kBoxSlack && u[i] <= 1.0 + kBoxSlack))
      throw DomainError("scaled point outside the unit box");
    x[i] = std::clamp(d.lower()[i] + u[i] * d.width(i), d.lower()[i], d.upper()[i]);
  }
  return x;
}

Point snap_integers(std::span<const double> x, const BoxDomain& d) {
  Point out(x.begin(), x.end());
  for (auto i : d.integer_dims()) {
    // std::round is half away from zero.
    out[i] = std::clamp(std::round(out[i]), d.lower()[i], d.upper()[i]);
  }
  return out;
}

Point snap_scaled(std::span<const double> u, const BoxDomain& d) {
  Point out(u.begin(), u.end());
  for (auto& v : out) v = std::clamp(v, 0.0, 1.0);
  if (d.integer_dims().empty()) return out;
  for (auto i : d.integer_dims()) {
    double raw = d.lower()[i] + out[i] * d.width(i);
    raw = std::clamp(std::round(raw), d.lower()[i], d.upper()[i]);
    out[i] = (raw - d.lower()[i]) / d.width(i);
  }
  return out;
}

std::string_view to_string(Sense s) {
  return s == Sense::maximize ? "maximize" : "minimize";
}

Sense parse_sense(std::string_view s) {
  if (s == "minimize" || s == "min") return Sense::minimize;
  if (s == "maximize" || s == "max") return Sense::maximize;
  throw ConfigError(fmt::format("unknown objective sense '{}'", s));
}

std::string_view to_string(RecordKind k) {
  switch (k) {
    case RecordKind::initial_design: return "initial_design";
    case RecordKind::search: return "search";
    case RecordKind::fallback: return "fallback";
    case RecordKind::temporary: return "temporary";
  }
  return "unknown";
}

void NodeSet::add(std::span<const double> scaled, double value, bool temporary,
                  std::uint64_t tag) {
  if (scaled.size() != dim_) throw ContractError("node has wrong dimension");
  coords_.insert(coords_.end(), scaled.begin(), scaled.end());
  values_.push_back(value);
  temporary_.push_back(temporary ? 1 : 0);
  tags_.push_back(tag);
}

bool NodeSet::remove_temporary(std::uint64_t tag) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (temporary_[i] && tags_[i] == tag) {
      coords_.erase(coords_.begin() + static_cast<std::ptrdiff_t>(i * dim_),
                    coords_.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim_));
      values_.erase(values_.begin() + static_cast<std::ptrdiff_t>(i));
      temporary_.erase(temporary_.begin() + static_cast<std::ptrdiff_t>(i));
      tags_.erase(tags_.begin() + static_cast<std::ptrdiff_t>(i));
      return true;
    }
  }
  return false;
}

std::size_t NodeSet::temporary_count() const {
  return static_cast<std::size_t>(std::count(temporary_.begin(), temporary_.end(), 1));
}

std::pair<double, double> NodeSet::real_range() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (temporary_[i]) continue;
    lo = std::min(lo, values_[i]);
    hi = std::max(hi, values_[i]);
  }
  if (lo > hi) throw ContractError("node set has no real nodes");
  return {lo, hi};
}

double min_distance_scaled(std::span<const double> u, const NodeSet& nodes) {
  if (nodes.empty()) throw ContractError("min distance to an empty node set");
  if (u.size() != nodes.dim()) throw ContractError("point has wrong dimension");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const auto p = nodes.point(j);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double t = u[i] - p[i];
      s += t * t;
    }
    best = std::min(best, s);
  }
  return std::sqrt(best);
}

double min_scaled_distance(std::span<const double> x, const NodeSet& nodes,
                           const BoxDomain& d) {
  if (nodes.empty()) throw ContractError("min distance to an empty node set");
  return min_distance_scaled(scale_to_unit(x, d), nodes);
}

// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t master_seed, std::string_view label,
                     std::uint64_t index)
    : master_(master_seed),
      label_(label),
      engine_(splitmix64(master_seed ^ fnv1a64(label) ^ splitmix64(index))) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ContractError("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % span;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return lo + static_cast<std::int64_t>(r % span);
}

double RngStream::normal() {
  if (cached_normal_) {
    const double v = *cached_normal_;
    cached_normal_.reset();
    return v;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

}  // namespace rbfsearch
