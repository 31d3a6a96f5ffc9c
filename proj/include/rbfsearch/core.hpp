#pragma once

// Shared vocabulary: the box domain, scaling, evaluation records, the node
// set used for interpolation, objective sense and the seeded random streams.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rbfsearch {

using Point = std::vector<double>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or value lies outside the box it must belong to.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (bad bounds, budget below design size, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// BoxDomain
// ---------------------------------------------------------------------------

/// Hyperrectangle [lower, upper] with a subset of integer-constrained
/// coordinates. Dimensions are indexed from zero.
class BoxDomain {
 public:
  BoxDomain(std::vector<double> lower, std::vector<double> upper,
            std::vector<std::size_t> integer_dims = {});

  std::size_t dim() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<std::size_t>& integer_dims() const { return integer_dims_; }
  bool is_integer(std::size_t i) const { return is_integer_[i] != 0; }
  double width(std::size_t i) const { return upper_[i] - lower_[i]; }

  bool contains(std::span<const double> x, double tol = 0.0) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<std::size_t> integer_dims_;
  std::vector<char> is_integer_;
};

/// Maps x to [0,1]^n. Throws DomainError when x is outside the box.
Point scale_to_unit(std::span<const double> x, const BoxDomain& d);

/// Inverse of scale_to_unit. Throws DomainError for coordinates outside [0,1].
Point unscale(std::span<const double> u, const BoxDomain& d);

/// Rounds integer coordinates to nearest (half away from zero) and clamps
/// them to the bounds. Other coordinates are returned unchanged.
Point snap_integers(std::span<const double> x, const BoxDomain& d);

/// Snaps a scaled point: unscale, snap integer dims in raw space, rescale.
/// Continuous coordinates are clipped to [0,1] first.
Point snap_scaled(std::span<const double> u, const BoxDomain& d);

// ---------------------------------------------------------------------------
// Objective sense
// ---------------------------------------------------------------------------

enum class Sense { minimize, maximize };

/// Internal logic always minimizes; maximize problems are negated at the
/// boundary in both directions.
struct ObjectiveSense {
  Sense sense = Sense::minimize;

  double to_internal(double user_value) const {
    return sense == Sense::maximize ? -user_value : user_value;
  }
  double to_user(double internal_value) const {
    return sense == Sense::maximize ? -internal_value : internal_value;
  }
  /// True when user-sense value a is at least as good as b.
  bool at_least_as_good(double a, double b) const {
    return sense == Sense::maximize ? a >= b : a <= b;
  }
};

std::string_view to_string(Sense s);
Sense parse_sense(std::string_view s);

// ---------------------------------------------------------------------------
// Evaluation records and the node set
// ---------------------------------------------------------------------------

enum class RecordKind { initial_design, search, fallback, temporary };

std::string_view to_string(RecordKind k);

struct EvalRecord {
  Point point;          // raw coordinates, integer dims snapped
  double value = 0.0;   // internal (minimization) sense
  RecordKind kind = RecordKind::initial_design;
  std::uint64_t sequence_id = 0;
  std::optional<double> weight_used;
  bool failed = false;
  double t_wall_ms = 0.0;
  int worker = 0;
};

/// Interpolation set S. Points are stored scaled to the unit box, row-major.
/// Temporary nodes stand for in-flight evaluations and carry a tag linking
/// them to their task.
class NodeSet {
 public:
  explicit NodeSet(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  double value(std::size_t i) const { return values_[i]; }
  bool is_temporary(std::size_t i) const { return temporary_[i] != 0; }
  std::uint64_t tag(std::size_t i) const { return tags_[i]; }

  std::span<const double> coords() const { return coords_; }
  std::span<const double> values() const { return values_; }

  void add(std::span<const double> scaled, double value, bool temporary = false,
           std::uint64_t tag = 0);
  /// Removes the temporary node with the given tag; returns false if absent.
  bool remove_temporary(std::uint64_t tag);

  std::size_t temporary_count() const;
  /// [min, max] over non-temporary values. Requires at least one real node.
  std::pair<double, double> real_range() const;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<double> values_;
  std::vector<char> temporary_;
  std::vector<std::uint64_t> tags_;
};

/// Minimum Euclidean distance in scaled space between x (raw coordinates)
/// and every node, temporary ones included.
double min_scaled_distance(std::span<const double> x, const NodeSet& nodes,
                           const BoxDomain& d);

/// Same, for a point that is already scaled.
double min_distance_scaled(std::span<const double> u, const NodeSet& nodes);

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

/// Deterministic labeled substream. The engine is std::mt19937_64, whose
/// output sequence is fixed by the C++ standard. The seed is
/// splitmix64(master ^ fnv1a64(label) ^ splitmix64(index)). Distributions
/// are implemented here, not taken from <random>, so draws are identical
/// across standard library implementations.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view label,
            std::uint64_t index = 0);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0,1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [lo, hi] (inclusive), unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Standard normal (Box-Muller, one value cached).
  double normal();

  std::uint64_t master_seed() const { return master_; }
  const std::string& label() const { return label_; }

 private:
  std::uint64_t master_;
  std::string label_;
  std::mt19937_64 engine_;
  std::optional<double> cached_normal_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

}  // namespace rbfsearch
