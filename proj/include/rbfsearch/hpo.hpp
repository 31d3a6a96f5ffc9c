#pragma once

// Hyperparameter spaces and their box-constrained encoding.
//
// A variable-depth layer stack with at most u layers is encoded with u + 1
// integer variables: u layer sizes followed by a count c in [0, u]; the
// configuration uses the first c sizes. Every point of the box therefore
// decodes to a stack without interior empty layers. The naive encoding (u
// sizes in [0, l], zero meaning "absent") is kept for comparison.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rbfsearch/core.hpp"

namespace rbfsearch::hpo {

enum class ParamKind { continuous, log10_continuous, integer, categorical };

std::string_view to_string(ParamKind k);
ParamKind parse_param_kind(std::string_view s);

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::continuous;
  double low = 0.0;   // exponent bound for log10_continuous
  double high = 1.0;
  std::vector<std::string> categories;  // categorical only
};

struct LayeredGroup {
  std::string name;
  int max_layers = 1;   // u
  int size_low = 1;
  int size_high = 1;    // l
  int size_step = 1;
};

enum class Encoding { count_variable, naive };

std::string_view to_string(Encoding e);
Encoding parse_encoding(std::string_view s);

using Value = std::variant<double, std::int64_t, std::string, std::vector<std::int64_t>>;

/// Decoded configuration, in declaration order (parameters, then groups).
using Configuration = std::vector<std::pair<std::string, Value>>;

struct HpoSpace {
  std::vector<ParamSpec> params;
  std::vector<LayeredGroup> groups;
  Encoding encoding = Encoding::count_variable;

  /// Throws ConfigError describing the first invalid entry.
  void validate() const;
  std::size_t dim() const;
};

/// One dimension per scalar decision variable: parameters in order, then for
/// each group its size variables followed (count_variable only) by the count.
/// Layer sizes are stored as multiples of size_step.
BoxDomain to_domain(const HpoSpace& space);

/// Maps a box point to a configuration. Integer dims are rounded. Throws
/// DomainError when x is outside the box.
Configuration decode(const HpoSpace& space, std::span<const double> x);

/// Layer sizes of a decoded group entry.
const std::vector<std::int64_t>& layers(const Configuration& c, std::string_view group);

/// Monte Carlo mean of the total decoded layer size over uniform box samples
/// (integer dims uniform over their integer values).
double expected_decoded_cost(const HpoSpace& space, std::size_t samples, RngStream& rng);

/// Uniform sample of the box: continuous dims uniform (log10 dims uniform in
/// the exponent), integer dims uniform over their integer values.
Point sample_uniform(const BoxDomain& domain, RngStream& rng);

}  // namespace rbfsearch::hpo
