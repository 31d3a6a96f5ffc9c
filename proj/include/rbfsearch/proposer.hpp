#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rbfsearch/core.hpp"
#include "rbfsearch/surrogate.hpp"

namespace rbfsearch {

class ProposerError : public Error {
 public:
  using Error::Error;
};

/// Periodic schedule of the surrogate-merit weight w. Weight 1 trusts the
/// surrogate only, weight 0 maximizes distance to the evaluated points only.
class WeightCycle {
 public:
  WeightCycle() : WeightCycle(default_weights()) {}
  explicit WeightCycle(std::vector<double> weights);

  static std::vector<double> default_weights() { return {0.95, 0.75, 0.50, 0.25, 0.05, 1.0}; }

  /// Weight for the given proposal ticket (position = ticket mod length).
  double at(std::uint64_t ticket) const { return weights_[ticket % weights_.size()]; }
  double next() { return weights_[position_++ % weights_.size()]; }
  std::size_t position() const { return position_ % weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
  std::size_t position_ = 0;
};

struct GaConfig {
  std::size_t population_size = 0;  // 0: max(50, min(400, 20 n))
  std::size_t generations = 20;
  double mutation_rate = 0.1;
  double elite_fraction = 0.25;
  double mutation_sigma = 0.1;  // scaled units
  /// Nelder-Mead iterations spent polishing the GA winner over the
  /// continuous dims, with the final population's normalization held fixed.
  /// 0 disables polishing.
  std::size_t polish_iterations = 200;
  /// At weight 1 first try a Nelder-Mead minimization of the surrogate in a
  /// box around the best node; the GA at weight 0.95 runs if that point
  /// predicts no improvement or sits too close to a node.
  bool local_search = true;

  std::size_t population_for(std::size_t n) const;
  std::size_t elite_count(std::size_t n) const;
  void validate(std::size_t n) const;
};

enum class RejectionReason { too_close, degenerate };

struct Proposal {
  Point point;   // raw coordinates, integers snapped
  Point scaled;
  double weight_used = 0.0;
  bool accepted = false;
  std::optional<RejectionReason> rejection_reason;  // of the first candidate
  RecordKind kind = RecordKind::search;
};

/// Minimum scaled distance an accepted point keeps from every node.
inline double min_acceptance_distance(std::size_t n) {
  return 1e-3 * std::sqrt(static_cast<double>(n));
}

/// Everything needed to score candidate points: an optional surrogate (absent
/// when the fit failed; the merit term is then constant) and the node set
/// whose nearest-point distance forms the exploration term.
class ScoreContext {
 public:
  ScoreContext(const RbfModel* model, const NodeSet& nodes, double weight);

  double weight() const { return weight_; }
  const NodeSet& nodes() const { return *nodes_; }
  const RbfModel* model() const { return model_; }

  /// Surrogate value (0 without a model) and min distance for a scaled point.
  RbfModel::Evaluation raw_terms(std::span<const double> u) const;

 private:
  const RbfModel* model_;
  const NodeSet* nodes_;
  double weight_;
  bool model_covers_nodes_ = false;
  std::vector<double> node_soa_;
};

/// Weighted blend of normalized merit and normalized distance over the batch.
/// Larger is better. Candidates are scaled points, row-major. Candidates
/// closer than `exclude_within` to a node score -1.
std::vector<double> score(const ScoreContext& ctx, std::span<const double> candidates,
                          double exclude_within = 0.0);

/// Genetic algorithm over the unit box maximizing score(), excluding
/// candidates closer than min_acceptance_distance to a node. Returns a scaled,
/// integer-snapped point.
Point ga_argmax(const ScoreContext& ctx, const BoxDomain& d, const GaConfig& cfg,
                RngStream& rng);

/// Next search point: GA candidate at weight w (at w = 1 with local_search,
/// the local surrogate minimum, else the GA at 0.95 near the best node); if
/// too close to a node, one retry at w = 0; then up to 1000 uniform random
/// draws. Throws ProposerError when every draw is too close.
Proposal propose(const RbfModel* model, const NodeSet& nodes, const BoxDomain& d, double weight,
                 const GaConfig& cfg, RngStream& rng);

inline Proposal propose(const RbfModel* model, const NodeSet& nodes, const BoxDomain& d,
                        WeightCycle& cycle, const GaConfig& cfg, RngStream& rng) {
  return propose(model, nodes, d, cycle.next(), cfg, rng);
}

}  // namespace rbfsearch
