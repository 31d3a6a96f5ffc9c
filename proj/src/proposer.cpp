#include "rbfsearch/proposer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>

#include <fmt/format.h>

#include "rbfsearch/simd/kernels.hpp"

namespace rbfsearch {

namespace {

constexpr int kFallbackDraws = 1000;

void normalize(std::vector<double>& v, bool smaller_is_better) {
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double range = hi - lo;
  if (!(range > 0.0) || !std::isfinite(range)) {
    std::fill(v.begin(), v.end(), 0.5);
    return;
  }
  for (auto& x : v) x = smaller_is_better ? (hi - x) / range : (x - lo) / range;
}

bool finite(std::span<const double> u) {
  return std::all_of(u.begin(), u.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

WeightCycle::WeightCycle(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw ConfigError("weight cycle must not be empty");
  for (double w : weights_)
    if (!(w >= 0.0 && w <= 1.0))
      throw ConfigError(fmt::format("weight {} outside [0,1]", w));
}

std::size_t GaConfig::population_for(std::size_t n) const {
  if (population_size != 0) return population_size;
  return std::max<std::size_t>(50, std::min<std::size_t>(400, 20 * n));
}

std::size_t GaConfig::elite_count(std::size_t n) const {
  const auto pop = static_cast<double>(population_for(n));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(elite_fraction * pop)));
}

void GaConfig::validate(std::size_t n) const {
  if (population_for(n) < 4) throw ConfigError("GA population must be at least 4");
  if (!(mutation_rate > 0.0 && mutation_rate < 1.0))
    throw ConfigError("GA mutation rate must lie in (0,1)");
  if (!(elite_fraction > 0.0 && elite_fraction <= 1.0))
    throw ConfigError("GA elite fraction must lie in (0,1]");
  if (!(mutation_sigma > 0.0)) throw ConfigError("GA mutation sigma must be positive");
}

// ---------------------------------------------------------------------------

ScoreContext::ScoreContext(const RbfModel* model, const NodeSet& nodes, double weight)
    : model_(model), nodes_(&nodes), weight_(weight) {
  if (nodes.empty()) throw ContractError("score context needs at least one node");
  if (!(weight >= 0.0 && weight <= 1.0)) throw ContractError("weight outside [0,1]");
  const std::size_t k = nodes.size();
  const std::size_t n = nodes.dim();
  if (model_ != nullptr && model_->size() == k && model_->dim() == n) {
    model_covers_nodes_ = true;
    for (std::size_t j = 0; j < k && model_covers_nodes_; ++j) {
      const auto c = model_->center(j);
      const auto p = nodes.point(j);
      model_covers_nodes_ = std::equal(c.begin(), c.end(), p.begin());
    }
  }
  if (!model_covers_nodes_) {
    node_soa_.resize(k * n);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) node_soa_[i * k + j] = nodes.point(j)[i];
  }
}

RbfModel::Evaluation ScoreContext::raw_terms(std::span<const double> u) const {
  if (model_covers_nodes_) return model_->evaluate(u);
  thread_local std::vector<double> d2;
  const std::size_t k = nodes_->size();
  d2.resize(k);
  const simd::CenterBlock block{node_soa_.data(), k, k, nodes_->dim()};
  simd::squared_distances(u, block, d2);
  const double dist = std::sqrt(simd::min_value(d2));
  const double value = model_ != nullptr ? model_->predict(u) : 0.0;
  return {value, dist};
}

std::vector<double> score(const ScoreContext& ctx, std::span<const double> candidates,
                          double exclude_within) {
  const std::size_t n = ctx.nodes().dim();
  if (candidates.empty() || candidates.size() % n != 0)
    throw ContractError("score: candidate batch is empty or misshapen");
  const std::size_t m = candidates.size() / n;
  std::vector<double> merit(m), dist(m);
  std::vector<char> excluded(m);
  for (std::size_t c = 0; c < m; ++c) {
    const auto t = ctx.raw_terms(candidates.subspan(c * n, n));
    merit[c] = t.value;
    dist[c] = t.min_distance;
    excluded[c] = t.min_distance < exclude_within;
  }
  normalize(merit, /*smaller_is_better=*/true);
  normalize(dist, /*smaller_is_better=*/false);
  const double w = ctx.weight();
  std::vector<double> out(m);
  for (std::size_t c = 0; c < m; ++c)
    out[c] = excluded[c] ? -1.0 : w * merit[c] + (1.0 - w) * dist[c];
  return out;
}

namespace {

struct Minimum {
  Point x;
  double f;
};

// Bounded Nelder-Mead minimization. Trial points are clamped to [lo, hi];
// stops after `iterations` steps or when the simplex shrinks below `tol`.
Minimum nelder_mead(const std::function<double(std::span<const double>)>& f, const Point& x0,
                    const Point& lo, const Point& hi, const Point& step, std::size_t iterations,
                    double tol) {
  const std::size_t m = x0.size();
  std::vector<Point> simplex(m + 1, x0);
  for (std::size_t j = 0; j < m; ++j)
    simplex[j + 1][j] += x0[j] + step[j] <= hi[j] ? step[j] : -step[j];
  std::vector<double> fv(m + 1);
  for (std::size_t i = 0; i <= m; ++i) fv[i] = f(simplex[i]);

  std::vector<std::size_t> idx(m + 1);
  Point c(m), trial(m);
  auto along = [&](double t, const Point& worst) {
    for (std::size_t j = 0; j < m; ++j) trial[j] = std::clamp(c[j] + t * (worst[j] - c[j]), lo[j], hi[j]);
    return f(trial);
  };
  for (std::size_t it = 0; it < iterations; ++it) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
    const std::size_t b_i = idx[0], w_i = idx[m], second = idx[m - 1];
    double size = 0.0;
    for (std::size_t i = 0; i <= m; ++i)
      for (std::size_t j = 0; j < m; ++j) size = std::max(size, std::fabs(simplex[i][j] - simplex[b_i][j]));
    if (size < tol) break;
    std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t i = 0; i <= m; ++i)
      if (i != w_i)
        for (std::size_t j = 0; j < m; ++j) c[j] += simplex[i][j] / static_cast<double>(m);
    const Point worst = simplex[w_i];
    const double fr = along(-1.0, worst);
    const Point xr = trial;
    if (fr < fv[b_i]) {
      const double fe = along(-2.0, worst);
      if (fe < fr) {
        simplex[w_i] = trial;
        fv[w_i] = fe;
      } else {
        simplex[w_i] = xr;
        fv[w_i] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[w_i] = xr;
      fv[w_i] = fr;
    } else {
      const double fc = along(0.5, worst);
      if (fc < fv[w_i]) {
        simplex[w_i] = trial;
        fv[w_i] = fc;
      } else {
        for (std::size_t i = 0; i <= m; ++i) {
          if (i == b_i) continue;
          for (std::size_t j = 0; j < m; ++j)
            simplex[i][j] = simplex[b_i][j] + 0.5 * (simplex[i][j] - simplex[b_i][j]);
          fv[i] = f(simplex[i]);
        }
      }
    }
  }
  const auto top = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return {simplex[top], fv[top]};
}

std::vector<std::size_t> continuous_dims(const BoxDomain& d) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.dim(); ++i)
    if (!d.is_integer(i)) out.push_back(i);
  return out;
}

// Nelder-Mead on the continuous dims, maximizing the blended score with the
// normalization of `population` frozen.
Point polish(const ScoreContext& ctx, const BoxDomain& d, std::span<const double> population,
             Point start, const GaConfig& cfg, const Point& lo, const Point& hi) {
  const std::size_t n = d.dim();
  const auto dims = continuous_dims(d);
  if (dims.empty()) return start;
  const std::size_t m = dims.size();

  double s_lo = std::numeric_limits<double>::infinity(), s_hi = -s_lo;
  double d_lo = s_lo, d_hi = -s_lo;
  for (std::size_t p = 0; p * n < population.size(); ++p) {
    const auto t = ctx.raw_terms(population.subspan(p * n, n));
    s_lo = std::min(s_lo, t.value);
    s_hi = std::max(s_hi, t.value);
    d_lo = std::min(d_lo, t.min_distance);
    d_hi = std::max(d_hi, t.min_distance);
  }
  const double w = ctx.weight();
  const double delta = min_acceptance_distance(n);
  const bool s_flat = !(s_hi - s_lo > 0.0), d_flat = !(d_hi - d_lo > 0.0);
  Point x = start;
  auto negated_score = [&](std::span<const double> z) {
    for (std::size_t j = 0; j < m; ++j) x[dims[j]] = z[j];
    const auto t = ctx.raw_terms(x);
    if (!std::isfinite(t.value) || t.min_distance < delta) return std::numeric_limits<double>::infinity();
    const double vs = s_flat ? 0.5 : (s_hi - t.value) / (s_hi - s_lo);
    const double vd = d_flat ? 0.5 : (t.min_distance - d_lo) / (d_hi - d_lo);
    return -(w * vs + (1.0 - w) * vd);
  };

  // spread of the final population sets the initial simplex size
  Point x0(m), step(m), box_lo(m), box_hi(m);
  for (std::size_t j = 0; j < m; ++j) {
    x0[j] = start[dims[j]];
    box_lo[j] = lo[dims[j]];
    box_hi[j] = hi[dims[j]];
    double p_lo = 1.0, p_hi = 0.0;
    for (std::size_t p = 0; p * n < population.size(); ++p) {
      p_lo = std::min(p_lo, population[p * n + dims[j]]);
      p_hi = std::max(p_hi, population[p * n + dims[j]]);
    }
    step[j] = std::clamp(0.5 * (p_hi - p_lo), 1e-4, 0.1);
  }
  const double f_start = negated_score(x0);
  const auto best = nelder_mead(negated_score, x0, box_lo, box_hi, step, cfg.polish_iterations, 1e-9);
  if (!(best.f < f_start)) return start;
  for (std::size_t j = 0; j < m; ++j) start[dims[j]] = best.x[j];
  return start;
}

constexpr double kLocalRadius = 0.165;

struct LocalBox {
  std::size_t best;  // index of the best real node
  Point lo, hi;      // scaled bounds around it
};

std::optional<LocalBox> local_box(const NodeSet& nodes) {
  std::size_t best = nodes.size();
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!nodes.is_temporary(i) && (best == nodes.size() || nodes.value(i) < nodes.value(best))) best = i;
  if (best == nodes.size()) return std::nullopt;
  LocalBox b{best, Point(nodes.dim()), Point(nodes.dim())};
  const auto c = nodes.point(best);
  for (std::size_t i = 0; i < nodes.dim(); ++i) {
    b.lo[i] = std::max(0.0, c[i] - kLocalRadius);
    b.hi[i] = std::min(1.0, c[i] + kLocalRadius);
  }
  return b;
}

// Minimizes the surrogate from the best real node inside the local box.
// Returns the point only when it predicts an improvement of at least
// 1e-4 max(1, |fmin|).
std::optional<Point> local_minimum(const RbfModel& model, const NodeSet& nodes, const BoxDomain& d,
                                   const LocalBox& box, const GaConfig& cfg) {
  const auto dims = continuous_dims(d);
  if (dims.empty()) return std::nullopt;
  const double fmin = nodes.value(box.best);
  const double delta = min_acceptance_distance(d.dim());
  const std::size_t m = dims.size();

  Point x(nodes.point(box.best).begin(), nodes.point(box.best).end());
  Point x0(m), lo(m), hi(m);
  for (std::size_t j = 0; j < m; ++j) {
    x0[j] = x[dims[j]];
    lo[j] = box.lo[dims[j]];
    hi[j] = box.hi[dims[j]];
  }
  auto predicted = [&](std::span<const double> z) {
    for (std::size_t j = 0; j < m; ++j) x[dims[j]] = z[j];
    const auto e = model.evaluate(x);
    return std::isfinite(e.value) && e.min_distance >= delta ? e.value
                                                             : std::numeric_limits<double>::infinity();
  };
  const auto found = nelder_mead(predicted, x0, lo, hi, Point(m, 0.02),
                                 std::max<std::size_t>(cfg.polish_iterations, 100 * m), 1e-10);
  if (!(found.f < fmin - 1e-4 * std::max(1.0, std::fabs(fmin)))) return std::nullopt;
  for (std::size_t j = 0; j < m; ++j) x[dims[j]] = found.x[j];
  return snap_scaled(x, d);
}

Point ga_argmax_in(const ScoreContext& ctx, const BoxDomain& d, const GaConfig& cfg,
                   RngStream& rng, const Point& lo, const Point& hi) {
  const std::size_t n = d.dim();
  if (ctx.nodes().dim() != n) throw ContractError("ga_argmax: dimension mismatch");
  cfg.validate(n);
  const std::size_t pop = cfg.population_for(n);
  const std::size_t elites = std::min(cfg.elite_count(n), pop);
  const double delta = min_acceptance_distance(n);

  std::vector<double> population(pop * n);
  for (std::size_t p = 0; p < pop; ++p) {
    Point u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = rng.uniform(lo[i], hi[i]);
    const auto s = snap_scaled(u, d);
    std::copy(s.begin(), s.end(), population.begin() + static_cast<std::ptrdiff_t>(p * n));
  }

  std::vector<std::size_t> order(pop);
  std::vector<double> next(pop * n);
  Point child(n);
  for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
    const auto scores = score(ctx, population, delta);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    for (std::size_t e = 0; e < elites; ++e)
      std::copy_n(population.begin() + static_cast<std::ptrdiff_t>(order[e] * n), n,
                  next.begin() + static_cast<std::ptrdiff_t>(e * n));
    for (std::size_t p = elites; p < pop; ++p) {
      std::size_t a = 0, b = 0;
      if (elites > 1) {
        a = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(elites) - 1));
        b = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(elites) - 2));
        if (b >= a) ++b;
      }
      const double* pa = next.data() + a * n;
      const double* pb = next.data() + b * n;
      for (std::size_t i = 0; i < n; ++i) {
        double g = rng.uniform() < 0.5 ? pa[i] : pb[i];
        if (rng.uniform() < cfg.mutation_rate)
          g = std::clamp(g + cfg.mutation_sigma * (hi[i] - lo[i]) * rng.normal(), lo[i], hi[i]);
        child[i] = g;
      }
      const auto s = snap_scaled(child, d);
      std::copy(s.begin(), s.end(), next.begin() + static_cast<std::ptrdiff_t>(p * n));
    }
    population.swap(next);
  }

  const auto scores = score(ctx, population, delta);
  std::size_t best = 0;
  for (std::size_t p = 1; p < pop; ++p)
    if (scores[p] > scores[best]) best = p;
  Point winner(population.begin() + static_cast<std::ptrdiff_t>(best * n),
               population.begin() + static_cast<std::ptrdiff_t>((best + 1) * n));
  if (cfg.polish_iterations > 0) winner = polish(ctx, d, population, std::move(winner), cfg, lo, hi);
  return winner;
}

}  // namespace

Point ga_argmax(const ScoreContext& ctx, const BoxDomain& d, const GaConfig& cfg,
                RngStream& rng) {
  return ga_argmax_in(ctx, d, cfg, rng, Point(d.dim(), 0.0), Point(d.dim(), 1.0));
}

Proposal propose(const RbfModel* model, const NodeSet& nodes, const BoxDomain& d, double weight,
                 const GaConfig& cfg, RngStream& rng) {
  const double delta = min_acceptance_distance(d.dim());
  Proposal out;
  out.weight_used = weight;

  auto try_accept = [&](Point u, RecordKind kind) {
    if (!finite(u)) {
      if (!out.rejection_reason) out.rejection_reason = RejectionReason::degenerate;
      return false;
    }
    if (min_distance_scaled(u, nodes) < delta) {
      if (!out.rejection_reason) out.rejection_reason = RejectionReason::too_close;
      return false;
    }
    out.point = unscale(u, d);
    out.point = snap_integers(out.point, d);
    out.scaled = std::move(u);
    out.kind = kind;
    out.accepted = true;
    return true;
  };

  const auto box = weight >= 1.0 && model != nullptr && cfg.local_search ? local_box(nodes)
                                                                        : std::nullopt;
  if (box) {
    if (auto u = local_minimum(*model, nodes, d, *box, cfg);
        u && try_accept(std::move(*u), RecordKind::search))
      return out;
    weight = 0.95;
    out.weight_used = weight;
    if (try_accept(ga_argmax_in(ScoreContext(model, nodes, weight), d, cfg, rng, box->lo, box->hi),
                   RecordKind::search))
      return out;
  } else if (try_accept(ga_argmax(ScoreContext(model, nodes, weight), d, cfg, rng),
                        RecordKind::search)) {
    return out;
  }
  if (try_accept(ga_argmax(ScoreContext(model, nodes, 0.0), d, cfg, rng), RecordKind::search)) {
    out.weight_used = 0.0;
    return out;
  }
  Point u(d.dim());
  for (int draw = 0; draw < kFallbackDraws; ++draw) {
    for (auto& x : u) x = rng.uniform();
    if (try_accept(snap_scaled(u, d), RecordKind::fallback)) {
      out.weight_used = 0.0;
      return out;
    }
  }
  throw ProposerError(fmt::format(
      "no point at scaled distance >= {} from the {} existing nodes after {} random draws",
      delta, nodes.size(), kFallbackDraws));
}

}  // namespace rbfsearch
