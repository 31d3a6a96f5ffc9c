#include "rbfsearch/hpo.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

namespace rbfsearch::hpo {

std::string_view to_string(ParamKind k) {
  switch (k) {
    case ParamKind::continuous: return "continuous";
    case ParamKind::log10_continuous: return "log10_continuous";
    case ParamKind::integer: return "integer";
    case ParamKind::categorical: return "categorical";
  }
  return "unknown";
}

ParamKind parse_param_kind(std::string_view s) {
  for (auto k : {ParamKind::continuous, ParamKind::log10_continuous, ParamKind::integer,
                 ParamKind::categorical})
    if (to_string(k) == s) return k;
  throw ConfigError(fmt::format("unknown parameter kind '{}'", s));
}

std::string_view to_string(Encoding e) {
  return e == Encoding::naive ? "naive" : "count_variable";
}

Encoding parse_encoding(std::string_view s) {
  if (s == "count_variable") return Encoding::count_variable;
  if (s == "naive") return Encoding::naive;
  throw ConfigError(fmt::format("unknown encoding '{}'", s));
}

void HpoSpace::validate() const {
  std::set<std::string> names;
  auto unique_name = [&](const std::string& n) {
    if (n.empty()) throw ConfigError("parameter with an empty name");
    if (!names.insert(n).second) throw ConfigError(fmt::format("duplicate name '{}'", n));
  };
  for (const auto& p : params) {
    unique_name(p.name);
    if (p.kind == ParamKind::categorical) {
      if (p.categories.size() < 2)
        throw ConfigError(fmt::format("categorical '{}' needs at least 2 categories", p.name));
      continue;
    }
    if (!(p.low < p.high))
      throw ConfigError(fmt::format("'{}': need low < high, got [{}, {}]", p.name, p.low, p.high));
    if (p.kind == ParamKind::integer &&
        (p.low != std::round(p.low) || p.high != std::round(p.high)))
      throw ConfigError(fmt::format("integer '{}' has non-integer bounds", p.name));
  }
  for (const auto& g : groups) {
    unique_name(g.name);
    if (g.max_layers < 1) throw ConfigError(fmt::format("group '{}': max_layers < 1", g.name));
    if (g.size_step < 1) throw ConfigError(fmt::format("group '{}': size_step < 1", g.name));
    if (g.size_low < 1 || g.size_high < g.size_low)
      throw ConfigError(fmt::format("group '{}': need 1 <= size_low <= size_high", g.name));
    if (g.size_low % g.size_step != 0 || g.size_high % g.size_step != 0)
      throw ConfigError(fmt::format("group '{}': sizes must be multiples of size_step", g.name));
    if (encoding == Encoding::count_variable && g.size_low == g.size_high)
      throw ConfigError(fmt::format("group '{}': size range is a single value", g.name));
  }
}

std::size_t HpoSpace::dim() const {
  std::size_t n = params.size();
  for (const auto& g : groups)
    n += static_cast<std::size_t>(g.max_layers) + (encoding == Encoding::count_variable ? 1 : 0);
  return n;
}

BoxDomain to_domain(const HpoSpace& space) {
  space.validate();
  std::vector<double> lo, hi;
  std::vector<std::size_t> ints;
  auto add = [&](double l, double h, bool integer) {
    if (integer) ints.push_back(lo.size());
    lo.push_back(l);
    hi.push_back(h);
  };
  for (const auto& p : space.params) {
    switch (p.kind) {
      case ParamKind::continuous:
      case ParamKind::log10_continuous:
        add(p.low, p.high, false);
        break;
      case ParamKind::integer:
        add(p.low, p.high, true);
        break;
      case ParamKind::categorical:
        add(0.0, static_cast<double>(p.categories.size() - 1), true);
        break;
    }
  }
  for (const auto& g : space.groups) {
    const double top = g.size_high / g.size_step;
    const double bottom = space.encoding == Encoding::naive ? 0.0 : g.size_low / g.size_step;
    for (int i = 0; i < g.max_layers; ++i) add(bottom, top, true);
    if (space.encoding == Encoding::count_variable) add(0.0, g.max_layers, true);
  }
  return BoxDomain(std::move(lo), std::move(hi), std::move(ints));
}

Configuration decode(const HpoSpace& space, std::span<const double> x) {
  const BoxDomain d = to_domain(space);
  if (x.size() != d.dim())
    throw DomainError(fmt::format("point has {} coordinates, space has {}", x.size(), d.dim()));
  if (!d.contains(x, 1e-12)) throw DomainError("point outside the hyperparameter box");
  const Point s = snap_integers(x, d);

  Configuration out;
  std::size_t i = 0;
  for (const auto& p : space.params) {
    const double v = s[i++];
    switch (p.kind) {
      case ParamKind::continuous:
        out.emplace_back(p.name, v);
        break;
      case ParamKind::log10_continuous:
        out.emplace_back(p.name, std::pow(10.0, v));
        break;
      case ParamKind::integer:
        out.emplace_back(p.name, static_cast<std::int64_t>(v));
        break;
      case ParamKind::categorical:
        out.emplace_back(p.name, p.categories[static_cast<std::size_t>(v)]);
        break;
    }
  }
  for (const auto& g : space.groups) {
    const auto u = static_cast<std::size_t>(g.max_layers);
    std::vector<std::int64_t> sizes;
    if (space.encoding == Encoding::count_variable) {
      const auto count = static_cast<std::size_t>(s[i + u]);
      for (std::size_t j = 0; j < count; ++j)
        sizes.push_back(static_cast<std::int64_t>(s[i + j]) * g.size_step);
      i += u + 1;
    } else {
      for (std::size_t j = 0; j < u; ++j)
        if (s[i + j] > 0.0) sizes.push_back(static_cast<std::int64_t>(s[i + j]) * g.size_step);
      i += u;
    }
    out.emplace_back(g.name, std::move(sizes));
  }
  return out;
}

const std::vector<std::int64_t>& layers(const Configuration& c, std::string_view group) {
  for (const auto& [name, v] : c)
    if (name == group) return std::get<std::vector<std::int64_t>>(v);
  throw ContractError(fmt::format("configuration has no group '{}'", group));
}

Point sample_uniform(const BoxDomain& domain, RngStream& rng) {
  Point x(domain.dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (domain.is_integer(i))
      x[i] = static_cast<double>(rng.uniform_int(static_cast<std::int64_t>(domain.lower()[i]),
                                                 static_cast<std::int64_t>(domain.upper()[i])));
    else
      x[i] = rng.uniform(domain.lower()[i], domain.upper()[i]);
  }
  return x;
}

double expected_decoded_cost(const HpoSpace& space, std::size_t samples, RngStream& rng) {
  if (space.groups.empty()) throw ContractError("expected_decoded_cost needs a layered group");
  if (samples == 0) throw ContractError("expected_decoded_cost needs at least one sample");
  const BoxDomain d = to_domain(space);
  double total = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto cfg = decode(space, sample_uniform(d, rng));
    for (const auto& g : space.groups)
      for (auto size : layers(cfg, g.name)) total += static_cast<double>(size);
  }
  return total / static_cast<double>(samples);
}

}  // namespace rbfsearch::hpo
