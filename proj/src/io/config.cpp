#include "rbfsearch/io/config.hpp"

#include <fstream>

#include <fmt/format.h>

#include "rbfsearch/io/evaluator.hpp"
#include "rbfsearch/io/testfns.hpp"

namespace rbfsearch::io {

namespace {

template <class T>
T get(const json& j, const char* key, T fallback) {
  return j.contains(key) && !j[key].is_null() ? j[key].get<T>() : fallback;
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<T>();
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known,
                    std::string_view where) {
  if (!j.is_object()) throw ConfigError(fmt::format("{} must be an object", where));
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (auto name : known) ok = ok || k == name;
    if (!ok) throw ConfigError(fmt::format("unknown key '{}' in {}", k, where));
  }
}

}  // namespace

hpo::HpoSpace parse_space(const json& j) {
  reject_unknown(j, {"encoding", "params", "groups"}, "space");
  hpo::HpoSpace s;
  s.encoding = hpo::parse_encoding(get<std::string>(j, "encoding", "count_variable"));
  for (const auto& p : j.value("params", json::array())) {
    reject_unknown(p, {"name", "kind", "low", "high", "categories"}, "space.params");
    hpo::ParamSpec spec;
    spec.name = p.at("name").get<std::string>();
    spec.kind = hpo::parse_param_kind(get<std::string>(p, "kind", "continuous"));
    spec.low = get<double>(p, "low", 0.0);
    spec.high = get<double>(p, "high", 1.0);
    spec.categories = get<std::vector<std::string>>(p, "categories", {});
    s.params.push_back(std::move(spec));
  }
  for (const auto& g : j.value("groups", json::array())) {
    reject_unknown(g, {"name", "max_layers", "size_low", "size_high", "size_step"},
                   "space.groups");
    hpo::LayeredGroup grp;
    grp.name = g.at("name").get<std::string>();
    grp.max_layers = g.at("max_layers").get<int>();
    grp.size_low = get<int>(g, "size_low", 1);
    grp.size_high = g.at("size_high").get<int>();
    grp.size_step = get<int>(g, "size_step", 1);
    s.groups.push_back(std::move(grp));
  }
  s.validate();
  return s;
}

RunConfig parse_run_config(const json& j) {
  try {
    reject_unknown(j, {"sense", "domain", "space", "budget", "workers", "seed", "optimizer",
                       "evaluator"},
                   "config");
    RunConfig c;
    c.sense.sense = parse_sense(get<std::string>(j, "sense", "minimize"));

    if (j.contains("evaluator")) {
      const auto& e = j["evaluator"];
      reject_unknown(e, {"function", "command", "timeout_seconds"}, "evaluator");
      c.evaluator.function = get_opt<std::string>(e, "function");
      c.evaluator.command = get_opt<std::string>(e, "command");
      c.evaluator.timeout_seconds = get<double>(e, "timeout_seconds", 60.0);
    }

    if (j.contains("domain") && j.contains("space"))
      throw ConfigError("config has both 'domain' and 'space'");
    if (j.contains("space")) {
      c.space = parse_space(j["space"]);
    } else if (j.contains("domain")) {
      const auto& d = j["domain"];
      reject_unknown(d, {"lower", "upper", "integer"}, "domain");
      c.lower = d.at("lower").get<std::vector<double>>();
      c.upper = d.at("upper").get<std::vector<double>>();
      c.integer_dims = get<std::vector<std::size_t>>(d, "integer", {});
    } else if (c.evaluator.function) {
      const auto f = testfns::get(*c.evaluator.function);
      c.lower = f.lower;
      c.upper = f.upper;
    } else {
      throw ConfigError("config needs a 'domain' or a 'space'");
    }

    if (j.contains("budget")) {
      const auto& b = j["budget"];
      reject_unknown(b, {"max_evaluations", "max_seconds", "target_value"}, "budget");
      c.budget.max_evaluations = get_opt<std::size_t>(b, "max_evaluations");
      c.budget.max_seconds = get_opt<double>(b, "max_seconds");
      c.budget.target_value = get_opt<double>(b, "target_value");
    }
    if (j.contains("workers")) {
      const auto w = j["workers"].get<long long>();
      if (w < 1) throw ConfigError("workers must be at least 1");
      c.workers = static_cast<std::size_t>(w);
    }
    c.seed = get<std::uint64_t>(j, "seed", 0);

    if (j.contains("optimizer")) {
      const auto& o = j["optimizer"];
      reject_unknown(o, {"kernel", "weights", "value_clipping", "design_size",
                         "max_consecutive_failures", "ga"},
                     "optimizer");
      if (o.contains("kernel")) c.optimizer.kernel = parse_kernel(o["kernel"].get<std::string>());
      if (o.contains("weights")) c.optimizer.weights = o["weights"].get<std::vector<double>>();
      if (o.contains("value_clipping"))
        c.optimizer.value_clipping = parse_clipping(o["value_clipping"].get<std::string>());
      c.optimizer.design_size = get<std::size_t>(o, "design_size", 0);
      c.optimizer.max_consecutive_failures =
          get<std::size_t>(o, "max_consecutive_failures", c.optimizer.max_consecutive_failures);
      if (o.contains("ga")) {
        const auto& g = o["ga"];
        reject_unknown(g, {"population_size", "generations", "mutation_rate", "elite_fraction",
                           "mutation_sigma", "polish_iterations", "local_search"},
                       "optimizer.ga");
        auto& ga = c.optimizer.ga;
        ga.population_size = get<std::size_t>(g, "population_size", ga.population_size);
        ga.generations = get<std::size_t>(g, "generations", ga.generations);
        ga.mutation_rate = get<double>(g, "mutation_rate", ga.mutation_rate);
        ga.elite_fraction = get<double>(g, "elite_fraction", ga.elite_fraction);
        ga.mutation_sigma = get<double>(g, "mutation_sigma", ga.mutation_sigma);
        ga.polish_iterations = get<std::size_t>(g, "polish_iterations", ga.polish_iterations);
        ga.local_search = get<bool>(g, "local_search", ga.local_search);
      }
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  return parse_run_config(j);
}

BoxDomain RunConfig::domain() const {
  if (space) return hpo::to_domain(*space);
  return BoxDomain(lower, upper, integer_dims);
}

void RunConfig::validate() const {
  if (evaluator.function.has_value() == evaluator.command.has_value())
    throw ConfigError("evaluator needs exactly one of 'function' or 'command'");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  const BoxDomain d = domain();
  if (evaluator.function) {
    const auto f = testfns::get(*evaluator.function);
    if (f.dim() != d.dim())
      throw ConfigError(fmt::format("function '{}' has {} dims, domain has {}", f.name, f.dim(),
                                    d.dim()));
  }
  if (evaluator.command && !(evaluator.timeout_seconds > 0.0))
    throw ConfigError("evaluator timeout must be positive");
  WeightCycle check(optimizer.weights);
  optimizer.ga.validate(d.dim());
  const std::size_t design = optimizer.design_size_for(d.dim());
  if (design < d.dim() + 1)
    throw ConfigError(fmt::format("design size {} is below n + 1 = {}", design, d.dim() + 1));
  budget.validate(design);
}

Objective make_objective(const RunConfig& cfg) {
  if (cfg.evaluator.function) {
    auto f = testfns::get(*cfg.evaluator.function);
    return [f = std::move(f.f)](std::span<const double> x) { return f(x); };
  }
  auto ev = std::make_shared<ExternalEvaluator>(*cfg.evaluator.command,
                                                cfg.evaluator.timeout_seconds);
  std::shared_ptr<const hpo::HpoSpace> space;
  if (cfg.space) space = std::make_shared<const hpo::HpoSpace>(*cfg.space);
  return [ev, space](std::span<const double> x) {
    return ev->evaluate(params_json(x, space.get()));
  };
}

}  // namespace rbfsearch::io
