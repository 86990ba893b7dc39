#include "fedgh/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fedgh/error.hpp"

namespace fedgh {
namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Reads fields from one JSON object and rejects any key that was never asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return join(path_, key); }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = get(key);
    if (!v) throw ConfigError(path(key), "missing required field");
    return *v;
  }

  double number(const std::string& key, double fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(path(key), "expected a number");
    return v->get<double>();
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    return as_count(*v, path(key));
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(path(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown key");
    }
  }

  static std::size_t as_count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where, "expected a non-negative integer");
    return v.get<std::size_t>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void positive(double v, const std::string& where) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(where, "must be > 0");
}

void at_least_one(std::size_t v, const std::string& where) {
  if (v < 1) throw ConfigError(where, "must be >= 1");
}

// A scalar broadcasts to every dimension; an array must have exactly dim entries.
std::vector<double> read_vector(const json* v, std::size_t dim, double fallback, const std::string& where) {
  if (!v) return std::vector<double>(dim, fallback);
  if (v->is_number()) return std::vector<double>(dim, v->get<double>());
  if (!v->is_array()) throw ConfigError(where, "expected a number or an array of numbers");
  if (v->size() != dim) {
    throw ConfigError(where, "expected " + std::to_string(dim) + " entries, got " + std::to_string(v->size()));
  }
  std::vector<double> out;
  for (const auto& e : *v) {
    if (!e.is_number()) throw ConfigError(where, "expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

ModelKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "logistic") return ModelKind::logistic;
  if (s == "mlp") return ModelKind::mlp;
  if (s == "quadratic") return ModelKind::quadratic;
  throw ConfigError(where, "unknown model kind '" + s + "' (logistic, mlp, quadratic)");
}

PartitionScheme parse_scheme(const std::string& s, const std::string& where) {
  if (s == "dirichlet") return PartitionScheme::dirichlet;
  if (s == "class_shard") return PartitionScheme::class_shard;
  if (s == "iid") return PartitionScheme::iid;
  throw ConfigError(where, "unknown partition scheme '" + s + "' (dirichlet, class_shard, iid)");
}

Aggregator parse_aggregator(const std::string& s, const std::string& where) {
  if (s == "fedavg") return Aggregator::fedavg;
  if (s == "fednova") return Aggregator::fednova;
  throw ConfigError(where, "unknown aggregator '" + s + "' (fedavg, fednova)");
}

DataConfig parse_data(const json* j) {
  DataConfig d;
  if (!j) return d;
  ObjectReader r(*j, "data");
  d.num_classes = r.count("num_classes", d.num_classes);
  d.per_class = r.count("per_class", d.per_class);
  d.dim = r.count("dim", d.dim);
  d.separation = r.number("separation", d.separation);
  d.test_fraction = r.number("test_fraction", d.test_fraction);
  r.finish();
  if (d.num_classes < 2) throw ConfigError("data.num_classes", "must be >= 2");
  if (d.per_class < 2) throw ConfigError("data.per_class", "must be >= 2 so every class keeps a training sample");
  at_least_one(d.dim, "data.dim");
  positive(d.separation, "data.separation");
  if (!(d.test_fraction > 0.0 && d.test_fraction < 1.0)) throw ConfigError("data.test_fraction", "must be in (0, 1)");
  return d;
}

ModelConfig parse_model(const json& j, const DataConfig& data) {
  ObjectReader r(j, "model");
  ModelConfig m;
  const json& kind = r.require("kind");
  if (!kind.is_string()) throw ConfigError("model.kind", "expected a string");
  m.kind = parse_kind(kind.get<std::string>(), "model.kind");
  if (m.kind == ModelKind::mlp) {
    m.hidden_dim = r.count("hidden_dim", m.hidden_dim);
    at_least_one(m.hidden_dim, "model.hidden_dim");
  } else if (r.has("hidden_dim")) {
    throw ConfigError("model.hidden_dim", "only valid for the mlp model");
  }
  if (m.kind == ModelKind::quadratic) {
    m.curvature = read_vector(r.get("curvature"), data.dim, 1.0, "model.curvature");
    m.target = read_vector(r.get("target"), data.dim, 1.0, "model.target");
    for (double a : m.curvature) {
      if (!(a >= 1e-6)) throw ConfigError("model.curvature", "entries must be >= 1e-6");
    }
  } else if (r.has("curvature") || r.has("target")) {
    throw ConfigError(r.has("curvature") ? "model.curvature" : "model.target", "only valid for the quadratic model");
  }
  r.finish();
  return m;
}

PartitionConfig parse_partition(const json& j, const DataConfig& data) {
  ObjectReader r(j, "partition");
  PartitionConfig p;
  const json& scheme = r.require("scheme");
  if (!scheme.is_string()) throw ConfigError("partition.scheme", "expected a string");
  p.scheme = parse_scheme(scheme.get<std::string>(), "partition.scheme");
  p.clients = ObjectReader::as_count(r.require("clients"), "partition.clients");
  at_least_one(p.clients, "partition.clients");
  if (p.scheme == PartitionScheme::dirichlet) {
    const json& a = r.require("alpha");
    if (a.is_string() && (a.get<std::string>() == "inf" || a.get<std::string>() == "infinity")) {
      p.alpha = kIidAlpha;
    } else if (a.is_number()) {
      p.alpha = a.get<double>();
      if (!(p.alpha > 0.0)) throw ConfigError("partition.alpha", "must be > 0");
    } else {
      throw ConfigError("partition.alpha", "expected a positive number or \"inf\"");
    }
  } else if (r.has("alpha")) {
    throw ConfigError("partition.alpha", "only valid for the dirichlet scheme");
  }
  r.finish();
  if (p.scheme == PartitionScheme::class_shard && data.num_classes % p.clients != 0) {
    throw ConfigError("partition.clients", "class_shard needs data.num_classes divisible by the client count");
  }
  const std::size_t min_train = data.num_classes * (data.per_class - 1);
  if (p.scheme != PartitionScheme::class_shard && p.clients > min_train) {
    throw ConfigError("partition.clients", "more clients than training samples");
  }
  return p;
}

LocalConfig parse_local(const json* j) {
  LocalConfig l;
  if (!j) return l;
  ObjectReader r(*j, "local");
  l.epochs = r.count("epochs", l.epochs);
  l.batch_size = r.count("batch_size", l.batch_size);
  l.learning_rate = r.number("learning_rate", l.learning_rate);
  l.momentum = r.number("momentum", l.momentum);
  l.prox_mu = r.number("prox_mu", l.prox_mu);
  r.finish();
  at_least_one(l.epochs, "local.epochs");
  at_least_one(l.batch_size, "local.batch_size");
  positive(l.learning_rate, "local.learning_rate");
  if (!(l.momentum >= 0.0 && l.momentum < 1.0)) throw ConfigError("local.momentum", "must be in [0, 1)");
  if (!(l.prox_mu >= 0.0)) throw ConfigError("local.prox_mu", "must be >= 0");
  return l;
}

StrategyConfig parse_strategy(const json& j, const std::string& where, std::size_t clients) {
  ObjectReader r(j, where);
  StrategyConfig s;
  const json& name = r.require("name");
  if (!name.is_string() || name.get<std::string>().empty()) throw ConfigError(r.path("name"), "expected a non-empty string");
  s.name = name.get<std::string>();
  if (s.name.find_first_of("/\\") != std::string::npos || s.name == "." || s.name == "..") {
    throw ConfigError(r.path("name"), "must be usable as a directory name");
  }
  s.aggregator = parse_aggregator(r.string("aggregator", "fedavg"), r.path("aggregator"));
  s.harmonize = r.boolean("harmonize", false);
  s.client_fraction = r.number("client_fraction", 1.0);
  s.rounds = ObjectReader::as_count(r.require("rounds"), r.path("rounds"));
  if (const json* mu = r.get("prox_mu")) {
    if (!mu->is_number() || !(mu->get<double>() >= 0.0)) throw ConfigError(r.path("prox_mu"), "must be a number >= 0");
    s.prox_mu = mu->get<double>();
  }
  r.finish();
  if (!(s.client_fraction > 0.0 && s.client_fraction <= 1.0)) {
    throw ConfigError(r.path("client_fraction"), "must be in (0, 1]");
  }
  at_least_one(s.rounds, r.path("rounds"));
  if (s.harmonize && sample_size(clients, s.client_fraction) < 2) {
    throw ConfigError(r.path("harmonize"), "needs at least 2 sampled clients per round");
  }
  return s;
}

}  // namespace

ModelSpec ExperimentConfig::model_spec() const {
  switch (model.kind) {
    case ModelKind::logistic: return ModelSpec::logistic(data.dim, data.num_classes);
    case ModelKind::mlp: return ModelSpec::mlp(data.dim, model.hidden_dim, data.num_classes);
    case ModelKind::quadratic: return ModelSpec::quadratic(model.curvature, ParamVector(model.target));
  }
  throw ContractError("unknown model kind");
}

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  ObjectReader root(doc, "");
  ExperimentConfig cfg;
  cfg.data = parse_data(root.get("data"));
  cfg.model = parse_model(root.require("model"), cfg.data);
  cfg.partition = parse_partition(root.require("partition"), cfg.data);
  cfg.local = parse_local(root.get("local"));

  const json& strategies = root.require("strategies");
  if (!strategies.is_array() || strategies.empty()) throw ConfigError("strategies", "expected a non-empty array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    const std::string where = "strategies[" + std::to_string(i) + "]";
    cfg.strategies.push_back(parse_strategy(strategies[i], where, cfg.partition.clients));
    if (!names.insert(cfg.strategies.back().name).second) {
      throw ConfigError(where + ".name", "duplicate strategy name '" + cfg.strategies.back().name + "'");
    }
  }

  const json& seeds = root.require("seeds");
  if (!seeds.is_array() || seeds.empty()) throw ConfigError("seeds", "expected a non-empty array of integers");
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    cfg.seeds.push_back(ObjectReader::as_count(seeds[i], "seeds[" + std::to_string(i) + "]"));
  }

  cfg.output_dir = root.string("output_dir", cfg.output_dir);
  cfg.threads = root.count("threads", cfg.threads);
  at_least_one(cfg.threads, "threads");
  cfg.record_timing = root.boolean("record_timing", cfg.record_timing);
  root.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  json model = {{"kind", to_string(cfg.model.kind)}};
  if (cfg.model.kind == ModelKind::mlp) model["hidden_dim"] = cfg.model.hidden_dim;
  if (cfg.model.kind == ModelKind::quadratic) {
    model["curvature"] = cfg.model.curvature;
    model["target"] = cfg.model.target;
  }
  json partition = {{"scheme", to_string(cfg.partition.scheme)}, {"clients", cfg.partition.clients}};
  if (cfg.partition.scheme == PartitionScheme::dirichlet) {
    if (std::isinf(cfg.partition.alpha)) {
      partition["alpha"] = "inf";
    } else {
      partition["alpha"] = cfg.partition.alpha;
    }
  }
  json strategies = json::array();
  for (const auto& s : cfg.strategies) {
    json js = {{"name", s.name},
               {"aggregator", to_string(s.aggregator)},
               {"harmonize", s.harmonize},
               {"client_fraction", s.client_fraction},
               {"rounds", s.rounds}};
    if (s.prox_mu) js["prox_mu"] = *s.prox_mu;
    strategies.push_back(std::move(js));
  }
  return {{"model", std::move(model)},
          {"data",
           {{"num_classes", cfg.data.num_classes},
            {"per_class", cfg.data.per_class},
            {"dim", cfg.data.dim},
            {"separation", cfg.data.separation},
            {"test_fraction", cfg.data.test_fraction}}},
          {"partition", std::move(partition)},
          {"local",
           {{"epochs", cfg.local.epochs},
            {"batch_size", cfg.local.batch_size},
            {"learning_rate", cfg.local.learning_rate},
            {"momentum", cfg.local.momentum},
            {"prox_mu", cfg.local.prox_mu}}},
          {"strategies", std::move(strategies)},
          {"seeds", cfg.seeds},
          {"output_dir", cfg.output_dir},
          {"threads", cfg.threads},
          {"record_timing", cfg.record_timing}};
}

}  // namespace fedgh
