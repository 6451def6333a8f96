#include "app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace flashsim::app {

namespace {

using nlohmann::json;

const std::set<std::string> kModels = {"grw", "fock", "multitime", "relativistic"};

std::string describe(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return "null";
    case json::value_t::boolean: return "a boolean";
    case json::value_t::string: return "a string";
    case json::value_t::array: return "an array";
    case json::value_t::object: return "an object";
    default: return "a number";
  }
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number, got " + describe(j));
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

long long as_integer(const json& j, const std::string& field) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw ConfigError(field, "expected an integer, got " + describe(j));
  return j.get<long long>();
}

std::string as_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string, got " + describe(j));
  return j.get<std::string>();
}

// Reads the keys of one object, remembering which were consumed.
class Reader {
 public:
  Reader(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj.is_object()) throw ConfigError(prefix_.empty() ? "<document>" : prefix_, "expected an object");
  }
  std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }
  const json& require(const std::string& key) {
    const json* j = find(key);
    if (!j) throw ConfigError(name(key), "missing required field");
    return *j;
  }
  double positive(const std::string& key, double fallback) {
    const json* j = find(key);
    if (!j) return fallback;
    const double v = as_number(*j, name(key));
    if (!(v > 0)) throw ConfigError(name(key), "must be positive");
    return v;
  }
  double number(const std::string& key, double fallback) {
    const json* j = find(key);
    return j ? as_number(*j, name(key)) : fallback;
  }
  long long integer(const std::string& key, long long fallback, long long lo, long long hi) {
    const json* j = find(key);
    if (!j) return fallback;
    const long long v = as_integer(*j, name(key));
    if (v < lo || v > hi)
      throw ConfigError(name(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }
  void no_unknown() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(name(it.key()), "unknown field");
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

}  // namespace

Config parse_config(const json& doc) {
  Reader r(doc, "");
  Config c;
  c.model = as_string(r.require("model"), "model");
  if (!kModels.count(c.model)) throw ConfigError("model", "unknown model '" + c.model + "'");
  c.experiment = as_string(r.require("experiment"), "experiment");

  if (const json* g = r.find("grid")) {
    Reader gr(*g, "grid");
    const int d = static_cast<int>(gr.integer("d", 1, 1, 3));
    const int points = static_cast<int>(gr.integer("points", 16, 2, 4096));
    const double spacing = gr.positive("spacing", 0.5);
    gr.no_unknown();
    c.grid = GridSpec::centered(d, points, spacing);
  }
  c.sigma = r.positive("sigma", c.sigma);
  c.tau = r.positive("tau", c.tau);
  c.mass = r.positive("mass", c.mass);
  c.momentum_cutoff = r.positive("momentum_cutoff", c.momentum_cutoff);
  c.modes = static_cast<int>(r.integer("modes", c.modes, 4, 8192));
  c.momentum_center = r.number("momentum_center", c.momentum_center);
  if (const json* j = r.find("positive_energy_only")) {
    if (!j->is_boolean()) throw ConfigError("positive_energy_only", "expected a boolean, got " + describe(*j));
    c.positive_energy_only = j->get<bool>();
  }
  c.particles = static_cast<int>(r.integer("particles", c.model == "multitime" ? 2 : 1, 1, 3));
  if (const json* j = r.find("statistics")) {
    try {
      c.statistics = statistics_from_string(as_string(*j, "statistics"));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("statistics", "expected \"fermion\" or \"boson\"");
    }
  }
  c.n_max = static_cast<int>(r.integer("n_max", c.n_max, 0, 8));
  if (const json* j = r.find("seeds")) {
    if (!j->is_array()) throw ConfigError("seeds", "expected an array of [t, x] pairs");
    for (std::size_t i = 0; i < j->size(); ++i) {
      const std::string f = "seeds[" + std::to_string(i) + "]";
      const json& p = (*j)[i];
      if (!p.is_array() || p.size() != 2) throw ConfigError(f, "expected a [t, x] pair");
      c.seeds.push_back({as_number(p[0], f + "[0]"), as_number(p[1], f + "[1]")});
    }
  }
  if (const json* j = r.find("initial_state")) {
    Reader ir(*j, "initial_state");
    c.initial_state.kind = as_string(ir.require("kind"), "initial_state.kind");
    if (const json* p = ir.find("params")) {
      if (!p->is_object()) throw ConfigError("initial_state.params", "expected an object");
      c.initial_state.params = *p;
    }
    ir.no_unknown();
  }
  c.horizon = r.positive("horizon", c.horizon);
  c.trajectories = static_cast<std::size_t>(r.integer("trajectories", static_cast<long long>(c.trajectories), 0, 100000000));
  if (const json* j = r.find("seed")) {
    const long long s = as_integer(*j, "seed");
    if (s < 0) throw ConfigError("seed", "must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (const json* j = r.find("tolerances")) {
    Reader tr(*j, "tolerances");
    for (auto it = j->begin(); it != j->end(); ++it) c.tolerances[it.key()] = tr.positive(it.key(), 0);
  }
  r.no_unknown();

  if (c.model == "grw" || c.model == "multitime") {
    Index size = 1;
    for (int i = 0; i < c.particles; ++i) size *= c.grid.size();
    if (size > 4096) throw ConfigError("grid.points", "configuration space too large (" + std::to_string(size) + " > 4096)");
  }
  if (c.model == "relativistic" && c.particles > 2) throw ConfigError("particles", "relativistic runs take 1 or 2 particles");
  if (c.model == "multitime" && c.particles < 2) throw ConfigError("particles", "multitime runs need at least 2 systems");
  if (!c.seeds.empty() && c.seeds.size() != static_cast<std::size_t>(c.particles))
    throw ConfigError("seeds", "expected one seed per particle type");
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

double Params::number(const std::string& key, double fallback) const {
  auto it = p_.find(key);
  return it == p_.end() ? fallback : as_number(*it, "initial_state.params." + key);
}

bool Params::flag(const std::string& key, bool fallback) const {
  auto it = p_.find(key);
  if (it == p_.end()) return fallback;
  if (!it->is_boolean()) throw ConfigError("initial_state.params." + key, "expected a boolean, got " + describe(*it));
  return it->get<bool>();
}

std::string Params::text(const std::string& key, const std::string& fallback) const {
  auto it = p_.find(key);
  return it == p_.end() ? fallback : as_string(*it, "initial_state.params." + key);
}

std::vector<double> Params::numbers(const std::string& key, std::vector<double> fallback) const {
  auto it = p_.find(key);
  if (it == p_.end()) return fallback;
  const std::string f = "initial_state.params." + key;
  if (!it->is_array()) throw ConfigError(f, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < it->size(); ++i) out.push_back(as_number((*it)[i], f + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> Params::integers(const std::string& key, std::vector<int> fallback) const {
  auto it = p_.find(key);
  if (it == p_.end()) return fallback;
  const std::string f = "initial_state.params." + key;
  if (!it->is_array()) throw ConfigError(f, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < it->size(); ++i)
    out.push_back(static_cast<int>(as_integer((*it)[i], f + "[" + std::to_string(i) + "]")));
  return out;
}

}  // namespace flashsim::app
