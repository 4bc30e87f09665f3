#include "frain/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace frain {

using nlohmann::json;

namespace {

enum class FieldType { integer, number, boolean, text };

struct Field {
  const char* key;
  FieldType type;
  std::function<json(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const json&)> set;
};

std::string type_name(FieldType t) {
  switch (t) {
    case FieldType::integer: return "a non-negative integer";
    case FieldType::number: return "a number";
    case FieldType::boolean: return "true or false";
    case FieldType::text: return "a string";
  }
  return "?";
}

[[noreturn]] void field_error(const std::string& key, const std::string& msg) {
  throw ConfigError("config field '" + key + "': " + msg);
}

void check_type(const Field& f, const json& v) {
  bool ok = false;
  switch (f.type) {
    case FieldType::integer: ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); break;
    case FieldType::number: ok = v.is_number(); break;
    case FieldType::boolean: ok = v.is_boolean(); break;
    case FieldType::text: ok = v.is_string(); break;
  }
  if (!ok) field_error(f.key, "expected " + type_name(f.type) + ", got " + v.dump());
}

template <class T>
Field integer(const char* key, T SimConfig::*member) {
  return {key, FieldType::integer, [member](const ExperimentConfig& c) { return json(c.sim.*member); },
          [member](ExperimentConfig& c, const json& v) { c.sim.*member = v.get<T>(); }};
}

Field number(const char* key, double SimConfig::*member) {
  return {key, FieldType::number, [member](const ExperimentConfig& c) { return json(c.sim.*member); },
          [member](ExperimentConfig& c, const json& v) { c.sim.*member = v.get<double>(); }};
}

Field boolean(const char* key, bool SimConfig::*member) {
  return {key, FieldType::boolean, [member](const ExperimentConfig& c) { return json(c.sim.*member); },
          [member](ExperimentConfig& c, const json& v) { c.sim.*member = v.get<bool>(); }};
}

template <class E>
Field enumeration(const char* key, E SimConfig::*member, E (*parse)(const std::string&)) {
  return {key, FieldType::text, [member](const ExperimentConfig& c) { return json(to_string(c.sim.*member)); },
          [key, member, parse](ExperimentConfig& c, const json& v) {
            try {
              c.sim.*member = parse(v.get<std::string>());
            } catch (const std::invalid_argument& e) {
              field_error(key, e.what());
            }
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      enumeration("algorithm", &SimConfig::algorithm, &parse_algorithm),
      {"label", FieldType::text, [](const ExperimentConfig& c) { return json(c.sim.label); },
       [](ExperimentConfig& c, const json& v) { c.sim.label = v.get<std::string>(); }},
      integer("num-nodes", &SimConfig::num_nodes),
      integer("proposers-per-round", &SimConfig::proposers_per_round),
      integer("max-delay", &SimConfig::max_delay),
      integer("window", &SimConfig::window),
      number("threshold", &SimConfig::threshold),
      number("fedasync-alpha", &SimConfig::fedasync_alpha),
      enumeration("interpolation", &SimConfig::interpolation, &parse_interpolation),
      enumeration("coefficient", &SimConfig::coefficient, &parse_coefficient),
      enumeration("staleness", &SimConfig::staleness, &parse_staleness_kind),
      number("poly-a", &SimConfig::poly_a),
      number("hinge-a", &SimConfig::hinge_a),
      number("hinge-b", &SimConfig::hinge_b),
      {"task", FieldType::text, [](const ExperimentConfig& c) { return json(to_string(c.sim.task.kind)); },
       [](ExperimentConfig& c, const json& v) {
         try {
           c.sim.task.kind = parse_task_kind(v.get<std::string>());
         } catch (const std::invalid_argument& e) {
           field_error("task", e.what());
         }
       }},
      {"classes", FieldType::integer, [](const ExperimentConfig& c) { return json(c.sim.task.classes); },
       [](ExperimentConfig& c, const json& v) { c.sim.task.classes = v.get<std::size_t>(); }},
      {"dim", FieldType::integer, [](const ExperimentConfig& c) { return json(c.sim.task.dim); },
       [](ExperimentConfig& c, const json& v) { c.sim.task.dim = v.get<std::size_t>(); }},
      {"samples", FieldType::integer, [](const ExperimentConfig& c) { return json(c.sim.task.samples); },
       [](ExperimentConfig& c, const json& v) { c.sim.task.samples = v.get<std::size_t>(); }},
      {"noise", FieldType::number, [](const ExperimentConfig& c) { return json(c.sim.task.noise); },
       [](ExperimentConfig& c, const json& v) { c.sim.task.noise = v.get<double>(); }},
      {"separation", FieldType::number, [](const ExperimentConfig& c) { return json(c.sim.task.separation); },
       [](ExperimentConfig& c, const json& v) { c.sim.task.separation = v.get<double>(); }},
      boolean("iid", &SimConfig::iid),
      number("pareto-shape", &SimConfig::pareto_shape),
      integer("nullifiers", &SimConfig::nullifiers),
      integer("randomizers", &SimConfig::randomizers),
      boolean("byzantine-on-committee", &SimConfig::byzantine_on_committee),
      integer("fastsync-nodes", &SimConfig::fastsync_nodes),
      integer("committee-size", &SimConfig::committee_size),
      number("commit-deadline", &SimConfig::commit_deadline),
      number("reveal-deadline", &SimConfig::reveal_deadline),
      number("committee-dropout", &SimConfig::committee_dropout),
      enumeration("score", &SimConfig::score, &parse_score_kind),
      integer("local-epochs", &SimConfig::local_epochs),
      number("learning-rate", &SimConfig::learning_rate),
      integer("batch-size", &SimConfig::batch_size),
      integer("update-budget", &SimConfig::update_budget),
      integer("eval-every", &SimConfig::eval_every),
      integer("seed", &SimConfig::seed),
      {"repeat", FieldType::integer, [](const ExperimentConfig& c) { return json(c.repeat); },
       [](ExperimentConfig& c, const json& v) { c.repeat = v.get<std::size_t>(); }},
      {"output-dir", FieldType::text, [](const ExperimentConfig& c) { return json(c.output_dir); },
       [](ExperimentConfig& c, const json& v) { c.output_dir = v.get<std::string>(); }},
      {"preset", FieldType::text, [](const ExperimentConfig& c) { return json(c.preset); },
       [](ExperimentConfig& c, const json& v) { c.preset = v.get<std::string>(); }},
  };
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.key) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

json parse_scalar(const Field& f, const std::string& text) {
  switch (f.type) {
    case FieldType::integer: {
      std::uint64_t v = 0;
      const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || end != text.data() + text.size()) field_error(f.key, "expected " + type_name(f.type) + ", got '" + text + "'");
      return json(v);
    }
    case FieldType::number: {
      std::istringstream in(text);
      double v = 0.0;
      in >> v;
      if (!in || !in.eof()) field_error(f.key, "expected a number, got '" + text + "'");
      return json(v);
    }
    case FieldType::boolean:
      if (text == "true") return json(true);
      if (text == "false") return json(false);
      field_error(f.key, "expected true or false, got '" + text + "'");
    case FieldType::text:
      return json(text);
  }
  return json();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (repeat < 1) throw ConfigError("config field 'repeat': must be >= 1");
  if (!preset.empty() && std::find(kPresets.begin(), kPresets.end(), preset) == kPresets.end())
    throw ConfigError("config field 'preset': unknown preset '" + preset + "'");
  try {
    sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

json to_json(const ExperimentConfig& config) {
  json doc = json::object();
  for (const auto& f : fields()) doc[f.key] = f.get(config);
  return doc;
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig config;
  for (const auto& [key, value] : doc.items()) {
    const Field& f = find_field(key);
    check_type(f, value);
    f.set(config, value);
  }
  config.validate();
  return config;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError("config parse error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                      ": " + e.what());
  }
  return config_from_json(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const Field& f = find_field(assignment.substr(0, eq));
  f.set(config, parse_scalar(f, assignment.substr(eq + 1)));
}

std::vector<SimConfig> ablation_matrix(const std::string& preset, const SimConfig& base) {
  std::vector<SimConfig> out;
  auto stressed = [&] {
    SimConfig c = base;
    c.algorithm = Algorithm::frain;
    c.iid = false;
    c.max_delay = 16;
    c.fastsync_nodes = 11;
    return c;
  };

  if (preset == "fastsync") {
    for (bool iid : {true, false}) {
      for (std::size_t k : {0, 7, 11, 21}) {
        SimConfig c = base;
        c.algorithm = Algorithm::frain;
        c.iid = iid;
        c.fastsync_nodes = k;
        c.label = "frain:fastsync=" + std::to_string(k) + (iid ? ":iid" : ":non-iid");
        out.push_back(c);
      }
    }
  } else if (preset == "slerp_vs_lerp") {
    for (auto interp : {Interpolation::slerp, Interpolation::lerp}) {
      SimConfig c = stressed();
      c.interpolation = interp;
      c.label = "frain:" + to_string(interp);
      out.push_back(c);
    }
  } else if (preset == "staleness") {
    for (auto kind : {StalenessKind::constant, StalenessKind::polynomial, StalenessKind::hinge}) {
      SimConfig c = stressed();
      c.staleness = kind;
      c.label = "frain:" + to_string(kind);
      out.push_back(c);
    }
  } else if (preset == "byzantine") {
    SimConfig clean = base;
    clean.iid = false;
    clean.nullifiers = 0;
    clean.randomizers = 0;
    clean.algorithm = Algorithm::frain;
    clean.label = "frain:clean";
    out.push_back(clean);
    for (const char* adversary : {"randomizers", "nullifiers"}) {
      for (auto algo : {Algorithm::fedavg, Algorithm::fedasync, Algorithm::brain, Algorithm::frain}) {
        SimConfig c = clean;
        c.algorithm = algo;
        if (std::string(adversary) == "randomizers")
          c.randomizers = 10;
        else
          c.nullifiers = 10;
        c.label = to_string(algo) + ":" + adversary + "=10";
        out.push_back(c);
      }
    }
  } else {
    throw ConfigError("unknown preset '" + preset + "' (expected fastsync, slerp_vs_lerp, staleness or byzantine)");
  }
  return out;
}

}  // namespace frain
