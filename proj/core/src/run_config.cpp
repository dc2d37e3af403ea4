#include "dnt/run_config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>

#include <json.hpp>

#include "dnt/error.hpp"

namespace dnt {

namespace {

using nlohmann::json;

struct Field {
  std::string description;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&, const std::string&)> set;
};

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

std::size_t as_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned()) bad(key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::uint64_t as_u64(const json& v, const std::string& key) {
  if (!v.is_number_unsigned()) bad(key, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) bad(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad(key, "expected a finite number");
  return d;
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

template <typename T>
Field count_field(std::string desc, T TrainConfig::*member) {
  return {std::move(desc), [member](const RunConfig& c) { return json(c.train.*member); },
          [member](RunConfig& c, const json& v, const std::string& k) { c.train.*member = as_count(v, k); }};
}

Field real_field(std::string desc, double TrainConfig::*member) {
  return {std::move(desc), [member](const RunConfig& c) { return json(c.train.*member); },
          [member](RunConfig& c, const json& v, const std::string& k) { c.train.*member = as_real(v, k); }};
}

Field world_count(std::string desc, std::size_t WorldConfig::*member) {
  return {std::move(desc), [member](const RunConfig& c) { return json(c.train.world.*member); },
          [member](RunConfig& c, const json& v, const std::string& k) { c.train.world.*member = as_count(v, k); }};
}

Field world_real(std::string desc, double WorldConfig::*member) {
  return {std::move(desc), [member](const RunConfig& c) { return json(c.train.world.*member); },
          [member](RunConfig& c, const json& v, const std::string& k) { c.train.world.*member = as_real(v, k); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> f;
    f["frames"] = world_count("frames per sequence (T)", &WorldConfig::frames);
    f["slots"] = world_count("query slots per frame (N)", &WorldConfig::slots);
    f["channels"] = world_count("query channels (C); also the model width", &WorldConfig::channels);
    f["objects"] = world_count("objects per sequence (K <= N)", &WorldConfig::objects);
    f["position_channels"] = world_count("position channels (P < C)", &WorldConfig::position_channels);
    f["confusion_pairs"] = world_count("look-alike object pairs whose paths cross", &WorldConfig::confusion_pairs);
    f["drift_sigma"] = world_real("per-frame appearance random-walk scale", &WorldConfig::drift_sigma);
    f["occlusion_rate"] = world_real("per-frame occlusion probability", &WorldConfig::occlusion_rate);

    f["strategy"] = {"noise strategy: none, weighted_average, crop_concat, shuffle",
                     [](const RunConfig& c) { return json(std::string(strategy_name(c.train.strategy))); },
                     [](RunConfig& c, const json& v, const std::string& k) {
                       const auto s = parse_strategy(as_string(v, k));
                       if (!s) bad(k, "unknown strategy '" + v.get<std::string>() + "'");
                       c.train.strategy = *s;
                     }};
    f["steps"] = count_field("optimizer steps", &TrainConfig::steps);
    f["batch_sequences"] = count_field("sequences per step", &TrainConfig::batch_sequences);
    f["eval_every"] = count_field("evaluate every this many steps (0: final step only)", &TrainConfig::eval_every);
    f["eval_sequences"] = count_field("held-out sequences", &TrainConfig::eval_sequences);
    f["learning_rate"] = real_field("Adam learning rate", &TrainConfig::learning_rate);
    f["beta1"] = real_field("Adam beta1", &TrainConfig::beta1);
    f["beta2"] = real_field("Adam beta2", &TrainConfig::beta2);
    f["epsilon"] = real_field("Adam epsilon", &TrainConfig::epsilon);
    f["temperature"] = real_field("similarity logit temperature", &TrainConfig::temperature);
    f["noise_probability"] = real_field("probability that a frame is noised", &TrainConfig::noise_probability);
    f["seed"] = {"root seed", [](const RunConfig& c) { return json(c.train.seed); },
                 [](RunConfig& c, const json& v, const std::string& k) { c.train.seed = as_u64(v, k); }};
    f["layers"] = {"decoder blocks (L)", [](const RunConfig& c) { return json(c.train.model.layers); },
                   [](RunConfig& c, const json& v, const std::string& k) { c.train.model.layers = as_count(v, k); }};
    f["hidden"] = {"feed-forward width (H)", [](const RunConfig& c) { return json(c.train.model.hidden); },
                   [](RunConfig& c, const json& v, const std::string& k) { c.train.model.hidden = as_count(v, k); }};
    f["exclude_self"] = {"never pick a row as its own noise partner",
                         [](const RunConfig& c) { return json(c.train.noise.exclude_self); },
                         [](RunConfig& c, const json& v, const std::string& k) {
                           if (!v.is_boolean()) bad(k, "expected true or false");
                           c.train.noise.exclude_self = v.get<bool>();
                         }};
    f["supervision"] = {"slot_consistent or follow_permutation",
                        [](const RunConfig& c) {
                          return json(c.train.supervision == Supervision::kSlotConsistent ? "slot_consistent"
                                                                                           : "follow_permutation");
                        },
                        [](RunConfig& c, const json& v, const std::string& k) {
                          const std::string s = as_string(v, k);
                          if (s == "slot_consistent") c.train.supervision = Supervision::kSlotConsistent;
                          else if (s == "follow_permutation") c.train.supervision = Supervision::kFollowPermutation;
                          else bad(k, "unknown supervision '" + s + "'");
                        }};
    f["reject_cost"] = {"association rejection threshold on 1 - cosine",
                        [](const RunConfig& c) { return json(c.train.inference.reject_cost); },
                        [](RunConfig& c, const json& v, const std::string& k) {
                          c.train.inference.reject_cost = as_real(v, k);
                          c.train.inference.heuristic.reject_cost = c.train.inference.reject_cost;
                        }};
    f["ema"] = {"heuristic tracker memory decay",
                [](const RunConfig& c) { return json(c.train.inference.heuristic.ema); },
                [](RunConfig& c, const json& v, const std::string& k) { c.train.inference.heuristic.ema = as_real(v, k); }};
    f["out_dir"] = {"output directory", [](const RunConfig& c) { return json(c.out_dir); },
                    [](RunConfig& c, const json& v, const std::string& k) { c.out_dir = as_string(v, k); }};
    f["eval_set"] = {"directory of SEQ1 held-out files (empty: generated)",
                     [](const RunConfig& c) { return json(c.eval_set); },
                     [](RunConfig& c, const json& v, const std::string& k) { c.eval_set = as_string(v, k); }};
    return f;
  }();
  return table;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    const RunConfig defaults;
    for (const auto& [name, field] : fields()) out.push_back({name, field.get(defaults).dump(), field.description});
    return out;
  }();
  return keys;
}

RunConfig parse_run_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : doc.items()) {
    const auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(c, value, key);
  }
  c.train.model.channels = c.train.world.channels;
  c.train.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_run_config(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string to_json(const RunConfig& config) {
  json doc = json::object();
  for (const auto& [name, field] : fields()) doc[name] = field.get(config);
  return doc.dump(2);
}

}  // namespace dnt
