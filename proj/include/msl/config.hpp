#ifndef MSL_CONFIG_HPP
#define MSL_CONFIG_HPP

// JSON configuration files. Two documents are recognised, each tagged with a schema string:
//   "msl-env/1"     environment schedule (preset, segments or gradual drift)
//   "msl-config/1"  simulation parameters; every key is optional and overrides the default

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "msl/harness.hpp"

namespace msl {

using Json = nlohmann::json;

inline constexpr const char* kEnvSchema = "msl-env/1";
inline constexpr const char* kConfigSchema = "msl-config/1";

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
}

inline void require_schema(const Json& j, const char* schema) {
  if (!j.is_object()) throw ConfigError("configuration document must be a JSON object");
  auto it = j.find("schema");
  if (it == j.end() || !it->is_string()) throw ConfigError(std::string("missing \"schema\" (expected ") + schema + ")");
  if (it->get<std::string>() != schema)
    throw ConfigError("unsupported schema '" + it->get<std::string>() + "' (expected " + schema + ")");
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

// ---- reward models and schedules ----

inline RewardModel reward_from_json(const Json& j) {
  std::string dist = get_or<std::string>(j, "dist", "gaussian");
  if (dist == "gaussian") return RewardModel::gaussian(get_or(j, "mu", 0.0), get_or(j, "sigma", 0.0));
  if (dist == "bernoulli") return RewardModel::bernoulli(get_or(j, "p", 0.0), get_or(j, "low", 0.0), get_or(j, "high", 1.0));
  throw ConfigError("unknown reward distribution '" + dist + "'");
}

inline Json reward_to_json(const RewardModel& m) {
  if (m.kind == RewardKind::Gaussian) return {{"dist", "gaussian"}, {"mu", m.mu}, {"sigma", m.sigma}};
  return {{"dist", "bernoulli"}, {"p", m.p}, {"low", m.low}, {"high", m.high}};
}

inline Sinusoid sinusoid_from_json(const Json& j) {
  Sinusoid s;
  s.offset = get_or(j, "offset", 0.0);
  s.amplitude = get_or(j, "amplitude", 0.0);
  s.period = get_or(j, "period", 1.0);
  s.phase = get_or(j, "phase", 0.0);
  if (!(s.period > 0.0)) throw ConfigError("sinusoid period must be positive");
  return s;
}

inline Json sinusoid_to_json(const Sinusoid& s) {
  return {{"offset", s.offset}, {"amplitude", s.amplitude}, {"period", s.period}, {"phase", s.phase}};
}

inline EnvironmentSchedule env_from_json(const Json& j, std::uint64_t seed = 1) {
  require_schema(j, kEnvSchema);
  if (j.contains("preset")) return make_preset(get_or<std::string>(j, "preset", ""), get_or(j, "seed", seed));
  if (j.contains("segments")) {
    std::vector<Segment> segs;
    for (const auto& s : j.at("segments")) {
      Segment seg;
      seg.duration = get_or<std::size_t>(s, "duration", 0);
      if (!s.contains("arms")) throw ConfigError("segment without \"arms\"");
      for (const auto& a : s.at("arms")) seg.arms.push_back(reward_from_json(a));
      segs.push_back(std::move(seg));
    }
    return EnvironmentSchedule::from_segments(std::move(segs));
  }
  if (j.contains("gradual")) {
    const Json& g = j.at("gradual");
    GradualSpec spec;
    spec.horizon = get_or<std::size_t>(g, "horizon", 0);
    for (const auto& s : g.at("mean")) spec.mean.push_back(sinusoid_from_json(s));
    for (const auto& s : g.at("sigma")) spec.sigma.push_back(sinusoid_from_json(s));
    return EnvironmentSchedule::from_gradual(std::move(spec));
  }
  throw ConfigError("environment needs one of \"preset\", \"segments\" or \"gradual\"");
}

inline Json env_to_json(const EnvironmentSchedule& env) {
  Json j = {{"schema", kEnvSchema}};
  if (env.is_gradual()) {
    Json mean = Json::array(), sigma = Json::array();
    for (const auto& s : env.gradual()->mean) mean.push_back(sinusoid_to_json(s));
    for (const auto& s : env.gradual()->sigma) sigma.push_back(sinusoid_to_json(s));
    j["gradual"] = {{"horizon", env.horizon()}, {"mean", mean}, {"sigma", sigma}};
    return j;
  }
  Json segs = Json::array();
  for (const auto& s : env.segments()) {
    Json arms = Json::array();
    for (const auto& a : s.arms) arms.push_back(reward_to_json(a));
    segs.push_back({{"duration", s.duration}, {"arms", arms}});
  }
  j["segments"] = segs;
  return j;
}

/// A path to an msl-env/1 file, or a preset name.
inline EnvironmentSchedule load_env(const std::string& spec, std::uint64_t seed = 1) {
  if (std::filesystem::exists(spec)) return env_from_json(read_json_file(spec), seed);
  return make_preset(spec, seed);
}

// ---- simulation parameters ----

inline void apply_params(const Json& j, EvoParams& p) {
  static const char* known[] = {"schema", "m", "epsilon", "beta", "tau", "mr", "s", "fitness_floor",
                                "random_success_ties", "reset_q_on_mutation", "selection_in_lifetime",
                                "record_odpu", "context", "bandit"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown configuration key '" + it.key() + "'");
  }
  p.m = get_or(j, "m", p.m);
  p.epsilon = get_or(j, "epsilon", p.epsilon);
  p.beta = get_or(j, "beta", p.beta);
  p.tau = get_or(j, "tau", p.tau);
  p.mr = get_or(j, "mr", p.mr);
  p.s = get_or(j, "s", p.s);
  p.fitness_floor = get_or(j, "fitness_floor", p.fitness_floor);
  p.random_success_ties = get_or(j, "random_success_ties", p.random_success_ties);
  p.reset_q_on_mutation = get_or(j, "reset_q_on_mutation", p.reset_q_on_mutation);
  p.selection_in_lifetime = get_or(j, "selection_in_lifetime", p.selection_in_lifetime);
  p.record_odpu = get_or(j, "record_odpu", p.record_odpu);
  if (j.contains("context")) {
    const Json& c = j.at("context");
    p.context.th_ec = get_or(c, "th_ec", p.context.th_ec);
    p.context.th_u = get_or(c, "th_u", p.context.th_u);
    p.context.delta = get_or(c, "delta", p.context.delta);
  }
  if (j.contains("bandit")) {
    const Json& b = j.at("bandit");
    p.bandit.epsilon = get_or(b, "epsilon", p.bandit.epsilon);
    p.bandit.beta = get_or(b, "beta", p.bandit.beta);
    p.bandit.ucb_c = get_or(b, "ucb_c", p.bandit.ucb_c);
    p.bandit.epsilon_ql = get_or(b, "epsilon_ql", p.bandit.epsilon_ql);
    p.bandit.alpha_ql = get_or(b, "alpha_ql", p.bandit.alpha_ql);
    p.bandit.gamma_ql = get_or(b, "gamma_ql", p.bandit.gamma_ql);
  }
  p.validate();
}

inline EvoParams params_from_json(const Json& j) {
  require_schema(j, kConfigSchema);
  EvoParams p;
  apply_params(j, p);
  return p;
}

inline Json params_to_json(const EvoParams& p) {
  return {{"schema", kConfigSchema},
          {"m", p.m},
          {"epsilon", p.epsilon},
          {"beta", p.beta},
          {"tau", p.tau},
          {"mr", p.mr},
          {"s", p.s},
          {"fitness_floor", p.fitness_floor},
          {"random_success_ties", p.random_success_ties},
          {"reset_q_on_mutation", p.reset_q_on_mutation},
          {"selection_in_lifetime", p.selection_in_lifetime},
          {"record_odpu", p.record_odpu},
          {"context", {{"th_ec", p.context.th_ec}, {"th_u", p.context.th_u}, {"delta", p.context.delta}}},
          {"bandit",
           {{"epsilon", p.bandit.epsilon},
            {"beta", p.bandit.beta},
            {"ucb_c", p.bandit.ucb_c},
            {"epsilon_ql", p.bandit.epsilon_ql},
            {"alpha_ql", p.bandit.alpha_ql},
            {"gamma_ql", p.bandit.gamma_ql}}}};
}

inline EvoParams load_params(const std::string& path) { return params_from_json(read_json_file(path)); }

/// Hash of the canonical (key-sorted, compact) serialisation.
inline std::string config_hash(const Json& j) { return hex64(fnv1a(j.dump())); }

}  // namespace msl

#endif
