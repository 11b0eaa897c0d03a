#ifndef MSL_META_HPP
#define MSL_META_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "msl/context.hpp"
#include "msl/learning.hpp"

namespace msl {

enum class StrategyKind : std::uint8_t { IndividualLearning = 0, SuccessBased = 1, Conformist = 2 };
inline constexpr std::size_t kStrategyCount = 3;

inline const char* to_string(StrategyKind s) {
  switch (s) {
    case StrategyKind::IndividualLearning: return "IL";
    case StrategyKind::SuccessBased: return "Success";
    case StrategyKind::Conformist: return "Conformist";
  }
  return "?";
}

inline StrategyKind strategy_from_index(std::size_t i) {
  if (i >= kStrategyCount) throw ConfigError("strategy index out of range");
  return static_cast<StrategyKind>(i);
}

enum class MetaKind : std::uint8_t {
  ILOnly,
  SLRand,
  SLProp,
  SLConf,
  SLSucc,
  SLECConf,
  SLECSucc,
  SLECConfUnc,
  SLRL,
  SLQL,
  SLUCB,
  SLGA,
  SLNE
};
inline constexpr std::size_t kMetaCount = 13;

inline constexpr std::array<MetaKind, kMetaCount> kAllMetaKinds = {
    MetaKind::ILOnly,   MetaKind::SLRand,   MetaKind::SLProp,      MetaKind::SLConf, MetaKind::SLSucc,
    MetaKind::SLECConf, MetaKind::SLECSucc, MetaKind::SLECConfUnc, MetaKind::SLRL,   MetaKind::SLQL,
    MetaKind::SLUCB,    MetaKind::SLGA,     MetaKind::SLNE};

inline const char* to_string(MetaKind m) {
  static constexpr const char* names[kMetaCount] = {"IL-Only",   "SL-Rand",    "SL-Prop",        "SL-Conf",
                                                    "SL-Succ",   "SL-EC-Conf", "SL-EC-Succ",     "SL-EC-Conf-Unc",
                                                    "SL-RL",     "SL-QL",      "SL-UCB",         "SL-GA",
                                                    "SL-NE"};
  return names[static_cast<std::size_t>(m)];
}

/// Accepts the display names; "SL-EC-Unc" is an alias of SL-EC-Succ.
inline MetaKind meta_from_string(std::string_view name) {
  for (MetaKind m : kAllMetaKinds)
    if (name == to_string(m)) return m;
  if (name == "SL-EC-Unc") return MetaKind::SLECSucc;
  throw ConfigError("unknown meta-strategy '" + std::string(name) + "'");
}

inline std::size_t index_of(MetaKind m) { return static_cast<std::size_t>(m); }

// ---- observation-based dispatch -------------------------------------------------------------

inline StrategyKind msl_ec_conf_unc(const ContextFlags& c) {
  if (c.ec) return StrategyKind::IndividualLearning;
  if (c.conf) return StrategyKind::Conformist;
  if (!c.unc) return StrategyKind::SuccessBased;
  return StrategyKind::IndividualLearning;
}

inline StrategyKind msl_ec_conf(const ContextFlags& c) {
  if (c.ec) return StrategyKind::IndividualLearning;
  return c.conf ? StrategyKind::Conformist : StrategyKind::IndividualLearning;
}

inline StrategyKind msl_ec_succ(const ContextFlags& c) {
  if (c.ec) return StrategyKind::IndividualLearning;
  return c.unc ? StrategyKind::IndividualLearning : StrategyKind::SuccessBased;
}

/// Context-free baselines.
inline StrategyKind msl_fixed(MetaKind kind, Rng& rng) {
  switch (kind) {
    case MetaKind::ILOnly:
      return StrategyKind::IndividualLearning;
    case MetaKind::SLRand:
      return strategy_from_index(uniform_index(rng, kStrategyCount));
    case MetaKind::SLProp: {
      double u = uniform01(rng);
      if (u < 0.45) return StrategyKind::SuccessBased;
      if (u < 0.90) return StrategyKind::Conformist;
      return StrategyKind::IndividualLearning;
    }
    case MetaKind::SLConf:
      return uniform01(rng) < 0.95 ? StrategyKind::Conformist : StrategyKind::IndividualLearning;
    case MetaKind::SLSucc:
      return uniform01(rng) < 0.95 ? StrategyKind::SuccessBased : StrategyKind::IndividualLearning;
    default:
      throw ConfigError(std::string("msl_fixed called with non-baseline kind ") + to_string(kind));
  }
}

// ---- SL-GA rule table ------------------------------------------------------------------------

inline constexpr std::size_t kRuleStates = 8;

/// Discrete genotype: one strategy per (EC, C, U) state, indexed 4*EC + 2*C + U, plus thresholds.
struct RuleTable {
  std::array<StrategyKind, kRuleStates> rules{};
  double th_ec = 0.15;
  double th_u = 0.1;

  ContextParams params(std::size_t delta = 1) const { return {th_ec, th_u, delta}; }

  friend bool operator==(const RuleTable&, const RuleTable&) = default;
};

inline StrategyKind msl_rule_table(const RuleTable& table, const ContextFlags& c) { return table.rules[c.state()]; }

inline RuleTable rule_table_from(StrategyKind (*dispatch)(const ContextFlags&), double th_ec, double th_u) {
  RuleTable t;
  t.th_ec = th_ec;
  t.th_u = th_u;
  for (std::size_t s = 0; s < kRuleStates; ++s) {
    ContextFlags f{static_cast<int>((s >> 2) & 1), static_cast<int>((s >> 1) & 1), static_cast<int>(s & 1)};
    t.rules[s] = dispatch(f);
  }
  return t;
}

/// The evolved SL-GA policy shipped as reference: SL-EC-Conf-Unc's table with th_u = 0.05.
inline RuleTable reference_rule_table() { return rule_table_from(msl_ec_conf_unc, 0.15, 0.05); }

inline std::size_t count_matching_states(const RuleTable& table, StrategyKind (*dispatch)(const ContextFlags&)) {
  std::size_t hits = 0;
  for (std::size_t s = 0; s < kRuleStates; ++s) {
    ContextFlags f{static_cast<int>((s >> 2) & 1), static_cast<int>((s >> 1) & 1), static_cast<int>(s & 1)};
    if (table.rules[s] == dispatch(f)) ++hits;
  }
  return hits;
}

// ---- SL-NE feed-forward controller -----------------------------------------------------------

/// One hidden layer, bias units on input and hidden layers, tanh hidden activation, linear outputs.
/// Flat layout: hidden-major input weights (hidden x (inputs+1)), then output-major hidden weights
/// (3 x (hidden+1)); the bias weight is the last entry of each row.
struct FCNWeights {
  std::size_t inputs = 6;
  std::size_t hidden = 12;
  std::vector<double> w;

  static std::size_t parameter_count(std::size_t inputs, std::size_t hidden) {
    return hidden * (inputs + 1) + kStrategyCount * (hidden + 1);
  }

  static FCNWeights zeros(std::size_t arms = 2, std::size_t hidden = 12) {
    FCNWeights f;
    f.inputs = 3 * arms;
    f.hidden = hidden;
    f.w.assign(parameter_count(f.inputs, hidden), 0.0);
    return f;
  }

  std::size_t size() const { return w.size(); }

  double& in_weight(std::size_t h, std::size_t i) { return w[h * (inputs + 1) + i]; }
  double& out_weight(std::size_t o, std::size_t h) { return w[hidden * (inputs + 1) + o * (hidden + 1) + h]; }

  std::array<double, kStrategyCount> forward(const std::vector<double>& x) const {
    if (x.size() != inputs) throw ConfigError("FCN input arity mismatch");
    if (w.size() != parameter_count(inputs, hidden)) throw ConfigError("FCN weight vector has the wrong length");
    std::vector<double> act(hidden);
    for (std::size_t h = 0; h < hidden; ++h) {
      const double* row = &w[h * (inputs + 1)];
      double s = row[inputs];
      for (std::size_t i = 0; i < inputs; ++i) s += row[i] * x[i];
      act[h] = std::tanh(s);
    }
    std::array<double, kStrategyCount> out{};
    const double* base = &w[hidden * (inputs + 1)];
    for (std::size_t o = 0; o < kStrategyCount; ++o) {
      const double* row = base + o * (hidden + 1);
      double s = row[hidden];
      for (std::size_t h = 0; h < hidden; ++h) s += row[h] * act[h];
      out[o] = s;
    }
    return out;
  }
};

/// Builds the FCN input vector: means, standard deviations, then action proportions.
inline std::vector<double> fcn_inputs(const std::vector<double>& mu_hat, const std::vector<double>& sigma_hat,
                                      const std::vector<double>& freq_norm) {
  std::vector<double> x;
  x.reserve(mu_hat.size() * 3);
  x.insert(x.end(), mu_hat.begin(), mu_hat.end());
  x.insert(x.end(), sigma_hat.begin(), sigma_hat.end());
  x.insert(x.end(), freq_norm.begin(), freq_norm.end());
  return x;
}

inline StrategyKind msl_fcn(const FCNWeights& weights, const std::vector<double>& mu_hat,
                            const std::vector<double>& sigma_hat, const std::vector<double>& freq_norm) {
  if (mu_hat.size() != sigma_hat.size() || mu_hat.size() != freq_norm.size() || 3 * mu_hat.size() != weights.inputs)
    throw ConfigError("FCN input arity mismatch");
  auto out = weights.forward(fcn_inputs(mu_hat, sigma_hat, freq_norm));
  return strategy_from_index(argmax(out));
}

inline std::vector<double> normalized(const std::vector<std::size_t>& freq) {
  double total = 0.0;
  for (auto f : freq) total += static_cast<double>(f);
  std::vector<double> out(freq.size(), 0.0);
  if (total > 0.0)
    for (std::size_t j = 0; j < freq.size(); ++j) out[j] = static_cast<double>(freq[j]) / total;
  return out;
}

// ---- bandit-over-strategies controllers ------------------------------------------------------

struct BanditParams {
  double epsilon = 0.1;  // SL-RL strategy exploration
  double beta = 0.2;     // SL-RL / SL-UCB value step size
  double ucb_c = 1.0;
  double epsilon_ql = 0.2;
  double alpha_ql = 0.01;
  double gamma_ql = 0.0;
};

/// Per-agent value estimates over the three strategies (SL-RL and SL-UCB).
struct StrategyBanditState {
  std::array<double, kStrategyCount> q{};
  std::array<std::size_t, kStrategyCount> n{};
  std::size_t steps = 0;

  std::size_t select_rl(double epsilon, Rng& rng) const {
    if (epsilon > 0.0 && uniform01(rng) < epsilon) return uniform_index(rng, kStrategyCount);
    return argmax(q);
  }

  /// Unvisited strategies first (lowest index), then argmax of Q + c*sqrt(ln t / N).
  std::size_t select_ucb(double c) const {
    for (std::size_t a = 0; a < kStrategyCount; ++a)
      if (n[a] == 0) return a;
    double t = static_cast<double>(steps + 1);
    std::array<double, kStrategyCount> score{};
    for (std::size_t a = 0; a < kStrategyCount; ++a)
      score[a] = q[a] + c * std::sqrt(std::log(t) / static_cast<double>(n[a]));
    return argmax(score);
  }

  void update(std::size_t a, double reward, double beta) {
    q[a] += beta * (reward - q[a]);
    ++n[a];
    ++steps;
  }
};

/// Tabular Q(s, a) over the 8 context states and 3 strategies (SL-QL).
struct QLearner {
  std::array<std::array<double, kStrategyCount>, kRuleStates> q{};
  bool pending = false;
  std::size_t last_state = 0;
  std::size_t last_action = 0;
  double last_reward = 0.0;

  std::size_t select(std::size_t state, double epsilon, Rng& rng) const {
    if (epsilon > 0.0 && uniform01(rng) < epsilon) return uniform_index(rng, kStrategyCount);
    return argmax(q[state]);
  }

  /// Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))
  void bellman(std::size_t s, std::size_t a, double r, std::size_t s_next, double alpha, double gamma) {
    double next = *std::max_element(q[s_next].begin(), q[s_next].end());
    q[s][a] += alpha * (r + gamma * next - q[s][a]);
  }

  void record(std::size_t s, std::size_t a, double r) {
    pending = true;
    last_state = s;
    last_action = a;
    last_reward = r;
  }

  /// Applies the deferred update once the next state is observed.
  void settle(std::size_t s_next, double alpha, double gamma) {
    if (!pending) return;
    bellman(last_state, last_action, last_reward, s_next, alpha, gamma);
    pending = false;
  }
};

using QLTable = std::array<std::array<double, kStrategyCount>, kRuleStates>;

// ---- controller files ------------------------------------------------------------------------

inline constexpr int kControllerFormatVersion = 1;

/// Versioned text format: header lines "key value" followed by ordered decimal values.
struct ControllerFile {
  std::string kind;
  std::string activation = "none";
  std::map<std::string, std::string> fields;
  std::vector<double> values;

  std::string serialize() const {
    std::ostringstream os;
    os << "# msl-controller v" << kControllerFormatVersion << "\n";
    os << "kind " << kind << "\n";
    os << "activation " << activation << "\n";
    for (const auto& [k, v] : fields) os << k << " " << v << "\n";
    os << "values " << values.size() << "\n";
    os << std::setprecision(17);
    for (double v : values) os << v << "\n";
    return os.str();
  }

  static ControllerFile parse(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line.rfind("# msl-controller v", 0) != 0)
      throw ConfigError("controller file is missing its version header");
    int version = std::stoi(line.substr(std::string("# msl-controller v").size()));
    if (version != kControllerFormatVersion) throw ConfigError("unsupported controller file version");
    ControllerFile f;
    std::size_t count = 0;
    bool have_values = false;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string key, value;
      ls >> key;
      std::getline(ls >> std::ws, value);
      if (key == "kind") f.kind = value;
      else if (key == "activation") f.activation = value;
      else if (key == "values") {
        count = std::stoul(value);
        have_values = true;
        break;
      } else f.fields[key] = value;
    }
    if (!have_values) throw ConfigError("controller file has no values section");
    double v;
    while (f.values.size() < count && (is >> v)) f.values.push_back(v);
    if (f.values.size() != count) throw ConfigError("controller file ended before all values were read");
    return f;
  }

  static ControllerFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open controller file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write controller file " + path);
    out << serialize();
  }

  double field(const std::string& key) const {
    auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError("controller file lacks field '" + key + "'");
    return std::stod(it->second);
  }
};

inline ControllerFile to_file(const RuleTable& t) {
  ControllerFile f;
  f.kind = "SL-GA";
  std::ostringstream a, b;
  a << std::setprecision(17) << t.th_ec;
  b << std::setprecision(17) << t.th_u;
  f.fields["th_ec"] = a.str();
  f.fields["th_u"] = b.str();
  for (auto r : t.rules) f.values.push_back(static_cast<double>(r));
  return f;
}

inline RuleTable rule_table_from_file(const ControllerFile& f) {
  if (f.kind != "SL-GA") throw ConfigError("controller file does not hold an SL-GA rule table");
  if (f.values.size() != kRuleStates) throw ConfigError("rule table must have 8 entries");
  RuleTable t;
  t.th_ec = f.field("th_ec");
  t.th_u = f.field("th_u");
  for (std::size_t i = 0; i < kRuleStates; ++i) {
    double v = f.values[i];
    if (v != 0.0 && v != 1.0 && v != 2.0) throw ConfigError("rule table entries must be 0, 1 or 2");
    t.rules[i] = strategy_from_index(static_cast<std::size_t>(v));
  }
  return t;
}

inline ControllerFile to_file(const FCNWeights& w) {
  ControllerFile f;
  f.kind = "SL-NE";
  f.activation = "tanh";
  f.fields["inputs"] = std::to_string(w.inputs);
  f.fields["hidden"] = std::to_string(w.hidden);
  f.values = w.w;
  return f;
}

inline FCNWeights fcn_from_file(const ControllerFile& f) {
  if (f.kind != "SL-NE") throw ConfigError("controller file does not hold SL-NE weights");
  if (f.activation != "tanh") throw ConfigError("only tanh FCN controllers are supported");
  FCNWeights w;
  w.inputs = static_cast<std::size_t>(f.field("inputs"));
  w.hidden = static_cast<std::size_t>(f.field("hidden"));
  if (f.values.size() != FCNWeights::parameter_count(w.inputs, w.hidden))
    throw ConfigError("FCN weight count does not match its declared shape");
  w.w = f.values;
  return w;
}

inline ControllerFile to_file(const QLTable& q) {
  ControllerFile f;
  f.kind = "SL-QL";
  f.fields["states"] = std::to_string(kRuleStates);
  f.fields["actions"] = std::to_string(kStrategyCount);
  for (const auto& row : q) f.values.insert(f.values.end(), row.begin(), row.end());
  return f;
}

inline QLTable ql_table_from_file(const ControllerFile& f) {
  if (f.kind != "SL-QL") throw ConfigError("controller file does not hold an SL-QL table");
  if (f.values.size() != kRuleStates * kStrategyCount) throw ConfigError("SL-QL table must have 24 entries");
  QLTable q{};
  for (std::size_t s = 0; s < kRuleStates; ++s)
    for (std::size_t a = 0; a < kStrategyCount; ++a) q[s][a] = f.values[s * kStrategyCount + a];
  return q;
}

/// Trained/reference controllers used by SL-GA, SL-NE and SL-QL agents.
struct ControllerSet {
  RuleTable rule_table = reference_rule_table();
  FCNWeights fcn = FCNWeights::zeros();
  QLTable ql_init{};
};

}  // namespace msl

#endif
