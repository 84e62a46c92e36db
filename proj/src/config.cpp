#include "fedra/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "fedra/error.hpp"

namespace fedra {
namespace {

using nlohmann::json;

// Walks one JSON object; every key read is ticked off and finish() rejects
// the rest.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where("") + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& raw(const std::string& key) const { return obj_.at(key); }

  std::string where(const std::string& key) const {
    if (path_.empty()) return key.empty() ? "config" : key;
    return key.empty() ? path_ : path_ + "." + key;
  }

  void num(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    out = v.get<double>();
  }

  void opt_num(const std::string& key, std::optional<double>& out) {
    if (!has(key)) return;
    if (obj_.at(key).is_null()) {
      out.reset();
      return;
    }
    double v = 0.0;
    num(key, v);
    out = v;
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (!has(key)) return;
    out = as_int<Int>(obj_.at(key), where(key));
  }

  void opt_int(const std::string& key, std::optional<int>& out) {
    if (!has(key)) return;
    if (obj_.at(key).is_null()) {
      out.reset();
      return;
    }
    out = as_int<int>(obj_.at(key), where(key));
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    if (!obj_.at(key).is_boolean()) throw ConfigError(where(key) + " must be a boolean");
    out = obj_.at(key).get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    if (!obj_.at(key).is_string()) throw ConfigError(where(key) + " must be a string");
    out = obj_.at(key).get<std::string>();
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(obj_.contains(key) ? obj_.at(key) : empty, where(key));
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items())
      if (!seen_.count(key)) throw ConfigError("unknown key " + where(key));
  }

  template <typename Int>
  static Int as_int(const json& v, const std::string& name) {
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max()))
        throw ConfigError(name + " is out of range");
      return static_cast<Int>(u);
    }
    if (v.is_number_integer()) {
      const auto s = v.get<std::int64_t>();
      if constexpr (std::is_unsigned_v<Int>) {
        if (s < 0) throw ConfigError(name + " must be >= 0");
      } else {
        if (s < std::numeric_limits<Int>::min() || s > std::numeric_limits<Int>::max())
          throw ConfigError(name + " is out of range");
      }
      return static_cast<Int>(s);
    }
    throw ConfigError(name + " must be an integer");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Enum, std::size_t K>
Enum pick(Section& s, const std::string& key, Enum current,
          const std::pair<Enum, const char*> (&names)[K]) {
  std::string text;
  for (const auto& [e, n] : names)
    if (e == current) text = n;
  s.string(key, text);
  for (const auto& [e, n] : names)
    if (text == n) return e;
  std::string allowed;
  for (const auto& [e, n] : names) allowed += (allowed.empty() ? "" : "|") + std::string(n);
  throw ConfigError(s.where(key) + " must be one of " + allowed);
}

template <typename Enum, std::size_t K>
const char* name_of(Enum e, const std::pair<Enum, const char*> (&names)[K]) {
  for (const auto& [k, n] : names)
    if (k == e) return n;
  return names[0].second;
}

const std::pair<TaskKind, const char*> kTaskKinds[] = {{TaskKind::GaussianMean, "gaussian_mean"},
                                                       {TaskKind::Softmax, "softmax"}};
const std::pair<DataSource, const char*> kSources[] = {{DataSource::Synthetic, "synthetic"},
                                                       {DataSource::Mnist, "mnist"}};
const std::pair<RatioMode, const char*> kRatioModes[] = {{RatioMode::Dynamic, "dynamic"},
                                                         {RatioMode::Fixed, "fixed"}};
const std::pair<PartitionMode, const char*> kPartitionModes[] = {
    {PartitionMode::Iid, "iid"}, {PartitionMode::NonIid, "non_iid"}};

MTildeSetting parse_m_tilde(const json& v, const std::string& name) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "auto") return {MTildeSetting::Mode::Auto, 0};
    if (s == "true_m") return {MTildeSetting::Mode::TrueCount, 0};
    throw ConfigError(name + " must be \"auto\", \"true_m\" or an integer");
  }
  return {MTildeSetting::Mode::Fixed, Section::as_int<int>(v, name)};
}

json m_tilde_json(const MTildeSetting& m) {
  switch (m.mode) {
    case MTildeSetting::Mode::Auto: return "auto";
    case MTildeSetting::Mode::TrueCount: return "true_m";
    case MTildeSetting::Mode::Fixed: return m.value;
  }
  return "auto";
}

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg;
  Section root(doc, "");

  {
    auto s = root.child("task");
    auto& t = cfg.task;
    t.kind = pick(s, "kind", t.kind, kTaskKinds);
    s.integer("dim", t.dim);
    s.num("mean_value", t.mean_value);
    s.num("stddev", t.stddev);
    s.integer("dataset_size", t.dataset_size);
    s.integer("num_classes", t.num_classes);
    s.num("l2_reg", t.l2_reg);
    s.num("separation", t.separation);
    s.integer("test_size", t.test_size);
    t.source = pick(s, "source", t.source, kSources);
    s.string("mnist_dir", t.mnist_dir);
    s.finish();
  }
  {
    auto s = root.child("population");
    auto& p = cfg.population;
    s.integer("N", p.N);
    // M/N defaults to 0.1 whatever N is.
    p.M = p.N / 10;
    s.integer("M", p.M);
    s.integer("n", p.n);
    s.opt_int("M_tilde", p.M_tilde);
    p.ratio_mode = pick(s, "ratio_mode", p.ratio_mode, kRatioModes);
    s.finish();
  }
  {
    auto s = root.child("quantities");
    s.num("target_mean", cfg.quantities.target_mean);
    s.num("log_sigma", cfg.quantities.log_sigma);
    s.finish();
  }
  {
    auto s = root.child("partition");
    cfg.partition.mode = pick(s, "mode", cfg.partition.mode, kPartitionModes);
    s.num("single_class_fraction", cfg.partition.single_class_fraction);
    s.finish();
  }
  {
    auto s = root.child("rule");
    auto& r = cfg.rule;
    std::string kind = rule_kind_name(r.kind);
    s.string("kind", kind);
    const auto k = parse_rule_kind(kind);
    if (!k) throw ConfigError("rule.kind: unknown rule \"" + kind + "\"");
    r.kind = *k;
    if (s.has("m_tilde")) r.m_tilde = parse_m_tilde(s.raw("m_tilde"), "rule.m_tilde");
    s.opt_int("count", r.mkrum_count);
    s.num("gamma", r.gamma);
    s.opt_int("m_tilde_override", r.m_tilde_override);
    s.num("threshold", r.norm_threshold);
    s.integer("max_iters", r.rfa.max_iters);
    s.num("smoothing", r.rfa.smoothing);
    s.num("tolerance", r.rfa.tolerance);
    s.num("top_fraction", r.top_fraction);
    s.num("mass_fraction", r.mass_fraction);
    s.finish();
  }
  {
    auto s = root.child("attack");
    auto& a = cfg.attack;
    std::string kind = attack_name(a.kind);
    s.string("kind", kind);
    const auto k = parse_attack_kind(kind);
    if (!k) throw ConfigError("attack.kind: unknown attack \"" + kind + "\"");
    a.kind = *k;
    s.opt_num("z", a.z);
    s.num("lambda", a.lambda);
    s.num("alpha_q", a.alpha_q);
    s.finish();
  }
  root.integer("rounds", cfg.rounds);
  root.integer("eval_interval", cfg.eval_interval);
  root.integer("seed", cfg.seed);
  {
    auto s = root.child("server");
    auto& v = cfg.server;
    s.opt_num("lr", v.lr);
    s.num("beta1", v.beta1);
    s.num("beta2", v.beta2);
    s.num("eps", v.eps);
    s.boolean("bias_correction", v.bias_correction);
    s.finish();
  }
  root.string("output_dir", cfg.output_dir);
  root.finish();

  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json config_to_json(const ExperimentConfig& cfg) {
  const auto& t = cfg.task;
  const auto& p = cfg.population;
  const auto& r = cfg.rule;
  const auto& a = cfg.attack;
  const auto& s = cfg.server;
  json out;
  out["task"] = {{"kind", name_of(t.kind, kTaskKinds)},
                 {"dim", t.dim},
                 {"mean_value", t.mean_value},
                 {"stddev", t.stddev},
                 {"dataset_size", t.dataset_size},
                 {"num_classes", t.num_classes},
                 {"l2_reg", t.l2_reg},
                 {"separation", t.separation},
                 {"test_size", t.test_size},
                 {"source", name_of(t.source, kSources)},
                 {"mnist_dir", t.mnist_dir}};
  out["population"] = {{"N", p.N},
                       {"M", p.M},
                       {"n", p.n},
                       {"M_tilde", opt(p.M_tilde)},
                       {"ratio_mode", name_of(p.ratio_mode, kRatioModes)}};
  out["quantities"] = {{"target_mean", cfg.quantities.target_mean},
                       {"log_sigma", cfg.quantities.log_sigma}};
  out["partition"] = {{"mode", name_of(cfg.partition.mode, kPartitionModes)},
                      {"single_class_fraction", cfg.partition.single_class_fraction}};
  out["rule"] = {{"kind", rule_kind_name(r.kind)},
                 {"m_tilde", m_tilde_json(r.m_tilde)},
                 {"count", opt(r.mkrum_count)},
                 {"gamma", r.gamma},
                 {"m_tilde_override", opt(r.m_tilde_override)},
                 {"threshold", r.norm_threshold},
                 {"max_iters", r.rfa.max_iters},
                 {"smoothing", r.rfa.smoothing},
                 {"tolerance", r.rfa.tolerance},
                 {"top_fraction", r.top_fraction},
                 {"mass_fraction", r.mass_fraction}};
  out["attack"] = {{"kind", attack_name(a.kind)},
                   {"z", opt(a.z)},
                   {"lambda", a.lambda},
                   {"alpha_q", a.alpha_q}};
  out["rounds"] = cfg.rounds;
  out["eval_interval"] = cfg.eval_interval;
  out["seed"] = cfg.seed;
  out["server"] = {{"lr", opt(s.lr)},
                   {"beta1", s.beta1},
                   {"beta2", s.beta2},
                   {"eps", s.eps},
                   {"bias_correction", s.bias_correction}};
  out["output_dir"] = cfg.output_dir;
  return out;
}

}  // namespace fedra
