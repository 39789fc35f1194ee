/*
 * Copyright 2026 The rrl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "rrl/config.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rrl/serialize.hpp"

namespace rrl {

namespace {

using nlohmann::json;

std::size_t line_at(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

/// One JSON object of the config. Reads typed fields, remembers which keys
/// were consumed, and maps every error to the line of the key.
class Section {
 public:
  Section(const json& j, std::string path, const std::string& text, std::size_t start)
      : j_(j), path_(std::move(path)), text_(text), start_(start) {
    if (!j_.is_object()) fail("'" + path_ + "' must be an object", start_);
  }

  bool has(const char* key) const { return j_.contains(key); }

  std::size_t offset_of(const char* key) const {
    if (!j_.contains(key)) return start_;
    const std::size_t pos = text_.find("\"" + std::string(key) + "\"", start_);
    return pos == std::string::npos ? start_ : pos;
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t offset) const {
    throw ConfigError(msg, line_at(text_, offset));
  }
  [[noreturn]] void fail_key(const char* key, const std::string& msg) const {
    fail(name(key) + ": " + msg, offset_of(key));
  }

  std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  Section child(const char* key) {
    used_.push_back(key);
    return Section(j_.at(key), name(key), text_, offset_of(key));
  }

  const json& raw(const char* key) {
    used_.push_back(key);
    return j_.at(key);
  }

  void get(const char* key, double& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) fail_key(key, "expected a number");
    out = v.get<double>();
  }
  void get(const char* key, bool& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail_key(key, "expected true or false");
    out = v.get<bool>();
  }
  void get(const char* key, std::string& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) fail_key(key, "expected a string");
    out = v.get<std::string>();
  }
  template <class Int>
    requires std::is_integral_v<Int>
  void get(const char* key, Int& out) {
    if (!take(key)) return;
    out = to_int<Int>(key, j_.at(key));
  }
  template <class T>
  void get(const char* key, std::vector<T>& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) fail_key(key, "expected an array");
    out.clear();
    for (const json& e : v) {
      if constexpr (std::is_integral_v<T>) {
        out.push_back(to_int<T>(key, e));
      } else {
        if (!e.is_number()) fail_key(key, "expected an array of numbers");
        out.push_back(e.get<T>());
      }
    }
  }

  /// Rejects keys nobody asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::find(used_.begin(), used_.end(), it.key()) == used_.end())
        fail("unknown key '" + name(it.key().c_str()) + "'", offset_of(it.key().c_str()));
  }

 private:
  bool take(const char* key) {
    if (!j_.contains(key)) return false;
    used_.push_back(key);
    return true;
  }

  template <class Int>
  Int to_int(const char* key, const json& v) const {
    if (!v.is_number_integer()) fail_key(key, "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.is_number_unsigned()) return static_cast<Int>(v.get<std::uint64_t>());
      if (v.get<std::int64_t>() < 0) fail_key(key, "must be non-negative");
      return static_cast<Int>(v.get<std::int64_t>());
    } else {
      return static_cast<Int>(v.get<std::int64_t>());
    }
  }

  const json& j_;
  std::string path_;
  const std::string& text_;
  std::size_t start_;
  std::vector<std::string> used_;
};

template <class Fn>
void checked(Section& s, const char* key, Fn fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    s.fail_key(key, e.what());
  }
}

void read_train(Section s, TrainConfig& t, bool allow_reg) {
  s.get("epochs", t.epochs);
  s.get("batch_size", t.batch_size);
  s.get("learning_rate", t.learning_rate);
  s.get("momentum", t.momentum);
  s.get("seed", t.seed);
  if (s.has("schedule")) {
    std::string name;
    s.get("schedule", name);
    checked(s, "schedule", [&] { t.schedule = parse_schedule(name); });
  }
  if (s.has("freeze")) {
    std::string name;
    s.get("freeze", name);
    if (name == "none")
      t.freeze = Freeze::none;
    else if (name == "final-layer")
      t.freeze = Freeze::final_layer;
    else
      s.fail_key("freeze", "expected 'none' or 'final-layer'");
  }
  if (allow_reg) {
    if (s.has("reg")) {
      std::string name;
      s.get("reg", name);
      checked(s, "reg", [&] { t.reg.kind = parse_regularizer(name); });
    }
    s.get("lambda", t.reg.lambda);
  }
  s.finish();
  checked(s, "epochs", [&] { t.validate(); });
}

AttackConfig read_attack(Section s) {
  AttackConfig a;
  std::string kind;
  if (!s.has("kind")) s.fail("attack entry needs a 'kind'", s.offset_of("kind"));
  s.get("kind", kind);
  checked(s, "kind", [&] { a.kind = parse_attack(kind); });
  s.get("epsilon", a.epsilon);
  s.get("alpha", a.pgd_alpha);
  s.get("steps", a.pgd_steps);
  s.get("restarts", a.pgd_restarts);
  s.get("overshoot", a.overshoot);
  s.get("max_iter", a.deepfool_max_iter);
  s.get("c", a.cw_c);
  s.get("cw_steps", a.cw_steps);
  s.get("step_size", a.cw_step_size);
  s.get("doublings", a.cw_doublings);
  s.get("clip", a.clip);
  s.get("seed", a.seed);
  s.finish();
  checked(s, "kind", [&] { a.validate(); });
  return a;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] " prefix.
    if (const auto p = msg.find("] "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError("invalid JSON: " + msg, line_at(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  RunConfig cfg;
  Section top(root, "", text, 0);

  if (top.has("data")) {
    Section s = top.child("data");
    DataSpec& d = cfg.data;
    s.get("images", d.images);
    s.get("labels", d.labels);
    s.get("inputs_csv", d.inputs_csv);
    s.get("digits", d.digits);
    if (!d.digits.empty() && (d.digits.size() != 2 || d.digits[0] == d.digits[1]))
      s.fail_key("digits", "expected two distinct digits");
    s.get("train_fraction", d.train_fraction);
    if (!(d.train_fraction >= 0.0 && d.train_fraction < 1.0))
      s.fail_key("train_fraction", "must lie in [0, 1)");
    s.get("split_seed", d.split_seed);
    s.get("max_train", d.max_train);
    s.get("max_test", d.max_test);
    if (s.has("synthetic")) {
      Section syn = s.child("synthetic");
      d.synthetic = "tsipras";
      syn.get("kind", d.synthetic);
      if (d.synthetic != "tsipras") syn.fail_key("kind", "only 'tsipras' is available");
      syn.get("samples", d.synth_samples);
      syn.get("dim", d.synth_dim);
      syn.get("eta", d.synth_eta);
      syn.get("seed", d.synth_seed);
      syn.finish();
    }
    s.finish();
  }

  if (top.has("model")) {
    Section s = top.child("model");
    s.get("hidden", cfg.model.hidden);
    std::string act = "relu";
    double alpha = 0.0;
    s.get("activation", act);
    s.get("alpha", alpha);
    if (act == "relu") {
      cfg.model.activation = Activation::relu();
    } else if (act == "leaky") {
      if (!(alpha >= 0.0 && alpha < 1.0)) s.fail_key("alpha", "must lie in [0, 1)");
      cfg.model.activation = Activation::leaky(alpha);
    } else {
      s.fail_key("activation", "expected 'relu' or 'leaky'");
    }
    s.get("bias", cfg.model.bias);
    s.finish();
  }

  if (top.has("train")) read_train(top.child("train"), cfg.train, true);
  if (top.has("finetune")) read_train(top.child("finetune"), cfg.finetune, true);

  if (top.has("attacks")) {
    const json& arr = top.raw("attacks");
    if (!arr.is_array()) top.fail_key("attacks", "expected an array of attack objects");
    std::size_t cursor = top.offset_of("attacks");
    for (const json& a : arr) {
      // Each entry starts at the next '{' after the previous one.
      cursor = text.find('{', cursor + 1);
      cfg.attacks.push_back(read_attack(Section(a, "attacks[]", text, cursor)));
    }
  }

  if (top.has("sweep")) {
    Section s = top.child("sweep");
    SweepConfig& sw = cfg.sweep;
    if (s.has("kinds")) {
      const json& kinds = s.raw("kinds");
      if (!kinds.is_array()) s.fail_key("kinds", "expected an array of regularizer names");
      sw.kinds.clear();
      for (const json& k : kinds) {
        if (!k.is_string()) s.fail_key("kinds", "expected regularizer names");
        checked(s, "kinds", [&] { sw.kinds.push_back(parse_regularizer(k.get<std::string>())); });
      }
    }
    s.get("lambdas", sw.lambdas);
    s.get("seeds", sw.seeds);
    s.get("eval_samples", sw.eval_samples);
    s.get("cert_samples", sw.cert_samples);
    s.get("cert_epsilon", sw.cert_epsilon);
    s.get("jobs", sw.jobs);
    s.get("model_prefix", sw.model_prefix);
    s.get("save_weights", cfg.save_weights);
    s.finish();
  }

  if (top.has("clip")) {
    bool clip = false;
    top.get("clip", clip);
    cfg.clip = clip ? 1 : 0;
  }
  top.finish();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what(), 0);
  }
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"momentum", c.momentum},
          {"seed", c.seed},
          {"schedule", to_string(c.schedule)},
          {"freeze", c.freeze == Freeze::none ? "none" : "final-layer"},
          {"reg", to_string(c.reg.kind)},
          {"lambda", c.reg.lambda}};
}

nlohmann::json to_json(const AttackConfig& a) {
  return {{"kind", to_string(a.kind)}, {"epsilon", a.epsilon},   {"alpha", a.alpha()},
          {"steps", a.pgd_steps},      {"restarts", a.pgd_restarts}, {"overshoot", a.overshoot},
          {"max_iter", a.deepfool_max_iter}, {"c", a.cw_c},       {"cw_steps", a.cw_steps},
          {"step_size", a.cw_step_size}, {"doublings", a.cw_doublings}, {"clip", a.clip},
          {"seed", a.seed}};
}

nlohmann::json to_json(const RunConfig& cfg) {
  json j;
  const DataSpec& d = cfg.data;
  j["data"] = {{"images", d.images},
               {"labels", d.labels},
               {"inputs_csv", d.inputs_csv},
               {"digits", d.digits},
               {"train_fraction", d.train_fraction},
               {"split_seed", d.split_seed},
               {"max_train", d.max_train},
               {"max_test", d.max_test}};
  if (!d.synthetic.empty())
    j["data"]["synthetic"] = {{"kind", d.synthetic},
                              {"samples", d.synth_samples},
                              {"dim", d.synth_dim},
                              {"eta", d.synth_eta},
                              {"seed", d.synth_seed}};
  j["model"] = {{"hidden", cfg.model.hidden},
                {"activation", cfg.model.activation.kind == ActivationKind::relu ? "relu" : "leaky"},
                {"alpha", cfg.model.activation.alpha},
                {"bias", cfg.model.bias}};
  j["train"] = to_json(cfg.train);
  j["finetune"] = to_json(cfg.finetune);
  json kinds = json::array();
  for (RegularizerKind k : cfg.sweep.kinds) kinds.push_back(to_string(k));
  j["sweep"] = {{"kinds", kinds},
                {"lambdas", cfg.sweep.lambdas},
                {"seeds", cfg.sweep.seeds},
                {"eval_samples", cfg.sweep.eval_samples},
                {"cert_samples", cfg.sweep.cert_samples},
                {"cert_epsilon", cfg.sweep.cert_epsilon},
                {"jobs", cfg.sweep.jobs},
                {"model_prefix", cfg.sweep.model_prefix},
                {"save_weights", cfg.save_weights}};
  json attacks = json::array();
  for (const AttackConfig& a : cfg.attacks) attacks.push_back(to_json(a));
  j["attacks"] = attacks;
  if (cfg.clip >= 0) j["clip"] = cfg.clip == 1;
  return j;
}

std::vector<AttackConfig> default_attacks() {
  AttackConfig fgsm_cfg;
  fgsm_cfg.kind = AttackKind::fgsm;
  AttackConfig pgd_cfg;
  pgd_cfg.kind = AttackKind::pgd;
  AttackConfig df;
  df.kind = AttackKind::deepfool;
  return {fgsm_cfg, pgd_cfg, df};
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw std::invalid_argument("empty entry in list '" + text + "'");
    item = item.substr(b, e - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw std::invalid_argument("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

Dataset parse_inputs_csv(const std::string& text) {
  Dataset d;
  std::vector<double> values;
  std::size_t width = 0, max_label = 0;
  std::stringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    try {
      row = parse_double_list(line);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("inputs csv: ") + e.what(), line_no);
    }
    if (row.size() < 2) throw ConfigError("inputs csv: need a label and at least one value", line_no);
    if (width == 0) width = row.size() - 1;
    if (row.size() - 1 != width) throw ConfigError("inputs csv: ragged row", line_no);
    if (row[0] < 0 || row[0] != std::floor(row[0]))
      throw ConfigError("inputs csv: label must be a non-negative integer", line_no);
    const auto label = static_cast<std::size_t>(row[0]);
    d.labels.push_back(label);
    max_label = std::max(max_label, label);
    values.insert(values.end(), row.begin() + 1, row.end());
  }
  d.inputs = Matrix(d.labels.size(), width, std::move(values));
  d.num_classes = std::max<std::size_t>(2, max_label + 1);
  return d;
}

LoadedData load_data(const DataSpec& spec) {
  LoadedData out;
  Dataset all;
  if (!spec.synthetic.empty()) {
    all = synth_tsipras(spec.synth_samples, spec.synth_dim, spec.synth_eta, spec.synth_seed);
  } else if (!spec.inputs_csv.empty()) {
    std::ifstream in(spec.inputs_csv);
    if (!in) throw std::runtime_error("cannot open " + spec.inputs_csv);
    std::ostringstream ss;
    ss << in.rdbuf();
    all = parse_inputs_csv(ss.str());
    out.checksums.emplace_back(spec.inputs_csv, hex64(file_checksum(spec.inputs_csv)));
  } else {
    if (spec.images.empty() || spec.labels.empty())
      throw ConfigError("no data: give --data-images/--data-labels, data.inputs_csv or "
                        "data.synthetic",
                        0);
    all = load_idx(spec.images, spec.labels);
    out.checksums.emplace_back(spec.images, hex64(file_checksum(spec.images)));
    out.checksums.emplace_back(spec.labels, hex64(file_checksum(spec.labels)));
  }
  if (!spec.digits.empty()) all = binary_subset(all, spec.digits[0], spec.digits[1]);

  if (spec.train_fraction == 0.0) {
    out.test = all;
    out.test.split = "test";
    out.train = subset(all, {});
    out.train.split = "train";
  } else {
    auto [tr, te] = split(all, spec.train_fraction, spec.split_seed);
    out.train = std::move(tr);
    out.test = std::move(te);
  }
  auto cap = [](Dataset& d, std::size_t n) {
    if (n == 0 || n >= d.size()) return;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    const std::string tag = d.split;
    d = subset(d, idx);
    d.split = tag;
  };
  cap(out.train, spec.max_train);
  cap(out.test, spec.max_test);
  out.all = std::move(all);
  return out;
}

std::vector<AttackConfig> resolve_attacks(const RunConfig& cfg, const Dataset& data) {
  std::vector<AttackConfig> attacks = cfg.attacks.empty() ? default_attacks() : cfg.attacks;
  const bool clip = cfg.clip < 0 ? data.bounded : cfg.clip == 1;
  for (AttackConfig& a : attacks) {
    a.clip = a.clip || clip;
    try {
      a.validate();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("attack: ") + e.what(), 0);
    }
  }
  return attacks;
}

SweepConfig resolve_sweep(const RunConfig& cfg, const LoadedData& data) {
  SweepConfig sc = cfg.sweep;
  sc.hidden = cfg.model.hidden;
  sc.activation = cfg.model.activation;
  sc.bias = cfg.model.bias;
  sc.baseline = cfg.train;
  sc.finetune = cfg.finetune;
  sc.attacks = resolve_attacks(cfg, data.test);
  try {
    sc.validate(data.train.num_classes);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("sweep: ") + e.what(), 0);
  }
  return sc;
}

}  // namespace rrl
