#pragma once

// Experiment configuration files. The format is a TOML subset:
//
//   # comment
//   key = "string" | 123 | 1.5e-3 | true | ["a", "b"]
//   [section]
//
// Keys outside a section are top-level; keys inside become "section.key".

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "bossal/baselines.hpp"
#include "bossal/boss.hpp"
#include "bossal/core.hpp"
#include "bossal/harness.hpp"

namespace bossal::config {

/// Collected field-level diagnostics.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : ValidationError(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& ps) {
    std::string out = "invalid config:";
    for (const auto& p : ps) out += "\n  " + p;
    return out;
  }
  std::vector<std::string> problems_;
};

struct Value {
  enum class Type { string, number, boolean, list };
  Type type = Type::string;
  std::string text;          // string contents, number token, or "true"/"false"
  std::vector<Value> items;  // list elements
  int line = 0;
};

using Document = std::map<std::string, Value>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class ValueParser {
 public:
  ValueParser(std::string_view s, int line) : s_(s), line_(line) {}

  Value parse_all() {
    Value v = parse();
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '#') fail("unexpected trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError({"line " + std::to_string(line_) + ": " + what});
  }
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  Value parse() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    Value v;
    v.line = line_;
    const char c = s_[pos_];
    if (c == '"') {
      ++pos_;
      while (true) {
        if (pos_ >= s_.size()) fail("unterminated string");
        const char ch = s_[pos_++];
        if (ch == '"') break;
        if (ch == '\\') {
          if (pos_ >= s_.size()) fail("unterminated escape");
          const char e = s_[pos_++];
          if (e == 'n') v.text += '\n';
          else if (e == 't') v.text += '\t';
          else if (e == '"' || e == '\\') v.text += e;
          else fail(std::string("unsupported escape \\") + e);
        } else {
          v.text += ch;
        }
      }
      return v;
    }
    if (c == '[') {
      ++pos_;
      v.type = Value::Type::list;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        v.items.push_back(parse());
        skip_ws();
        if (pos_ >= s_.size()) fail("unterminated list");
        if (s_[pos_] == ',') {
          ++pos_;
          skip_ws();
          if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            return v;
          }
          continue;
        }
        if (s_[pos_] == ']') {
          ++pos_;
          return v;
        }
        fail("expected ',' or ']' in list");
      }
    }
    const auto start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != ' ' && s_[pos_] != '\t' &&
           s_[pos_] != '#')
      ++pos_;
    v.text = std::string(s_.substr(start, pos_ - start));
    if (v.text == "true" || v.text == "false") {
      v.type = Value::Type::boolean;
    } else {
      double d;
      const auto [p, ec] = std::from_chars(v.text.data(), v.text.data() + v.text.size(), d);
      if (ec != std::errc() || p != v.text.data() + v.text.size()) fail("cannot parse value '" + v.text + "'");
      v.type = Value::Type::number;
    }
    return v;
  }

  std::string_view s_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Document parse_document(std::string_view text) {
  Document doc;
  std::string section;
  std::vector<std::string> problems;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = detail::trim(raw);
    if (s.empty() || s.front() == '#') continue;
    if (s.front() == '[') {
      const auto close = s.find(']');
      if (close == std::string_view::npos) {
        problems.push_back("line " + std::to_string(line) + ": unterminated section header");
        continue;
      }
      section = std::string(detail::trim(s.substr(1, close - 1)));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back("line " + std::to_string(line) + ": expected 'key = value'");
      continue;
    }
    const std::string key = std::string(detail::trim(s.substr(0, eq)));
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      Value v = detail::ValueParser(s.substr(eq + 1), line).parse_all();
      if (!doc.emplace(full, std::move(v)).second)
        problems.push_back("line " + std::to_string(line) + ": duplicate key '" + full + "'");
    } catch (const ConfigError& e) {
      problems.insert(problems.end(), e.problems().begin(), e.problems().end());
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
  return doc;
}

inline nlohmann::json to_json(const Value& v) {
  switch (v.type) {
    case Value::Type::string: return v.text;
    case Value::Type::boolean: return v.text == "true";
    case Value::Type::number: return nlohmann::json::parse(v.text);
    case Value::Type::list: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& item : v.items) arr.push_back(to_json(item));
      return arr;
    }
  }
  return nullptr;
}

/// Canonical JSON (keys sorted); independent of key order in the file.
inline nlohmann::json canonical(const Document& doc) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [k, v] : doc) out[k] = to_json(v);
  return out;
}

/// FNV-1a 64 of the canonical JSON dump, hex.
inline std::string config_hash(const Document& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical(doc).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xF];
  return out;
}

/// Everything needed to run: the experiment plus where its data lives.
struct RunSpec {
  std::filesystem::path dataset;
  ExperimentConfig experiment;
  std::string hash;
  nlohmann::json canonical;
};

inline const std::vector<std::string>& known_presets() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& p : kBossPresets) out.emplace_back(p.name);
    for (const auto& a : kAlignedOracleSettings) {
      out.push_back("cdo-" + std::string(a.name));
      out.push_back("sas-" + std::string(a.name));
    }
    return out;
  }();
  return names;
}

namespace detail {

class Binder {
 public:
  explicit Binder(const Document& doc) : doc_(doc) {}

  const Value* find(const std::string& key) {
    used_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &it->second;
  }

  template <typename T>
  void number(const std::string& key, T& out, T min_value) {
    const Value* v = find(key);
    if (v == nullptr) return;
    if (v->type != Value::Type::number) return problem(*v, key, "expected a number");
    if constexpr (std::is_integral_v<T>) {
      T parsed{};
      const auto [p, ec] = std::from_chars(v->text.data(), v->text.data() + v->text.size(), parsed);
      if (ec != std::errc() || p != v->text.data() + v->text.size())
        return problem(*v, key, "expected an integer in range");
      if (parsed < min_value) return problem(*v, key, "must be >= " + std::to_string(min_value));
      out = parsed;
    } else {
      const double parsed = std::stod(v->text);
      if (!(parsed >= min_value)) return problem(*v, key, "must be >= " + std::to_string(min_value));
      out = static_cast<T>(parsed);
    }
  }

  bool string(const std::string& key, std::string& out) {
    const Value* v = find(key);
    if (v == nullptr) return false;
    if (v->type != Value::Type::string) {
      problem(*v, key, "expected a quoted string");
      return false;
    }
    out = v->text;
    return true;
  }

  template <typename Parse, typename T>
  void enumerated(const std::string& key, T& out, Parse&& parse) {
    std::string s;
    if (!string(key, s)) return;
    try {
      out = parse(s);
    } catch (const ValidationError& e) {
      problem(doc_.find(key)->second, key, e.what());
    }
  }

  void problem(const Value& v, const std::string& key, const std::string& what) {
    problems.push_back("line " + std::to_string(v.line) + ": '" + key + "': " + what);
  }

  void unused_keys() {
    for (const auto& [k, v] : doc_)
      if (!used_.contains(k)) problem(v, k, "unknown key");
  }

  std::vector<std::string> problems;

 private:
  const Document& doc_;
  std::set<std::string> used_;
};

}  // namespace detail

/// Builds and validates a RunSpec. `preset_override`/`seed_override` come from
/// the command line and win over the file.
inline RunSpec bind(const Document& doc, const std::filesystem::path& base_dir,
                    std::optional<std::string> preset_override = std::nullopt,
                    std::optional<std::uint64_t> seed_override = std::nullopt) {
  detail::Binder in(doc);
  RunSpec spec;
  ExperimentConfig& e = spec.experiment;

  std::string dataset;
  if (!in.string("dataset", dataset)) in.problems.push_back("'dataset': required key missing");
  spec.dataset = dataset.empty() ? std::filesystem::path{} : base_dir / dataset;

  std::string preset;
  in.string("preset", preset);
  if (preset_override) preset = *preset_override;
  std::string selector;
  const bool has_selector = in.string("selector", selector);

  BossConfig boss;
  CdoConfig cdo;
  SasConfig sas;
  if (!preset.empty()) {
    std::string implied;
    if (auto p = find_boss_preset(preset)) {
      implied = "boss";
      boss.num_batches = p->num_batches;
      boss.assess_epochs = p->assess_epochs;
    }
    for (const auto& a : kAlignedOracleSettings) {
      if (preset == "cdo-" + std::string(a.name)) {
        implied = "cdo";
        cdo.m = a.cdo_m;
      } else if (preset == "sas-" + std::string(a.name)) {
        implied = "sas-batch";
        sas.anneal_steps = a.sas_s;
        sas.greedy_steps = a.sas_g;
      }
    }
    if (implied.empty()) {
      std::string names;
      for (const auto& n : known_presets()) names += " " + n;
      in.problems.push_back("'preset': unknown preset '" + preset + "' (known:" + names + ")");
    } else if (has_selector && selector != implied) {
      in.problems.push_back("'preset': preset '" + preset + "' implies selector '" + implied +
                            "' but selector is '" + selector + "'");
    } else {
      selector = implied;
    }
  }
  if (selector.empty() && preset.empty()) in.problems.push_back("'selector': required key missing");

  in.number<Index>("b", e.b, 1);
  in.number<int>("cycles", e.cycles, 1);
  in.number<int>("repetitions", e.repetitions, 1);
  in.number<std::uint64_t>("master_seed", e.master_seed, 0);
  in.number<double>("eval_fraction", e.eval_fraction, 0.0);
  if (seed_override) e.master_seed = *seed_override;

  in.number<int>("train.epochs", e.train.epochs, 1);
  in.number<double>("train.lr", e.train.base_lr, 0.0);
  in.number<double>("train.weight_decay", e.train.weight_decay, 0.0);
  in.number<int>("train.minibatch_size", e.train.minibatch_size, 1);
  in.number<std::uint64_t>("train.init_seed", e.train.init_seed, 0);
  in.number<std::uint64_t>("train.shuffle_seed", e.train.shuffle_seed, 0);

  in.number<int>("boss.num_batches", boss.num_batches, 1);
  if (const Value* v = in.find("boss.strategies")) {
    if (v->type != Value::Type::list || v->items.empty()) {
      in.problem(*v, "boss.strategies", "expected a nonempty list of strategy names");
    } else {
      boss.strategies.clear();
      for (const auto& item : v->items) {
        auto id = try_parse_strategy(item.text);
        if (item.type != Value::Type::string || !id)
          in.problem(item, "boss.strategies", "unknown strategy '" + item.text + "'");
        else
          boss.strategies.push_back(*id);
      }
    }
  }
  {
    Index k = 0;
    in.number<Index>("boss.k_max", k, 1);
    if (k > 0) boss.k_max = k;
  }
  in.number<int>("boss.assess_epochs", boss.assess_epochs, 1);
  in.enumerated("boss.loss", boss.loss, parse_loss);
  in.enumerated("boss.label_source", boss.label_source, parse_label_source);
  in.number<std::uint64_t>("boss.seed", boss.seed, 0);

  in.number<int>("cdo.m", cdo.m, 1);
  {
    LossKind l{};
    if (doc.contains("cdo.loss")) {
      in.enumerated("cdo.loss", l, parse_loss);
      cdo.loss = l;
    }
  }
  in.number<int>("cdo.assess_epochs", cdo.assess_epochs, 1);
  in.number<std::uint64_t>("cdo.seed", cdo.seed, 0);

  in.number<int>("sas.anneal_steps", sas.anneal_steps, 1);
  in.number<int>("sas.greedy_steps", sas.greedy_steps, 0);
  in.number<double>("sas.temp_start", sas.temp_start, 0.0);
  in.number<double>("sas.temp_end", sas.temp_end, 0.0);
  in.enumerated("sas.loss", sas.loss, parse_loss);
  in.number<int>("sas.assess_epochs", sas.assess_epochs, 1);
  in.number<std::uint64_t>("sas.seed", sas.seed, 0);
  in.unused_keys();

  if (selector == "boss")
    e.selector = boss;
  else if (selector == "cdo")
    e.selector = cdo;
  else if (selector == "sas-batch")
    e.selector = sas;
  else if (auto id = try_parse_strategy(selector))
    e.selector = *id;
  else if (!selector.empty())
    in.problems.push_back("'selector': unknown selector '" + selector +
                          "' (expected a strategy id, boss, cdo or sas-batch)");

  if (in.problems.empty()) {
    try {
      std::visit([](const auto& s) {
        if constexpr (!std::is_same_v<std::decay_t<decltype(s)>, StrategyId>) s.validate();
      }, e.selector);
      e.train.validate();
      require(e.eval_fraction > 0.0 && e.eval_fraction < 1.0, "'eval_fraction' must be in (0, 1)");
    } catch (const ValidationError& err) {
      in.problems.emplace_back(err.what());
    }
  }
  if (!in.problems.empty()) throw ConfigError(in.problems);

  Document effective = doc;
  if (seed_override) effective["master_seed"] = Value{Value::Type::number, std::to_string(*seed_override), {}, 0};
  if (preset_override) effective["preset"] = Value{Value::Type::string, *preset_override, {}, 0};
  spec.canonical = canonical(effective);
  spec.hash = config_hash(effective);
  return spec;
}

inline Document read_document(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_document(ss.str());
}

}  // namespace bossal::config
