#include "sermt/metrics/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>

namespace sermt::metrics {

namespace {

struct Section {
  std::string name;
  int line = 0;
  std::vector<std::tuple<std::string, std::string, int>> entries;  // key, value, line
};

// Sections in file order; repeated names stay separate.
std::vector<Section> split_sections(std::istream& in) {
  std::vector<Section> out{Section{"", 0, {}}};
  std::string raw;
  for (int lineno = 1; std::getline(in, raw); ++lineno) {
    std::string line = raw.substr(0, raw.find_first_of("#;"));
    boost::algorithm::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("line {}: unterminated section header", lineno));
      std::string name = boost::algorithm::to_lower_copy(line.substr(1, line.size() - 2));
      boost::algorithm::trim(name);
      out.push_back(Section{name, lineno, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key = value", lineno));
    std::string key = boost::algorithm::to_lower_copy(line.substr(0, eq));
    std::string value = line.substr(eq + 1);
    boost::algorithm::trim(key);
    boost::algorithm::trim(value);
    out.back().entries.emplace_back(key, value, lineno);
  }
  return out;
}

template <class T>
T as(const std::string& value, int line) {
  if constexpr (std::is_same_v<T, bool>) {
    const auto v = boost::algorithm::to_lower_copy(value);
    if (v == "true" || v == "yes" || v == "on" || v == "1" || v == "sermt") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0" || v == "baseline") return false;
    throw ConfigError(fmt::format("line {}: '{}' is not a boolean", line, value));
  } else {
    try {
      return boost::lexical_cast<T>(value);
    } catch (const boost::bad_lexical_cast&) {
      throw ConfigError(fmt::format("line {}: cannot read '{}'", line, value));
    }
  }
}

template <class T>
std::vector<T> as_list(const std::string& value, int line) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, value, boost::algorithm::is_any_of(", "), boost::algorithm::token_compress_on);
  std::vector<T> out;
  for (auto& p : parts)
    if (!p.empty()) out.push_back(as<T>(p, line));
  return out;
}

using Setter = std::function<void(const std::string&, int)>;

template <class T>
Setter set(T& field) {
  return [&field](const std::string& v, int line) { field = as<T>(v, line); };
}

void apply_keys(const Section& s, const std::map<std::string, Setter>& keys) {
  for (const auto& [key, value, line] : s.entries) {
    auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(fmt::format("line {}: unknown key '{}' in [{}]", line, key, s.name));
    it->second(value, line);
  }
}

adversary::AttackSpec parse_attack(const Section& s) {
  adversary::AttackSpec a;
  bool has_kind = false;
  std::map<std::string, Setter> keys{
      {"kind",
       [&](const std::string& v, int line) {
         const auto k = adversary::parse_attack_kind(v);
         if (!k) throw ConfigError(fmt::format("line {}: unknown attack kind '{}'", line, v));
         a.kind = *k;
         has_kind = true;
       }},
      {"targets", [&](const std::string& v, int line) { a.targets = as_list<grid::EntityId>(v, line); }},
      {"count", set(a.count)},
      {"population",
       [&](const std::string& v, int line) {
         a.population.clear();
         for (const auto& name : as_list<std::string>(v, line)) {
           const auto up = boost::algorithm::to_upper_copy(name);
           if (up == "N") a.population.push_back(grid::EntityKind::N);
           else if (up == "ES") a.population.push_back(grid::EntityKind::ES);
           else if (up == "PDC") a.population.push_back(grid::EntityKind::PDC);
           else throw ConfigError(fmt::format("line {}: population may list N, ES, PDC (got '{}')", line, name));
         }
       }},
      {"foreign", set(a.foreign)},
      {"start", set(a.start_time)},
      {"interval", set(a.interval)},
      {"rate", set(a.rate)},
      {"personas", set(a.personas)},
      {"drop_probability", set(a.drop_probability)},
  };
  apply_keys(s, keys);
  if (!has_kind) throw ConfigError(fmt::format("line {}: [attack] needs a kind", s.line));
  return a;
}

}  // namespace

ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  std::optional<std::uint64_t> seed;
  for (const auto& s : split_sections(in)) {
    if (s.name.empty()) {
      if (!s.entries.empty()) throw ConfigError(fmt::format("line {}: key outside any section", std::get<2>(s.entries[0])));
    } else if (s.name == "scenario") {
      std::string topo;
      apply_keys(s, {{"name", set(c.name)},
                {"topology", set(topo)},
                {"radius", [&](const std::string& v, int l) { c.radius = as<double>(v, l); }},
                {"box_margin", set(c.box_margin)},
                {"n_nodes", set(c.n_nodes)},
                {"es_nodes", set(c.es_nodes)},
                {"duration", set(c.duration)},
                {"seed", [&](const std::string& v, int l) { seed = as<std::uint64_t>(v, l); }},
                {"defense", set(c.protocol.defense)}});
      if (!topo.empty()) c.topology = std::filesystem::path(topo).is_absolute() ? std::filesystem::path(topo) : base_dir / topo;
    } else if (s.name == "radio") {
      apply_keys(s, {{"range_n", set(c.radio.range_n)},
                {"range_es", set(c.radio.range_es)},
                {"range_pdc", set(c.radio.range_pdc)},
                {"range_gateway", set(c.radio.range_gateway)},
                {"loss_probability", set(c.radio.loss_probability)}});
    } else if (s.name == "energy") {
      auto& e = c.energy;
      apply_keys(s, {{"e_amp", set(e.e_amp)},
                {"e_baseband", set(e.e_baseband)},
                {"e_frontend", set(e.e_frontend)},
                {"e_lna", set(e.e_lna)},
                {"volts", set(e.volts)},
                {"recharge_rate", set(e.recharge_rate)},
                {"capacity_es", set(e.battery_capacity_es)},
                {"initial", set(e.initial_battery)},
                {"e_sha1_block", set(e.e_sha1_block)},
                {"e_rc5_block", set(e.e_rc5_block)},
                {"e_ecc_mul", set(e.e_ecc_mul)}});
    } else if (s.name == "protocol") {
      auto& p = c.protocol;
      apply_keys(s, {{"trust_interval", set(p.trust_interval)},
                {"round_duration", set(p.round_duration)},
                {"test_messages", set(p.test_messages)},
                {"mu_interval", set(p.mu_interval)},
                {"pmu_interval", set(p.pmu_interval)},
                {"es_probe_interval", set(p.es_probe_interval)},
                {"recharge_interval", set(p.recharge_interval)},
                {"mu_reading_bytes", set(p.mu_reading_bytes)},
                {"pmu_sample_bytes", set(p.pmu_sample_bytes)},
                {"chain_length", set(p.chain_length)},
                {"chain_window", set(p.chain_window)},
                {"audit", set(p.audit)}});
    } else if (s.name == "attack") {
      c.attacks.push_back(parse_attack(s));
    } else if (s.name == "sweep") {
      apply_keys(s, {{"malicious", [&](const std::string& v, int l) { c.sweep.malicious = as_list<int>(v, l); }},
                {"interval", [&](const std::string& v, int l) { c.sweep.interval = as_list<double>(v, l); }}});
    } else {
      throw ConfigError(fmt::format("line {}: unknown section [{}]", s.line, s.name));
    }
  }
  c.seed = seed;
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  ScenarioConfig c = parse_config(in, path.parent_path());
  if (const char* env = std::getenv("SERMT_SEED"); env && *env) {
    try {
      c.seed = boost::lexical_cast<std::uint64_t>(env);
    } catch (const boost::bad_lexical_cast&) {
      throw ConfigError(fmt::format("SERMT_SEED='{}' is not an unsigned integer", env));
    }
  }
  validate(c);
  return c;
}

void validate(const ScenarioConfig& c) {
  if (c.topology.empty()) throw ConfigError("[scenario] topology is required");
  if (!std::filesystem::exists(c.topology)) throw ConfigError(fmt::format("topology '{}' not found", c.topology.string()));
  if (!c.seed) throw ConfigError("[scenario] seed is required (or set SERMT_SEED)");
  if (!(c.duration > 0.0)) throw ConfigError("duration must be > 0");
  if (c.n_nodes < 0 || c.es_nodes < 0) throw ConfigError("node counts must be >= 0");
  if (c.radius && !(*c.radius > 0.0)) throw ConfigError("radius must be > 0");
  if (c.radio.loss_probability < 0.0 || c.radio.loss_probability > 1.0) throw ConfigError("loss_probability outside [0, 1]");
  try {
    protocol::validate(c.protocol);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  for (int m : c.sweep.malicious)
    if (m < 0) throw ConfigError("sweep malicious counts must be >= 0");
  for (double i : c.sweep.interval)
    if (!(i > 0.0)) throw ConfigError("sweep intervals must be > 0");
}

}  // namespace sermt::metrics
