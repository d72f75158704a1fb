#include "cosafed/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace cosafed {

Method parse_method(const std::string& name) {
  if (name == "cosafed") return Method::CosAFed;
  if (name == "fixed_budget") return Method::FixedBudget;
  if (name == "score_fixed_p") return Method::ScoreFixedP;
  if (name == "cosine_only") return Method::CosineOnly;
  throw Error(ErrorCategory::config, "unknown method '" + name + "'");
}

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::CosAFed: return "cosafed";
    case Method::FixedBudget: return "fixed_budget";
    case Method::ScoreFixedP: return "score_fixed_p";
    case Method::CosineOnly: return "cosine_only";
  }
  return "unknown";
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCategory::config,
                key + ": expected a number, got '" + value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCategory::config,
                key + ": expected an integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCategory::config,
                key + ": expected an unsigned integer, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "on" || value == "1") return true;
  if (value == "false" || value == "off" || value == "0") return false;
  throw Error(ErrorCategory::config,
              key + ": expected true/false, got '" + value + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&,
                                  const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"method", [](ExperimentConfig& c, const std::string&,
                    const std::string& v) { c.method = parse_method(v); }},
      {"epsilon", [](ExperimentConfig& c, const std::string& k,
                     const std::string& v) { c.epsilon = parse_double(k, v); }},
      {"sensitivity",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.sensitivity = parse_double(k, v);
       }},
      {"clients",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.total_clients = static_cast<int>(parse_int(k, v));
       }},
      {"clients_per_round",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.clients_per_round = static_cast<int>(parse_int(k, v));
       }},
      {"rounds",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.rounds = static_cast<int>(parse_int(k, v));
       }},
      {"partition",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.partition = parse_partition_mode(v);
       }},
      {"partition_seed",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.partition_seed = parse_u64(k, v);
       }},
      {"min_partition_size",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.min_partition_size = static_cast<int>(parse_int(k, v));
       }},
      {"lr", [](ExperimentConfig& c, const std::string& k,
                const std::string& v) { c.lr = parse_double(k, v); }},
      {"local_epochs",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.local_epochs = static_cast<int>(parse_int(k, v));
       }},
      {"batch_size",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.batch_size = static_cast<int>(parse_int(k, v));
       }},
      {"seed", [](ExperimentConfig& c, const std::string& k,
                  const std::string& v) { c.seed = parse_u64(k, v); }},
      {"out_dir", [](ExperimentConfig& c, const std::string&,
                     const std::string& v) { c.out_dir = v; }},
      {"data_dir", [](ExperimentConfig& c, const std::string&,
                      const std::string& v) { c.data_dir = v; }},
      {"epsilon_floor",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.epsilon_floor = parse_double(k, v);
       }},
      {"clip", [](ExperimentConfig& c, const std::string& k,
                  const std::string& v) { c.clip = parse_bool(k, v); }},
      {"noise", [](ExperimentConfig& c, const std::string& k,
                   const std::string& v) { c.noise = parse_bool(k, v); }},
      {"force_unit_scaling",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.force_unit_scaling = parse_bool(k, v);
       }},
      {"init", [](ExperimentConfig& c, const std::string&,
                  const std::string& v) { c.init = parse_model_init(v); }},
      {"workers",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.workers = static_cast<int>(parse_int(k, v));
       }},
      {"score_fixed_p",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.score_fixed_p = parse_double(k, v);
       }},
  };
  return table;
}

}  // namespace

std::map<std::string, std::string> parse_kv_lines(std::istream& in,
                                                  const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCategory::config,
                  origin + ":" + std::to_string(line_no) +
                      ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorCategory::config,
                  origin + ":" + std::to_string(line_no) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

ExperimentConfig apply_overrides(ExperimentConfig base,
                                 const std::map<std::string, std::string>& kv) {
  const auto& table = setters();
  for (const auto& [key, value] : kv) {
    const auto it = table.find(key);
    if (it == table.end()) {
      throw Error(ErrorCategory::config, "unknown key '" + key + "'");
    }
    it->second(base, key, value);
  }
  return base;
}

ExperimentConfig parse_config_kv(const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg = apply_overrides(ExperimentConfig{}, kv);
  validate_config(cfg);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCategory::config, "cannot open config '" + path + "'");
  }
  return parse_config_kv(parse_kv_lines(in, path));
}

void validate_config(const ExperimentConfig& cfg) {
  const auto fail = [](const std::string& msg) {
    throw Error(ErrorCategory::config, msg);
  };
  if (cfg.total_clients < 1) fail("clients: must be >= 1");
  if (cfg.clients_per_round < 1 || cfg.clients_per_round > cfg.total_clients) {
    fail("clients_per_round: require 1 <= N <= clients (" +
         std::to_string(cfg.clients_per_round) + " vs " +
         std::to_string(cfg.total_clients) + ")");
  }
  if (cfg.rounds < 0) fail("rounds: must be >= 0");
  if (!(cfg.epsilon > 0.0)) fail("epsilon: must be > 0");
  if (!(cfg.sensitivity > 0.0)) fail("sensitivity: must be > 0");
  if (!(cfg.lr > 0.0)) fail("lr: must be > 0");
  if (cfg.local_epochs < 0) fail("local_epochs: must be >= 0");
  if (cfg.batch_size < 1) fail("batch_size: must be >= 1");
  if (cfg.min_partition_size < 1) fail("min_partition_size: must be >= 1");
  if (cfg.workers < 1) fail("workers: must be >= 1");
  if (cfg.epsilon_floor >= 0.0 && cfg.epsilon_floor > cfg.epsilon) {
    fail("epsilon_floor: must not exceed epsilon");
  }
  if (!(cfg.score_fixed_p > 0.0) || cfg.score_fixed_p > 1.0) {
    fail("score_fixed_p: must be in (0, 1]");
  }
}

double materialized_epsilon_floor(const ExperimentConfig& cfg) {
  return cfg.epsilon_floor >= 0.0 ? cfg.epsilon_floor : 1e-3 * cfg.epsilon;
}

std::string echo_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "method = " << to_string(cfg.method) << '\n'
      << "epsilon = " << cfg.epsilon << '\n'
      << "sensitivity = " << cfg.sensitivity << '\n'
      << "clients = " << cfg.total_clients << '\n'
      << "clients_per_round = " << cfg.clients_per_round << '\n'
      << "rounds = " << cfg.rounds << '\n'
      << "partition = " << to_string(cfg.partition) << '\n'
      << "partition_seed = " << cfg.partition_seed << '\n'
      << "min_partition_size = " << cfg.min_partition_size << '\n'
      << "lr = " << cfg.lr << '\n'
      << "local_epochs = " << cfg.local_epochs << '\n'
      << "batch_size = " << cfg.batch_size << '\n'
      << "seed = " << cfg.seed << '\n'
      << "out_dir = " << cfg.out_dir << '\n'
      << "data_dir = " << cfg.data_dir << '\n'
      << "epsilon_floor = " << materialized_epsilon_floor(cfg) << '\n'
      << "clip = " << (cfg.clip ? "true" : "false") << '\n'
      << "noise = " << (cfg.noise ? "true" : "false") << '\n'
      << "force_unit_scaling = " << (cfg.force_unit_scaling ? "true" : "false")
      << '\n'
      << "init = " << (cfg.init == ModelInit::Zero ? "zero" : "gaussian")
      << '\n'
      << "workers = " << cfg.workers << '\n'
      << "score_fixed_p = " << cfg.score_fixed_p << '\n';
  return out.str();
}

}  // namespace cosafed
