#include "overloadx/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace overloadx {

using nlohmann::json;

RunOptions ExperimentConfig::run_options() const {
  RunOptions o;
  o.arrivals = arrivals;
  o.start = start;
  o.warmup = warmup.value_or(default_warmup(start));
  return o;
}

namespace {

void reject_unknown(const json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "/" : path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(path + "/" + key, "unknown key");
  }
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<std::int64_t>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

std::array<double, 2> pair(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(path, "expected an array of 2 numbers");
  return {number(v[0], path + "/0"), number(v[1], path + "/1")};
}

Rational rational(const json& v, const std::string& path) {
  const std::string s = text(v, path);
  try {
    return Rational::parse(s);
  } catch (const std::exception& e) {
    throw ConfigError(path, std::string("not a ratio \"j/k\" of positive integers: ") + e.what());
  }
}

ModelParams parse_params(const json& j) {
  const std::string base = "/params";
  reject_unknown(j, base,
                 {"lambda", "theta", "mu", "m", "r12", "r21", "kappa12", "kappa21"});
  ModelParams p = base_case();
  bool r21_given = false;
  bool kappa21_given = false;
  if (j.contains("lambda")) p.lambda = pair(j["lambda"], base + "/lambda");
  if (j.contains("theta")) p.theta = pair(j["theta"], base + "/theta");
  if (j.contains("mu")) {
    const json& mu = j["mu"];
    if (!mu.is_array() || mu.size() != 2) {
      throw ConfigError(base + "/mu", "expected a 2x2 array");
    }
    p.mu = {pair(mu[0], base + "/mu/0"), pair(mu[1], base + "/mu/1")};
  }
  if (j.contains("m")) p.m = pair(j["m"], base + "/m");
  if (j.contains("r12")) p.r12 = rational(j["r12"], base + "/r12");
  if (j.contains("r21")) {
    p.r21 = rational(j["r21"], base + "/r21");
    r21_given = true;
  }
  if (j.contains("kappa12")) p.kappa12 = number(j["kappa12"], base + "/kappa12");
  if (j.contains("kappa21")) {
    p.kappa21 = number(j["kappa21"], base + "/kappa21");
    kappa21_given = true;
  }
  // The reverse-direction parameters default to the forward ones.
  if (!r21_given) p.r21 = p.r12;
  if (!kappa21_given) p.kappa21 = p.kappa12;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(base, e.what());
  }
  return p;
}

}  // namespace

ExperimentConfig parse_config(const std::string& input) {
  json j;
  try {
    j = json::parse(input);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  reject_unknown(j, "",
                 {"params", "scales", "runs", "arrivals", "warmup", "start", "seed",
                  "sigma2_method", "psi_convention", "output"});
  ExperimentConfig c;
  if (j.contains("params")) c.params = parse_params(j["params"]);
  if (j.contains("scales")) {
    const json& s = j["scales"];
    if (!s.is_array()) throw ConfigError("/scales", "expected an array of integers");
    if (s.empty()) throw ConfigError("/scales", "must not be empty");
    c.scales.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto n = integer(s[i], "/scales/" + std::to_string(i));
      if (n < 1) throw ConfigError("/scales/" + std::to_string(i), "scale must be >= 1");
      c.scales.push_back(static_cast<int>(n));
    }
  }
  if (j.contains("runs")) {
    c.runs = static_cast<int>(integer(j["runs"], "/runs"));
    if (c.runs < 2) throw ConfigError("/runs", "need at least 2 runs for confidence intervals");
  }
  if (j.contains("arrivals")) {
    c.arrivals = integer(j["arrivals"], "/arrivals");
    if (c.arrivals < 1) throw ConfigError("/arrivals", "must be >= 1");
  }
  if (j.contains("warmup")) {
    c.warmup = number(j["warmup"], "/warmup");
    if (!(*c.warmup >= 0.0 && *c.warmup <= 1.0)) {
      throw ConfigError("/warmup", "must lie in [0, 1]");
    }
  }
  if (j.contains("start")) {
    try {
      c.start = parse_start_mode(text(j["start"], "/start"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/start", e.what());
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("/seed", "expected an unsigned integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("sigma2_method")) {
    try {
      c.sigma2_method = parse_sigma2_method(text(j["sigma2_method"], "/sigma2_method"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/sigma2_method", e.what());
    }
  }
  if (j.contains("psi_convention")) {
    try {
      c.psi_convention = parse_psi_convention(text(j["psi_convention"], "/psi_convention"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("/psi_convention", e.what());
    }
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    reject_unknown(o, "/output", {"csv", "markdown"});
    if (o.contains("csv")) c.output.csv = text(o["csv"], "/output/csv");
    if (o.contains("markdown")) c.output.markdown = text(o["markdown"], "/output/markdown");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_json(const ExperimentConfig& c) {
  const ModelParams& p = c.params;
  json j;
  j["params"] = {
      {"lambda", p.lambda},
      {"theta", p.theta},
      {"mu", {p.mu[0], p.mu[1]}},
      {"m", p.m},
      {"r12", p.r12.to_string()},
      {"r21", p.r21.to_string()},
      {"kappa12", p.kappa12},
      {"kappa21", p.kappa21},
  };
  j["scales"] = c.scales;
  j["runs"] = c.runs;
  j["arrivals"] = c.arrivals;
  if (c.warmup) j["warmup"] = *c.warmup;
  j["start"] = to_string(c.start);
  j["seed"] = c.seed;
  if (c.sigma2_method) j["sigma2_method"] = std::string(to_string(*c.sigma2_method));
  if (c.psi_convention) j["psi_convention"] = to_string(*c.psi_convention);
  j["output"] = {{"csv", c.output.csv}, {"markdown", c.output.markdown}};
  return j.dump(2);
}

}  // namespace overloadx
