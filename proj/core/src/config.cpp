#include "algoforge/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace algoforge {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (key == a) known = true;
    if (!known)
      throw ConfigError(std::string("unknown key '") + key + "' in " + where);
  }
}

double as_number(const json& v, const char* what) {
  if (!v.is_number()) throw ConfigError(std::string(what) + " must be a number");
  return v.get<double>();
}

int as_int(const json& v, const char* what) {
  if (!v.is_number_integer()) throw ConfigError(std::string(what) + " must be an integer");
  return v.get<int>();
}

std::vector<double> as_vector(const json& v, const char* what) {
  if (!v.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& c : v) out.push_back(as_number(c, what));
  return out;
}

ProblemKind parse_kind(const std::string& s) {
  if (s == "root_finding") return ProblemKind::RootFinding;
  if (s == "minimization") return ProblemKind::Minimization;
  throw ConfigError("problem kind must be 'root_finding' or 'minimization'");
}

AlgorithmKind parse_family_kind(const std::string& s) {
  if (s == "single") return AlgorithmKind::SingleStep;
  if (s == "two-step") return AlgorithmKind::TwoStep;
  throw ConfigError("family kind must be 'single' or 'two-step'");
}

CostMode parse_cost_mode(const std::string& s) {
  if (s == "counted") return CostMode::Counted;
  if (s == "residual-weighted") return CostMode::ResidualWeighted;
  throw ConfigError("cost mode must be 'counted' or 'residual-weighted'");
}

ProblemSpec parse_problem(const json& v) {
  if (v.is_string()) {
    try {
      return builtin(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (!v.is_object()) throw ConfigError("problem must be a preset name or an object");
  require_keys(v, "problem",
               {"kind", "name", "n", "exprs", "box_lo", "box_hi", "initial_points", "epsilon",
                "it_max", "j_max"});

  ProblemSpec p;
  if (!v.contains("kind") || !v["kind"].is_string())
    throw ConfigError("problem.kind is required ('root_finding' or 'minimization')");
  p.kind = parse_kind(v["kind"].get<std::string>());
  p.name = v.contains("name") ? v["name"].get<std::string>() : "custom";

  if (!v.contains("box_lo") || !v.contains("box_hi"))
    throw ConfigError("problem.box_lo and problem.box_hi are required");
  p.box_lo = as_vector(v["box_lo"], "problem.box_lo");
  p.box_hi = as_vector(v["box_hi"], "problem.box_hi");
  p.n = static_cast<int>(p.box_lo.size());
  if (v.contains("n") && as_int(v["n"], "problem.n") != p.n)
    throw ConfigError("problem.n disagrees with box length");

  if (!v.contains("exprs") || !v["exprs"].is_array())
    throw ConfigError("problem.exprs must be an array of expression strings");
  for (const auto& e : v["exprs"]) {
    if (!e.is_string()) throw ConfigError("problem.exprs entries must be strings");
    try {
      p.exprs.push_back(Expression::parse(e.get<std::string>(), p.n));
    } catch (const ParseError& pe) {
      throw ConfigError(std::string("problem expression: ") + pe.what());
    }
  }

  if (!v.contains("initial_points") || !v["initial_points"].is_array())
    throw ConfigError("problem.initial_points must be an array of points");
  for (const auto& pt : v["initial_points"])
    p.initial_points.push_back(as_vector(pt, "problem.initial_points"));

  if (v.contains("epsilon")) p.epsilon = as_number(v["epsilon"], "problem.epsilon");
  if (v.contains("it_max")) p.it_max = as_int(v["it_max"], "problem.it_max");
  if (v.contains("j_max")) p.j_max = as_int(v["j_max"], "problem.j_max");

  try {
    validate(p);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

FamilyConfig parse_family(const json& v) {
  if (!v.is_object()) throw ConfigError("family must be an object");
  require_keys(v, "family", {"kind", "j_max", "k_min", "k_max", "beta_grid"});
  FamilyConfig f;
  if (v.contains("kind")) f.kind = parse_family_kind(v["kind"].get<std::string>());
  if (v.contains("j_max")) f.j_max = as_int(v["j_max"], "family.j_max");
  if (v.contains("k_min")) f.k_min = as_int(v["k_min"], "family.k_min");
  if (v.contains("k_max")) f.k_max = as_int(v["k_max"], "family.k_max");
  if (v.contains("beta_grid")) f.beta_grid = as_vector(v["beta_grid"], "family.beta_grid");
  if (f.j_max < 1 || f.j_max > 2) throw ConfigError("family.j_max must be 1 or 2");
  if (f.k_min > f.k_max) throw ConfigError("family exponent grid is empty");
  if (f.beta_grid.empty()) throw ConfigError("family.beta_grid must not be empty");
  for (double b : f.beta_grid)
    if (b < 0.0 || b >= 1.0) throw ConfigError("family.beta_grid entries must lie in [0,1)");
  return f;
}

SearchConfig parse_search(const json& v) {
  if (!v.is_object()) throw ConfigError("search must be an object");
  require_keys(v, "search",
               {"node_budget", "monotone_residual", "enforce_box", "memoize_states",
                "memo_granularity", "abar_max", "cost_mode"});
  SearchConfig s;
  if (v.contains("node_budget")) {
    if (!v["node_budget"].is_number_integer())
      throw ConfigError("search.node_budget must be an integer");
    s.node_budget = v["node_budget"].get<long>();
  }
  if (v.contains("monotone_residual")) s.monotone_residual = v["monotone_residual"].get<bool>();
  if (v.contains("enforce_box")) s.enforce_box = v["enforce_box"].get<bool>();
  if (v.contains("memoize_states")) s.memoize_states = v["memoize_states"].get<bool>();
  if (v.contains("memo_granularity"))
    s.memo_granularity = as_number(v["memo_granularity"], "search.memo_granularity");
  if (v.contains("abar_max")) s.abar_max = as_int(v["abar_max"], "search.abar_max");
  if (v.contains("cost_mode")) s.cost_mode = parse_cost_mode(v["cost_mode"].get<std::string>());
  if (s.node_budget < 1) throw ConfigError("search.node_budget must be at least 1");
  if (s.abar_max < 0 || s.abar_max > 60) throw ConfigError("search.abar_max out of range");
  if (s.memo_granularity <= 0.0) throw ConfigError("search.memo_granularity must be positive");
  return s;
}

std::map<int, double> parse_int_map(const json& v, const char* what) {
  if (!v.is_object()) throw ConfigError(std::string(what) + " must be an object");
  std::map<int, double> out;
  for (const auto& [key, value] : v.items()) {
    int k = 0;
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), k);
    if (ec != std::errc{} || ptr != key.data() + key.size())
      throw ConfigError(std::string(what) + " keys must be integers");
    out[k] = as_number(value, what);
  }
  return out;
}

CostModel parse_cost(const json& v) {
  if (!v.is_object()) throw ConfigError("cost must be an object");
  require_keys(v, "cost", {"exponent_cost", "order_weight"});
  CostModel m;
  if (v.contains("exponent_cost"))
    m.exponent_cost = parse_int_map(v["exponent_cost"], "cost.exponent_cost");
  if (v.contains("order_weight"))
    m.order_weight = parse_int_map(v["order_weight"], "cost.order_weight");
  try {
    validate(m);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return m;
}

std::vector<double> parse_point_text(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string tok =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      throw ConfigError("malformed coordinate '" + tok + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<std::vector<double>> parse_starts_text(const std::string& text) {
  std::vector<std::vector<double>> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t semi = text.find(';', pos);
    std::string tok =
        text.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos);
    if (!tok.empty()) out.push_back(parse_point_text(tok));
    if (semi == std::string::npos) break;
    pos = semi + 1;
  }
  if (out.empty()) throw ConfigError("empty starts list");
  return out;
}

std::vector<double> parse_beta_grid_text(const std::string& text) {
  std::vector<double> grid = parse_point_text(text);
  if (grid.empty()) throw ConfigError("empty beta grid");
  for (double b : grid)
    if (b < 0.0 || b >= 1.0) throw ConfigError("beta grid entries must lie in [0,1)");
  return grid;
}

}  // namespace

RunConfig parse_config_text(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  require_keys(doc, "config",
               {"problem", "family", "search", "cost", "starts", "shortlist", "workers",
                "output_dir"});

  RunConfig cfg;
  if (doc.contains("problem")) {
    cfg.problem = parse_problem(doc["problem"]);
    cfg.has_problem = true;
  }
  if (doc.contains("family")) cfg.family = parse_family(doc["family"]);
  if (doc.contains("search")) cfg.search = parse_search(doc["search"]);
  if (doc.contains("cost")) cfg.cost = parse_cost(doc["cost"]);
  if (doc.contains("starts")) {
    if (!doc["starts"].is_array()) throw ConfigError("starts must be an array of points");
    for (const auto& pt : doc["starts"]) cfg.starts.push_back(as_vector(pt, "starts"));
  }
  if (doc.contains("shortlist")) {
    cfg.shortlist = as_int(doc["shortlist"], "shortlist");
    if (*cfg.shortlist < 1) throw ConfigError("shortlist must be positive");
  }
  if (doc.contains("workers")) {
    cfg.workers = as_int(doc["workers"], "workers");
    if (cfg.workers < 1) throw ConfigError("workers must be positive");
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) throw ConfigError("output_dir must be a string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }
  return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

RunConfig build_config(const std::optional<std::string>& config_path,
                       const ConfigOverrides& o) {
  RunConfig cfg;
  if (config_path) cfg = load_config_file(*config_path);

  if (const char* env = std::getenv("ALGOFORGE_OUT"); env && cfg.output_dir == ".")
    cfg.output_dir = env;

  if (o.problem) {
    try {
      cfg.problem = builtin(*o.problem);
      cfg.has_problem = true;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.family_kind) cfg.family.kind = parse_family_kind(*o.family_kind);
  if (o.j_max) {
    if (*o.j_max < 1 || *o.j_max > 2) throw ConfigError("--jmax must be 1 or 2");
    cfg.family.j_max = *o.j_max;
  }
  if (o.beta_grid) cfg.family.beta_grid = parse_beta_grid_text(*o.beta_grid);
  if (o.epsilon) {
    if (*o.epsilon <= 0.0) throw ConfigError("--eps must be positive");
    cfg.problem.epsilon = *o.epsilon;
  }
  if (o.it_max) {
    if (*o.it_max < 1) throw ConfigError("--itmax must be at least 1");
    cfg.problem.it_max = *o.it_max;
  }
  if (o.node_budget) {
    if (*o.node_budget < 1) throw ConfigError("--budget must be at least 1");
    cfg.search.node_budget = *o.node_budget;
  }
  if (o.monotone_residual) cfg.search.monotone_residual = true;
  if (o.no_box) cfg.search.enforce_box = false;
  if (o.cost_mode) cfg.search.cost_mode = parse_cost_mode(*o.cost_mode);
  if (o.workers) {
    if (*o.workers < 1) throw ConfigError("--workers must be positive");
    cfg.workers = *o.workers;
  }
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.starts) cfg.starts = parse_starts_text(*o.starts);
  if (o.shortlist) {
    if (*o.shortlist < 1) throw ConfigError("--shortlist must be positive");
    cfg.shortlist = *o.shortlist;
  }

  if (cfg.has_problem) {
    try {
      validate(cfg.problem);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  return cfg;
}

std::string effective_config_json(const RunConfig& cfg) {
  json doc;
  if (cfg.has_problem) {
    json p;
    p["kind"] = to_string(cfg.problem.kind);
    p["name"] = cfg.problem.name;
    p["n"] = cfg.problem.n;
    json exprs = json::array();
    for (const Expression& e : cfg.problem.exprs) exprs.push_back(e.text());
    p["exprs"] = exprs;
    p["box_lo"] = cfg.problem.box_lo;
    p["box_hi"] = cfg.problem.box_hi;
    p["initial_points"] = cfg.problem.initial_points;
    p["epsilon"] = cfg.problem.epsilon;
    p["it_max"] = cfg.problem.it_max;
    p["j_max"] = cfg.problem.j_max;
    doc["problem"] = p;
  }
  {
    json f;
    f["kind"] = cfg.family.kind == AlgorithmKind::TwoStep ? "two-step" : "single";
    f["j_max"] = cfg.family.j_max;
    f["k_min"] = cfg.family.k_min;
    f["k_max"] = cfg.family.k_max;
    f["beta_grid"] = cfg.family.beta_grid;
    doc["family"] = f;
  }
  {
    json s;
    s["node_budget"] = cfg.search.node_budget;
    s["monotone_residual"] = cfg.search.monotone_residual;
    s["enforce_box"] = cfg.search.enforce_box;
    s["memoize_states"] = cfg.search.memoize_states;
    s["memo_granularity"] = cfg.search.memo_granularity;
    s["abar_max"] = cfg.search.abar_max;
    s["cost_mode"] = to_string(cfg.search.cost_mode);
    doc["search"] = s;
  }
  {
    json c;
    json ec = json::object();
    for (const auto& [k, v] : cfg.cost.exponent_cost) ec[std::to_string(k)] = v;
    json ow = json::object();
    for (const auto& [k, v] : cfg.cost.order_weight) ow[std::to_string(k)] = v;
    c["exponent_cost"] = ec;
    c["order_weight"] = ow;
    doc["cost"] = c;
  }
  if (!cfg.starts.empty()) doc["starts"] = cfg.starts;
  if (cfg.shortlist) doc["shortlist"] = *cfg.shortlist;
  return doc.dump(2);
}

}  // namespace algoforge
