#include "algoforge/reports.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace algoforge {

namespace {

constexpr const char* kEol = "\r\n";  // RFC 4180 record separator

void append_field(std::string& row, std::string_view field, bool first = false) {
  if (!first) row += ',';
  row += csv_field(field);
}

std::string x_headers(int n) {
  std::string out;
  for (int i = 1; i <= n; ++i) {
    if (i > 1) out += ',';
    out += "x" + std::to_string(i);
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string csv_field(std::string_view field) {
  const bool needs_quote = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quote) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

std::string schedule_string(std::span<const StepChoice> schedule) {
  std::string out;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (i) out += ',';
    out += schedule[i].sign < 0 ? '-' : '+';
    out += std::to_string(schedule[i].abar);
  }
  return out;
}

std::vector<StepChoice> parse_schedule(std::string_view text) {
  std::vector<StepChoice> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string_view tok =
        text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (tok.size() < 2 || (tok[0] != '+' && tok[0] != '-'))
      throw ConfigError("malformed schedule token '" + std::string(tok) + "'");
    int abar = 0;
    auto [ptr, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), abar);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || abar < 0)
      throw ConfigError("malformed schedule token '" + std::string(tok) + "'");
    out.push_back({tok[0] == '-' ? -1 : +1, abar});
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string sanitize_filename(std::string_view spec) {
  std::string out;
  bool last_sep = false;
  for (char c : spec) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
    if (keep) {
      out += c;
      last_sep = false;
    } else if (!last_sep && !out.empty()) {
      out += '_';
      last_sep = true;
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::string results_csv(const std::vector<Discovery>& results) {
  std::string out = "algorithm,status,cost,it_con,nodes_expanded,schedule";
  out += kEol;
  for (const Discovery& d : results) {
    std::string row;
    append_field(row, spec_string(d.spec), true);
    append_field(row, to_string(d.verdict.status));
    const bool feasible = d.verdict.status == SearchStatus::Feasible;
    append_field(row, feasible ? format_double(d.verdict.best->total_cost) : "");
    append_field(row,
                 feasible && d.verdict.best->it_con ? std::to_string(*d.verdict.best->it_con) : "");
    append_field(row, std::to_string(d.verdict.nodes_expanded));
    append_field(row, feasible ? schedule_string(d.verdict.best->schedule) : "");
    out += row;
    out += kEol;
  }
  return out;
}

namespace {

nlohmann::json verdict_json(const Verdict& v) {
  nlohmann::json out;
  out["status"] = to_string(v.status);
  out["nodes_expanded"] = v.nodes_expanded;
  out["budget_exhausted"] = v.budget_exhausted;
  out["proof_conditions"] = v.proof_conditions;
  if (v.best) {
    nlohmann::json t;
    t["feasible"] = v.best->feasible;
    t["total_cost"] = v.best->total_cost;
    if (v.best->it_con) t["it_con"] = *v.best->it_con;
    t["stop_reason"] = to_string(v.best->stop_reason);
    t["schedule"] = schedule_string(v.best->schedule);
    t["points"] = v.best->points;
    t["residuals"] = v.best->residuals;
    t["counted"] = std::vector<int>(v.best->counted.begin(), v.best->counted.end());
    out["trajectory"] = t;
  }
  return out;
}

}  // namespace

std::string results_json(const RunConfig& cfg, const std::vector<Discovery>& results) {
  nlohmann::json doc;
  doc["config"] = nlohmann::json::parse(effective_config_json(cfg));
  nlohmann::json rows = nlohmann::json::array();
  for (const Discovery& d : results) {
    nlohmann::json row = verdict_json(d.verdict);
    row["algorithm"] = spec_string(d.spec);
    row["enumeration_index"] = d.enumeration_index;
    rows.push_back(row);
  }
  doc["results"] = rows;
  return doc.dump(2);
}

std::string trajectory_csv(const ProblemSpec& p, const Trajectory& traj, const CostModel& model,
                           CostMode mode) {
  const std::optional<double> beta =
      traj.algorithm.kind == AlgorithmKind::TwoStep ? std::optional<double>(traj.algorithm.beta)
                                                    : std::nullopt;
  std::string out = "it," + x_headers(p.n) + ",residual,abar,sign,counted,iter_cost";
  out += kEol;
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    std::string row;
    append_field(row, std::to_string(i), true);
    for (double c : traj.points[i]) append_field(row, format_double(c));
    append_field(row, format_double(traj.residuals[i]));
    if (i == 0) {
      row += ",,,,";
    } else {
      const StepChoice s = traj.schedule[i - 1];
      const bool counted = traj.counted[i - 1];
      append_field(row, std::to_string(s.abar));
      append_field(row, s.sign < 0 ? "-" : "+");
      append_field(row, counted ? "1" : "0");
      append_field(row, format_double(edge_cost(mode, traj.algorithm.nu, s, beta, counted,
                                                traj.residuals[i], model)));
    }
    out += row;
    out += kEol;
  }
  return out;
}

std::string ensemble_csv(const ProblemSpec& p, const EnsembleResult& result) {
  std::string out = "start_index," + x_headers(p.n) + ",algorithm,status,cost,rank";
  out += kEol;
  for (std::size_t s = 0; s < result.per_start.size(); ++s) {
    for (std::size_t r = 0; r < result.per_start[s].size(); ++r) {
      const auto& [algo_index, verdict] = result.per_start[s][r];
      std::string row;
      append_field(row, std::to_string(s), true);
      for (double c : result.starts[s]) append_field(row, format_double(c));
      append_field(row, spec_string(result.algorithms[algo_index]));
      append_field(row, to_string(verdict.status));
      const bool feasible = verdict.status == SearchStatus::Feasible;
      append_field(row, feasible ? format_double(verdict.best->total_cost) : "");
      append_field(row, feasible ? std::to_string(r + 1) : "");
      out += row;
      out += kEol;
    }
  }
  return out;
}

std::string aggregate_csv(const EnsembleResult& result) {
  std::string out = "algorithm,n_feasible,n_cheapest,mean_cost";
  out += kEol;
  for (const EnsembleAggregate& a : result.aggregate) {
    std::string row;
    append_field(row, spec_string(result.algorithms[a.algorithm_index]), true);
    append_field(row, std::to_string(a.n_feasible));
    append_field(row, std::to_string(a.n_cheapest));
    append_field(row, a.mean_cost ? format_double(*a.mean_cost) : "");
    out += row;
    out += kEol;
  }
  return out;
}

std::string ensemble_json(const RunConfig& cfg, const EnsembleResult& result) {
  nlohmann::json doc;
  doc["config"] = nlohmann::json::parse(effective_config_json(cfg));
  nlohmann::json algos = nlohmann::json::array();
  for (const AlgorithmSpec& a : result.algorithms) algos.push_back(spec_string(a));
  doc["algorithms"] = algos;
  nlohmann::json aggregate = nlohmann::json::array();
  for (const EnsembleAggregate& a : result.aggregate) {
    nlohmann::json row;
    row["algorithm"] = spec_string(result.algorithms[a.algorithm_index]);
    row["n_feasible"] = a.n_feasible;
    row["n_cheapest"] = a.n_cheapest;
    if (a.mean_cost) row["mean_cost"] = *a.mean_cost;
    aggregate.push_back(row);
  }
  doc["aggregate"] = aggregate;
  return doc.dump(2);
}

std::string grid_csv(const ProblemSpec& p, int resolution) {
  std::string out = "x1,x2,f";
  out += kEol;
  for (int i = 0; i < resolution; ++i) {
    const double t1 = static_cast<double>(i) / (resolution - 1);
    const double x1 = p.box_lo[0] + t1 * (p.box_hi[0] - p.box_lo[0]);
    for (int j = 0; j < resolution; ++j) {
      const double t2 = static_cast<double>(j) / (resolution - 1);
      const double x2 = p.box_lo[1] + t2 * (p.box_hi[1] - p.box_lo[1]);
      const std::vector<double> x = {x1, x2};
      double f;
      try {
        f = p.kind == ProblemKind::Minimization ? p.exprs[0].eval(x) : residual(p, x);
      } catch (const EvalError&) {
        f = std::numeric_limits<double>::quiet_NaN();
      }
      std::string row;
      append_field(row, format_double(x1), true);
      append_field(row, format_double(x2));
      append_field(row, format_double(f));
      out += row;
      out += kEol;
    }
  }
  return out;
}

std::string run_summary(const ProblemSpec& p, const Trajectory& traj) {
  std::string out;
  out += "problem: " + p.name + "\n";
  out += "algorithm: " + spec_string(traj.algorithm) + "\n";
  out += "schedule: " + schedule_string(traj.schedule) + "\n";
  out += "iterations executed: " + std::to_string(traj.schedule.size()) + "\n";
  out += "stop reason: " + std::string(to_string(traj.stop_reason)) + "\n";
  if (traj.it_con) out += "it_con: " + std::to_string(*traj.it_con) + "\n";
  out += "final residual: " + format_double(traj.residuals.back()) + "\n";
  out += std::string(traj.feasible ? "feasible" : "infeasible") + ", cost " +
         format_double(traj.total_cost) + "\n";
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << content;
}

}  // namespace algoforge
