#include "relumip/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace relumip {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  const auto v = a.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

AttackStatus status_from_string(const std::string& s) {
  if (s == "Success") return AttackStatus::Success;
  if (s == "NoAttackExists") return AttackStatus::NoAttackExists;
  if (s == "TimedOut") return AttackStatus::TimedOut;
  if (s == "Error") return AttackStatus::Error;
  throw std::invalid_argument("result: unknown status \"" + s + "\"");
}

json result_to_json(const AttackResult& r) {
  json j{{"status", to_string(r.status)},
         {"scenario", {{"id", r.scenario.id}, {"indices", r.scenario.indices}}},
         {"objective", r.objective},
         {"verified", r.verified},
         {"hit_time_limit", r.hit_time_limit},
         {"wall_time_s", r.wall_time_s},
         {"nodes", r.nodes}};
  if (r.delta.size() > 0) j["delta"] = vec_to_json(r.delta);
  if (r.achieved_outputs.size() > 0) j["achieved_outputs"] = vec_to_json(r.achieved_outputs);
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void write_result_json(std::ostream& out, const AttackResult& result,
                       const AttackConfig& cfg) {
  json j = result_to_json(result);
  j["attack_config"] = json::parse(cfg.raw);
  out << j.dump(2) << '\n';
}

void write_result_json_file(const std::string& path, const AttackResult& result,
                            const AttackConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open result file for writing: " + path);
  write_result_json(out, result, cfg);
}

LoadedResult load_result_json(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("result: JSON parse failure: ") + e.what());
  }
  LoadedResult lr;
  try {
    lr.result.status = status_from_string(j.at("status").get<std::string>());
    lr.result.scenario.id = j.at("scenario").at("id").get<std::int64_t>();
    lr.result.scenario.indices = j.at("scenario").at("indices").get<std::vector<Index>>();
    if (j.contains("delta")) lr.result.delta = vec_from_json(j["delta"]);
    if (j.contains("achieved_outputs"))
      lr.result.achieved_outputs = vec_from_json(j["achieved_outputs"]);
    lr.result.objective = j.value("objective", std::vector<double>{});
    lr.result.verified = j.value("verified", false);
    lr.result.hit_time_limit = j.value("hit_time_limit", false);
    lr.result.wall_time_s = j.value("wall_time_s", 0.0);
    lr.result.nodes = j.value("nodes", 0L);
    lr.result.detail = j.value("detail", std::string{});
    lr.config_json = j.at("attack_config").dump();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("result: malformed document: ") + e.what());
  }
  return lr;
}

LoadedResult load_result_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open result file: " + path);
  return load_result_json(in);
}

void write_campaign_csv(std::ostream& out, const CampaignReport& report,
                        bool with_timing) {
  out << "scenario_id,k,indices,status,objective,objective2,verified,nodes,wall_time_s\n";
  for (const auto& r : report.results) {
    out << r.scenario.id << ',' << r.scenario.indices.size() << ',';
    for (std::size_t i = 0; i < r.scenario.indices.size(); ++i) {
      if (i) out << ';';
      out << r.scenario.indices[i];
    }
    out << ',' << to_string(r.status) << ',';
    if (!r.objective.empty()) out << fmt(r.objective[0]);
    out << ',';
    if (r.objective.size() > 1) out << fmt(r.objective[1]);
    out << ',' << (r.verified ? 1 : 0) << ',' << r.nodes << ',';
    if (with_timing) out << fmt(r.wall_time_s);
    else out << '-';
    out << '\n';
  }
}

void write_campaign_csv_file(const std::string& path, const CampaignReport& report,
                             bool with_timing) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open CSV for writing: " + path);
  write_campaign_csv(out, report, with_timing);
}

void write_campaign_json(std::ostream& out, const CampaignReport& report) {
  json results = json::array();
  for (const auto& r : report.results) results.push_back(result_to_json(r));
  json j{{"totals",
          {{"successful", report.totals.successful},
           {"no_attack", report.totals.no_attack},
           {"timed_out", report.totals.timed_out},
           {"errors", report.totals.errors},
           {"success_with_timeout", report.totals.success_with_timeout},
           {"total", report.totals.total}}},
         {"peak_time_s", report.peak_time_s},
         {"mean_time_s", report.mean_time_s},
         {"results", std::move(results)}};
  if (!report.config_echo.empty()) j["attack_config"] = json::parse(report.config_echo);
  out << j.dump(2) << '\n';
}

void write_campaign_json_file(const std::string& path, const CampaignReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open report for writing: " + path);
  write_campaign_json(out, report);
}

}  // namespace relumip
