// Command-line front end: generate fixture networks, synthesize single
// attacks, run campaigns, and verify saved results.
//
// Exit codes for `attack`: 0 success, 1 no attack exists, 2 timed out,
// 3 configuration error. `campaign` exits 0 once the campaign completes.
// `verify` exits 0 only when the saved result checks out.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "relumip/attack.hpp"
#include "relumip/network_io.hpp"
#include "relumip/report_io.hpp"

namespace {

using namespace relumip;

std::vector<Index> parse_shape(const std::string& text) {
  std::vector<Index> widths;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '-')) {
    try {
      widths.push_back(static_cast<Index>(std::stoll(part)));
    } catch (const std::exception&) {
      throw std::invalid_argument("gen: bad shape component \"" + part + "\"");
    }
  }
  if (widths.size() < 2)
    throw std::invalid_argument("gen: shape needs at least input and output widths");
  return widths;
}

void override_eps(AttackConfig& cfg, double eps) {
  cfg.eps = eps;
  std::visit(
      [&](auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, MinScore> || std::is_same_v<T, PartialOrdering> ||
                      std::is_same_v<T, TotalOrdering>)
          c.eps = eps;
      },
      cfg.constraint);
}

struct CommonOpts {
  std::string network_path;
  std::string config_path;
  std::string out_path;
  double time_limit = 0.0;  // 0: keep the config's value
  double eps = 0.0;         // 0: keep the config's value
  bool trace = false;
};

AttackConfig load_config(const CommonOpts& opt, const Networkd& net) {
  AttackConfig cfg = load_attack_config_file(opt.config_path, net);
  if (opt.time_limit > 0.0) cfg.solver.time_limit_s = opt.time_limit;
  if (opt.eps > 0.0) override_eps(cfg, opt.eps);
  if (opt.trace) cfg.solver.trace = &std::cerr;
  cfg.solver.validate();
  return cfg;
}

int cmd_gen(const std::string& shape, std::uint64_t seed, const std::string& out,
            const std::string& final_act) {
  Activation act;
  if (final_act == "relu") act = Activation::ReLU;
  else if (final_act == "linear") act = Activation::Linear;
  else throw std::invalid_argument("gen: final activation must be relu or linear");
  save_network_file(make_random_network(parse_shape(shape), seed, act), out);
  return 0;
}

int cmd_attack(const CommonOpts& opt) {
  const Networkd net = load_network_file(opt.network_path);
  const AttackConfig cfg = load_config(opt, net);

  Scenario sc;
  sc.indices = cfg.own_scenario();
  const AttackResult res = synthesize(net, cfg, sc, cfg.solver);
  if (!opt.out_path.empty()) write_result_json_file(opt.out_path, res, cfg);

  switch (res.status) {
    case AttackStatus::Success: return 0;
    case AttackStatus::NoAttackExists: return 1;
    case AttackStatus::TimedOut: return 2;
    case AttackStatus::Error: return 3;
  }
  return 3;
}

int cmd_campaign(const CommonOpts& opt, const std::vector<int>& ks, int jobs,
                 bool timing) {
  const Networkd net = load_network_file(opt.network_path);
  const AttackConfig cfg = load_config(opt, net);
  const CampaignReport report = run_campaign(net, cfg, ks, cfg.solver, jobs);
  write_campaign_csv_file(opt.out_path + ".csv", report, timing);
  write_campaign_json_file(opt.out_path + ".json", report);
  std::cout << "campaign: " << report.totals.successful << "/" << report.totals.total
            << " successful, peak " << report.peak_time_s << " s\n";
  return 0;
}

int cmd_verify(const std::string& network_path, const std::string& result_path) {
  const Networkd net = load_network_file(network_path);
  const LoadedResult lr = load_result_json_file(result_path);
  const AttackConfig cfg = parse_attack_config(lr.config_json, net);
  const VerifyOutcome v = verify(net, lr.result, cfg);
  if (v.ok) return 0;
  std::cerr << "verify: " << to_string(v.reason) << ": " << v.detail << "\n";
  return v.reason == VerifyOutcome::Reason::DimMismatch ? 3 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MILP-based input-perturbation attack synthesis for feed-forward "
               "rectifier networks"};
  app.require_subcommand(1);

  std::string shape, final_act = "relu";
  std::uint64_t seed = 0;
  CommonOpts opt;
  std::vector<int> ks{1};
  int jobs = 1;
  bool timing = false;
  std::string result_path;

  auto* gen = app.add_subcommand("gen", "Write a reproducible random network");
  gen->add_option("--shape", shape, "Layer widths, e.g. 5-25-25-3")->required();
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", opt.out_path, "Output network path")->required();
  gen->add_option("--final-activation", final_act, "relu|linear");

  auto* attack = app.add_subcommand("attack", "Synthesize one attack");
  attack->add_option("--network", opt.network_path)->required();
  attack->add_option("--attack-config", opt.config_path)->required();
  attack->add_option("--out", opt.out_path, "Result JSON path");
  attack->add_option("--time-limit", opt.time_limit, "Seconds");
  attack->add_option("--eps", opt.eps, "Ordering margin override");
  attack->add_flag("--trace", opt.trace, "Solver trace on stderr");

  auto* campaign = app.add_subcommand("campaign", "Attack every scenario");
  campaign->add_option("--network", opt.network_path)->required();
  campaign->add_option("--attack-config", opt.config_path)->required();
  campaign->add_option("--out", opt.out_path, "Report path prefix")->required();
  campaign->add_option("--k", ks, "Scenario sizes, e.g. --k 1,2")->delimiter(',');
  campaign->add_option("--jobs", jobs, "Parallel scenario solves");
  campaign->add_option("--time-limit", opt.time_limit, "Seconds per scenario");
  campaign->add_option("--eps", opt.eps, "Ordering margin override");
  campaign->add_flag("--timing", timing, "Real wall times in the CSV");
  campaign->add_flag("--trace", opt.trace, "Solver trace on stderr");

  auto* verify_cmd = app.add_subcommand("verify", "Re-check a saved result");
  verify_cmd->add_option("--network", opt.network_path)->required();
  verify_cmd->add_option("--result", result_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(shape, seed, opt.out_path, final_act);
    if (attack->parsed()) return cmd_attack(opt);
    if (campaign->parsed()) return cmd_campaign(opt, ks, jobs, timing);
    if (verify_cmd->parsed()) return cmd_verify(opt.network_path, result_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (attack->parsed() && !opt.out_path.empty()) {
      try {
        std::ofstream out(opt.out_path);
        out << "{\"status\": \"Error\", \"detail\": " << nlohmann::json(e.what()).dump()
            << "}\n";
      } catch (...) {
      }
    }
    return 3;
  }
  return 3;
}
