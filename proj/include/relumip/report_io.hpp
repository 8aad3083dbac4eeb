#pragma once
// Result and campaign report serialization. The campaign CSV is
// deterministic by default: the wall-time column prints "-" unless timing
// output is requested, so identical runs produce identical bytes.

#include <iosfwd>
#include <string>

#include "relumip/attack.hpp"

namespace relumip {

/// Single attack result with the attack config embedded, so verification
/// can run from the file alone.
void write_result_json(std::ostream& out, const AttackResult& result,
                       const AttackConfig& cfg);
void write_result_json_file(const std::string& path, const AttackResult& result,
                            const AttackConfig& cfg);

struct LoadedResult {
  AttackResult result;
  std::string config_json;  // embedded attack config document
};

LoadedResult load_result_json(std::istream& in);
LoadedResult load_result_json_file(const std::string& path);

/// Columns: scenario_id,k,indices,status,objective,objective2,verified,
/// nodes,wall_time_s. `indices` joins with ';'. objective2 is the second
/// lexicographic level when present.
void write_campaign_csv(std::ostream& out, const CampaignReport& report,
                        bool with_timing = false);
void write_campaign_csv_file(const std::string& path, const CampaignReport& report,
                             bool with_timing = false);

void write_campaign_json(std::ostream& out, const CampaignReport& report);
void write_campaign_json_file(const std::string& path, const CampaignReport& report);

}  // namespace relumip
