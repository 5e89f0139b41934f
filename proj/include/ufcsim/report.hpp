#pragma once

#include "ufcsim/objectives.hpp"
#include "ufcsim/peakshave.hpp"
#include "ufcsim/stations.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ufcsim {

/// CSV text for a power series: a provenance comment, then
/// `slot_start_minute,kw` rows.
std::string profile_csv_text(const Eigen::ArrayXd& kw, int slot_minutes,
                             const std::string& config_hash);

/// Sweep table: one row per scenario with the cost breakdown, the EV-user
/// total per VOT model, and the grid metrics.
std::string sweep_csv_text(const std::vector<ScenarioResult>& results,
                           const std::string& config_hash);

std::string scenario_json_text(const ScenarioResult& result, Season season,
                               const std::string& config_hash);

std::string sweep_summary_json_text(const std::vector<ScenarioResult>& results, Season season,
                                    const std::string& config_hash);

/// Dispatch table: `slot,load_kw,battery_kw,grid_kw,soc_kwh` rows; soc_kwh is
/// the state of charge at the end of the slot.
std::string dispatch_csv_text(const Eigen::ArrayXd& load_kw, const DispatchPlan& plan,
                              const std::string& config_hash);

std::string distribution_json_text(const RatingDistribution& distribution, int skipped,
                                   const std::string& config_hash);

} // namespace ufcsim
