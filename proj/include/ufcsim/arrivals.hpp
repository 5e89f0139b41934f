#pragma once

#include "ufcsim/time_grid.hpp"

#include <Eigen/Dense>

#include <string>

namespace ufcsim {

/// Expected EV arrivals per 4-minute slot over a periodic horizon of whole
/// days (default one week, 2520 slots). Counts are fractional expected
/// arrivals, never negative.
struct ArrivalProfile {
    Eigen::ArrayXd counts;
    std::string label;

    Eigen::Index horizon_slots() const { return counts.size(); }
    double total() const { return counts.sum(); }
};

/// Throws ValidationError if counts are negative or the horizon is not a
/// whole number of days.
void validate(const ArrivalProfile& profile);

/// Load arrivals from CSV. Accepts `slot,count` rows at 4-minute resolution
/// (any whole-day horizon) or `hour,count` rows (24 entries, divided evenly
/// across each hour's fifteen slots and tiled over 7 days).
ArrivalProfile load_arrivals(const std::string& path);

/// Scale every slot by region_share * growth_factor. Factors must be positive
/// and region_share <= 1.
ArrivalProfile apply_corrections(const ArrivalProfile& profile, double region_share,
                                 double growth_factor);

/// Two-Gaussian daily arrival shape tiled over 7 days, normalized so each
/// day's slots sum to total_daily_arrivals. Peaks are hours in [0,24).
ArrivalProfile synthetic_bimodal_profile(double total_daily_arrivals, double morning_peak_hour,
                                         double evening_peak_hour, double spread_hours);

} // namespace ufcsim
