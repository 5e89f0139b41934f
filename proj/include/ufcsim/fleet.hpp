#pragma once

#include "ufcsim/arrivals.hpp"
#include "ufcsim/time_grid.hpp"

#include <Eigen/Dense>

#include <string>

namespace ufcsim {

/// A charging technology: constant rated power for a fixed-energy session.
/// The session duration session_energy_kwh / rating_kw must be a whole number
/// of 4-minute slots.
struct ChargerTech {
    double rating_kw = 0.0;
    double session_energy_kwh = 60.0;
    std::string name;
};

/// Aggregate charging power per 4-minute slot on the periodic weekly horizon.
struct PowerProfile {
    Eigen::ArrayXd kw;
    Eigen::Index horizon_slots() const { return kw.size(); }
};

/// Average power per 15-minute interval, the grid on which tariffs bill.
struct BillingProfile {
    Eigen::ArrayXd kw;
    Eigen::Index horizon_slots() const { return kw.size(); }
};

double session_duration_hours(const ChargerTech& tech);

/// Session length in 4-minute slots; throws ValidationError when the duration
/// does not divide evenly.
int session_duration_slots(const ChargerTech& tech);

/// Each arrival cohort at slot t draws rating_kw for the session duration
/// starting at t, wrapping modulo the horizon (steady-state periodic week).
PowerProfile synthesize_profile(const ArrivalProfile& arrivals, const ChargerTech& tech);

/// Fractional split of arrivals: (1-share) to l2, share to ufc, slot-wise sum
/// of the two pure-technology profiles.
PowerProfile blend_profiles(const ArrivalProfile& arrivals, double ufc_share,
                            const ChargerTech& l2, const ChargerTech& ufc);

/// Overlap-weighted 15-minute averaging (4 does not divide 15); exact in
/// energy. Requires the horizon to span whole 15-minute intervals.
BillingProfile downsample_15min(const PowerProfile& profile);

double total_energy_kwh(const PowerProfile& profile);
double total_energy_kwh(const BillingProfile& profile);

} // namespace ufcsim
