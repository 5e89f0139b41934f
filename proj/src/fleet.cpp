#include "ufcsim/fleet.hpp"

#include "ufcsim/errors.hpp"
#include "ufcsim/io_util.hpp"

#include <algorithm>
#include <cmath>

namespace ufcsim {

static void validate_tech(const ChargerTech& tech) {
    if (!(tech.rating_kw > 0.0)) {
        throw ValidationError("charger rating must be positive: " + tech.name);
    }
    if (!(tech.session_energy_kwh > 0.0)) {
        throw ValidationError("session energy must be positive: " + tech.name);
    }
}

double session_duration_hours(const ChargerTech& tech) {
    validate_tech(tech);
    return tech.session_energy_kwh / tech.rating_kw;
}

int session_duration_slots(const ChargerTech& tech) {
    double minutes = session_duration_hours(tech) * 60.0;
    double slots = minutes / kSimSlotMinutes;
    double rounded = std::round(slots);
    if (rounded < 1.0 || std::abs(slots - rounded) > 1e-9 * std::max(1.0, slots)) {
        throw ValidationError("session duration of " + tech.name + " (" + format_double(minutes) +
                              " min) is not a whole number of 4-minute slots");
    }
    return static_cast<int>(rounded);
}

PowerProfile synthesize_profile(const ArrivalProfile& arrivals, const ChargerTech& tech) {
    validate(arrivals);
    const Eigen::Index n = arrivals.horizon_slots();
    const int duration = session_duration_slots(tech);

    // A cohort arriving at slot u occupies slots u..u+duration-1 (mod n), so
    // slot t serves every cohort in the trailing window of `duration` slots.
    // Rolling prefix sums give the window sum in O(n); sessions longer than
    // the horizon wrap whole extra laps.
    Eigen::ArrayXd prefix(n + 1);
    prefix[0] = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        prefix[i + 1] = prefix[i] + arrivals.counts[i];
    }
    const double week_total = prefix[n];
    const Eigen::Index full_laps = duration / n;
    const Eigen::Index rem = duration % n;

    PowerProfile out;
    out.kw = Eigen::ArrayXd::Zero(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        double window;
        Eigen::Index lo = t + 1 - rem;
        if (lo >= 0) {
            window = prefix[t + 1] - prefix[lo];
        } else {
            window = prefix[t + 1] + (prefix[n] - prefix[n + lo]);
        }
        out.kw[t] = tech.rating_kw * (window + static_cast<double>(full_laps) * week_total);
    }
    return out;
}

PowerProfile blend_profiles(const ArrivalProfile& arrivals, double ufc_share,
                            const ChargerTech& l2, const ChargerTech& ufc) {
    if (!(ufc_share >= 0.0 && ufc_share <= 1.0)) {
        throw ValidationError("ufc share must lie in [0,1], got " + format_double(ufc_share));
    }
    PowerProfile a = synthesize_profile(arrivals, l2);
    PowerProfile b = synthesize_profile(arrivals, ufc);
    PowerProfile out;
    out.kw = (1.0 - ufc_share) * a.kw + ufc_share * b.kw;
    return out;
}

BillingProfile downsample_15min(const PowerProfile& profile) {
    const Eigen::Index n = profile.horizon_slots();
    const long total_minutes = static_cast<long>(n) * kSimSlotMinutes;
    if (n == 0 || total_minutes % kBillSlotMinutes != 0) {
        throw ValidationError("profile horizon (" + std::to_string(total_minutes) +
                              " min) is not a whole number of 15-minute intervals");
    }
    const Eigen::Index m = total_minutes / kBillSlotMinutes;

    BillingProfile out;
    out.kw = Eigen::ArrayXd::Zero(m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const long start = i * kSimSlotMinutes;
        const long end = start + kSimSlotMinutes;
        for (long k = start / kBillSlotMinutes; k * kBillSlotMinutes < end; ++k) {
            const long lo = std::max(start, k * kBillSlotMinutes);
            const long hi = std::min(end, (k + 1) * kBillSlotMinutes);
            out.kw[k] += profile.kw[i] * static_cast<double>(hi - lo) / kBillSlotMinutes;
        }
    }
    return out;
}

double total_energy_kwh(const PowerProfile& profile) {
    return profile.kw.sum() * kSimSlotHours;
}

double total_energy_kwh(const BillingProfile& profile) {
    return profile.kw.sum() * kBillSlotHours;
}

} // namespace ufcsim
