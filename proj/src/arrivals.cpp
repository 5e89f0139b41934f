#include "ufcsim/arrivals.hpp"

#include "ufcsim/errors.hpp"
#include "ufcsim/io_util.hpp"

#include <algorithm>
#include <cmath>

namespace ufcsim {

void validate(const ArrivalProfile& profile) {
    if (profile.counts.size() == 0) {
        throw ValidationError("arrival profile is empty");
    }
    if (profile.counts.size() % kSimSlotsPerDay != 0) {
        throw ValidationError("arrival horizon is not a whole number of days: " +
                              std::to_string(profile.counts.size()) + " slots");
    }
    for (Eigen::Index i = 0; i < profile.counts.size(); ++i) {
        if (!(profile.counts[i] >= 0.0)) {
            throw ValidationError("negative arrival count " + format_double(profile.counts[i]) +
                                  " at slot " + std::to_string(i));
        }
    }
}

static ArrivalProfile from_hourly(const std::vector<double>& hourly, const std::string& label) {
    ArrivalProfile p;
    p.counts = Eigen::ArrayXd::Zero(kSimSlotsPerWeek);
    p.label = label;
    for (int day = 0; day < 7; ++day) {
        for (int hour = 0; hour < 24; ++hour) {
            double per_slot = hourly[hour] / kSimSlotsPerHour;
            int base = day * kSimSlotsPerDay + hour * kSimSlotsPerHour;
            for (int s = 0; s < kSimSlotsPerHour; ++s) {
                p.counts[base + s] = per_slot;
            }
        }
    }
    return p;
}

ArrivalProfile load_arrivals(const std::string& path) {
    CsvTable table = read_csv(path);
    if (table.header.size() != 2) {
        throw ParseError(path + ": expected two columns, got " +
                         std::to_string(table.header.size()));
    }
    const std::string& key = table.header[0];
    bool hourly = (key == "hour");
    bool by_slot = (key == "slot");
    if (!hourly && !by_slot) {
        throw ParseError(path + ": first column must be 'slot' or 'hour', got '" + key + "'");
    }
    if (table.header[1] != "count") {
        throw ParseError(path + ": second column must be 'count', got '" + table.header[1] + "'");
    }

    size_t expected = hourly ? 24u : 0u;
    if (hourly && table.rows.size() != expected) {
        throw ParseError(path + ": hourly input needs 24 rows, got " +
                         std::to_string(table.rows.size()));
    }

    std::vector<double> values;
    values.reserve(table.rows.size());
    long next_index = 0;
    for (const auto& row : table.rows) {
        if (row.fields.size() != 2) {
            throw ParseError(path + ":" + std::to_string(row.line) + ": expected 2 fields, got " +
                             std::to_string(row.fields.size()));
        }
        double idx = parse_double_field(row.fields[0], path, row.line);
        if (idx != static_cast<double>(next_index)) {
            throw ParseError(path + ":" + std::to_string(row.line) + ": expected index " +
                             std::to_string(next_index) + ", got '" + row.fields[0] + "'");
        }
        double count = parse_double_field(row.fields[1], path, row.line);
        if (count < 0.0) {
            throw ValidationError(path + ":" + std::to_string(row.line) +
                                  ": negative arrival count " + row.fields[1]);
        }
        values.push_back(count);
        ++next_index;
    }

    ArrivalProfile p;
    if (hourly) {
        p = from_hourly(values, path);
    } else {
        p.counts = Eigen::Map<const Eigen::ArrayXd>(values.data(),
                                                    static_cast<Eigen::Index>(values.size()));
        p.label = path;
    }
    validate(p);
    return p;
}

ArrivalProfile apply_corrections(const ArrivalProfile& profile, double region_share,
                                 double growth_factor) {
    if (!(region_share > 0.0) || region_share > 1.0) {
        throw ValidationError("region_share must be in (0,1], got " + format_double(region_share));
    }
    if (!(growth_factor > 0.0)) {
        throw ValidationError("growth_factor must be positive, got " +
                              format_double(growth_factor));
    }
    ArrivalProfile out;
    out.counts = profile.counts * (region_share * growth_factor);
    out.label = profile.label;
    return out;
}

ArrivalProfile synthetic_bimodal_profile(double total_daily_arrivals, double morning_peak_hour,
                                         double evening_peak_hour, double spread_hours) {
    if (total_daily_arrivals < 0.0) {
        throw ValidationError("total_daily_arrivals must be nonnegative");
    }
    auto peak_ok = [](double h) { return h >= 0.0 && h < 24.0; };
    if (!peak_ok(morning_peak_hour) || !peak_ok(evening_peak_hour)) {
        throw ValidationError("peak hours must lie in [0,24)");
    }
    if (!(spread_hours > 0.0)) {
        throw ValidationError("spread must be positive");
    }

    Eigen::ArrayXd day(kSimSlotsPerDay);
    for (int s = 0; s < kSimSlotsPerDay; ++s) {
        // Sample at the slot start, so a peak on a slot boundary maximizes
        // the slot that begins there.
        double hour = static_cast<double>(s) * kSimSlotMinutes / 60.0;
        double value = 0.0;
        // Wrap each bump around midnight so the daily shape is periodic.
        for (double peak : {morning_peak_hour, evening_peak_hour}) {
            for (int k = -1; k <= 1; ++k) {
                double d = hour - peak + 24.0 * k;
                value += std::exp(-0.5 * (d / spread_hours) * (d / spread_hours));
            }
        }
        day[s] = value;
    }
    double sum = day.sum();
    if (total_daily_arrivals == 0.0) {
        day.setZero();
    } else {
        day *= total_daily_arrivals / sum;
    }

    ArrivalProfile p;
    p.counts = day.replicate(7, 1);
    p.label = "synthetic-bimodal";
    validate(p);
    return p;
}

} // namespace ufcsim
