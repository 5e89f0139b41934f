#pragma once

#include <map>
#include <string>
#include <vector>

namespace ufcsim {

/// One charging location from an inventory payload.
struct StationRecord {
    std::string id;
    double rating_kw = 0.0;
    double plug_count = 1.0;
};

/// Field names used to pull records out of the JSON payload; defaults match
/// OpenChargeMap-style exports.
struct InventoryFieldMapping {
    std::string rating_field = "PowerKW";
    std::string plug_count_field = "NumberOfPoints";
    std::string id_field = "ID";
};

/// Validated records plus how many payload entries were dropped and why.
struct Inventory {
    std::vector<StationRecord> records;
    int skipped = 0;
    std::vector<std::string> skip_reasons;
};

/// Parses a JSON array payload. Entries without a usable rating are dropped
/// and counted; an inventory with no usable record at all is an error.
Inventory parse_inventory(const std::string& json_text, const std::string& source_name,
                          const InventoryFieldMapping& mapping = {});

/// Loads from a local file, or an http(s) URL when `source` starts with a
/// scheme. `api_key`, when non-empty, is sent as the X-API-Key header.
Inventory fetch_inventory(const std::string& source, const InventoryFieldMapping& mapping = {},
                          const std::string& api_key = {});

struct RatingShare {
    double rating_kw = 0.0;
    double plugs = 0.0;
    double share = 0.0;
};

/// Plug-weighted histogram over power ratings. Shares sum to one; the modal
/// rating is the one with the largest share, ties broken toward the lower
/// rating.
struct RatingDistribution {
    std::vector<RatingShare> bins; // ascending by rating
    double modal_rating_kw = 0.0;
    double total_plugs = 0.0;
};

RatingDistribution rating_distribution(const std::vector<StationRecord>& records);

} // namespace ufcsim
