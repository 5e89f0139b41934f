#include "ufcsim/stations.hpp"

#include "ufcsim/errors.hpp"
#include "ufcsim/io_util.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <map>

namespace ufcsim {

namespace {

bool has_scheme(const std::string& source, const char* scheme) {
    return source.rfind(scheme, 0) == 0;
}

std::string http_get(const std::string& url, const std::string& api_key) {
    auto path_start = url.find('/', url.find("//") + 2);
    std::string host = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(host);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    httplib::Headers headers;
    if (!api_key.empty()) {
        headers.emplace("X-API-Key", api_key);
    }
    auto response = client.Get(path, headers);
    if (!response) {
        throw FetchError("fetch failed for " + url + " (" + httplib::to_string(response.error()) +
                         "); retriable");
    }
    if (response->status != 200) {
        throw FetchError("fetch failed for " + url + " (HTTP " +
                         std::to_string(response->status) + "); retriable");
    }
    return response->body;
}

} // namespace

Inventory parse_inventory(const std::string& json_text, const std::string& source_name,
                          const InventoryFieldMapping& mapping) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(source_name + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw ParseError(source_name + ": inventory payload must be a JSON array");
    }

    Inventory inventory;
    int index = 0;
    for (const auto& item : doc) {
        ++index;
        std::string label = "record " + std::to_string(index);
        if (!item.is_object()) {
            ++inventory.skipped;
            inventory.skip_reasons.push_back(label + ": not an object");
            continue;
        }
        if (item.contains(mapping.id_field)) {
            const auto& id = item.at(mapping.id_field);
            label = id.is_string() ? id.get<std::string>() : id.dump();
        }
        if (!item.contains(mapping.rating_field) || item.at(mapping.rating_field).is_null()) {
            ++inventory.skipped;
            inventory.skip_reasons.push_back(label + ": missing " + mapping.rating_field);
            continue;
        }
        double rating = 0.0;
        try {
            rating = item.at(mapping.rating_field).get<double>();
        } catch (const nlohmann::json::exception&) {
            ++inventory.skipped;
            inventory.skip_reasons.push_back(label + ": non-numeric " + mapping.rating_field);
            continue;
        }
        if (!(rating > 0.0)) {
            ++inventory.skipped;
            inventory.skip_reasons.push_back(label + ": non-positive rating");
            continue;
        }
        double plugs = 1.0;
        if (item.contains(mapping.plug_count_field) &&
            !item.at(mapping.plug_count_field).is_null()) {
            try {
                plugs = item.at(mapping.plug_count_field).get<double>();
            } catch (const nlohmann::json::exception&) {
                ++inventory.skipped;
                inventory.skip_reasons.push_back(label + ": non-numeric " +
                                                 mapping.plug_count_field);
                continue;
            }
        }
        if (plugs < 0.0) {
            ++inventory.skipped;
            inventory.skip_reasons.push_back(label + ": negative plug count");
            continue;
        }
        inventory.records.push_back(StationRecord{label, rating, plugs});
    }

    if (inventory.records.empty()) {
        throw ValidationError(source_name + ": no usable station records (skipped " +
                              std::to_string(inventory.skipped) + ")");
    }
    return inventory;
}

Inventory fetch_inventory(const std::string& source, const InventoryFieldMapping& mapping,
                          const std::string& api_key) {
    std::string payload;
    if (has_scheme(source, "http://") || has_scheme(source, "https://")) {
        payload = http_get(source, api_key);
    } else {
        payload = slurp_file(source);
    }
    return parse_inventory(payload, source, mapping);
}

RatingDistribution rating_distribution(const std::vector<StationRecord>& records) {
    if (records.empty()) {
        throw ValidationError("rating distribution of an empty inventory");
    }
    std::map<double, double> plugs_by_rating;
    double total = 0.0;
    for (const auto& record : records) {
        plugs_by_rating[record.rating_kw] += record.plug_count;
        total += record.plug_count;
    }
    if (total <= 0.0) {
        throw ValidationError("inventory has no plugs");
    }

    RatingDistribution distribution;
    distribution.total_plugs = total;
    double best_share = -1.0;
    for (const auto& [rating, plugs] : plugs_by_rating) {
        RatingShare bin{rating, plugs, plugs / total};
        distribution.bins.push_back(bin);
        // Strict > keeps the lowest rating on ties (map iterates ascending).
        if (bin.share > best_share) {
            best_share = bin.share;
            distribution.modal_rating_kw = rating;
        }
    }
    return distribution;
}

} // namespace ufcsim
