#include "ufcsim/stations.hpp"
#include "ufcsim/errors.hpp"

#include "test_util.hpp"

#include <doctest.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <random>
#include <thread>

using namespace ufcsim;

namespace {

const std::string kDataDir = UFCSIM_DATA_DIR;

} // namespace

TEST_CASE("well-formed records parse straight through") {
    Inventory inventory = parse_inventory(
        R"([{"ID":"a","PowerKW":3,"NumberOfPoints":1},
            {"ID":"b","PowerKW":3,"NumberOfPoints":2},
            {"ID":"c","PowerKW":50,"NumberOfPoints":1}])",
        "inline");
    CHECK(inventory.records.size() == 3);
    CHECK(inventory.skipped == 0);
}

TEST_CASE("an empty payload is an empty-inventory error") {
    CHECK_THROWS_AS(parse_inventory("[]", "inline"), ValidationError);
}

TEST_CASE("records without a usable rating are skipped and counted") {
    Inventory inventory = parse_inventory(
        R"([{"ID":"ok","PowerKW":7.2},
            {"ID":"missing"},
            {"ID":"null","PowerKW":null},
            {"ID":"zero","PowerKW":0}])",
        "inline");
    CHECK(inventory.records.size() == 1);
    CHECK(inventory.skipped == 3);
    REQUIRE(inventory.skip_reasons.size() == 3);
    CHECK(inventory.skip_reasons[0] == "missing: missing PowerKW");
}

TEST_CASE("malformed JSON is a parse error") {
    CHECK_THROWS_AS(parse_inventory("{oops", "inline"), ParseError);
    CHECK_THROWS_AS(parse_inventory("{\"a\":1}", "inline"), ParseError);
}

TEST_CASE("custom field mappings select other keys") {
    InventoryFieldMapping mapping;
    mapping.rating_field = "kw";
    mapping.plug_count_field = "plugs";
    mapping.id_field = "name";
    Inventory inventory =
        parse_inventory(R"([{"name":"x","kw":6.6,"plugs":4}])", "inline", mapping);
    REQUIRE(inventory.records.size() == 1);
    CHECK(inventory.records[0].rating_kw == 6.6);
    CHECK(inventory.records[0].plug_count == 4.0);
    CHECK(inventory.records[0].id == "x");
}

TEST_CASE("the shipped snapshot is dominated by 3 kW plugs") {
    Inventory inventory = fetch_inventory(kDataDir + "/stations_snapshot.json");
    CHECK(inventory.skipped == 2);
    RatingDistribution distribution = rating_distribution(inventory.records);
    CHECK(distribution.total_plugs == 100.0);
    CHECK(distribution.modal_rating_kw == 3.0);
    auto three = std::find_if(distribution.bins.begin(), distribution.bins.end(),
                              [](const RatingShare& bin) { return bin.rating_kw == 3.0; });
    REQUIRE(three != distribution.bins.end());
    CHECK(three->share == doctest::Approx(0.74).epsilon(1e-12));
}

TEST_CASE("a single record owns the whole distribution") {
    RatingDistribution distribution =
        rating_distribution({StationRecord{"only", 7.0, 3.0}});
    REQUIRE(distribution.bins.size() == 1);
    CHECK(distribution.bins[0].share == 1.0);
    CHECK(distribution.modal_rating_kw == 7.0);
}

TEST_CASE("modal ties break toward the lower rating") {
    RatingDistribution distribution = rating_distribution({
        StationRecord{"a", 7.0, 5.0},
        StationRecord{"b", 3.0, 5.0},
    });
    CHECK(distribution.modal_rating_kw == 3.0);
}

TEST_CASE("shares sum to one and ignore record order") {
    std::mt19937 rng(89);
    std::uniform_real_distribution<double> rating(1.0, 20.0);
    std::uniform_int_distribution<int> plugs(0, 9);
    std::vector<StationRecord> records;
    for (int i = 0; i < 40; ++i) {
        records.push_back(StationRecord{std::to_string(i),
                                        std::round(rating(rng)),
                                        static_cast<double>(plugs(rng))});
    }
    records[0].plug_count = 1.0; // make sure the total is positive
    RatingDistribution forward = rating_distribution(records);

    double total_share = 0.0;
    for (const auto& bin : forward.bins) {
        total_share += bin.share;
    }
    CHECK(total_share == doctest::Approx(1.0).epsilon(1e-9));

    std::shuffle(records.begin(), records.end(), rng);
    RatingDistribution shuffled = rating_distribution(records);
    REQUIRE(shuffled.bins.size() == forward.bins.size());
    for (size_t i = 0; i < forward.bins.size(); ++i) {
        CHECK(shuffled.bins[i].rating_kw == forward.bins[i].rating_kw);
        CHECK(shuffled.bins[i].plugs == forward.bins[i].plugs);
    }
    CHECK(shuffled.modal_rating_kw == forward.modal_rating_kw);
}

TEST_CASE("empty inventories cannot be summarized") {
    CHECK_THROWS_AS(rating_distribution({}), ValidationError);
}

TEST_CASE("inventories fetch over HTTP") {
    httplib::Server server;
    server.Get("/stations", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"([{"ID":"web","PowerKW":3,"NumberOfPoints":2}])", "application/json");
    });
    server.Get("/broken", [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread serving([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    Inventory inventory =
        fetch_inventory("http://127.0.0.1:" + std::to_string(port) + "/stations");
    CHECK(inventory.records.size() == 1);
    CHECK(inventory.records[0].plug_count == 2.0);

    CHECK_THROWS_AS(
        fetch_inventory("http://127.0.0.1:" + std::to_string(port) + "/broken"),
        FetchError);

    server.stop();
    serving.join();
}

TEST_CASE("unreachable hosts raise a retriable fetch error") {
    CHECK_THROWS_AS(fetch_inventory("http://127.0.0.1:9/nope"), FetchError);
}
