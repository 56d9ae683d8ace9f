#include <doctest.h>

#include "domrisk/sector.hpp"
#include "test_support.hpp"

using namespace domrisk;
using domrisk::test::make_detection;
using domrisk::test::make_set;
using domrisk::test::small_taxonomy;

TEST_CASE("sector table has the fixed 20 codes") {
    const auto& table = SectorTable::builtin();
    CHECK(table.size() == 20);
    CHECK(table.has("61"));
    CHECK(table.has("31-33"));
    CHECK_FALSE(table.has("99"));
}

TEST_CASE("encode_sector: one-hot, absent, unknown") {
    auto slots = encode_sector(std::optional<std::string>("61"));
    CHECK(slots.size() == 20);
    double sum = 0;
    for (double v : slots) sum += v;
    CHECK(sum == 1.0);
    CHECK(slots[SectorTable::builtin().index_of("61")] == 1.0);

    auto empty = encode_sector(std::nullopt);
    for (double v : empty) CHECK(v == 0.0);

    CHECK_THROWS_AS(encode_sector(std::optional<std::string>("99")), DomriskError);
}

TEST_CASE("extend_schema: appends 20 slots, re-hashes, refuses double extension") {
    auto taxonomy = small_taxonomy();
    auto schema = build_schema({make_set({make_detection("T", {}, {1})})}, taxonomy, 1);
    size_t w = schema.width();
    auto extended = extend_schema(schema);
    CHECK(extended.width() == w + 20);
    CHECK(extended.schema_hash != schema.schema_hash);
    CHECK(extended.slot_name(extended.sector_offset()) == "sector:11");
    CHECK_THROWS_AS(extend_schema(extended), DomriskError);
}

TEST_CASE("extend then vectorize with absent sector preserves the technology sub-vector") {
    auto taxonomy = small_taxonomy();
    auto detections = make_set({make_detection("T", {"1.5"}, {1})});
    auto schema = build_schema({detections}, taxonomy, 1);
    auto extended = extend_schema(schema);

    auto base_vec = vectorize(detections, schema);
    auto ext_vec = vectorize(detections, extended);
    apply_sector(ext_vec, extended, std::nullopt);

    REQUIRE(ext_vec.values.size() == base_vec.values.size() + 20);
    for (size_t i = 0; i < base_vec.values.size(); ++i)
        CHECK(ext_vec.values[i] == base_vec.values[i]);
    for (size_t i = 0; i < 20; ++i) CHECK(ext_vec.values[extended.sector_offset() + i] == 0.0);
}

TEST_CASE("sector table csv round-trip") {
    std::string path = "/tmp/domrisk_sectors_test.csv";
    SectorTable::builtin().save_csv(path);
    auto loaded = SectorTable::from_csv(path);
    REQUIRE(loaded.size() == 20);
    for (size_t i = 0; i < 20; ++i) {
        CHECK(loaded.codes()[i].code == SectorTable::builtin().codes()[i].code);
        CHECK(loaded.codes()[i].label == SectorTable::builtin().codes()[i].label);
    }
}
