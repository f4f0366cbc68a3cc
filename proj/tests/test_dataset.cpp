#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "elevleak/dataset.hpp"
#include "elevleak/errors.hpp"

using namespace elevleak;

namespace {

LabeledDataset sample_dataset() {
    LabeledDataset ds;
    Sample a;
    a.id = "a-1";
    a.profile.elevations_m = {12.3456789, -3.25, 1e6 / 3.0};
    a.profile.sample_spacing = 10.0;
    a.city_label = "metropolis";
    a.borough_label = "old-town";
    a.provenance = "mined";
    ds.samples.push_back(a);

    Sample b;
    b.id = "b-2";
    b.profile.elevations_m = {0.0, 5.0};
    b.city_label = "metropolis";
    b.region_label = "region-0";
    b.provenance = "simulated-overlap";
    b.source_id = "a-1";
    ds.samples.push_back(b);
    return ds;
}

} // namespace

TEST_CASE("jsonl round-trips ids, labels, provenance and source links") {
    const auto ds = sample_dataset();
    const auto text = to_jsonl(ds);
    const auto back = from_jsonl(text);
    REQUIRE(back.samples.size() == 2);
    CHECK(back.samples[0].id == "a-1");
    CHECK(back.samples[0].city_label == "metropolis");
    CHECK(back.samples[0].borough_label == "old-town");
    CHECK(back.samples[0].region_label.empty());
    CHECK(back.samples[0].provenance == "mined");
    REQUIRE(back.samples[0].profile.sample_spacing.has_value());
    CHECK(*back.samples[0].profile.sample_spacing == 10.0);
    CHECK(back.samples[1].source_id == "a-1");
    CHECK(!back.samples[1].profile.sample_spacing.has_value());

    // 6 significant digits survive the round-trip at that precision
    CHECK(back.samples[0].profile.elevations_m[0] == doctest::Approx(12.3457).epsilon(1e-6));
    CHECK(back.samples[0].profile.elevations_m[1] == -3.25);
    CHECK(back.samples[0].profile.elevations_m[2] == doctest::Approx(333333.0).epsilon(1e-6));

    // serialization is idempotent once precision has been applied
    CHECK(to_jsonl(back) == text);
}

TEST_CASE("from_jsonl rejects duplicates, short profiles and garbage") {
    auto ds = sample_dataset();
    ds.samples[1].id = "a-1";
    CHECK_THROWS_AS(from_jsonl(to_jsonl(ds)), DataError);
    CHECK_THROWS_AS(from_jsonl("not json\n"), DataError);
    CHECK_THROWS_AS(
        from_jsonl(R"({"id":"x","labels":{"city":"c"},"elevations":[1.0],"provenance":"raw"})"),
        DataError);
}

TEST_CASE("label helpers expose levels, names and integer labels") {
    const auto ds = sample_dataset();
    CHECK(ds.has_level(LabelLevel::city));
    CHECK(!ds.has_level(LabelLevel::borough));
    CHECK(!ds.has_level(LabelLevel::region));

    const auto names = ds.label_names(LabelLevel::city);
    CHECK(names == std::vector<std::string>{"metropolis"});
    const auto labels = ds.int_labels(LabelLevel::city, names);
    CHECK(labels == std::vector<int>{0, 0});
    CHECK_THROWS_AS(ds.int_labels(LabelLevel::region, {"region-1"}), MissingLabelLevel);
}

TEST_CASE("content hash is deterministic and input-sensitive") {
    const auto ds = sample_dataset();
    const auto h1 = dataset_hash(ds);
    const auto h2 = dataset_hash(ds);
    CHECK(h1 == h2);
    CHECK(h1.size() == 16);

    auto altered = ds;
    altered.samples[0].profile.elevations_m[0] += 1.0;
    CHECK(dataset_hash(altered) != h1);

    CHECK(content_hash("") == content_hash(""));
    CHECK(content_hash("a") != content_hash("b"));
}
