#include <string>

#include "doctest.h"
#include "qplas/errors.hpp"
#include "qplas/estimation/dataset.hpp"

using namespace qplas;
using namespace qplas::estimation;

namespace {

ExperimentDataset small() {
    ExperimentDataset ds;
    ds.label = "c1";
    ds.L0 = 4.5e-5;
    ds.time_s = {-6, 0, 6, 12};
    ds.samples = {{0.06, 0.0533333333333333}, {0.06, 0.0666666666666667}, {0.08, 0.0733333333333}, {0.1, 0.1}};
    return ds;
}

}  // namespace

TEST_CASE("dataset CSV round trip is lossless") {
    const auto ds = small();
    const auto text = format_dataset_csv(ds);
    CHECK(text.rfind("time_s,set_index,T_i,L0_M\n", 0) == 0);
    const auto back = parse_dataset_csv(text, "mem");
    CHECK(back.time_s == ds.time_s);
    CHECK(back.samples == ds.samples);
    REQUIRE(back.L0);
    CHECK(*back.L0 == *ds.L0);
    CHECK(format_dataset_csv(back) == text);

    auto bare = ds;
    bare.L0.reset();
    const auto bare_back = parse_dataset_csv(format_dataset_csv(bare), "mem");
    CHECK_FALSE(bare_back.L0);
}

TEST_CASE("parse errors carry the line number") {
    const std::string bad = "time_s,set_index,T_i\n0,0,0.1\n0,1,abc\n";
    try {
        parse_dataset_csv(bad, "bad.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("bad.csv") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_dataset_csv("time_s,T_i\n0,0.1\n", "x"), ParseError);
    CHECK_THROWS_AS(parse_dataset_csv("time_s,set_index,T_i\n6,0,0.1\n0,0,0.1\n", "x"), ParseError);
    CHECK_THROWS_AS(parse_dataset_csv("time_s,set_index,T_i\n0,0,-0.1\n", "x"), ParseError);
    CHECK_THROWS_AS(parse_dataset_csv("time_s,set_index,T_i,L0_M\n0,0,0.1,1e-5\n6,0,0.1,2e-5\n", "x"), ParseError);
    CHECK_THROWS_AS(parse_dataset_csv("time_s,set_index,T_i\n0,0,0.1\n6,0,0.1\n7,0,0.1\n", "x"), ParseError);
    CHECK_THROWS_AS(parse_dataset_csv("time_s,set_index,T_i\n0,0\n", "x"), ParseError);
}

TEST_CASE("mean sensorgram and baseline") {
    const auto ds = small();
    const auto s = ds.mean_sensorgram();
    CHECK(s.T_mean[3] == doctest::Approx(0.1));
    CHECK(s.T_std[3] == 0.0);
    CHECK(baseline_transmission(ds) == doctest::Approx((0.06 + 0.0533333333333333) / 2));

    auto no_pre = ds;
    no_pre.time_s = {0, 6, 12, 18};
    CHECK(baseline_transmission(no_pre) == doctest::Approx((0.06 + 0.0533333333333333) / 2));
}

TEST_CASE("validation") {
    auto ds = small();
    CHECK_NOTHROW(ds.validate());
    ds.time_s[2] = 7;
    CHECK_THROWS_AS(ds.validate(), DomainError);
    ds = small();
    ds.samples[1].clear();
    CHECK_THROWS_AS(ds.validate(), DomainError);
}

TEST_CASE("alignment shifts time and baseline") {
    auto ds = small();
    ds.time_s = {4, 10, 16, 22};
    const auto a = align_dataset(ds, 10.0, 0.06);
    CHECK(a.dataset.time_s == std::vector<double>{-6, 0, 6, 12});
    CHECK(a.offsets.time_shift_s == 10.0);
    CHECK(baseline_transmission(a.dataset) == doctest::Approx(0.06).epsilon(1e-14));
    CHECK(a.offsets.T_shift == doctest::Approx(0.06 - (0.06 + 0.0533333333333333) / 2));

    const auto b = align_dataset(ds, 4.0, std::nullopt);
    CHECK(b.dataset.samples == ds.samples);
    CHECK_THROWS_AS(align_dataset(ds, 10.0, -1.0), DomainError);
}
