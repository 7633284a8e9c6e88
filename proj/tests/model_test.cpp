#include <doctest.h>

#include "pimorch/errors.hpp"
#include "pimorch/model.hpp"
#include "support.hpp"

using namespace pimorch;

TEST_SUITE("model") {

TEST_CASE("branch counts follow ceil(res / R)^2") {
    auto m = testing::swin_like(640, 128, {2, 2, 18, 2});
    auto st = derive_stages(m);
    REQUIRE(st.size() == 4);
    CHECK(st[2].res_h == 40);
    CHECK(st[2].branches == 36);
    CHECK(st[0].branches == 529);
    CHECK(st[1].branches == 144);
    CHECK(st[3].branches == 9);

    auto small = derive_stages(testing::swin_like(224, 96, {2, 2, 6, 2}));
    CHECK(small[0].res_h == 56);
    CHECK(small[0].branches == 64);
    CHECK_FALSE(small[0].padded());
}

TEST_CASE("channels and heads double per stage") {
    auto st = derive_stages(testing::swin_like(224, 96, {2, 2, 6, 2}));
    for (std::size_t i = 0; i < st.size(); ++i) {
        CHECK(st[i].channels == 96 << i);
        CHECK(st[i].heads == (96 << i) / 32);
        CHECK(st[i].region_patches == 49);
    }
}

TEST_CASE("padding counts patches added by the ceiling") {
    auto st = derive_stages(testing::swin_like(640, 128, {1, 1, 1, 1}));
    // 160 patches per side, 23 regions of 7 cover 161
    CHECK(st[0].padded_patches == 529 * 49 - 160 * 160);
    CHECK(st[0].padded());
}

TEST_CASE("block weights are (4 + 2 a1) C^2") {
    auto m = testing::swin_like(224, 96, {1, 1});
    auto st = derive_stages(m);
    CHECK(block_weight_elements(m, st[0]) == 12 * 96 * 96);
    CHECK(patch_merge_weight_elements(m, st[0]) == 0);
    CHECK(patch_merge_weight_elements(m, st[1]) == 2 * 192 * 192);
}

TEST_CASE("document round trip") {
    for (const auto& name : testing::fixture_names()) {
        auto m = testing::fixture_model(name);
        CHECK(load_model(dump_model(m)) == m);
    }
}

TEST_CASE("rejects malformed and invalid documents") {
    CHECK_THROWS_AS(load_model("{not json"), ParseError);
    CHECK_THROWS_AS(load_model("[]"), ParseError);

    auto m = testing::swin_like(224, 96, {2});
    std::string ok = dump_model(m);
    CHECK_NOTHROW(load_model(ok));

    auto bad = m;
    bad.embed_dim = 100;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = m;
    bad.input_h = 226;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = m;
    bad.stages.clear();
    CHECK_THROWS_AS(validate(bad), ValidationError);

    std::string unknown = ok;
    unknown.insert(1, "\"colour\": 3,");
    CHECK_THROWS(load_model(unknown));

    CHECK_THROWS_AS(parse_interaction_pattern("spiral"), ConfigError);
}

TEST_CASE("stage resolution must stay divisible") {
    // 224 / 4 = 56, 56 / 8 = 7: a fifth stage would need 56 / 16
    auto m = testing::swin_like(224, 96, {1, 1, 1, 1, 1});
    CHECK_THROWS_AS(validate(m), ValidationError);
}

}
