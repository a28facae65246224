#include <gtest/gtest.h>

#include "beyond/content.hpp"
#include "support.hpp"

using namespace beyond;
using beyond::test::content;
using nlohmann::json;

namespace {

json pack_json() { return read_json_file(beyond::test::kContentDir + "/content_pack.json"); }

}  // namespace

TEST(Content, ShippedPackIsClean) {
  EXPECT_TRUE(content_problems(pack_json()).empty());
  EXPECT_EQ(content().materials.size(), 14u);
  EXPECT_GE(content().climate.locations.size(), 3u);
  EXPECT_TRUE(content().climate.contains("Graz"));
  EXPECT_TRUE(content().gadget_pass.count("default"));
}

TEST(Content, CatalogInvariants) {
  for (const auto& m : content().materials) {
    EXPECT_GT(m.conductivity, 0) << m.id;
    EXPECT_GE(m.vapor_resistance, 1) << m.id;
    EXPECT_GE(m.unit_cost, 0) << m.id;
    EXPECT_LT(m.min_thickness, m.max_thickness) << m.id;
    EXPECT_EQ(m.category == Category::Structural, m.structural_system.has_value()) << m.id;
  }
}

TEST(Content, EveryProblemIsReported) {
  json j = pack_json();
  j["materials"][0]["conductivity"] = -1;
  j["materials"][1]["id"] = j["materials"][2]["id"];
  j["room"]["volume"] = 0;
  j["climate"]["locations"][0]["temperature"].erase(0);
  const auto problems = content_problems(j);
  EXPECT_EQ(problems.size(), 4u);
  EXPECT_THROW(parse_content(j), Error);
}

TEST(Content, InterstitialScope) {
  EXPECT_EQ(content().rules.mold_interstitial, PhysicsRules::Interstitial::WarmSide);
  json j = pack_json();
  j["rules"]["mold_f_rsi"]["interstitial"] = "all";
  EXPECT_EQ(parse_content(j).rules.mold_interstitial, PhysicsRules::Interstitial::AllInterfaces);
  j["rules"]["mold_f_rsi"].erase("interstitial");
  EXPECT_EQ(parse_content(j).rules.mold_interstitial, PhysicsRules::Interstitial::WarmSide);
  j["rules"]["mold_f_rsi"]["interstitial"] = "outside";
  EXPECT_THROW(parse_content(j), Error);
}

TEST(Content, HashIgnoresFormatting) {
  const json j = pack_json();
  EXPECT_EQ(parse_content(json::parse(j.dump())).hash, parse_content(json::parse(j.dump(4))).hash);
  json k = j;
  k["room"]["volume"] = 61;
  EXPECT_NE(parse_content(k).hash, parse_content(j).hash);
}

TEST(Content, UnknownMaterial) {
  try {
    content().material("unobtainium");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownEntity);
    EXPECT_EQ(e.name(), "UnknownEntity");
  }
}

TEST(Content, WallJson) {
  const json j = {{"system", "Masonry"},
                  {"layers", {{{"material", "clay_brick"}, {"thickness", 0.25}}, {{"material", "eps"}, {"thickness", 0.1}}}}};
  const WallConstruction w = wall_from_json(j, content());
  ASSERT_EQ(w.layers.size(), 2u);
  EXPECT_EQ(w.layers[1].material.id, "eps");
  EXPECT_EQ(wall_from_json(to_json(w), content()).layers[0].thickness, 0.25);
}

TEST(Content, GadgetReportRoundTrip) {
  GadgetReport r = wall_gadgets(beyond::test::reference_wall(), {});
  r.energy = EnergyResult{1.5, 2.5, 4.0, Rating::APlus};
  const GadgetReport back = gadget_report_from_json(to_json(r));
  EXPECT_EQ(to_json(back), to_json(r));
}

TEST(Content, PassProfile) {
  GadgetReport r = wall_gadgets(beyond::test::reference_wall(), {});
  r.energy = EnergyResult{10, 50, 60, Rating::C};
  const GadgetPass& pass = content().pass_profile("default");
  EXPECT_TRUE(failing_gadgets(r, pass).empty());
  r.energy->rating = Rating::D;
  r.mold = MoldLevel::Moderate;
  EXPECT_EQ(failing_gadgets(r, pass), (std::vector<std::string>{"mold", "energy"}));
  r.energy.reset();
  const auto failing = failing_gadgets(r, pass);
  EXPECT_NE(std::find(failing.begin(), failing.end(), "energy"), failing.end());
}
