#include <gtest/gtest.h>

#include <sstream>

#include "beyond/climate.hpp"
#include "support.hpp"

using namespace beyond;
using beyond::test::content;

namespace {

EnergyResult run(const SimulationParams& p) { return annual_energy(p, content().room, content().climate); }

SimulationParams params(std::string loc, Orientation o, double wall_u, double window_u, double shgc, double sp_h,
                        double sp_c, bool shades, bool cooling) {
  SimulationParams p;
  p.location = std::move(loc);
  p.orientation = o;
  p.wall_u = wall_u;
  p.window_u = window_u;
  p.shgc = shgc;
  p.setpoint_heating = sp_h;
  p.setpoint_cooling = sp_c;
  p.shades_on = shades;
  p.cooling_enabled = cooling;
  return p;
}

}  // namespace

// Frozen from tests/oracles/energy_oracle.py.
struct Golden {
  SimulationParams p;
  double heating;
  double cooling;
};

TEST(AnnualEnergy, MatchesStandaloneOracle) {
  const Golden cases[] = {
      {params("Graz", Orientation::S, 0.21, 1.1, 0.6, 21, 25, false, true), 7.634664000000006, 51.768940560000004},
      {params("Helsinki", Orientation::SE, 0.35, 2.0, 0.8, 22, 25, false, true), 57.57443999999998, 31.882501079999997},
      {params("Athens", Orientation::W, 1.5, 2.8, 0.7, 25, 27, true, true), 65.56712160000001, 23.109460799999994},
  };
  for (const auto& g : cases) {
    const EnergyResult r = run(g.p);
    EXPECT_NEAR(r.heating, g.heating, 1e-6 * g.heating) << g.p.location;
    EXPECT_NEAR(r.cooling, g.cooling, 1e-6 * g.cooling) << g.p.location;
    EXPECT_DOUBLE_EQ(r.total, r.heating + r.cooling);
    EXPECT_EQ(r.rating, energy_rating(r.total));
  }
}

TEST(AnnualEnergy, DefaultGrazIsRatedC) { EXPECT_EQ(run(SimulationParams{}).rating, Rating::C); }

TEST(AnnualEnergy, NoTransferPathsNoEnergy) {
  RoomModel room = content().room;
  room.air_change_rate = 0;
  room.internal_gains = 0;
  SimulationParams p;
  p.wall_u = 0;
  p.window_u = 0;
  p.shgc = 0;
  const EnergyResult r = annual_energy(p, room, content().climate);
  EXPECT_EQ(r.heating, 0.0);
  EXPECT_EQ(r.cooling, 0.0);
}

TEST(AnnualEnergy, CoolingOffMeansZero) {
  const Dataset d = sample_dataset(300, 3, content().climate, content().room, content().ranges);
  for (auto s : d) {
    s.params.cooling_enabled = false;
    EXPECT_EQ(run(s.params).cooling, 0.0);
  }
}

TEST(AnnualEnergy, HourDoesNotEnter) {
  SimulationParams a, b;
  a.hour = 0;
  b.hour = 17;
  EXPECT_EQ(run(a).total, run(b).total);
}

TEST(AnnualEnergy, UnknownLocation) {
  SimulationParams p;
  p.location = "Atlantis";
  EXPECT_THROW(run(p), Error);
}

TEST(Sampling, SizeAndDeterminism) {
  const auto& c = content();
  EXPECT_EQ(sample_dataset(1, 9, c.climate, c.room, c.ranges).size(), 1u);
  EXPECT_EQ(sample_dataset(12000, 7, c.climate, c.room, c.ranges).size(), 12000u);
  std::ostringstream a, b;
  write_dataset_csv(a, sample_dataset(500, 42, c.climate, c.room, c.ranges));
  write_dataset_csv(b, sample_dataset(500, 42, c.climate, c.room, c.ranges));
  EXPECT_EQ(a.str(), b.str());
  std::ostringstream other;
  write_dataset_csv(other, sample_dataset(500, 43, c.climate, c.room, c.ranges));
  EXPECT_NE(a.str(), other.str());
}

TEST(Sampling, StratifiesEveryContinuousRange) {
  const auto& c = content();
  const std::size_t n = 200;
  const Dataset d = sample_dataset(n, 5, c.climate, c.room, c.ranges);
  // Exactly one sample per stratum in each dimension.
  auto check = [&](const Range& r, auto get) {
    std::vector<int> hits(n, 0);
    for (const auto& s : d) {
      const double v = get(s.params);
      ASSERT_TRUE(r.contains(v));
      const auto k = std::min(n - 1, static_cast<std::size_t>((v - r.min) / (r.max - r.min) * n));
      ++hits[k];
    }
    for (int h : hits) EXPECT_EQ(h, 1);
  };
  check(c.ranges.setpoint_heating, [](const SimulationParams& p) { return p.setpoint_heating; });
  check(c.ranges.window_u, [](const SimulationParams& p) { return p.window_u; });
  check(c.ranges.shgc, [](const SimulationParams& p) { return p.shgc; });
  check(c.ranges.wall_u, [](const SimulationParams& p) { return p.wall_u; });
}

TEST(Sampling, LabelsAreOracleValues) {
  const auto& c = content();
  for (const auto& s : sample_dataset(50, 11, c.climate, c.room, c.ranges)) {
    const EnergyResult r = run(s.params);
    EXPECT_EQ(r.heating, s.result.heating);
    EXPECT_EQ(r.cooling, s.result.cooling);
    EXPECT_EQ(r.rating, s.result.rating);
  }
}

TEST(DatasetCsv, RoundTripIsExact) {
  const auto& c = content();
  const Dataset d = sample_dataset(100, 1, c.climate, c.room, c.ranges);
  std::stringstream ss;
  write_dataset_csv(ss, d);
  const Dataset back = read_dataset_csv(ss);
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back[i].params.wall_u, d[i].params.wall_u);
    EXPECT_EQ(back[i].params.location, d[i].params.location);
    EXPECT_EQ(back[i].params.orientation, d[i].params.orientation);
    EXPECT_EQ(back[i].result.heating, d[i].result.heating);
    EXPECT_EQ(back[i].result.rating, d[i].result.rating);
  }
}

TEST(DatasetCsv, RejectsBadHeader) {
  std::istringstream in("a,b,c\n1,2,3\n");
  EXPECT_THROW(read_dataset_csv(in), Error);
}
