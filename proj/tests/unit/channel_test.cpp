#include <doctest.h>

#include <cmath>

#include "vcell/channel.hpp"
#include "vcell/rng.hpp"

using namespace vcell;
using namespace vcell::channel;

namespace {

struct Geometry {
  mobility::RoadConfig road;
  mobility::ApLayout aps = mobility::place_aps(mobility::ApConfig{});
  mobility::VehicleState convoy = mobility::convoy_at(120.0, 3);
};

}  // namespace

TEST_SUITE("channel") {

TEST_CASE("pathloss at and around the 1 km reference") {
  ChannelConfig cfg;
  CHECK(pathloss_db(1000.0, cfg) == doctest::Approx(128.1));
  CHECK(pathloss_db(100.0, cfg) == doctest::Approx(90.5));
  CHECK(pathloss_gain(10.0, cfg) == pathloss_gain(35.0, cfg));
  CHECK_THROWS_AS(pathloss_db(0.0, cfg), std::domain_error);
  CHECK_THROWS_AS(pathloss_db(-3.0, cfg), std::domain_error);
}

TEST_CASE("pathloss gain is non-increasing above the clamp") {
  ChannelConfig cfg;
  double prev = pathloss_gain(35.0, cfg);
  for (double d = 36.0; d < 2000.0; d += 7.3) {
    const double g = pathloss_gain(d, cfg);
    CHECK(g <= prev);
    prev = g;
  }
}

TEST_CASE("unit factors leave the fast fading untouched") {
  ComplexVector v{{0.3, -1.2}, {2.0, 0.5}};
  const auto link = compose_link(1.0, 1.0, v);
  CHECK(link.h == v);
  const auto scaled = compose_link(4.0, 9.0, v);
  for (std::size_t p = 0; p < v.size(); ++p) CHECK(std::abs(scaled.h[p] - 6.0 * v[p]) < 1e-15);
}

TEST_CASE("frozen channels are a pure function of state and seed") {
  Geometry g;
  ChannelConfig cfg;
  const auto a = draw_channel(g.convoy, g.road, g.aps, 7, 11, cfg, 0);
  const auto b = draw_channel(g.convoy, g.road, g.aps, 7, 11, cfg, 5);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(a.link(i, j).h == b.link(i, j).h);
  const auto c = draw_channel(g.convoy, g.road, g.aps, 8, 11, cfg, 0);
  CHECK(a.link(0, 0).h != c.link(0, 0).h);
  const auto d = draw_channel(g.convoy, g.road, g.aps, 7, 12, cfg, 0);
  CHECK(a.link(0, 0).h != d.link(0, 0).h);
}

TEST_CASE("stochastic channels change with the draw index") {
  Geometry g;
  ChannelConfig cfg;
  cfg.fading = FadingMode::Stochastic;
  const auto a = draw_channel(g.convoy, g.road, g.aps, 7, 11, cfg, 0);
  const auto b = draw_channel(g.convoy, g.road, g.aps, 7, 11, cfg, 1);
  const auto a2 = draw_channel(g.convoy, g.road, g.aps, 7, 11, cfg, 0);
  CHECK(a.link(1, 2).h != b.link(1, 2).h);
  CHECK(a.link(1, 2).h == a2.link(1, 2).h);
}

TEST_CASE("fast fading has unit second moment") {
  Geometry g;
  ChannelConfig cfg;
  cfg.fading = FadingMode::Stochastic;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::uint64_t draw = 0; n < 100000; ++draw) {
    const auto ch = draw_channel(g.convoy, g.road, g.aps, 3, 5, cfg, draw);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (const auto& t : ch.link(i, j).fast_fading) {
          sum += std::norm(t);
          ++n;
        }
  }
  CHECK(sum / static_cast<double>(n) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("mean channel gain matches pathloss times shadowing") {
  Geometry g;
  ChannelConfig cfg;
  cfg.fading = FadingMode::Stochastic;
  double ratio = 0.0;
  const int draws = 4000;
  for (int k = 0; k < draws; ++k) {
    const auto ch = draw_channel(g.convoy, g.road, g.aps, 1, 2, cfg, k);
    const auto& l = ch.link(0, 1);
    double p = 0.0;
    for (const auto& h : l.h) p += std::norm(h);
    ratio += p / static_cast<double>(l.h.size()) / (l.large_scale * l.shadowing);
  }
  CHECK(ratio / draws == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("stacked vector concatenates per-AP vectors") {
  Geometry g;
  const auto ch = draw_channel(g.convoy, g.road, g.aps, 0, 1, ChannelConfig{});
  const auto s = ch.stacked(2);
  REQUIRE(s.size() == 24);
  CHECK(s[8] == ch.link(2, 1).h[0]);
  CHECK(s[23] == ch.link(2, 2).h[7]);
}

TEST_CASE("coverage is a closed ball") {
  mobility::Point ap{0.0, 0.0};
  CHECK(in_coverage({100.0, 0.0}, ap, 250.0));
  CHECK(in_coverage({250.0, 0.0}, ap, 250.0));
  CHECK_FALSE(in_coverage({300.0, 0.0}, ap, 250.0));
}

TEST_CASE("coverage map of a convoy") {
  Geometry g;
  g.convoy = mobility::convoy_at(0.0, 3);
  auto cov = coverage_of(g.convoy, g.road, g.aps);
  CHECK(cov(0, 0));
  CHECK_FALSE(cov(0, 1));  // 2 m off the AP axis pushes it just past 250 m
  g.convoy = mobility::convoy_at(1.0, 3);
  cov = coverage_of(g.convoy, g.road, g.aps);
  CHECK(cov(0, 0));
  CHECK(cov(0, 1));
  CHECK_FALSE(cov(0, 2));
}

TEST_CASE("derive_seed separates streams and indices") {
  CHECK(derive_seed(1, Stream::Channel, 0) != derive_seed(1, Stream::Drop, 0));
  CHECK(derive_seed(1, Stream::Channel, 0, 1) != derive_seed(1, Stream::Channel, 1, 0));
  CHECK(derive_seed(1, Stream::Channel, 3, 4, 5) == derive_seed(1, Stream::Channel, 3, 4, 5));
}

}
