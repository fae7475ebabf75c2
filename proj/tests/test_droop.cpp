#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ewhflex/droop.hpp"
#include "ewhflex/rng.hpp"

using namespace ewhflex;

namespace {
const DroopBand band_60_599{60.0, 59.9, 60.0};
}

TEST_CASE("threshold assignment") {
  SECTION("equal powers spread thresholds evenly") {
    const auto a = assign_thresholds({{1, 4.5}, {2, 4.5}}, band_60_599);
    REQUIRE(a.thresholds_hz.size() == 2);
    CHECK(a.thresholds_hz[0] == Catch::Approx(59.95).margin(1e-12));
    CHECK(a.thresholds_hz[1] == Catch::Approx(59.90).margin(1e-12));
    CHECK(a.total_on_power_kw == Catch::Approx(9.0));
  }
  SECTION("a single device gets the band bottom") {
    const auto a = assign_thresholds({{7, 3.3}}, band_60_599);
    REQUIRE(a.thresholds_hz.size() == 1);
    CHECK(a.thresholds_hz[0] == Catch::Approx(59.90).margin(1e-12));
  }
  SECTION("unequal powers follow the cumulative-share formula") {
    const auto a = assign_thresholds({{1, 3.0}, {2, 6.0}}, band_60_599);
    CHECK(a.thresholds_hz[0] == Catch::Approx(60.0 - 0.1 / 3.0).margin(1e-12));
    CHECK(a.thresholds_hz[1] == Catch::Approx(59.90).margin(1e-12));
  }
  SECTION("devices are ordered by ascending id regardless of input order") {
    const auto a = assign_thresholds({{9, 1.0}, {2, 2.0}, {5, 3.0}}, band_60_599);
    CHECK(a.ordered_devices[0].id == 2);
    CHECK(a.ordered_devices[1].id == 5);
    CHECK(a.ordered_devices[2].id == 9);
  }
  SECTION("empty on-set and nonpositive powers rejected") {
    CHECK_THROWS_AS(assign_thresholds({}, band_60_599), ValidationError);
    CHECK_THROWS_AS(assign_thresholds({{1, 0.0}}, band_60_599), ValidationError);
  }
  SECTION("band must be ordered") {
    CHECK_THROWS_AS(assign_thresholds({{1, 1.0}}, DroopBand{59.9, 60.0, 60.0}),
                    ValidationError);
  }
}

TEST_CASE("response policy is inclusive and prefix-shaped") {
  const auto a = assign_thresholds({{1, 4.5}, {2, 4.5}}, band_60_599);

  CHECK(respond_to_frequency(a, 59.93) == std::vector<int>{1});
  CHECK(respond_to_frequency(a, 60.05).empty());
  CHECK(respond_to_frequency(a, 59.85) == std::vector<int>{1, 2});
  // inclusive comparison at an exact threshold
  CHECK(respond_to_frequency(a, 59.95) == std::vector<int>{1});
}

TEST_CASE("post-event power") {
  const auto a = assign_thresholds({{1, 4.5}, {2, 4.5}}, band_60_599);

  CHECK(post_event_power(a, 59.93) == Catch::Approx(4.5).margin(1e-12));
  CHECK(post_event_power(a, 60.02) == Catch::Approx(9.0).margin(1e-12));
  CHECK(post_event_power(a, 59.90) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("target droop curve") {
  SECTION("endpoints and interior") {
    CHECK(target_droop_power(band_60_599, 60.0, 9.0, 9.0) == Catch::Approx(9.0));
    CHECK(target_droop_power(band_60_599, 59.9, 9.0, 9.0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(target_droop_power(band_60_599, 59.93, 9.0, 9.0) == Catch::Approx(2.7).margin(1e-12));
  }
  SECTION("clamped outside the band") {
    CHECK(target_droop_power(band_60_599, 60.5, 9.0, 9.0) == Catch::Approx(9.0));
    CHECK(target_droop_power(band_60_599, 59.0, 9.0, 9.0) == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("partial commitment scales the reduction only") {
    CHECK(target_droop_power(band_60_599, 59.9, 4.0, 9.0) == Catch::Approx(5.0));
  }
  SECTION("committed above baseline rejected") {
    CHECK_THROWS_AS(target_droop_power(band_60_599, 59.95, 10.0, 9.0), ValidationError);
  }
}

TEST_CASE("droop properties over random ensembles") {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 40);
    std::vector<OnDevice> on;
    double max_power = 0.0;
    for (int i = 0; i < n; ++i) {
      const double power = uniform_in(rng, 0.5, 8.0);
      on.push_back({i, power});
      max_power = std::max(max_power, power);
    }
    const auto a = assign_thresholds(on, band_60_599);

    // strictly decreasing thresholds inside the band
    CHECK(a.thresholds_hz.front() <= band_60_599.omega_u_hz + 1e-12);
    CHECK(a.thresholds_hz.back() >= band_60_599.omega_l_hz - 1e-12);
    for (std::size_t i = 1; i < a.thresholds_hz.size(); ++i)
      CHECK(a.thresholds_hz[i] < a.thresholds_hz[i - 1]);

    const double omega = uniform_in(rng, 59.88, 60.02);
    const double post = post_event_power(a, omega);
    const double target =
        target_droop_power(band_60_599, omega, a.total_on_power_kw, a.total_on_power_kw);

    // staircase deviates from the smooth curve by at most one device
    CHECK(std::abs(post - target) <= max_power + 1e-9);

    // conservation: shed + remaining = total
    double shed = 0.0;
    const auto ids = respond_to_frequency(a, omega);
    for (const int id : ids) shed += on[static_cast<std::size_t>(id)].power_kw;
    CHECK(shed + post == Catch::Approx(a.total_on_power_kw).margin(1e-12));

    // monotone in frequency
    const double omega2 = omega + uniform_in(rng, 0.0, 0.05);
    CHECK(post_event_power(a, omega2) >= post - 1e-12);
  }
}
