#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ewhflex/device.hpp"
#include "oracles.hpp"

using namespace ewhflex;

namespace {

EwhParams nominal() { return EwhParams{}; }  // struct defaults are the midpoints

}  // namespace

TEST_CASE("thermal coefficients at the nominal midpoints") {
  const auto p = nominal();

  const auto off = thermal_coefficients(p, 0.0, false);
  CHECK(off.decay_per_hr == Catch::Approx(0.0071923473424276565).epsilon(1e-14));
  CHECK(off.forcing_f_per_hr == Catch::Approx(0.5394260506820743).epsilon(1e-14));

  const auto on = thermal_coefficients(p, 0.0, true);
  CHECK(on.decay_per_hr == off.decay_per_hr);
  CHECK(on.forcing_f_per_hr == Catch::Approx(37.36424444391168).epsilon(1e-14));

  CHECK_THROWS_AS(thermal_coefficients(p, -1.0, false), ValidationError);
}

TEST_CASE("zero-draw off-state equilibrium is the ambient temperature") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 50; ++i) {
    EwhParams p = nominal();
    p.ambient_f = uniform_in(rng, 50.0, 90.0);
    p.shell_btu_per_f_hr = uniform_in(rng, 1.0, 10.0);
    p.tank_btu_per_f = uniform_in(rng, 100.0, 900.0);
    const auto c = thermal_coefficients(p, 0.0, false);
    CHECK(c.equilibrium_f() == Catch::Approx(p.ambient_f).epsilon(1e-12));
  }
}

TEST_CASE("advance_temperature closed form") {
  const auto p = nominal();
  const auto off = thermal_coefficients(p, 0.0, false);

  SECTION("one-hour cool-down from 130 F") {
    CHECK(advance_temperature(130.0, off, 1.0) ==
          Catch::Approx(129.60584006290625).epsilon(1e-13));
  }
  SECTION("the equilibrium is a fixed point") {
    const double eq = off.equilibrium_f();
    CHECK(advance_temperature(eq, off, 7.5) == Catch::Approx(eq).margin(1e-12));
  }
  SECTION("dt = 0 is the identity") {
    CHECK(advance_temperature(123.4, off, 0.0) == 123.4);
  }
  SECTION("negative dt rejected") {
    CHECK_THROWS_AS(advance_temperature(130.0, off, -0.1), ValidationError);
  }
}

TEST_CASE("time_to_threshold event detection") {
  const auto p = nominal();
  const auto on = thermal_coefficients(p, 0.0, true);
  const auto off = thermal_coefficients(p, 0.0, false);

  SECTION("heating 120 -> 140 at nominal parameters") {
    const auto t = time_to_threshold(120.0, on, 140.0);
    REQUIRE(t.has_value());
    CHECK(*t == Catch::Approx(0.5490102559595615).epsilon(1e-13));
  }
  SECTION("already at the threshold") {
    CHECK(time_to_threshold(140.0, on, 140.0).value() == 0.0);
  }
  SECTION("cooling away from an upper threshold never arrives") {
    CHECK_FALSE(time_to_threshold(130.0, off, 140.0).has_value());
  }
  SECTION("cool-down to the band bottom takes two days") {
    const auto t = time_to_threshold(140.0, off, 120.0);
    REQUIRE(t.has_value());
    CHECK(*t == Catch::Approx(51.12722767935704).epsilon(1e-12));
  }
}

TEST_CASE("hysteresis switching rule") {
  const auto p = nominal();  // band [120, 140]

  CHECK(apply_hysteresis({141.0, true}, p).on == false);
  CHECK(apply_hysteresis({119.0, false}, p).on == true);
  CHECK(apply_hysteresis({130.0, true}, p).on == true);
  CHECK(apply_hysteresis({130.0, false}, p).on == false);
  // non-strict boundaries
  CHECK(apply_hysteresis({140.0, true}, p).on == false);
  CHECK(apply_hysteresis({120.0, false}, p).on == true);

  SECTION("idempotent for arbitrary states") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
      const EwhState s{uniform_in(rng, 60.0, 160.0), (rng() & 1) != 0};
      const auto once = apply_hysteresis(s, p);
      const auto twice = apply_hysteresis(once, p);
      CHECK(once.temp_f == twice.temp_f);
      CHECK(once.on == twice.on);
    }
  }
}

TEST_CASE("step_device resolves switch events exactly") {
  const auto p = nominal();

  SECTION("dt = 0 returns the input state") {
    const auto s = step_device({133.0, true}, p, 0.0, 0.0);
    CHECK(s.temp_f == 133.0);
    CHECK(s.on == true);
  }
  SECTION("heating run 120 -> 140 ends exactly at the band top, switched off") {
    const auto s = step_device({120.0, true}, p, 0.0, 0.5490102559595615);
    CHECK(s.temp_f == Catch::Approx(140.0).margin(1e-9));
    CHECK(s.on == false);
  }
  SECTION("on-state near the top crosses and cools") {
    const auto s = step_device({139.9, true}, p, 0.0, 0.25);
    CHECK(s.on == false);
    CHECK(s.temp_f < 140.0);
    CHECK(s.temp_f > 139.0);  // cooling is slow
  }
  SECTION("heavy draw keeps the device on below the band") {
    // on-equilibrium under 400 lb/hr sits near 98 F, so the temperature
    // falls through the band bottom while the relay stays on
    const auto s = step_device({125.0, true}, p, 400.0, 1.0);
    CHECK(s.on == true);
    CHECK(s.temp_f < p.band_low_f());
  }
}

TEST_CASE("step_device semigroup property without crossings") {
  const auto p = nominal();
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    EwhState s{uniform_in(rng, 121.0, 139.0), (rng() & 1) != 0};
    const double draw = (rng() & 1) ? 0.0 : uniform_in(rng, 0.0, 50.0);
    // budget strictly below the next crossing so no event interferes
    const auto c = thermal_coefficients(p, draw, s.on);
    const double threshold = s.on ? p.band_high_f() : p.band_low_f();
    const auto to_event = time_to_threshold(s.temp_f, c, threshold);
    double budget = 2.0;
    if (to_event.has_value()) budget = std::min(budget, 0.9 * *to_event);
    if (budget <= 0.0) continue;
    const double split = uniform_in(rng, 0.1, 0.9);

    const auto direct = step_device(s, p, draw, budget);
    const auto mid = step_device(s, p, draw, budget * split);
    const auto two = step_device(mid, p, draw, budget * (1.0 - split));
    REQUIRE(direct.on == two.on);
    CHECK(direct.temp_f == Catch::Approx(two.temp_f).margin(1e-10));
  }
}

TEST_CASE("step_device against the fine-step integrator oracle") {
  const auto p = nominal();
  struct Case {
    EwhState state;
    double draw;
  };
  const Case cases[] = {
      {{139.0, true}, 0.0},    // switches off early, then cools
      {{120.5, true}, 0.0},    // long heating run, switches near the end
      {{121.0, false}, 100.0}, // draw pulls it to the band bottom, switches on
      {{135.0, false}, 0.0},   // slow cool-down, no event
      {{125.0, true}, 400.0},  // stays on, leaves the band at the bottom
  };
  for (const Case& c : cases) {
    EwhState exact = c.state;
    EwhState fine = c.state;
    for (int chunk = 0; chunk < 10; ++chunk) {  // 1 hr in 0.1 hr pieces
      exact = step_device(exact, p, c.draw, 0.1);
      fine = oracles::integrate_fine(fine, p, c.draw, 0.1);
      REQUIRE(exact.on == fine.on);
      CHECK(exact.temp_f == Catch::Approx(fine.temp_f).margin(1e-3));
    }
  }
}

TEST_CASE("trajectories stay inside the physical envelope") {
  const auto p = nominal();
  std::mt19937_64 rng(99);
  for (int i = 0; i < 50; ++i) {
    EwhState s{uniform_in(rng, 120.0, 140.0), (rng() & 1) != 0};
    const double draw = uniform_in(rng, 0.0, 300.0);
    const double lo = std::min({s.temp_f, p.inlet_f, p.ambient_f});
    const double hi = std::max(s.temp_f, p.band_high_f());
    for (int chunk = 0; chunk < 20; ++chunk) {
      s = step_device(s, p, draw, 0.25);
      CHECK(s.temp_f >= lo - 1e-9);
      CHECK(s.temp_f <= hi + 1e-9);
    }
  }

  SECTION("zero draw confines the state to the deadband") {
    EwhState s{130.0, true};
    for (int chunk = 0; chunk < 40; ++chunk) {
      s = step_device(s, p, 0.0, 0.5);
      CHECK(s.temp_f >= p.band_low_f() - 1e-9);
      CHECK(s.temp_f <= p.band_high_f() + 1e-9);
    }
  }
}

TEST_CASE("parameter validation") {
  EwhParams p = nominal();
  p.deadband_f = 0.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = nominal();
  p.inlet_f = 125.0;  // above the band bottom
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = nominal();
  p.shell_btu_per_f_hr = -3.0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  CHECK_NOTHROW(nominal().validate());
}
