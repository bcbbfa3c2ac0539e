#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "uavirl/channel.hpp"
#include "uavirl/errors.hpp"
#include "uavirl/rng.hpp"

using namespace uavirl;
using namespace uavirl::channel;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Hand evaluations written out from the model definitions, not the library.
double oracle_fspl(double d_slant, double f, double eta) { return 20.0 * std::log10(d_slant) + 20.0 * std::log10(f) - 147.55 + eta; }

double oracle_plos(double d_h, double h, double c1, double c2) {
  const double angle = d_h == 0.0 ? 90.0 : (180.0 / kPi) * std::atan(h / d_h);
  return 1.0 / (1.0 + c1 * std::exp(-c2 * (angle - c1)));
}

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

LinkGeometry slant(double d) { return {0.0, d}; }

}  // namespace

TEST_CASE("LoS and NLoS pathloss goldens") {
  const ChannelParams p;
  CHECK(rel_close(pathloss_los(slant(1000), p), oracle_fspl(1000, 2e9, 1.6), 1e-9));
  CHECK(pathloss_los(slant(1000), p) == doctest::Approx(100.07).epsilon(1e-4));
  CHECK(rel_close(pathloss_nlos(slant(1000), p), oracle_fspl(1000, 2e9, 23.0), 1e-9));
  CHECK(pathloss_nlos(slant(1000), p) == doctest::Approx(121.47).epsilon(1e-4));
  CHECK(rel_close(pathloss_nlos(slant(1), p), 20.0 * std::log10(2e9) - 147.55 + 23.0, 1e-12));
  CHECK(pathloss_nlos(slant(1), p) == doctest::Approx(61.47).epsilon(1e-4));
  CHECK(rel_close(pathloss_los(slant(1), p), 20.0 * std::log10(2e9) - 147.55 + 1.6, 1e-12));
}

TEST_CASE("pathloss structure") {
  const ChannelParams p;
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const LinkGeometry g{rng.uniform(0, 2000), rng.uniform(1, 300)};
    const LinkGeometry g2{2 * g.horizontal_dist_m, 2 * g.uav_height_m};
    CHECK(pathloss_los(g2, p) - pathloss_los(g, p) == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
    CHECK(pathloss_nlos(g, p) - pathloss_los(g, p) == doctest::Approx(21.4).epsilon(1e-12));
  }
  CHECK_THROWS_AS(pathloss_los(LinkGeometry{0.0, 0.0}, p), std::domain_error);
  CHECK_THROWS_AS(pathloss_nlos(LinkGeometry{0.0, 0.0}, p), std::domain_error);
}

TEST_CASE("LoS probability goldens") {
  const ChannelParams p;
  CHECK(rel_close(p_los({50, 50}, p), oracle_plos(50, 50, 12.076, 0.114), 1e-9));
  CHECK(p_los({50, 50}, p) == doctest::Approx(0.7794).epsilon(1e-3));
  CHECK(rel_close(p_los({0, 50}, p), oracle_plos(0, 50, 12.076, 0.114), 1e-9));
  CHECK(p_los({0, 50}, p) == doctest::Approx(0.99833).epsilon(1e-4));
  // Elevation angle exactly c1 degrees: the exponent vanishes.
  const double d = 50.0 / std::tan(12.076 * kPi / 180.0);
  CHECK(p_los({d, 50}, p) == doctest::Approx(1.0 / 13.076).epsilon(1e-9));
  CHECK(1.0 / 13.076 == doctest::Approx(0.07645).epsilon(1e-3));
}

TEST_CASE("LoS probability is in (0,1) and decreasing in horizontal distance") {
  const ChannelParams p;
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double h = rng.uniform(1, 500);
    const double d = rng.uniform(0, 3000);
    const double v = p_los({d, h}, p);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(p_los({d + 1.0, h}, p) < v);
  }
}

TEST_CASE("total pathloss mixture") {
  ChannelParams p;
  const LinkGeometry g{50, 50};
  const double base = pathloss_los(g, p) - p.eta_los_db;
  CHECK(pathloss_mixture(g, p, 0.5) == doctest::Approx(base + 12.3).epsilon(1e-12));
  const double pl = oracle_plos(50, 50, p.c1, p.c2);
  const double expect = pl * oracle_fspl(g.slant_dist_m(), 2e9, 1.6) + (1 - pl) * oracle_fspl(g.slant_dist_m(), 2e9, 23);
  CHECK(rel_close(pathloss_total(g, p), expect, 1e-9));
  p.channel_mode = ChannelMode::LosOnly;
  CHECK(pathloss_total(g, p) == pathloss_los(g, p));

  ChannelParams prob;
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const LinkGeometry r{rng.uniform(0, 2000), rng.uniform(1, 300)};
    const double t = pathloss_total(r, prob);
    CHECK(t >= pathloss_los(r, prob));
    CHECK(t <= pathloss_nlos(r, prob));
  }
}

TEST_CASE("channel gain") {
  CHECK(rel_close(channel_gain(80, 100), 1e-6, 1e-12));
  CHECK(channel_gain(0, 1) == 1.0);
  CHECK(rel_close(channel_gain(90, 100), channel_gain(80, 100) / 10.0, 1e-12));
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double s1 = rng.uniform(0, 150), s2 = rng.uniform(0, 50);
    CHECK(rel_close(channel_gain(s1 + s2, 100), channel_gain(s1, 100) * std::pow(10.0, -s2 / 10.0), 1e-12));
  }
}

TEST_CASE("SNR and throughput") {
  ChannelParams p;
  CHECK(rel_close(snr_uplink(0.2, 1e-8, p), 2000.0, 1e-12));
  CHECK(snr_uplink(0.0, 1e-8, p) == 0.0);
  CHECK(rel_close(snr_uplink(0.4, 1e-8, p), 2 * snr_uplink(0.2, 1e-8, p), 1e-15));
  CHECK(rel_close(throughput(0.2, 1e-8, p), 1e6 * std::log2(2001.0), 1e-12));
  CHECK(throughput(0.2, 1e-8, p) == doctest::Approx(1.0967e7).epsilon(1e-4));
  CHECK(throughput(0.0, 1e-8, p) == 0.0);

  // Two RBs with the same per-RB SNR: total power doubles.
  ChannelParams p2 = p;
  p2.num_rbs = 2;
  CHECK(rel_close(throughput(0.4, 1e-8, p2), 2 * throughput(0.2, 1e-8, p), 1e-12));

  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    const double g = std::pow(10.0, rng.uniform(-14, -6));
    const double a = rng.uniform(0, 0.2), b = a + rng.uniform(0, 0.2);
    CHECK(throughput(a, g, p) <= throughput(b, g, p));
    CHECK(interference_contribution(a, g) <= interference_contribution(b, g));
  }
}

TEST_CASE("interference contribution") {
  CHECK(rel_close(interference_contribution(0.2, 1e-9), 2e-10, 1e-12));
  CHECK(interference_contribution(0.0, 1e-9) == 0.0);
  CHECK(rel_close(interference_contribution(0.2, 0.5e-9), interference_contribution(0.2, 1e-9) / 2, 1e-15));
}

TEST_CASE("UE SINR and throughput") {
  const ChannelParams p;
  const auto q = ue_sinr_throughput(0.002, 1e-7, 2e-10, p);
  CHECK(rel_close(q.sinr, 0.002 * 1e-7 / (2e-10 + 1e-12), 1e-12));
  CHECK(q.sinr == doctest::Approx(0.995).epsilon(1e-3));
  CHECK(rel_close(q.throughput_bps, 1e6 * std::log2(1 + q.sinr), 1e-12));
  const auto free = ue_sinr_throughput(0.002, 1e-7, 0.0, p);
  CHECK(rel_close(free.sinr, snr_uplink(0.002, 1e-7, p), 1e-15));
  double prev = free.sinr;
  for (double i = 1e-12; i < 1e-8; i *= 3) {
    const double s = ue_sinr_throughput(0.002, 1e-7, i, p).sinr;
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("dBm conversion and purity") {
  CHECK(rel_close(dbm_to_watts(-90), 1e-12, 1e-12));
  CHECK(rel_close(dbm_to_watts(30), 1.0, 1e-15));
  CHECK(rel_close(watts_to_dbm(dbm_to_watts(17.3)), 17.3, 1e-12));
  const ChannelParams p;
  const LinkGeometry g{123.4, 56.7};
  CHECK(pathloss_total(g, p) == pathloss_total(g, p));
}

TEST_CASE("parameter validation") {
  ChannelParams p;
  CHECK_NOTHROW(p.validate());
  p.eta_nlos_db = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.num_rbs = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.noise_power_w = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
