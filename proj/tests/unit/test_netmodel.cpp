#include "doctest.h"
#include "fixtures.hpp"

#include <cmath>

#include "common/errors.hpp"
#include "netmodel/network.hpp"

using namespace topoctl;

namespace {

const char* kTiny = R"(function mpc = tiny
mpc.baseMVA = 100;
mpc.bus = [
  1 3 0   0 0 0 1 1 0 230 1 1.1 0.9;
  2 1 50  0 0 0 1 1 0 230 1 1.1 0.9;
  3 1 25  0 0 0 1 1 0 230 1 1.1 0.9;
];
mpc.gen = [
  1 0 0 0 0 1 100 1 80 10;
  1 0 0 0 0 1 100 1 20 0;
  3 0 0 0 0 1 100 0 99 0;
];
mpc.branch = [
  1 2 0 0.1 0 100 0 0 0 0 1 -20 20;
  2 3 0 0.2 0 0   0 0 0 0 1 0 0;
  1 2 0 0.1 0 100 0 0 0 0 0 -20 20;
];
mpc.gencost = [
  2 0 0 3 0.5 20 7 0;
  1 0 0 2 0 0 100 3000;
  2 0 0 2 99 0 0 0;
];
)";

}  // namespace

TEST_CASE("MATPOWER subset parses into per-unit data") {
  const Network net = parse_case(kTiny);
  REQUIRE(net.num_buses() == 3);
  REQUIRE(net.num_lines() == 3);
  CHECK(net.base_mva() == 100.0);
  CHECK(net.reference_index() == 0);
  CHECK(net.buses()[1].demand == doctest::Approx(0.5));
  CHECK(net.total_demand() == doctest::Approx(0.75));

  // in-service generators aggregate; the off-line unit at bus 3 is ignored
  const Bus& b1 = net.buses()[0];
  CHECK(b1.gen_lower == doctest::Approx(0.1));
  CHECK(b1.gen_upper == doctest::Approx(1.0));
  // capacity-weighted: (20 * 80 + 30 * 20) / 100 $/MWh, times base
  CHECK(b1.gen_cost == doctest::Approx((20.0 * 80 + 30.0 * 20) / 100.0 * 100.0));
  CHECK(net.buses()[2].gen_upper == 0.0);

  const Line& l0 = net.lines()[0];
  CHECK(l0.susceptance == doctest::Approx(-10.0));
  CHECK(l0.thermal == doctest::Approx(1.0));
  CHECK(l0.angle_limit == doctest::Approx(20.0 * M_PI / 180.0));
  CHECK(l0.circuit == 1);
  // rateA 0 is unlimited; zero angle limits default to 360 degrees
  CHECK(net.lines()[1].thermal == doctest::Approx(99.99));
  CHECK(net.lines()[1].angle_limit == doctest::Approx(2 * M_PI));
  // parallel line gets the next circuit number and keeps its status
  CHECK(net.lines()[2].circuit == 2);
  CHECK_FALSE(net.lines()[2].initially_on);
}

TEST_CASE("zero_gen_lower clears generator minimums") {
  CaseOptions opt;
  opt.zero_gen_lower = true;
  CHECK(parse_case(kTiny, opt).buses()[0].gen_lower == 0.0);
}

TEST_CASE("malformed cases are rejected") {
  CHECK_THROWS_AS(parse_case("mpc.baseMVA = 100;"), ParseError);
  std::string bad = kTiny;
  bad.replace(bad.find("0.1 0 100"), 3, "0.x");
  CHECK_THROWS_AS(parse_case(bad), ParseError);
  std::string unknown = kTiny;
  unknown.replace(unknown.find("2 3 0 0.2"), 1, "7");
  CHECK_THROWS_AS(parse_case(unknown), ValidationError);
}

TEST_CASE("network invariants") {
  std::vector<Bus> buses{{1, 0, 0, 1, 1, 0, 0, true}, {2, 0.5, 0, 0, 0, 0, 0, false}};
  Line ok{1, 2, 1, -5.0, 0.0, 1.0, 0.5, true};
  CHECK_NOTHROW(Network(buses, {ok}, 100));

  auto no_ref = buses;
  no_ref[0].is_reference = false;
  CHECK_THROWS_AS(Network(no_ref, {ok}, 100), ValidationError);
  auto two_ref = buses;
  two_ref[1].is_reference = true;
  CHECK_THROWS_AS(Network(two_ref, {ok}, 100), ValidationError);

  Line zero_b = ok;
  zero_b.susceptance = 0.0;
  CHECK_THROWS_AS(Network(buses, {zero_b}, 100), ValidationError);
  Line no_rating = ok;
  no_rating.thermal = 0.0;
  CHECK_THROWS_AS(Network(buses, {no_rating}, 100), ValidationError);
  CHECK_THROWS_AS(Network(buses, {ok, ok}, 100), ValidationError);
  Line dangling = ok;
  dangling.to = 9;
  CHECK_THROWS_AS(Network(buses, {dangling}, 100), ValidationError);

  auto inverted = buses;
  inverted[0].gen_lower = 2.0;
  CHECK_THROWS_AS(Network(inverted, {ok}, 100), ValidationError);

  Line off = ok;
  off.initially_on = false;
  const Network split(buses, {off}, 100);
  CHECK_FALSE(split.initially_connected());
  CHECK(split.warnings().size() == 1);
}

TEST_CASE("JSON round trip is lossless") {
  const Network net = fixtures::fivebus();
  const Network back = parse_network_json(network_to_json(net));
  CHECK(back == net);
  CHECK_THROWS_AS(parse_network_json("{\"buses\": 3}"), ParseError);
  CHECK_THROWS_AS(parse_network_json("not json"), ParseError);
}

TEST_CASE("fixture case: totals, costs, big-M") {
  const Network net = fixtures::fivebus();
  CHECK(net.num_buses() == 5);
  CHECK(net.num_lines() == 6);
  CHECK(net.total_demand() == doctest::Approx(10.0));
  CHECK(net.buses()[net.reference_index()].id == 4);
  double max_cost = 0.0;
  for (const Bus& b : net.buses()) max_cost = std::max(max_cost, b.gen_cost);
  for (const Bus& b : net.buses()) {
    CHECK(b.ramp_cost == doctest::Approx(0.1 * b.gen_cost));
    CHECK(b.voll == doctest::Approx(10.0 * max_cost));
  }
  CHECK(big_m_theta(net) == doctest::Approx(6 * 30.0 * M_PI / 180.0));
}

TEST_CASE("default costs fill only when absent") {
  const Network raw = parse_case(fixtures::read(fixtures::data("fivebus.m")));
  const Network filled = fill_default_costs(raw);
  CHECK(filled == default_costs(raw));
  CHECK(fill_default_costs(filled) == filled);
}

TEST_CASE("load scaling") {
  const Network net = fixtures::fivebus();
  const Network up = scale_loads(net, 1.05);
  CHECK(up.total_demand() == doctest::Approx(10.5));
  CHECK(up.lines() == net.lines());
  CHECK_THROWS_AS(scale_loads(net, 0.0), ArgumentError);
}
