#include "sgbp/io.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace sgbp;
using testing::grid_fixture;

TEST_CASE("grid cluster construction on 3x3") {
  const Problem p = grid_fixture(2);
  const auto& g = p.graph;
  CHECK(g.num_regions() == 9);
  CHECK(g.num_edges() == 12);
  std::vector<std::string> tops;
  for (int r : g.top_regions()) tops.push_back(g.region(r).id);
  std::sort(tops.begin(), tops.end());
  CHECK(tops == std::vector<std::string>{"1245", "2356", "4578", "5689"});
  for (const char* mid : {"25", "45", "56", "58"}) {
    const int r = g.region_index(mid);
    REQUIRE(r >= 0);
    CHECK(g.parents(r).size() == 2);
    CHECK(g.children(r) == std::vector<int>{g.region_index("5")});
  }
  const int five = g.region_index("5");
  CHECK(g.ancestors(five).size() == 8);
  CHECK(g.descendants(g.region_index("1245")).size() == 3);
}

TEST_CASE("region potential of 25 is phi2 phi5 psi25") {
  const Problem p = grid_fixture(3);
  const Region& r = p.graph.region(p.graph.region_index("25"));
  REQUIRE(r.factors.size() == 3);
  const FactorTable phi = region_potential(r, p.model);
  const auto& m = p.model;
  const auto& f2 = m.factor(m.factor_index("phi_1")).table;
  const auto& f5 = m.factor(m.factor_index("phi_4")).table;
  const auto& psi = m.factor(m.factor_index("psi_1_4")).table;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) CHECK(phi[a * 3 + b] == doctest::Approx(f2[a] * f5[b] * psi[a * 3 + b]));
}

TEST_CASE("empty factor set gives an all-ones potential") {
  const Model m = build_model({2, 2, {{"a", FactorTable({0}, 2, 2.0)}}});
  const FactorTable phi = region_potential({"r", {0, 1}, {}}, m);
  CHECK(phi.values().isOnes());
}

TEST_CASE("topological order puts parents first") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Problem p = testing::random_problem(rng);
    const auto& order = p.graph.topological_order();
    std::vector<int> pos(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) pos[static_cast<std::size_t>(order[i])] = static_cast<int>(i);
    for (const auto& e : p.graph.edges()) CHECK(pos[static_cast<std::size_t>(e.parent)] < pos[static_cast<std::size_t>(e.child)]);
  }
}

TEST_CASE("build_region_graph validation errors name the culprit") {
  const Model m = build_model(make_potts({2, 2, 0.5, 0.1, 0.1, 0}, 2));
  auto spec_with = [&](std::vector<RegionSpec> regions, std::vector<std::pair<std::string, std::string>> edges) {
    return RegionGraphSpec{std::move(regions), std::move(edges)};
  };
  RegionSpec big{"big", {0, 1}, {"phi_0", "phi_1", "psi_0_1"}};
  RegionSpec small{"small", {0}, {"phi_0"}};

  SUBCASE("factor outside the region's variables") {
    RegionSpec bad{"bad", {0}, {"psi_0_1"}};
    CHECK_THROWS_WITH_AS(build_region_graph(spec_with({bad}, {}), m), doctest::Contains("bad"), std::invalid_argument);
  }
  SUBCASE("child not a subset") {
    RegionSpec other{"other", {2}, {"phi_2"}};
    CHECK_THROWS_WITH_AS(build_region_graph(spec_with({big, other}, {{"big", "other"}}), m),
                         doctest::Contains("other"), std::invalid_argument);
  }
  SUBCASE("edge pointing from the smaller region to the larger") {
    CHECK_THROWS_AS(build_region_graph(spec_with({big, small}, {{"small", "big"}}), m), std::invalid_argument);
  }
  SUBCASE("child factors not nested") {
    RegionSpec loose{"loose", {0}, {}};
    RegionSpec parent{"parent", {0, 1}, {"psi_0_1"}};
    RegionSpec kid{"kid", {0}, {"phi_0"}};
    CHECK_THROWS_AS(build_region_graph(spec_with({parent, kid, loose}, {{"parent", "kid"}}), m), std::invalid_argument);
  }
  SUBCASE("duplicate edge") {
    CHECK_THROWS_AS(build_region_graph(spec_with({big, small}, {{"big", "small"}, {"big", "small"}}), m),
                    std::invalid_argument);
  }
  SUBCASE("equal scopes in both directions") {
    RegionSpec twin{"twin", {0, 1}, {"phi_0", "phi_1", "psi_0_1"}};
    CHECK_THROWS_AS(build_region_graph(spec_with({big, twin}, {{"big", "twin"}, {"twin", "big"}}), m),
                    std::invalid_argument);
  }
  SUBCASE("unknown ids") {
    CHECK_THROWS_AS(build_region_graph(spec_with({big}, {{"big", "nope"}}), m), std::invalid_argument);
    CHECK_THROWS_AS(build_region_graph(spec_with({{"r", {0}, {"nope"}}}, {}), m), std::invalid_argument);
  }
  SUBCASE("duplicate region id") {
    CHECK_THROWS_AS(build_region_graph(spec_with({big, big}, {}), m), std::invalid_argument);
  }
}

TEST_CASE("closures are consistent with reachability") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Problem p = testing::random_problem(rng);
    const auto& g = p.graph;
    for (std::size_t r = 0; r < g.num_regions(); ++r) {
      const int ri = static_cast<int>(r);
      for (int d : g.descendants(ri)) {
        CHECK(g.is_descendant(ri, d));
        const auto& anc = g.ancestors(d);
        CHECK(std::find(anc.begin(), anc.end(), ri) != anc.end());
        CHECK(scope_includes(g.region(ri).variables, g.region(d).variables));
      }
      CHECK(g.in_closure(ri, ri));
      CHECK(g.closure(ri).size() == g.descendants(ri).size() + 1);
    }
  }
}

TEST_CASE("ancestor/descendant duality and nested closures on graphs up to 12 regions") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const Model model = build_model(testing::random_model(6, 2, rng));
    const RegionGraph g = build_region_graph(testing::random_regions(model, rng, 12), model);
    CHECK(g.num_regions() <= 12);
    for (std::size_t a = 0; a < g.num_regions(); ++a)
      for (std::size_t b = 0; b < g.num_regions(); ++b) {
        const auto& anc = g.ancestors(static_cast<int>(b));
        const bool is_anc = std::find(anc.begin(), anc.end(), static_cast<int>(a)) != anc.end();
        CHECK(is_anc == g.is_descendant(static_cast<int>(a), static_cast<int>(b)));
      }
    for (const auto& e : g.edges())
      for (int r : g.closure(e.child)) CHECK(g.in_closure(e.parent, r));
  }
}

TEST_CASE("single region without edges") {
  const Model m = build_model(make_potts({1, 2, 0.5, 0.1, 0.1, 0}, 2));
  const RegionGraph g = build_region_graph(RegionGraphSpec{{{"only", {0, 1}, {"phi_0", "phi_1", "psi_0_1"}}}, {}}, m);
  CHECK(g.closure(0) == std::vector<int>{0});
  CHECK(g.ancestors(0).empty());
  CHECK(g.is_top(0));
}

TEST_CASE("random three-variable region potential at all 27 points") {
  std::mt19937 rng(13);
  ModelSpec spec{3, 3, {}};
  for (int v = 0; v < 3; ++v) spec.factors.push_back({"u" + std::to_string(v), testing::random_table({v}, 3, rng)});
  spec.factors.push_back({"f02", testing::random_table({0, 2}, 3, rng)});
  spec.factors.push_back({"f012", testing::random_table({0, 1, 2}, 3, rng)});
  const Model m = build_model(spec);
  const FactorTable phi = region_potential({"r", {0, 1, 2}, {0, 1, 2, 3, 4}}, m);
  auto f = [&](int i) -> const FactorTable& { return m.factor(i).table; };
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        CHECK(phi[a * 9 + b * 3 + c] ==
              doctest::Approx(f(0)[a] * f(1)[b] * f(2)[c] * f(3)[a * 3 + c] * f(4)[a * 9 + b * 3 + c]).epsilon(1e-14));
}

TEST_CASE("Bethe regions: one top per pairwise factor, children at shared variables") {
  const Model m = build_model(make_potts({2, 3, 0.3, 0.1, 0.1, 0}, 2));
  const RegionGraphSpec spec = make_bethe_regions(m);
  const RegionGraph g = build_region_graph(spec, m);
  CHECK(g.top_regions().size() == 7);
  CHECK(g.num_regions() == 7 + 6);
  const Region& corner = g.region(g.region_index("V:0"));
  CHECK(g.parents(g.region_index("V:0")).size() == 2);
  CHECK(corner.factors.size() == 1);
  CHECK(g.parents(g.region_index("V:1")).size() == 3);
}

TEST_CASE("region labels") {
  CHECK(region_label({0, 1, 3, 4}) == "1245");
  CHECK(region_label({4}) == "5");
  CHECK(region_label({0, 9}) == "1_10");
}

TEST_CASE("region file round trip") {
  const Model m = build_model(make_potts({3, 3, 0.1, 0.1, 0.1, 0}, 2));
  const RegionGraphSpec spec = make_grid_cluster_regions(3, 3, m);
  const RegionGraphSpec back = io::regions_from_json(io::regions_to_json(spec));
  CHECK(back.edges == spec.edges);
  REQUIRE(back.regions.size() == spec.regions.size());
  for (std::size_t i = 0; i < spec.regions.size(); ++i) {
    CHECK(back.regions[i].id == spec.regions[i].id);
    CHECK(back.regions[i].variables == spec.regions[i].variables);
    CHECK(back.regions[i].factors == spec.regions[i].factors);
  }
  CHECK_THROWS_AS(io::regions_from_json(R"({"regions":[],"edges":[["a"]]})"), io::IoError);
}
