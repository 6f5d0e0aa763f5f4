#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "twr/scene/layout.hpp"
#include "twr/scene/scene.hpp"

using namespace twr;
using namespace twr::scene;

namespace {

em::GridSpec paper_grid() { return em::make_grid(2.0, 3e9); }

// eps components at the interior cell whose centre is at (x, y) meters.
EpsDiag eps_at(const em::MaterialMap& m, const em::GridSpec& g, double x, double y) {
  const auto i = g.node_x(g.cell_x(x)), j = g.node_y(g.cell_y(y));
  return {m.eps_xx(i, j), m.eps_yy(i, j), m.eps_zz(i, j)};
}

}  // namespace

// ---------------------------------------------------------------- walls

TEST(Wall, ThicknessPerScenario) {
  for (auto s : kAllScenarios) {
    const auto w = make_wall(s);
    EXPECT_NEAR(w.thickness(), s == Scenario::airgap ? 0.15 : 0.10, 1e-12) << to_string(s);
    EXPECT_NO_THROW(w.validate());
  }
}

TEST(Wall, LayerTables) {
  const auto inh = make_wall(Scenario::inhomogeneous);
  ASSERT_EQ(inh.layers.size(), 10u);
  const double expect[] = {3, 6, 4, 5, 6, 3, 6, 3, 5, 2};
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_EQ(inh.layers[k].eps, EpsDiag::isotropic(expect[k]));
    EXPECT_DOUBLE_EQ(inh.layers[k].thickness, 0.01);
  }
  EXPECT_EQ(make_wall(Scenario::anisotropic).layers.at(0).eps, (EpsDiag{6, 4, 2}));

  const auto ia = make_wall(Scenario::inhomogeneous_anisotropic);
  ASSERT_EQ(ia.layers.size(), 10u);
  const EpsDiag table[] = {{6, 3, 2}, {5, 5, 2}, {6, 4, 2}, {4, 6, 2}, {3, 4, 2},
                           {2, 3, 2}, {5, 2, 2}, {2, 4, 2}, {4, 3, 2}, {3, 5, 2}};
  for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(ia.layers[k].eps, table[k]);

  const auto gap = make_wall(Scenario::airgap);
  ASSERT_EQ(gap.layers.size(), 3u);
  EXPECT_EQ(gap.layers[0].eps, EpsDiag::isotropic(6));
  EXPECT_EQ(gap.layers[1].eps, EpsDiag::isotropic(1));
  EXPECT_EQ(gap.layers[2].eps, EpsDiag::isotropic(6));
  EXPECT_EQ(make_wall(Scenario::homogeneous, 1.2, 4.5).layers.at(0).eps, EpsDiag::isotropic(4.5));
}

TEST(Wall, ScenarioNamesRoundTrip) {
  for (auto s : kAllScenarios) EXPECT_EQ(scenario_from_string(to_string(s)), s);
  EXPECT_THROW(scenario_from_string("brick"), InvalidArgument);
}

TEST(Wall, InvalidLayersAreRejected) {
  WallSpec w;
  w.layers = {{0.1, {0.5, 1, 1}}};
  EXPECT_THROW(w.validate(), InvalidScene);
  w.layers = {{0.0, EpsDiag::isotropic(2)}};
  EXPECT_THROW(w.validate(), InvalidScene);
}

// ---------------------------------------------------------------- material maps

TEST(MaterialMap, EmptySceneIsVacuum) {
  const auto g = paper_grid();
  const auto m = build_material_map(Scene{.wall = {}, .targets = {}}, g);
  for (const auto* a : {&m.eps_xx, &m.eps_yy, &m.eps_zz}) {
    for (double v : a->flat()) ASSERT_EQ(v, 1.0);
  }
  EXPECT_EQ(em::MaterialMap::mu_r, 1.0);
  EXPECT_EQ(em::MaterialMap::sigma, 0.0);
}

// Layers run from the source-facing surface at y = 1.20 m downwards, one per cm.
TEST(MaterialMap, InhomogeneousProfileAcrossTheBand) {
  const auto g = paper_grid();
  const auto m = build_material_map(Scene{.wall = make_wall(Scenario::inhomogeneous), .targets = {}}, g);
  const double expect[] = {3, 6, 4, 5, 6, 3, 6, 3, 5, 2};
  for (int k = 0; k < 10; ++k) {
    const double y = 1.195 - 0.01 * k;
    for (double x : {0.005, 1.0, 1.995}) EXPECT_EQ(eps_at(m, g, x, y), EpsDiag::isotropic(expect[k])) << y;
  }
  EXPECT_EQ(eps_at(m, g, 1.0, 1.205).zz, 1.0);
  EXPECT_EQ(eps_at(m, g, 1.0, 1.095).zz, 1.0);
}

TEST(MaterialMap, AnisotropicWallCells) {
  const auto g = paper_grid();
  const auto m = build_material_map(Scene{.wall = make_wall(Scenario::anisotropic), .targets = {}}, g);
  std::size_t wall_cells = 0;
  for (std::size_t i = 0; i < g.total_x(); ++i) {
    for (std::size_t j = 0; j < g.total_y(); ++j) {
      const EpsDiag e{m.eps_xx(i, j), m.eps_yy(i, j), m.eps_zz(i, j)};
      const double y = g.node_center_y(j);
      if (y > 1.10 && y < 1.20) {
        ASSERT_EQ(e, (EpsDiag{6, 4, 2}));
        ++wall_cells;
      } else {
        ASSERT_EQ(e, EpsDiag::isotropic(1.0));
      }
    }
  }
  EXPECT_EQ(wall_cells, 10 * g.total_x());
}

TEST(MaterialMap, AirgapBand) {
  const auto g = paper_grid();
  const auto m = build_material_map(Scene{.wall = make_wall(Scenario::airgap), .targets = {}}, g);
  EXPECT_EQ(eps_at(m, g, 0.7, 1.175).zz, 6.0);
  EXPECT_EQ(eps_at(m, g, 0.7, 1.125).zz, 1.0);
  EXPECT_EQ(eps_at(m, g, 0.7, 1.055).zz, 6.0);
  EXPECT_EQ(eps_at(m, g, 0.7, 1.045).zz, 1.0);
}

TEST(MaterialMap, TargetPaintedOverBackground) {
  const auto g = paper_grid();
  Scene sc{.wall = make_wall(Scenario::homogeneous), .targets = {{{45, 60}, 0.20, 80.0}}};
  const auto m = build_material_map(sc, g);
  // Centre (0.50 + 0.45, -0.15 + 0.60) = (0.95, 0.45); 20 x 20 cells.
  std::size_t cells = 0;
  for (std::size_t i = 0; i < g.total_x(); ++i) {
    for (std::size_t j = 0; j < g.total_y(); ++j) cells += m.eps_zz(i, j) == 80.0;
  }
  EXPECT_EQ(cells, 400u);
  EXPECT_EQ(eps_at(m, g, 0.855, 0.355), EpsDiag::isotropic(80));
  EXPECT_EQ(eps_at(m, g, 1.045, 0.545), EpsDiag::isotropic(80));
  EXPECT_EQ(eps_at(m, g, 0.845, 0.45).zz, 1.0);
  EXPECT_EQ(eps_at(m, g, 1.055, 0.45).zz, 1.0);
}

TEST(MaterialMap, IsPureAndAllComponentsAtLeastOne) {
  const auto g = paper_grid();
  const SceneLayout layout;
  for (auto s : kAllScenarios) {
    const auto sc = layout.make_scene(s, {{5, 40}, {85, 100}}, {0.30, 0.30});
    const auto a = build_material_map(sc, g);
    EXPECT_TRUE(a == build_material_map(sc, g));
    for (const auto* arr : {&a.eps_xx, &a.eps_yy, &a.eps_zz}) {
      for (double v : arr->flat()) ASSERT_GE(v, 1.0);
    }
  }
}

TEST(MaterialMap, InvalidScenes) {
  const auto g = paper_grid();
  const SceneLayout layout;
  // 30 cm square at y = 100 cm reaches 1.00 m in the domain; with offset 0 it would hit the wall.
  Scene hits_wall = layout.make_scene(Scenario::homogeneous, {{45, 100}}, {0.30});
  hits_wall.frame_offset = {0.5, 0.0};
  EXPECT_THROW(build_material_map(hits_wall, g), InvalidScene);

  EXPECT_THROW(build_material_map(layout.make_scene(Scenario::homogeneous, {{45, 60}, {55, 60}}, {0.2, 0.2}), g),
               InvalidScene);
  EXPECT_THROW(build_material_map(layout.make_scene(Scenario::homogeneous, {{5, 40}, {25, 40}, {45, 40}},
                                                    {0.1, 0.1, 0.1}),
                                  g),
               InvalidScene);
  Scene outside = layout.make_scene(Scenario::homogeneous, {{5, 40}}, {0.30});
  outside.frame_offset = {0.0, 0.0};
  EXPECT_THROW(build_material_map(outside, g), InvalidScene);
  EXPECT_THROW(layout.make_scene(Scenario::homogeneous, {{5, 40}}, {}), InvalidArgument);
}

// Every labelled position with every size fits for every scenario.
TEST(MaterialMap, WholePositionGridIsRealisable) {
  const auto g = paper_grid();
  const SceneLayout layout;
  for (auto s : kAllScenarios) {
    for (const auto& p : layout.single_positions()) {
      for (double size : kTargetSizes) EXPECT_NO_THROW(validate_scene(layout.make_scene(s, {p}, {size}), g));
    }
  }
}

// ---------------------------------------------------------------- frame

TEST(Frame, PaperToDomain) {
  const auto a = paper_frame_to_domain(Position{5, 40}, em::Point{0.50, 0.0});
  EXPECT_DOUBLE_EQ(a.x, 0.55);
  EXPECT_DOUBLE_EQ(a.y, 0.40);
  const auto b = paper_frame_to_domain(Position{85, 100}, em::Point{0.50, 0.0});
  EXPECT_DOUBLE_EQ(b.x, 1.35);
  EXPECT_DOUBLE_EQ(b.y, 1.00);
}

TEST(Frame, SquareLeavingTheDomainIsRejected) {
  const auto g = paper_grid();
  EXPECT_THROW(paper_frame_to_domain(Position{5, 40}, 0.30, em::Point{0, 0}, g), InvalidScene);
  EXPECT_NO_THROW(paper_frame_to_domain(Position{5, 40}, 0.10, em::Point{0, 0}, g));
}

// ---------------------------------------------------------------- positions

TEST(Positions, PaperGridHasSixtyThreeCentres) {
  const auto p = enumerate_single_positions(5, 85, 40, 100, 10);
  ASSERT_EQ(p.size(), 63u);
  EXPECT_EQ(p.front(), (Position{5, 40}));
  EXPECT_EQ(p[1], (Position{15, 40}));
  EXPECT_EQ(p.back(), (Position{85, 100}));
  EXPECT_EQ(std::set<Position>(p.begin(), p.end()).size(), 63u);
  for (const auto& q : p) {
    EXPECT_EQ(std::fmod(q.x - 5, 10), 0.0);
    EXPECT_EQ(std::fmod(q.y - 40, 10), 0.0);
  }
}

TEST(Positions, CoarserStep) { EXPECT_EQ(enumerate_single_positions(5, 85, 40, 100, 20).size(), 20u); }

TEST(Positions, EmptyRangeIsEmpty) {
  EXPECT_TRUE(enumerate_single_positions(85, 5, 40, 100, 10).empty());
  EXPECT_THROW(enumerate_single_positions(5, 85, 40, 100, 0), InvalidArgument);
}

// ---------------------------------------------------------------- pairs

TEST(Pairs, SevenHundredFiftySixUniqueCanonicalNonOverlapping) {
  const auto pos = enumerate_single_positions(5, 85, 40, 100, 10);
  const auto pairs = enumerate_pairs(pos, 756, 7);
  ASSERT_EQ(pairs.size(), 756u);
  EXPECT_EQ(std::set<PositionPair>(pairs.begin(), pairs.end()).size(), 756u);
  const auto g = paper_grid();
  const SceneLayout layout;
  for (const auto& [a, b] : pairs) {
    EXPECT_TRUE(a < b);
    EXPECT_GE(chebyshev_cm(a, b), 30.0);
    const Rect ra = target_footprint({a, 0.30, 80}, {0.5, -0.15});
    const Rect rb = target_footprint({b, 0.30, 80}, {0.5, -0.15});
    EXPECT_FALSE(ra.overlaps(rb));
    EXPECT_NO_THROW(validate_scene(layout.make_scene(Scenario::homogeneous, {a, b}, {0.30, 0.30}), g));
  }
}

TEST(Pairs, SeededAndDeterministic) {
  const auto pos = enumerate_single_positions(5, 85, 40, 100, 10);
  EXPECT_EQ(enumerate_pairs(pos, 756, 7), enumerate_pairs(pos, 756, 7));
  EXPECT_NE(enumerate_pairs(pos, 756, 7), enumerate_pairs(pos, 756, 8));
}

TEST(Pairs, AllPairsWithoutSeparation) {
  const auto pos = enumerate_single_positions(5, 85, 40, 100, 10);
  const auto all = enumerate_pairs(pos, 63 * 62 / 2, 1, 0.0);
  EXPECT_EQ(all.size(), 1953u);
  EXPECT_EQ(std::set<PositionPair>(all.begin(), all.end()).size(), 1953u);
  EXPECT_THROW(enumerate_pairs(pos, 1954, 1, 0.0), CapacityError);
}

TEST(Pairs, CapacityAtThirtyCentimetres) {
  const auto pos = enumerate_single_positions(5, 85, 40, 100, 10);
  const auto pool = admissible_pairs(pos, 30.0);
  // Pairs closer than 30 cm in both axes: per position, the 5x5 neighbourhood minus itself.
  std::size_t close = 0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) close += chebyshev_cm(pos[i], pos[j]) < 30.0;
  }
  EXPECT_EQ(pool.size() + close, 1953u);
  EXPECT_THROW(enumerate_pairs(pos, pool.size() + 1, 1), CapacityError);
  EXPECT_EQ(canonical({15, 40}, {5, 90}), (PositionPair{{5, 90}, {15, 40}}));
}

// ---------------------------------------------------------------- layout

TEST(Layout, DefaultsAndJsonRoundTrip) {
  const SceneLayout d;
  EXPECT_EQ(d.grid().nx, 200u);
  EXPECT_EQ(d.series_length(), 95u);
  EXPECT_EQ(d.feature_dim(), 285u);
  EXPECT_EQ(d.single_positions().size(), 63u);

  auto j = to_json(d);
  const auto back = layout_from_json(j);
  EXPECT_EQ(to_json(back).dump(), j.dump());

  const auto custom = layout_from_json({{"homogeneous_eps", 4.0},
                                        {"total_steps", 1000},
                                        {"features", {{"mode", "receiver_line"}, {"receivers", 50}}},
                                        {"wall_overrides", {{"airgap", {{{"thickness_m", 0.2}, {"eps", {2, 2, 2}}}}}}}});
  EXPECT_EQ(custom.homogeneous_eps, 4.0);
  EXPECT_EQ(custom.series_length(), 40u);
  EXPECT_EQ(custom.feature_mode, FeatureMode::receiver_line);
  EXPECT_EQ(custom.feature_dim(), 150u);
  EXPECT_NEAR(custom.wall(Scenario::airgap).thickness(), 0.2, 1e-12);
  EXPECT_EQ(to_json(layout_from_json(to_json(custom))).dump(), to_json(custom).dump());
}

TEST(Layout, UnknownKeysAreRejected) {
  EXPECT_THROW(layout_from_json({{"colour", 1}}), InvalidArgument);
  EXPECT_THROW(layout_from_json({{"features", {{"stride", 3}}}}), InvalidArgument);
  EXPECT_THROW(layout_from_json(nlohmann::json::array()), InvalidArgument);
  EXPECT_THROW(layout_from_json({{"source", {{"waveform", "square"}}}}), InvalidArgument);
}

// ---------------------------------------------------------------- distinguishability

TEST(Scenarios, WallsThatDifferInEpsZzGiveDifferentRecords) {
  const SceneLayout layout;
  const auto g = layout.grid();
  const auto run = [&](Scenario s) {
    return run_simulation(layout.make_scene(s, {{45, 70}}, {0.2}), g, layout.source, layout.run_spec());
  };
  const auto hom = run(Scenario::homogeneous);
  const auto diff = [&](const em::ProbeRecord& o) {
    double d = 0.0;
    for (std::size_t k = 0; k < hom.ez_series.size(); ++k) d = std::max(d, std::abs(hom.ez_series[k] - o.ez_series[k]));
    return d;
  };
  EXPECT_GT(diff(run(Scenario::anisotropic)), 1e-6 * layout.source.amplitude);
  EXPECT_GT(diff(run(Scenario::inhomogeneous)), 1e-6 * layout.source.amplitude);
}
