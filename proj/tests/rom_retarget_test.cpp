#include "msk/retarget/pipeline.hpp"
#include "msk/rom/estimate.hpp"
#include "msk/toy/toy_model.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace msk;

namespace {

const Model& toy_model() {
  static const Model m = toy::make_toy_model();
  return m;
}

const PoseDataset& toy_data() {
  static const PoseDataset d = toy::toy_dataset(toy_model().skeleton);
  return d;
}

double quat_distance(const Quat& a, const Quat& b) { return std::min((a.coeffs() - b.coeffs()).norm(), (a.coeffs() + b.coeffs()).norm()); }

Quat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  return Quat(N(rng), N(rng), N(rng), N(rng)).normalized();
}

const GridResolution kSmall{6, 12, 12};

}  // namespace

TEST(Decomposition, RecomposeInvertsDecompose) {
  std::mt19937_64 rng(21);
  const std::vector<Vec3> shafts{-Vec3::UnitZ(), Vec3::UnitY(), Vec3(0.3, -0.2, 0.9).normalized()};
  for (int k = 0; k < 10000; ++k) {
    const Quat q = random_quat(rng);
    const Vec3& s = shafts[static_cast<std::size_t>(k) % shafts.size()];
    const auto d = decompose_rotation(q, s);
    EXPECT_NEAR(d.cone_dir.norm(), 1.0, 1e-12);
    EXPECT_GT(d.twist, -kPi - 1e-12);
    EXPECT_LE(d.twist, kPi + 1e-12);
    EXPECT_LT((q * s - d.cone_dir).norm(), 1e-12);
    ASSERT_LT(quat_distance(recompose_rotation(d, s), q), 1e-10) << "sample " << k;
  }
}

TEST(Decomposition, ConeCoordinatesRoundTrip) {
  std::mt19937_64 rng(22);
  const Vec3 c = Vec3(0.1, 0.5, -0.8).normalized();
  for (int k = 0; k < 1000; ++k) {
    const Vec3 v = random_quat(rng) * Vec3::UnitX();
    const auto cc = cone_coords(v, c);
    EXPECT_NEAR(cc.polar, std::acos(std::clamp(v.dot(c), -1.0, 1.0)), 1e-7);
    EXPECT_LT((cone_direction(cc, c) - v).norm(), 1e-12);
  }
}

TEST(Estimate, EveryDatasetPoseIsValidAndBoundIsTight) {
  const Model base = toy::make_toy_skeleton_model();
  const auto data = toy::toy_dataset(base.skeleton, {.poses = 600, .seed = 23, .mirror = true});
  const Model fitted = estimate_lengths(base, data);
  for (const auto& p : data.poses) ASSERT_TRUE(is_valid(fitted, p));
  for (std::size_t i = 0; i < fitted.muscles.size(); ++i) {
    const auto& m = fitted.muscles[i];
    double longest = 0.0;
    for (const auto& p : data.poses) longest = std::max(longest, musculotendon_length(m, fitted.skeleton, p));
    EXPECT_NEAR(longest, passive_boundary_length(m, fitted.curves), 1e-9) << m.id;
    EXPECT_NEAR(m.ratio(), base.muscles[i].ratio(), 1e-12) << m.id;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& p : data.poses) worst = std::min(worst, passive_constraint(fitted, m, p));
    EXPECT_NEAR(worst, 0.0, 1e-7) << m.id;
  }
}

TEST(Estimate, PosesBeyondTheDatasetCanBeInvalid) {
  const Model& m = toy_model();
  Pose p = m.skeleton.rest_pose();
  p.joints[static_cast<std::size_t>(m.skeleton.index_of("femur_r"))].rotation = axis_angle(Vec3::UnitX(), 2.6);
  EXPECT_FALSE(is_valid(m, p));
  EXPECT_FALSE(violated_muscles(m, p).empty());
}

TEST(Relax, LengthsGrowMonotonicallyUntilTorqueBelowThreshold) {
  const Model& m = toy_model();
  const double initial = relax_keyposes(m, 1e12).max_torque;
  ASSERT_GT(initial, 0.0);
  const double threshold = 0.5 * initial;
  const auto r = relax_keyposes(m, threshold);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.max_torque, threshold);
  EXPECT_GT(r.iterations, 0);
  for (std::size_t i = 0; i < m.muscles.size(); ++i) {
    EXPECT_GE(r.model.muscles[i].l_m0, m.muscles[i].l_m0);
    EXPECT_GE(r.model.muscles[i].l_t0, m.muscles[i].l_t0);
    EXPECT_NEAR(r.model.muscles[i].ratio(), m.muscles[i].ratio(), 1e-12);
  }
  double looser_total = 0.0, tighter_total = 0.0;
  const auto looser = relax_keyposes(m, 0.25 * initial);
  for (std::size_t i = 0; i < m.muscles.size(); ++i) {
    looser_total += looser.model.muscles[i].l_m0;
    tighter_total += r.model.muscles[i].l_m0;
  }
  EXPECT_GE(looser_total, tighter_total);
}

TEST(Edit, IdentityEditLeavesPosesUnchanged) {
  const Skeleton& skel = toy_model().skeleton;
  RomEdit e;
  e.joints["hip_r"] = BallEdit{};
  e.joints["knee_r"] = RevoluteEdit{};
  std::mt19937_64 rng(24);
  for (int k = 0; k < 200; ++k) {
    const Pose p = oracle::random_pose(skel, rng, 1.5);
    const Pose q = apply_rom_edit(skel, e, p);
    for (int j = 0; j < skel.size(); ++j) {
      const auto uj = static_cast<std::size_t>(j);
      EXPECT_NEAR(q.joints[uj].angle, p.joints[uj].angle, 1e-12);
      EXPECT_LT(quat_distance(q.joints[uj].rotation, p.joints[uj].rotation), 1e-10);
    }
  }
}

TEST(Edit, OnlyTheEditedJointChanges) {
  const Skeleton& skel = toy_model().skeleton;
  RomEdit e;
  e.joints["hip_r"] = tilt_and_shrink_edit(-Vec3::UnitZ(), Vec3::UnitX(), 0.5, 0.63);
  const int hip = skel.joint_index("hip_r");
  std::mt19937_64 rng(25);
  for (int k = 0; k < 100; ++k) {
    const Pose p = oracle::random_pose(skel, rng);
    const Pose q = apply_rom_edit(skel, e, p);
    EXPECT_EQ(q.root_rotation.coeffs(), p.root_rotation.coeffs());
    EXPECT_EQ(q.root_translation, p.root_translation);
    for (int j = 0; j < skel.size(); ++j) {
      if (j == hip) continue;
      const auto uj = static_cast<std::size_t>(j);
      EXPECT_EQ(q.joints[uj].angle, p.joints[uj].angle);
      EXPECT_EQ(q.joints[uj].rotation.coeffs(), p.joints[uj].rotation.coeffs());
    }
  }
}

TEST(Edit, InverseUndoesApply) {
  const Skeleton& skel = toy_model().skeleton;
  RomEdit e;
  BallEdit b;
  b.twist_scale = 0.8;
  b.twist_shift = 0.1;
  b.twist_center = 0.05;
  b.cone_scale = 0.7;
  b.cone_center = Vec3(0.2, 0.4, -0.9).normalized();
  b.re_aim = axis_angle(Vec3(1, 1, 0).normalized(), 0.3);
  e.joints["hip_r"] = b;
  e.joints["knee_r"] = RevoluteEdit{1.3, -0.2, 0.4};
  std::mt19937_64 rng(26);
  for (int k = 0; k < 1000; ++k) {
    const Pose p = oracle::random_pose(skel, rng, 1.2);
    const Pose round = invert_rom_edit(skel, e, apply_rom_edit(skel, e, p));
    for (int j = 0; j < skel.size(); ++j) {
      const auto uj = static_cast<std::size_t>(j);
      ASSERT_NEAR(round.joints[uj].angle, p.joints[uj].angle, 1e-10);
      ASSERT_LT(quat_distance(round.joints[uj].rotation, p.joints[uj].rotation), 1e-9) << "sample " << k;
    }
  }
}

TEST(Edit, TiltAndShrinkMapsTargetConeOntoReference) {
  const Vec3 center = Vec3(0.1, 0.3, -0.95).normalized();
  const auto e = tilt_and_shrink_edit(center, Vec3::UnitX(), deg2rad(30.0), 0.63);
  const Vec3 shaft = -Vec3::UnitZ();
  const Vec3 tilted = axis_angle(Vec3::UnitX(), deg2rad(30.0)) * center;
  const Quat at_target_center = minimal_arc(shaft, tilted);
  const Vec3 mapped = detail::apply_ball_edit(e, at_target_center, shaft) * shaft;
  EXPECT_LT((mapped - center).norm(), 1e-12);
  std::mt19937_64 rng(27);
  for (int k = 0; k < 200; ++k) {
    const Vec3 dir = random_quat(rng) * shaft;
    const double polar = std::acos(std::clamp(dir.dot(tilted), -1.0, 1.0));
    if (polar > 0.6 * kPi) continue;
    const Vec3 out = detail::apply_ball_edit(e, minimal_arc(shaft, dir), shaft) * shaft;
    EXPECT_NEAR(std::acos(std::clamp(out.dot(center), -1.0, 1.0)), polar / 0.63, 1e-7);
  }
}

TEST(Grid, ErrorRateIsAMetric) {
  std::mt19937_64 rng(28);
  auto random_grid = [&] {
    RomGrid g;
    g.resolution = {3, 4, 5};
    for (std::size_t i = 0; i < g.resolution.cells(); ++i) g.cells.push_back(static_cast<std::uint8_t>(rng() % 2));
    return g;
  };
  for (int k = 0; k < 50; ++k) {
    const auto a = random_grid(), b = random_grid(), c = random_grid();
    EXPECT_EQ(grid_error_rate(a, a), 0.0);
    EXPECT_EQ(grid_error_rate(a, b), grid_error_rate(b, a));
    EXPECT_LE(grid_error_rate(a, c), grid_error_rate(a, b) + grid_error_rate(b, c) + 1e-12);
    EXPECT_GE(grid_error_rate(a, b), 0.0);
    EXPECT_LE(grid_error_rate(a, b), 100.0);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.cells.size(); ++i) diff += a.cells[i] != b.cells[i];
    EXPECT_DOUBLE_EQ(grid_error_rate(a, b), 100.0 * static_cast<double>(diff) / 60.0);
  }
  RomGrid other;
  other.resolution = {3, 4, 6};
  other.cells.assign(72, 0);
  EXPECT_THROW(grid_error_rate(random_grid(), other), Error);
}

TEST(Grid, CellsMatchDirectValidityChecks) {
  const Model& m = toy_model();
  const Vec3 center = cone_center_from_dataset(m.skeleton, toy_data(), "hip_r");
  GridOptions o;
  o.resolution = {4, 8, 8};
  o.cone_center = center;
  const auto g = rom_grid(m, "hip_r", o);
  ASSERT_EQ(g.cells.size(), 256u);
  const int hip = m.skeleton.joint_index("hip_r");
  const Vec3 shaft = m.skeleton.bone(hip).shaft_axis;
  for (int it = 0; it < 4; ++it)
    for (int ia = 0; ia < 8; ++ia)
      for (int ip = 0; ip < 8; ++ip) {
        Pose p = m.conditioning_pose();
        JointDecomposition d;
        d.twist = -kPi + (it + 0.5) * 2.0 * kPi / 4.0;
        d.cone_dir = cone_direction({(ip + 0.5) * kPi / 8.0, (ia + 0.5) * 2.0 * kPi / 8.0}, center);
        p.joints[static_cast<std::size_t>(hip)].rotation = recompose_rotation(d, shaft);
        EXPECT_EQ(g.cells[static_cast<std::size_t>((it * 8 + ia) * 8 + ip)] != 0, is_valid(m, p))
            << it << " " << ia << " " << ip;
      }
}

TEST(Grid, RevoluteEditScanMatchesDirectEvaluation) {
  const Model& m = toy_model();
  RomEdit e;
  const RevoluteEdit knee{0.5, 0.2, 0.1};
  e.joints["knee_r"] = knee;
  GridOptions o;
  o.resolution = {72, 1, 1};
  o.edit = &e;
  const auto g = rom_grid(m, "knee_r", o);
  const auto plain = rom_grid(m, "knee_r", {.resolution = {72, 1, 1}});
  ASSERT_EQ(g.cells.size(), 72u);
  const int j = m.skeleton.joint_index("knee_r");
  std::size_t differ = 0;
  for (int it = 0; it < 72; ++it) {
    const double theta = -kPi + (it + 0.5) * 2.0 * kPi / 72.0;
    Pose p = m.conditioning_pose();
    p.joints[static_cast<std::size_t>(j)].angle = 0.5 * (theta - 0.1) + 0.1 + 0.2;
    EXPECT_EQ(g.at(it, 0, 0), is_valid(m, p)) << "theta " << theta;
    p.joints[static_cast<std::size_t>(j)].angle = theta;
    EXPECT_EQ(plain.at(it, 0, 0), is_valid(m, p)) << "theta " << theta;
    differ += g.at(it, 0, 0) != plain.at(it, 0, 0);
  }
  EXPECT_GT(differ, 0u);
}

TEST(Grid, HipRangeGrowsWithKneeFlexion) {
  const Model& m = toy_model();
  const Vec3 center = cone_center_from_dataset(m.skeleton, toy_data(), "hip_r");
  const int knee = m.skeleton.joint_index("knee_r");
  std::vector<std::size_t> counts;
  for (double deg : {0.0, 30.0, 60.0, 90.0}) {
    Pose cond = m.conditioning_pose();
    cond.joints[static_cast<std::size_t>(knee)].angle = deg2rad(deg);
    GridOptions o;
    o.resolution = {9, 18, 18};
    o.cone_center = center;
    o.conditioning = cond;
    counts.push_back(rom_grid(m, "hip_r", o).true_count());
  }
  for (std::size_t i = 1; i < counts.size(); ++i) EXPECT_GE(counts[i], counts[i - 1]) << "step " << i;
  EXPECT_GT(counts.back(), counts.front());
}

TEST(Deform, IdentityParametersReproduceTheReference) {
  const Model& ref = toy_model();
  const Skeleton s = apply_skeleton_params(ref.skeleton, SkeletonParams{});
  for (int i = 0; i < ref.skeleton.size(); ++i) {
    const Bone &a = ref.skeleton.bone(i), &b = s.bone(i);
    EXPECT_LT((a.local_offset - b.local_offset).norm(), 1e-15) << a.id;
    EXPECT_LT(quat_distance(a.rest_rotation, b.rest_rotation), 1e-15) << a.id;
    EXPECT_EQ(a.shaft_length, b.shaft_length);
    EXPECT_EQ(a.mass, b.mass);
  }
  const Model naive = naive_retarget(ref, SkeletonParams{});
  for (std::size_t i = 0; i < ref.muscles.size(); ++i) {
    EXPECT_NEAR(naive.muscles[i].l_m0, ref.muscles[i].l_m0, 1e-15);
    EXPECT_NEAR(naive.muscles[i].l_t0, ref.muscles[i].l_t0, 1e-15);
    EXPECT_EQ(naive.muscles[i].waypoints, ref.muscles[i].waypoints);
  }
}

TEST(Deform, ElongationAndTorsionActOnTheShaft) {
  const Model& ref = toy_model();
  SkeletonParams p;
  p.bones["femur"].elongate = 1.3;
  p.bones["femur"].torsion = deg2rad(30.0);
  const Skeleton s = apply_skeleton_params(ref.skeleton, p);
  for (const char* side : {"_l", "_r"}) {
    const int f = ref.skeleton.index_of(std::string("femur") + side);
    const int t = ref.skeleton.index_of(std::string("tibia") + side);
    EXPECT_NEAR(s.bone(f).shaft_length, 1.3 * ref.skeleton.bone(f).shaft_length, 1e-15);
    EXPECT_LT((s.bone(t).local_offset - 1.3 * ref.skeleton.bone(t).local_offset).norm(), 1e-12);
    const Vec3 shaft = ref.skeleton.bone(f).shaft_axis;
    const double expected = std::string(side) == "_l" ? deg2rad(30.0) : -deg2rad(30.0);
    EXPECT_NEAR(s.bone(f).shape.torsion_angle, expected, 1e-15);
    const BoneMap map = bone_map(ref.skeleton.bone(f), s.bone(f).shape);
    const Vec3 radial = shaft.unitOrthogonal() * 0.03;
    const Vec3 distal = shaft * ref.skeleton.bone(f).shaft_length + radial;
    const Vec3 rodrigues = std::cos(expected) * radial + std::sin(expected) * shaft.cross(radial);
    EXPECT_LT((map(distal) - (shaft * 1.3 * ref.skeleton.bone(f).shaft_length + rodrigues)).norm(), 1e-12);
  }
  const int tib = ref.skeleton.index_of("tibia_r");
  EXPECT_EQ(s.bone(tib).shaft_length, ref.skeleton.bone(tib).shaft_length);
}

TEST(Waypoints, DirectionEnergyVanishesAgainstItself) {
  const Model& ref = toy_model();
  for (const auto& m : ref.muscles)
    if (!m.motions.empty()) EXPECT_LE(direction_energy(ref, ref, m.id), 1e-15) << m.id;
}

TEST(Waypoints, OptimizationTracesAreMonotoneAndReduceEnergy) {
  const Model& ref = toy_model();
  SkeletonParams p;
  p.bones["femur"].elongate = 1.2;
  p.bones["femur"].torsion = deg2rad(20.0);
  const Model naive = naive_retarget(ref, p);
  const auto w = optimize_waypoints(naive, ref);
  ASSERT_EQ(w.muscles.size(), ref.muscles.size());
  for (const auto& mo : w.muscles) {
    EXPECT_TRUE(oracle::non_increasing(mo.trace)) << mo.muscle;
    if (!mo.trace.empty()) EXPECT_LE(mo.trace.back(), mo.trace.front()) << mo.muscle;
  }
  const auto r = optimize_fiber_tendon_ratio(estimate_lengths(w.model, toy_data()), ref);
  EXPECT_TRUE(oracle::non_increasing(r.trace));
  for (const auto& m : r.model.muscles) {
    const double rel = m.ratio() / ref.muscle(m.id).ratio();
    EXPECT_GE(rel, 0.7 - 1e-12) << m.id;
    EXPECT_LE(rel, 1.3 + 1e-12) << m.id;
  }
}

TEST(Ratio, TighterBoundIsRespectedAndMaximalLengthKept) {
  const Model& ref = toy_model();
  SkeletonParams p;
  p.bones["femur"].elongate = 0.7;
  const Model target = estimate_lengths(naive_retarget(ref, p), toy_data());
  RatioConfig cfg;
  cfg.bound = 0.1;
  const auto r = optimize_fiber_tendon_ratio(target, ref, cfg);
  EXPECT_TRUE(oracle::non_increasing(r.trace));
  for (std::size_t i = 0; i < target.muscles.size(); ++i) {
    const auto& m = r.model.muscles[i];
    const double rel = m.ratio() / ref.muscle(m.id).ratio();
    EXPECT_GE(rel, 0.9 - 1e-12) << m.id;
    EXPECT_LE(rel, 1.1 + 1e-12) << m.id;
    EXPECT_NEAR(passive_boundary_length(m, r.model.curves), passive_boundary_length(target.muscles[i], target.curves), 1e-12)
        << m.id;
  }
}

TEST(Curves, FunctionalDisorderIsZeroForIdenticalModels) {
  EXPECT_EQ(functional_disorder_rate(toy_model(), toy_model()), 0.0);
}

TEST(Curves, BicepsShortensWithElbowFlexion) {
  const auto c = length_angle_curve(toy_model(), "biceps_l", "elbow_flexion_l", 41);
  EXPECT_EQ(c.characteristics.classification, CurveClass::agonist);
  EXPECT_EQ(c.length.size(), 41u);
  for (std::size_t i = 1; i < c.length.size(); ++i) EXPECT_LT(c.length[i], c.length[i - 1]);
}

TEST(Pipeline, IdentityRunKeepsTheReferenceGrid) {
  PipelineConfig cfg;
  cfg.resolution = kSmall;
  const auto r = retarget_pipeline(toy_model(), SkeletonParams{}, toy_data(), nullptr, cfg);
  ASSERT_TRUE(r.report.error.empty()) << r.report.error;
  EXPECT_EQ(r.report.stages_completed, 3);
  ASSERT_EQ(r.report.grids.size(), 1u);
  EXPECT_EQ(r.report.grids[0].unretargeted, 0.0);
  EXPECT_LE(r.report.grids[0].retargeted, 1.0);
  for (const auto& p : toy_data().poses) ASSERT_TRUE(is_valid(r.model, p));
}
