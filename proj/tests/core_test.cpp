#include "msk/dynamics/coordination.hpp"
#include "msk/retarget/deform.hpp"
#include "msk/toy/toy_model.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace msk;

namespace {

const Model& toy_model() {
  static const Model m = toy::make_toy_model();
  return m;
}

Eigen::Matrix4d homogeneous(const Quat& q, const Vec3& t) {
  Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
  h.topLeftCorner<3, 3>() = q.toRotationMatrix();
  h.topRightCorner<3, 1>() = t;
  return h;
}

Vec3 apply(const Eigen::Matrix4d& h, const Vec3& x) { return (h * x.homogeneous()).head<3>(); }

Vec3 log_rotation(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.axis() * aa.angle();
}

Model pendulum() {
  using toy::make_bone;
  Model m;
  m.name = "pendulum";
  m.skeleton = Skeleton({make_bone("base", "", JointType::free_root, Vec3::Zero(), -Vec3::UnitZ(), 0.2, 5.0),
                         make_bone("upper", "base", JointType::revolute, {0, 0, -0.2}, -Vec3::UnitZ(), 0.5, 2.0),
                         make_bone("lower", "upper", JointType::revolute, {0, 0, -0.5}, -Vec3::UnitZ(), 0.4, 1.5,
                                   Vec3(0.3, 1.0, 0.0).normalized())});
  return m;
}

double net_torque_oracle(const Model& model, const JointMotion& motion, double theta) {
  const Pose base = model.conditioning_pose();
  const double h = 1e-6;
  const double angle = motion.angle_at(theta);
  const int j = model.skeleton.joint_index(motion.joint);
  const Bone& b = model.skeleton.bone(j);
  auto at = [&](double a) {
    Pose p = base;
    auto& c = p.joints[static_cast<std::size_t>(j)];
    if (b.joint_type == JointType::revolute) c.angle = a;
    else c.rotation = axis_angle(motion.axis, a);
    return p;
  };
  double tau = 0.0;
  for (const auto& m : model.muscles) {
    if (std::find(m.motions.begin(), m.motions.end(), motion.id) == m.motions.end()) continue;
    const double l = musculotendon_length(m, model.skeleton, at(angle));
    const double dl = (musculotendon_length(m, model.skeleton, at(angle + h)) -
                       musculotendon_length(m, model.skeleton, at(angle - h))) / (2.0 * h);
    const auto s = oracle::hill_bisection(m, model.curves, l, 1.0);
    const double f = s.bracketed ? s.force : fiber_equilibrium(m, model.curves, l, 1.0).force;
    tau += -dl * f;
  }
  return motion.direction() * tau;
}

}  // namespace

TEST(Kinematics, WorldTransformsComposeOffsetRestAndJointRotation) {
  const Skeleton& skel = toy_model().skeleton;
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Pose pose = oracle::random_pose(skel, rng);
    const auto world = world_transforms(skel, pose);
    std::vector<Eigen::Matrix4d> ref(static_cast<std::size_t>(skel.size()));
    for (int i = 0; i < skel.size(); ++i) {
      const Bone& b = skel.bone(i);
      const auto ui = static_cast<std::size_t>(i);
      if (b.joint_type == JointType::free_root) {
        ref[ui] = homogeneous(pose.root_rotation, pose.root_translation);
        continue;
      }
      const Quat q = b.joint_type == JointType::revolute ? Quat(Eigen::AngleAxisd(pose.joints[ui].angle, b.joint_axis))
                                                         : pose.joints[ui].rotation;
      ref[ui] = ref[static_cast<std::size_t>(skel.parent(i))] * homogeneous(Quat::Identity(), b.local_offset) *
                homogeneous(b.rest_rotation, Vec3::Zero()) * homogeneous(q, Vec3::Zero());
    }
    for (int i = 0; i < skel.size(); ++i)
      EXPECT_LT((world[static_cast<std::size_t>(i)].matrix() - ref[static_cast<std::size_t>(i)]).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Kinematics, FlexedKneePlacesAnkleAlongRotatedShaft) {
  const Skeleton& skel = toy_model().skeleton;
  Pose pose = skel.rest_pose();
  const int tibia = skel.index_of("tibia_r");
  pose.joints[static_cast<std::size_t>(tibia)].angle = kPi / 2.0;
  const auto world = world_transforms(skel, pose);
  const Bone& b = skel.bone(tibia);
  const Vec3 knee = world[static_cast<std::size_t>(tibia)].translation();
  const Vec3 expected = knee + Quat(Eigen::AngleAxisd(kPi / 2.0, b.joint_axis)) * (b.shaft_axis * b.shaft_length);
  EXPECT_LT((world[static_cast<std::size_t>(tibia)] * (b.shaft_axis * b.shaft_length) - expected).norm(), 1e-12);
  EXPECT_NEAR(((world[static_cast<std::size_t>(tibia)] * (b.shaft_axis * b.shaft_length)) - knee).norm(), b.shaft_length, 1e-12);
}

TEST(Kinematics, WaypointBlendsBoneTransformsByWeight) {
  const Skeleton& skel = toy_model().skeleton;
  std::mt19937_64 rng(2);
  const int a = skel.index_of("femur_l"), b = skel.index_of("tibia_l");
  Waypoint wp{{{a, 0.3, Vec3(0.01, 0.02, -0.4)}, {b, 0.7, Vec3(-0.01, 0.03, 0.02)}}};
  for (int trial = 0; trial < 20; ++trial) {
    const Pose pose = oracle::random_pose(skel, rng);
    const auto world = world_transforms(skel, pose);
    const Vec3 expect = 0.3 * (world[static_cast<std::size_t>(a)].linear() * wp.skin[0].local +
                               world[static_cast<std::size_t>(a)].translation()) +
                        0.7 * (world[static_cast<std::size_t>(b)].linear() * wp.skin[1].local +
                               world[static_cast<std::size_t>(b)].translation());
    EXPECT_LT((waypoint_position(wp, world) - expect).norm(), 1e-14);
  }
}

TEST(Kinematics, PathLengthIsSegmentSumAndAtLeastChord) {
  const Model& model = toy_model();
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Pose pose = oracle::random_pose(model.skeleton, rng);
    const auto world = world_transforms(model.skeleton, pose);
    for (const auto& m : model.muscles) {
      const auto pts = waypoint_positions(m, world);
      double sum = 0.0;
      for (std::size_t k = 1; k < pts.size(); ++k) sum += (pts[k] - pts[k - 1]).norm();
      const double l = musculotendon_length(m, world);
      EXPECT_NEAR(l, sum, 1e-14) << m.id;
      EXPECT_GE(l, (pts.back() - pts.front()).norm() - 1e-14) << m.id;
    }
  }
}

TEST(Hill, DefaultExtensionRatios) {
  EXPECT_EQ(MusculotendonUnit{}.k_m, 1.6);
  EXPECT_EQ(MusculotendonUnit{}.k_t, 1.03);
  for (const auto& m : toy_model().muscles) {
    EXPECT_EQ(m.k_m, 1.6) << m.id;
    EXPECT_EQ(m.k_t, 1.03) << m.id;
  }
}

TEST(Hill, EquilibriumMatchesBisection) {
  const Model& model = toy_model();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int compared = 0;
  for (int k = 0; k < 2000; ++k) {
    const auto& m = model.muscles[static_cast<std::size_t>(k) % model.muscles.size()];
    const double a = k % 7 == 0 ? 0.0 : U(rng);
    const double l_mt = m.l_t0 + (0.3 + 1.5 * U(rng)) * m.l_m0;
    const auto s = fiber_equilibrium(m, model.curves, l_mt, a);
    const auto o = oracle::hill_bisection(m, model.curves, l_mt, a);
    if (!o.bracketed) continue;
    ++compared;
    EXPECT_LE(s.residual, 1e-8) << m.id << " l_mt " << l_mt << " a " << a;
    EXPECT_LE(std::abs(s.force - o.force), 1e-8 * m.f_max) << m.id << " l_mt " << l_mt << " a " << a;
    EXPECT_NEAR(s.tendon_length + s.fiber_length * std::cos(m.pennation), l_mt, 1e-12);
  }
  EXPECT_GT(compared, 1000);
}

TEST(Hill, SlackTendonCarriesNoPassiveForce) {
  const auto& m = toy_model().muscles.front();
  const double l_mt = m.l_t0 + 0.8 * m.l_m0 * std::cos(m.pennation);
  const auto s = fiber_equilibrium(m, toy_model().curves, l_mt, 0.0);
  EXPECT_NEAR(s.force, 0.0, 1e-9 * m.f_max);
  EXPECT_DOUBLE_EQ(s.tendon_length, m.l_t0);
}

TEST(Hill, ForceIsMonotoneInActivation) {
  const Model& model = toy_model();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const auto& m : model.muscles) {
    for (int k = 0; k < 5; ++k) {
      const double l_mt = m.l_t0 + (0.6 + 0.9 * U(rng)) * m.l_m0;
      double prev = -1.0;
      for (int i = 0; i <= 20; ++i) {
        const double f = fiber_equilibrium(m, model.curves, l_mt, i / 20.0).force;
        EXPECT_GE(f, prev - 1e-9 * m.f_max) << m.id;
        prev = f;
      }
    }
  }
}

TEST(Jacobian, MatchesFiniteDifferenceOfLengthThroughIntegrate) {
  const Model& model = toy_model();
  const Skeleton& skel = model.skeleton;
  std::mt19937_64 rng(6);
  const int n = skel.dof_count();
  const double h = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    const Pose pose = oracle::random_pose(skel, rng);
    for (const auto& m : model.muscles) {
      const VecX J = muscle_jacobian(model, m, pose);
      ASSERT_EQ(J.size(), n);
      for (int i = 0; i < n; ++i) {
        VecX e = VecX::Zero(n);
        e[i] = h;
        const double up = musculotendon_length(m, skel, integrate(skel, pose, e));
        const double dn = musculotendon_length(m, skel, integrate(skel, pose, -e));
        EXPECT_NEAR(J[i], -(up - dn) / (2.0 * h), 1e-6) << m.id << " dof " << i;
      }
    }
  }
}

TEST(Jacobian, MomentArmEqualsTendonExcursion) {
  const Model& model = toy_model();
  const Skeleton& skel = model.skeleton;
  std::mt19937_64 rng(7);
  const double h = 1e-6;
  int checks = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Pose pose = oracle::random_pose(skel, rng, 0.5);
    for (const auto& m : model.muscles)
      for (int j = 1; j < skel.size(); ++j) {
        const Bone& b = skel.bone(j);
        if (b.joint_type == JointType::free_root) continue;
        const std::vector<Vec3> axes =
            b.joint_type == JointType::revolute ? std::vector<Vec3>{b.joint_axis}
                                                : std::vector<Vec3>{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
        for (const auto& axis : axes) {
          auto len = [&](double d) {
            Pose p = pose;
            auto& c = p.joints[static_cast<std::size_t>(j)];
            if (b.joint_type == JointType::revolute) c.angle += d;
            else c.rotation = axis_angle(axis, d) * c.rotation;
            return musculotendon_length(m, skel, p);
          };
          const auto r = moment_arm(model, m, b.joint, axis, pose);
          if (!r) continue;
          ++checks;
          EXPECT_NEAR(*r, -(len(h) - len(-h)) / (2.0 * h), 1e-4) << m.id << " @ " << b.joint;
        }
      }
  }
  EXPECT_GT(checks, 1000);
}

TEST(RigidBody, MassMatrixIsSymmetricPositiveDefinite) {
  const Model& model = toy_model();
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const MatX M = mass_matrix(model, oracle::random_pose(model.skeleton, rng));
    EXPECT_LT((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    const Eigen::SelfAdjointEigenSolver<MatX> eig(M);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(RigidBody, KineticEnergyMatchesBodyVelocities) {
  const Model& model = toy_model();
  const Skeleton& skel = model.skeleton;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int n = skel.dof_count();
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const Pose pose = oracle::random_pose(skel, rng);
    VecX qd(n);
    for (int i = 0; i < n; ++i) qd[i] = U(rng);
    const auto up = world_transforms(skel, integrate(skel, pose, h * qd));
    const auto dn = world_transforms(skel, integrate(skel, pose, -h * qd));
    const auto now = world_transforms(skel, pose);
    double ke = 0.0;
    for (int b = 0; b < skel.size(); ++b) {
      const auto ub = static_cast<std::size_t>(b);
      const Bone& bone = skel.bone(b);
      const Vec3 v = (up[ub] * bone.com - dn[ub] * bone.com) / (2.0 * h);
      const Vec3 w_world = log_rotation(up[ub].linear() * dn[ub].linear().transpose()) / (2.0 * h);
      const Vec3 w_body = now[ub].linear().transpose() * w_world;
      ke += 0.5 * bone.mass * v.squaredNorm() + 0.5 * w_body.dot(bone.inertia * w_body);
    }
    EXPECT_NEAR(kinetic_energy(model, pose, qd), ke, 1e-6 * std::max(1.0, ke));
  }
}

TEST(RigidBody, GravityIsGradientOfPotentialEnergy) {
  const Model& model = toy_model();
  const Skeleton& skel = model.skeleton;
  std::mt19937_64 rng(10);
  const int n = skel.dof_count();
  const double h = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    const Pose pose = oracle::random_pose(skel, rng);
    const VecX G = inverse_dynamics(model, pose, VecX::Zero(n), VecX::Zero(n));
    for (int i = 0; i < n; ++i) {
      VecX e = VecX::Zero(n);
      e[i] = h;
      const double dv = (potential_energy(model, integrate(skel, pose, e)) - potential_energy(model, integrate(skel, pose, -e))) / (2.0 * h);
      EXPECT_NEAR(G[i], dv, 1e-5 * std::max(1.0, G.cwiseAbs().maxCoeff())) << "dof " << i;
    }
  }
}

TEST(RigidBody, PendulumEnergyRateEqualsPower) {
  const Model model = pendulum();
  const Skeleton& skel = model.skeleton;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int n = skel.dof_count();
  ASSERT_EQ(n, 8);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const Pose pose = oracle::random_pose(skel, rng, 1.5);
    DynamicsState s = DynamicsState::at_rest(skel, pose);
    VecX tau(n);
    for (int i = 0; i < n; ++i) {
      s.velocity[i] = U(rng);
      tau[i] = 5.0 * U(rng);
    }
    const VecX qdd = forward_dynamics(model, s, tau);
    auto energy = [&](double t) {
      const Pose p = integrate(skel, pose, t * s.velocity);
      return kinetic_energy(model, p, s.velocity + t * qdd) + potential_energy(model, p);
    };
    const double rate = (energy(h) - energy(-h)) / (2.0 * h);
    const double power = s.velocity.dot(tau);
    EXPECT_NEAR(rate, power, 1e-4 * std::max(1.0, std::abs(power))) << "trial " << trial;
  }
}

TEST(BoxQp, MatchesEnumerationAndSatisfiesKkt) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int k = 0; k < 60; ++k) {
    const int n = 1 + k % 6;
    MatX B(n, n);
    VecX g(n), lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) B(i, j) = U(rng);
      g[i] = 2.0 * U(rng);
      lo[i] = -0.5 + 0.4 * U(rng);
      hi[i] = lo[i] + 0.1 + std::abs(U(rng));
    }
    const MatX H = B * B.transpose() + 0.1 * MatX::Identity(n, n);
    const auto r = solve_box_qp(H, g, lo, hi);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.kkt_residual, 1e-6);
    EXPECT_TRUE((r.x.array() >= lo.array()).all() && (r.x.array() <= hi.array()).all());
    EXPECT_LT((r.x - oracle::box_qp_enumerate(H, g, lo, hi)).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

TEST(BoxQp, RejectsEmptyBox) {
  EXPECT_THROW(solve_box_qp(MatX::Identity(1, 1), VecX::Zero(1), VecX::Ones(1), VecX::Zero(1)), Error);
}

TEST(MuscleQp, SingleMuscleMatchesClampedClosedForm) {
  const Model& model = toy_model();
  Model single = model;
  single.muscles = {model.muscle("biceps_l")};
  const auto state = DynamicsState::at_rest(single.skeleton, single.conditioning_pose());
  const int n = single.skeleton.dof_count();
  const auto base = build_muscle_qp(single, state, VecX::Zero(n));
  const VecX A = base.A.col(0);
  ASSERT_GT(A.norm(), 0.0);
  for (double w : {0.0, 0.01, 1.0})
    for (double s : {-0.5, 0.0, 0.3, 0.7, 1.0, 2.0}) {
      const VecX qdd = base.qdd_passive + s * A;
      const auto r = solve_muscle_qp(single, state, qdd, w);
      const double expect = std::clamp(A.dot(qdd - base.qdd_passive) / (A.squaredNorm() + w), 0.0, 1.0);
      EXPECT_NEAR(r.activation[0], expect, 1e-8) << "w " << w << " s " << s;
      EXPECT_LT((r.qdd - (base.qdd_passive + r.activation[0] * A)).norm(), 1e-9 * std::max(1.0, r.qdd.norm()));
    }
}

TEST(MuscleQp, AffineMapMatchesForwardDynamicsOfLinearizedTension) {
  const Model& model = toy_model();
  const Skeleton& skel = model.skeleton;
  const auto state = DynamicsState::at_rest(skel, model.conditioning_pose());
  const int n = skel.dof_count();
  const auto p = build_muscle_qp(model, state, VecX::Zero(n));
  const auto world = world_transforms(skel, state.pose);
  VecX a(static_cast<Eigen::Index>(model.muscles.size()));
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = U(rng);
  VecX tau = VecX::Zero(n);
  for (std::size_t i = 0; i < model.muscles.size(); ++i) {
    const auto& m = model.muscles[i];
    const auto lin = linearize_tension(m, model.curves, musculotendon_length(m, world));
    tau += muscle_jacobian(m, skel, world) * (lin.passive + a[static_cast<Eigen::Index>(i)] * lin.active);
  }
  const VecX expect = forward_dynamics(model, state, tau);
  EXPECT_LT((p.qdd_passive + p.A * a - expect).norm(), 1e-8 * std::max(1.0, expect.norm()));
}

TEST(MuscleQp, CoordinationSatisfiesKktAndBounds) {
  const Model& model = toy_model();
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int n = model.skeleton.dof_count();
  const auto poses = toy::toy_dataset(model.skeleton, {.poses = 10, .seed = 15, .mirror = false}).poses;
  for (const auto& pose : poses) {
    auto state = DynamicsState::at_rest(model.skeleton, pose);
    VecX qdd(n);
    for (int i = 0; i < n; ++i) {
      state.velocity[i] = 0.5 * U(rng);
      qdd[i] = 5.0 * U(rng);
    }
    const auto r = coordinate_muscles(model, state, qdd, 0.01);
    EXPECT_LE(r.muscles.kkt_residual, 1e-6);
    EXPECT_TRUE((r.muscles.activation.a.array() >= 0.0).all() && (r.muscles.activation.a.array() <= 1.0).all());
    EXPECT_LE(r.limits.complementarity, 1e-6);
    EXPECT_LE(r.limits.infeasibility, 1e-6);
  }
}

TEST(Lcp, MatchesEnumerationOnRandomProblems) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + k % 6;
    MatX B(n, n);
    VecX b(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) B(i, j) = U(rng);
      b[i] = U(rng);
    }
    const MatX A = B * B.transpose() + 0.1 * MatX::Identity(n, n);
    const auto r = solve_lcp(A, b);
    const auto ref = oracle::lcp_enumerate(A, b);
    ASSERT_TRUE(ref.has_value());
    EXPECT_LT((r.f - *ref).lpNorm<Eigen::Infinity>(), 1e-8) << "problem " << k;
    EXPECT_LE(r.complementarity, 1e-6);
    EXPECT_LE(r.infeasibility, 1e-6);
    EXPECT_TRUE(r.converged);
  }
}

TEST(Scaling, DoublingLengthScalesMassInertiaAndForce) {
  const Model& m = toy_model();
  ScalingFactors f;
  const Model s = scale_physics(m, 2.0, &f);
  EXPECT_EQ(f.mass, 8.0);
  EXPECT_EQ(f.inertia, 32.0);
  EXPECT_EQ(f.force, 8.0);
  EXPECT_DOUBLE_EQ(f.time, std::sqrt(2.0));
  for (int i = 0; i < m.skeleton.size(); ++i) {
    EXPECT_EQ(s.skeleton.bone(i).mass, 8.0 * m.skeleton.bone(i).mass);
    EXPECT_TRUE(s.skeleton.bone(i).inertia == 32.0 * m.skeleton.bone(i).inertia);
  }
  for (std::size_t i = 0; i < m.muscles.size(); ++i) EXPECT_EQ(s.muscles[i].f_max, 8.0 * m.muscles[i].f_max);
}

TEST(TorqueAngle, PeakMatchesDenseScanOfExcursionTorque) {
  const Model& model = toy_model();
  for (const char* id : {"knee_flexion_r", "elbow_flexion_l", "hip_flexion_r"}) {
    const auto& motion = model.motion(id);
    const auto c = torque_angle_curve(model, motion, 41);
    for (std::size_t i = 0; i < c.theta.size(); ++i)
      EXPECT_NEAR(c.torque[i], net_torque_oracle(model, motion, c.theta[i]), 1e-3 * std::max(1.0, std::abs(c.torque[i])))
          << id << " theta " << c.theta[i];
    const int dense = 801;
    double best = -std::numeric_limits<double>::infinity(), best_theta = 0.0;
    for (int i = 0; i < dense; ++i) {
      const double t = static_cast<double>(i) / (dense - 1);
      const double v = net_torque_oracle(model, motion, t);
      if (v > best) {
        best = v;
        best_theta = t;
      }
    }
    EXPECT_FALSE(c.flat) << id;
    EXPECT_NEAR(c.peak_theta, best_theta, 0.0125) << id;
  }
}

TEST(Characteristics, RefinedArgmaxRecoversParabolaVertex) {
  std::vector<double> y;
  for (int i = 0; i <= 40; ++i) {
    const double t = i / 40.0;
    y.push_back(-(t - 0.4137) * (t - 0.4137));
  }
  const auto e = refined_argmax(y);
  EXPECT_NEAR(e.theta, 0.4137, 1e-12);
  EXPECT_FALSE(e.flat);
  EXPECT_TRUE(refined_argmax(std::vector<double>(5, 1.0)).flat);
  EXPECT_EQ(classify_curve(std::vector<double>{3, 2, 1}), CurveClass::agonist);
  EXPECT_EQ(classify_curve(std::vector<double>{1, 2, 3}), CurveClass::antagonist);
  EXPECT_EQ(classify_curve(std::vector<double>{1, 3, 2}), CurveClass::non_monotonic);
}
