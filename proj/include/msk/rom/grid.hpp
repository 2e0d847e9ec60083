#pragma once

#include "msk/rom/dataset.hpp"
#include "msk/rom/edit.hpp"

#include <array>

namespace msk {

struct GridResolution {
  int twist = 18;
  int azimuth = 36;
  int polar = 36;

  std::size_t cells() const {
    return static_cast<std::size_t>(twist) * static_cast<std::size_t>(azimuth) * static_cast<std::size_t>(polar);
  }
  bool operator==(const GridResolution&) const = default;
};

/// Boolean validity over a joint's configuration space. Ball joints are sampled
/// on twist x cone-azimuth x cone-polar cell centers (polar measured from
/// `cone_center`); revolute joints use a 1-D grid over (-pi, pi] stored in the
/// twist dimension.
struct RomGrid {
  std::string joint;
  GridResolution resolution;
  Vec3 cone_center = -Vec3::UnitZ();
  Pose conditioning;
  std::vector<std::uint8_t> cells;

  std::size_t index(int it, int ia, int ip) const {
    return (static_cast<std::size_t>(it) * static_cast<std::size_t>(resolution.azimuth) +
            static_cast<std::size_t>(ia)) *
               static_cast<std::size_t>(resolution.polar) +
           static_cast<std::size_t>(ip);
  }
  bool at(int it, int ia, int ip) const { return cells[index(it, ia, ip)] != 0; }
  std::size_t true_count() const {
    std::size_t n = 0;
    for (auto c : cells) n += c != 0;
    return n;
  }
};

inline double grid_twist_center(const GridResolution& r, int it) { return -kPi + (it + 0.5) * 2.0 * kPi / r.twist; }
inline double grid_azimuth_center(const GridResolution& r, int ia) { return (ia + 0.5) * 2.0 * kPi / r.azimuth; }
inline double grid_polar_center(const GridResolution& r, int ip) { return (ip + 0.5) * kPi / r.polar; }

/// Joint rotation at a ball-joint grid cell center.
inline Quat grid_cell_rotation(const GridResolution& r, const Vec3& cone_center, const Vec3& shaft, int it, int ia,
                               int ip) {
  JointDecomposition d;
  d.twist = grid_twist_center(r, it);
  d.cone_dir = cone_direction({grid_polar_center(r, ip), grid_azimuth_center(r, ia)}, cone_center);
  return recompose_rotation(d, shaft);
}

/// Normalized spherical mean of the joint's cone direction over a dataset.
inline Vec3 cone_center_from_dataset(const Skeleton& skel, const PoseDataset& dataset, std::string_view joint) {
  const int j = skel.joint_index(joint);
  const Bone& b = skel.bone(j);
  if (b.joint_type == JointType::free_root) throw Error("cone center: joint '" + std::string(joint) + "' is the free root");
  if (b.joint_type == JointType::revolute) return b.shaft_axis;
  Vec3 sum = Vec3::Zero();
  for (const auto& p : dataset.poses) sum += p.joints[static_cast<std::size_t>(j)].rotation * b.shaft_axis;
  if (sum.norm() < 1e-12) return b.shaft_axis;
  return sum.normalized();
}

struct GridOptions {
  GridResolution resolution;
  std::optional<Pose> conditioning;   // default: the model's conditioning pose
  std::optional<Vec3> cone_center;    // default: the bone's shaft axis
  const RomEdit* edit = nullptr;      // sample V(T(q)) instead of V(q)
};

/// Samples validity at every cell center with all other joints at the
/// conditioning pose. Muscles that do not cross the joint are evaluated once.
inline RomGrid rom_grid(const Model& model, std::string_view joint, const GridOptions& opt = {}) {
  const Skeleton& skel = model.skeleton;
  const int j = skel.joint_index(joint);
  const Bone& bone = skel.bone(j);
  if (bone.joint_type == JointType::free_root) throw Error("rom_grid: joint '" + std::string(joint) + "' is the free root");
  if (opt.edit) validate_edit(skel, *opt.edit);

  RomGrid g;
  g.joint = bone.joint;
  g.resolution = opt.resolution;
  if (bone.joint_type == JointType::revolute) g.resolution.azimuth = g.resolution.polar = 1;
  if (g.resolution.twist < 1 || g.resolution.azimuth < 1 || g.resolution.polar < 1)
    throw Error("rom_grid: resolution must be positive");
  g.cone_center = (opt.cone_center ? *opt.cone_center : bone.shaft_axis).normalized();
  g.conditioning = opt.conditioning ? *opt.conditioning : model.conditioning_pose();
  validate_pose(skel, g.conditioning);
  g.cells.assign(g.resolution.cells(), 0);

  // Split muscles into those spanning the joint and those fixed by the conditioning pose.
  std::vector<const MusculotendonUnit*> crossing;
  bool fixed_ok = true;
  {
    Pose base = g.conditioning;
    if (opt.edit) base = detail::transform_pose<false>(skel, *opt.edit, base);
    const auto world = world_transforms(skel, base);
    for (const auto& m : model.muscles) {
      bool inside = false, outside = false;
      for (const auto& wp : m.waypoints)
        for (const auto& s : wp.skin) (skel.is_ancestor(j, s.bone) ? inside : outside) = true;
      if (inside && outside)
        crossing.push_back(&m);
      else if (!within_passive_limit(m, model.curves, musculotendon_length(m, world)))
        fixed_ok = false;
    }
  }
  if (!fixed_ok) return g;

  auto cell_valid = [&](Pose pose) {
    if (opt.edit) pose = detail::transform_pose<false>(skel, *opt.edit, pose);
    const auto world = world_transforms(skel, pose);
    for (const auto* m : crossing)
      if (!within_passive_limit(*m, model.curves, musculotendon_length(*m, world))) return false;
    return true;
  };

  Pose pose = g.conditioning;
  auto& coord = pose.joints[static_cast<std::size_t>(j)];
  for (int it = 0; it < g.resolution.twist; ++it)
    for (int ia = 0; ia < g.resolution.azimuth; ++ia)
      for (int ip = 0; ip < g.resolution.polar; ++ip) {
        if (bone.joint_type == JointType::revolute)
          coord.angle = grid_twist_center(g.resolution, it);
        else
          coord.rotation = grid_cell_rotation(g.resolution, g.cone_center, bone.shaft_axis, it, ia, ip);
        g.cells[g.index(it, ia, ip)] = cell_valid(pose) ? 1 : 0;
      }
  return g;
}

/// Percentage of cells on which two grids disagree.
inline double grid_error_rate(const RomGrid& a, const RomGrid& b) {
  if (!(a.resolution == b.resolution) || a.cells.size() != b.cells.size())
    throw Error("grid_error_rate: resolution mismatch");
  if (a.cells.empty()) return 0.0;
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) diff += (a.cells[i] != 0) != (b.cells[i] != 0);
  return 100.0 * static_cast<double>(diff) / static_cast<double>(a.cells.size());
}

}  // namespace msk
