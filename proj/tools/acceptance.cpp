#include "msk/dynamics/coordination.hpp"
#include "msk/io/grid_io.hpp"
#include "msk/retarget/pipeline.hpp"
#include "msk/service/http.hpp"
#include "msk/toy/toy_model.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace msk;

namespace {

int failures = 0;

void line(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

class Timer {
public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const Model& toy() {
  static const Model m = toy::make_toy_model();
  return m;
}

const PoseDataset& dataset() {
  static const PoseDataset d = toy::toy_dataset(toy().skeleton);
  return d;
}

void tendon_excursion() {
  Timer t;
  const Model& model = toy();
  const Skeleton& skel = model.skeleton;
  const auto poses = toy::toy_dataset(skel, {.poses = 100, .seed = 101, .mirror = false}).poses;
  const double h = 1e-6;
  double worst = 0.0;
  std::size_t checks = 0, skipped = 0;
  for (const auto& pose : poses) {
    for (const auto& m : model.muscles) {
      for (int j = 0; j < skel.size(); ++j) {
        const Bone& b = skel.bone(j);
        if (b.joint_type == JointType::free_root) continue;
        std::vector<Vec3> axes;
        if (b.joint_type == JointType::revolute) axes = {b.joint_axis};
        else axes = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
        for (const auto& axis : axes) {
          auto length_at = [&](double d) {
            Pose p = pose;
            auto& c = p.joints[static_cast<std::size_t>(j)];
            if (b.joint_type == JointType::revolute) c.angle += d;
            else c.rotation = (axis_angle(axis, d) * c.rotation).normalized();
            return musculotendon_length(m, skel, p);
          };
          const auto r = moment_arm(model, m, b.joint, axis, pose);
          if (!r) {
            ++skipped;
            continue;
          }
          const double fd = -(length_at(h) - length_at(-h)) / (2.0 * h);
          worst = std::max(worst, std::abs(*r - fd));
          ++checks;
        }
      }
    }
  }
  const double s = t.seconds();
  line("tendon-excursion", worst <= 1e-4 && s < 10.0 && checks > 0,
       fmt("%zu checks (%zu without tension), max |r + dl/dtheta| = %.3g m, %.2f s", checks, skipped, worst, s));
}

void dataset_validity() {
  Timer t;
  const Model skeleton_model = toy::make_toy_skeleton_model();
  const auto data = toy::toy_dataset(skeleton_model.skeleton, {.poses = 5000, .seed = 7, .mirror = true});
  const Model fitted = estimate_lengths(skeleton_model, data);
  std::size_t valid = 0;
  for (const auto& p : data.poses) valid += is_valid(fitted, p);
  const double s = t.seconds();
  line("dataset-validity", valid == data.poses.size() && data.poses.size() == 5000 && s < 30.0,
       fmt("%zu / %zu poses valid, %.2f s", valid, data.poses.size(), s));
}

struct SweepRun {
  double elongate = 1.0, torsion_deg = 0.0;
  RetargetResult result;
};

std::vector<SweepRun> rom_sweep() {
  Timer t;
  std::vector<SweepRun> runs;
  bool ok = true;
  std::ostringstream detail;
  for (double el : {0.7, 1.0, 1.3})
    for (double tor : {-30.0, 0.0, 30.0}) {
      SkeletonParams p;
      p.bones["femur"].elongate = el;
      p.bones["femur"].torsion = deg2rad(tor);
      SweepRun run{el, tor, retarget_pipeline(toy(), p, dataset())};
      const auto& rep = run.result.report;
      const bool identity = el == 1.0 && tor == 0.0;
      bool here = rep.error.empty() && rep.grids.size() == 1;
      if (here) {
        const auto& g = rep.grids.front();
        here = g.retargeted <= 5.0 && (identity || g.unretargeted > g.retargeted);
        detail << fmt(" [%.1f,%+.0f] %.2f%%->%.2f%%", el, tor, g.unretargeted, g.retargeted);
      } else {
        detail << fmt(" [%.1f,%+.0f] error '%s'", el, tor, rep.error.c_str());
      }
      ok = ok && here;
      runs.push_back(std::move(run));
    }
  const double s = t.seconds();
  line("rom-preservation", ok && s < 600.0, "hip_r 18x36x36 unretargeted->retargeted:" + detail.str() + fmt(", %.1f s", s));
  return runs;
}

void rom_edit() {
  Timer t;
  const Vec3 center = cone_center_from_dataset(toy().skeleton, dataset(), "hip_r");
  RomEdit edit;
  edit.joints["hip_r"] = tilt_and_shrink_edit(center, Vec3::UnitX(), deg2rad(30.0), 0.63);
  const auto r = retarget_pipeline(toy(), SkeletonParams{}, dataset(), &edit);
  const double s = t.seconds();
  const bool ok = r.report.error.empty() && r.report.grids.size() == 1 && r.report.grids[0].retargeted <= 10.0 && s < 300.0;
  line("rom-edit", ok,
       r.report.grids.empty() ? "no grid: " + r.report.error
                              : fmt("tilt 30 deg, cone scale 0.63: grid error vs edited target %.2f%% (before %.2f%%), %.1f s",
                                    r.report.grids[0].retargeted, r.report.grids[0].unretargeted, s));
}

void optimizer_descent(const std::vector<SweepRun>& runs) {
  std::size_t traces = 0, bad = 0;
  for (const auto& run : runs) {
    for (const auto& mo : run.result.report.waypoints) {
      ++traces;
      bad += !oracle::non_increasing(mo.trace);
    }
    ++traces;
    bad += !oracle::non_increasing(run.result.report.ratio_trace);
  }

  SkeletonParams p;
  p.bones["humerus"].elongate = 0.6;
  p.bones["ulna"].elongate = 0.6;
  PipelineConfig cfg;
  cfg.grid_joints.clear();
  const auto r = retarget_pipeline(toy(), p, dataset(), nullptr, cfg);
  for (const auto& mo : r.report.waypoints) {
    ++traces;
    bad += !oracle::non_increasing(mo.trace);
  }
  ++traces;
  bad += !oracle::non_increasing(r.report.ratio_trace);

  auto cls = [](const Model& m) {
    return length_angle_curve(m, "biceps_l", "elbow_flexion_l", 41).characteristics.classification;
  };
  const auto ref = cls(toy()), naive = cls(r.naive), after = cls(r.model);
  const bool restored = ref == CurveClass::agonist && naive != ref && after == ref;
  line("optimizer-descent", bad == 0 && restored && r.report.error.empty(),
       fmt("%zu/%zu energy traces non-increasing; arm x0.6 biceps_l elbow_flexion_l: reference %s, unretargeted %s, "
           "retargeted %s",
           traces - bad, traces, std::string(to_string(ref)).c_str(), std::string(to_string(naive)).c_str(),
           std::string(to_string(after)).c_str()));
}

void peak_torque(const std::vector<SweepRun>& runs) {
  double worst_shift = 0.0, worst_ratio = 0.0;
  bool ok = true;
  for (const auto& run : runs) {
    const auto& rep = run.result.report;
    bool knee = false;
    for (const auto& pk : rep.peaks)
      if (pk.motion.starts_with("knee_flexion")) {
        knee = true;
        worst_shift = std::max(worst_shift, std::abs(pk.after - pk.reference));
      }
    ok = ok && knee;
    for (const auto& m : run.result.model.muscles) {
      const double rel = m.ratio() / toy().muscle(m.id).ratio();
      worst_ratio = std::max(worst_ratio, std::abs(rel - 1.0));
    }
  }
  ok = ok && worst_shift <= 0.05 && worst_ratio <= 0.30 + 1e-12;
  line("peak-torque", ok,
       fmt("max knee flexion |argmax - reference| = %.4f over %zu runs; max |ratio/reference - 1| = %.4f", worst_shift,
           runs.size(), worst_ratio));
}

void qp_lcp() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto random_spd = [&](int n) {
    MatX B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) B(i, j) = U(rng);
    return MatX(B * B.transpose() + 0.1 * MatX::Identity(n, n));
  };

  double lcp_err = 0.0, lcp_comp = 0.0;
  int lcp_missing = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + k % 6;
    const MatX A = random_spd(n);
    VecX b(n);
    for (int i = 0; i < n; ++i) b[i] = U(rng);
    const auto r = solve_lcp(A, b);
    const auto ref = oracle::lcp_enumerate(A, b);
    if (!ref) {
      ++lcp_missing;
      continue;
    }
    lcp_err = std::max(lcp_err, (r.f - *ref).lpNorm<Eigen::Infinity>());
    lcp_comp = std::max({lcp_comp, r.complementarity, r.infeasibility});
  }

  double qp_err = 0.0, qp_kkt = 0.0;
  bool box_exact = true;
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + k % 6;
    const MatX H = random_spd(n);
    VecX g(n), lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      g[i] = 2.0 * U(rng);
      lo[i] = -0.5 + 0.4 * U(rng);
      hi[i] = lo[i] + 0.1 + std::abs(U(rng));
    }
    const auto r = solve_box_qp(H, g, lo, hi);
    qp_err = std::max(qp_err, (r.x - oracle::box_qp_enumerate(H, g, lo, hi)).lpNorm<Eigen::Infinity>());
    qp_kkt = std::max(qp_kkt, box_kkt_residual(H, g, r.x, lo, hi));
    box_exact = box_exact && (r.x.array() >= lo.array()).all() && (r.x.array() <= hi.array()).all();
  }

  const Model& model = toy();
  const int n = model.skeleton.dof_count();
  const auto poses = toy::toy_dataset(model.skeleton, {.poses = 20, .seed = 303, .mirror = false}).poses;
  double muscle_kkt = 0.0, limit_comp = 0.0;
  for (const auto& pose : poses) {
    auto state = DynamicsState::at_rest(model.skeleton, pose);
    VecX qdd(n);
    for (int i = 0; i < n; ++i) {
      state.velocity[i] = 0.5 * U(rng);
      qdd[i] = 5.0 * U(rng);
    }
    const auto c = coordinate_muscles(model, state, qdd, 0.01);
    muscle_kkt = std::max(muscle_kkt, c.muscles.kkt_residual);
    limit_comp = std::max({limit_comp, c.limits.complementarity, c.limits.infeasibility});
    const auto& a = c.muscles.activation.a;
    box_exact = box_exact && (a.array() >= 0.0).all() && (a.array() <= 1.0).all();
  }

  Model single = model;
  single.muscles = {model.muscle("biceps_l")};
  const Pose pose = single.conditioning_pose();
  const auto state = DynamicsState::at_rest(single.skeleton, pose);
  const double w = 0.01;
  const auto prob = build_muscle_qp(single, state, VecX::Zero(n));
  const VecX col = prob.A.col(0);
  double analytic_err = 0.0;
  for (double s : {-0.5, 0.0, 0.3, 0.7, 1.0, 2.0}) {
    const VecX qdd = prob.qdd_passive + s * col;
    const auto r = solve_muscle_qp(single, state, qdd, w);
    const VecX b = qdd - prob.qdd_passive;
    const double expect = std::clamp(col.dot(b) / (col.squaredNorm() + w), 0.0, 1.0);
    analytic_err = std::max(analytic_err, std::abs(r.activation[0] - expect));
  }

  const bool ok = lcp_missing == 0 && lcp_err <= 1e-8 && lcp_comp <= 1e-6 && qp_err <= 1e-8 && qp_kkt <= 1e-6 &&
                  muscle_kkt <= 1e-6 && limit_comp <= 1e-6 && box_exact && analytic_err <= 1e-8;
  line("qp-lcp", ok,
       fmt("100 LCPs vs enumeration max|df| %.2g, complementarity %.2g; 100 box QPs vs enumeration %.2g, KKT %.2g; "
           "muscle QP KKT %.2g, limit complementarity %.2g, box %s; 1-muscle analytic %.2g",
           lcp_err, lcp_comp, qp_err, qp_kkt, muscle_kkt, limit_comp, box_exact ? "exact" : "violated", analytic_err));
}

void hill() {
  const Model& model = toy();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_residual = 0.0, worst_force = 0.0;
  std::size_t compared = 0, clamped = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto& m = model.muscles[static_cast<std::size_t>(k) % model.muscles.size()];
    const double a = k % 10 == 0 ? 0.0 : U(rng);
    const double l_mt = m.l_t0 + (0.3 + 1.5 * U(rng)) * m.l_m0;
    const auto s = fiber_equilibrium(m, model.curves, l_mt, a);
    const auto o = oracle::hill_bisection(m, model.curves, l_mt, a);
    if (!o.bracketed) {
      ++clamped;
      continue;
    }
    ++compared;
    worst_residual = std::max(worst_residual, s.residual);
    worst_force = std::max(worst_force, std::abs(s.force - o.force) / m.f_max);
  }
  bool constants = MusculotendonUnit{}.k_m == 1.6 && MusculotendonUnit{}.k_t == 1.03;
  for (const auto& m : model.muscles) constants = constants && m.k_m == 1.6 && m.k_t == 1.03;
  line("hill-equilibrium", worst_residual <= 1e-8 && worst_force <= 1e-8 && constants && compared >= 5000,
       fmt("%zu bracketed samples (%zu unbracketed): residual %.2g f_max, |F - F_bisect| %.2g f_max; k_m = 1.6, k_t = 1.03 %s",
           compared, clamped, worst_residual, worst_force, constants ? "hold" : "violated"));
}

void scaling() {
  const Model& m = toy();
  const Model s = scale_physics(m, 2.0);
  bool ok = true;
  for (int i = 0; i < m.skeleton.size(); ++i) {
    ok = ok && s.skeleton.bone(i).mass == 8.0 * m.skeleton.bone(i).mass;
    ok = ok && s.skeleton.bone(i).inertia == 32.0 * m.skeleton.bone(i).inertia;
  }
  for (std::size_t i = 0; i < m.muscles.size(); ++i) ok = ok && s.muscles[i].f_max == 8.0 * m.muscles[i].f_max;
  line("scale-physics", ok, "L = 2: mass x8, inertia x32, f_max x8 on every bone and muscle");
}

std::string run_cli_grid(const fs::path& dir) {
  const std::string cmd = std::string("\"") + MSK_CLI_PATH + "\" rom-grid --joint hip --res 18x36x36 -r \"" +
                          dir.string() + "\" > \"" + (dir / "stdout.txt").string() + "\" 2>&1";
  if (std::system(cmd.c_str()) != 0) throw Error("CLI rom-grid failed");
  return read_text_file((dir / "hip_r.grid").string());
}

void round_trip() {
  const Model& m = toy();
  const std::string text = model_to_text(m);
  const std::string again = model_to_text(model_from_text(text));
  const bool canonical = text == again && model_hash(m) == model_hash(model_from_text(text));

  const fs::path dir = fs::temp_directory_path() / fmt("msk-acceptance-%d", static_cast<int>(::getpid()));
  fs::create_directories(dir);
  bool equal = false, json_equal = false;
  std::string detail;
  try {
    const std::string cli = run_cli_grid(dir);
    const Json cli_json = parse_json(read_text_file((dir / "hip_r.grid.json").string()), "cli grid");
    ProjectStore store(dir / "store");
    Project project(m, dataset(), store);
    HttpService http(project);
    const int port = http.bind_to_any_port();
    std::thread server([&] { http.listen_after_bind(); });
    http.wait_until_ready();
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(120, 0);
    const auto text_res = client.Get("/rom/hip/grid?res=18x36x36&format=text");
    const auto json_res = client.Get("/rom/hip/grid?res=18x36x36");
    http.stop();
    server.join();
    equal = text_res && text_res->status == 200 && text_res->body == cli;
    json_equal = json_res && json_res->status == 200 && parse_json(json_res->body, "http grid") == cli_json;
    detail = fmt("grid text %zu bytes", cli.size());
  } catch (const std::exception& e) {
    detail = e.what();
  }
  fs::remove_all(dir);
  line("round-trip", canonical && equal && json_equal,
       fmt("save/load canonical %s; CLI vs HTTP hip_r grid text %s, JSON %s (%s)", canonical ? "identical" : "differs",
           equal ? "identical" : "differs", json_equal ? "identical" : "differs", detail.c_str()));
}

}  // namespace

int main() {
  try {
    tendon_excursion();
    dataset_validity();
    const auto runs = rom_sweep();
    rom_edit();
    optimizer_descent(runs);
    peak_torque(runs);
    qp_lcp();
    hill();
    scaling();
    round_trip();
  } catch (const std::exception& e) {
    line("acceptance", false, std::string("aborted: ") + e.what());
  }
  std::cout << (failures == 0 ? "all criteria passed" : fmt("%d criteria failed", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
