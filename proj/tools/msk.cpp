#include "msk/dynamics/coordination.hpp"
#include "msk/io/dataset_io.hpp"
#include "msk/service/http.hpp"
#include "msk/toy/full_topology.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string model;
  std::string dataset;
  std::string dataset_format;
  std::string results = "results";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> poses;
  bool mirror = false;
  std::optional<double> subsample;
};

void add_common(CLI::App* sub, Common& c, bool dataset = true) {
  sub->add_option("-c,--config", c.config, "TOML-like config file")->check(CLI::ExistingFile);
  sub->add_option("-m,--model", c.model, "model file (msk-1 JSON); default: built-in toy model")->check(CLI::ExistingFile);
  sub->add_option("-r,--results", c.results, "results directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "seed for synthetic data");
  if (!dataset) return;
  sub->add_option("-d,--dataset", c.dataset, "pose dataset (JSONL or CSV); default: synthetic toy dataset")
      ->check(CLI::ExistingFile);
  sub->add_option("--dataset-format", c.dataset_format, "jsonl or csv; default: from the extension");
  sub->add_option("--poses", c.poses, "synthetic dataset size");
  sub->add_flag("--mirror", c.mirror, "mirror the ingested dataset");
  sub->add_option("--subsample", c.subsample, "keep ratio applied after mirroring");
}

struct Context {
  msk::RunConfig cfg;
  msk::Model model;
  msk::PoseDataset dataset;
  bool dataset_synthetic = false;
};

msk::RunConfig load_run_config(const Common& c) {
  msk::RunConfig cfg = c.config.empty() ? msk::RunConfig{} : msk::load_config(c.config);
  if (c.seed) cfg.run.seed = *c.seed;
  if (c.poses) cfg.run.dataset_poses = *c.poses;
  if (c.mirror) cfg.run.mirror = true;
  if (c.subsample) cfg.run.subsample = *c.subsample;
  return cfg;
}

msk::toy::DatasetOptions synthetic_options(const msk::RunConfig& cfg) {
  return {.poses = cfg.run.dataset_poses, .seed = cfg.run.seed, .mirror = true};
}

msk::Model load_or_toy(const Common& c, const msk::RunConfig& cfg) {
  if (!c.model.empty()) return msk::load_model(c.model);
  return msk::toy::make_toy_model(synthetic_options(cfg));
}

msk::PoseDataset load_or_synthesize(const Common& c, const msk::RunConfig& cfg, const msk::Skeleton& skel, bool* synthetic) {
  if (!c.dataset.empty()) {
    const auto format = c.dataset_format.empty() ? msk::dataset_format_for_path(c.dataset)
                                                 : msk::dataset_format_from_string(c.dataset_format);
    auto in = msk::ingest_dataset(c.dataset, skel, format, {cfg.run.mirror, cfg.run.subsample});
    const auto& p = in.provenance;
    std::cerr << "dataset " << p.source << ": " << p.records << " records, mirrored " << (p.mirrored ? "yes" : "no")
              << ", subsample " << p.subsample << ", " << p.poses << " poses\n";
    if (synthetic) *synthetic = false;
    return std::move(in.dataset);
  }
  if (synthetic) *synthetic = true;
  try {
    return msk::toy::toy_dataset(skel, synthetic_options(cfg));
  } catch (const msk::Error& e) {
    throw msk::Error(std::string("no --dataset given and the synthetic dataset does not fit this model: ") + e.what());
  }
}

Context make_context(const Common& c, bool need_dataset = true) {
  Context ctx;
  ctx.cfg = load_run_config(c);
  ctx.model = load_or_toy(c, ctx.cfg);
  if (need_dataset) ctx.dataset = load_or_synthesize(c, ctx.cfg, ctx.model.skeleton, &ctx.dataset_synthetic);
  return ctx;
}

fs::path results_dir(const Common& c) {
  fs::create_directories(c.results);
  return c.results;
}

void write(const fs::path& p, std::string_view text) {
  msk::write_text_file(p.string(), text);
  std::cout << "wrote " << p.string() << "\n";
}

int cmd_estimate(const Common& c, double relax) {
  auto ctx = make_context(c);
  auto model = msk::estimate_lengths(ctx.model, ctx.dataset);
  int relax_iterations = 0;
  if (relax > 0.0) {
    auto rr = msk::relax_keyposes(std::move(model), relax);
    model = std::move(rr.model);
    relax_iterations = rr.iterations;
  }
  std::size_t valid = 0;
  for (const auto& p : ctx.dataset.poses) valid += msk::is_valid(model, p);
  const auto dir = results_dir(c);
  write(dir / "model.json", msk::model_to_text(model));
  std::cout << "poses " << ctx.dataset.size() << " valid " << valid << " relax iterations " << relax_iterations
            << "\nmodel hash " << msk::model_hash(model) << "\n";
  return valid == ctx.dataset.size() ? 0 : 1;
}

int cmd_retarget(const Common& c, const std::string& params_path, const std::string& resolution) {
  Common cc = c;
  if (!params_path.empty()) {
    if (!cc.config.empty()) throw msk::Error("give the parameters with either --params or --config");
    cc.config = params_path;
  }
  auto ctx = make_context(cc);
  if (!resolution.empty()) ctx.cfg.pipeline.resolution = msk::parse_resolution(resolution);
  for (auto& j : ctx.cfg.pipeline.grid_joints) j = msk::resolve_joint_name(ctx.model.skeleton, j);
  const msk::RomEdit edit = msk::resolve_edits(ctx.cfg.edits, ctx.model.skeleton, ctx.dataset);
  int last_stage = 0;
  const auto r = msk::retarget_pipeline(ctx.model, ctx.cfg.params, ctx.dataset, edit.empty() ? nullptr : &edit,
                                        ctx.cfg.pipeline, [&](int stage, double) {
                                          if (stage != last_stage) std::cerr << "stage " << stage << "/3\n";
                                          last_stage = stage;
                                        });
  const auto dir = results_dir(c);
  write(dir / "model.json", msk::model_to_text(r.model));
  write(dir / "naive_model.json", msk::model_to_text(r.naive));
  msk::Json report = {{"model_hash", msk::model_hash(r.model)},
                      {"reference_hash", msk::model_hash(ctx.model)},
                      {"params", msk::to_json(ctx.cfg.params)},
                      {"edit", msk::to_json(edit)},
                      {"report", msk::to_json(r.report)}};
  write(dir / "report.json", msk::canonical_dump(report));
  write(dir / "report.txt", msk::report_text(r.report));
  write(dir / "traces.csv", msk::report_traces_csv(r.report));
  write(dir / "characteristics.csv", msk::report_characteristics_csv(r.report, ctx.model));
  std::cout << msk::report_text(r.report);
  return r.report.error.empty() ? 0 : 1;
}

int cmd_rom_grid(const Common& c, const std::string& joint, const std::string& resolution, const std::string& source) {
  auto ctx = make_context(c);
  const std::string name = msk::resolve_joint_name(ctx.model.skeleton, joint);
  const auto res = resolution.empty() ? ctx.cfg.pipeline.resolution : msk::parse_resolution(resolution);
  msk::RomEdit edit;
  if (source == "target") edit = msk::resolve_edits(ctx.cfg.edits, ctx.model.skeleton, ctx.dataset);
  const auto g = msk::joint_grid(ctx.model, ctx.dataset, name, res, source == "target" ? &edit : nullptr);
  const auto dir = results_dir(c);
  write(dir / (name + ".grid"), msk::grid_to_text(g, ctx.model.skeleton));
  write(dir / (name + ".grid.json"), msk::grid_to_json(g, ctx.model.skeleton).dump());
  write(dir / (name + ".grid.csv"), msk::grid_to_csv(g));
  std::cout << "joint " << name << " resolution " << msk::to_string(res) << " cells " << g.cells.size() << " valid "
            << g.true_count() << "\n";
  return 0;
}

int cmd_curves(const Common& c, const std::string& muscle, const std::string& motion, const std::string& joint) {
  auto ctx = make_context(c, false);
  const auto dir = results_dir(c);
  const int samples = ctx.cfg.run.curve_samples;
  if (muscle.empty() && joint.empty()) throw msk::Error("curves: give --muscle and/or --joint");
  if (!muscle.empty()) {
    const auto payload = msk::length_angle_payload(ctx.model, muscle, motion, samples);
    write(dir / (muscle + ".length-angle.json"), payload.dump());
    for (const auto& mo : payload["curves"]) {
      const auto id = mo["motion"].get<std::string>();
      write(dir / (muscle + "." + id + ".length-angle.csv"),
            msk::length_curve_csv(msk::length_angle_curve(ctx.model, muscle, id, samples)));
      std::cout << muscle << " " << id << ": " << mo["characteristics"]["classification"].get<std::string>() << "\n";
    }
  }
  if (!joint.empty()) {
    const auto payload = msk::torque_angle_payload(ctx.model, joint, samples, ctx.cfg.run.activation);
    const std::string name = payload["joint"];
    write(dir / (name + ".torque-angle.json"), payload.dump());
    for (const auto& cj : payload["curves"]) {
      const auto id = cj["motion"].get<std::string>();
      write(dir / (id + ".torque-angle.csv"),
            msk::torque_curve_csv(msk::torque_angle_curve(ctx.model, id, samples, ctx.cfg.run.activation)));
      std::cout << id << ": peak at " << cj["peak_theta"].get<double>() << "\n";
    }
  }
  return 0;
}

// Scenario: {"pose", "velocity" [n], "qdd_desired" [n] | {bone: value}, "w_reg",
//            "expect": {"kkt_max", "limits_active", "max_tracking_error"}}
int cmd_qp_check(const Common& c, const std::string& scenario_path) {
  auto ctx = make_context(c, false);
  const auto& model = ctx.model;
  const int n = model.skeleton.dof_count();
  msk::Json sc = scenario_path.empty() ? msk::Json::object() : msk::parse_json(msk::read_text_file(scenario_path), scenario_path);
  using namespace msk::jsonpath;
  only_keys(sc, {"pose", "velocity", "qdd_desired", "w_reg", "expect"}, "scenario");
  auto state = msk::DynamicsState::at_rest(
      model.skeleton, sc.contains("pose") ? msk::pose_from_json(sc["pose"], model.skeleton, "scenario.pose") : model.conditioning_pose());
  auto vector = [&](const msk::Json& j, const std::string& path) {
    msk::VecX v = msk::VecX::Zero(n);
    if (j.is_array()) {
      array(j, path, static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) v[i] = number(j[static_cast<std::size_t>(i)], index(path, static_cast<std::size_t>(i)));
      return v;
    }
    if (!j.is_object()) fail(path, "expected an array or an object keyed by bone id");
    for (const auto& [id, val] : j.items()) {
      const auto b = model.skeleton.find(id);
      if (!b) fail(path + "." + id, "unknown bone");
      const int off = model.skeleton.dof_offset(*b), w = model.skeleton.dof_width(*b);
      if (w == 1) v[off] = number(val, path + "." + id);
      else {
        array(val, path + "." + id, static_cast<std::size_t>(w));
        for (int k = 0; k < w; ++k) v[off + k] = number(val[static_cast<std::size_t>(k)], index(path + "." + id, static_cast<std::size_t>(k)));
      }
    }
    return v;
  };
  if (sc.contains("velocity")) state.velocity = vector(sc["velocity"], "scenario.velocity");
  const msk::VecX qdd = sc.contains("qdd_desired") ? vector(sc["qdd_desired"], "scenario.qdd_desired") : msk::VecX::Zero(n);
  const double w_reg = number_or(sc, "w_reg", "scenario", 0.01);
  const auto r = msk::coordinate_muscles(model, state, qdd, w_reg);

  const msk::Json expect = sc.value("expect", msk::Json::object());
  only_keys(expect, {"kkt_max", "limits_active", "max_tracking_error"}, "scenario.expect");
  const double kkt_max = number_or(expect, "kkt_max", "scenario.expect", 1e-6);
  const auto& a = r.muscles.activation.a;
  const bool box_ok = a.size() == 0 || (a.minCoeff() >= 0.0 && a.maxCoeff() <= 1.0);
  bool ok = r.muscles.kkt_residual <= kkt_max && box_ok && r.limits.complementarity <= 1e-6;
  if (expect.contains("limits_active")) ok = ok && (!r.limits.empty() && r.limits.f.sum() > 0.0) == boolean(expect["limits_active"], "scenario.expect.limits_active");
  if (expect.contains("max_tracking_error"))
    ok = ok && r.muscles.tracking_error <= number(expect["max_tracking_error"], "scenario.expect.max_tracking_error");

  msk::Json out = {{"kkt_residual", r.muscles.kkt_residual},
                   {"box_ok", box_ok},
                   {"tracking_error", r.muscles.tracking_error},
                   {"objective", r.muscles.objective},
                   {"iterations", r.muscles.iterations},
                   {"limit_rows", r.limits.muscles.size()},
                   {"limit_complementarity", r.limits.complementarity},
                   {"activation", std::vector<double>(a.data(), a.data() + a.size())},
                   {"pass", ok}};
  const auto dir = results_dir(c);
  write(dir / "qp-check.json", out.dump(2));
  std::cout << "kkt " << r.muscles.kkt_residual << " tracking " << r.muscles.tracking_error << " limit rows "
            << r.limits.muscles.size() << " complementarity " << r.limits.complementarity << "\n"
            << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

msk::HttpService* g_service = nullptr;

int cmd_serve(const Common& c, const std::string& host, int port, const std::string& data_dir) {
  auto ctx = make_context(c);
  msk::ProjectStore store(msk::data_directory(data_dir));
  msk::Project project(ctx.model, ctx.dataset, store, ctx.cfg.pipeline);
  msk::HttpService service(project);
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  int bound = port;
  if (port == 0) {
    bound = service.bind_to_any_port(host);
    if (bound < 0) throw msk::Error("cannot bind " + host);
  } else if (!service.bind(host, port)) {
    throw msk::Error("cannot bind " + host + ":" + std::to_string(port));
  }
  std::cout << "listening on http://" << host << ":" << bound << " data " << store.root().string() << std::endl;
  service.listen_after_bind();
  g_service = nullptr;
  return 0;
}

int cmd_make_toy(const Common& c, const std::string& out, bool full, const std::string& dataset_out) {
  const auto cfg = load_run_config(c);
  const auto model = full ? msk::toy::make_full_topology_model() : msk::toy::make_toy_model(synthetic_options(cfg));
  msk::save_model(model, out);
  std::cout << "wrote " << out << " (" << model.muscles.size() << " muscles, " << model.skeleton.dof_count() << " DoF)\n";
  if (!dataset_out.empty()) {
    if (full) throw msk::Error("make-toy: --dataset-out needs the toy topology");
    msk::write_dataset(dataset_out, model.skeleton, msk::toy::toy_dataset(model.skeleton, synthetic_options(cfg)));
    std::cout << "wrote " << dataset_out << "\n";
  }
  return 0;
}

int cmd_dataset(const Common& c, const std::string& out) {
  auto ctx = make_context(c);
  msk::write_dataset(out, ctx.model.skeleton, ctx.dataset);
  std::cout << "wrote " << out << " (" << ctx.dataset.size() << " poses)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Musculoskeletal model retargeting, range-of-motion and dynamics tools", "msk"};
  app.require_subcommand(1);
  Common common;

  auto* estimate = app.add_subcommand("estimate", "fit fiber and tendon lengths to a pose dataset");
  add_common(estimate, common);
  double relax = 0.0;
  estimate->add_option("--relax", relax, "key-pose passive torque threshold (N m); 0 disables");

  auto* retarget = app.add_subcommand("retarget", "run the three-stage retargeting pipeline");
  add_common(retarget, common);
  std::string params, resolution;
  retarget->add_option("-p,--params", params, "skeleton parameter file (TOML-like)")->check(CLI::ExistingFile);
  retarget->add_option("--res", resolution, "grid resolution TxAxP for the report");

  auto* grid = app.add_subcommand("rom-grid", "sample a joint's muscle-induced range of motion");
  add_common(grid, common);
  std::string joint, source = "model";
  grid->add_option("-j,--joint", joint, "joint name or bone id ('hip' selects hip_r)")->required();
  grid->add_option("--res", resolution, "resolution TxAxP, e.g. 18x36x36");
  grid->add_option("--source", source, "model, or target (reference with the configured edits)")
      ->check(CLI::IsMember({"model", "target"}));

  auto* curves = app.add_subcommand("curves", "export length-angle and torque-angle curves");
  add_common(curves, common, false);
  std::string muscle, motion;
  curves->add_option("--muscle", muscle, "muscle id for length-angle curves");
  curves->add_option("--motion", motion, "restrict the muscle to one motion");
  curves->add_option("-j,--joint", joint, "joint for torque-angle curves");

  auto* qp = app.add_subcommand("qp-check", "solve the joint-limit LCP and activation QP for a scenario");
  add_common(qp, common, false);
  std::string scenario;
  qp->add_option("-s,--scenario", scenario, "scenario JSON file")->check(CLI::ExistingFile);

  auto* serve = app.add_subcommand("serve", "serve the HTTP API for one project");
  add_common(serve, common);
  std::string host = "127.0.0.1", data_dir;
  int port = 8080;
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port, "0 picks a free port")->capture_default_str();
  serve->add_option("--data-dir", data_dir, std::string("store directory; default $") + msk::kDataDirEnv + " or ./msk-data");

  auto* make_toy = app.add_subcommand("make-toy", "write the built-in toy model");
  add_common(make_toy, common, false);
  std::string out;
  bool full = false;
  std::string dataset_out;
  make_toy->add_option("-o,--out", out, "output model file")->required();
  make_toy->add_option("--poses", common.poses, "synthetic dataset size");
  make_toy->add_flag("--full-topology", full, "282-muscle, 50-DoF synthetic model instead");
  make_toy->add_option("--dataset-out", dataset_out, "also write the synthetic dataset (.jsonl or .csv)");

  auto* dataset = app.add_subcommand("dataset", "ingest, transform and re-export a pose dataset");
  add_common(dataset, common);
  dataset->add_option("-o,--out", out, "output file (.jsonl or .csv)")->required();

  if (argc <= 1) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*estimate) return cmd_estimate(common, relax);
    if (*retarget) return cmd_retarget(common, params, resolution);
    if (*grid) return cmd_rom_grid(common, joint, resolution, source);
    if (*curves) return cmd_curves(common, muscle, motion, joint);
    if (*qp) return cmd_qp_check(common, scenario);
    if (*serve) return cmd_serve(common, host, port, data_dir);
    if (*make_toy) return cmd_make_toy(common, out, full, dataset_out);
    if (*dataset) return cmd_dataset(common, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
