#include "msk/dynamics/rigid_body.hpp"
#include "msk/io/dataset_io.hpp"
#include "msk/io/grid_io.hpp"
#include "msk/service/http.hpp"
#include "msk/toy/full_topology.hpp"
#include "msk/toy/toy_model.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
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

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("msk-test-" + std::to_string(::getpid()) + "-" + std::to_string(++counter));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Cli {
  int status = -1;
  std::string out;
};

Cli run_cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "cli.log";
  const std::string cmd = std::string("\"") + MSK_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  Cli c;
  c.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  c.out = read_text_file(log.string());
  return c;
}

bool same_pose(const Pose& a, const Pose& b) {
  if (a.joints.size() != b.joints.size()) return false;
  if (a.root_rotation.coeffs() != b.root_rotation.coeffs() || a.root_translation != b.root_translation) return false;
  for (std::size_t i = 0; i < a.joints.size(); ++i)
    if (a.joints[i].angle != b.joints[i].angle || a.joints[i].rotation.coeffs() != b.joints[i].rotation.coeffs()) return false;
  return true;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ModelIo, SaveLoadIsCanonical) {
  const std::string text = model_to_text(toy_model());
  const Model back = model_from_text(text);
  EXPECT_EQ(model_to_text(back), text);
  EXPECT_EQ(model_hash(back), model_hash(toy_model()));
  EXPECT_EQ(model_hash(toy_model()).size(), 64u);
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  ASSERT_EQ(back.muscles.size(), toy_model().muscles.size());
  for (std::size_t i = 0; i < back.muscles.size(); ++i) {
    EXPECT_EQ(back.muscles[i].l_m0, toy_model().muscles[i].l_m0);
    EXPECT_EQ(back.muscles[i].waypoints, toy_model().muscles[i].waypoints);
  }
}

TEST(ModelIo, FileRoundTrip) {
  TempDir dir;
  const auto path = (dir.path / "model.json").string();
  save_model(toy_model(), path);
  EXPECT_EQ(read_text_file(path), model_to_text(load_model(path)));
}

TEST(ModelIo, SchemaErrorsNameThePath) {
  Json j = to_json(toy_model());
  j["format"] = "msk-2";
  EXPECT_NE(error_of([&] { model_from_json(j); }).find("model.format"), std::string::npos);

  j = to_json(toy_model());
  j["muscles"][0]["waypoints"][0][0]["bone"] = "no_such_bone";
  EXPECT_NE(error_of([&] { model_from_json(j); }).find("model.muscles[0]"), std::string::npos);

  j = to_json(toy_model());
  j["bones"][1]["mass"] = -1.0;
  EXPECT_NE(error_of([&] { model_from_json(j); }).find("mass"), std::string::npos);

  j = to_json(toy_model());
  j["keyposes"][0]["pose"]["root_rotation"] = Json::array({2.0, 0.0, 0.0, 0.0});
  EXPECT_NE(error_of([&] { model_from_json(j); }).find("unit quaternion"), std::string::npos);

  j = to_json(toy_model());
  j.erase("bones");
  EXPECT_NE(error_of([&] { model_from_json(j); }).find("model.bones"), std::string::npos);

  EXPECT_THROW(model_from_text("{not json"), Error);
}

TEST(ModelIo, EmptyMuscleListIsAccepted) {
  Model m = toy_model();
  m.muscles.clear();
  const Model back = model_from_text(model_to_text(m));
  EXPECT_TRUE(back.muscles.empty());
  EXPECT_EQ(back.skeleton.size(), m.skeleton.size());
}

TEST(ModelIo, FullTopologyModelLoads) {
  const Model m = toy::make_full_topology_model();
  EXPECT_EQ(m.muscles.size(), 282u);
  EXPECT_EQ(m.skeleton.dof_count(), 50);
  int ball = 0, revolute = 0;
  for (const auto& b : m.skeleton.bones()) {
    ball += b.joint_type == JointType::ball_and_socket;
    revolute += b.joint_type == JointType::revolute;
  }
  EXPECT_EQ(ball, 13);
  EXPECT_EQ(revolute, 5);
  const std::string text = model_to_text(m);
  EXPECT_EQ(model_to_text(model_from_text(text)), text);
  const MatX M = mass_matrix(m, m.skeleton.rest_pose());
  EXPECT_EQ(M.rows(), 50);
}

TEST(DatasetIo, JsonlAndCsvRoundTripExactly) {
  const Skeleton& skel = toy_model().skeleton;
  const auto d = toy::toy_dataset(skel, {.poses = 25, .seed = 31, .mirror = false});
  for (auto format : {DatasetFormat::jsonl, DatasetFormat::csv}) {
    std::stringstream s;
    if (format == DatasetFormat::jsonl) write_poses_jsonl(s, skel, d);
    else write_poses_csv(s, skel, d);
    const auto in = ingest_dataset(s, skel, format, {}, "mem");
    ASSERT_EQ(in.dataset.poses.size(), d.poses.size());
    for (std::size_t i = 0; i < d.poses.size(); ++i) EXPECT_TRUE(same_pose(in.dataset.poses[i], d.poses[i])) << i;
    EXPECT_EQ(in.provenance.records, 25u);
  }
}

TEST(DatasetIo, MirrorDoublesAndIsAnInvolution) {
  const Skeleton& skel = toy_model().skeleton;
  const auto d = toy::toy_dataset(skel, {.poses = 10, .seed = 32, .mirror = false});
  std::stringstream s;
  write_poses_jsonl(s, skel, d);
  const auto in = ingest_dataset(s, skel, DatasetFormat::jsonl, {.mirror = true}, "mem");
  EXPECT_EQ(in.dataset.poses.size(), 20u);
  EXPECT_TRUE(in.provenance.mirrored);
  for (const auto& p : d.poses) {
    const Pose m = mirror_pose(skel, p);
    const Pose back = mirror_pose(skel, m);
    EXPECT_TRUE(same_pose(back, p));
    const auto wa = world_transforms(skel, p);
    const auto wb = world_transforms(skel, m);
    for (const char* pair : {"femur", "tibia", "humerus", "ulna", "foot"}) {
      const Vec3 a = wa[static_cast<std::size_t>(skel.index_of(std::string(pair) + "_l"))].translation();
      const Vec3 b = wb[static_cast<std::size_t>(skel.index_of(std::string(pair) + "_r"))].translation();
      EXPECT_LT((toy::mirror_point(a) - b).norm(), 1e-12) << pair;
    }
  }
}

TEST(DatasetIo, SubsampleKeepsTheRequestedFraction) {
  const Skeleton& skel = toy_model().skeleton;
  const auto d = toy::toy_dataset(skel, {.poses = 10, .seed = 33, .mirror = false});
  std::stringstream s;
  write_poses_jsonl(s, skel, d);
  const auto in = ingest_dataset(s, skel, DatasetFormat::jsonl, {.subsample = 0.1}, "mem");
  EXPECT_EQ(in.dataset.poses.size(), 1u);
  EXPECT_EQ(in.provenance.poses, 1u);
  EXPECT_EQ(in.provenance.records, 10u);
}

TEST(DatasetIo, MalformedLineIsReportedWithItsNumber) {
  const Skeleton& skel = toy_model().skeleton;
  const auto d = toy::toy_dataset(skel, {.poses = 2, .seed = 34, .mirror = false});
  std::stringstream s;
  write_poses_jsonl(s, skel, d);
  std::stringstream bad(s.str() + "{\"root_rotation\": [1, 0, 0]}\n");
  const std::string where = "poses.jsonl:" + std::to_string(d.poses.size() + 1) + ":";
  EXPECT_NE(error_of([&] { ingest_dataset(bad, skel, DatasetFormat::jsonl, {}, "poses.jsonl"); }).find(where),
            std::string::npos);
  std::stringstream csv("root_qw,root_qx\n1,0,5\n");
  EXPECT_NE(error_of([&] { ingest_dataset(csv, skel, DatasetFormat::csv, {}, "poses.csv"); }).find("poses.csv:2"),
            std::string::npos);
}

TEST(Config, ParsesSectionsIntoRunConfig) {
  const auto cfg = parse_config(R"([skeleton]
global_scale = 1.1
extremity_scale = 0.9

[bone.femur]
elongate = 1.3
torsion_deg = 30

[trunk]
bend_deg = 10

[ratio]
bound = 0.2

[pipeline]
resolution = "9x18x18"
grid_joints = ["hip_r", "knee_r"]

[edit.hip_r]
tilt_deg = 30
tilt_axis = [1, 0, 0]
cone_scale = 0.63

[edit.knee_r]
type = "revolute"
scale = 0.5

[run]
seed = 3
dataset_poses = 800
)");
  EXPECT_EQ(cfg.params.global_scale, 1.1);
  EXPECT_EQ(cfg.params.extremity_scale, 0.9);
  EXPECT_EQ(cfg.params.bones.at("femur").elongate, 1.3);
  EXPECT_NEAR(cfg.params.bones.at("femur").torsion, deg2rad(30.0), 1e-15);
  EXPECT_NEAR(cfg.params.trunk.bend, deg2rad(10.0), 1e-15);
  EXPECT_EQ(cfg.pipeline.ratio.bound, 0.2);
  EXPECT_EQ(cfg.pipeline.resolution, (GridResolution{9, 18, 18}));
  EXPECT_EQ(cfg.pipeline.grid_joints, (std::vector<std::string>{"hip_r", "knee_r"}));
  EXPECT_EQ(cfg.run.seed, 3u);
  EXPECT_EQ(cfg.run.dataset_poses, 800u);
  ASSERT_EQ(cfg.edits.size(), 2u);
  const auto edit = resolve_edits(cfg.edits, toy_model().skeleton, toy_data());
  const auto& hip = std::get<BallEdit>(edit.joints.at("hip_r"));
  EXPECT_NEAR(hip.cone_scale, 1.0 / 0.63, 1e-12);
  EXPECT_EQ(std::get<RevoluteEdit>(edit.joints.at("knee_r")).scale, 0.5);
}

TEST(Config, ErrorsNameSourceAndKey) {
  const auto e1 = error_of([] { parse_config("[bone.femur]\nelongate = -1\n", "run.toml"); });
  EXPECT_NE(e1.find("run.toml"), std::string::npos) << e1;
  EXPECT_NE(e1.find("elongate"), std::string::npos) << e1;
  EXPECT_NE(error_of([] { parse_config("[skeleton]\nwingspan = 2\n", "c"); }).find("wingspan"), std::string::npos);
  EXPECT_NE(error_of([] { parse_config("[nonsense]\nx = 1\n", "c"); }).find("nonsense"), std::string::npos);
  EXPECT_THROW(parse_config("[pipeline]\nresolution = \"18x36\"\n"), Error);
  EXPECT_THROW(parse_config("[edit.hip_r]\ntilt = 0.5\ntilt_deg = 30\n"), Error);
}

TEST(GridIo, TextAndJsonRoundTrip) {
  const Model& m = toy_model();
  GridOptions o;
  o.resolution = {4, 8, 8};
  o.cone_center = cone_center_from_dataset(m.skeleton, toy_data(), "hip_r");
  const auto g = rom_grid(m, "hip_r", o);
  ASSERT_GT(g.true_count(), 0u);
  ASSERT_LT(g.true_count(), g.cells.size());
  for (const auto& back : {grid_from_text(grid_to_text(g, m.skeleton), m.skeleton),
                           grid_from_json(grid_to_json(g, m.skeleton), m.skeleton)}) {
    EXPECT_EQ(back.joint, g.joint);
    EXPECT_EQ(back.resolution, g.resolution);
    EXPECT_EQ(back.cells, g.cells);
    EXPECT_EQ(back.cone_center, g.cone_center);
    EXPECT_TRUE(same_pose(back.conditioning, g.conditioning));
  }
  EXPECT_EQ(grid_to_text(grid_from_text(grid_to_text(g, m.skeleton), m.skeleton), m.skeleton), grid_to_text(g, m.skeleton));
  std::size_t total = 0;
  for (auto r : grid_runs(g.cells)) total += r;
  EXPECT_EQ(total, g.cells.size());
  EXPECT_EQ(cells_from_runs(grid_runs(g.cells), g.cells.size(), "x"), g.cells);
  EXPECT_THROW(grid_from_text("msk-grid 2\n", m.skeleton), Error);
  EXPECT_EQ(parse_resolution("18x36x36"), (GridResolution{18, 36, 36}));
  EXPECT_EQ(to_string(GridResolution{18, 36, 36}), "18x36x36");
  EXPECT_THROW(parse_resolution("0x1x1"), Error);
}

TEST(Jobs, RecordFollowsTheStateMachine) {
  JobRecord r("job-1", JobKind::retarget);
  EXPECT_EQ(r.status(), JobStatus::queued);
  EXPECT_THROW(r.report_progress(0.5), Error);
  EXPECT_THROW(r.finish("x"), Error);
  r.start();
  EXPECT_THROW(r.start(), Error);
  r.report_progress(0.4, 2);
  r.report_progress(0.2, 1);
  EXPECT_EQ(r.progress(), 0.4);
  EXPECT_EQ(r.stage(), 2);
  r.finish("abc");
  EXPECT_EQ(r.status(), JobStatus::done);
  EXPECT_EQ(r.progress(), 1.0);
  EXPECT_THROW(r.fail("late"), Error);
  EXPECT_EQ(r.to_json()["status"], "done");
  EXPECT_EQ(r.to_json()["result"], "abc");

  JobRecord f("job-2", JobKind::grid);
  f.fail("never ran");
  EXPECT_EQ(f.status(), JobStatus::failed);
  EXPECT_THROW(f.start(), Error);
}

TEST(Jobs, QueueRunsBodiesAndCapturesFailures) {
  JobQueue q;
  const auto ok = q.submit(JobKind::curves, [](const JobProgress& p) {
    p(0.5, 1);
    return std::string("result");
  });
  const auto bad = q.submit(JobKind::curves, [](const JobProgress&) -> std::string { throw Error("boom"); });
  const auto a = q.wait(ok);
  EXPECT_EQ(a.status(), JobStatus::done);
  EXPECT_EQ(a.result(), "result");
  const auto b = q.wait(bad);
  EXPECT_EQ(b.status(), JobStatus::failed);
  EXPECT_EQ(b.error(), "boom");
  EXPECT_FALSE(q.get("job-99").has_value());
}

TEST(Store, ObjectsAreContentAddressedAndImmutable) {
  TempDir dir;
  ProjectStore store(dir.path);
  const auto h = store.put_model(toy_model());
  EXPECT_EQ(h, model_hash(toy_model()));
  const auto file = dir.path / "models" / (h + ".json");
  const auto stamp = fs::last_write_time(file);
  EXPECT_EQ(store.put_model(toy_model()), h);
  EXPECT_EQ(fs::last_write_time(file), stamp);
  EXPECT_EQ(model_to_text(store.get_model(h)), model_to_text(toy_model()));
  EXPECT_THROW(store.put_report({{"model_hash", std::string(64, '0')}}), Error);
  EXPECT_THROW(store.put_report({{"note", "no model"}}), Error);
  const auto r = store.put_report({{"model_hash", h}, {"x", 1}});
  EXPECT_EQ(store.get_report(r)["x"], 1);
  EXPECT_THROW(store.get_model("../../etc/passwd"), Error);
  EXPECT_THROW(store.get_model(std::string(64, 'f')), Error);
}

class HttpApi : public ::testing::Test {
protected:
  void SetUp() override {
    store_ = std::make_unique<ProjectStore>(dir_.path / "store");
    project_ = std::make_unique<Project>(toy_model(), toy_data(), *store_);
    http_ = std::make_unique<HttpService>(*project_);
    port_ = http_->bind_to_any_port();
    ASSERT_GT(port_, 0);
    server_ = std::thread([this] { http_->listen_after_bind(); });
    http_->wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(300, 0);
  }

  void TearDown() override {
    http_->stop();
    server_.join();
  }

  Json get_json(const std::string& path, int expect = 200) {
    const auto r = client_->Get(path);
    EXPECT_TRUE(r);
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << ": " << r->body;
    return Json::parse(r->body);
  }

  httplib::Result put_params(const Json& body, const std::string& if_match = "") {
    httplib::Headers h;
    if (!if_match.empty()) h.emplace("If-Match", "\"" + if_match + "\"");
    return client_->Put("/model/params", h, body.dump(), "application/json");
  }

  TempDir dir_;
  std::unique_ptr<ProjectStore> store_;
  std::unique_ptr<Project> project_;
  std::unique_ptr<HttpService> http_;
  std::thread server_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(HttpApi, ModelAndIdentityParams) {
  const auto m = get_json("/model");
  EXPECT_EQ(m["hash"], model_hash(toy_model()));
  EXPECT_EQ(model_to_text(model_from_json(m["model"])), model_to_text(toy_model()));
  const auto r = put_params(Json::object());
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(Json::parse(r->body)["hash"], m["hash"]);
  EXPECT_EQ(r->get_header_value("ETag"), "\"" + m["hash"].get<std::string>() + "\"");
}

TEST_F(HttpApi, ErrorStatuses) {
  auto r = put_params({{"bones", {{"femur", {{"elongate", -1.0}}}}}});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_TRUE(Json::parse(r->body).contains("error"));
  r = put_params({{"bones", {{"femur", {{"elongate", 1.1}}}}}}, std::string(64, 'a'));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 409);
  get_json("/rom/no_joint/grid", 404);
  get_json("/muscles/no_muscle/length-angle", 404);
  get_json("/muscles/biceps_l/length-angle?motion=knee_flexion_r", 404);
  get_json("/joints/no_joint/torque-angle", 404);
  get_json("/jobs/job-999", 404);
  get_json("/reports/" + std::string(64, '0'), 404);
  get_json("/rom/hip_r/grid?res=bad", 400);
  get_json("/rom/hip_r/grid?res=4x4x4&source=elsewhere", 400);
  get_json("/joints/knee_r/torque-angle?samples=2", 400);
  const auto e = client_->Post("/rom/hip_r/edit", "{\"cone_scale\": -1}", "application/json");
  ASSERT_TRUE(e);
  EXPECT_EQ(e->status, 400);
}

TEST_F(HttpApi, GridPayloadEqualsCliOutput) {
  const auto text = client_->Get("/rom/hip/grid?res=18x36x36&format=text");
  ASSERT_TRUE(text);
  ASSERT_EQ(text->status, 200);
  const auto json = get_json("/rom/hip/grid?res=18x36x36");
  TempDir out;
  const auto cli = run_cli("rom-grid --joint hip --res 18x36x36 -r \"" + out.path.string() + "\"", out.path);
  ASSERT_EQ(cli.status, 0) << cli.out;
  EXPECT_EQ(text->body, read_text_file((out.path / "hip_r.grid").string()));
  EXPECT_EQ(json, Json::parse(read_text_file((out.path / "hip_r.grid.json").string())));
  const auto g = grid_from_text(text->body, toy_model().skeleton);
  EXPECT_EQ(g.cells.size(), 23328u);
}

TEST_F(HttpApi, CurvesEndpoints) {
  const auto la = get_json("/muscles/biceps_l/length-angle?motion=elbow_flexion_l&samples=21");
  ASSERT_EQ(la["curves"].size(), 1u);
  EXPECT_EQ(la["curves"][0]["theta"].size(), 21u);
  EXPECT_EQ(la["curves"][0]["characteristics"]["classification"], "agonist");
  const auto csv = client_->Get("/muscles/biceps_l/length-angle?motion=elbow_flexion_l&format=csv");
  ASSERT_TRUE(csv);
  EXPECT_EQ(csv->body.rfind("theta,length\n", 0), 0u);
  const auto ta = get_json("/joints/knee_r/torque-angle");
  ASSERT_FALSE(ta["curves"].empty());
  for (const auto& c : ta["curves"]) {
    const auto ref = torque_angle_curve(toy_model(), c["motion"].get<std::string>());
    EXPECT_EQ(c["peak_theta"].get<double>(), ref.peak_theta);
  }
}

TEST_F(HttpApi, EditThenRetargetJobCompletes) {
  auto r = put_params({{"bones", {{"femur", {{"elongate", 1.2}}}}}});
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  const std::string naive_hash = Json::parse(r->body)["hash"];
  EXPECT_NE(naive_hash, model_hash(toy_model()));

  httplib::Headers stale{{"If-Match", "\"" + model_hash(toy_model()) + "\""}};
  const auto conflict = client_->Post("/rom/hip/edit", stale, "{\"tilt_deg\": 30, \"tilt_axis\": [1, 0, 0], \"cone_scale\": 0.63}",
                                      "application/json");
  ASSERT_TRUE(conflict);
  EXPECT_EQ(conflict->status, 409);
  const auto edit = client_->Post("/rom/hip/edit", "{\"tilt_deg\": 30, \"tilt_axis\": [1, 0, 0], \"cone_scale\": 0.63}",
                                  "application/json");
  ASSERT_TRUE(edit);
  ASSERT_EQ(edit->status, 200) << edit->body;
  const auto edit_json = Json::parse(edit->body)["edit"];
  EXPECT_NEAR(edit_json["joints"]["hip_r"]["cone_scale"].get<double>(), 1.0 / 0.63, 1e-12);

  const auto job = client_->Post("/jobs/retarget", "{\"resolution\": \"6x12x12\"}", "application/json");
  ASSERT_TRUE(job);
  ASSERT_EQ(job->status, 202) << job->body;
  const std::string id = Json::parse(job->body)["id"];
  const auto busy = put_params({{"bones", {{"femur", {{"elongate", 1.1}}}}}});
  ASSERT_TRUE(busy);
  EXPECT_EQ(busy->status, 409);

  Json status;
  double last = 0.0;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::minutes(10);
  do {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    status = get_json("/jobs/" + id);
    EXPECT_GE(status["progress"].get<double>(), last);
    last = status["progress"].get<double>();
  } while (status["status"] != "done" && status["status"] != "failed" && std::chrono::steady_clock::now() < deadline);
  ASSERT_EQ(status["status"], "done") << status.dump();
  EXPECT_EQ(status["progress"], 1.0);

  const auto report = get_json("/reports/" + status["result"].get<std::string>());
  const auto model = get_json("/model");
  EXPECT_EQ(report["model_hash"], model["hash"]);
  EXPECT_EQ(report["base_model_hash"], naive_hash);
  EXPECT_EQ(report["reference_hash"], model_hash(toy_model()));
  EXPECT_EQ(report["report"]["stages_completed"], 3);
  EXPECT_EQ(model["report"], status["result"]);
  ASSERT_EQ(report["report"]["grids"].size(), 1u);
  EXPECT_LT(report["report"]["grids"][0]["retargeted"].get<double>(), report["report"]["grids"][0]["unretargeted"].get<double>());

  const auto ta = get_json("/joints/knee_r/torque-angle");
  int matched = 0;
  for (const auto& c : ta["curves"])
    for (const auto& pk : report["report"]["peaks"])
      if (pk["motion"] == c["motion"]) {
        EXPECT_NEAR(c["peak_theta"].get<double>(), pk["after"].get<double>(), 1e-9) << pk["motion"];
        ++matched;
      }
  EXPECT_GT(matched, 0);
}

TEST(Cli, NoArgumentsPrintsUsageAndExitsTwo) {
  TempDir dir;
  const auto c = run_cli("", dir.path);
  EXPECT_EQ(c.status, 2);
  EXPECT_NE(c.out.find("rom-grid"), std::string::npos);
  EXPECT_EQ(run_cli("rom-grid --res 4x4", dir.path).status, 2);
  EXPECT_EQ(run_cli("frobnicate", dir.path).status, 2);
}

TEST(Cli, RomGridWritesFullResolutionHipGrid) {
  TempDir dir;
  const auto c = run_cli("rom-grid --joint hip --res 18x36x36 -r \"" + dir.path.string() + "\"", dir.path);
  ASSERT_EQ(c.status, 0) << c.out;
  EXPECT_NE(c.out.find("cells 23328"), std::string::npos) << c.out;
  const auto g = grid_from_text(read_text_file((dir.path / "hip_r.grid").string()), toy_model().skeleton);
  EXPECT_EQ(g.cells.size(), 23328u);
  EXPECT_TRUE(fs::exists(dir.path / "hip_r.grid.csv"));
}

TEST(Cli, RuntimeErrorsExitOne) {
  TempDir dir;
  const auto c = run_cli("rom-grid --joint nowhere -r \"" + dir.path.string() + "\"", dir.path);
  EXPECT_EQ(c.status, 1) << c.out;
  const auto broken = dir.path / "broken.json";
  std::ofstream(broken) << "{\"format\": \"msk-1\"}";
  EXPECT_EQ(run_cli("estimate -m \"" + broken.string() + "\"", dir.path).status, 1);
}

TEST(Cli, MakeToyAndEstimateRoundTrip) {
  TempDir dir;
  const auto model = (dir.path / "toy.json").string();
  const auto data = (dir.path / "poses.jsonl").string();
  ASSERT_EQ(run_cli("make-toy -o \"" + model + "\" --dataset-out \"" + data + "\" --poses 200", dir.path).status, 0);
  EXPECT_EQ(model_to_text(load_model(model)), read_text_file(model));
  const auto c = run_cli("estimate -m \"" + model + "\" -d \"" + data + "\" -r \"" + dir.path.string() + "\"", dir.path);
  ASSERT_EQ(c.status, 0) << c.out;
  const Model fitted = load_model((dir.path / "model.json").string());
  const auto in = ingest_dataset(data, fitted.skeleton);
  for (const auto& p : in.dataset.poses) EXPECT_TRUE(is_valid(fitted, p));
}
