#pragma once

#include "msk/service/project.hpp"

#include <httplib.h>

namespace msk {

/// HTTP+JSON front end of a Project.
///   GET  /model                          current model, hash, params and edit
///   PUT  /model/params                   SkeletonParams body
///   POST /jobs/retarget                  optional {"resolution", "grid_joints"} body -> 202 {"id"}
///   GET  /jobs/{id}                      JobRecord
///   GET  /reports/{hash}                 stored report
///   GET  /rom/{joint}/grid               ?res=TxAxP &source=model|reference|target &format=json|text|csv
///   POST /rom/{joint}/edit               edit body (full joint edit or cone tilt)
///   GET  /muscles/{id}/length-angle      ?motion= &samples=
///   GET  /joints/{id}/torque-angle       ?samples= &activation=
/// Mutations honor an optional If-Match model hash (409 when stale). Errors are
/// {"error": message} with 400, 404 or 409.
class HttpService {
public:
  explicit HttpService(Project& project) : project_(project) { routes(); }

  httplib::Server& server() { return server_; }

  int bind_to_any_port(const std::string& host = "127.0.0.1") { return server_.bind_to_any_port(host); }
  bool bind(const std::string& host, int port) { return server_.bind_to_port(host, port); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  bool listen(const std::string& host, int port) { return server_.listen(host, port); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

private:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  static void send_json(httplib::Response& res, const Json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  static Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const NotFound& e) {
        send_json(res, {{"error", e.what()}}, 404);
      } catch (const Conflict& e) {
        send_json(res, {{"error", e.what()}}, 409);
      } catch (const Error& e) {
        send_json(res, {{"error", e.what()}}, 400);
      } catch (const std::exception& e) {
        send_json(res, {{"error", e.what()}}, 500);
      }
    };
  }

  static Json body_json(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    return parse_json(req.body, "request body");
  }

  static std::optional<std::string> if_match(const httplib::Request& req) {
    if (!req.has_header("If-Match")) return std::nullopt;
    std::string v = req.get_header_value("If-Match");
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    return v;
  }

  static int int_param(const httplib::Request& req, const char* key, int fallback) {
    if (!req.has_param(key)) return fallback;
    const auto s = req.get_param_value(key);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 3) throw Error(std::string(key) + ": expected an integer >= 3");
    return v;
  }

  static double double_param(const httplib::Request& req, const char* key, double fallback) {
    if (!req.has_param(key)) return fallback;
    const auto s = req.get_param_value(key);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) throw Error(std::string(key) + ": expected a number");
    return v;
  }

  static Json snapshot_json(const ProjectSnapshot& s) {
    return {{"hash", s.hash}, {"params", to_json(s.params)}, {"edit", to_json(s.edit)}, {"report", s.report}};
  }

  std::string known_joint(const Model& m, const std::string& joint) const {
    try {
      return resolve_joint_name(m.skeleton, joint);
    } catch (const Error& e) {
      throw NotFound(e.what());
    }
  }

  void routes() {
    server_.Get("/model", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto s = project_.snapshot();
      Json j = snapshot_json(*s);
      j["model"] = to_json(s->model);
      res.set_header("ETag", "\"" + s->hash + "\"");
      send_json(res, j);
    }));

    server_.Put("/model/params", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto params = params_from_json(body_json(req));
      const auto s = project_.set_params(params, if_match(req));
      res.set_header("ETag", "\"" + s->hash + "\"");
      send_json(res, snapshot_json(*s));
    }));

    server_.Post("/jobs/retarget", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json body = body_json(req);
      jsonpath::only_keys(body, {"resolution", "grid_joints"}, "request");
      PipelineConfig cfg = project_.pipeline();
      if (body.contains("resolution")) cfg.resolution = parse_resolution(jsonpath::string(body["resolution"], "request.resolution"));
      if (body.contains("grid_joints")) {
        cfg.grid_joints.clear();
        for (const auto& g : jsonpath::array(body["grid_joints"], "request.grid_joints"))
          cfg.grid_joints.push_back(known_joint(project_.reference(), jsonpath::string(g, "request.grid_joints[]")));
      }
      const auto id = project_.submit_retarget(if_match(req), cfg);
      send_json(res, project_.jobs().get(id)->to_json(), 202);
    }));

    server_.Get(R"(/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto job = project_.jobs().get(req.matches[1]);
      if (!job) throw NotFound("unknown job '" + std::string(req.matches[1]) + "'");
      send_json(res, job->to_json());
    }));

    server_.Get(R"(/reports/([0-9a-f]{64}))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      Json j;
      try {
        j = project_.store().get_report(req.matches[1]);
      } catch (const Error& e) {
        throw NotFound(e.what());
      }
      send_json(res, j);
    }));

    server_.Get(R"(/rom/([^/]+)/grid)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto s = project_.snapshot();
      const std::string joint = known_joint(s->model, req.matches[1]);
      const GridResolution r = req.has_param("res") ? parse_resolution(req.get_param_value("res")) : GridResolution{};
      const std::string source = req.has_param("source") ? req.get_param_value("source") : "model";
      RomGrid g;
      if (source == "model")
        g = joint_grid(s->model, project_.dataset(), joint, r);
      else if (source == "reference")
        g = joint_grid(project_.reference(), project_.dataset(), joint, r);
      else if (source == "target")
        g = joint_grid(project_.reference(), project_.dataset(), joint, r, &s->edit);
      else
        throw Error("source: expected model, reference or target");
      const Skeleton& skel = s->model.skeleton;
      const std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
      if (format == "json")
        send_json(res, grid_to_json(g, skel));
      else if (format == "text")
        res.set_content(grid_to_text(g, skel), "text/plain");
      else if (format == "csv")
        res.set_content(grid_to_csv(g), "text/csv");
      else
        throw Error("format: expected json, text or csv");
    }));

    server_.Post(R"(/rom/([^/]+)/edit)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string joint = known_joint(project_.reference(), req.matches[1]);
      const auto spec = edit_spec_from_json(body_json(req));
      const auto s = project_.set_edit(joint, spec, if_match(req));
      send_json(res, snapshot_json(*s));
    }));

    server_.Get(R"(/muscles/([^/]+)/length-angle)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto s = project_.snapshot();
      const std::string id = req.matches[1];
      try {
        s->model.muscle_index(id);
      } catch (const Error& e) {
        throw NotFound(e.what());
      }
      const std::string motion = req.has_param("motion") ? req.get_param_value("motion") : "";
      if (!motion.empty()) {
        const auto& ms = s->model.muscle(id).motions;
        if (std::find(ms.begin(), ms.end(), motion) == ms.end())
          throw NotFound("muscle '" + id + "' has no motion '" + motion + "'");
      }
      const int samples = int_param(req, "samples", 41);
      if (req.has_param("format") && req.get_param_value("format") == "csv") {
        if (motion.empty()) throw Error("format=csv needs a motion");
        res.set_content(length_curve_csv(length_angle_curve(s->model, id, motion, samples)), "text/csv");
        return;
      }
      send_json(res, length_angle_payload(s->model, id, motion, samples));
    }));

    server_.Get(R"(/joints/([^/]+)/torque-angle)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto s = project_.snapshot();
      const std::string joint = known_joint(s->model, req.matches[1]);
      send_json(res, torque_angle_payload(s->model, joint, int_param(req, "samples", 41), double_param(req, "activation", 1.0)));
    }));
  }

  Project& project_;
  httplib::Server server_;
};

}  // namespace msk
