#include <httplib.h>

#include "json_util.hpp"
#include "uavirl/demo_service.hpp"
#include "uavirl/errors.hpp"

namespace uavirl::demo {

namespace {

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  detail::ojson j;
  j["schema_version"] = kSchemaVersion;
  j["error"] = {{"code", code}, {"message", message}};
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

// Runs `fn` and maps library exceptions onto HTTP status codes.
template <typename Fn>
void handle(httplib::Response& res, int ok_status, Fn&& fn) {
  try {
    res.set_content(fn(), "application/json");
    res.status = ok_status;
  } catch (const NotFoundError& e) {
    send_error(res, 404, "not_found", e.what());
  } catch (const ConflictError& e) {
    send_error(res, 409, "conflict", e.what());
  } catch (const ConfigError& e) {
    send_error(res, 400, "invalid", e.what());
  } catch (const ContractError& e) {
    send_error(res, 400, "invalid", e.what());
  } catch (const CorruptRecordError& e) {
    send_error(res, 400, "invalid", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

}  // namespace

struct DemoHttpServer::Impl {
  DemoService& service;
  httplib::Server server;
  bool bound = false;

  explicit Impl(DemoService& s) : service(s) {
    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, 201, [&] {
        std::string scenario_id;
        if (!req.body.empty()) {
          detail::ojson body;
          try {
            body = detail::ojson::parse(req.body);
          } catch (const nlohmann::json::exception&) {
            throw ConfigError("request body is not valid JSON");
          }
          if (!body.is_object() || !body.contains("scenario_id") || !body.at("scenario_id").is_string())
            throw NotFoundError("scenario reference missing or malformed");
          scenario_id = body.at("scenario_id").get<std::string>();
        } else {
          scenario_id = req.get_param_value("scenario");
        }
        return service.create_session(scenario_id);
      });
    });
    server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, 200, [&] { return service.get_session(req.matches[1]); });
    });
    server.Post(R"(/sessions/([^/]+)/step)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, 200, [&] { return service.step_session(req.matches[1], req.body); });
    });
    server.Post(R"(/sessions/([^/]+)/finalize)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, 200, [&] { return service.finalize_session(req.matches[1]); });
    });
    server.Get(R"(/scenarios/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, 200, [&] { return service.get_scenario(req.matches[1]); });
    });
    server.Get("/policies", [this](const httplib::Request&, httplib::Response& res) {
      handle(res, 200, [&] { return service.list_policies(); });
    });
    server.Get(R"(/policies/([^/]+)/rollout)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, 200, [&] {
        std::uint64_t seed = 42;
        if (req.has_param("seed")) {
          try {
            seed = std::stoull(req.get_param_value("seed"));
          } catch (const std::logic_error&) {
            throw ConfigError("seed must be an unsigned integer");
          }
        }
        return service.rollout_policy(req.matches[1], req.get_param_value("scenario"), seed);
      });
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send_error(res, res.status, res.status == 404 ? "not_found" : "error", "no such route");
    });
  }
};

DemoHttpServer::DemoHttpServer(DemoService& service) : impl_(std::make_unique<Impl>(service)) {}

DemoHttpServer::~DemoHttpServer() { stop(); }

int DemoHttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw ConfigError("could not bind " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw ConfigError("could not bind " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return bound;
}

void DemoHttpServer::listen() {
  if (!impl_->bound) throw ContractError("DemoHttpServer::listen before bind");
  impl_->server.listen_after_bind();
}

void DemoHttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool DemoHttpServer::running() const { return impl_->server.is_running(); }

}  // namespace uavirl::demo
