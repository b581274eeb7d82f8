#include "itm/http.hpp"

#include "itm/error.hpp"

namespace itm {

namespace {

void send(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

Json error_body(const char* type, const std::string& message) {
  return Json{{"error", {{"type", type}, {"message", message}}}};
}

using Handler = std::function<Json(const httplib::Request&)>;

// Runs `h` and maps library errors onto HTTP status codes.
httplib::Server::Handler wrap(Handler h, int ok_status = 200) {
  return [h = std::move(h), ok_status](const httplib::Request& req, httplib::Response& res) {
    try {
      send(res, ok_status, h(req));
    } catch (const NotFoundError& e) {
      send(res, 404, error_body("not_found", e.what()));
    } catch (const ConflictError& e) {
      auto body = error_body("conflict", e.what());
      if (!e.group().empty()) body["error"]["group"] = e.group();
      send(res, 409, body);
    } catch (const ParseError& e) {
      send(res, 400, error_body("parse", e.what()));
    } catch (const ValidationError& e) {
      send(res, 400, error_body("validation", e.what()));
    } catch (const std::exception& e) {
      send(res, 500, error_body("internal", e.what()));
    }
  };
}

Json body_json(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("request body is not JSON: ") + e.what(), 0);
  }
}

}  // namespace

void register_routes(httplib::Server& server, Service& service) {
  constexpr const char* id = R"(/sessions/([A-Za-z0-9_.-]+))";
  auto path = [&](const char* suffix) { return std::string(id) + suffix; };

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, PATCH, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server.Post("/sessions", wrap([&](const auto& req) { return service.create_session(body_json(req)); }, 201));
  server.Get(path(""), wrap([&](const auto& req) { return service.get_session(req.matches[1]); }));
  server.Get(path("/anchors"), wrap([&](const auto& req) { return service.list_anchors(req.matches[1]); }));
  server.Get(path("/groups"), wrap([&](const auto& req) { return service.get_groups(req.matches[1]); }));
  server.Patch(path("/groups"),
               wrap([&](const auto& req) { return service.edit_groups(req.matches[1], body_json(req)); }));
  server.Put(path("/groups"),
             wrap([&](const auto& req) { return service.replace_groups(req.matches[1], body_json(req)); }));
  server.Post(path("/recover"), wrap([&](const auto& req) {
                const auto mode = req.has_param("mode") ? req.get_param_value("mode") : std::string();
                return service.recover(req.matches[1], mode);
              }));
  server.Get(path("/model"), wrap([&](const auto& req) {
               const bool full = req.has_param("full") && req.get_param_value("full") != "0";
               return service.get_model(req.matches[1], full);
             }));
  server.Get(path("/intrusion"), wrap([&](const auto& req) { return service.get_intrusion(req.matches[1]); }));
  server.Post(path("/intrusion"),
              wrap([&](const auto& req) { return service.post_intrusion(req.matches[1], body_json(req)); }));
}

}  // namespace itm
