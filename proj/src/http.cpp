#include "emorec/http.hpp"

namespace emorec {

namespace {

std::optional<std::string> param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

void send(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

}  // namespace

std::unique_ptr<httplib::Server> make_http_server(Service& service, const std::filesystem::path& static_dir) {
  auto server = std::make_unique<httplib::Server>();
  auto& svc = service;
  server->Post("/mood", [&svc](const httplib::Request& req, httplib::Response& res) { send(res, svc.post_mood(req.body)); });
  server->Get("/recommendations", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_recommendations(param(req, "user_id"), param(req, "k")));
  });
  server->Post("/feedback",
               [&svc](const httplib::Request& req, httplib::Response& res) { send(res, svc.post_feedback(req.body)); });
  server->Get("/ledger/verify",
              [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.get_ledger_verify()); });
  server->Get("/metrics/requests",
              [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.get_requests_metrics()); });
  server->Get("/balance", [&svc](const httplib::Request& req, httplib::Response& res) {
    send(res, svc.get_balance(param(req, "user_id")));
  });
  server->Get("/catalog", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.get_catalog()); });
  server->Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send(res, {200, {{"status", "ok"}}});
  });
  server->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    send(res, {500, {{"error", "Internal"}, {"message", message}}});
  });
  if (!static_dir.empty()) server->set_mount_point("/", static_dir.string());
  return server;
}

}  // namespace emorec
