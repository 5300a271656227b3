// shapepal-server: HTTP front end over the request handlers. Configuration
// comes from --config or the SHAPEPAL_CONFIG environment variable.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "httplib.h"
#include "shapepal/shapepal.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Shape palette HTTP service"};
  std::string config_path;
  if (const char* env = std::getenv("SHAPEPAL_CONFIG")) config_path = env;
  if (config_path.empty()) config_path = SHAPEPAL_DATA_DIR "/service.json";
  int port = -1;
  std::string host;
  app.add_option("--config", config_path, "service config file")->capture_default_str();
  app.add_option("--port", port, "listen port; 0 picks a free port")->check(CLI::Range(0, 65535));
  app.add_option("--host", host, "listen address");
  CLI11_PARSE(app, argc, argv);

  using namespace shapepal;
  ServiceConfig config;
  std::optional<Engine> engine;
  try {
    config = load_service_config(config_path);
    engine.emplace(Engine::load(config));
  } catch (const std::exception& e) {
    std::cerr << "startup failed: " << e.what() << "\n";
    return 1;
  }
  if (port >= 0) config.port = port;
  if (!host.empty()) config.host = host;

  httplib::Server server;
  server.new_task_queue = [threads = config.threads] { return new httplib::ThreadPool(static_cast<size_t>(threads)); };
  const Engine& shared = *engine;
  auto route = [&shared](const httplib::Request& req, httplib::Response& res) {
    const auto out = handle_request(shared, req.method, req.path, req.body);
    res.status = out.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(out.body.dump(), "application/json");
  };
  // Every path and method reaches the router so 404 and 405 carry error bodies.
  server.Get(R"(/.*)", route);
  server.Post(R"(/.*)", route);
  server.Put(R"(/.*)", route);
  server.Delete(R"(/.*)", route);
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });

  int bound = config.port;
  if (config.port == 0) {
    bound = server.bind_to_any_port(config.host);
  } else if (!server.bind_to_port(config.host, config.port)) {
    bound = -1;
  }
  if (bound < 0) {
    std::cerr << "cannot listen on " << config.host << ":" << config.port << "\n";
    return 1;
  }
  std::cout << "listening on " << config.host << ":" << bound << std::endl;
  return server.listen_after_bind() ? 0 : 1;
}
