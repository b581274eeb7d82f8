// HTTP service for interactive grouping sessions.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "itm/http.hpp"

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive topic grouping service"};
  std::string host = env_or("ITM_HOST", "127.0.0.1");
  int port = std::stoi(env_or("ITM_PORT", "8080"));
  itm::ServiceConfig config;
  config.data_dir = env_or("ITM_DATA_DIR", "data");
  config.default_num_anchors = std::stoul(env_or("ITM_DEFAULT_T", "500"));
  std::string data_dir = config.data_dir.string();
  std::string static_dir = env_or("ITM_STATIC_DIR", "");

  app.add_option("--host", host, "Bind address (env ITM_HOST)")->capture_default_str();
  app.add_option("--port", port, "Port, 0 picks a free one (env ITM_PORT)")->capture_default_str();
  app.add_option("--data-dir", data_dir, "Holds corpora/, sessions/ and cache/ (env ITM_DATA_DIR)")
      ->capture_default_str();
  app.add_option("-T,--default-num-anchors", config.default_num_anchors, "Default T for new sessions (env ITM_DEFAULT_T)")
      ->capture_default_str();
  app.add_option("--candidate-filter", config.default_candidate_filter, "Default anchor document-frequency floor")
      ->capture_default_str();
  app.add_option("--static", static_dir, "Serve files from this directory at / (env ITM_STATIC_DIR)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  config.data_dir = data_dir;

  try {
    itm::Service service(config);
    httplib::Server server;
    itm::register_routes(server, service);
    if (!static_dir.empty() && !server.set_mount_point("/", static_dir)) {
      std::cerr << "error: cannot serve " << static_dir << '\n';
      return 1;
    }
    const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
      std::cerr << "error: cannot bind " << host << ':' << port << '\n';
      return 1;
    }
    std::cout << "listening on http://" << host << ':' << bound << std::endl;
    server.listen_after_bind();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
