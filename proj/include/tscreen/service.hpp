#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tscreen/cube.hpp"
#include "tscreen/geo.hpp"
#include "tscreen/ingest.hpp"
#include "tscreen/screen.hpp"

namespace httplib {
class Server;
}

namespace tscreen {

/// JSON API over an immutable cube, mounted under /v1.
class Service {
 public:
  Service(CountCube cube, CentroidTable centroids, ScreeningConfig defaults);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void mount(httplib::Server& server);

  /// Request handlers, usable without a socket. Throw tscreen::Error on bad input.
  nlohmann::json schema_json() const;
  nlohmann::json summary_json() const;
  nlohmann::json count(const nlohmann::json& body) const;
  nlohmann::json timeline(const nlohmann::json& body) const;
  nlohmann::json pivot(const nlohmann::json& body) const;
  std::string submit_screen(const nlohmann::json& body);
  /// nullopt for unknown ids.
  std::optional<nlohmann::json> screen_status(const std::string& id) const;

  /// Blocks until every submitted screen has finished.
  void wait_idle();

 private:
  struct Job {
    std::string status = "running";
    std::uint64_t scored = 0;
    nlohmann::json reports = nlohmann::json::array();
    std::string error;
  };

  DateWindow parse_window(const nlohmann::json& j) const;

  CountCube cube_;
  CentroidTable centroids_;
  ScreeningConfig defaults_;
  DatasetSummary summary_;
  mutable std::mutex jobs_mutex_;
  std::map<std::string, Job> jobs_;
  std::uint64_t next_job_ = 1;
  std::vector<std::jthread> workers_;
};

/// Binds and serves until the process is stopped. Returns false if binding fails.
bool serve(Service& service, const std::string& host, int port, const std::string& static_dir = {});

}  // namespace tscreen
