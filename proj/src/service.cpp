#include "tscreen/service.hpp"

#include <httplib.h>

#include "tscreen/errors.hpp"
#include "tscreen/pivot.hpp"
#include "tscreen/report_io.hpp"

namespace tscreen {
namespace {

nlohmann::json window_json(const DateWindow& w) {
  return {{"start", format_date(w.start)}, {"end", format_date(w.end())}, {"length", w.length}};
}

std::optional<RegionSet> parse_region(const nlohmann::json& body) {
  if (!body.contains("region") || body.at("region").is_null()) return std::nullopt;
  RegionSet r;
  r.members = body.at("region").get<std::vector<std::string>>();
  if (r.members.empty()) return std::nullopt;
  std::sort(r.members.begin(), r.members.end());
  r.seed = r.members.front();
  return r;
}

}  // namespace

Service::Service(CountCube cube, CentroidTable centroids, ScreeningConfig defaults)
    : cube_(std::move(cube)), centroids_(std::move(centroids)), defaults_(std::move(defaults)) {
  std::vector<EventRecord> events(cube_.events().begin(), cube_.events().end());
  summary_ = summarize(events, cube_.schema());
}

Service::~Service() { wait_idle(); }

void Service::wait_idle() {
  std::vector<std::jthread> workers;
  {
    std::lock_guard lock(jobs_mutex_);
    workers.swap(workers_);
  }
  workers.clear();  // joins
}

DateWindow Service::parse_window(const nlohmann::json& j) const {
  if (j.is_null()) return DateWindow{cube_.first_day(), cube_.calendar_days()};
  const Day start = parse_date_or_throw(j.at("start").get<std::string>());
  if (j.contains("length")) return DateWindow{start, j.at("length").get<int>()};
  if (j.contains("end")) {
    const Day end = parse_date_or_throw(j.at("end").get<std::string>());
    return DateWindow{start, days_between(start, end) + 1};
  }
  throw QueryError("window needs 'length' or 'end'");
}

nlohmann::json Service::schema_json() const {
  auto j = cube_.schema().to_json();
  if (cube_.calendar_days() > 0) {
    j["calendar"] = {{"first", format_date(cube_.first_day())}, {"last", format_date(cube_.last_day())}};
  }
  if (auto loc = cube_.schema().location_dimension()) j["location_attribute"] = cube_.schema().dimension(*loc).name;
  auto& labels = j["domains"] = nlohmann::json::object();
  for (std::size_t d = 0; d < cube_.schema().dimension_count(); ++d) {
    labels[cube_.schema().dimension(d).name] = cube_.schema().dimension(d).labels;
  }
  return j;
}

nlohmann::json Service::summary_json() const {
  auto j = summary_.to_json();
  if (auto loc = cube_.schema().location_dimension()) j["location_attribute"] = cube_.schema().dimension(*loc).name;
  return j;
}

nlohmann::json Service::count(const nlohmann::json& body) const {
  auto q = Conjunction::from_json(body.value("conjunction", nlohmann::json::object()));
  auto w = parse_window(body.value("window", nlohmann::json()));
  return {{"count", cube_.count(q, w)}, {"window", window_json(w)}};
}

nlohmann::json Service::timeline(const nlohmann::json& body) const {
  auto config = defaults_;
  config.window_length = body.value("window_length", config.window_length);
  config.stride = body.value("stride", config.stride);
  config.reference_length = body.value("reference_length", config.reference_length);
  auto q = Conjunction::from_json(body.value("conjunction", nlohmann::json::object()));
  auto points = pvalue_timeline(cube_, q, parse_region(body), config);
  auto out = nlohmann::json::array();
  for (const auto& p : points) {
    out.push_back({{"window", window_json(p.window)},
                   {"observed", p.observed},
                   {"expected", p.expected},
                   {"p_value", p.p_value},
                   {"test", std::string(test_name(p.test_used))}});
  }
  return out;
}

nlohmann::json Service::pivot(const nlohmann::json& body) const {
  auto filter = Conjunction::from_json(body.value("filter", nlohmann::json::object()));
  auto w = parse_window(body.value("window", nlohmann::json()));
  auto order = body.value("order", std::string("frequency")) == "domain" ? ColumnOrder::kDomain
                                                                         : ColumnOrder::kGlobalFrequency;
  return tscreen::pivot(cube_, body.at("row").get<std::string>(), body.at("col").get<std::string>(), filter, w, order)
      .to_json();
}

std::string Service::submit_screen(const nlohmann::json& body) {
  auto cfg_json = defaults_.to_json();
  if (body.contains("config")) cfg_json.merge_patch(body.at("config"));
  auto config = ScreeningConfig::from_json(cfg_json);
  config.validate(cube_.schema());

  std::lock_guard lock(jobs_mutex_);
  std::string id = "job-" + std::to_string(next_job_++);
  jobs_[id] = Job{};
  workers_.emplace_back([this, id, config] {
    Job done;
    try {
      auto regions = region_sets_for(cube_.schema(), config, centroids_);
      ScreenResult result = config.prospective
                                ? prospective_screen(cube_, config, regions, config.frontier.value_or(cube_.last_day()))
                                : massive_screen(cube_, config, regions);
      done.status = "done";
      done.scored = result.scored;
      for (const auto& r : result.reports) done.reports.push_back(report_to_json(r, cube_.schema()));
    } catch (const std::exception& e) {
      done.status = "failed";
      done.error = e.what();
    }
    std::lock_guard guard(jobs_mutex_);
    jobs_[id] = std::move(done);
  });
  return id;
}

std::optional<nlohmann::json> Service::screen_status(const std::string& id) const {
  std::lock_guard lock(jobs_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  const auto& job = it->second;
  nlohmann::json j{{"id", id}, {"status", job.status}, {"scored", job.scored}, {"reports", job.reports}};
  if (!job.error.empty()) j["error"] = job.error;
  return j;
}

void Service::mount(httplib::Server& server) {
  auto reply = [](httplib::Response& res, const nlohmann::json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  };
  // Wraps a handler so library errors become 400 responses.
  auto guarded = [reply](auto fn) {
    return [reply, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const nlohmann::json::exception& e) {
        reply(res, {{"error", std::string("bad request: ") + e.what()}}, 400);
      } catch (const Error& e) {
        reply(res, {{"error", e.what()}}, 400);
      }
    };
  };
  auto body_of = [](const httplib::Request& req) {
    return req.body.empty() ? nlohmann::json::object() : nlohmann::json::parse(req.body);
  };

  server.Get("/v1/health", [reply](const httplib::Request&, httplib::Response& res) {
    reply(res, {{"status", "ok"}});
  });
  server.Get("/v1/schema", guarded([this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, schema_json());
  }));
  server.Get("/v1/summary", guarded([this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, summary_json());
  }));
  server.Post("/v1/count", guarded([this, reply, body_of](const httplib::Request& req, httplib::Response& res) {
    reply(res, count(body_of(req)));
  }));
  server.Post("/v1/timeline", guarded([this, reply, body_of](const httplib::Request& req, httplib::Response& res) {
    reply(res, timeline(body_of(req)));
  }));
  server.Post("/v1/pivot", guarded([this, reply, body_of](const httplib::Request& req, httplib::Response& res) {
    reply(res, pivot(body_of(req)));
  }));
  server.Post("/v1/screen", guarded([this, reply, body_of](const httplib::Request& req, httplib::Response& res) {
    reply(res, {{"id", submit_screen(body_of(req))}}, 202);
  }));
  server.Get(R"(/v1/screen/([A-Za-z0-9\-]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
    auto status = screen_status(req.matches[1]);
    if (!status) {
      reply(res, {{"error", "unknown screen id"}}, 404);
      return;
    }
    reply(res, *status);
  });
}

bool serve(Service& service, const std::string& host, int port, const std::string& static_dir) {
  httplib::Server server;
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  service.mount(server);
  if (!static_dir.empty()) server.set_mount_point("/", static_dir);
  if (!server.bind_to_port(host, port)) return false;
  return server.listen_after_bind();
}

}  // namespace tscreen
