#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "support.hpp"
#include "viewshift/errors.hpp"
#include "viewshift/giantbomb_client.hpp"

using namespace viewshift;
using nlohmann::json;

namespace {

// Minimal GiantBomb stand-in on a loopback port.
class FakeService {
 public:
  FakeService() {
    server_.Get("/api/search/", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      if (reply_status_ != 200) {
        res.status = reply_status_;
        return;
      }
      if (req.get_param_value("api_key") == "bad") {
        res.set_content(json{{"status_code", 100}, {"error", "Invalid API Key"}}.dump(), "application/json");
        return;
      }
      const std::string q = req.get_param_value("query");
      json results = json::array();
      if (q == "Overwatch") results.push_back({{"name", "Overwatch"}, {"guid", "3030-48190"}});
      results.push_back({{"name", "Unrelated"}, {"guid", "3030-1"}});
      res.set_content(json{{"status_code", 1}, {"results", results}}.dump(), "application/json");
    });
    server_.Get(R"(/api/game/([^/]+)/)", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      const json detail = {{"status_code", 1},
                           {"results", {{"name", "Overwatch"}, {"guid", req.matches[1].str()}, {"deck", "d"}}}};
      res.set_content(detail.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/api"; }
  int hits() const { return hits_; }
  void reply_with(int status) { reply_status_ = status; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> hits_{0};
  std::atomic<int> reply_status_{200};
};

ClientConfig live_config(const FakeService& svc, const std::string& cache) {
  ClientConfig c;
  c.base_url = svc.base_url();
  c.api_key = "k";
  c.rate_limit = 50.0;
  c.cache_dir = cache;
  c.live = true;
  c.timeout_seconds = 5;
  return c;
}

}  // namespace

TEST_CASE("live fetch issues search then detail and caches the record") {
  FakeService svc;
  testing::TempDir dir("client-cache");
  {
    GiantBombClient client(live_config(svc, dir.path().string()));
    const FetchResult r = client.fetch_game("Overwatch");
    REQUIRE(r.status == FetchStatus::ok);
    CHECK(r.metadata->name == "Overwatch");
    CHECK(client.request_count() == 2);
    CHECK(std::filesystem::exists(dir.file("overwatch.json")));

    const FetchResult again = client.fetch_game("overwatch");
    CHECK(again.status == FetchStatus::ok);
    CHECK(client.request_count() == 2);
  }
  CHECK(svc.hits() == 2);

  GiantBombClient fresh(live_config(svc, dir.path().string()));
  CHECK(fresh.fetch_game("Overwatch").status == FetchStatus::ok);
  CHECK(fresh.request_count() == 0);

  GiantBombClient client(live_config(svc, dir.path().string()));
  CHECK(client.fetch_game("Nothing Like It").status == FetchStatus::not_found);
  CHECK(client.request_count() == 1);
  CHECK(client.fetch_game("3030-48190").status == FetchStatus::ok);
  CHECK(client.request_count() == 2);
}

TEST_CASE("fixture mode never touches the network") {
  FakeService svc;
  testing::TempDir dir("client-fixtures");
  const json record = {{"query", "Overwatch"},
                       {"search", {{"status_code", 1}, {"results", {{{"name", "Overwatch"}, {"guid", "3030-7"}}}}}},
                       {"details", {{"3030-7", {{"status_code", 1}, {"results", {{"name", "Overwatch"}}}}}}}};
  std::ofstream(dir.file("overwatch.json")) << record.dump();
  ClientConfig c;
  c.base_url = svc.base_url();
  c.fixture_dir = dir.path().string();
  GiantBombClient client(c);
  CHECK(client.fetch_game("Overwatch").status == FetchStatus::ok);
  CHECK(client.fetch_game("Missing Game").status == FetchStatus::not_found);
  CHECK(client.fetch_game("!!!").status == FetchStatus::not_found);
  CHECK(client.request_count() == 0);
  CHECK(svc.hits() == 0);
}

TEST_CASE("authentication and transport failures are typed") {
  FakeService svc;
  testing::TempDir dir("client-errors");
  ClientConfig c = live_config(svc, dir.path().string());

  c.api_key.clear();
  CHECK_THROWS_AS(GiantBombClient(c).fetch_game("Overwatch"), AuthError);
  CHECK(svc.hits() == 0);

  c.api_key = "bad";
  CHECK_THROWS_AS(GiantBombClient(c).fetch_game("Overwatch"), AuthError);

  c.api_key = "k";
  svc.reply_with(401);
  CHECK_THROWS_AS(GiantBombClient(c).fetch_game("Overwatch"), AuthError);
  svc.reply_with(403);
  CHECK_THROWS_AS(GiantBombClient(c).fetch_game("Overwatch"), AuthError);
  svc.reply_with(500);
  CHECK_THROWS_AS(GiantBombClient(c).fetch_game("Overwatch"), TransportError);
  svc.reply_with(404);
  CHECK(GiantBombClient(c).fetch_game("Overwatch").status == FetchStatus::not_found);
  CHECK(std::filesystem::exists(dir.file("overwatch.json")));

  ClientConfig dead = c;
  dead.base_url = "http://127.0.0.1:1/api";
  dead.cache_dir.clear();
  dead.timeout_seconds = 2;
  CHECK_THROWS_AS(GiantBombClient(dead).fetch_game("Overwatch"), TransportError);

  c.rate_limit = 0;
  CHECK_THROWS_AS(GiantBombClient{c}, ConfigError);
}

TEST_CASE("requests respect the rate limit") {
  FakeService svc;
  ClientConfig c = live_config(svc, "");
  c.rate_limit = 20.0;
  GiantBombClient client(c);
  std::vector<std::thread> workers;
  for (int t = 0; t < 3; ++t) {
    workers.emplace_back([&client, t] {
      for (int i = 0; i < 4; ++i) client.fetch_game("Overwatch " + std::to_string(t * 10 + i));
    });
  }
  for (auto& w : workers) w.join();
  auto log = client.request_log();
  REQUIRE(log.size() == 12);
  std::sort(log.begin(), log.end());
  const auto min_gap = std::chrono::duration<double>(1.0 / c.rate_limit) * 0.98;
  for (std::size_t i = 1; i < log.size(); ++i) CHECK(log[i] - log[i - 1] >= min_gap);
  // No sliding window of one second holds more than rate_limit requests.
  for (std::size_t i = 0; i < log.size(); ++i) {
    std::size_t in_window = 0;
    for (std::size_t j = i; j < log.size() && log[j] - log[i] < std::chrono::seconds(1); ++j) ++in_window;
    CHECK(in_window <= 20);
  }
}
