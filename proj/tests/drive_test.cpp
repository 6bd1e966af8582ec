#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include "sloow/bridge/drive.hpp"
#include "sloow/bridge/server.hpp"
#include "sloow/simulation.hpp"

using namespace sloow;
using namespace sloow::bridge;

namespace {

CurtainState curtain(int opening) { return {opening, opening, 2.0, 0.0}; }

DriveOptions fast() {
  DriveOptions o;
  o.backoff_initial = std::chrono::milliseconds(5);
  o.backoff_cap = std::chrono::milliseconds(20);
  o.io_timeout = std::chrono::milliseconds(500);
  return o;
}

std::size_t set_count(const std::vector<DriveLogEntry>& log) {
  std::size_t n = 0;
  for (const auto& e : log) n += !is_hold(e.command);
  return n;
}

// Sensor that runs a hook before handing out each reading.
class HookedSensor : public SensorSource {
 public:
  HookedSensor(std::vector<double> r, std::function<void(std::size_t)> hook) : r_(std::move(r)), hook_(std::move(hook)) {}
  std::optional<double> next() override {
    if (i_ >= r_.size()) return std::nullopt;
    hook_(i_);
    return r_[i_++];
  }

 private:
  std::vector<double> r_;
  std::function<void(std::size_t)> hook_;
  std::size_t i_ = 0;
};

// Accepts one session and answers every SET with ERR RANGE.
class RangeRejectingDevice {
 public:
  RangeRejectingDevice() : listener_(listen_on({"127.0.0.1", 0})), port_(local_port(listener_)) {
    thread_ = std::thread([this] {
      Socket conn(::accept(listener_.fd(), nullptr, nullptr));
      LineReader reader(conn);
      try {
        while (auto line = reader.next()) {
          const auto d = decode(line->text);
          const auto* m = std::get_if<Message>(&d);
          if (m && std::holds_alternative<Hello>(*m)) write_all(conn, encode(Ok{70}));
          else if (m && std::holds_alternative<Bye>(*m)) {
            write_all(conn, encode(Bye{}));
            break;
          } else write_all(conn, encode(Err{ErrorCode::range}));
        }
      } catch (const IoError&) {
      }
    });
  }
  ~RangeRejectingDevice() { thread_.join(); }
  std::uint16_t port() const { return port_; }

 private:
  Socket listener_;
  std::uint16_t port_;
  std::thread thread_;
};

}  // namespace

TEST(Drive, ConstantReadingsSendNothing) {
  DeviceServer server(curtain(70), {"127.0.0.1", 0});
  ScriptedSensor sensor(std::vector<double>(200, 40.0));
  const auto log = drive(ControllerConfig{}, sensor, {"127.0.0.1", server.port()}, fast());
  EXPECT_EQ(log.size(), 200u);
  EXPECT_EQ(set_count(log), 0u);
  EXPECT_EQ(server.device().get(), 70);
}

TEST(Drive, OneRiseSendsExactlyOneSet) {
  DeviceServer server(curtain(70), {"127.0.0.1", 0});
  ScriptedSensor sensor({40.00, 40.20});
  const auto log = drive(ControllerConfig{}, sensor, {"127.0.0.1", server.port()}, fast());
  ASSERT_EQ(log.size(), 2u);
  EXPECT_TRUE(is_hold(log[0].command));
  EXPECT_EQ(log[1].command, Command{SetOpening{66}});
  EXPECT_EQ(log[1].reply, "OK 66");
  EXPECT_EQ(log[1].status, DriveStatus::ok);
  EXPECT_EQ(log[1].t, 25.0);
  EXPECT_EQ(server.device().get(), 66);
}

TEST(Drive, RangeErrorRollsBackToConfirmedOpening) {
  RangeRejectingDevice device;
  ScriptedSensor sensor({40.00, 40.20, 40.40});
  const auto log = drive(ControllerConfig{}, sensor, {"127.0.0.1", device.port()}, fast());
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log[1].command, Command{SetOpening{66}});
  EXPECT_EQ(log[1].reply, "ERR RANGE");
  EXPECT_EQ(log[1].status, DriveStatus::failed);
  EXPECT_EQ(log[1].target_after, 70);
  // next rise starts again from the confirmed 70
  EXPECT_EQ(log[2].command, Command{SetOpening{66}});
}

TEST(Drive, AdoptsDeviceOpeningAndReconcilesLossyDevice) {
  DeviceServer server(curtain(82), {"127.0.0.1", 0}, CommandChannel{1.0, 0.0});
  ScriptedSensor sensor({40.00, 40.20});
  const auto log = drive(ControllerConfig{}, sensor, {"127.0.0.1", server.port()}, fast());
  EXPECT_EQ(log[1].command, Command{SetOpening{78}});
  EXPECT_EQ(log[1].reply, "OK 82");
  EXPECT_EQ(log[1].status, DriveStatus::reconciled);
  EXPECT_EQ(log[1].target_after, 82);
}

TEST(Drive, SurvivesConnectionLossWithStatePreserved) {
  auto server = std::make_unique<DeviceServer>(curtain(70), Endpoint{"127.0.0.1", 0});
  const std::uint16_t port = server->port();
  // reading index:     0      1      2      3      4      5
  HookedSensor sensor({40.00, 40.20, 40.40, 40.40, 40.60, 40.80}, [&](std::size_t i) {
    if (i == 2) server.reset();  // device disappears before the third reading
    if (i == 4) server = std::make_unique<DeviceServer>(curtain(66), Endpoint{"127.0.0.1", port});
  });
  const auto log = drive(ControllerConfig{}, sensor, {"127.0.0.1", port}, fast());
  ASSERT_EQ(log.size(), 6u);
  EXPECT_EQ(log[1].status, DriveStatus::ok);
  EXPECT_EQ(log[2].command, Command{SetOpening{62}});
  EXPECT_EQ(log[2].status, DriveStatus::failed);
  EXPECT_EQ(log[2].reply, "<no connection>");
  EXPECT_EQ(log[2].target_after, 66);
  EXPECT_TRUE(is_hold(log[3].command));  // prev_reading survived the failure
  EXPECT_EQ(log[4].command, Command{SetOpening{62}});
  EXPECT_EQ(log[4].status, DriveStatus::ok);
  EXPECT_EQ(log[5].command, Command{SetOpening{58}});
  EXPECT_EQ(server->device().get(), 58);
}

TEST(Drive, UnreachableDeviceThrows) {
  std::uint16_t port;
  {
    DeviceServer s(curtain(70), {"127.0.0.1", 0});
    port = s.port();
  }
  ScriptedSensor sensor({40.0});
  EXPECT_THROW(drive(ControllerConfig{}, sensor, {"127.0.0.1", port}, fast()), IoError);
}

TEST(Drive, RealTimePacesTicks) {
  DeviceServer server(curtain(70), {"127.0.0.1", 0});
  ScriptedSensor sensor(std::vector<double>(6, 40.0));
  auto opts = fast();
  opts.tick_s = 0.05;
  opts.real_time = true;
  const auto log = drive(ControllerConfig{}, sensor, {"127.0.0.1", server.port()}, opts);
  ASSERT_EQ(log.size(), 6u);
  for (std::size_t i = 1; i < log.size(); ++i) {
    const double gap = std::chrono::duration<double>(log[i].wall_time - log[i - 1].wall_time).count();
    EXPECT_NEAR(gap, 0.05, 0.03) << i;
  }
  const double total = std::chrono::duration<double>(log.back().wall_time - log.front().wall_time).count();
  EXPECT_GE(total, 0.25 - 0.005);
}

TEST(Drive, MatchesInProcessSimulation) {
  ScenarioConfig cfg;
  cfg.channel = {0.0, 0.0};
  const auto trace = run_scenario(cfg);
  std::vector<double> readings;
  for (const auto& e : trace.sensor_log) readings.push_back(e.rh_read);

  DeviceServer server(curtain(cfg.controller.initial_opening), {"127.0.0.1", 0});
  ScriptedSensor sensor(readings);
  const auto log = drive(cfg.controller, sensor, {"127.0.0.1", server.port()}, fast());

  std::vector<std::pair<double, int>> sim, net;
  for (const auto& c : trace.commands) sim.emplace_back(c.t, c.command.target_pct);
  for (const auto& e : log)
    if (const auto* s = std::get_if<SetOpening>(&e.command)) net.emplace_back(e.t, s->target_pct);
  ASSERT_FALSE(sim.empty());
  EXPECT_EQ(net, sim);
}

TEST(LoadReadings, ParsesAndValidates) {
  const auto path = std::filesystem::temp_directory_path() / "sloow_readings_test.txt";
  {
    std::ofstream(path) << "# header\n40.00\n\n40.20  # rise\n";
  }
  EXPECT_EQ(load_readings(path.string()), (std::vector<double>{40.0, 40.2}));
  {
    std::ofstream(path) << "40\nabc\n";
  }
  EXPECT_THROW(load_readings(path.string()), InputError);
  EXPECT_THROW(load_readings("/nonexistent/readings.txt"), IoError);
}
