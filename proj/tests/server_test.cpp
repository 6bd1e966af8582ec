#include <gtest/gtest.h>

#include <thread>

#include "bridge_test_util.hpp"
#include "sloow/bridge/server.hpp"

using namespace sloow;
using namespace sloow::bridge;
using sloow::test::Client;

namespace {

CurtainState curtain(int opening) { return {opening, opening, 2.0, 0.0}; }

Endpoint any_port() { return {"127.0.0.1", 0}; }

}  // namespace

TEST(DeviceSession, HandshakeAndCommands) {
  Device device(curtain(70));
  DeviceSession s(device);
  EXPECT_EQ(s.handle("SET 66\n"), "ERR STATE\n");
  EXPECT_EQ(s.handle("GET\n"), "ERR STATE\n");
  EXPECT_EQ(s.handle("HELLO v1\n"), "OK 70\n");
  EXPECT_EQ(s.state(), SessionState::ready);
  EXPECT_EQ(s.handle("HELLO v1\n"), "ERR STATE\n");
  EXPECT_EQ(s.handle("SET 66\n"), "OK 66\n");
  EXPECT_EQ(s.handle("GET\n"), "OK 66\n");
  EXPECT_EQ(s.handle("SET 101\n"), "ERR RANGE\n");
  EXPECT_EQ(s.handle("GET\n"), "OK 66\n");
  EXPECT_EQ(s.handle("set 5\n"), "ERR PARSE\n");
  EXPECT_EQ(s.handle("OK 5\n"), "ERR STATE\n");
  EXPECT_EQ(s.handle("BYE\n"), "BYE\n");
  EXPECT_EQ(s.state(), SessionState::closed);
}

TEST(DeviceSession, RejectsUnknownVersion) {
  Device device(curtain(70));
  DeviceSession s(device);
  EXPECT_EQ(s.handle("HELLO v2\n"), "ERR STATE\n");
  EXPECT_EQ(s.state(), SessionState::awaiting_hello);
}

TEST(Device, LossyChannelReportsUnchangedOpening) {
  Device device(curtain(70), CommandChannel{1.0, 0.0});
  EXPECT_EQ(device.set(66), 70);
  EXPECT_EQ(device.get(), 70);
}

TEST(DeviceServer, ServesOverTcp) {
  DeviceServer server(curtain(70), any_port());
  ASSERT_NE(server.port(), 0);
  Client c(server.port());
  EXPECT_EQ(c.send("SET 66\n"), "ERR STATE\n");
  EXPECT_EQ(c.send("HELLO v1\n"), "OK 70\n");
  EXPECT_EQ(c.send("SET 66\n"), "OK 66\n");
  EXPECT_EQ(c.send("GET\n"), "OK 66\n");
  EXPECT_EQ(c.send("SET 101\n"), "ERR RANGE\n");
  EXPECT_EQ(c.send("BYE\n"), "BYE\n");
  EXPECT_EQ(c.recv(), "<eof>");
}

TEST(DeviceServer, BusyEndpointIsAStartupError) {
  DeviceServer first(curtain(70), any_port());
  EXPECT_THROW(DeviceServer(curtain(70), Endpoint{"127.0.0.1", first.port()}), StartupError);
}

TEST(DeviceServer, OverlongLineGetsParseErrorAndSessionContinues) {
  DeviceServer server(curtain(70), any_port());
  Client c(server.port());
  EXPECT_EQ(c.send("HELLO v1\n"), "OK 70\n");
  EXPECT_EQ(c.send(std::string(200, 'X') + "\n"), "ERR PARSE\n");
  EXPECT_EQ(c.send("GET\n"), "OK 70\n");
  // a split write still forms one line
  c.raw("SE");
  EXPECT_EQ(c.send("T 54\n"), "OK 54\n");
}

TEST(DeviceServer, GarbageBytesNeverKillTheServer) {
  DeviceServer server(curtain(70), any_port());
  {
    Client c(server.port());
    RandomStream r(3, "garbage");
    for (int i = 0; i < 200; ++i) {
      std::string line;
      const auto n = r.next_u64() % 63;
      for (std::size_t k = 0; k < n; ++k) {
        char ch = static_cast<char>(r.next_u64() & 0xFF);
        line += ch == '\n' ? 'x' : ch;
      }
      const auto reply = c.send(line + "\n");
      ASSERT_TRUE(reply == "ERR PARSE\n" || reply == "ERR STATE\n" || reply == "ERR RANGE\n") << reply;
    }
  }
  Client d(server.port());
  EXPECT_EQ(d.send("HELLO v1\n"), "OK 70\n");
}

TEST(DeviceServer, ConcurrentSessionsAreSerialized) {
  DeviceServer server(curtain(70), any_port());
  constexpr int kClients = 6, kOps = 150;
  std::vector<std::thread> threads;
  std::atomic<int> bad = 0;
  for (int i = 0; i < kClients; ++i)
    threads.emplace_back([&, i] {
      Client c(server.port());
      if (c.send("HELLO v1\n").rfind("OK ", 0) != 0) ++bad;
      RandomStream r(static_cast<std::uint64_t>(i), "client");
      for (int k = 0; k < kOps; ++k) {
        const bool set = r.bernoulli(0.7);
        const auto reply = set ? c.send("SET " + std::to_string(r.next_u64() % 101) + "\n") : c.send("GET\n");
        if (reply.rfind("OK ", 0) != 0) {
          ++bad;
          continue;
        }
        const int v = std::stoi(reply.substr(3));
        if (v < 0 || v > 100) ++bad;
      }
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(bad.load(), 0);
  const int final_opening = server.device().get();
  EXPECT_GE(final_opening, 0);
  EXPECT_LE(final_opening, 100);
}

TEST(DeviceServer, StopClosesOpenSessions) {
  auto server = std::make_unique<DeviceServer>(curtain(70), any_port());
  Client c(server->port());
  EXPECT_EQ(c.send("HELLO v1\n"), "OK 70\n");
  server->stop();
  EXPECT_EQ(c.recv(), "<eof>");
}
