// Copyright 2026 The CommCorr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <doctest.h>

#include "commcorr/comm/comm_graph.h"
#include "commcorr/comm/layout.h"
#include "commcorr/env/channel.h"
#include "commcorr/env/scenario.h"
#include "commcorr/env/world.h"
#include "testing.h"

using namespace commcorr;
using env::Vec2;
using nn::Vector;

namespace {

std::vector<env::Scenario> AllScenarios() {
  return {env::MakeCoopComm(5), env::MakeCoopComm(3), env::MakeHierarchicalComm(),
          env::MakeCovertComm(), env::MakeCovertComm(4, 4, false), env::MakeMultiTargetComm()};
}

// Random valid joint action: one-hot blocks, no-op for masked movement,
// uniform continuous block.
env::JointAction RandomAction(const env::Scenario& s, nn::RngStream& rng) {
  env::JointAction a(s.num_agents());
  for (int i = 0; i < s.num_agents(); ++i) {
    const comm::ActionLayout& al = s.layout.action(i);
    a[i] = Vector::Zero(al.total_dim());
    if (al.movement_dim > 0) a[i](al.movement_masked ? 0 : rng.UniformInt(al.movement_dim)) = 1;
    for (const auto& b : al.messages) a[i](b.offset + rng.UniformInt(b.dim)) = 1;
    for (int c = 0; c < al.continuous_dim; ++c) a[i](al.continuous_offset + c) = rng.Uniform(-1, 1);
  }
  return a;
}

using Adj = comm::Adjacency;

Adj MatMul(const Adj& a, const Adj& b) {
  const size_t n = a.size();
  Adj c(n, std::vector<int>(n, 0));
  for (size_t i = 0; i < n; ++i)
    for (size_t k = 0; k < n; ++k)
      for (size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

bool IsZero(const Adj& a) {
  for (const auto& row : a)
    for (int v : row)
      if (v != 0) return false;
  return true;
}

}  // namespace

TEST_CASE("nilpotency index: edge, chain, empty, cycles") {
  CHECK(comm::NilpotencyIndex({{0, 1}, {0, 0}}) == 2);
  CHECK(comm::NilpotencyIndex({{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 0}}) == 4);
  CHECK(comm::NilpotencyIndex({{0, 0}, {0, 0}}) == 1);
  CHECK_THROWS_AS(comm::NilpotencyIndex({{1, 0}, {0, 0}}), comm::NotADagError);
  CHECK_THROWS_AS(comm::NilpotencyIndex({{0, 1}, {1, 0}}), comm::NotADagError);
  try {
    comm::CommGraph(2, {{0, 1, 2}, {1, 0, 2}});
    FAIL("cycle accepted");
  } catch (const comm::NotADagError& e) {
    CHECK(std::string(e.what()).find("not a DAG") != std::string::npos);
  }
  CHECK_THROWS(comm::CommGraph(2, {{0, 1, 2}, {0, 1, 3}}));
  CHECK_THROWS(comm::CommGraph(2, {{0, 1, 0}}));
  CHECK_THROWS(comm::CommGraph(2, {{0, 2, 1}}));
}

TEST_CASE("comm graph: random DAG nilpotency, levels and heights agree with brute force") {
  nn::RngStream rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const comm::CommGraph g = testing::RandomDag(rng, 2, 6, 4);
    const Adj d = g.adjacency();
    Adj power = d;
    int s = 1;
    while (!IsZero(power)) {
      power = MatMul(power, d);
      ++s;
    }
    CHECK(g.nilpotency_index() == s);
    int max_level = 0;
    for (const auto& e : g.edges()) {
      CHECK(g.levels()[e.receiver] > g.levels()[e.sender]);
      CHECK(g.height()[e.sender] > g.height()[e.receiver]);
      max_level = std::max(max_level, g.levels()[e.receiver]);
    }
    CHECK(max_level == s - 1);
    for (int i = 0; i < g.num_agents(); ++i) {
      int prev = -1;
      for (int e : g.in_edges(i)) {
        CHECK(g.edge(e).sender > prev);
        prev = g.edge(e).sender;
      }
    }
  }
}

TEST_CASE("scenario graphs: coop s = 2, hierarchical s = 4 with dims 4, 6, 4") {
  CHECK(env::MakeCoopComm().graph().nilpotency_index() == 2);
  const env::Scenario h = env::MakeHierarchicalComm();
  CHECK(h.graph().nilpotency_index() == 4);
  CHECK(h.graph().correction_depth() == 3);
  REQUIRE(h.graph().num_edges() == 3);
  std::vector<int> dims;
  for (const auto& e : h.graph().edges()) dims.push_back(e.dim);
  CHECK(dims == std::vector<int>{4, 6, 4});
  CHECK(h.graph().edge(0).sender == 0);
  CHECK(h.graph().edge(2).receiver == 3);
}

TEST_CASE("layout totality: observation and action layouts cover the joint vectors") {
  nn::RngStream rng(1);
  for (const env::Scenario& s : AllScenarios()) {
    CAPTURE(s.name);
    const env::ResetResult r = env::Reset(s, rng);
    int joint = 0;
    for (int i = 0; i < s.num_agents(); ++i) {
      const comm::ObservationLayout& ol = s.layout.obs(i);
      CHECK(r.obs[i].size() == ol.total_dim());
      int at = ol.env_dim;
      int prev_sender = -1;
      for (const auto& slot : ol.slots) {
        CHECK(slot.offset == at);
        CHECK(slot.sender > prev_sender);
        prev_sender = slot.sender;
        at += slot.dim;
      }
      CHECK(at == ol.total_dim());
      CHECK(s.layout.obs_offset(i) == joint);
      joint += ol.total_dim();
    }
    CHECK(joint == s.layout.joint_obs_dim());
  }
}

TEST_CASE("coop_comm(5) observations") {
  const env::Scenario s = env::MakeCoopComm(5);
  nn::RngStream rng(3);
  const env::ResetResult r = env::Reset(s, rng);
  // Speaker: 5-way target one-hot, no slots.
  CHECK(s.layout.obs(0).env_dim == 5);
  CHECK(s.layout.obs(0).slots.empty());
  CHECK(r.obs[0].sum() == 1.0);
  CHECK(r.obs[0](r.state.target[0]) == 1.0);
  // Listener: velocity (2) + 5 relative landmark positions (10), then slot.
  CHECK(s.layout.obs(1).env_dim == 12);
  REQUIRE(s.layout.obs(1).slots.size() == 1);
  CHECK(s.layout.obs(1).slots[0].dim == 5);
  for (int k = 0; k < 5; ++k) {
    const Vec2 rel = r.state.landmark_pos[k] - r.state.agent_pos[1];
    CHECK(r.obs[1](2 + 2 * k) == rel.x());
    CHECK(r.obs[1](3 + 2 * k) == rel.y());
  }
  CHECK(r.obs[1].tail(5).isZero(0.0));
  CHECK(!s.agents[0].mobile);
  CHECK(s.layout.action(0).movement_masked);
}

TEST_CASE("reset: deterministic, uniform spawn box, zero velocities and messages") {
  for (const env::Scenario& s : AllScenarios()) {
    nn::RngStream a(5), b(5);
    const env::ResetResult r1 = env::Reset(s, a);
    const env::ResetResult r2 = env::Reset(s, b);
    for (int i = 0; i < s.num_agents(); ++i) {
      CHECK(r1.obs[i] == r2.obs[i]);
      CHECK(r1.state.agent_vel[i].isZero(0.0));
      CHECK(r1.state.agent_pos[i].cwiseAbs().maxCoeff() <= 1.0);
    }
    CHECK(r1.state.step == 0);
    for (const auto& m : r1.state.pending_messages) CHECK(m.isZero(0.0));
    for (int i = 0; i < s.num_agents(); ++i) {
      for (const auto& slot : s.layout.obs(i).slots) {
        CHECK(r1.obs[i].segment(slot.offset, slot.dim).isZero(0.0));
      }
    }
  }
}

TEST_CASE("hierarchical: known colours partition the non-target colours") {
  const env::Scenario s = env::MakeHierarchicalComm();
  nn::RngStream rng(8);
  for (int k = 0; k < 200; ++k) {
    const env::ResetResult r = env::Reset(s, rng);
    std::set<int> seen(r.state.known_color.begin(), r.state.known_color.begin() + 3);
    seen.insert(r.state.target[3]);
    CHECK(seen == std::set<int>{0, 1, 2, 3});
    for (int i = 0; i < 3; ++i) CHECK(r.obs[i](r.state.known_color[i]) == 1.0);
  }
}

TEST_CASE("covert without key: speaker and listener observations shrink by key_dim") {
  const env::Scenario with = env::MakeCovertComm(4, 3, true);
  const env::Scenario without = env::MakeCovertComm(4, 3, false);
  CHECK(with.layout.obs(0).total_dim() - without.layout.obs(0).total_dim() == 3);
  CHECK(with.layout.obs(1).total_dim() - without.layout.obs(1).total_dim() == 3);
  CHECK(with.layout.obs(2).total_dim() == without.layout.obs(2).total_dim());
  // The broadcast block feeds both edges.
  REQUIRE(with.layout.action(0).messages.size() == 1);
  CHECK(with.layout.action(0).messages[0].edges.size() == 2);
  CHECK(with.layout.action(1).continuous_dim == 4);
}

TEST_CASE("physics: no-op, damping, immobile rejection") {
  env::Scenario s = env::MakeCoopComm(3);
  nn::RngStream rng(2);
  env::WorldState st = env::Reset(s, rng).state;
  const Vec2 p0 = st.agent_pos[1];
  env::WorldState a = env::PhysicsStep(s, st, {0, 0});
  CHECK(a.agent_pos[1] == p0);
  CHECK(a.step == 1);
  st.agent_vel[1] = Vec2(0.4, -0.2);
  env::WorldState b = env::PhysicsStep(s, st, {0, 0});
  CHECK(b.agent_vel[1] == Vec2(0.75 * 0.4, 0.75 * -0.2));
  try {
    env::PhysicsStep(s, st, {1, 0});
    FAIL("immobile speaker moved");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("immobile") != std::string::npos);
  }
  CHECK_THROWS(env::PhysicsStep(s, st, {0, 5}));
}

TEST_CASE("physics: scripted kinematics match an independent integration") {
  env::Scenario s = env::MakeMultiTargetComm(3);
  nn::RngStream rng(21);
  env::WorldState st = env::Reset(s, rng).state;
  const double dir[5][2] = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  std::vector<double> px, py, vx(3, 0.0), vy(3, 0.0);
  for (int i = 0; i < 3; ++i) {
    px.push_back(st.agent_pos[i].x());
    py.push_back(st.agent_pos[i].y());
  }
  for (int t = 0; t < 25; ++t) {
    std::vector<int> m = {rng.UniformInt(5), rng.UniformInt(5), rng.UniformInt(5)};
    st = env::PhysicsStep(s, st, m);
    for (int i = 0; i < 3; ++i) {
      vx[i] = 0.75 * vx[i] + 5.0 * 0.1 * dir[m[i]][0];
      vy[i] = 0.75 * vy[i] + 5.0 * 0.1 * dir[m[i]][1];
      px[i] += 0.1 * vx[i];
      py[i] += 0.1 * vy[i];
      CHECK(st.agent_pos[i].x() == doctest::Approx(px[i]).epsilon(1e-12));
      CHECK(st.agent_pos[i].y() == doctest::Approx(py[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("physics: max speed cap") {
  env::Scenario s = env::MakeCoopComm(3);
  s.physics.max_speed = 0.3;
  nn::RngStream rng(2);
  env::WorldState st = env::Reset(s, rng).state;
  for (int t = 0; t < 10; ++t) st = env::PhysicsStep(s, st, {0, 1});
  CHECK(st.agent_vel[1].norm() <= 0.3 + 1e-12);
}

TEST_CASE("channel: identity, dropout, gaussian, dimension checks") {
  nn::RngStream rng(6);
  Vector m(3);
  m << 0, 1, 0;
  CHECK(env::Transmit(env::ChannelModel::Identity(), m, 3, rng) == m);
  CHECK(env::Transmit(env::ChannelModel::Dropout(1.0), m, 3, rng).isZero(0.0));
  CHECK(env::Transmit(env::ChannelModel::Dropout(0.0), m, 3, rng) == m);
  CHECK_THROWS_AS(env::Transmit(env::ChannelModel::Identity(), m, 4, rng), std::invalid_argument);
  CHECK_THROWS(env::ChannelModel::Dropout(1.5));
  CHECK_THROWS(env::ChannelModel::Gaussian(-1.0));

  int dropped = 0;
  const int n = 10000;
  const env::ChannelModel drop = env::ChannelModel::Dropout(0.25);
  for (int k = 0; k < n; ++k) {
    const Vector out = env::Transmit(drop, m, 3, rng);
    if (out.isZero(0.0)) {
      ++dropped;
    } else {
      CHECK(out == m);
    }
  }
  CHECK(testing::WithinBinomial(dropped, n, 0.25));

  double sum = 0, sq = 0;
  const env::ChannelModel g = env::ChannelModel::Gaussian(0.5);
  for (int k = 0; k < n; ++k) {
    const double d = env::Transmit(g, m, 3, rng)(1) - 1.0;
    sum += d;
    sq += d * d;
  }
  CHECK(std::abs(sum / n) < 3 * 0.5 / std::sqrt(n));
  CHECK(std::sqrt(sq / n) == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("rewards: distance definitions and covert zero-sum") {
  env::Scenario coop = env::MakeCoopComm(3);
  nn::RngStream rng(4);
  env::WorldState st = env::Reset(coop, rng).state;
  st.agent_pos[1] = st.landmark_pos[st.target[1]];
  CHECK(env::Reward(coop, st) == std::vector<double>{0.0, 0.0});
  st.agent_pos[1] = st.landmark_pos[st.target[1]] + Vec2(0.6, 0.8);
  const auto r = env::Reward(coop, st);
  CHECK(r[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(r[1] == r[0]);

  env::Scenario cov = env::MakeCovertComm();
  env::WorldState c = env::Reset(cov, rng).state;
  c.decode_outputs[1] = Vector::Constant(4, 0.2);
  c.decode_outputs[2] = Vector::Constant(4, 0.2);
  CHECK(env::Reward(cov, c) == std::vector<double>{0.0, 0.0, 0.0});
  c.decode_outputs[1] = Vector::Zero(4);
  c.decode_outputs[1](c.covert_message) = 1.0;  // listener exact
  c.decode_outputs[2] = Vector::Zero(4);       // adversary error 1
  CHECK(env::Reward(cov, c) == std::vector<double>{0.5, 0.5, -0.5});
}

TEST_CASE("episodes: 25 steps, identity delivery, reward properties, determinism") {
  for (const env::Scenario& s : AllScenarios()) {
    CAPTURE(s.name);
    auto run = [&](uint64_t seed) {
      nn::RngStream reset(seed), act(seed + 1), channel(seed + 2);
      env::ResetResult r = env::Reset(s, reset);
      std::vector<env::JointObs> obs = {r.obs};
      std::vector<std::vector<double>> rewards;
      int steps = 0;
      for (;;) {
        const env::JointAction a = RandomAction(s, act);
        const env::StepResult res = env::Step(s, r.state, a, channel);
        ++steps;
        for (int e = 0; e < s.graph().num_edges(); ++e) {
          const auto& edge = s.graph().edge(e);
          const auto& blk = s.layout.action(edge.sender).messages[s.layout.edge_block(e)];
          for (const auto& slot : s.layout.obs(edge.receiver).slots) {
            if (slot.edge != e) continue;
            CHECK(res.obs[edge.receiver].segment(slot.offset, slot.dim) ==
                  a[edge.sender].segment(blk.offset, blk.dim));
          }
        }
        if (s.kind == env::ScenarioKind::kCovertComm) {
          CHECK(res.rewards[0] + res.rewards[2] == 0.0);
        } else {
          for (double x : res.rewards) {
            CHECK(x <= 0.0);
            CHECK(x == res.rewards[0]);
          }
        }
        obs.push_back(res.obs);
        rewards.push_back(res.rewards);
        if (res.done) break;
        REQUIRE(steps < 100);
      }
      CHECK(steps == 25);
      return std::make_pair(obs, rewards);
    };
    const auto a = run(10);
    const auto b = run(10);
    CHECK(a.second == b.second);
    for (size_t t = 0; t < a.first.size(); ++t) {
      for (int i = 0; i < s.num_agents(); ++i) CHECK(a.first[t][i] == b.first[t][i]);
    }
  }
}

TEST_CASE("step: action size checked") {
  const env::Scenario s = env::MakeCoopComm(3);
  nn::RngStream rng(1);
  env::ResetResult r = env::Reset(s, rng);
  env::JointAction a = RandomAction(s, rng);
  a[1] = Vector::Zero(2);
  CHECK_THROWS_AS(env::Step(s, r.state, a, rng), std::invalid_argument);
}

TEST_CASE("scenario options: JSON round trip and strict keys") {
  const auto j = nlohmann::json::parse(
      R"({"name": "coop_comm", "n_landmarks": 3, "drop_p": 0.25, "physics": {"damping": 0.5}})");
  const env::ScenarioOptions o = env::ParseScenarioOptions(j);
  const env::Scenario s = env::MakeScenario(o);
  CHECK(s.num_landmarks == 3);
  CHECK(s.channel.kind == env::ChannelModel::Kind::kDropout);
  CHECK(s.channel.drop_p == 0.25);
  CHECK(s.physics.damping == 0.5);
  CHECK(env::ParseScenarioOptions(env::ScenarioOptionsToJson(o)).n_landmarks == 3);
  try {
    env::ParseScenarioOptions(nlohmann::json::parse(R"({"name": "coop_comm", "landmarks": 3})"));
    FAIL("unknown key accepted");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("landmarks") != std::string::npos);
  }
  CHECK_THROWS(env::ParseScenarioOptions(nlohmann::json::parse(R"({"name": "nope"})")));
  CHECK_THROWS(env::ParseScenarioOptions(
      nlohmann::json::parse(R"({"name": "coop_comm", "physics": {"dt": 0}})")));
  CHECK_THROWS(env::MakeCoopComm(0));
}

TEST_CASE("trajectory writer: header plus one row per agent") {
  const env::Scenario s = env::MakeCoopComm(3);
  nn::RngStream rng(1);
  env::ResetResult r = env::Reset(s, rng);
  std::ostringstream out;
  env::TrajectoryWriter w(out);
  const env::JointAction a = RandomAction(s, rng);
  const env::StepResult res = env::Step(s, r.state, a, rng);
  w.Write(s, 0, 0, r.state, a, res.rewards);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "episode,step,agent,pos_x,pos_y,action,message,reward");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
}
