#include <gtest/gtest.h>

#include <set>

#include "brx/errors.hpp"
#include "support.hpp"

using namespace brx;
using namespace brx::env;
using namespace brx::policy;
using brx::test::make_obs;

namespace {

Observation fully_explored(RoomCoord medic, RoomCoord engineer) {
  Observation obs = make_obs({}, {}, {}, medic, engineer);
  obs.explored.fill(true);
  return obs;
}

Decision decide(Behavior b, const Observation& obs, Role r) {
  switch (b) {
    case Behavior::Explore: return explore_decide(obs, r);
    case Behavior::Exploit: return exploit_decide(obs, r);
    case Behavior::Fixed: return fixed_decide(obs, r);
  }
  return {};
}

}  // namespace

TEST(StepToward, ClosesXGapFirst) {
  EXPECT_EQ(step_toward({0, 2}, {2, 2}), Action::MoveEast);
  EXPECT_EQ(step_toward({2, 2}, {0, 0}), Action::MoveWest);
  EXPECT_EQ(step_toward({1, 3}, {1, 0}), Action::MoveNorth);
  EXPECT_EQ(step_toward({1, 0}, {1, 4}), Action::MoveSouth);
  EXPECT_EQ(step_toward({1, 1}, {1, 1}), Action::NoOp);
}

TEST(NearestRoom, TieBreaksOnSmallestRowThenColumn) {
  const auto pick = nearest_room({0, 0}, [](RoomCoord c) { return c == RoomCoord{1, 0} || c == RoomCoord{0, 1}; });
  EXPECT_EQ(pick, (RoomCoord{1, 0}));
  const auto none = nearest_room({0, 0}, [](RoomCoord) { return false; });
  EXPECT_FALSE(none.has_value());
}

TEST(Explore, BacktracksToRubbleWhenEverythingExplored) {
  auto obs = fully_explored({0, 0}, {2, 3});
  obs.known_rubble[room_index({2, 3})] = true;
  EXPECT_EQ(explore_act(obs, Role::Engineer), Action::RemoveRubble);
}

TEST(Explore, IgnoresRubbleWhileRoomsRemainUnexplored) {
  const auto obs = make_obs({{0, 0}, {1, 1}, {2, 2}, {1, 3}, {1, 4}, {0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 0}, {2, 0}, {2, 1}},
                            {{1, 2}}, {}, {0, 0}, {1, 2});
  const auto d = explore_decide(obs, Role::Engineer);
  EXPECT_TRUE(is_move(d.action));
  ASSERT_TRUE(d.goal.target.has_value());
  EXPECT_FALSE(obs.is_explored(*d.goal.target));
}

TEST(Explore, UnexploredEastNeighbourWinsOverLocalRubble) {
  Observation obs = fully_explored({0, 0}, {1, 2});
  obs.explored[room_index({2, 2})] = false;
  obs.known_rubble[room_index({1, 2})] = true;
  EXPECT_EQ(explore_act(obs, Role::Engineer), Action::MoveEast);
}

TEST(Explore, EquidistantTargetsPreferNorthernRow) {
  const auto obs = make_obs({}, {}, {}, {3, 4}, {0, 0});
  const auto d = explore_decide(obs, Role::Engineer);
  EXPECT_EQ(d.goal, Goal::reach({1, 0}));
  EXPECT_EQ(d.action, Action::MoveEast);
}

TEST(Explore, IdlesWithoutTargets) {
  const auto obs = fully_explored({0, 0}, {2, 3});
  EXPECT_EQ(explore_act(obs, Role::Medic), Action::NoOp);
  EXPECT_EQ(explore_decide(obs, Role::Medic).goal, Goal::idle());
}

TEST(Exploit, RemovesRubbleBeforeExploring) {
  const auto obs = make_obs({{1, 1}}, {{1, 1}}, {}, {0, 0}, {1, 1});
  EXPECT_EQ(exploit_act(obs, Role::Engineer), Action::RemoveRubble);
}

TEST(Exploit, FallsBackToExploration) {
  Observation obs = fully_explored({0, 0}, {2, 3});
  obs.explored[room_index({2, 2})] = false;
  EXPECT_EQ(exploit_act(obs, Role::Engineer), Action::MoveNorth);
}

TEST(Exploit, HeadsForKnownRubble) {
  const auto obs = make_obs({{2, 2}}, {{2, 2}}, {}, {3, 4}, {0, 2});
  EXPECT_EQ(exploit_act(obs, Role::Engineer), Action::MoveEast);
  EXPECT_EQ(exploit_decide(obs, Role::Engineer).goal, Goal::remove_rubble({2, 2}));
}

TEST(Exploit, MedicChasesVictims) {
  const auto obs = make_obs({{3, 1}}, {}, {{3, 1}}, {3, 3}, {0, 0});
  EXPECT_EQ(exploit_act(obs, Role::Medic), Action::MoveNorth);
  const auto here = make_obs({}, {}, {{3, 3}}, {3, 3}, {0, 0});
  EXPECT_EQ(exploit_act(here, Role::Medic), Action::RescueVictim);
}

TEST(Fixed, SweepExamples) {
  const auto at = [](RoomCoord c) { return make_obs({}, {}, {}, c, c == RoomCoord{3, 3} ? RoomCoord{0, 0} : RoomCoord{3, 3}); };
  EXPECT_EQ(fixed_act(at({0, 0}), Role::Medic), Action::MoveSouth);
  EXPECT_EQ(fixed_act(at({0, 4}), Role::Medic), Action::MoveEast);
  EXPECT_EQ(fixed_act(at({1, 1}), Role::Medic), Action::MoveEast);
  EXPECT_EQ(fixed_act(at({1, 0}), Role::Medic), Action::MoveWest);
}

TEST(Fixed, NeverActsOnVictimsOrRubble) {
  const auto obs = make_obs({}, {}, {{0, 2}}, {0, 2}, {0, 2});
  EXPECT_EQ(fixed_act(obs, Role::Medic), Action::MoveSouth);
  const auto rubble = make_obs({}, {{0, 2}}, {}, {0, 2}, {0, 2});
  EXPECT_EQ(fixed_act(rubble, Role::Engineer), Action::MoveSouth);
}

TEST(Fixed, SweepIsAHamiltonianCycle) {
  std::set<int> seen;
  RoomCoord c{0, 0};
  for (int i = 0; i < kRooms; ++i) {
    EXPECT_TRUE(seen.insert(room_index(c)).second);
    const RoomCoord next = sweep_successor(c);
    EXPECT_EQ(manhattan(c, next), 1);
    c = next;
  }
  EXPECT_EQ(c, (RoomCoord{0, 0}));
  EXPECT_EQ(seen.size(), static_cast<std::size_t>(kRooms));
}

TEST(PolicyProperties, EmittedActionsAreLegal) {
  Rng rng(17);
  for (Behavior b : kAllBehaviors) {
    const auto p = make_policy(b);
    for (int i = 0; i < 1000; ++i) {
      const auto obs = test::random_observation(rng);
      for (Role r : kRoles) {
        EXPECT_TRUE(legal_actions(obs, r).contains(p->act(obs, r))) << p->name();
      }
    }
  }
}

TEST(PolicyProperties, Deterministic) {
  Rng rng(18);
  for (Behavior b : kAllBehaviors) {
    const auto p = make_policy(b);
    for (int i = 0; i < 200; ++i) {
      const auto obs = test::random_observation(rng);
      EXPECT_EQ(p->act(obs, Role::Medic), p->act(obs, Role::Medic));
      EXPECT_EQ(decide(b, obs, Role::Engineer).action, p->act(obs, Role::Engineer));
    }
  }
}

TEST(PolicyProperties, ExploitAlwaysClearsLocalRubble) {
  Rng rng(19);
  for (int i = 0; i < 1000; ++i) {
    auto obs = test::random_observation(rng);
    const int here = room_index(obs.engineer_pos);
    obs.known_rubble[here] = true;
    obs.known_victim[here] = false;
    EXPECT_EQ(exploit_act(obs, Role::Engineer), Action::RemoveRubble);
  }
}

TEST(PolicyProperties, FixedIgnoresRubbleAndVictimBits) {
  Rng rng(20);
  for (int i = 0; i < 1000; ++i) {
    const auto obs = test::random_observation(rng);
    auto flipped = obs;
    for (int r = 0; r < kRooms; ++r) {
      flipped.known_rubble[r] = false;
      flipped.known_victim[r] = false;
      flipped.explored[r] = !obs.explored[r];
    }
    flipped.explored[room_index(obs.medic_pos)] = true;
    flipped.explored[room_index(obs.engineer_pos)] = true;
    for (Role r : kRoles) EXPECT_EQ(fixed_act(obs, r), fixed_act(flipped, r));
  }
}

TEST(PolicyProperties, GoalsAgreeWithActions) {
  Rng rng(21);
  for (Behavior b : kAllBehaviors) {
    for (int i = 0; i < 1000; ++i) {
      const auto obs = test::random_observation(rng);
      for (Role r : kRoles) {
        const auto d = decide(b, obs, r);
        const bool targeted = d.goal.kind != GoalKind::FollowPattern && d.goal.kind != GoalKind::Idle;
        EXPECT_EQ(targeted, d.goal.target.has_value());
        if (!targeted) {
          if (d.goal.kind == GoalKind::Idle) {
            EXPECT_EQ(d.action, Action::NoOp);
          }
          continue;
        }
        const RoomCoord here = obs.position(r);
        EXPECT_TRUE(in_bounds(*d.goal.target));
        if (*d.goal.target == here) {
          EXPECT_FALSE(is_move(d.action));
        } else {
          EXPECT_EQ(d.action, step_toward(here, *d.goal.target));
          EXPECT_EQ(manhattan(*destination(here, d.action), *d.goal.target) + 1, manhattan(here, *d.goal.target));
        }
        if (d.goal.kind == GoalKind::RemoveRubbleAt) {
          EXPECT_TRUE(obs.has_rubble(*d.goal.target));
        }
        if (d.goal.kind == GoalKind::RescueVictimAt) {
          EXPECT_TRUE(obs.has_victim(*d.goal.target));
        }
      }
    }
  }
}

TEST(PolicyProperties, ScriptedPolicyExposesTheSameGoal) {
  Rng rng(22);
  for (Behavior b : kAllBehaviors) {
    const auto p = make_policy(b);
    EXPECT_EQ(p->name(), std::string(to_string(b)));
    for (int i = 0; i < 100; ++i) {
      const auto obs = test::random_observation(rng);
      EXPECT_EQ(p->current_goal(obs, Role::Medic), decide(b, obs, Role::Medic).goal);
    }
  }
}

TEST(Rollout, ExploreFinishesExploringBeforeActing) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EnvConfig c;
    c.seed = seed;
    const auto p = make_policy(Behavior::Explore);
    const auto traj = rollout(*p, *p, c);
    for (const auto& s : traj.steps) {
      if (s.engineer_action == Action::RemoveRubble || s.medic_action == Action::RescueVictim) {
        EXPECT_TRUE(s.obs.fully_explored()) << "seed " << seed << " t " << s.world.time;
      }
    }
  }
}

TEST(Rollout, FixedNeverRescues) {
  EnvConfig c;
  c.seed = 4;
  const auto p = make_policy(Behavior::Fixed);
  const auto traj = rollout(*p, *p, c);
  EXPECT_EQ(static_cast<int>(traj.size()), c.horizon);
  EXPECT_EQ(traj.final_world.victims_rescued(), 0);
  for (const auto& s : traj.steps) EXPECT_EQ(s.medic_goal, Goal::follow_pattern());
}

TEST(Rollout, ExploitRescuesEveryone) {
  const auto p = make_policy(Behavior::Exploit);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EnvConfig c;
    c.seed = seed;
    const auto traj = rollout(*p, *p, c);
    EXPECT_EQ(traj.final_world.victims_rescued(), c.n_victims) << "seed " << seed;
    EXPECT_LT(static_cast<int>(traj.size()), c.horizon);
  }
}

TEST(Rollout, ExploitFixtureWithEntitiesInStartRooms) {
  auto w = test::empty_world({1, 1}, {2, 3});
  w.rooms[room_index({1, 1})].victim = VictimState::Open;
  w.rooms[room_index({2, 3})] = {true, VictimState::HiddenUnderRubble};
  EnvConfig c;
  int steps = 0;
  while (!is_terminal(w, c)) {
    const auto obs = observe(w);
    w = step(w, exploit_act(obs, Role::Engineer), exploit_act(obs, Role::Medic));
    ++steps;
  }
  EXPECT_EQ(w.victims_rescued(), 2);
  EXPECT_LT(steps, 10);
}

TEST(Rollout, StepsAreLinkedAndDeterministic) {
  EnvConfig c;
  c.seed = 12;
  const auto e = make_policy(Behavior::Explore);
  const auto x = make_policy(Behavior::Exploit);
  const auto traj = rollout(*e, *x, c);
  EXPECT_EQ(traj, rollout(*e, *x, c));
  EXPECT_EQ(traj.engineer_policy, "explore");
  EXPECT_EQ(traj.medic_policy, "exploit");
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const auto& s = traj.steps[t];
    EXPECT_EQ(s.world.time, static_cast<int>(t));
    EXPECT_EQ(s.obs, observe(s.world));
    const auto next = step(s.world, s.engineer_action, s.medic_action);
    EXPECT_EQ(next, t + 1 < traj.size() ? traj.steps[t + 1].world : traj.final_world);
    EXPECT_EQ(s.engineer_goal, e->current_goal(s.obs, Role::Engineer));
  }
  EXPECT_EQ(traj.observation_at(traj.size()), observe(traj.final_world));
}

TEST(Rollout, IllegalPolicyOutputPropagates) {
  struct AlwaysNorth final : Policy {
    Action act(const Observation&, Role) const override { return Action::MoveNorth; }
    std::string name() const override { return "north"; }
  };
  EnvConfig c;
  c.seed = 1;
  AlwaysNorth p;
  EXPECT_THROW(rollout(p, p, c), IllegalActionError);
}
