#include <doctest.h>

#include <algorithm>
#include <stdexcept>

#include "director/engine.hpp"
#include "director/inspection.hpp"

using namespace director;

namespace {

ProviderSpec make(const std::string& id, const TaskType& group, Behaviour b = {}, std::vector<TaskType> needs = {},
                  std::vector<Condition> when = {}, std::vector<StateAssertion> causing = {},
                  ProviderKind kind = ProviderKind::Provide) {
    ProviderSpec p;
    p.id = id;
    p.group = group;
    p.kind = kind;
    p.behaviour = std::move(b);
    p.needs = std::move(needs);
    p.when = std::move(when);
    p.causing = std::move(causing);
    return p;
}

ProviderSpec lifecycle(const std::string& id, const TaskType& group, ProviderKind kind) {
    return make(id, group, {}, {}, {}, {}, kind);
}

Behaviour requests(std::vector<TaskRequest> r) {
    return [r](const BehaviourContext&) { return SubtaskBundle{r, false, false}; };
}

void drain(Engine& e) {
    while (e.has_pending_events()) e.step();
}

std::size_t count(const Engine& e, TraceKind kind, const std::string& group = {}, const std::string& provider = {}) {
    return static_cast<std::size_t>(std::count_if(e.trace().events().begin(), e.trace().events().end(), [&](const TraceEvent& ev) {
        return ev.kind == kind && (group.empty() || ev.group == group) && (provider.empty() || ev.provider == provider);
    }));
}

std::vector<std::string> runs_of(const Engine& e, const std::string& group) {
    std::vector<std::string> out;
    for (const auto& ev : e.trace().events()) {
        if (ev.kind == TraceKind::ProviderRun && ev.group == group) out.push_back(ev.provider + ":" + ev.get("reason"));
    }
    return out;
}

// Walk on two legs with optional arms, mirroring the soccer layout.
void legs_and_arms(Engine& e) {
    e.register_provider(lifecycle("Walk.start", "Walk", ProviderKind::Start));
    e.register_provider(make("Walk", "Walk",
                             requests({{"LeftLeg", "", 1, false},
                                       {"RightLeg", "", 1, false},
                                       {"LeftArm", "", 1, true},
                                       {"RightArm", "", 1, true}})));
    e.register_provider(lifecycle("Walk.stop", "Walk", ProviderKind::Stop));
    for (auto limb : {"LeftLeg", "RightLeg", "LeftArm", "RightArm"}) e.register_provider(make(limb, limb));
}

}  // namespace

TEST_CASE("registration builds groups in declaration order") {
    Engine e;
    e.register_provider(make("Walk", "Walk"));
    e.register_provider(make("Kick", "Kick"));
    CHECK(e.graph().groups.size() == 2);
    CHECK(e.graph().group("Walk").providers.size() == 1);
    CHECK(e.graph().group("Kick").providers.size() == 1);

    Engine s;
    s.register_state("phase", {"ready", "playing"}, "ready");
    CHECK(s.register_provider(make("Striker.playing", "Striker", {}, {}, {{"phase", Comparator::EQ, 1}})) == 0);
    CHECK(s.register_provider(make("Striker.ready", "Striker")) == 1);
    CHECK(s.graph().group("Striker").providers.size() == 2);

    try {
        s.register_provider(make("Striker.ready", "Striker"));
        FAIL("expected DuplicateId");
    } catch (const DirectorError& err) {
        CHECK(err.code() == ErrorCode::DuplicateId);
    }
    s.start();
    try {
        s.register_provider(make("Late", "Late"));
        FAIL("expected EngineAlreadyStarted");
    } catch (const DirectorError& err) {
        CHECK(err.code() == ErrorCode::EngineAlreadyStarted);
    }
    CHECK_THROWS_AS(s.start(), DirectorError);
}

TEST_CASE("start rejects an invalid registry") {
    Engine e;
    e.register_provider(make("Walk", "Walk", {}, {"Teleport"}));
    try {
        e.start();
        FAIL("expected RegistryInvalid");
    } catch (const DirectorError& err) {
        CHECK(err.code() == ErrorCode::RegistryInvalid);
    }
}

TEST_CASE("engine refuses work before start and after shutdown") {
    Engine e;
    e.register_provider(make("Walk", "Walk"));
    try {
        e.step();
        FAIL("expected EngineStopped");
    } catch (const DirectorError& err) {
        CHECK(err.code() == ErrorCode::EngineStopped);
    }
    e.start();
    e.shutdown();
    CHECK_THROWS_AS(e.submit_root_task("Walk", "", 1, false), DirectorError);
    CHECK_THROWS_AS(e.step(), DirectorError);
}

TEST_CASE("step on an empty queue does nothing") {
    Engine e;
    e.register_provider(make("Walk", "Walk"));
    e.start();
    auto r = e.step();
    CHECK(r.events_processed == 0);
    CHECK(r.providers_run.empty());
    CHECK(r.trace_delta.empty());
    CHECK(e.graph().step_counter == 0);
}

TEST_CASE("root submission runs Start then Provide") {
    Engine e;
    e.register_provider(lifecycle("Striker.start", "Striker", ProviderKind::Start));
    e.register_provider(make("Striker", "Striker"));
    e.start();
    CHECK_THROWS_AS(e.submit_root_task("Goalie", "", 1, false), DirectorError);
    auto uid = e.submit_root_task("Striker", "", 2, false);
    auto r = e.step();
    CHECK(r.events_processed == 1);
    CHECK(r.providers_run == std::vector<std::string>{"Striker.start", "Striker"});
    CHECK(e.graph().group("Striker").assigned_task == uid);
    CHECK(runs_of(e, "Striker") == std::vector<std::string>{"Striker.start:STARTED", "Striker:NEW_TASK"});
}

TEST_CASE("group without Start runs a single Provide") {
    Engine e;
    e.register_provider(make("Walk", "Walk"));
    e.start();
    e.submit_root_task("Walk", "", 1, false);
    auto r = e.step();
    CHECK(r.providers_run == std::vector<std::string>{"Walk"});
}

TEST_CASE("two competing roots end in the same state in either submission order") {
    struct Outcome {
        std::int64_t holder_priority;
        std::vector<std::int64_t> watcher_priorities;
        bool operator==(const Outcome&) const = default;
    };
    auto run = [](std::vector<std::int64_t> order) {
        Engine e;
        e.register_provider(make("Striker", "Striker"));
        e.start();
        for (auto p : order) e.submit_root_task("Striker", "", p, false);
        drain(e);
        const auto& g = e.graph().group("Striker");
        Outcome o{e.graph().task(*g.assigned_task).priority, {}};
        for (auto w : g.watchers) o.watcher_priorities.push_back(e.graph().task(w).priority);
        return o;
    };
    auto a = run({3, 5});
    auto b = run({5, 3});
    CHECK(a.holder_priority == 5);
    CHECK(a.watcher_priorities == std::vector<std::int64_t>{3});
    CHECK(a == b);
}

TEST_CASE("removing roots") {
    Engine e;
    e.register_provider(lifecycle("Striker.start", "Striker", ProviderKind::Start));
    e.register_provider(make("Striker", "Striker", requests({{"Walk", "", 1, false}})));
    e.register_provider(lifecycle("Striker.stop", "Striker", ProviderKind::Stop));
    e.register_provider(lifecycle("Walk.start", "Walk", ProviderKind::Start));
    e.register_provider(make("Walk", "Walk", requests({{"Leg", "", 1, false}})));
    e.register_provider(lifecycle("Walk.stop", "Walk", ProviderKind::Stop));
    e.register_provider(make("Leg", "Leg"));
    e.start();

    SUBCASE("remove the only root") {
        auto uid = e.submit_root_task("Striker", "", 1, false);
        drain(e);
        REQUIRE(e.graph().group("Leg").active());
        const auto sub = *e.graph().group("Walk").assigned_task;
        try {
            e.remove_root_task(sub);
            FAIL("expected NotARootTask");
        } catch (const DirectorError& err) {
            CHECK(err.code() == ErrorCode::NotARootTask);
        }
        try {
            e.remove_root_task(TaskUid{999});
            FAIL("expected UnknownUid");
        } catch (const DirectorError& err) {
            CHECK(err.code() == ErrorCode::UnknownUid);
        }
        e.remove_root_task(uid);
        drain(e);
        CHECK(e.graph().tasks.empty());
        CHECK(e.graph().root_tasks.empty());
        for (const auto& [type, g] : e.graph().groups) CHECK_FALSE(g.active());
        CHECK(count(e, TraceKind::ProviderRun, "Striker", "Striker.stop") == 1);
        CHECK(count(e, TraceKind::ProviderRun, "Walk", "Walk.stop") == 1);
    }

    SUBCASE("remove the stronger root and the watcher takes over") {
        auto weak = e.submit_root_task("Striker", "weak", 1, false);
        auto strong = e.submit_root_task("Striker", "strong", 4, false);
        drain(e);
        REQUIRE(e.graph().group("Striker").assigned_task == strong);
        CHECK(e.graph().group("Striker").watchers == std::vector<TaskUid>{weak});
        const auto before = e.trace().next_seq();
        e.remove_root_task(strong);
        drain(e);
        CHECK(e.graph().group("Striker").assigned_task == weak);
        bool assigned = false;
        for (const auto& ev : e.trace().range(before, e.trace().next_seq())) {
            if (ev.kind == TraceKind::TaskAssigned && ev.task == weak) assigned = true;
        }
        CHECK(assigned);
        CHECK(e.graph().group("Leg").active());
    }
}

TEST_CASE("optional subtasks run independently of blocked non-optional ones") {
    Engine e;
    legs_and_arms(e);
    e.register_provider(make("Wave", "Wave", requests({{"LeftArm", "", 1, false}, {"RightArm", "", 1, false}})));
    e.start();
    e.submit_root_task("Wave", "", 5, false);
    e.submit_root_task("Walk", "", 1, false);
    drain(e);
    const auto& g = e.graph();
    CHECK(g.task(*g.group("LeftLeg").assigned_task).parent == Parent{"Walk"});
    CHECK(g.task(*g.group("RightLeg").assigned_task).parent == Parent{"Walk"});
    CHECK(g.task(*g.group("LeftArm").assigned_task).parent == Parent{"Wave"});
    CHECK(g.group("LeftArm").watchers.size() == 1);
    CHECK(g.group("RightArm").watchers.size() == 1);
}

TEST_CASE("one blocked non-optional request holds back the whole set") {
    Engine e;
    legs_and_arms(e);
    e.register_provider(make("Guard", "Guard", requests({{"RightLeg", "", 1, false}})));
    e.start();
    e.submit_root_task("Guard", "", 5, false);
    e.submit_root_task("Walk", "", 1, false);
    drain(e);
    const auto& g = e.graph();
    std::size_t running = 0, total = 0;
    for (auto uid : g.group("Walk").subtasks) {
        const auto& t = g.task(uid);
        if (t.optional) continue;
        ++total;
        if (t.status == TaskStatus::Running) ++running;
    }
    CHECK(total == 2);
    CHECK(running == 0);
    CHECK_FALSE(g.group("LeftLeg").active());
    // Optional arms still run.
    CHECK(g.group("LeftArm").active());

    e.remove_root_task(g.root_tasks.front());
    drain(e);
    CHECK(e.graph().group("LeftLeg").active());
    CHECK(e.graph().group("RightLeg").active());
}

TEST_CASE("all-or-nothing over every blocking subset") {
    // Enumerate which of three needed groups a stronger root already holds.
    for (unsigned mask = 0; mask < 8; ++mask) {
        Engine e;
        e.register_provider(make("Body", "Body", requests({{"A", "", 1, false}, {"B", "", 1, false}, {"C", "", 1, false}})));
        std::vector<TaskRequest> held;
        const char* names[] = {"A", "B", "C"};
        for (unsigned i = 0; i < 3; ++i) {
            e.register_provider(make(names[i], names[i]));
            if (mask & (1u << i)) held.push_back({names[i], "", 1, false});
        }
        e.register_provider(make("Boss", "Boss", requests(held)));
        e.start();
        e.submit_root_task("Boss", "", 9, false);
        e.submit_root_task("Body", "", 1, false);
        drain(e);
        std::size_t running = 0;
        for (auto uid : e.graph().group("Body").subtasks) running += e.graph().task(uid).status == TaskStatus::Running;
        CAPTURE(mask);
        CHECK(running == (mask == 0 ? 3u : 0u));
    }
}

TEST_CASE("state change that touches nothing runs no providers") {
    Engine e;
    e.register_state("weather", {"sunny", "rainy"}, "sunny");
    e.register_provider(make("Walk", "Walk"));
    e.start();
    e.submit_root_task("Walk", "", 1, false);
    drain(e);
    e.state_update("weather", "rainy");
    auto r = e.step();
    CHECK(r.providers_run.empty());
    REQUIRE(r.trace_delta.size() == 1);
    CHECK(r.trace_delta[0].kind == TraceKind::StateChanged);
    CHECK_THROWS_AS(e.state_update("wind", std::int64_t{0}), DirectorError);
    CHECK_THROWS_AS(e.state_update("weather", std::int64_t{7}), DirectorError);
}

TEST_CASE("phase switch reselects the Striker provider within one step") {
    Engine e;
    e.register_state("phase", {"ready", "playing"}, "playing");
    e.register_provider(make("Striker.playing", "Striker", {}, {}, {{"phase", Comparator::EQ, 1}}));
    e.register_provider(make("Striker.ready", "Striker", {}, {}, {{"phase", Comparator::EQ, 0}}));
    e.start();
    e.submit_root_task("Striker", "", 1, false);
    drain(e);
    CHECK(e.graph().group("Striker").active_provider == 0u);
    e.state_update("phase", "ready");
    auto r = e.step();
    CHECK(e.graph().group("Striker").active_provider == 1u);
    CHECK(r.providers_run == std::vector<std::string>{"Striker.ready"});
}

TEST_CASE("push switches the blocking group to its Causing provider") {
    Engine e;
    e.register_state("stability", {"walking", "standing"}, "walking");
    const Condition standing{"stability", Comparator::EQ, 1};
    e.register_provider(make("Striker", "Striker", requests({{"Walk", "", 1, false}})));
    e.register_provider(make("Walk.walk", "Walk", requests({{"Leg", "", 1, false}}), {}, {}, {}));
    e.register_provider(make("Walk.stand", "Walk", requests({{"Leg", "", 1, false}}), {}, {}, {standing}));
    e.register_provider(make("Kick", "Kick", requests({{"Leg", "", 1, false}}), {"Leg"}, {standing}));
    e.register_provider(make("Leg", "Leg"));
    e.register_provider(make("Coach", "Coach",
                             [](const BehaviourContext& c) {
                                 SubtaskBundle b;
                                 if (c.reason == RunReason::OtherTrigger) b.requests.push_back({"Kick", "", 3, false});
                                 else b.requests.clear();
                                 return b;
                             }));
    e.start();
    // Walk holds the leg under Striker; Kick comes from another root of equal priority so it
    // must rely on the push rather than win outright.
    e.submit_root_task("Striker", "", 1, false);
    e.submit_root_task("Coach", "", 2, false);
    drain(e);
    REQUIRE(e.graph().group("Walk").active_provider == 0u);
    e.external_trigger("Coach", "");
    drain(e);
    const auto& walk = e.graph().group("Walk");
    REQUIRE(walk.pushed_by.has_value());
    CHECK(walk.active_provider == 1u);
    CHECK(count(e, TraceKind::GroupPushed, "Walk") == 1);
    auto runs = runs_of(e, "Walk");
    CHECK(runs.back() == "Walk.stand:PUSHED");
    CHECK(e.graph().task(*e.graph().group("Leg").assigned_task).parent == Parent{"Walk"});

    e.state_update("stability", "standing");
    auto r = e.step();
    CHECK_FALSE(e.graph().group("Walk").pushed_by.has_value());
    CHECK(e.graph().task(*e.graph().group("Leg").assigned_task).parent == Parent{"Kick"});
    CHECK(std::find(r.providers_run.begin(), r.providers_run.end(), "Kick") != r.providers_run.end());
}

TEST_CASE("blocked task without a Causing provider just watches") {
    Engine e;
    e.register_state("stability", {"walking", "standing"}, "walking");
    e.register_provider(make("Kick", "Kick", {}, {}, {{"stability", Comparator::EQ, 1}}));
    e.start();
    e.submit_root_task("Kick", "", 1, false);
    auto r = e.step();
    CHECK(r.providers_run.empty());
    CHECK_FALSE(e.graph().group("Kick").active());
    CHECK(e.graph().group("Kick").watchers.size() == 1);
    CHECK(count(e, TraceKind::TaskBlocked, "Kick") == 1);
}

TEST_CASE("external triggers") {
    Engine e;
    std::vector<std::string> payloads;
    e.register_provider(make("Sensors", "Sensors", [&](const BehaviourContext& c) {
        if (c.reason == RunReason::OtherTrigger) payloads.emplace_back(c.payload);
        return SubtaskBundle{};
    }));
    e.start();
    CHECK_THROWS_AS(e.external_trigger("Nope", ""), DirectorError);
    e.external_trigger("Sensors", "tick");
    auto r = e.step();
    CHECK(r.providers_run.empty());
    REQUIRE(r.trace_delta.size() == 1);
    CHECK(r.trace_delta[0].kind == TraceKind::TriggerSuppressed);

    e.submit_root_task("Sensors", "", 1, false);
    e.external_trigger("Sensors", "tick");
    drain(e);
    CHECK(payloads == std::vector<std::string>{"tick"});
    CHECK(runs_of(e, "Sensors").back() == "Sensors:OTHER_TRIGGER");
}

TEST_CASE("uses_info reports run state and done") {
    Engine e;
    ProviderSpec getup_when = make("GetUpWhenFallen", "GetUpWhenFallen", [](const BehaviourContext& c) {
        if (c.reason == RunReason::OtherTrigger) return SubtaskBundle{{{"GetUp", "", 1, false}}, false, false};
        return c.uses_of("GetUp").run_state == RunState::NoTask ? SubtaskBundle{} : SubtaskBundle::Idle();
    });
    getup_when.uses = {"GetUp"};
    e.register_provider(getup_when);
    e.register_provider(make("GetUp", "GetUp", [](const BehaviourContext& c) {
        return c.reason == RunReason::OtherTrigger ? SubtaskBundle::Done() : SubtaskBundle{};
    }));
    e.register_provider(make("Hold", "Hold", requests({{"GetUp", "", 1, false}})));
    e.start();
    CHECK_THROWS_AS(e.uses_info("GetUpWhenFallen", "Kick"), DirectorError);
    e.submit_root_task("GetUpWhenFallen", "", 1, false);
    drain(e);
    CHECK(e.uses_info("GetUpWhenFallen", "GetUp") == UsesInfo{RunState::NoTask, false});

    auto hold = e.submit_root_task("Hold", "", 5, false);
    drain(e);
    e.external_trigger("GetUpWhenFallen", "");
    drain(e);
    CHECK(e.uses_info("GetUpWhenFallen", "GetUp") == UsesInfo{RunState::Queued, false});

    e.remove_root_task(hold);
    drain(e);
    CHECK(e.uses_info("GetUpWhenFallen", "GetUp") == UsesInfo{RunState::Running, false});
    e.external_trigger("GetUp", "");
    drain(e);
    CHECK(e.uses_info("GetUpWhenFallen", "GetUp") == UsesInfo{RunState::Running, true});
}

TEST_CASE("changed re-request updates in place without lifecycle churn") {
    Engine e;
    e.register_provider(make("WalkTo", "WalkTo", [](const BehaviourContext& c) {
        return SubtaskBundle{{{"Walk", std::string(c.payload.empty() ? "0,0" : c.payload), 1, false}}, false, false};
    }));
    e.register_provider(lifecycle("Walk.start", "Walk", ProviderKind::Start));
    e.register_provider(make("Walk", "Walk"));
    e.register_provider(lifecycle("Walk.stop", "Walk", ProviderKind::Stop));
    e.start();
    e.submit_root_task("WalkTo", "", 1, false);
    drain(e);
    const auto walk = *e.graph().group("Walk").assigned_task;

    // Identical request: nothing changes below WalkTo.
    e.external_trigger("WalkTo", "0,0");
    auto same = e.step();
    CHECK(same.providers_run == std::vector<std::string>{"WalkTo"});

    e.external_trigger("WalkTo", "3,4");
    auto moved = e.step();
    CHECK(moved.providers_run == std::vector<std::string>{"WalkTo", "Walk"});
    CHECK(*e.graph().group("Walk").assigned_task == walk);
    CHECK(e.graph().task(walk).data == "3,4");
    CHECK(count(e, TraceKind::ProviderRun, "Walk", "Walk.start") == 1);
    CHECK(count(e, TraceKind::ProviderRun, "Walk", "Walk.stop") == 0);
    bool update = false;
    for (const auto& ev : moved.trace_delta) update = update || (ev.kind == TraceKind::TaskRequested && ev.get("update") == "true");
    CHECK(update);
}

TEST_CASE("callback failure is contained as Idle") {
    Engine e;
    e.register_provider(make("Flaky", "Flaky", [](const BehaviourContext& c) -> SubtaskBundle {
        if (c.reason == RunReason::OtherTrigger) throw std::runtime_error("sensor offline");
        return SubtaskBundle{{{"Leg", "", 1, false}}, false, false};
    }));
    e.register_provider(make("Bad", "Bad", [](const BehaviourContext&) {
        return SubtaskBundle{{{"Ghost", "", 1, false}}, false, false};
    }));
    e.register_provider(make("Leg", "Leg"));
    e.start();
    e.submit_root_task("Flaky", "", 1, false);
    drain(e);
    const auto before = snapshot(e);
    e.external_trigger("Flaky", "");
    auto r = e.step();
    REQUIRE(r.trace_delta.size() == 3);
    CHECK(r.trace_delta[1].kind == TraceKind::CallbackFailure);
    CHECK(r.trace_delta[1].get("message") == "sensor offline");
    CHECK(r.trace_delta[2].kind == TraceKind::IdleEmitted);
    auto after = snapshot(e);
    after.step_counter = before.step_counter;
    CHECK(after == before);

    e.submit_root_task("Bad", "", 1, false);
    drain(e);
    CHECK(count(e, TraceKind::CallbackFailure, "Bad") == 1);
    CHECK(e.graph().group("Bad").subtasks.empty());
}

TEST_CASE("Idle leaves the subtree bit-identical") {
    Engine e;
    legs_and_arms(e);
    e.register_provider(make("Idler", "Idler", [](const BehaviourContext& c) {
        if (c.reason == RunReason::OtherTrigger) return SubtaskBundle::Idle();
        return SubtaskBundle{{{"Walk", "", 1, false}}, false, false};
    }));
    e.start();
    e.submit_root_task("Idler", "", 1, false);
    drain(e);
    for (int i = 0; i < 5; ++i) {
        const auto before = snapshot(e);
        const auto last = e.graph().group("Idler").last_subtasks;
        e.external_trigger("Idler", "");
        auto r = e.step();
        CHECK(r.providers_run == std::vector<std::string>{"Idler"});
        auto after = snapshot(e);
        after.step_counter = before.step_counter;
        CHECK(after == before);
        CHECK(e.graph().group("Idler").last_subtasks == last);
    }
}

TEST_CASE("quiescence: stepping an empty queue changes nothing") {
    Engine e;
    legs_and_arms(e);
    e.start();
    e.submit_root_task("Walk", "", 1, false);
    drain(e);
    const auto before = snapshot(e);
    const auto seq = e.trace().next_seq();
    for (int i = 0; i < 10; ++i) e.step();
    CHECK(snapshot(e) == before);
    CHECK(e.trace().next_seq() == seq);
}

TEST_CASE("Done is retained on non-root tasks and reported to the parent once") {
    Engine e;
    int subtask_done_runs = 0;
    ProviderSpec parent = make("Parent", "Parent", [&](const BehaviourContext& c) {
        if (c.reason == RunReason::SubtaskDone) ++subtask_done_runs;
        return c.reason == RunReason::SubtaskDone ? SubtaskBundle::Idle() : SubtaskBundle{{{"Child", "", 1, false}}, false, false};
    });
    parent.uses = {"Child"};
    e.register_provider(parent);
    e.register_provider(make("Child", "Child", [](const BehaviourContext& c) {
        return c.reason == RunReason::OtherTrigger ? SubtaskBundle::Done() : SubtaskBundle{};
    }));
    e.start();
    e.submit_root_task("Parent", "", 1, false);
    drain(e);
    const auto child = *e.graph().group("Child").assigned_task;
    e.external_trigger("Child", "");
    drain(e);
    CHECK(subtask_done_runs == 1);
    REQUIRE(e.graph().has_task(child));
    CHECK(e.graph().task(child).done);
    CHECK(e.graph().task(child).status == TaskStatus::Running);
    e.external_trigger("Child", "");
    drain(e);
    CHECK(subtask_done_runs == 2);
}

TEST_CASE("a root that emits Done is retired") {
    Engine e;
    e.register_provider(make("Once", "Once", [](const BehaviourContext&) { return SubtaskBundle::Done(); }));
    e.start();
    auto uid = e.submit_root_task("Once", "", 1, false);
    drain(e);
    CHECK_FALSE(e.graph().has_task(uid));
    CHECK(count(e, TraceKind::DoneEmitted, "Once") == 1);
    CHECK(count(e, TraceKind::TaskRetired, "Once") == 1);
}

TEST_CASE("task uids are issued without gaps") {
    Engine e;
    e.register_provider(make("A", "A", requests({{"B", "", 1, false}})));
    e.register_provider(make("B", "B"));
    e.start();
    auto r1 = e.submit_root_task("A", "", 1, false);
    auto r2 = e.submit_root_task("B", "", 0, false);
    drain(e);
    CHECK(to_int(r1) == 1);
    CHECK(to_int(r2) == 2);
    std::vector<std::uint64_t> uids;
    for (const auto& [uid, t] : e.graph().tasks) uids.push_back(to_int(uid));
    CHECK(uids == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("trace ring buffer keeps counting") {
    EngineConfig cfg;
    cfg.trace_cap = 4;
    Engine e(cfg);
    e.register_provider(make("A", "A"));
    e.start();
    for (int i = 0; i < 5; ++i) e.submit_root_task("A", "", i, false);
    drain(e);
    CHECK(e.trace().events().size() == 4);
    CHECK(e.trace().next_seq() - e.trace().first_seq() == 4);
    CHECK(e.trace().events().back().seq == e.trace().next_seq() - 1);
}
