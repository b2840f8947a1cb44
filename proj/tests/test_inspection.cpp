#include <doctest.h>

#include "director/inspection.hpp"
#include "director/scenario/simulator.hpp"
#include "support/files.hpp"

using namespace director;
using namespace director::scenario;
using director::testing::load_scenario;
using director::testing::scenario_dir;

namespace {

std::size_t count_sub(const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("fresh engine snapshot is empty and inactive") {
    Engine e;
    ProviderSpec p;
    p.id = "Walk";
    p.group = "Walk";
    e.register_provider(p);
    e.start();
    auto s = snapshot(e);
    CHECK(s.root_tasks.empty());
    CHECK(s.tasks.empty());
    REQUIRE(s.groups.size() == 1);
    CHECK_FALSE(s.groups[0].assigned_task.has_value());
    CHECK_FALSE(s.groups[0].active_provider.has_value());
    CHECK(snapshot(e) == s);
}

TEST_CASE("empty snapshot renders a digraph with no nodes") {
    GraphSnapshot s;
    auto dot = export_dot(s);
    CHECK(dot.rfind("digraph", 0) == 0);
    CHECK(dot.find("->") == std::string::npos);
    CHECK(dot.find("\" [") == std::string::npos);
    CHECK(count_sub(dot, "{") == count_sub(dot, "}"));
}

TEST_CASE("mid-walk soccer snapshot") {
    auto sf = load_scenario(scenario_dir() / "soccer.json");
    SimulationOptions opt;
    opt.snapshot_at = {3};
    auto result = run_scenario(sf, opt);
    REQUIRE(result.snapshots.count(3));
    const auto& s = result.snapshots.at(3);

    const auto* walk = s.find_group("Walk");
    const auto* kick = s.find_group("Kick");
    REQUIRE(walk);
    REQUIRE(kick);
    CHECK(walk->assigned_task.has_value());
    CHECK_FALSE(kick->assigned_task.has_value());
    CHECK(kick->watchers.size() == 1);
    CHECK(s.tasks.at(kick->watchers[0]).status == TaskStatus::Queued);
    // Every uid the snapshot mentions exists inside it.
    for (const auto& g : s.groups) {
        if (g.assigned_task) CHECK(s.tasks.count(*g.assigned_task));
        for (auto w : g.watchers) CHECK(s.tasks.count(w));
        for (auto t : g.subtasks) CHECK(s.tasks.count(t));
    }

    auto dot = export_dot(s);
    CHECK(dot.find("\"Walk.stand\" [label=\"Walk.stand [PROVIDE]\", style=solid") != std::string::npos);
    CHECK(dot.find("-> \"Kick.start\" [label=\"1\", style=dashed") != std::string::npos);
    CHECK(dot.find("label=\"pushed\"") != std::string::npos);
    CHECK(export_dot(s) == dot);
    CHECK(count_sub(dot, "{") == count_sub(dot, "}"));
}

TEST_CASE("snapshot without a push has no pushed edge") {
    auto sf = load_scenario(scenario_dir() / "soccer.json");
    SimulationOptions opt;
    opt.snapshot_at = {2};
    auto result = run_scenario(sf, opt);
    auto dot = export_dot(result.snapshots.at(2));
    CHECK(dot.find("pushed") == std::string::npos);
    CHECK(dot.find("\"Walk.walk\" [label=\"Walk.walk [PROVIDE]\", style=solid") != std::string::npos);
}

TEST_CASE("export_trace ranges") {
    Engine e;
    ProviderSpec p;
    p.id = "Walk";
    p.group = "Walk";
    e.register_provider(p);
    e.start();
    e.submit_root_task("Walk", "", 1, false);
    e.step();
    const auto n = e.trace().next_seq();
    REQUIRE(n > 0);
    CHECK(export_trace(e, 0, 0).empty());
    CHECK(export_trace(e, n, n).empty());
    CHECK(export_trace(e) == export_trace(e, 0, n));
    CHECK(count_sub(export_trace(e), "\n") == n);
    try {
        export_trace(e, 0, n + 1);
        FAIL("expected RangeOutOfBounds");
    } catch (const DirectorError& err) {
        CHECK(err.code() == ErrorCode::RangeOutOfBounds);
    }
    CHECK_THROWS_AS(export_trace(e, 2, 1), DirectorError);
}

TEST_CASE("trace records have a stable field order") {
    TraceEvent ev;
    ev.seq = 4;
    ev.step = 2;
    ev.kind = TraceKind::ProviderRun;
    ev.group = "Walk";
    ev.provider = "Walk.walk";
    ev.task = TaskUid{7};
    ev.detail = {{"reason", "NEW_TASK"}};
    CHECK(serialize(ev) ==
          R"({"seq":4,"step":2,"kind":"PROVIDER_RUN","group":"Walk","provider":"Walk.walk","task":7,"reason":"NEW_TASK"})");
}

TEST_CASE("soccer trace is identical across runs and gapless") {
    auto sf = load_scenario(scenario_dir() / "soccer.json");
    auto a = run_scenario(sf);
    auto b = run_scenario(sf);
    CHECK(a.trace_text() == b.trace_text());
    CHECK(export_dot(a.final_snapshot) == export_dot(b.final_snapshot));
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].seq == i);
}

TEST_CASE("every control transfer follows a block, push or state change on that group") {
    auto sf = load_scenario(scenario_dir() / "soccer.json");
    auto r = run_scenario(sf);
    std::size_t transfers = 0;
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const auto& ev = r.trace[i];
        if (ev.kind != TraceKind::ControlTransferred) continue;
        ++transfers;
        bool found = false;
        for (std::size_t j = 0; j < i && !found; ++j) {
            const auto& prev = r.trace[j];
            found = prev.kind == TraceKind::StateChanged ||
                    ((prev.kind == TraceKind::TaskBlocked || prev.kind == TraceKind::GroupPushed) && prev.group == ev.group);
        }
        CHECK(found);
    }
    CHECK(transfers > 0);
}
