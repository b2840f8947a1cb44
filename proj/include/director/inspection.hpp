#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "director/engine.hpp"

namespace director {

struct ProviderView {
    std::string id;
    ProviderKind kind = ProviderKind::Provide;
    std::vector<Condition> when;
    std::vector<StateAssertion> causing;
    std::vector<TaskType> needs;
    std::vector<TaskType> uses;

    friend bool operator==(const ProviderView&, const ProviderView&) = default;
};

struct GroupView {
    TaskType task_type;
    std::vector<ProviderView> providers;
    std::optional<std::string> active_provider;
    std::optional<TaskUid> assigned_task;
    std::vector<TaskUid> watchers;
    std::optional<PushRecord> pushed_by;
    std::vector<TaskUid> subtasks;

    friend bool operator==(const GroupView&, const GroupView&) = default;
};

/// Deep copy of the graph at one point in time. Groups are in registration order.
struct GraphSnapshot {
    std::vector<GroupView> groups;
    std::map<TaskUid, TaskInstance> tasks;
    std::vector<TaskUid> root_tasks;
    StateStore state;
    std::uint64_t step_counter = 0;

    const GroupView* find_group(std::string_view type) const;

    friend bool operator==(const GraphSnapshot&, const GraphSnapshot&) = default;
};

GraphSnapshot snapshot(const Engine& engine);

/// Graphviz rendering: active solid, blocked dashed, inactive dotted; task edges
/// labelled with priority.
std::string export_dot(const GraphSnapshot& s);

/// One serialized record per line for trace events with seq in [from, to).
/// Throws RangeOutOfBounds if the range leaves the retained trace.
std::string export_trace(const Engine& engine, std::uint64_t from, std::uint64_t to);
std::string export_trace(const Engine& engine);

}  // namespace director
