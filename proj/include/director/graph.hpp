#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "director/model.hpp"

namespace director {

/// The live tree: every provider group, every live task, the root list and
/// the state store. Retired tasks are dropped from `tasks`.
struct DirectorGraph {
    std::map<TaskType, ProviderGroup, std::less<>> groups;
    /// Group registration order; every ordered scan over groups follows it.
    std::vector<TaskType> group_order;
    std::map<TaskUid, TaskInstance> tasks;
    std::vector<TaskUid> root_tasks;
    StateStore state;
    std::uint64_t step_counter = 0;

    bool has_group(std::string_view type) const { return groups.find(type) != groups.end(); }
    const ProviderGroup& group(std::string_view type) const;
    ProviderGroup& group(std::string_view type);

    bool has_task(TaskUid uid) const { return tasks.count(uid) != 0; }
    const TaskInstance& task(TaskUid uid) const;
    TaskInstance& task(TaskUid uid);

    /// Task currently holding the parent group of `t`, or nullptr for root tasks.
    /// Throws DetachedTask when the parent group holds nothing.
    const TaskInstance* parent_task(const TaskInstance& t) const;

    /// Groups strictly above `t`, nearest first (t's parent group, then the
    /// parent group of that group's task, ...). Empty for root tasks.
    std::vector<TaskType> ancestor_groups(const TaskInstance& t) const;
};

}  // namespace director
