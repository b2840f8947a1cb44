#include "director/graph.hpp"

namespace director {

const ProviderGroup& DirectorGraph::group(std::string_view type) const {
    auto it = groups.find(type);
    if (it == groups.end()) throw DirectorError(ErrorCode::UnknownTaskType, std::string(type));
    return it->second;
}

ProviderGroup& DirectorGraph::group(std::string_view type) {
    auto it = groups.find(type);
    if (it == groups.end()) throw DirectorError(ErrorCode::UnknownTaskType, std::string(type));
    return it->second;
}

const TaskInstance& DirectorGraph::task(TaskUid uid) const {
    auto it = tasks.find(uid);
    if (it == tasks.end()) throw DirectorError(ErrorCode::UnknownUid, std::to_string(to_int(uid)));
    return it->second;
}

TaskInstance& DirectorGraph::task(TaskUid uid) {
    auto it = tasks.find(uid);
    if (it == tasks.end()) throw DirectorError(ErrorCode::UnknownUid, std::to_string(to_int(uid)));
    return it->second;
}

const TaskInstance* DirectorGraph::parent_task(const TaskInstance& t) const {
    if (t.is_root()) return nullptr;
    const auto& g = group(*t.parent);
    if (!g.assigned_task || !has_task(*g.assigned_task)) {
        throw DirectorError(ErrorCode::DetachedTask,
                            "task " + std::to_string(to_int(t.uid)) + " has inactive parent " + *t.parent);
    }
    return &task(*g.assigned_task);
}

std::vector<TaskType> DirectorGraph::ancestor_groups(const TaskInstance& t) const {
    std::vector<TaskType> out;
    const TaskInstance* cur = &t;
    while (!cur->is_root()) {
        out.push_back(*cur->parent);
        if (out.size() > groups.size()) {
            throw DirectorError(ErrorCode::DetachedTask, "cyclic parent chain at task " + std::to_string(to_int(t.uid)));
        }
        cur = parent_task(*cur);
    }
    return out;
}

}  // namespace director
