#include "director/inspection.hpp"

#include <sstream>

namespace director {

namespace {

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string cluster_name(const TaskType& type) { return quote("cluster_" + type); }

}  // namespace

const GroupView* GraphSnapshot::find_group(std::string_view type) const {
    for (const auto& g : groups) {
        if (g.task_type == type) return &g;
    }
    return nullptr;
}

GraphSnapshot snapshot(const Engine& engine) {
    const auto& graph = engine.graph();
    GraphSnapshot s;
    for (const auto& type : graph.group_order) {
        const auto& g = graph.group(type);
        GroupView v;
        v.task_type = type;
        for (const auto& p : g.providers) v.providers.push_back({p.id, p.kind, p.when, p.causing, p.needs, p.uses});
        if (const auto* spec = g.active_spec()) v.active_provider = spec->id;
        v.assigned_task = g.assigned_task;
        v.watchers = g.watchers;
        v.pushed_by = g.pushed_by;
        v.subtasks = g.subtasks;
        s.groups.push_back(std::move(v));
    }
    s.tasks = graph.tasks;
    s.root_tasks = graph.root_tasks;
    s.state = graph.state;
    s.step_counter = graph.step_counter;
    return s;
}

std::string export_dot(const GraphSnapshot& s) {
    std::ostringstream out;
    out << "digraph director {\n";
    out << "  compound=true;\n  rankdir=TB;\n  node [shape=box];\n";
    if (!s.root_tasks.empty()) out << "  \"Root\" [shape=ellipse, style=solid];\n";

    for (const auto& g : s.groups) {
        const bool waiting = !g.watchers.empty();
        out << "  subgraph " << cluster_name(g.task_type) << " {\n";
        out << "    label=" << quote(g.task_type) << ";\n";
        for (const auto& p : g.providers) {
            const char* style = "dotted";
            const char* color = "black";
            if (g.active_provider == p.id) {
                style = "solid";
                color = "blue";
            } else if (waiting) {
                style = "dashed";
                color = "red";
            }
            out << "    " << quote(p.id) << " [label=" << quote(p.id + " [" + std::string(to_string(p.kind)) + "]")
                << ", style=" << style << ", color=" << color << "];\n";
        }
        out << "  }\n";
    }

    auto anchor = [&](const TaskType& type, std::string* lhead) -> std::string {
        const auto* g = s.find_group(type);
        if (!g || g->providers.empty()) return {};
        if (g->active_provider) return *g->active_provider;
        if (lhead) *lhead = cluster_name(type);
        return g->providers.front().id;
    };

    for (const auto& [uid, t] : s.tasks) {
        std::string from = "Root";
        if (t.parent) {
            from = anchor(*t.parent, nullptr);
            if (from.empty()) continue;
        }
        std::string lhead;
        const auto* target = s.find_group(t.task_type);
        std::string to;
        if (t.status == TaskStatus::Running && target && target->active_provider) {
            to = *target->active_provider;
        } else {
            to = anchor(t.task_type, &lhead);
            if (target && target->active_provider) lhead = cluster_name(t.task_type);
        }
        if (to.empty()) continue;
        const bool running = t.status == TaskStatus::Running;
        std::string label = std::to_string(t.priority) + (t.optional ? " (optional)" : "");
        out << "  " << quote(from) << " -> " << quote(to) << " [label=" << quote(label)
            << ", style=" << (running ? "solid" : "dashed") << ", color=" << (running ? "blue" : "red")
            << ", tooltip=" << quote("task " + std::to_string(to_int(uid)));
        if (!lhead.empty()) out << ", lhead=" << lhead;
        out << "];\n";
    }

    for (const auto& g : s.groups) {
        if (!g.pushed_by || !g.active_provider) continue;
        auto it = s.tasks.find(g.pushed_by->pusher);
        if (it == s.tasks.end()) continue;
        std::string lhead;
        auto from = anchor(it->second.task_type, &lhead);
        if (from.empty() || from == *g.active_provider) continue;
        out << "  " << quote(from) << " -> " << quote(*g.active_provider)
            << " [label=\"pushed\", style=bold, color=orange, constraint=false];\n";
    }
    out << "}\n";
    return out.str();
}

std::string export_trace(const Engine& engine, std::uint64_t from, std::uint64_t to) {
    const auto& trace = engine.trace();
    if (from > to || from < trace.first_seq() || to > trace.next_seq()) {
        throw DirectorError(ErrorCode::RangeOutOfBounds,
                            "range " + std::to_string(from) + ":" + std::to_string(to) + " outside " +
                                std::to_string(trace.first_seq()) + ":" + std::to_string(trace.next_seq()));
    }
    std::string out;
    for (const auto& e : trace.range(from, to)) {
        out += serialize(e);
        out += '\n';
    }
    return out;
}

std::string export_trace(const Engine& engine) {
    return export_trace(engine, engine.trace().first_seq(), engine.trace().next_seq());
}

}  // namespace director
