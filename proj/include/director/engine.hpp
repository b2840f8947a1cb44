#pragma once

#include <atomic>
#include <functional>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "director/arbitration.hpp"
#include "director/graph.hpp"
#include "director/trace.hpp"

namespace director {

struct RootTaskSubmitted {
    TaskUid uid{};
    TaskRequest request;
};
struct RootTaskRemoved {
    TaskUid uid{};
};
struct StateChanged {
    std::string state_var;
    std::int64_t value = 0;
};
struct ExternalTrigger {
    TaskType group;
    std::string payload;
};

using DirectorEvent = std::variant<RootTaskSubmitted, RootTaskRemoved, StateChanged, ExternalTrigger>;

struct EngineConfig {
    /// Ring-buffer cap for the trace; unbounded when unset.
    std::optional<std::size_t> trace_cap;
    /// Upper bound on fixed-point passes per step before CascadeLimit is thrown.
    std::size_t cascade_limit = 100000;
};

struct StepReport {
    std::size_t events_processed = 0;
    /// Provider ids in invocation order.
    std::vector<std::string> providers_run;
    std::vector<TraceEvent> trace_delta;
};

/// Observer hook called just before every behaviour invocation.
using InvocationObserver = std::function<void(const ProviderSpec&, const BehaviourContext&)>;

/// The Director runtime. Registration happens before start(); afterwards all
/// mutation happens inside step(), which callers must serialize. Event
/// submission only appends to a locked queue and may come from any thread.
class Engine {
public:
    explicit Engine(EngineConfig config = {});

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    void register_state(const std::string& name, std::vector<std::string> labels, const std::string& initial);

    /// Appends the provider to its group in declaration order and returns its
    /// decl_index within the group.
    int register_provider(ProviderSpec spec);

    /// Validates the registry and freezes it. Throws RegistryInvalid.
    void start();
    void shutdown();
    bool started() const noexcept { return started_; }

    TaskUid submit_root_task(const TaskType& type, std::string data, std::int64_t priority, bool optional);
    void remove_root_task(TaskUid uid);
    void state_update(const std::string& state_var, std::int64_t value);
    void state_update(const std::string& state_var, const std::string& label);
    void external_trigger(const TaskType& group, std::string payload);

    /// Processes one queued external event plus every internal cascade until
    /// the graph reaches a fixed point.
    StepReport step();
    bool has_pending_events() const;

    UsesInfo uses_info(const TaskType& group, const TaskType& subtask_type) const;

    const DirectorGraph& graph() const noexcept { return graph_; }
    const Trace& trace() const noexcept { return trace_; }
    const ValidationReport& validation() const noexcept { return validation_; }

    void set_observer(InvocationObserver observer) { observer_ = std::move(observer); }

private:
    struct RunRequest {
        TaskType group;
        RunReason reason;
        TaskUid expected;
    };

    struct TakeCheck {
        bool ok = false;
        std::size_t provider = 0;
        std::string reason;
        /// Set when the only obstacle is a failing When and Needs would be won.
        std::optional<Condition> push_unmet;
        std::size_t push_base = 0;
        std::set<TaskType> footprint;
    };

    void process(const DirectorEvent& ev);
    void settle();
    bool check_pushes();
    bool reselect_providers();
    bool drain_runs();
    bool acquire_pass();

    bool try_acquire_set(const std::vector<TaskUid>& members, bool& pushed);
    TakeCheck take_check(const TaskInstance& t) const;
    bool try_push(const TaskInstance& t, const TakeCheck& check);
    std::vector<TaskUid> acquisition_set(const TaskInstance& t) const;
    std::set<TaskType> released_by_losing(const TaskInstance& t) const;

    void transfer(TaskUid uid, std::size_t provider, RunReason reason, std::optional<PushRecord> push = std::nullopt);
    std::vector<TaskUid> deepest_first(const std::vector<std::pair<TaskType, TaskUid>>& holders) const;
    void evict_needs(const ProviderSpec& p, const TaskType& owner, TaskUid winner);
    void evict(const std::vector<TaskUid>& order, const std::string& reason);
    void lose_control(TaskUid uid, const std::string& reason, bool upward = true);
    /// Spreads a control loss to non-optional siblings and, through Needs, to the parent.
    void cascade_up(TaskUid uid);
    void release_group(const TaskType& type);
    void retire(TaskUid uid, const std::string& reason);

    void run_provider(const TaskType& group, std::size_t provider, RunReason reason, std::string_view payload = {});
    SubtaskBundle invoke(ProviderGroup& g, std::size_t provider, RunReason reason, std::string_view payload);
    void apply_bundle(const TaskType& group, const SubtaskBundle& bundle);
    void block(TaskInstance& t, const std::string& group, const std::string& reason);

    void emit(TraceKind kind, std::string group = {}, std::string provider = {},
              std::optional<TaskUid> task = std::nullopt,
              std::vector<std::pair<std::string, std::string>> detail = {});
    void refresh_watchers();
    void require_running() const;

    EngineConfig config_;
    DirectorGraph graph_;
    Trace trace_;
    ValidationReport validation_;
    bool started_ = false;
    bool stopped_ = false;

    mutable std::mutex queue_mutex_;
    std::deque<DirectorEvent> queue_;
    std::atomic<std::uint64_t> next_uid_{1};
    std::set<TaskUid> issued_roots_;

    std::deque<RunRequest> runs_;
    StepReport* report_ = nullptr;
    InvocationObserver observer_;
};

}  // namespace director
