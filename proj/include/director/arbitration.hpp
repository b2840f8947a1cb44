#pragma once

// Pure decision logic over a DirectorGraph. Nothing here mutates the graph;
// the runtime calls these to decide who gets control of a group.

#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "director/graph.hpp"

namespace director {

struct BranchDescriptor {
    std::int64_t branch_priority = 0;
    bool any_optional = false;

    friend bool operator==(const BranchDescriptor&, const BranchDescriptor&) = default;
};

enum class ChallengeOutcome { ChallengerWins, IncumbentHolds };

std::string_view to_string(ChallengeOutcome o);

/// Nearest node on both parent chains. A task compared with itself yields
/// its own parent.
Parent closest_common_ancestor(const TaskInstance& a, const TaskInstance& b, const DirectorGraph& g);

BranchDescriptor branch_descriptor(const TaskInstance& t, const Parent& ancestor, const DirectorGraph& g);

/// Optional parentage loses outright against non-optional parentage; otherwise
/// the branch priorities below the common ancestor decide and ties hold.
///
/// When the incumbent's chain runs through a group that was pushed on behalf
/// of another task, the challenger must also beat that pusher (unless the
/// challenger is the pusher or descends from it): a pushed provider borrows
/// the pusher's priority.
ChallengeOutcome challenge(const TaskInstance& incumbent, const TaskInstance& challenger,
                           const DirectorGraph& g);

/// Same as challenge() but ignores push records.
ChallengeOutcome challenge_plain(const TaskInstance& incumbent, const TaskInstance& challenger,
                                 const DirectorGraph& g);

struct NoneEligible {
    /// Failing When conditions of the lowest-declared Provide provider.
    std::vector<Condition> unmet;
};

/// Index into group.providers of the chosen provider, or the unmet conditions.
using Selection = std::variant<std::size_t, NoneEligible>;

Selection select_provider(const ProviderGroup& group, const StateStore& s);

/// Whether `t` could take every group named in `p.needs`, recursing through
/// the Needs of the provider that would serve each of those groups.
/// Incumbents that sit below a group `t` is about to take count as won.
bool can_acquire_needs(const ProviderSpec& p, const TaskInstance& t, const DirectorGraph& g);

/// Same check, also returning every group the acquisition would occupy
/// (the transitive Needs closure, excluding `t`'s own group).
bool can_acquire_needs(const ProviderSpec& p, const TaskInstance& t, const DirectorGraph& g,
                       std::set<TaskType>& footprint);

struct PushTarget {
    TaskType group;
    std::size_t provider = 0;

    friend bool operator==(const PushTarget&, const PushTarget&) = default;
};

/// Scans `blockers` in order for a Provide provider whose Causing satisfies
/// `unmet` and whose own When conditions hold; first match by (scan order,
/// declaration order) wins.
std::optional<PushTarget> find_push_target(const Condition& unmet, const std::vector<TaskType>& blockers,
                                           const DirectorGraph& g);

/// Groups to scan for a push on behalf of `t` served by `p`: the parent groups
/// of whatever currently holds each of p's Needs, then t's own group.
std::vector<TaskType> push_blockers(const ProviderSpec& p, const TaskInstance& t, const DirectorGraph& g);

}  // namespace director
