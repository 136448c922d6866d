#pragma once

#include "platoon/strategy.hpp"

namespace platoon {

/// Inserts `joiner` at 1-based `position` (0 or past the end appends).
/// Throws std::invalid_argument for position 1 (the leader slot) or a joiner
/// that is already a member.
PlatoonInfo apply_join(const PlatoonInfo& p, VehicleId joiner, int position);

/// Removes `ids` from the series, keeping order.
PlatoonInfo remove_members(const PlatoonInfo& p, const std::set<VehicleId>& ids);

/// Members from `id` (inclusive) to the tail.
std::set<VehicleId> members_from(const PlatoonInfo& p, VehicleId id);

// Built-in strategies. Each is a pure function of the context plus its own
// progress record.
StrategyOutput platooning_free(const StrategyContext& c, StrategyProgress& p);
StrategyOutput platooning_leader(const StrategyContext& c, StrategyProgress& p);
StrategyOutput platooning_follower(const StrategyContext& c, StrategyProgress& p);

StrategyOutput join_tail_free(const StrategyContext& c, StrategyProgress& p);
StrategyOutput join_middle_free(const StrategyContext& c, StrategyProgress& p);
StrategyOutput join_leader(const StrategyContext& c, StrategyProgress& p);
StrategyOutput join_tail_follower(const StrategyContext& c, StrategyProgress& p);
StrategyOutput join_middle_follower(const StrategyContext& c, StrategyProgress& p);

StrategyOutput leave_leader(const StrategyContext& c, StrategyProgress& p);
StrategyOutput leave_tail_follower(const StrategyContext& c, StrategyProgress& p);
StrategyOutput leave_middle_follower(const StrategyContext& c, StrategyProgress& p);

StrategyOutput aeb_head_leader(const StrategyContext& c, StrategyProgress& p);
StrategyOutput aeb_head_follower(const StrategyContext& c, StrategyProgress& p);
StrategyOutput aeb_middle_leader(const StrategyContext& c, StrategyProgress& p);
StrategyOutput aeb_middle_follower(const StrategyContext& c, StrategyProgress& p);

StrategyOutput cut_in_leader(const StrategyContext& c, StrategyProgress& p);
StrategyOutput cut_in_follower(const StrategyContext& c, StrategyProgress& p);

StrategyOutput hardware_failures_leader(const StrategyContext& c, StrategyProgress& p);
StrategyOutput hardware_failures_follower(const StrategyContext& c, StrategyProgress& p);

/// Fills the registry with every built-in (maneuver, role) cell.
void register_builtin_strategies(StrategyRegistry& registry);

}  // namespace platoon
