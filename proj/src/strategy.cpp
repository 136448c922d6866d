#include "platoon/strategy.hpp"

namespace platoon {

std::string to_string(const StrategyKey& key) {
  return to_string(key.maneuver) + "/" + std::string(to_string(key.role));
}

std::string_view to_string(WaitState w) {
  switch (w) {
    case WaitState::Start: return "Start";
    case WaitState::WaitingGap: return "WaitingGap";
    case WaitState::WaitingJoinFlag: return "WaitingJoinFlag";
    case WaitState::WaitingEvadeFlag: return "WaitingEvadeFlag";
    case WaitState::Aligning: return "Aligning";
    case WaitState::ChangingLane: return "ChangingLane";
    case WaitState::WaitingUpdateFlag: return "WaitingUpdateFlag";
    case WaitState::Braking: return "Braking";
    case WaitState::Standstill: return "Standstill";
    case WaitState::WaitingSafeFlag: return "WaitingSafeFlag";
    case WaitState::WaitingRestart: return "WaitingRestart";
    case WaitState::WaitingTakeover: return "WaitingTakeover";
    case WaitState::WaitingClear: return "WaitingClear";
    case WaitState::Done: return "Done";
  }
  return "?";
}

const PeerView* StrategyContext::peer(VehicleId id) const {
  if (!v2v || !id.valid()) return nullptr;
  auto it = v2v->peers.find(id);
  return it == v2v->peers.end() ? nullptr : &it->second;
}

bool StrategyContext::lane_clear(int target_lane) const {
  if (target_lane == ego->lane + 1) return left_clear;
  if (target_lane == ego->lane - 1) return right_clear;
  return target_lane == ego->lane;
}

void StrategyRegistry::register_strategy(const StrategyKey& key, Strategy strategy) {
  auto [it, inserted] = table_.try_emplace(key, std::move(strategy));
  if (!inserted) throw DuplicateKey("strategy already registered for " + to_string(key));
}

const Strategy* StrategyRegistry::find(const StrategyKey& key) const {
  auto it = table_.find(key);
  return it == table_.end() ? nullptr : &it->second;
}

bool StrategyRegistry::remove(const StrategyKey& key) { return table_.erase(key) > 0; }

std::vector<StrategyKey> StrategyRegistry::keys() const {
  std::vector<StrategyKey> out;
  for (const auto& [k, _] : table_) out.push_back(k);
  return out;
}

}  // namespace platoon
