#include "nemo/oracle.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace nemo {

void OracleVerdict::fail(Violation v) {
    properties[v.property] = false;
    violations.push_back(std::move(v));
}

void OracleVerdict::merge(const OracleVerdict& other) {
    for (const auto& [name, ok] : other.properties) {
        auto [it, fresh] = properties.emplace(name, ok);
        if (!fresh) it->second = it->second && ok;
    }
    violations.insert(violations.end(), other.violations.begin(), other.violations.end());
}

namespace {

std::string slot_text(SlotId s) { return "(" + std::to_string(s.round) + "," + std::to_string(s.rank) + ")"; }

}  // namespace

OracleVerdict check_safety(std::span<const ReplicaOutput> outputs, const std::map<BlockRef, BlockPtr>& emitted) {
    OracleVerdict v;
    for (const char* p : {"prefix", "no_duplication", "no_creation", "slot_agreement", "same_slot_same_block"}) {
        v.check(p);
    }

    for (const auto& out : outputs) {
        std::set<BlockRef> seen;
        for (std::size_t i = 0; i < out.sequence.size(); ++i) {
            const auto& ref = out.sequence[i];
            if (!seen.insert(ref).second) {
                v.fail({"no_duplication", out.id, out.id, i, to_string(ref) + " committed twice"});
                break;
            }
        }
        for (std::size_t i = 0; i < out.sequence.size(); ++i) {
            if (!emitted.count(out.sequence[i])) {
                v.fail({"no_creation", out.id, out.id, i, to_string(out.sequence[i]) + " was never emitted"});
                break;
            }
        }
    }

    for (std::size_t a = 0; a < outputs.size(); ++a) {
        for (std::size_t b = a + 1; b < outputs.size(); ++b) {
            const auto& x = outputs[a];
            const auto& y = outputs[b];
            const std::size_t common = std::min(x.sequence.size(), y.sequence.size());
            for (std::size_t i = 0; i < common; ++i) {
                if (x.sequence[i] != y.sequence[i]) {
                    v.fail({"prefix", x.id, y.id, i,
                            to_string(x.sequence[i]) + " vs " + to_string(y.sequence[i])});
                    break;
                }
            }
            for (const auto& [slot, sx] : x.decisions) {
                auto it = y.decisions.find(slot);
                if (it == y.decisions.end() || !sx.decided() || !it->second.decided()) continue;
                const auto& sy = it->second;
                if (sx.state != sy.state) {
                    v.fail({"slot_agreement", x.id, y.id, slot.round,
                            "slot " + slot_text(slot) + ": " + to_string(sx.state) + " vs " + to_string(sy.state)});
                } else if (sx.is_commit() && sx.block != sy.block) {
                    v.fail({"same_slot_same_block", x.id, y.id, slot.round,
                            "slot " + slot_text(slot) + ": " + to_string(sx.block) + " vs " + to_string(sy.block)});
                }
            }
        }
    }
    return v;
}

std::vector<ReplicaOutput> collect_outputs(const SimTrace& trace, OracleVerdict& verdict) {
    verdict.check("recovery");
    std::vector<ReplicaOutput> out;
    for (std::size_t i = 0; i < trace.replicas.size(); ++i) {
        const auto& rt = trace.replicas[i];
        ReplicaOutput o;
        o.id = static_cast<ReplicaId>(i);
        o.sequence = rt.sequence;
        for (const auto& inc : rt.incarnations) {
            for (const auto& [slot, rec] : inc.decisions) {
                auto [it, fresh] = o.decisions.emplace(slot, rec.status);
                if (!fresh && !it->second.same_decision(rec.status)) {
                    verdict.fail({"recovery", o.id, o.id, slot.round,
                                  "slot " + slot_text(slot) + " decided differently after recovery"});
                }
            }
        }
        if (rt.redelivery_conflicts > 0) {
            verdict.fail({"recovery", o.id, o.id, 0,
                          std::to_string(rt.redelivery_conflicts) + " re-delivered positions differ"});
        }
        if (rt.reproposed_rounds > 0) {
            verdict.fail({"recovery", o.id, o.id, 0,
                          std::to_string(rt.reproposed_rounds) + " logged rounds proposed again"});
        }
        out.push_back(std::move(o));
    }
    if (trace.equivocations > 0) {
        verdict.fail({"recovery", 0, 0, 0, std::to_string(trace.equivocations) + " conflicting block emissions"});
    }
    return out;
}

namespace {

// Plain breadth-first search over parent edges.
bool reaches(const DagView& view, const BlockRef& from, const BlockRef& to) {
    if (from == to) return true;
    std::set<BlockRef> seen{from};
    std::deque<BlockRef> frontier{from};
    while (!frontier.empty()) {
        const Block* b = view.find(frontier.front());
        frontier.pop_front();
        if (b == nullptr) continue;
        for (const auto& p : b->parents) {
            if (p == to) return true;
            if (p.round > to.round && seen.insert(p).second) frontier.push_back(p);
        }
    }
    return false;
}

std::size_t supporters(const DagView& view, const BlockRef& target, std::size_t n) {
    std::size_t count = 0;
    for (std::size_t a = 0; a < n; ++a) {
        const Block* b = view.find(BlockRef{static_cast<ReplicaId>(a), target.round + 1});
        if (b == nullptr) continue;
        for (const auto& p : b->parents) {
            if (p == target) {
                ++count;
                break;
            }
        }
    }
    return count;
}

}  // namespace

std::map<SlotId, SlotStatus> brute_force_decide(const DagView& view, const CommitterConfig& cfg, Round from_round) {
    const auto& s = cfg.schedule;
    const std::size_t n = s.n;
    const std::size_t f = (n - 1) / 2;
    std::map<SlotId, SlotStatus> result;
    // Descending: every later slot is classified before an earlier one looks
    // for its anchor.
    for (Round r = view.highest_round(); r >= std::max<Round>(from_round, 1); --r) {
        for (std::uint32_t k = s.leaders_per_round; k-- > 0;) {
            const SlotId slot{r, k};
            const BlockRef leader{static_cast<ReplicaId>((r + k) % n), r};
            const bool present = view.find(leader) != nullptr;
            SlotStatus status = SlotStatus::undecided(slot);

            if (present && supporters(view, leader, n) >= f + 1) {
                status = SlotStatus::commit(slot, leader, DecisionRule::direct);
            } else {
                // Anchor: first later slot in round >= r + 2 that is not a skip.
                for (const auto& [later_slot, later] : result) {
                    if (later_slot.round < r + 2) continue;
                    if (later.is_skip()) continue;
                    if (later.is_commit()) {
                        status = present && reaches(view, later.block, leader)
                                     ? SlotStatus::commit(slot, leader, DecisionRule::indirect)
                                     : SlotStatus::skip(slot);
                    }
                    break;
                }
            }
            result[slot] = status;
        }
        if (r == 1) break;
    }
    return result;
}

OracleVerdict audit_decisions(const SimTrace& trace, const ScheduleConfig& schedule, std::size_t direct_stride) {
    OracleVerdict v;
    v.check("decision_audit");
    const CommitterConfig correct{schedule, InjectedFault::none};
    direct_stride = std::max<std::size_t>(direct_stride, 1);
    for (std::size_t i = 0; i < trace.replicas.size(); ++i) {
        for (const auto& inc : trace.replicas[i].incarnations) {
            if (!inc.view) continue;
            std::size_t direct_seen = 0;
            for (const auto& [slot, rec] : inc.decisions) {
                if (rec.status.rule == DecisionRule::direct && direct_seen++ % direct_stride != 0) continue;
                const DagView snapshot = inc.view->prefix(rec.view_size);
                const auto expected = brute_force_decide(snapshot, correct, slot.round);
                auto it = expected.find(slot);
                const SlotStatus want = it == expected.end() ? SlotStatus::undecided(slot) : it->second;
                if (!want.same_decision(rec.status)) {
                    v.fail({"decision_audit", static_cast<ReplicaId>(i), static_cast<ReplicaId>(i), slot.round,
                            "slot " + slot_text(slot) + " decided " + to_string(rec.status.state) + " at view size " +
                                std::to_string(rec.view_size) + ", oracle says " + to_string(want.state)});
                }
            }
        }
    }
    return v;
}

OracleVerdict check_validity_rules(const SimTrace& trace) {
    OracleVerdict v;
    v.check("block_rules");
    const std::size_t f = (trace.n - 1) / 2;
    for (const auto& [ref, block] : trace.emitted) {
        try {
            validate_block(*block, f);
        } catch (const InvalidBlock& e) {
            v.fail({"block_rules", ref.author, ref.author, ref.round, e.what()});
        }
    }
    return v;
}

}  // namespace nemo
