#include "nemo/netsim.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace nemo {

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    // Rejection sampling keeps the draw exactly uniform.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
}

const char* net_name(const NetModel& net) {
    switch (net.index()) {
        case 0: return "sync";
        case 1: return "psync";
        default: return "random";
    }
}

NetModel uniform_sync(std::size_t n, SimTime delay) {
    SynchronousNet net;
    net.delay.assign(n, std::vector<SimTime>(n, delay));
    for (std::size_t i = 0; i < n; ++i) net.delay[i][i] = 0;
    return net;
}

NetModel uniform_random(std::size_t n, SimTime mean) {
    RandomAsyncNet net;
    net.mean.assign(n, std::vector<SimTime>(n, mean));
    for (std::size_t i = 0; i < n; ++i) net.mean[i][i] = 0;
    return net;
}

void slow_down(NetModel& net, ReplicaId slow, SimTime slow_delay) {
    auto patch = [&](std::vector<std::vector<SimTime>>& m) {
        if (slow >= m.size()) throw Error("slow replica out of range");
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (i == slow) continue;
            m[slow][i] = slow_delay;
            m[i][slow] = slow_delay;
        }
    };
    if (auto* s = std::get_if<SynchronousNet>(&net)) {
        patch(s->delay);
    } else if (auto* r = std::get_if<RandomAsyncNet>(&net)) {
        patch(r->mean);
    } else {
        throw Error("slow links need a per-link delay model (sync or random)");
    }
}

SimTime sample_delay(const NetModel& net, ReplicaId src, ReplicaId dst, SimTime now, Rng& rng) {
    if (src == dst) return 0;
    if (const auto* s = std::get_if<SynchronousNet>(&net)) return s->delay.at(src).at(dst);
    if (const auto* p = std::get_if<PartialSynchronyNet>(&net)) {
        const SimTime bounded = rng.uniform_int(1, p->delta);
        if (now >= p->gst) return bounded;
        const auto heavy = static_cast<SimTime>(rng.exponential(static_cast<double>(p->pre_gst_mean))) + 1;
        // Whatever is in flight at GST lands within delta of it.
        return std::min(heavy, p->gst - now + bounded);
    }
    const auto& r = std::get<RandomAsyncNet>(net);
    const auto mean = static_cast<double>(r.mean.at(src).at(dst));
    return std::max<SimTime>(1, static_cast<SimTime>(std::llround(rng.exponential(mean))));
}

void FaultPlan::validate(std::size_t n) const {
    const std::size_t f = (n - 1) / 2;
    if (crashes.size() > f) {
        throw Error("fault plan crashes " + std::to_string(crashes.size()) + " replicas, at most " +
                    std::to_string(f) + " allowed");
    }
    std::map<ReplicaId, SimTime> crashed;
    for (const auto& c : crashes) {
        if (c.replica >= n) throw Error("crash names unknown replica " + std::to_string(c.replica));
        if (c.at < 0) throw Error("crash time must be non-negative");
        if (!crashed.emplace(c.replica, c.at).second) {
            throw Error("replica " + std::to_string(c.replica) + " crashes twice");
        }
    }
    std::set<ReplicaId> recovered;
    for (const auto& r : recoveries) {
        auto it = crashed.find(r.replica);
        if (it == crashed.end() || r.at <= it->second) {
            throw Error("recovery of replica " + std::to_string(r.replica) + " without an earlier crash");
        }
        if (!recovered.insert(r.replica).second) {
            throw Error("replica " + std::to_string(r.replica) + " recovers twice");
        }
    }
}

namespace {

enum class EventClass : std::uint8_t { crash = 0, recover = 1, message = 2, tick = 3, arrival = 4, retry = 5 };

struct Event {
    SimTime time = 0;
    EventClass cls = EventClass::message;
    std::uint64_t seq = 0;
    ReplicaId target = 0;
    ReplicaId from = 0;
    std::uint32_t incarnation = 0;
    std::optional<PeerMessage> msg;
    std::optional<Transaction> tx;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.cls != b.cls) return a.cls > b.cls;
        return a.seq > b.seq;
    }
};

const char* message_label(const PeerMessage& m) {
    switch (m.index()) {
        case 0: return "block";
        case 1: return "fetch_request";
        case 2: return "fetch_response";
        default: return "tx_submit";
    }
}

class Simulation {
public:
    explicit Simulation(const SimConfig& cfg) : cfg_(cfg), rng_(cfg.seed), n_(cfg.schedule.n) {
        cfg_.schedule.validate();
        cfg_.faults.validate(n_);
        if (cfg_.horizon <= 0) throw Error("horizon must be positive");
        if (cfg_.workload.tx_rate < 0) throw Error("tx rate must be non-negative");
        check_net();
        trace_.n = n_;
        trace_.horizon = cfg_.horizon;
        trace_.replicas.resize(n_);
        slots_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) slots_[i].wal = std::make_unique<MemoryWal>();
    }

    SimTrace run() {
        for (const auto& c : cfg_.faults.crashes) push(c.at, EventClass::crash, c.replica, 0, 0);
        for (const auto& r : cfg_.faults.recoveries) push(r.at, EventClass::recover, r.replica, 0, 0);
        if (cfg_.workload.tx_rate > 0) push(cfg_.workload.start, EventClass::arrival, 0, 0, 0);

        // Construct everyone before the first broadcast so no start-up message is lost.
        for (std::size_t i = 0; i < n_; ++i) boot(static_cast<ReplicaId>(i), 0, nullptr, false);
        for (std::size_t i = 0; i < n_; ++i) {
            auto out = slots_[i].replica->start(0);
            after_step(static_cast<ReplicaId>(i), 0, std::move(out));
        }

        while (!queue_.empty()) {
            std::pop_heap(queue_.begin(), queue_.end(), Later{});
            Event ev = std::move(queue_.back());
            queue_.pop_back();
            if (ev.time > cfg_.horizon) {
                if (ev.cls == EventClass::message) ++trace_.in_flight_at_horizon;
                continue;
            }
            ++trace_.events_processed;
            dispatch(ev);
        }

        for (std::size_t i = 0; i < n_; ++i) {
            auto& slot = slots_[i];
            if (slot.replica) snapshot(static_cast<ReplicaId>(i), std::nullopt);
            trace_.replicas[i].crashed_at_end = !slot.replica;
        }
        return std::move(trace_);
    }

private:
    struct Slot {
        std::unique_ptr<MemoryWal> wal;
        std::unique_ptr<Replica> replica;
        std::uint32_t incarnation = 0;
        std::uint64_t tick_seq = 0;  // seq of the live tick event, 0 if none
        SimTime tick_time = 0;
        Round logged_max_round = 0;  // highest own round in the WAL at recovery
        std::uint32_t next_client_seq = 0;
        SimTime started = 0;
    };

    void check_net() const {
        auto square = [&](const std::vector<std::vector<SimTime>>& m) {
            if (m.size() != n_) return false;
            for (const auto& row : m) {
                if (row.size() != n_) return false;
                for (auto v : row) {
                    if (v < 0) return false;
                }
            }
            return true;
        };
        if (const auto* s = std::get_if<SynchronousNet>(&cfg_.net)) {
            if (!square(s->delay)) throw Error("sync delay matrix must be n x n and non-negative");
        } else if (const auto* r = std::get_if<RandomAsyncNet>(&cfg_.net)) {
            if (!square(r->mean)) throw Error("random delay matrix must be n x n and non-negative");
        } else {
            const auto& p = std::get<PartialSynchronyNet>(cfg_.net);
            if (p.delta <= 0) throw Error("delta must be positive");
            if (p.pre_gst_mean <= 0) throw Error("pre-GST mean delay must be positive");
        }
    }

    std::uint64_t push(SimTime t, EventClass cls, ReplicaId target, ReplicaId from, std::uint32_t inc,
                       std::optional<PeerMessage> msg = std::nullopt, std::optional<Transaction> tx = std::nullopt) {
        Event ev;
        ev.time = t;
        ev.cls = cls;
        ev.seq = ++seq_;
        ev.target = target;
        ev.from = from;
        ev.incarnation = inc;
        ev.msg = std::move(msg);
        ev.tx = std::move(tx);
        queue_.push_back(std::move(ev));
        std::push_heap(queue_.begin(), queue_.end(), Later{});
        return seq_;
    }

    ReplicaConfig replica_config(ReplicaId id) const {
        ReplicaConfig rc;
        rc.id = id;
        rc.schedule = cfg_.schedule;
        rc.readiness = cfg_.readiness;
        rc.batch_cap = cfg_.batch_cap;
        rc.queue_cap = cfg_.queue_cap;
        rc.fault = cfg_.fault;
        return rc;
    }

    void boot(ReplicaId id, SimTime now, const WalReadResult* restored, bool start = true) {
        auto& slot = slots_[id];
        auto& rt = trace_.replicas[id];
        slot.incarnation = static_cast<std::uint32_t>(rt.incarnations.size());
        slot.started = now;
        if (restored == nullptr) {
            slot.replica = std::make_unique<Replica>(replica_config(id), *slot.wal);
        } else {
            slot.replica = Replica::recover(replica_config(id), slot.wal->bytes(), *slot.wal);
        }
        rt.incarnations.push_back(IncarnationTrace{slot.incarnation, now, std::nullopt, nullptr, {}, 0, 0, {}, 1});
        if (!start) return;
        auto out = slot.replica->start(now);
        after_step(id, now, std::move(out));
    }

    void snapshot(ReplicaId id, std::optional<SimTime> ended) {
        auto& slot = slots_[id];
        auto& inc = trace_.replicas[id].incarnations.back();
        const auto& r = *slot.replica;
        inc.ended = ended;
        if (cfg_.keep_views) {
            inc.view = std::make_shared<const DagView>(r.view());
            inc.decisions = r.commits().decisions;
        }
        inc.timeout_fires = r.proposer().state().timeout_fires;
        inc.blocks_emitted = r.proposer().state().blocks_emitted;
        inc.counters = r.counters();
        inc.next_round = r.proposer().state().current_round;
    }

    void dispatch(Event& ev) {
        auto& slot = slots_[ev.target];
        switch (ev.cls) {
            case EventClass::crash:
                crash(ev.target, ev.time);
                return;
            case EventClass::recover:
                recover(ev.target, ev.time);
                return;
            case EventClass::message:
                if (!slot.replica || slot.incarnation != ev.incarnation) {
                    ++trace_.messages_dropped_crashed;
                    return;
                }
                after_step(ev.target, ev.time, slot.replica->handle_message(ev.from, *ev.msg, ev.time));
                return;
            case EventClass::tick:
                if (!slot.replica || slot.incarnation != ev.incarnation || slot.tick_seq != ev.seq) return;
                slot.tick_seq = 0;
                after_step(ev.target, ev.time, slot.replica->on_tick(ev.time));
                return;
            case EventClass::arrival:
                arrival(ev.time);
                return;
            case EventClass::retry:
                submit(ev.target, std::move(*ev.tx), ev.time);
                return;
        }
    }

    void crash(ReplicaId id, SimTime now) {
        auto& slot = slots_[id];
        if (!slot.replica) return;
        snapshot(id, now);
        trace_.tx_lost_in_crash += slot.replica->drop_pending().size();
        slot.replica.reset();
        slot.tick_seq = 0;
        trace_.replicas[id].ever_crashed = true;
        if (cfg_.tear_wal_on_crash) {
            WalRecord rec{WalRecordKind::commit_mark, nullptr, SlotId{1, 0}, BlockRef{}};
            auto bytes = encode_wal_record(rec);
            const auto keep = static_cast<std::size_t>(rng_.uniform_int(1, static_cast<std::int64_t>(bytes.size()) - 1));
            slot.wal->append(std::span<const std::uint8_t>(bytes).first(keep));
        }
    }

    void recover(ReplicaId id, SimTime now) {
        auto& slot = slots_[id];
        if (slot.replica) return;
        auto parsed = read_wal(slot.wal->bytes());
        std::vector<std::uint8_t> intact(slot.wal->bytes().begin(),
                                         slot.wal->bytes().begin() + static_cast<std::ptrdiff_t>(parsed.valid_bytes));
        slot.wal = std::make_unique<MemoryWal>(std::move(intact));
        Round logged = 0;
        for (const auto& rec : parsed.records) {
            if (rec.block && rec.block->ref.author == id) logged = std::max(logged, rec.block->ref.round);
        }
        slot.logged_max_round = logged;
        boot(id, now, &parsed);
    }

    void arrival(SimTime now) {
        const SimTime stop = cfg_.workload.stop.value_or(cfg_.horizon);
        if (now >= stop) return;
        // Clients pick the next live replica in turn.
        std::optional<ReplicaId> target;
        for (std::size_t k = 0; k < n_; ++k) {
            auto cand = static_cast<ReplicaId>((rr_ + k) % n_);
            if (slots_[cand].replica) {
                target = cand;
                rr_ = (cand + 1) % n_;
                break;
            }
        }
        if (target) {
            auto& slot = slots_[*target];
            Transaction tx;
            tx.client = *target;
            tx.sequence = slot.next_client_seq++;
            tx.body.resize(cfg_.workload.tx_size);
            for (std::size_t i = 0; i < tx.body.size(); ++i) {
                tx.body[i] = static_cast<std::uint8_t>((tx.sequence + i) & 0xff);
            }
            tx_index_.emplace(tx_key(tx), trace_.txs.size());
            trace_.txs.push_back(TxRecord{tx_key(tx), *target, now, false, std::nullopt, std::nullopt});
            submit(*target, std::move(tx), now);
        }
        ++arrivals_;
        const auto next = cfg_.workload.start +
                          static_cast<SimTime>(static_cast<double>(arrivals_) * 1e6 / cfg_.workload.tx_rate);
        push(std::max(next, now), EventClass::arrival, 0, 0, 0);
    }

    void submit(ReplicaId id, Transaction tx, SimTime now) {
        auto& slot = slots_[id];
        if (!slot.replica) {
            ++trace_.tx_lost_in_crash;
            return;
        }
        const auto key = tx_key(tx);
        if (slot.replica->submit(tx) == SubmitResult::accepted) {
            ++trace_.tx_accepted;
            if (auto it = tx_index_.find(key); it != tx_index_.end()) trace_.txs[it->second].accepted = true;
            after_step(id, now, {});
            return;
        }
        ++trace_.tx_rejected;
        // Same replica only; the client keeps its pick.
        push(now + cfg_.workload.retry_after, EventClass::retry, id, id, 0, std::nullopt, std::move(tx));
    }

    void after_step(ReplicaId id, SimTime now, std::vector<Outbound> out) {
        auto& slot = slots_[id];
        auto& rt = trace_.replicas[id];
        for (auto& o : out) {
            const char* label = message_label(o.msg);
            ++trace_.messages_by_type[label];
            ++trace_.messages_sent;
            if (const auto* bm = std::get_if<BlockMsg>(&o.msg); bm && bm->block->ref.author == id) {
                note_emitted(id, bm->block);
            }
            const SimTime arrive = now + sample_delay(cfg_.net, id, o.to, now, rng_);
            const auto& dst = slots_[o.to];
            const std::uint32_t inc = dst.replica ? dst.incarnation : std::numeric_limits<std::uint32_t>::max();
            push(arrive, EventClass::message, o.to, id, inc, std::move(o.msg));
        }

        for (const auto& e : slot.replica->take_new_commits()) {
            if (e.position < rt.sequence.size()) {
                if (rt.sequence[e.position] != e.block) ++rt.redelivery_conflicts;
                continue;
            }
            if (e.position != rt.sequence.size()) throw Error("commit positions skipped ahead");
            rt.sequence.push_back(e.block);
            rt.sequence_slots.push_back(e.anchor_slot);
            const auto& block = *slot.replica->view().get(e.block);
            CommitRecord rec;
            rec.replica = id;
            rec.incarnation = slot.incarnation;
            rec.position = e.position;
            rec.block = e.block;
            rec.slot = e.anchor_slot;
            rec.time = now;
            rec.hops = e.anchor_slot.round + ScheduleConfig::wave_length - e.block.round;
            rec.txs = static_cast<std::uint32_t>(block.payload.size());
            trace_.commits.push_back(rec);
            for (const auto& tx : block.payload) {
                const auto key = tx_key(tx);
                if (!rt.committed_txs.insert(key).second) ++rt.duplicate_txs;
                auto it = tx_index_.find(key);
                if (it == tx_index_.end()) continue;
                auto& tr = trace_.txs[it->second];
                if (!tr.committed_first) tr.committed_first = now;
                if (tr.target == id && !tr.committed_local) tr.committed_local = now;
            }
        }

        if (auto wake = slot.replica->next_wakeup()) {
            const SimTime t = std::max(*wake, now);
            if (slot.tick_seq == 0 || t < slot.tick_time) {
                slot.tick_time = t;
                slot.tick_seq = push(t, EventClass::tick, id, id, slot.incarnation);
            }
        }
    }

    void note_emitted(ReplicaId id, const BlockPtr& block) {
        auto [it, fresh] = trace_.emitted.emplace(block->ref, block);
        if (!fresh && it->second == block) return;  // same broadcast, next peer
        if (!fresh && *it->second != *block) ++trace_.equivocations;
        const auto& slot = slots_[id];
        if (slot.incarnation > 0 && block->ref.round <= slot.logged_max_round) {
            ++trace_.replicas[id].reproposed_rounds;
        }
    }

    SimConfig cfg_;
    Rng rng_;
    std::size_t n_;
    std::vector<Event> queue_;
    std::uint64_t seq_ = 0;
    std::vector<Slot> slots_;
    SimTrace trace_;
    std::unordered_map<std::uint64_t, std::size_t> tx_index_;
    std::size_t rr_ = 0;
    std::uint64_t arrivals_ = 0;
};

}  // namespace

SimTrace run_simulation(const SimConfig& cfg) { return Simulation(cfg).run(); }

}  // namespace nemo
