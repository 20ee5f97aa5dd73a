#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "slap/error.hpp"

namespace slap {

enum class Coll { broadcast, alltoallv, reduce, allgatherv, exscan, barrier };
enum class GroupLabel { world, grid_row, grid_col, layer, fiber, other };
enum class PayloadTag { generic, sparse_matrix, dense_matrix, vector_data, label_data };

const char* to_string(Coll k);
const char* to_string(GroupLabel l);
const char* to_string(PayloadTag t);

/// Per-rank tallies of collective traffic. bytes count data sent by this
/// rank (a broadcast charges the root with the full payload).
struct CommCounters {
    struct Entry {
        std::int64_t calls = 0;
        std::int64_t bytes = 0;
    };
    std::map<Coll, Entry> by_kind;
    std::map<std::pair<Coll, GroupLabel>, Entry> by_kind_label;
    std::map<std::pair<Coll, int>, Entry> by_kind_groupsize;
    std::map<PayloadTag, std::int64_t> bytes_by_tag;

    void record(Coll k, GroupLabel l, int group_size, std::int64_t bytes_sent, PayloadTag tag);
    void merge(const CommCounters& o);

    Entry kind(Coll k) const;
    Entry kind_label(Coll k, GroupLabel l) const;
    Entry kind_groupsize(Coll k, int gs) const;
    std::int64_t tag_bytes(PayloadTag t) const;
    std::int64_t total_bytes() const;
    std::int64_t total_calls() const;

    /// "kind label size calls bytes" lines, one per (kind, label) pair.
    std::string to_text() const;
};

class Transport;

namespace detail {

/// Rendezvous state for one rank group. A collective round is: deposit
/// under the group lock, wait until all members deposited, read under the
/// lock, wait-free depart (last member resets the round). Misuse surfaces
/// as DeadlockError (mismatched kind / missing member on timeout) or
/// ArityError, never as a hang.
struct GroupState {
    Transport* tp = nullptr;
    std::vector<int> members; // world ranks in group-rank order
    GroupLabel label = GroupLabel::other;

    std::mutex mu;
    std::condition_variable cv;
    std::uint64_t gen = 0;
    int arrived = 0;
    int departed = 0;
    bool reading = false;
    Coll kind{};
    int root = -1;
    std::size_t elem_size = 0;
    std::vector<const void*> slots;

    template <class Pred>
    void wait_or_deadlock(std::unique_lock<std::mutex>& lk, Pred&& p, const char* what);

    template <class Deposit, class Read>
    void round(Coll k, int rt, std::size_t esz, Deposit&& dep, Read&& rd);
};

} // namespace detail

/// In-process transport shared by all ranks of one simulated world. Ranks
/// are threads; groups rendezvous through shared state. The communicator
/// surface is transport-agnostic so a networked backend could replace this
/// one behind the same calls.
class Transport {
public:
    Transport(int world_size, std::chrono::milliseconds timeout);

    int world_size() const { return world_size_; }
    std::chrono::milliseconds timeout() const { return timeout_; }

    std::shared_ptr<detail::GroupState> group(const std::vector<int>& members, GroupLabel label);

    void abort() noexcept;
    bool aborted() const { return aborted_.load(std::memory_order_acquire); }

    CommCounters& counters(int world_rank) { return counters_[static_cast<std::size_t>(world_rank)]; }

private:
    int world_size_;
    std::chrono::milliseconds timeout_;
    std::atomic<bool> aborted_{false};
    std::mutex registry_mu_;
    std::map<std::pair<GroupLabel, std::vector<int>>, std::shared_ptr<detail::GroupState>> registry_;
    std::vector<CommCounters> counters_;
};

namespace detail {

template <class Pred>
void GroupState::wait_or_deadlock(std::unique_lock<std::mutex>& lk, Pred&& p, const char* what) {
    const auto deadline = std::chrono::steady_clock::now() + tp->timeout();
    while (!p()) {
        if (tp->aborted()) throw DeadlockError("communicator aborted while waiting in collective");
        if (std::chrono::steady_clock::now() >= deadline) {
            tp->abort();
            throw DeadlockError(std::string("timeout waiting for group members (") + what + ")");
        }
        // short slices so an abort() from another thread is seen promptly;
        // system-clock wait_until maps to pthread_cond_timedwait, which
        // thread sanitizers model (steady-clock waits use the uninstrumented
        // clockwait on this libstdc++)
        cv.wait_until(lk, std::chrono::system_clock::now() + std::chrono::milliseconds(25));
    }
}

template <class Deposit, class Read>
void GroupState::round(Coll k, int rt, std::size_t esz, Deposit&& dep, Read&& rd) {
    const int size = static_cast<int>(members.size());
    std::unique_lock<std::mutex> lk(mu);
    wait_or_deadlock(lk, [&] { return !reading; }, "previous round to drain");
    if (arrived == 0) {
        kind = k;
        root = rt;
        elem_size = esz;
        if (slots.size() != members.size()) slots.assign(members.size(), nullptr);
    } else if (kind != k || root != rt || elem_size != esz) {
        tp->abort();
        throw DeadlockError("collective mismatch: group saw '" + std::string(to_string(kind)) +
                            "' but this rank called '" + std::string(to_string(k)) + "'");
    }
    dep();
    const std::uint64_t g = gen;
    if (++arrived == size) {
        reading = true;
        ++gen;
        cv.notify_all();
    } else {
        wait_or_deadlock(lk, [&] { return gen != g; }, to_string(k));
    }
    rd();
    // hold everyone inside the round until all reads finished: deposits
    // point at caller-owned storage that dies once a caller returns
    if (++departed == size) {
        arrived = 0;
        departed = 0;
        reading = false;
        std::fill(slots.begin(), slots.end(), nullptr);
        ++gen;
        cv.notify_all();
    } else {
        wait_or_deadlock(lk, [&] { return !reading; }, "round to drain after read");
    }
}

} // namespace detail

/// Handle to a rank group. Cheap to copy; collectives are synchronous
/// rendezvous points that every member must reach with matching arguments.
class Comm {
public:
    Comm() = default;
    Comm(Transport* tp, std::shared_ptr<detail::GroupState> gs, int my_index, int world_rank)
        : tp_(tp), gs_(std::move(gs)), my_index_(my_index), world_rank_(world_rank) {}

    int rank() const { return my_index_; }
    int size() const { return static_cast<int>(gs_->members.size()); }
    int world_rank() const { return world_rank_; }
    int world_rank_of(int group_rank) const { return gs_->members[static_cast<std::size_t>(group_rank)]; }
    GroupLabel label() const { return gs_->label; }
    Transport& transport() const { return *tp_; }
    CommCounters& counters() const { return tp_->counters(world_rank_); }

    /// Group containing the given world ranks (this rank must be listed);
    /// order of `members` defines group ranks.
    Comm subgroup(const std::vector<int>& members, GroupLabel label) const {
        int idx = -1;
        for (std::size_t i = 0; i < members.size(); ++i)
            if (members[i] == world_rank_) idx = static_cast<int>(i);
        if (idx < 0) throw ShapeError("rank not a member of requested subgroup");
        return Comm(tp_, tp_->group(members, label), idx, world_rank_);
    }

    template <class T>
    std::vector<T> broadcast(int root, const std::vector<T>& mine, PayloadTag tag = PayloadTag::generic) {
        static_assert(std::is_trivially_copyable_v<T>);
        check_root(root);
        std::vector<T> out;
        gs_->round(Coll::broadcast, root, sizeof(T),
                   [&] {
                       if (my_index_ == root) gs_->slots[static_cast<std::size_t>(root)] = &mine;
                   },
                   [&] {
                       if (my_index_ != root)
                           out = *static_cast<const std::vector<T>*>(gs_->slots[static_cast<std::size_t>(root)]);
                   });
        if (my_index_ == root) out = mine;
        record(Coll::broadcast, my_index_ == root ? bytes_of<T>(out.size()) : 0, tag);
        return out;
    }

    /// payload[j] goes to group rank j; returns what each rank sent here.
    template <class T>
    std::vector<std::vector<T>> alltoallv(const std::vector<std::vector<T>>& payload,
                                          PayloadTag tag = PayloadTag::generic) {
        static_assert(std::is_trivially_copyable_v<T>);
        if (static_cast<int>(payload.size()) != size())
            throw ArityError("alltoallv payload count " + std::to_string(payload.size()) +
                             " != group size " + std::to_string(size()));
        std::vector<std::vector<T>> received(static_cast<std::size_t>(size()));
        gs_->round(Coll::alltoallv, -1, sizeof(T),
                   [&] { gs_->slots[static_cast<std::size_t>(my_index_)] = &payload; },
                   [&] {
                       for (int src = 0; src < size(); ++src) {
                           auto* sp = static_cast<const std::vector<std::vector<T>>*>(
                               gs_->slots[static_cast<std::size_t>(src)]);
                           received[static_cast<std::size_t>(src)] = (*sp)[static_cast<std::size_t>(my_index_)];
                       }
                   });
        std::int64_t sent = 0;
        for (const auto& v : payload) sent += bytes_of<T>(v.size());
        record(Coll::alltoallv, sent, tag);
        return received;
    }

    /// Folds with `op` in group-rank order; result meaningful at root only
    /// (other ranks receive `identity`).
    template <class T, class Op>
    T reduce(int root, const T& mine, Op&& op, T identity, PayloadTag tag = PayloadTag::generic) {
        static_assert(std::is_trivially_copyable_v<T>);
        check_root(root);
        T out = identity;
        gs_->round(Coll::reduce, root, sizeof(T),
                   [&] { gs_->slots[static_cast<std::size_t>(my_index_)] = &mine; },
                   [&] {
                       if (my_index_ == root) {
                           for (int src = 0; src < size(); ++src)
                               out = op(out, *static_cast<const T*>(gs_->slots[static_cast<std::size_t>(src)]));
                       }
                   });
        record(Coll::reduce, bytes_of<T>(1), tag);
        return out;
    }

    /// reduce delivered to every member (same fold order everywhere).
    template <class T, class Op>
    T allreduce(const T& mine, Op&& op, T identity, PayloadTag tag = PayloadTag::generic) {
        static_assert(std::is_trivially_copyable_v<T>);
        T out = identity;
        gs_->round(Coll::reduce, -2, sizeof(T),
                   [&] { gs_->slots[static_cast<std::size_t>(my_index_)] = &mine; },
                   [&] {
                       for (int src = 0; src < size(); ++src)
                           out = op(out, *static_cast<const T*>(gs_->slots[static_cast<std::size_t>(src)]));
                   });
        record(Coll::reduce, bytes_of<T>(1), tag);
        return out;
    }

    /// Elementwise allreduce of equally sized vectors.
    template <class T, class Op>
    std::vector<T> allreduce_vec(const std::vector<T>& mine, Op&& op, PayloadTag tag = PayloadTag::generic) {
        static_assert(std::is_trivially_copyable_v<T>);
        std::vector<T> out = mine;
        gs_->round(Coll::reduce, -3, sizeof(T),
                   [&] { gs_->slots[static_cast<std::size_t>(my_index_)] = &mine; },
                   [&] {
                       out = *static_cast<const std::vector<T>*>(gs_->slots[0]);
                       for (int src = 1; src < size(); ++src) {
                           auto* sp = static_cast<const std::vector<T>*>(gs_->slots[static_cast<std::size_t>(src)]);
                           if (sp->size() != out.size()) throw ArityError("allreduce_vec length mismatch");
                           for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(out[i], (*sp)[i]);
                       }
                   });
        record(Coll::reduce, bytes_of<T>(mine.size()), tag);
        return out;
    }

    template <class T>
    std::vector<std::vector<T>> allgatherv(const std::vector<T>& mine, PayloadTag tag = PayloadTag::generic) {
        static_assert(std::is_trivially_copyable_v<T>);
        std::vector<std::vector<T>> received(static_cast<std::size_t>(size()));
        gs_->round(Coll::allgatherv, -1, sizeof(T),
                   [&] { gs_->slots[static_cast<std::size_t>(my_index_)] = &mine; },
                   [&] {
                       for (int src = 0; src < size(); ++src)
                           received[static_cast<std::size_t>(src)] =
                               *static_cast<const std::vector<T>*>(gs_->slots[static_cast<std::size_t>(src)]);
                   });
        record(Coll::allgatherv, bytes_of<T>(mine.size()), tag);
        return received;
    }

    /// Prefix fold excluding self; rank 0 receives `identity`.
    template <class T, class Op>
    T exscan(const T& mine, Op&& op, T identity, PayloadTag tag = PayloadTag::generic) {
        static_assert(std::is_trivially_copyable_v<T>);
        T out = identity;
        gs_->round(Coll::exscan, -1, sizeof(T),
                   [&] { gs_->slots[static_cast<std::size_t>(my_index_)] = &mine; },
                   [&] {
                       for (int src = 0; src < my_index_; ++src)
                           out = op(out, *static_cast<const T*>(gs_->slots[static_cast<std::size_t>(src)]));
                   });
        record(Coll::exscan, bytes_of<T>(1), tag);
        return out;
    }

    void barrier() {
        gs_->round(Coll::barrier, -1, 0, [] {}, [] {});
        record(Coll::barrier, 0, PayloadTag::generic);
    }

private:
    void check_root(int root) const {
        if (root < 0 || root >= size()) throw ArityError("collective root out of range");
    }
    template <class T>
    static std::int64_t bytes_of(std::size_t n) {
        return static_cast<std::int64_t>(n * sizeof(T));
    }
    void record(Coll k, std::int64_t bytes, PayloadTag tag) const {
        counters().record(k, gs_->label, size(), bytes, tag);
    }

    Transport* tp_ = nullptr;
    std::shared_ptr<detail::GroupState> gs_;
    int my_index_ = 0;
    int world_rank_ = 0;
};

struct WorldOptions {
    std::chrono::milliseconds timeout{10000};
};

/// Launches p rank threads, each running fn with its world communicator.
/// Joins all ranks, then rethrows the most informative rank error (a root
/// cause wins over the DeadlockErrors it triggers in peers). Returns the
/// per-rank counters.
std::vector<CommCounters> run_world(int p, const std::function<void(Comm&)>& fn, WorldOptions opt = {});

} // namespace slap
