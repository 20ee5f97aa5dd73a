#include "slap/comm.hpp"

#include <algorithm>
#include <sstream>

namespace slap {

const char* to_string(Coll k) {
    switch (k) {
    case Coll::broadcast: return "broadcast";
    case Coll::alltoallv: return "alltoallv";
    case Coll::reduce: return "reduce";
    case Coll::allgatherv: return "allgatherv";
    case Coll::exscan: return "exscan";
    case Coll::barrier: return "barrier";
    }
    return "?";
}

const char* to_string(GroupLabel l) {
    switch (l) {
    case GroupLabel::world: return "world";
    case GroupLabel::grid_row: return "row";
    case GroupLabel::grid_col: return "col";
    case GroupLabel::layer: return "layer";
    case GroupLabel::fiber: return "fiber";
    case GroupLabel::other: return "other";
    }
    return "?";
}

const char* to_string(PayloadTag t) {
    switch (t) {
    case PayloadTag::generic: return "generic";
    case PayloadTag::sparse_matrix: return "sparse_matrix";
    case PayloadTag::dense_matrix: return "dense_matrix";
    case PayloadTag::vector_data: return "vector_data";
    case PayloadTag::label_data: return "label_data";
    }
    return "?";
}

void CommCounters::record(Coll k, GroupLabel l, int group_size, std::int64_t bytes_sent, PayloadTag tag) {
    auto& a = by_kind[k];
    a.calls += 1;
    a.bytes += bytes_sent;
    auto& b = by_kind_label[{k, l}];
    b.calls += 1;
    b.bytes += bytes_sent;
    auto& c = by_kind_groupsize[{k, group_size}];
    c.calls += 1;
    c.bytes += bytes_sent;
    bytes_by_tag[tag] += bytes_sent;
}

void CommCounters::merge(const CommCounters& o) {
    for (const auto& [k, e] : o.by_kind) {
        by_kind[k].calls += e.calls;
        by_kind[k].bytes += e.bytes;
    }
    for (const auto& [k, e] : o.by_kind_label) {
        by_kind_label[k].calls += e.calls;
        by_kind_label[k].bytes += e.bytes;
    }
    for (const auto& [k, e] : o.by_kind_groupsize) {
        by_kind_groupsize[k].calls += e.calls;
        by_kind_groupsize[k].bytes += e.bytes;
    }
    for (const auto& [t, b] : o.bytes_by_tag) bytes_by_tag[t] += b;
}

CommCounters::Entry CommCounters::kind(Coll k) const {
    auto it = by_kind.find(k);
    return it == by_kind.end() ? Entry{} : it->second;
}

CommCounters::Entry CommCounters::kind_label(Coll k, GroupLabel l) const {
    auto it = by_kind_label.find({k, l});
    return it == by_kind_label.end() ? Entry{} : it->second;
}

CommCounters::Entry CommCounters::kind_groupsize(Coll k, int gs) const {
    auto it = by_kind_groupsize.find({k, gs});
    return it == by_kind_groupsize.end() ? Entry{} : it->second;
}

std::int64_t CommCounters::tag_bytes(PayloadTag t) const {
    auto it = bytes_by_tag.find(t);
    return it == bytes_by_tag.end() ? 0 : it->second;
}

std::int64_t CommCounters::total_bytes() const {
    std::int64_t s = 0;
    for (const auto& [k, e] : by_kind) s += e.bytes;
    return s;
}

std::int64_t CommCounters::total_calls() const {
    std::int64_t s = 0;
    for (const auto& [k, e] : by_kind) s += e.calls;
    return s;
}

std::string CommCounters::to_text() const {
    std::ostringstream os;
    for (const auto& [key, e] : by_kind_label)
        os << to_string(key.first) << " " << to_string(key.second) << " calls=" << e.calls
           << " bytes=" << e.bytes << "\n";
    return os.str();
}

Transport::Transport(int world_size, std::chrono::milliseconds timeout)
    : world_size_(world_size), timeout_(timeout), counters_(static_cast<std::size_t>(world_size)) {}

std::shared_ptr<detail::GroupState> Transport::group(const std::vector<int>& members, GroupLabel label) {
    std::lock_guard<std::mutex> lk(registry_mu_);
    auto key = std::make_pair(label, members);
    auto it = registry_.find(key);
    if (it != registry_.end()) return it->second;
    auto gs = std::make_shared<detail::GroupState>();
    gs->tp = this;
    gs->members = members;
    gs->label = label;
    registry_.emplace(std::move(key), gs);
    return registry_[std::make_pair(label, members)];
}

void Transport::abort() noexcept {
    aborted_.store(true, std::memory_order_release);
    // lockless notify; waiters also poll the flag in short wait slices
    std::lock_guard<std::mutex> lk(registry_mu_);
    for (auto& [key, gs] : registry_) gs->cv.notify_all();
}

std::vector<CommCounters> run_world(int p, const std::function<void(Comm&)>& fn, WorldOptions opt) {
    if (p < 1) throw ShapeError("world size must be >= 1");
    Transport tp(p, opt.timeout);
    std::vector<int> all(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) all[static_cast<std::size_t>(i)] = i;
    auto world_group = tp.group(all, GroupLabel::world);

    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(p));
    auto body = [&](int rank) {
        try {
            Comm c(&tp, world_group, rank, rank);
            fn(c);
        } catch (...) {
            errs[static_cast<std::size_t>(rank)] = std::current_exception();
            tp.abort(); // unwind peers blocked in collectives
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) threads.emplace_back(body, r);
    for (auto& t : threads) t.join();

    // prefer the root cause over the deadlock fallout it produced
    std::exception_ptr deadlock;
    for (auto& e : errs) {
        if (!e) continue;
        try {
            std::rethrow_exception(e);
        } catch (const DeadlockError&) {
            if (!deadlock) deadlock = e;
        } catch (...) {
            std::rethrow_exception(e);
        }
    }
    if (deadlock) std::rethrow_exception(deadlock);

    std::vector<CommCounters> out;
    out.reserve(static_cast<std::size_t>(p));
    for (int r = 0; r < p; ++r) out.push_back(tp.counters(r));
    return out;
}

} // namespace slap
