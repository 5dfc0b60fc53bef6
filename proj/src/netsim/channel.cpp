#include "hmmpc/netsim/channel.hpp"

#include "hmmpc/error.hpp"

#include <algorithm>
#include <cmath>

namespace hmmpc::netsim {

Channel::Channel(const topology::Topology& topology, const DelaySource& source, double sample_period_ms, double mask)
    : sample_period_ms_(sample_period_ms), mask_(mask) {
    if (!(sample_period_ms > 0.0)) throw DomainError("sampling period must be positive");
    for (int s = 0; s < topology.n_agents(); ++s) {
        for (int r : topology.neighbors(s)) {
            processes_[{s, r}] = source(s, r);
            stats_[{s, r}] = LinkStats{};
        }
    }
}

long Channel::delay_steps(double delay_ms) const {
    return std::max(1L, static_cast<long>(std::ceil(delay_ms / sample_period_ms_)));
}

void Channel::send(const PacketFrame& frame, int receiver) {
    const auto link = std::make_pair(frame.sender, receiver);
    const auto it = processes_.find(link);
    if (it == processes_.end()) {
        throw DomainError("no link " + std::to_string(frame.sender) + " -> " + std::to_string(receiver));
    }

    SendRecord rec;
    rec.send_step = frame.send_step;
    rec.sender = frame.sender;
    rec.receiver = receiver;
    rec.delay_ms = it->second->next();
    LinkStats& st = stats_[link];
    ++st.sent;
    if (rec.delay_ms == mask_) {
        rec.dropped = true;
        ++st.dropped;
    } else {
        rec.deliver_step = frame.send_step + delay_steps(rec.delay_ms);
        queue_.insert_or_assign(Key{rec.deliver_step, receiver, frame.send_step, frame.sender}, frame);
    }
    log_.push_back(rec);
}

std::vector<PacketFrame> Channel::deliver(long step, int receiver) {
    std::vector<PacketFrame> out;
    for (auto it = queue_.begin(); it != queue_.end() && std::get<0>(it->first) <= step;) {
        if (std::get<1>(it->first) == receiver) {
            ++stats_[{std::get<3>(it->first), receiver}].delivered;
            out.push_back(std::move(it->second));
            it = queue_.erase(it);
        } else {
            ++it;
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const PacketFrame& a, const PacketFrame& b) {
        return std::tie(a.send_step, a.sender) < std::tie(b.send_step, b.sender);
    });
    return out;
}

long Channel::in_flight(int sender, int receiver) const {
    long n = 0;
    for (const auto& [key, frame] : queue_) {
        if (std::get<1>(key) == receiver && std::get<3>(key) == sender) ++n;
    }
    return n;
}

const LinkStats& Channel::stats(int sender, int receiver) const {
    const auto it = stats_.find({sender, receiver});
    if (it == stats_.end()) throw DomainError("no link " + std::to_string(sender) + " -> " + std::to_string(receiver));
    return it->second;
}

LinkStats Channel::totals() const {
    LinkStats t;
    for (const auto& [link, st] : stats_) {
        t.sent += st.sent;
        t.delivered += st.delivered;
        t.dropped += st.dropped;
    }
    return t;
}

std::vector<std::pair<int, int>> Channel::links() const {
    std::vector<std::pair<int, int>> out;
    for (const auto& [link, st] : stats_) out.push_back(link);
    return out;
}

void Channel::write_stats(std::ostream& out, long step) const {
    for (const auto& [link, st] : stats_) {
        out << step << ',' << link.first << "->" << link.second << ',' << st.sent << ',' << st.delivered << ','
            << st.dropped << '\n';
    }
}

}  // namespace hmmpc::netsim
