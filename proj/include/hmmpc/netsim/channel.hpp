#pragma once

#include "hmmpc/netsim/delay_source.hpp"
#include "hmmpc/topology/graph.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <ostream>
#include <tuple>
#include <vector>

namespace hmmpc::netsim {

/// What an agent broadcasts every step.
struct PacketFrame {
    int sender = 0;
    long send_step = 0;
    Eigen::VectorXd state;                       ///< sender state at send_step
    std::vector<Eigen::VectorXd> planned_inputs;  ///< inputs from send_step on
};

/// One draw of the channel, kept for telemetry.
struct SendRecord {
    long send_step = 0;
    int sender = 0;
    int receiver = 0;
    double delay_ms = 0.0;
    bool dropped = false;
    long deliver_step = -1;  ///< -1 when dropped
};

struct LinkStats {
    long sent = 0;
    long delivered = 0;
    long dropped = 0;
};

/**
 * @brief Packet queue with one independent delay process per directed link.
 *
 * A frame sent at step k with delay tau is delivered at
 * k + max(1, ceil(tau / T_s)); a delay equal to the mask drops it.
 */
class Channel {
public:
    Channel(const topology::Topology& topology, const DelaySource& source, double sample_period_ms,
            double mask = schmm::kDefaultMask);

    /// Throws DomainError when sender -> receiver is not an edge.
    void send(const PacketFrame& frame, int receiver);

    /// Frames for `receiver` due at or before `step`, ordered by (send_step, sender).
    std::vector<PacketFrame> deliver(long step, int receiver);

    /// Number of steps a delay occupies on the channel.
    long delay_steps(double delay_ms) const;

    long in_flight() const { return static_cast<long>(queue_.size()); }
    long in_flight(int sender, int receiver) const;
    const LinkStats& stats(int sender, int receiver) const;
    LinkStats totals() const;
    const std::vector<SendRecord>& log() const { return log_; }
    std::vector<std::pair<int, int>> links() const;

    /// Appends "step,link,sent,delivered,dropped" with cumulative counts for every link.
    void write_stats(std::ostream& out, long step) const;

private:
    using Key = std::tuple<long, int, long, int>;  // deliver_step, receiver, send_step, sender

    double sample_period_ms_;
    double mask_;
    std::map<std::pair<int, int>, std::unique_ptr<LinkDelayProcess>> processes_;
    std::map<std::pair<int, int>, LinkStats> stats_;
    std::map<Key, PacketFrame> queue_;
    std::vector<SendRecord> log_;
};

}  // namespace hmmpc::netsim
