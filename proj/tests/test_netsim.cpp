#include "hmmpc/error.hpp"
#include "hmmpc/netsim/channel.hpp"
#include "hmmpc/netsim/delay_source.hpp"
#include "hmmpc/netsim/trace_io.hpp"
#include "hmmpc/schmm/sampling.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <deque>
#include <filesystem>
#include <set>
#include <sstream>

using namespace hmmpc;
using namespace hmmpc::netsim;

namespace {

PacketFrame frame(int sender, long step) {
    PacketFrame f;
    f.sender = sender;
    f.send_step = step;
    f.state = Eigen::VectorXd::Constant(2, static_cast<double>(step));
    return f;
}

/// Hands out a fixed list of delays, link by link.
class Scripted : public LinkDelayProcess {
public:
    explicit Scripted(std::deque<double> d) : d_(std::move(d)) {}
    double next() override {
        const double v = d_.front();
        d_.pop_front();
        return v;
    }

private:
    std::deque<double> d_;
};

DelaySource scripted(std::deque<double> delays) {
    return [delays](int, int) { return std::make_unique<Scripted>(delays); };
}

}  // namespace

TEST(TraceIo, ParsesSamplesAndDropouts) {
    const auto t = parse_trace("46.0\n100000\n58.2");
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t.samples[0], 46.0);
    EXPECT_TRUE(t.is_dropout(1));
    EXPECT_EQ(t.samples[2], 58.2);
}

TEST(TraceIo, SkipsCommentsAndBlankLines) {
    const auto t = parse_trace("# header\n\n  47.5 \n# more\n50\n");
    EXPECT_EQ(t.samples, (std::vector<double>{47.5, 50.0}));
}

TEST(TraceIo, MalformedLineNamesTheLine) {
    try {
        parse_trace("46\n47\nfoo\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(parse_trace("46\n-3\n"), ParseError);
    EXPECT_THROW(parse_trace("46 47\n"), ParseError);
}

TEST(TraceIo, RoundTripIsIdentity) {
    const auto t = schmm::sample_trace(schmm::reference_model(), 2000, 3);
    const auto back = parse_trace(format_trace(t));
    EXPECT_EQ(back.samples, t.samples);
    EXPECT_NE(format_trace(t).find("\n100000\n"), std::string::npos);

    const auto path = std::filesystem::temp_directory_path() / "hmmpc_trace_test.trace";
    save_trace(t, path);
    EXPECT_EQ(load_trace(path).samples, t.samples);
    std::filesystem::remove(path);
}

TEST(TraceIo, TenThousandLinesParseQuickly) {
    const auto text = format_trace(schmm::sample_trace(schmm::reference_model(), 10000, 1));
    const auto start = std::chrono::steady_clock::now();
    const auto t = parse_trace(text);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_EQ(t.size(), 10000u);
    EXPECT_LT(seconds, 1.0);
}

TEST(TraceIo, NumberFormatIsShortestRoundTrip) {
    EXPECT_EQ(format_number(100000.0), "100000");
    EXPECT_EQ(format_number(46.0), "46");
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Channel, DeliveryStepArithmetic) {
    const auto g = topology::path_graph(2);
    Channel ch(g, constant_delay(10.0), 10.0);
    EXPECT_EQ(ch.delay_steps(10.0), 1);
    EXPECT_EQ(ch.delay_steps(55.0), 6);
    EXPECT_EQ(ch.delay_steps(0.0), 1);
    EXPECT_EQ(ch.delay_steps(3.0), 1);
}

TEST(Channel, ConstantDelayArrivesNextStep) {
    const auto g = topology::path_graph(2);
    Channel ch(g, constant_delay(10.0), 10.0);
    ch.send(frame(0, 4), 1);
    EXPECT_TRUE(ch.deliver(4, 1).empty());
    const auto got = ch.deliver(5, 1);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0].send_step, 4);
    EXPECT_TRUE(ch.deliver(6, 1).empty());
}

TEST(Channel, ZeroDelayStillTakesOneStep) {
    const auto g = topology::path_graph(2);
    Channel ch(g, constant_delay(0.0), 10.0);
    ch.send(frame(0, 0), 1);
    EXPECT_TRUE(ch.deliver(0, 1).empty());
    EXPECT_EQ(ch.deliver(1, 1).size(), 1u);
}

TEST(Channel, MaskDropsTheFrame) {
    const auto g = topology::path_graph(2);
    Channel ch(g, constant_delay(schmm::kDefaultMask), 10.0);
    ch.send(frame(0, 0), 1);
    EXPECT_EQ(ch.stats(0, 1).dropped, 1);
    EXPECT_EQ(ch.in_flight(), 0);
    EXPECT_TRUE(ch.log().front().dropped);
    for (long k = 0; k < 20; ++k) EXPECT_TRUE(ch.deliver(k, 1).empty());
}

TEST(Channel, UnknownLinkIsRejected) {
    const auto g = topology::path_graph(3);
    Channel ch(g, constant_delay(10.0), 10.0);
    EXPECT_THROW(ch.send(frame(0, 0), 2), DomainError);
    EXPECT_THROW(ch.send(frame(0, 0), 0), DomainError);
}

TEST(Channel, SameStepArrivalsOrderedBySendStepThenSender) {
    const auto g = topology::complete_graph(3);
    Channel ch(g, scripted({30.0, 10.0}), 10.0);
    ch.send(frame(1, 0), 0);   // arrives at 3
    ch.send(frame(2, 0), 0);   // arrives at 3
    ch.send(frame(1, 2), 0);   // arrives at 3 (second draw on link 1->0)
    const auto got = ch.deliver(3, 0);
    ASSERT_EQ(got.size(), 3u);
    EXPECT_EQ(std::make_pair(got[0].send_step, got[0].sender), std::make_pair(0L, 1));
    EXPECT_EQ(std::make_pair(got[1].send_step, got[1].sender), std::make_pair(0L, 2));
    EXPECT_EQ(std::make_pair(got[2].send_step, got[2].sender), std::make_pair(2L, 1));
}

TEST(Channel, OvertakingFramesAreBothDelivered) {
    const auto g = topology::path_graph(2);
    Channel ch(g, scripted({50.0, 10.0}), 10.0);
    ch.send(frame(0, 0), 1);   // due at 5
    ch.send(frame(0, 1), 1);   // due at 2
    const auto early = ch.deliver(2, 1);
    ASSERT_EQ(early.size(), 1u);
    EXPECT_EQ(early[0].send_step, 1);
    const auto late = ch.deliver(5, 1);
    ASSERT_EQ(late.size(), 1u);
    EXPECT_EQ(late[0].send_step, 0);
}

TEST(Channel, EmptyQueueDeliversNothing) {
    const auto g = topology::path_graph(2);
    Channel ch(g, constant_delay(10.0), 10.0);
    EXPECT_TRUE(ch.deliver(0, 0).empty());
}

TEST(Channel, ConservationAndDeterminism) {
    const auto g = topology::ring_graph(5);
    auto run = [&](std::uint64_t seed) {
        Channel ch(g, model_sampler(schmm::reference_model(), seed), 10.0);
        std::vector<long> schedule;
        for (long k = 0; k < 300; ++k) {
            for (int r = 0; r < 5; ++r)
                for (const auto& f : ch.deliver(k, r)) schedule.push_back(k * 1000 + f.send_step * 10 + f.sender);
            for (int s = 0; s < 5; ++s)
                for (int r : g.neighbors(s)) ch.send(frame(s, k), r);
            const auto t = ch.totals();
            EXPECT_EQ(t.sent, t.delivered + t.dropped + ch.in_flight());
            for (const auto& [s, r] : ch.links()) {
                const auto& st = ch.stats(s, r);
                EXPECT_EQ(st.sent, st.delivered + st.dropped + ch.in_flight(s, r));
            }
        }
        return schedule;
    };
    EXPECT_EQ(run(7), run(7));
    EXPECT_NE(run(7), run(8));
}

TEST(Channel, StatsCsvRows) {
    const auto g = topology::path_graph(2);
    Channel ch(g, constant_delay(10.0), 10.0);
    ch.send(frame(0, 0), 1);
    std::ostringstream os;
    ch.write_stats(os, 0);
    EXPECT_EQ(os.str(), "0,0->1,1,0,0\n0,1->0,0,0,0\n");
}

TEST(DelaySources, LinkSeedsDiffer) {
    std::set<std::uint64_t> seeds;
    for (int s = 0; s < 6; ++s)
        for (int r = 0; r < 6; ++r)
            if (s != r) seeds.insert(link_seed(1, s, r));
    EXPECT_EQ(seeds.size(), 30u);
    EXPECT_EQ(link_seed(1, 2, 3), link_seed(1, 2, 3));
    EXPECT_NE(link_seed(1, 2, 3), link_seed(2, 2, 3));
}

TEST(DelaySources, TraceReplayCyclesThroughTheTrace) {
    schmm::DelayTrace t;
    t.samples = {41.0, 42.0, 43.0};
    auto p = trace_replay(t, 5)(0, 1);
    std::vector<double> seen;
    for (int i = 0; i < 6; ++i) seen.push_back(p->next());
    for (int i = 0; i < 3; ++i) EXPECT_EQ(seen[static_cast<std::size_t>(i)], seen[static_cast<std::size_t>(i + 3)]);
    std::sort(seen.begin(), seen.begin() + 3);
    EXPECT_EQ(std::vector<double>(seen.begin(), seen.begin() + 3), t.samples);
}
