#include "vanet/confirmation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "test_support.hpp"

namespace vanet {
namespace {

using testing::confidence_oracle;
using testing::has_cycle_dfs;
using testing::ref_of;

TEST(ConfidenceWeight, Values) {
    EXPECT_DOUBLE_EQ(confidence_weight(ConfidenceFunction::Harmonic, 1), 0.5);
    EXPECT_DOUBLE_EQ(confidence_weight(ConfidenceFunction::Harmonic, 3), 0.25);
    EXPECT_DOUBLE_EQ(confidence_weight(ConfidenceFunction::Geometric, 1), 0.5);
    EXPECT_DOUBLE_EQ(confidence_weight(ConfidenceFunction::Geometric, 3), 0.125);
}

TEST(ConfirmationGraph, ConfirmingAConfirmationBackToItsSenderIsACycle) {
    // A sends m; B confirms m; A then confirms B's confirmation.
    const auto m = ref_of('A', 1);
    ConfirmationGraph g(m);
    const auto b_conf = ref_of('B', 1);
    ASSERT_TRUE(g.record_confirmation(b_conf, m).accepted());
    const auto edges_before = g.edges();
    const auto confs_before = g.confirmations().size();
    const double conf_before = g.confidence(ConfidenceFunction::Harmonic);

    EXPECT_EQ(g.record_confirmation(ref_of('A', 2), b_conf).status, RecordStatus::RejectedCycle);
    EXPECT_EQ(g.edges(), edges_before);
    EXPECT_EQ(g.confirmations().size(), confs_before);
    EXPECT_EQ(g.confidence(ConfidenceFunction::Harmonic), conf_before);
    EXPECT_FALSE(g.contains(ref_of('A', 2)));
}

TEST(ConfirmationGraph, SelfConfirmationIsACycle) {
    const auto m = ref_of('A', 1);
    ConfirmationGraph g(m);
    EXPECT_EQ(g.record_confirmation(ref_of('A', 2), m).status, RecordStatus::RejectedCycle);
    EXPECT_EQ(g.edge_count(), 0u);
}

TEST(ConfirmationGraph, LongerCycleRejected) {
    const auto m = ref_of('A', 1);
    ConfirmationGraph g(m);
    ASSERT_TRUE(g.record_confirmation(ref_of('B', 1), m).accepted());
    ASSERT_TRUE(g.record_confirmation(ref_of('C', 1), ref_of('B', 1)).accepted());
    EXPECT_EQ(g.record_confirmation(ref_of('B', 2), ref_of('C', 1)).status, RecordStatus::RejectedCycle);
    EXPECT_EQ(g.record_confirmation(ref_of('A', 2), ref_of('C', 1)).status, RecordStatus::RejectedCycle);
    EXPECT_TRUE(g.record_confirmation(ref_of('D', 1), ref_of('C', 1)).accepted());
}

TEST(ConfirmationGraph, UnknownDuplicateAndDepthCap) {
    const auto m = ref_of('A', 1);
    ConfirmationGraph g(m, 2);
    EXPECT_EQ(g.record_confirmation(ref_of('B', 1), ref_of('Z', 9)).status, RecordStatus::RejectedUnknownTarget);
    ASSERT_TRUE(g.record_confirmation(ref_of('B', 1), m).accepted());
    EXPECT_EQ(g.record_confirmation(ref_of('B', 1), m).status, RecordStatus::RejectedDuplicate);
    EXPECT_EQ(g.record_confirmation(ref_of('B', 2), m).status, RecordStatus::RejectedDuplicate);  // same edge
    const auto c = g.record_confirmation(ref_of('C', 1), ref_of('B', 1));
    ASSERT_TRUE(c.accepted());
    EXPECT_EQ(c.depth, 2u);
    EXPECT_EQ(g.record_confirmation(ref_of('D', 1), ref_of('C', 1)).status, RecordStatus::RejectedDepthCap);
    EXPECT_EQ(g.depth(ref_of('C', 1)), 2u);
    EXPECT_EQ(g.target_of(ref_of('C', 1)), ref_of('B', 1));
    EXPECT_EQ(g.target_of(m), std::nullopt);
    EXPECT_THROW(g.depth(ref_of('Q', 1)), std::out_of_range);
}

TEST(ConfirmationGraph, AcceptanceThresholdByDepthSet) {
    const auto m = ref_of('A', 1);
    const AcceptancePolicy policy{1.0, std::nullopt};
    auto build = [&](std::vector<unsigned> depths) {
        ConfirmationGraph g(m);
        // a chain B1 <- C1 <- D1 provides targets at depth 1, 2, 3
        std::uint8_t next = 'a';
        std::map<unsigned, PacketRef> at_depth{{0, m}};
        for (unsigned d : depths) {
            const auto conf = ref_of(next++, 1);
            const auto target = at_depth.at(d - 1);
            EXPECT_TRUE(g.record_confirmation(conf, target).accepted());
            at_depth.emplace(d, conf);
        }
        return g;
    };
    EXPECT_FALSE(build({1}).is_accepted(ConfidenceFunction::Harmonic, policy));
    EXPECT_TRUE(build({1, 1}).is_accepted(ConfidenceFunction::Harmonic, policy));
    EXPECT_FALSE(build({1, 2}).is_accepted(ConfidenceFunction::Harmonic, policy));
    EXPECT_TRUE(build({1, 2, 3}).is_accepted(ConfidenceFunction::Harmonic, policy));
}

TEST(ConfirmationGraph, ThreeThirdsMeetThreshold) {
    const auto m = ref_of('A', 1);
    ConfirmationGraph g(m);
    ASSERT_TRUE(g.record_confirmation(ref_of('B', 1), m).accepted());
    ASSERT_TRUE(g.record_confirmation(ref_of('C', 1), ref_of('B', 1), false).accepted());
    for (std::uint8_t s : {'D', 'E', 'F'}) ASSERT_TRUE(g.record_confirmation(ref_of(s, 1), ref_of('B', 1)).accepted());
    // 0.5 (depth 1) + 3 x 1/3 (depth 2); the structural one does not count
    EXPECT_NEAR(g.confidence(ConfidenceFunction::Harmonic), 1.5, 1e-15);
    ConfirmationGraph h(m);
    ASSERT_TRUE(h.record_confirmation(ref_of('B', 1), m, false).accepted());
    for (std::uint8_t s : {'D', 'E', 'F'}) ASSERT_TRUE(h.record_confirmation(ref_of(s, 1), ref_of('B', 1)).accepted());
    EXPECT_TRUE(h.is_accepted(ConfidenceFunction::Harmonic, {1.0, std::nullopt}));
}

// Random confirmation sequences over a handful of vehicles, checked against the DFS cycle
// oracle and a from-scratch confidence computation.
TEST(ConfirmationGraph, MatchesOraclesOnRandomGraphs) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t vehicles = 2 + rng() % 7;
        const auto m = ref_of(0, 0);
        ConfirmationGraph g(m);
        std::vector<PacketRef> packets{m};
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        std::uint32_t next_id = 1;
        const std::size_t attempts = 1 + rng() % 30;
        for (std::size_t a = 0; a < attempts && g.confirmations().size() < 12; ++a) {
            const auto confirmer = static_cast<std::uint8_t>(rng() % vehicles);
            const auto target = packets[rng() % packets.size()];
            const auto conf = ref_of(confirmer, next_id++);
            const std::size_t from = confirmer, to = target.sender.bytes[0];
            const bool dup_edge = std::find(edges.begin(), edges.end(), std::make_pair(from, to)) != edges.end();
            auto with = edges;
            with.emplace_back(from, to);
            const bool cycle = has_cycle_dfs(vehicles, with);

            const auto out = g.record_confirmation(conf, target, rng() % 4 != 0);
            if (dup_edge) {
                ASSERT_EQ(out.status, RecordStatus::RejectedDuplicate);
            } else if (cycle) {
                ASSERT_EQ(out.status, RecordStatus::RejectedCycle);
            } else {
                ASSERT_EQ(out.status, RecordStatus::Accepted);
                edges.push_back({from, to});
                packets.push_back(conf);
            }
            ASSERT_FALSE(has_cycle_dfs(vehicles, edges));
        }
        for (auto f : {ConfidenceFunction::Harmonic, ConfidenceFunction::Geometric}) {
            ASSERT_NEAR(g.confidence(f), confidence_oracle(g, f), 1e-12);
        }
    }
}

TEST(RecordStatus, Names) {
    EXPECT_STREQ(to_string(RecordStatus::RejectedCycle), "Cycle");
    EXPECT_STREQ(to_string(ConfidenceFunction::Geometric), "geometric");
}

}  // namespace
}  // namespace vanet
