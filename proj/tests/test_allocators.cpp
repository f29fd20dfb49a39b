#include <doctest.h>

#include <set>

#include "core/alloc.hpp"
#include "core/rng.hpp"
#include "oracles.hpp"

using namespace swarm;
using Eigen::MatrixXd;

namespace {

double total_cost(const MatrixXd& cost, const alloc::Assignment& pairs) {
    double t = 0.0;
    for (const auto& [i, j] : pairs) t += cost(i, j);
    return t;
}

MatrixXd random_matrix(int n, int m, Rng& rng, bool integral) {
    MatrixXd c(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            c(i, j) = integral ? static_cast<double>(rng.uniform_int(0, 100)) : rng.uniform(0.0, 10.0);
    return c;
}

}  // namespace

TEST_CASE("resolve_conflicts: min-cost requester wins, losers recorded") {
    MatrixXd costs(3, 4);
    costs.setConstant(0.9);
    costs(1, 3) = 0.2;
    costs(2, 3) = 0.5;
    const std::vector<int> requests = {0, 4, 4};  // agents 1 and 2 contest slot 3
    const std::vector<std::uint8_t> eligible = {1, 1, 1};
    const std::vector<std::uint8_t> waiting = {1, 1, 1, 1};
    const auto out = alloc::resolve_conflicts(requests, costs, eligible, waiting);
    REQUIRE(out.assignments.size() == 1);
    CHECK(out.assignments[0] == std::pair<int, int>{1, 3});
    REQUIRE(out.conflicts.size() == 1);
    CHECK(out.conflicts[0].slot == 3);
    CHECK(out.conflicts[0].winner == 1);
    CHECK(out.conflicts[0].losers == std::vector<int>{2});
    CHECK(out.idle_agents == std::vector<int>{0});
    CHECK_FALSE(out.conflict_free());
}

TEST_CASE("resolve_conflicts: equal costs break to the lower id") {
    MatrixXd costs(2, 1);
    costs(0, 0) = 0.2;
    costs(1, 0) = 0.2;
    const std::vector<int> requests = {1, 1};
    const std::vector<std::uint8_t> eligible = {1, 1};
    const std::vector<std::uint8_t> waiting = {1};
    const auto out = alloc::resolve_conflicts(requests, costs, eligible, waiting);
    REQUIRE(out.assignments.size() == 1);
    CHECK(out.assignments[0].first == 0);
}

TEST_CASE("resolve_conflicts: disjoint requests all succeed") {
    MatrixXd costs = MatrixXd::Zero(3, 3);
    const std::vector<int> requests = {1, 2, 3};
    const std::vector<std::uint8_t> eligible = {1, 1, 1};
    const std::vector<std::uint8_t> waiting = {1, 1, 1};
    const auto out = alloc::resolve_conflicts(requests, costs, eligible, waiting);
    CHECK(out.assignments.size() == 3);
    CHECK(out.conflicts.empty());
    CHECK(out.conflict_free());
}

TEST_CASE("resolve_conflicts: non-waiting targets and ineligible requesters never win") {
    MatrixXd costs = MatrixXd::Zero(2, 2);
    const std::vector<int> requests = {1, 2};
    const std::vector<std::uint8_t> eligible = {1, 0};  // agent 1 already assigned
    const std::vector<std::uint8_t> waiting = {0, 1};   // slot 0 not waiting
    const auto out = alloc::resolve_conflicts(requests, costs, eligible, waiting);
    CHECK(out.assignments.empty());
    REQUIRE(out.invalid_requests.size() == 1);
    CHECK(out.invalid_requests[0] == std::pair<int, int>{0, 0});
    REQUIRE(out.ineligible_requests.size() == 1);
    CHECK(out.ineligible_requests[0] == std::pair<int, int>{1, 1});
}

TEST_CASE("resolve_conflicts: one-to-one and min-cost winner on random patterns") {
    Rng rng(31);
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = rng.uniform_int(1, 8);
        const int m = rng.uniform_int(1, 6);
        MatrixXd costs(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) costs(i, j) = rng.uniform(-1.0, 1.0);
        std::vector<int> requests(static_cast<std::size_t>(n));
        std::vector<std::uint8_t> eligible(static_cast<std::size_t>(n));
        std::vector<std::uint8_t> waiting(static_cast<std::size_t>(m));
        for (auto& r : requests) r = rng.uniform_int(0, m);
        for (auto& e : eligible) e = static_cast<std::uint8_t>(rng.uniform_int(0, 4) > 0);
        for (auto& w : waiting) w = static_cast<std::uint8_t>(rng.uniform_int(0, 4) > 0);
        const auto out = alloc::resolve_conflicts(requests, costs, eligible, waiting);

        std::set<int> agents_seen, slots_seen;
        for (const auto& [a, s] : out.assignments) {
            CHECK(agents_seen.insert(a).second);
            CHECK(slots_seen.insert(s).second);
            CHECK(requests[static_cast<std::size_t>(a)] == s + 1);
            CHECK(eligible[static_cast<std::size_t>(a)]);
            CHECK(waiting[static_cast<std::size_t>(s)]);
            // winner must be the cheapest eligible requester (ties to low id)
            for (int b = 0; b < n; ++b) {
                if (requests[static_cast<std::size_t>(b)] != s + 1 || !eligible[static_cast<std::size_t>(b)])
                    continue;
                if (b == a) continue;
                const bool loses = costs(b, s) > costs(a, s) ||
                                   (costs(b, s) == costs(a, s) && b > a);
                CHECK(loses);
            }
        }
        // winners + losers cover all eligible requesters of contested slots
        for (const auto& c : out.conflicts) {
            int requesters = 0;
            for (int b = 0; b < n; ++b)
                if (requests[static_cast<std::size_t>(b)] == c.slot + 1 && eligible[static_cast<std::size_t>(b)] &&
                    waiting[static_cast<std::size_t>(c.slot)])
                    ++requesters;
            CHECK(static_cast<int>(c.losers.size()) + 1 == requesters);
        }
    }
}

TEST_CASE("hungarian: frozen small cases") {
    MatrixXd a(2, 2);
    a << 0, 1, 1, 0;
    auto pairs = alloc::hungarian(a);
    CHECK(total_cost(a, pairs) == 0.0);
    CHECK(pairs == alloc::Assignment{{0, 0}, {1, 1}});

    MatrixXd b(2, 2);
    b << 4, 1, 2, 3;
    pairs = alloc::hungarian(b);
    CHECK(total_cost(b, pairs) == 3.0);
    CHECK(pairs == alloc::Assignment{{0, 1}, {1, 0}});
}

TEST_CASE("hungarian: equals exhaustive-permutation oracle") {
    Rng rng(8);
    for (int trial = 0; trial < 500; ++trial) {
        const auto c = random_matrix(5, 5, rng, true);
        const auto pairs = alloc::hungarian(c);
        CHECK(pairs.size() == 5);
        CHECK(total_cost(c, pairs) == oracles::brute_min_assignment(c));
    }
    // Real-valued and rectangular shapes against the same oracle.
    for (int trial = 0; trial < 200; ++trial) {
        const int n = rng.uniform_int(1, 6);
        const int m = rng.uniform_int(1, 6);
        const auto c = random_matrix(n, m, rng, false);
        const auto pairs = alloc::hungarian(c);
        CHECK(static_cast<int>(pairs.size()) == std::min(n, m));
        CHECK(total_cost(c, pairs) == doctest::Approx(oracles::brute_min_assignment(c)).epsilon(1e-9));
    }
}

TEST_CASE("hungarian: scale invariance of the argmin assignment") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const auto c = random_matrix(4, 4, rng, true);
        // Perturb to make the optimum unique almost surely.
        MatrixXd cj = c;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) cj(i, j) += rng.uniform(0.0, 1e-3);
        const auto base = alloc::hungarian(cj);
        const auto scaled = alloc::hungarian((cj * 37.5).eval());
        CHECK(base == scaled);
    }
}

TEST_CASE("greedy: picks global minima; never beats hungarian") {
    MatrixXd trap(2, 2);
    trap << 1, 2, 1, 100;
    const auto g = alloc::greedy_assign(trap);
    CHECK(g == alloc::Assignment{{0, 0}, {1, 1}});
    CHECK(total_cost(trap, g) == 101.0);
    CHECK(total_cost(trap, alloc::hungarian(trap)) == 3.0);

    MatrixXd diag(3, 3);
    diag << 1, 50, 50, 50, 2, 50, 50, 50, 3;
    CHECK(total_cost(diag, alloc::greedy_assign(diag)) == total_cost(diag, alloc::hungarian(diag)));

    Rng rng(15);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = rng.uniform_int(1, 6);
        const int m = rng.uniform_int(1, 6);
        const auto c = random_matrix(n, m, rng, false);
        CHECK(total_cost(c, alloc::greedy_assign(c)) >=
              total_cost(c, alloc::hungarian(c)) - 1e-9);
    }
}

TEST_CASE("random_assign: valid uniform matchings") {
    Rng rng(5);
    auto only = alloc::random_assign(1, 1, rng);
    CHECK(only == alloc::Assignment{{0, 0}});

    // 2x2: the two perfect matchings should appear ~50/50 (3 sigma of 10k).
    int identity = 0;
    for (int k = 0; k < 10000; ++k) {
        const auto p = alloc::random_assign(2, 2, rng);
        REQUIRE(p.size() == 2);
        if (p[0].second == 0) ++identity;
    }
    const double freq = identity / 10000.0;
    CHECK(freq > 0.485);
    CHECK(freq < 0.515);

    for (int trial = 0; trial < 200; ++trial) {
        const int n = rng.uniform_int(1, 7);
        const int m = rng.uniform_int(1, 7);
        const auto p = alloc::random_assign(n, m, rng);
        CHECK(static_cast<int>(p.size()) == std::min(n, m));
        std::set<int> as, ts;
        for (const auto& [a, t] : p) {
            CHECK(as.insert(a).second);
            CHECK(ts.insert(t).second);
        }
    }
}

TEST_CASE("random_assign: expected total dominates hungarian") {
    Rng rng(6);
    const auto c = random_matrix(4, 4, rng, false);
    const double opt = total_cost(c, alloc::hungarian(c));
    double sum = 0.0;
    const int draws = 2000;
    for (int k = 0; k < draws; ++k) sum += total_cost(c, alloc::random_assign(4, 4, rng));
    CHECK(sum / draws >= opt);
}
