#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pimorch/errors.hpp"
#include "pimorch/ilp.hpp"
#include "support.hpp"

using namespace pimorch;

TEST_SUITE("solver") {

TEST_CASE("solve equals exhaustive enumeration on random tiny instances") {
    std::mt19937 rng(7);
    int feasible = 0;
    for (int trial = 0; trial < 150; ++trial) {
        auto t = testing::random_tiny(rng);
        auto oracle = testing::brute_force(t.inst);
        if (!oracle.best) {
            CHECK_THROWS_AS(solve(t.inst), InfeasibleError);
            continue;
        }
        ++feasible;
        auto s = solve(t.inst);
        CHECK(s.objective == *oracle.best);
        CHECK(s.status == SolveStatus::optimal);
        CHECK(check_schedule(t.inst, s).ok());
    }
    CHECK(feasible > 15);
}

TEST_CASE("infeasible memory names Constraint 5") {
    auto inst = build_ilp(testing::fixture_model("swin_t_224"), testing::small_arch(16, 16, 1024, 8), {});
    try {
        solve(inst);
        FAIL("expected infeasibility");
    } catch (const InfeasibleError& e) {
        CHECK(e.constraint() == "Constraint 5");
    }
}

TEST_CASE("fixture schedules pass every constraint") {
    for (const auto& name : testing::fixture_names()) {
        auto inst = build_ilp(testing::fixture_model(name), testing::fixture_arch(), {});
        auto s = solve(inst);
        CHECK_MESSAGE(check_schedule(inst, s).ok(), name);
        CHECK(s.status == SolveStatus::optimal);
        for (const auto& st : s.stages) {
            for (std::size_t j = 1; j < st.layers.size(); ++j) {
                CHECK(st.layers[j].choice.count <= st.layers[j - 1].choice.count);
            }
        }
    }
}

TEST_CASE("thread count does not change the answer") {
    auto m = testing::fixture_model("swin_b_640");
    SchedulerOptions one;
    one.threads = 1;
    SchedulerOptions many;
    many.threads = 4;
    auto a = solve(build_ilp(m, testing::fixture_arch(), one));
    auto b = solve(build_ilp(m, testing::fixture_arch(), many));
    CHECK(a.choices() == b.choices());
    CHECK(a.objective == b.objective);
}

TEST_CASE("relaxing capacity never increases the optimum") {
    auto m = testing::fixture_model("swin_s_640");
    std::int64_t prev = std::numeric_limits<std::int64_t>::max();
    for (double mib : {5.0, 6.0, 8.0, 12.0, 32.0}) {
        auto arch = testing::fixture_arch();
        arch.node_cap = static_cast<std::int64_t>(mib * 1024 * 1024);
        try {
            auto s = solve(build_ilp(m, arch, {}));
            CHECK(s.objective <= prev);
            prev = s.objective;
        } catch (const InfeasibleError&) {
            CHECK(prev == std::numeric_limits<std::int64_t>::max());
        }
    }
}

TEST_CASE("disabling reuse or sharing never lowers memory") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        auto t = testing::random_tiny(rng);
        t.inst.arch.node_cap = std::int64_t{1} << 40;
        auto base = t.inst.options;
        base.reuse = true;
        base.sharing = true;
        auto both = build_ilp(t.inst.model, t.inst.arch, base, [&] {
            std::vector<Domains> d;
            for (const auto& st : t.inst.stages) d.push_back(st.domains);
            return d;
        }());
        auto s = solve(both);
        auto with_opts = [&](bool reuse, bool sharing) {
            auto o = base;
            o.reuse = reuse;
            o.sharing = sharing;
            std::vector<Domains> d;
            for (const auto& st : both.stages) d.push_back(st.domains);
            return evaluate_schedule(build_ilp(both.model, both.arch, o, d), s.choices()).memory.weights;
        };
        const double ref = with_opts(true, true);
        CHECK(with_opts(false, true) >= ref);
        CHECK(with_opts(true, false) >= ref);
        CHECK(with_opts(false, false) >= with_opts(false, true));
    }
}

TEST_CASE("time limit returns a valid plan with a gap") {
    SchedulerOptions o;
    o.time_limit_s = 0.0;
    auto arch = testing::fixture_arch();
    arch.node_cap = 5 * 1024 * 1024;
    auto inst = build_ilp(testing::fixture_model("swin_b_640"), arch, o);
    try {
        auto s = solve(inst);
        CHECK(check_schedule(inst, s).ok());
        if (s.status == SolveStatus::time_limit) {
            CHECK(s.gap >= 0);
            CHECK(s.lower_bound <= s.objective);
        }
    } catch (const InfeasibleError&) {
        // acceptable only if no plan was found before the deadline
    }
}

}
