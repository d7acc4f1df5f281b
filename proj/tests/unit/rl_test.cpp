#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "pdn/error.hpp"
#include "pdn/model.hpp"
#include "pdn/rl/env.hpp"
#include "pdn/rl/network.hpp"
#include "pdn/rl/ppo.hpp"
#include "pdn/rl/state.hpp"
#include "pdn/rl/train.hpp"
#include "support/fixtures.hpp"

using namespace pdn;
using namespace pdn::rl;

namespace {

StateTensor random_state(int channels, GridDims d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    StateTensor s(channels, d);
    for (double& v : s.data) v = u(rng);
    return s;
}

PolicyValueNet small_net(int channels, GridDims d, int sites, std::uint64_t seed) {
    NetworkConfig cfg;
    cfg.conv_channels = {3, 4};
    cfg.hidden = {6};
    PolicyValueNet net(channels, d, sites, cfg);
    net.initialize(seed);
    // Scale the policy head up so the logits are far from uniform.
    for (const auto& t : net.tensors()) {
        if (t.name.rfind("policy", 0) == 0) {
            net.params().segment(static_cast<Eigen::Index>(t.offset), static_cast<Eigen::Index>(t.size)) *= 100.0;
        }
    }
    return net;
}

Batch random_batch(const PolicyValueNet& net, int n, std::mt19937_64& rng, double log_ratio_spread) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Batch b;
    for (int i = 0; i < n; ++i) {
        b.states.push_back(random_state(net.in_channels(), net.canvas(), rng));
        const auto out = net.forward(b.states.back());
        b.actions.push_back(sample_action(out.logits, rng));
        b.old_log_probs.push_back(log_prob(out.logits, b.actions.back()) + log_ratio_spread * u(rng));
        b.returns.push_back(u(rng));
        b.advantages.push_back(u(rng));
    }
    return b;
}

std::vector<std::size_t> all_indices(const Batch& b) {
    std::vector<std::size_t> idx(b.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return idx;
}

Floorplan toy() { return test::toy_floorplan(); }

freq::TargetImpedanceSpec toy_target() {
    freq::TargetImpedanceSpec t;
    t.p_max = 5.0;
    return t;
}

}  // namespace

TEST_CASE("state: frequency encoding normalizes levels and copies space") {
    Floorplan fp = test::make_floorplan({3, 4}, {{0, 0}});
    fp.interposer_space(2, 3) = 0;
    Chiplet c = test::make_chiplet("c", {1, 1}, {2, 2});
    c.space(1, 0) = 0;
    fp.chiplets.push_back(c);

    DecapLayout l = DecapLayout::empty_for(fp);
    StateTensor s = encode_freq_state(fp, l);
    CHECK(s.channels == kFreqChannels);
    for (int r = 0; r < 3; ++r) {
        for (int col = 0; col < 4; ++col) {
            CHECK(s.at(kMimDist, r, col) == 0.0);
            CHECK(s.at(kMosDist, r, col) == 0.0);
        }
    }
    CHECK(s.at(kIntpSpace, 2, 3) == 0.0);
    CHECK(s.at(kIntpSpace, 0, 0) == 1.0);
    CHECK(s.at(kChipSpace, 0, 0) == 0.0);
    CHECK(s.at(kChipSpace, 1, 1) == 1.0);
    CHECK(s.at(kChipSpace, 2, 1) == 0.0);  // chip-local (1,0)

    l.mim(0, 2) = 10;
    l.mos[0](0, 1) = 5;
    s = encode_freq_state(fp, l);
    int ones = 0;
    for (int r = 0; r < 3; ++r) {
        for (int col = 0; col < 4; ++col) ones += s.at(kMimDist, r, col) == 1.0;
    }
    CHECK(ones == 1);
    CHECK(s.at(kMimDist, 0, 2) == 1.0);
    CHECK(s.at(kMosDist, 1, 2) == 0.5);
}

TEST_CASE("state: distributions stay in [0,1] and vanish off the space mask") {
    Floorplan fp = toy();
    fp.interposer_space(1, 0) = 0;
    fp.chiplets[0].space(0, 1) = 0;
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> lvl(0, kMaxLevel);
    for (int trial = 0; trial < 50; ++trial) {
        DecapLayout l = DecapLayout::empty_for(fp);
        for (auto site : feasible_sites(fp)) level_at(l, site) = lvl(rng);
        const StateTensor s = encode_freq_state(fp, l);
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                for (int ch : {kMimDist, kMosDist}) {
                    const double v = s.at(ch, r, c);
                    CHECK(v >= 0.0);
                    CHECK(v <= 1.0);
                    const int space = ch == kMimDist ? kIntpSpace : kChipSpace;
                    if (s.at(space, r, c) == 0.0) CHECK(v == 0.0);
                }
            }
        }
    }
}

TEST_CASE("state: time encoding appends normalized VVI") {
    Floorplan fp = toy();
    std::vector<Grid<double>> vvi{Grid<double>({2, 2}, 0.0)};
    vvi[0](1, 0) = 4e-12;
    vvi[0](0, 1) = 1e-12;
    const StateTensor s = encode_time_state(fp, DecapLayout::empty_for(fp), vvi, 4e-12);
    CHECK(s.channels == kTimeChannels);
    CHECK(s.at(kVvi, 1, 0) == 1.0);
    CHECK(s.at(kVvi, 0, 1) == doctest::Approx(0.25));
    CHECK(s.at(kVvi, 0, 0) == 0.0);
}

TEST_CASE("action: clamping and inverse") {
    Floorplan fp = toy();
    const auto sites = feasible_sites(fp);
    DecapLayout l = DecapLayout::empty_for(fp);
    ActionVector up(sites.size(), 1), down(sites.size(), -1), zero(sites.size(), 0);

    CHECK(apply_action(l, sites, down) == l);
    const DecapLayout one = apply_action(l, sites, up);
    for (auto s : sites) CHECK(level_at(one, s) == 1);
    CHECK(apply_action(one, sites, zero) == one);

    const DecapLayout full = DecapLayout::uniform_for(fp, kMaxLevel);
    CHECK(apply_action(full, sites, up) == full);

    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> interior(1, kMaxLevel - 1), step(-1, 1);
    for (int trial = 0; trial < 50; ++trial) {
        DecapLayout x = DecapLayout::empty_for(fp);
        ActionVector a(sites.size()), inv(sites.size());
        for (std::size_t i = 0; i < sites.size(); ++i) {
            level_at(x, sites[i]) = interior(rng);
            a[i] = step(rng);
            inv[i] = -a[i];
        }
        CHECK(apply_action(apply_action(x, sites, a), sites, inv) == x);
    }

    CHECK_THROWS_AS(apply_action(l, sites, ActionVector(sites.size() - 1, 0)), InvalidArgument);
    ActionVector bad(sites.size(), 0);
    bad[0] = 2;
    CHECK_THROWS_AS(apply_action(l, sites, bad), InvalidArgument);
}

TEST_CASE("action: infeasible UDCs are never touched") {
    Floorplan fp = toy();
    fp.interposer_space(1, 1) = 0;
    fp.chiplets[0].space(0, 0) = 0;
    const auto sites = feasible_sites(fp);
    CHECK(sites.size() == 6);
    const DecapLayout l = apply_action(DecapLayout::empty_for(fp), sites, ActionVector(sites.size(), 1));
    CHECK(l.mim(1, 1) == 0);
    CHECK(l.mos[0](0, 0) == 0);
    CHECK_NOTHROW(l.validate(fp));
}

TEST_CASE("network: zero parameters give a uniform policy and zero value") {
    PolicyValueNet net(kFreqChannels, {2, 2}, 8);
    std::mt19937_64 rng(1);
    const StateTensor s = random_state(kFreqChannels, {2, 2}, rng);
    const Eigen::MatrixXd p = policy_forward(s, net);
    CHECK(p.rows() == 8);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (Eigen::Index k = 0; k < 3; ++k) CHECK(p(i, k) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    CHECK(value_forward(s, net) == 0.0);
}

TEST_CASE("network: probabilities normalize, batching matches single forward") {
    PolicyValueNet net(kFreqChannels, {3, 2}, 5);
    net.initialize(9);
    std::mt19937_64 rng(2);
    std::vector<StateTensor> batch;
    for (int i = 0; i < 6; ++i) batch.push_back(random_state(kFreqChannels, {3, 2}, rng));
    const auto outs = net.forward(batch);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const NetOutput one = net.forward(batch[i]);
        CHECK((one.logits - outs[i].logits).cwiseAbs().maxCoeff() < 1e-13);
        CHECK(std::abs(one.value - outs[i].value) < 1e-13);
        CHECK(std::isfinite(one.value));
        const Eigen::MatrixXd p = softmax_rows(one.logits);
        for (Eigen::Index j = 0; j < p.rows(); ++j) CHECK(p.row(j).sum() == doctest::Approx(1.0).epsilon(1e-14));
    }
    // Deterministic given parameters and state.
    CHECK(net.forward(batch[0]).logits == net.forward(batch[0]).logits);
}

TEST_CASE("network: non-finite activations and shape errors") {
    PolicyValueNet net(kFreqChannels, {2, 2}, 2);
    net.initialize(1);
    std::mt19937_64 rng(5);
    StateTensor s = random_state(kFreqChannels, {2, 2}, rng);
    CHECK_THROWS_AS((void)net.forward(random_state(kTimeChannels, {2, 2}, rng)), InvalidArgument);
    s.data[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS((void)net.forward(s), NumericFault);
}

TEST_CASE("network: checkpoint round trip") {
    PolicyValueNet net = small_net(kTimeChannels, {2, 3}, 4, 17);
    std::stringstream a;
    net.save(a);
    const std::string text = a.str();
    std::stringstream in(text);
    PolicyValueNet back = PolicyValueNet::load(in);
    CHECK(back.params() == net.params());
    std::stringstream b;
    back.save(b);
    CHECK(b.str() == text);
    std::stringstream junk("nope\n");
    CHECK_THROWS_AS(PolicyValueNet::load(junk), InvalidArgument);
}

TEST_CASE("ppo: log-probability of a factorized action is the per-site sum") {
    PolicyValueNet net = small_net(kFreqChannels, {2, 2}, 6, 4);
    std::mt19937_64 rng(8);
    const StateTensor s = random_state(kFreqChannels, {2, 2}, rng);
    const NetOutput out = net.forward(s);
    const Eigen::MatrixXd p = policy_forward(s, net);
    for (int trial = 0; trial < 20; ++trial) {
        const ActionVector a = sample_action(out.logits, rng);
        double expect = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) expect += std::log(p(static_cast<Eigen::Index>(j), a[j] + 1));
        CHECK(log_prob(out.logits, a) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("ppo: sampling follows the categorical probabilities") {
    Eigen::MatrixXd logits(1, 3);
    logits << std::log(0.2), std::log(0.5), std::log(0.3);
    std::mt19937_64 rng(21);
    int counts[3] = {0, 0, 0};
    const int n = 60000;
    for (int i = 0; i < n; ++i) ++counts[sample_action(logits, rng)[0] + 1];
    CHECK(counts[0] / double(n) == doctest::Approx(0.2).epsilon(0.03));
    CHECK(counts[1] / double(n) == doctest::Approx(0.5).epsilon(0.03));
    CHECK(counts[2] / double(n) == doctest::Approx(0.3).epsilon(0.03));
}

TEST_CASE("ppo: analytic loss gradient matches central differences") {
    // 2-UDC toy: 1x2 canvas, two action sites.
    std::mt19937_64 rng(31);
    PolicyValueNet net = small_net(kFreqChannels, {1, 2}, 2, 5);
    // Spread of old log-probs puts some samples on each side of the clip.
    Batch b = random_batch(net, 6, rng, 0.5);
    const auto idx = all_indices(b);
    const double clip = 0.2, vc = 0.5, ew = 0.01;
    const LossAndGrad lg = ppo_loss(net, b, idx, clip, vc, ew);
    CHECK(lg.terms.clip_fraction > 0.0);
    CHECK(lg.terms.clip_fraction < 1.0);

    const double h = 1e-6;
    Eigen::VectorXd fd(net.params().size());
    for (Eigen::Index i = 0; i < fd.size(); ++i) {
        const double keep = net.params()[i];
        net.params()[i] = keep + h;
        const double up = ppo_loss(net, b, idx, clip, vc, ew).terms.total;
        net.params()[i] = keep - h;
        const double dn = ppo_loss(net, b, idx, clip, vc, ew).terms.total;
        net.params()[i] = keep;
        fd[i] = (up - dn) / (2 * h);
    }
    const double rel = (lg.grad - fd).norm() / fd.norm();
    CHECK(rel <= 1e-4);
    const double scale = fd.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < fd.size(); ++i) {
        CHECK(std::abs(lg.grad[i] - fd[i]) <= 1e-4 * std::max(std::abs(fd[i]), 1e-3 * scale));
    }
}

TEST_CASE("ppo: ratio one makes the surrogate equal the advantage") {
    std::mt19937_64 rng(41);
    PolicyValueNet net = small_net(kFreqChannels, {2, 2}, 8, 6);
    Batch b = random_batch(net, 5, rng, 0.0);
    const auto idx = all_indices(b);
    const LossAndGrad lg = ppo_loss(net, b, idx, 0.2, 0.0, 0.0);
    double mean_adv = 0.0;
    for (double a : b.advantages) mean_adv += a / static_cast<double>(b.size());
    CHECK(lg.terms.surrogate == doctest::Approx(mean_adv).epsilon(1e-14));
    CHECK(lg.terms.clip_fraction == 0.0);
}

TEST_CASE("ppo: clipped branch caps the ratio and stops the policy gradient") {
    std::mt19937_64 rng(43);
    PolicyValueNet net = small_net(kFreqChannels, {2, 2}, 8, 7);
    const double eps = 0.2;
    Batch b = random_batch(net, 2, rng, 0.0);
    // Sample 0: A > 0, r = 1 + 2 eps. Sample 1: A < 0, r = 1 - 2 eps.
    b.advantages = {0.7, -0.4};
    b.old_log_probs[0] -= std::log(1 + 2 * eps);
    b.old_log_probs[1] -= std::log(1 - 2 * eps);
    for (std::size_t i = 0; i < 2; ++i) {
        std::vector<std::size_t> one{i};
        const LossAndGrad lg = ppo_loss(net, b, one, eps, 0.0, 0.0);
        const double expect = i == 0 ? (1 + eps) * 0.7 : (1 - eps) * -0.4;
        CHECK(lg.terms.surrogate == doctest::Approx(expect).epsilon(1e-12));
        CHECK(lg.terms.clip_fraction == 1.0);
        CHECK(lg.grad.cwiseAbs().maxCoeff() == 0.0);
    }
    // Inside the trust region the gradient is live.
    b.old_log_probs[0] += std::log(1 + 2 * eps) - std::log(1 + eps / 2);
    std::vector<std::size_t> first{0};
    CHECK(ppo_loss(net, b, first, eps, 0.0, 0.0).grad.norm() > 0.0);
}

TEST_CASE("ppo: zero advantages give zero surrogate gradient") {
    std::mt19937_64 rng(47);
    PolicyValueNet net = small_net(kFreqChannels, {2, 2}, 8, 8);
    Batch b = random_batch(net, 7, rng, 0.3);
    std::fill(b.advantages.begin(), b.advantages.end(), 0.0);
    const auto idx = all_indices(b);
    CHECK(ppo_loss(net, b, idx, 0.2, 0.0, 0.0).grad.cwiseAbs().maxCoeff() == 0.0);
    // The value head still learns.
    const LossAndGrad with_value = ppo_loss(net, b, idx, 0.2, 0.5, 0.0);
    CHECK(with_value.grad.norm() > 0.0);
}

TEST_CASE("ppo: unclipped single epoch equals a plain policy-gradient step") {
    std::mt19937_64 rng(53);
    PolicyValueNet base = small_net(kFreqChannels, {2, 2}, 8, 9);
    Batch b = random_batch(base, 9, rng, 0.0);
    PpoConfig cfg;
    cfg.clip = std::numeric_limits<double>::infinity();
    cfg.epochs = 1;
    cfg.minibatch = static_cast<int>(b.size());
    cfg.network = base.config();

    PolicyValueNet a = base, c = base;
    Adam oa(a.params().size(), cfg.learning_rate), oc(c.params().size(), cfg.learning_rate);
    std::mt19937_64 shuffle(1);
    ppo_update(a, oa, b, cfg, shuffle);
    pg_update(c, oc, b, cfg);
    CHECK((a.params() - base.params()).norm() > 0.0);
    CHECK((a.params() - c.params()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("ppo: discounted reward-to-go resets at episode ends") {
    const std::vector<double> r{1.0, 2.0, 3.0, 4.0};
    const std::vector<char> end{0, 1, 0, 1};
    const auto g = discounted_returns(r, end, 0.5);
    CHECK(g[0] == 1.0 + 0.5 * 2.0);
    CHECK(g[1] == 2.0);
    CHECK(g[2] == 3.0 + 0.5 * 4.0);
    CHECK(g[3] == 4.0);
}

TEST_CASE("ppo: config validation") {
    PpoConfig c;
    CHECK_NOTHROW(c.validate());
    c.clip = 1.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.discount = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = {};
    c.epochs = 0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("adam: first step moves every coordinate by the learning rate") {
    Eigen::VectorXd x(3), g(3);
    x << 1.0, 2.0, 3.0;
    g << 0.5, -2.0, 1e-3;
    Adam opt(3, 0.1);
    opt.step(x, g);
    CHECK(x[0] == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(x[1] == doctest::Approx(2.1).epsilon(1e-6));
    CHECK(x[2] == doctest::Approx(2.9).epsilon(1e-4));
}

TEST_CASE("env: frequency steps") {
    FreqEvaluator ev(toy(), PdnParams{}, toy_target(), {}, freq::default_frequency_grid());
    FreqEnv env(ev, 5);
    const auto n = env.sites().size();
    CHECK(n == 8);
    env.reset();
    StepResult up = env.step(ActionVector(n, 1));
    for (auto s : env.sites()) CHECK(level_at(env.layout(), s) == 1);
    const DecapLayout before = env.layout();
    StepResult same = env.step(ActionVector(n, 0));
    CHECK(env.layout() == before);
    CHECK(same.reward == up.reward);
    CHECK_FALSE(same.success);
    CHECK(ev.evaluations() == 2);

    // Empty layout violates the mask; the saturated one meets it and ends the episode.
    env.reset();
    CHECK(env.step(ActionVector(n, 0)).reward < 0.0);
    env.reset(DecapLayout::uniform_for(ev.floorplan(), kMaxLevel));
    StepResult sat = env.step(ActionVector(n, 1));
    CHECK(env.layout() == DecapLayout::uniform_for(ev.floorplan(), kMaxLevel));
    CHECK(sat.success);
    CHECK(sat.done);
    CHECK(sat.reward >= 0.0);

    env.reset();
    StepResult r;
    for (int i = 0; i < 5; ++i) r = env.step(ActionVector(n, 0));
    CHECK(r.done);
    CHECK_FALSE(r.success);
    CHECK_THROWS_AS(env.step(ActionVector(n - 1, 0)), InvalidArgument);
}

namespace {

timing::CurrentProfile toy_profile(const Floorplan& fp, double i_ref, std::uint64_t seed) {
    const Netlist net = assemble_hierarchy(fp, PdnParams{});
    const auto nodes = timing::source_nodes(net, fp);
    return timing::generate_profile(nodes.internal, nodes.io, 0.9, i_ref, seed);
}

}  // namespace

TEST_CASE("env: time steps and tolerance") {
    const Floorplan fp = toy();
    const DecapLayout start = DecapLayout::empty_for(fp);
    TimeEvaluator ev(fp, PdnParams{}, {toy_profile(fp, 2.5, 1)}, timing::VviSpec::from_vdd(1.0),
                     circuit::TransientOptions{});

    TimeEnv env(ev, start, 0.5, 10);
    REQUIRE(env.initial().total > 0.0);
    StepResult s0 = env.reset();
    CHECK(s0.state.channels == kTimeChannels);
    double vmax = 0.0;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            CHECK(s0.state.at(kVvi, r, c) >= 0.0);
            vmax = std::max(vmax, s0.state.at(kVvi, r, c));
        }
    }
    CHECK(vmax == 1.0);
    CHECK(env.sites().size() == 4);

    StepResult same = env.step(ActionVector(4, 0));
    CHECK(env.last().total == env.initial().total);
    CHECK(same.reward == 0.0);
    CHECK_FALSE(same.done);

    TimeEnv loose(ev, start, 1.0, 10);
    loose.reset();
    CHECK(loose.step(ActionVector(4, 0)).done);

    TimeEnv strict(ev, start, 0.0, 10);
    strict.reset();
    StepResult r = strict.step(ActionVector(4, 1));
    CHECK(r.done == (strict.last().violation_nodes == 0));
}

TEST_CASE("env: time phase needs a violating start layout") {
    const Floorplan fp = toy();
    TimeEvaluator ev(fp, PdnParams{}, {toy_profile(fp, 1e-3, 1)}, timing::VviSpec::from_vdd(1.0),
                     circuit::TransientOptions{});
    CHECK_THROWS_AS(TimeEnv(ev, DecapLayout::empty_for(fp), 0.5, 10), PreconditionError);
}

TEST_CASE("train: seeded runs are reproducible and best-so-far is monotone") {
    PpoConfig cfg;
    cfg.rollout = 16;
    cfg.minibatch = 8;
    cfg.epochs = 2;
    cfg.episode_steps = 6;
    cfg.network.conv_channels = {4};
    cfg.network.hidden = {16};
    auto run = [&](std::uint64_t seed) {
        FreqEvaluator ev(toy(), PdnParams{}, toy_target(), {}, freq::log_frequency_grid(1e8, 2e10, 10));
        FreqEnv env(ev, cfg.episode_steps);
        return train_freq(env, cfg, 60, seed);
    };
    const TrainResult a = run(7), b = run(7);
    REQUIRE(a.curve.size() == b.curve.size());
    for (std::size_t i = 0; i < a.curve.size(); ++i) {
        CHECK(a.curve[i].reward == b.curve[i].reward);
        CHECK(a.curve[i].mos == b.curve[i].mos);
        CHECK(a.curve[i].mim == b.curve[i].mim);
        if (i > 0) CHECK(a.curve[i].best >= a.curve[i - 1].best);
    }
    CHECK(a.network.params() == b.network.params());
    CHECK(a.best_layout == b.best_layout);
    CHECK(a.evaluations == 60);
    CHECK(a.curve.back().evaluations == 60);
}
