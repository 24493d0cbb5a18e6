#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "cutstop/hygro.hpp"
#include "test_util.hpp"

using namespace cutstop;
using namespace cutstop::testing;

namespace {

// solved node state for a small mixed instance: 3 rows, 2 vars, 4 nonzeros
struct Fixture {
  MilpInstance inst;
  NodeLp node;
  LpSolution sol;
  EncodeContext ctx;

  Fixture()
      : inst(build_instance({-1.0, -1.0},
                            {dense_row({2, 2}, 3), dense_row({1, 0}, 1), dense_row({0, 1}, 1)},
                            {}, {0, 1}, {{0, 1}, {0, 1}})),
        node(inst) {
    SolverTolerances tol;
    sol = lp_solve(node.to_lp(), tol);
    REQUIRE(sol.status == LpStatus::Optimal);
  }
};

BipartiteState random_state(Rng& rng, const HygroConfig& config) {
  BipartiteState st;
  st.num_cons = static_cast<int>(rng.uniform_int(1, 6));
  st.num_vars = static_cast<int>(rng.uniform_int(1, 6));
  st.cons.resize(static_cast<std::size_t>(st.num_cons) * config.cons_features);
  st.vars.resize(static_cast<std::size_t>(st.num_vars) * config.var_features);
  st.statics.resize(static_cast<std::size_t>(config.static_features));
  for (double& v : st.cons) v = rng.uniform(-2.0, 2.0);
  for (double& v : st.vars) v = rng.uniform(-2.0, 2.0);
  for (double& v : st.statics) v = rng.uniform(-2.0, 2.0);
  const int edges = static_cast<int>(rng.uniform_int(0, st.num_cons * st.num_vars));
  for (int e = 0; e < edges; ++e) {
    st.edge_cons.push_back(static_cast<int>(rng.uniform_int(0, st.num_cons - 1)));
    st.edge_var.push_back(static_cast<int>(rng.uniform_int(0, st.num_vars - 1)));
    st.edge_feat.push_back(rng.uniform(-1.0, 1.0));
  }
  return st;
}

BipartiteState permuted(const BipartiteState& st, const HygroConfig& config,
                        const std::vector<int>& cons_perm, const std::vector<int>& var_perm) {
  BipartiteState out = st;
  for (int i = 0; i < st.num_cons; ++i)
    for (int f = 0; f < config.cons_features; ++f)
      out.cons[static_cast<std::size_t>(cons_perm[i]) * config.cons_features + f] =
          st.cons[static_cast<std::size_t>(i) * config.cons_features + f];
  for (int j = 0; j < st.num_vars; ++j)
    for (int f = 0; f < config.var_features; ++f)
      out.vars[static_cast<std::size_t>(var_perm[j]) * config.var_features + f] =
          st.vars[static_cast<std::size_t>(j) * config.var_features + f];
  for (int e = 0; e < st.num_edges(); ++e) {
    out.edge_cons[e] = cons_perm[st.edge_cons[e]];
    out.edge_var[e] = var_perm[st.edge_var[e]];
  }
  return out;
}

std::vector<int> random_perm(Rng& rng, int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  for (int i = n - 1; i > 0; --i)
    std::swap(p[i], p[static_cast<int>(rng.uniform_int(0, i))]);
  return p;
}

}  // namespace

TEST_CASE("encode_state produces the documented shapes") {
  Fixture fx;
  const auto st = encode_state(fx.node, fx.sol, fx.ctx);
  CHECK(st.num_cons == 3);
  CHECK(st.num_vars == 2);
  CHECK(st.cons.size() == 3 * 6);
  CHECK(st.vars.size() == 2 * 9);
  CHECK(st.edge_feat.size() == 4);
  CHECK(st.statics.size() == 8);
  // root depth feature is zero
  CHECK(st.statics[4] == 0.0);
}

TEST_CASE("encode_state captures fractionality and integrality") {
  Fixture fx;
  // LP optimum of the fixture has one variable at 1 and one at 0.5
  const auto st = encode_state(fx.node, fx.sol, fx.ctx);
  bool saw_half = false;
  for (int j = 0; j < st.num_vars; ++j) {
    const double frac = st.vars[static_cast<std::size_t>(j) * 9 + 2];
    const double is_int = st.vars[static_cast<std::size_t>(j) * 9 + 3];
    CHECK(is_int == 1.0);
    if (frac == doctest::Approx(0.5)) saw_half = true;
  }
  CHECK(saw_half);
}

TEST_CASE("encode_state requires an optimal LP") {
  Fixture fx;
  LpSolution unsolved;
  unsolved.status = LpStatus::Infeasible;
  CHECK_THROWS_AS(encode_state(fx.node, unsolved, fx.ctx), MilpError);
}

TEST_CASE("zero parameters embed to zero") {
  Fixture fx;
  HygroConfig config;
  const auto params = HygroParams::zeros(config);
  const auto st = encode_state(fx.node, fx.sol, fx.ctx);
  const auto es = embed_state(st, params);
  for (double v : es.cons.data) CHECK(v == 0.0);
  for (double v : es.vars.data) CHECK(v == 0.0);
  for (double v : es.statics) CHECK(v == 0.0);
  CHECK(es.cons.rows == st.num_cons);
  CHECK(es.cons.cols == config.embed_dim);
  CHECK(es.edges.rows == st.num_edges());
}

TEST_CASE("identity embedding reproduces the constraint features") {
  // with embed_dim == cons_features an identity block passes C through
  HygroConfig config;
  config.embed_dim = config.cons_features;  // 6
  auto params = HygroParams::zeros(config);
  for (int i = 0; i < 6; ++i) params.theta[static_cast<std::size_t>(i) * 6 + i] = 1.0;

  Fixture fx;
  const auto st = encode_state(fx.node, fx.sol, fx.ctx);
  const auto es = embed_state(st, params);
  for (int i = 0; i < st.num_cons; ++i)
    for (int f = 0; f < 6; ++f)
      CHECK(es.cons.at(i, f) ==
            doctest::Approx(st.cons[static_cast<std::size_t>(i) * 6 + f]));
}

TEST_CASE("graph_conv zero weights and isolated nodes") {
  const int d = 2;
  ConvLayerParams layer;
  layer.w_msg = Mat(2 * d, d);
  layer.b_msg.assign(d, 0.0);
  layer.w_upd = Mat(2 * d, d);
  layer.b_upd.assign(d, 0.0);

  Mat sources(2, d), targets(2, d), edges(1, d);
  sources.at(0, 0) = 1.0;
  targets.at(1, 1) = 3.0;
  edges.at(0, 0) = 2.0;

  SUBCASE("zero weights give zero output") {
    const auto out = graph_conv(sources, targets, {0}, {0}, edges, layer);
    for (double v : out.data) CHECK(v == 0.0);
  }

  SUBCASE("isolated target sees a zero message") {
    // update = relu(w_upd . [target, 0]); pick w_upd = identity on the target half
    for (int i = 0; i < d; ++i) layer.w_upd.at(i, i) = 1.0;
    const auto out = graph_conv(sources, targets, {0}, {0}, edges, layer);
    CHECK(out.at(1, 1) == doctest::Approx(3.0));  // no incident edge
    CHECK(out.at(1, 0) == 0.0);
  }
}

TEST_CASE("graph_conv single edge matches a scalar hand computation") {
  // d = 1: message = wm1*src + wm2*edge + bm; update = relu(wu1*tgt + wu2*mean + bu)
  const int d = 1;
  ConvLayerParams layer;
  layer.w_msg = Mat(2, 1);
  layer.w_msg.at(0, 0) = 2.0;   // source weight
  layer.w_msg.at(1, 0) = -1.0;  // edge weight
  layer.b_msg = {0.5};
  layer.w_upd = Mat(2, 1);
  layer.w_upd.at(0, 0) = 3.0;   // self weight
  layer.w_upd.at(1, 0) = 4.0;   // message weight
  layer.b_upd = {-1.0};

  Mat sources(1, d), targets(1, d), edges(1, d);
  sources.at(0, 0) = 1.5;
  targets.at(0, 0) = 0.25;
  edges.at(0, 0) = 2.0;

  // message = 2*1.5 - 1*2 + 0.5 = 1.5; update = relu(3*0.25 + 4*1.5 - 1) = 5.75
  const auto out = graph_conv(sources, targets, {0}, {0}, edges, layer);
  CHECK(out.at(0, 0) == doctest::Approx(5.75).epsilon(1e-12));
}

TEST_CASE("pna aggregation matches column statistics") {
  SUBCASE("two rows") {
    Mat d(2, 2);
    d.at(0, 0) = 1;
    d.at(0, 1) = 2;
    d.at(1, 0) = 3;
    d.at(1, 1) = 4;
    const auto out = pna_aggregate(d);
    const std::vector<double> expect = {3, 4, 1, 2, 2, 3, 1, 1};
    REQUIRE(out.size() == expect.size());
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(expect[i]));
  }
  SUBCASE("single row has zero std") {
    Mat d(1, 2);
    d.at(0, 0) = 5;
    d.at(0, 1) = 7;
    const auto out = pna_aggregate(d);
    const std::vector<double> expect = {5, 7, 5, 7, 5, 7, 0, 0};
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(expect[i]));
  }
  SUBCASE("row permutation invariance is exact") {
    Mat d(3, 2), p(3, 2);
    const double vals[3][2] = {{1, -2}, {4, 0.5}, {-3, 9}};
    const int perm[3] = {2, 0, 1};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 2; ++c) {
        d.at(r, c) = vals[r][c];
        p.at(perm[r], c) = vals[r][c];
      }
    CHECK(pna_aggregate(d) == pna_aggregate(p));
  }
  SUBCASE("empty input throws") { CHECK_THROWS_AS(pna_aggregate(Mat(0, 3)), MilpError); }
}

TEST_CASE("zeroed network emits the fixed-point ratio and actions") {
  Fixture fx;
  HygroConfig config;
  const auto params = HygroParams::zeros(config);
  const auto st = encode_state(fx.node, fx.sol, fx.ctx);

  const auto root = hygro_forward(st, params, true);
  CHECK(root.ratio == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(root.action == 15);

  const auto deep = hygro_forward(st, params, false);
  CHECK(deep.ratio == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(deep.action == 13);
}

TEST_CASE("gamma scaling is exact") {
  Fixture fx;
  HygroConfig config;
  Rng rng(8);
  const auto st = encode_state(fx.node, fx.sol, fx.ctx);
  for (int trial = 0; trial < 10; ++trial) {
    const auto params = HygroParams::random(config, rng, 0.2);
    const auto root = hygro_forward(st, params, true);
    const auto deep = hygro_forward(st, params, false);
    CHECK(deep.ratio == root.ratio * config.gamma);  // bitwise
  }
}

TEST_CASE("action_from_ratio floors into the action space") {
  CHECK(action_from_ratio(0.5, 30) == 15);
  CHECK(action_from_ratio(0.0001, 30) == 0);
  CHECK(action_from_ratio(0.9999, 30) == 29);
  CHECK_THROWS_AS(action_from_ratio(0.0, 30), MilpError);
  CHECK_THROWS_AS(action_from_ratio(1.0, 30), MilpError);
  CHECK_THROWS_AS(action_from_ratio(-0.2, 30), MilpError);
  CHECK_THROWS_AS(action_from_ratio(0.5, 0), MilpError);
}

TEST_CASE("ratio stays inside (0,1) even under saturating weights") {
  HygroConfig config;
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto st = random_state(rng, config);
    const double scale = trial % 3 == 0 ? 25.0 : 0.5;  // provoke tanh saturation
    const auto params = HygroParams::random(config, rng, scale);
    const auto out = hygro_forward(st, params, trial % 2 == 0);
    CHECK(out.ratio > 0.0);
    CHECK(out.ratio < 1.0);
    CHECK(out.action >= 0);
    CHECK(out.action < config.action_space);
  }
}

TEST_CASE("forward is deterministic") {
  HygroConfig config;
  Rng rng(123);
  const auto st = random_state(rng, config);
  const auto params = HygroParams::random(config, rng, 0.3);
  const auto a = hygro_forward(st, params, true);
  const auto b = hygro_forward(st, params, true);
  CHECK(a.ratio == b.ratio);
  CHECK(a.action == b.action);
}

TEST_CASE("consistent permutations leave the ratio unchanged") {
  HygroConfig config;
  Rng rng(2025);
  for (int trial = 0; trial < 30; ++trial) {
    const auto st = random_state(rng, config);
    const auto params = HygroParams::random(config, rng, 0.4);
    const auto cp = random_perm(rng, st.num_cons);
    const auto vp = random_perm(rng, st.num_vars);
    const auto st2 = permuted(st, config, cp, vp);
    const auto a = hygro_forward(st, params, true);
    const auto b = hygro_forward(st2, params, true);
    CHECK(std::abs(a.ratio - b.ratio) < 1e-6);
    CHECK(a.action == b.action);
  }
}

TEST_CASE("checkpoint round trip is bit exact") {
  HygroConfig config;
  Rng rng(31);
  const auto params = HygroParams::random(config, rng, 0.7);
  const std::string path = "hygro_test_ckpt.bin";
  save_checkpoint(params, path);
  const auto loaded = load_checkpoint(path);
  CHECK(loaded.config == params.config);
  REQUIRE(loaded.theta.size() == params.theta.size());
  CHECK(std::memcmp(loaded.theta.data(), params.theta.data(),
                    params.theta.size() * sizeof(double)) == 0);
  std::remove(path.c_str());
}

TEST_CASE("corrupted checkpoints are rejected") {
  HygroConfig config;
  config.embed_dim = 4;
  config.hidden = {8};
  Rng rng(32);
  const auto params = HygroParams::random(config, rng, 0.7);
  const std::string path = "hygro_corrupt_ckpt.bin";
  save_checkpoint(params, path);

  std::ifstream in(path, std::ios::binary);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  SUBCASE("truncation") {
    std::ofstream out(path, std::ios::binary);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size() / 2));
    out.close();
    CHECK_THROWS_AS(load_checkpoint(path), MilpError);
  }
  SUBCASE("flipped payload byte breaks the checksum") {
    buf[20] = static_cast<char>(buf[20] ^ 0x40);
    std::ofstream out(path, std::ios::binary);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.close();
    CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("checksum"), MilpError);
  }
  std::remove(path.c_str());
}

TEST_CASE("state dimension mismatches are compatibility errors") {
  Fixture fx;
  HygroConfig narrow;
  narrow.cons_features = 5;  // encoder emits 6
  const auto params = HygroParams::zeros(narrow);
  const auto st = encode_state(fx.node, fx.sol, fx.ctx);
  CHECK_THROWS_AS(embed_state(st, params), MilpError);
  CHECK_THROWS_AS(hygro_forward(st, params, true), MilpError);
}
