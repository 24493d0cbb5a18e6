#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cutstop/cuts.hpp"
#include "cutstop/rng.hpp"
#include "cutstop/simplex.hpp"

namespace cutstop {

// Architecture of the stall-budget policy network. The parameter vector
// layout is a pure function of this struct.
struct HygroConfig {
  int cons_features = 6;    // per-constraint input features
  int var_features = 9;     // per-variable input features
  int static_features = 8;  // instance-level input features
  int embed_dim = 32;
  std::vector<int> hidden = {64, 32};
  double gamma = 0.9;       // non-root ratio damping, < 1
  int action_space = 30;    // number of stall-budget actions

  bool operator==(const HygroConfig&) const = default;
};

std::size_t param_count(const HygroConfig& config);

// Constraint/variable bipartite encoding of a node LP plus a static
// feature vector. Matrices are row-major.
struct BipartiteState {
  int num_cons = 0;
  int num_vars = 0;
  std::vector<double> cons;      // num_cons x cons_features
  std::vector<double> vars;      // num_vars x var_features
  std::vector<int> edge_cons;    // one entry per nonzero
  std::vector<int> edge_var;
  std::vector<double> edge_feat; // one feature per edge
  std::vector<double> statics;

  int num_edges() const { return static_cast<int>(edge_feat.size()); }
};

struct HygroParams {
  HygroConfig config;
  std::vector<double> theta;

  static HygroParams zeros(const HygroConfig& config);
  static HygroParams random(const HygroConfig& config, Rng& rng, double scale = 0.1);
};

struct RatioOutput {
  double ratio = 0.0;
  int action = 0;
  bool is_root = true;
};

struct EncodeContext {
  int depth = 0;
  int rounds_executed = 0;
  int stall_counter = 0;
  double primal_bound = kInf;
  double dual_bound = -kInf;
  int hard_round_cap = 200;
  int action_space = 30;
};

// Feature extraction from a solved node LP. All features are normalized
// per instance to stay O(1) across generator families.
BipartiteState encode_state(const NodeLp& node, const LpSolution& sol,
                            const EncodeContext& ctx);

// Minimal row-major matrix used by the public network pieces.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

struct EmbeddedState {
  Mat cons;    // n x d
  Mat vars;    // m x d
  Mat edges;   // e x d
  std::vector<double> statics;  // d
};

// Linear embedding of the four state components into embed_dim.
EmbeddedState embed_state(const BipartiteState& state, const HygroParams& params);

struct ConvLayerParams {
  Mat w_msg;                  // 2d x d
  std::vector<double> b_msg;  // d
  Mat w_upd;                  // 2d x d
  std::vector<double> b_upd;  // d
};

// One half-convolution: updates `targets` from `sources` along the edges.
// Per edge, message = [source_row ++ edge_row] * w_msg + b_msg; messages are
// mean-aggregated per target (zero vector for isolated targets) and the
// update is relu([target_row ++ mean] * w_upd + b_upd).
Mat graph_conv(const Mat& sources, const Mat& targets,
               const std::vector<int>& edge_source, const std::vector<int>& edge_target,
               const Mat& edge_embed, const ConvLayerParams& layer);

// Column-wise [max; min; mean; population std] over a q x d matrix.
std::vector<double> pna_aggregate(const Mat& data);

// Full forward pass: embed, two convolution passes (constraints first,
// then variables from the updated constraints), PNA pooling, MLP head,
// ratio = 0.5 * tanh(out) + 0.5 damped by gamma off the root, and the
// floor action map. Throws on non-finite intermediate values.
RatioOutput hygro_forward(const BipartiteState& state, const HygroParams& params, bool is_root);

// floor(ratio * t_A); requires ratio strictly inside (0, 1).
int action_from_ratio(double ratio, int action_space);

void save_checkpoint(const HygroParams& params, const std::string& path);
HygroParams load_checkpoint(const std::string& path);

}  // namespace cutstop
