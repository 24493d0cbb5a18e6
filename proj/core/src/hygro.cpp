#include "cutstop/hygro.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace cutstop {

namespace {

constexpr char kMagic[8] = {'C', 'S', 'H', 'Y', 'G', 'R', 'O', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr double kRatioClamp = 1e-12;  // keeps tanh saturation inside (0,1)

std::vector<int> mlp_dims(const HygroConfig& c) {
  std::vector<int> dims;
  dims.push_back(9 * c.embed_dim);
  for (int h : c.hidden) dims.push_back(h);
  dims.push_back(1);
  return dims;
}

// Sequential view over the flat parameter vector; the slice order defines
// the checkpoint layout.
class Cursor {
 public:
  Cursor(const double* p, std::size_t len) : p_(p), left_(len) {}

  Mat mat(int rows, int cols) {
    Mat m(rows, cols);
    take(m.data.data(), m.data.size());
    return m;
  }

  std::vector<double> vec(int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    take(v.data(), v.size());
    return v;
  }

  std::size_t remaining() const { return left_; }

 private:
  void take(double* dst, std::size_t n) {
    if (n > left_) throw MilpError("parameter vector too short for the declared layout");
    std::memcpy(dst, p_, n * sizeof(double));
    p_ += n;
    left_ -= n;
  }

  const double* p_;
  std::size_t left_;
};

struct Slices {
  Mat embed_cons_w; std::vector<double> embed_cons_b;
  Mat embed_vars_w; std::vector<double> embed_vars_b;
  Mat embed_edge_w; std::vector<double> embed_edge_b;
  Mat embed_stat_w; std::vector<double> embed_stat_b;
  ConvLayerParams conv_cons;  // pass 1: update constraints from variables
  ConvLayerParams conv_vars;  // pass 2: update variables from constraints
  std::vector<Mat> mlp_w;
  std::vector<std::vector<double>> mlp_b;
};

Slices slice_params(const HygroParams& params) {
  const HygroConfig& c = params.config;
  if (params.theta.size() != param_count(c))
    throw MilpError("parameter vector length does not match the network metadata");
  Cursor cur(params.theta.data(), params.theta.size());
  Slices s;
  const int d = c.embed_dim;
  s.embed_cons_w = cur.mat(c.cons_features, d);
  s.embed_cons_b = cur.vec(d);
  s.embed_vars_w = cur.mat(c.var_features, d);
  s.embed_vars_b = cur.vec(d);
  s.embed_edge_w = cur.mat(1, d);
  s.embed_edge_b = cur.vec(d);
  s.embed_stat_w = cur.mat(c.static_features, d);
  s.embed_stat_b = cur.vec(d);
  for (ConvLayerParams* layer : {&s.conv_cons, &s.conv_vars}) {
    layer->w_msg = cur.mat(2 * d, d);
    layer->b_msg = cur.vec(d);
    layer->w_upd = cur.mat(2 * d, d);
    layer->b_upd = cur.vec(d);
  }
  const auto dims = mlp_dims(c);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    s.mlp_w.push_back(cur.mat(dims[l], dims[l + 1]));
    s.mlp_b.push_back(cur.vec(dims[l + 1]));
  }
  return s;
}

// out = in * w + b, row-vector convention
Mat affine(const Mat& in, const Mat& w, const std::vector<double>& b) {
  if (in.cols != w.rows) throw MilpError("affine dimension mismatch");
  Mat out(in.rows, w.cols);
  for (int r = 0; r < in.rows; ++r) {
    for (int c = 0; c < w.cols; ++c) {
      double acc = b[c];
      for (int k = 0; k < in.cols; ++k) acc += in.at(r, k) * w.at(k, c);
      out.at(r, c) = acc;
    }
  }
  return out;
}

void ensure_finite(const std::vector<double>& data, const char* stage) {
  for (double v : data)
    if (!std::isfinite(v)) throw MilpError(std::string("non-finite value in ") + stage);
}

double clip_magnitude(double v) { return std::clamp(v, -1e4, 1e4); }

}  // namespace

std::size_t param_count(const HygroConfig& c) {
  const std::size_t d = static_cast<std::size_t>(c.embed_dim);
  std::size_t total = 0;
  total += c.cons_features * d + d;
  total += c.var_features * d + d;
  total += 1 * d + d;
  total += c.static_features * d + d;
  total += 2 * (2 * d * d + d + 2 * d * d + d);
  const auto dims = mlp_dims(c);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    total += static_cast<std::size_t>(dims[l]) * dims[l + 1] + dims[l + 1];
  return total;
}

HygroParams HygroParams::zeros(const HygroConfig& config) {
  HygroParams p;
  p.config = config;
  p.theta.assign(param_count(config), 0.0);
  return p;
}

HygroParams HygroParams::random(const HygroConfig& config, Rng& rng, double scale) {
  HygroParams p = zeros(config);
  // weight blocks are scaled by 1/sqrt(fan_in) so the pre-tanh output stays
  // in the active range; biases start at zero
  std::size_t pos = 0;
  const auto fill = [&](int fan_in, int fan_out, bool weights) {
    const double s = weights ? scale / std::sqrt(static_cast<double>(fan_in)) : 0.0;
    const std::size_t count = weights ? static_cast<std::size_t>(fan_in) * fan_out
                                      : static_cast<std::size_t>(fan_out);
    for (std::size_t i = 0; i < count; ++i) p.theta[pos++] = s * rng.normal();
  };
  const int d = config.embed_dim;
  for (int fan_in : {config.cons_features, config.var_features, 1, config.static_features}) {
    fill(fan_in, d, true);
    fill(fan_in, d, false);
  }
  for (int layer = 0; layer < 2; ++layer) {
    fill(2 * d, d, true);
    fill(2 * d, d, false);
    fill(2 * d, d, true);
    fill(2 * d, d, false);
  }
  std::vector<int> dims = {9 * d};
  for (int h : config.hidden) dims.push_back(h);
  dims.push_back(1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    fill(dims[l], dims[l + 1], true);
    fill(dims[l], dims[l + 1], false);
  }
  if (pos != p.theta.size()) throw MilpError("init walked the layout inconsistently");
  return p;
}

BipartiteState encode_state(const NodeLp& node, const LpSolution& sol,
                            const EncodeContext& ctx) {
  if (sol.status != LpStatus::Optimal)
    throw MilpError("state encoding requires an optimal node LP");
  const MilpInstance& base = *node.base;
  const int m = base.num_vars();
  const int n = node.num_rows();

  double cscale = 1.0;
  for (double c : base.objective) cscale = std::max(cscale, std::abs(c));
  double rscale = 1.0;
  for (int i = 0; i < n; ++i) rscale = std::max(rscale, std::abs(node.row(i).rhs));
  double bscale = 1.0;
  for (int j = 0; j < m; ++j) {
    bscale = std::max(bscale, std::abs(clip_magnitude(node.lower[j])));
    bscale = std::max(bscale, std::abs(clip_magnitude(node.upper[j])));
  }
  double dscale = 1.0;
  for (double y : sol.dual) dscale = std::max(dscale, std::abs(y));

  BipartiteState st;
  st.num_cons = n;
  st.num_vars = m;
  st.vars.resize(static_cast<std::size_t>(m) * 9);
  for (int j = 0; j < m; ++j) {
    double* v = st.vars.data() + static_cast<std::size_t>(j) * 9;
    const double x = sol.x[j];
    v[0] = base.objective[j] / cscale;
    v[1] = clip_magnitude(x) / bscale;
    v[2] = x - std::floor(x);
    v[3] = base.is_integer[j] ? 1.0 : 0.0;
    v[4] = std::abs(x - node.lower[j]) <= 1e-6 ? 1.0 : 0.0;
    v[5] = std::abs(x - node.upper[j]) <= 1e-6 ? 1.0 : 0.0;
    v[6] = sol.col_status[j] == ColStatus::Basic ? 1.0 : 0.0;
    v[7] = clip_magnitude(node.lower[j]) / bscale;
    v[8] = clip_magnitude(node.upper[j]) / bscale;
  }

  double obj_norm = 0.0;
  for (double c : base.objective) obj_norm += c * c;
  obj_norm = std::sqrt(obj_norm);

  st.cons.resize(static_cast<std::size_t>(n) * 6);
  for (int i = 0; i < n; ++i) {
    const SparseRow& row = node.row(i);
    double* c = st.cons.data() + static_cast<std::size_t>(i) * 6;
    double norm = 0.0, obj_dot = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      norm += row.value[k] * row.value[k];
      obj_dot += row.value[k] * base.objective[row.index[k]];
    }
    norm = std::sqrt(norm);
    c[0] = row.rhs / rscale;
    c[1] = (i < static_cast<int>(sol.dual.size()) ? sol.dual[i] : 0.0) / dscale;
    c[2] = (row.rhs - row.dot(sol.x)) / rscale;
    c[3] = static_cast<double>(row.size()) / m;
    c[4] = norm > 0 && obj_norm > 0 ? obj_dot / (norm * obj_norm) : 0.0;
    c[5] = node.is_cut_row(i) ? 1.0 : 0.0;

    if (norm > 0) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        st.edge_cons.push_back(i);
        st.edge_var.push_back(row.index[k]);
        st.edge_feat.push_back(row.value[k] / norm);
      }
    }
  }

  const double nnz = static_cast<double>(st.edge_feat.size());
  double gap = 1.0;
  if (std::isfinite(ctx.primal_bound) && std::isfinite(ctx.dual_bound))
    gap = std::clamp(std::abs(ctx.primal_bound - ctx.dual_bound) /
                         std::max(std::abs(ctx.primal_bound), 1.0),
                     0.0, 1.0);
  st.statics = {std::log1p(static_cast<double>(n)),
                std::log1p(static_cast<double>(m)),
                static_cast<double>(base.integer_set.size()) / m,
                nnz / (static_cast<double>(n) * m),
                static_cast<double>(ctx.depth) / (1.0 + ctx.depth),
                static_cast<double>(ctx.rounds_executed) / std::max(1, ctx.hard_round_cap),
                static_cast<double>(ctx.stall_counter) / std::max(1, ctx.action_space),
                gap};
  return st;
}

EmbeddedState embed_state(const BipartiteState& state, const HygroParams& params) {
  const HygroConfig& c = params.config;
  if (state.num_cons < 1 || state.num_vars < 1)
    throw MilpError("bipartite state needs at least one constraint and one variable");
  if (static_cast<int>(state.cons.size()) != state.num_cons * c.cons_features ||
      static_cast<int>(state.vars.size()) != state.num_vars * c.var_features ||
      static_cast<int>(state.statics.size()) != c.static_features)
    throw MilpError("bipartite state dimensions do not match the network metadata");

  const Slices s = slice_params(params);
  EmbeddedState out;

  Mat cons(state.num_cons, c.cons_features);
  cons.data = state.cons;
  out.cons = affine(cons, s.embed_cons_w, s.embed_cons_b);

  Mat vars(state.num_vars, c.var_features);
  vars.data = state.vars;
  out.vars = affine(vars, s.embed_vars_w, s.embed_vars_b);

  Mat edges(state.num_edges(), 1);
  edges.data = state.edge_feat;
  out.edges = affine(edges, s.embed_edge_w, s.embed_edge_b);

  Mat stat(1, c.static_features);
  stat.data = state.statics;
  out.statics = affine(stat, s.embed_stat_w, s.embed_stat_b).data;
  return out;
}

Mat graph_conv(const Mat& sources, const Mat& targets,
               const std::vector<int>& edge_source, const std::vector<int>& edge_target,
               const Mat& edge_embed, const ConvLayerParams& layer) {
  const int d = targets.cols;
  if (sources.cols != d || edge_embed.cols != d)
    throw MilpError("graph_conv embedding widths differ");
  if (layer.w_msg.rows != 2 * d || layer.w_msg.cols != d || layer.w_upd.rows != 2 * d ||
      layer.w_upd.cols != d)
    throw MilpError("graph_conv layer parameter shapes do not match");
  if (edge_source.size() != edge_target.size() ||
      static_cast<int>(edge_source.size()) != edge_embed.rows)
    throw MilpError("graph_conv edge arrays disagree");

  // [src ++ edge] * w_msg splits into per-source and per-edge halves, so a
  // message costs d additions instead of a 2d x d product
  Mat src_half(sources.rows, d);
  for (int s = 0; s < sources.rows; ++s)
    for (int c = 0; c < d; ++c) {
      double acc = 0.0;
      for (int k = 0; k < d; ++k) acc += sources.at(s, k) * layer.w_msg.at(k, c);
      src_half.at(s, c) = acc;
    }

  Mat msg_sum(targets.rows, d);
  std::vector<int> degree(targets.rows, 0);
  for (int e = 0; e < edge_embed.rows; ++e) {
    const int sidx = edge_source[e];
    const int tidx = edge_target[e];
    if (sidx < 0 || sidx >= sources.rows || tidx < 0 || tidx >= targets.rows)
      throw MilpError("graph_conv edge index out of range");
    for (int c = 0; c < d; ++c) {
      double acc = src_half.at(sidx, c) + layer.b_msg[c];
      for (int k = 0; k < d; ++k) acc += edge_embed.at(e, k) * layer.w_msg.at(d + k, c);
      msg_sum.at(tidx, c) += acc;
    }
    ++degree[tidx];
  }

  Mat out(targets.rows, d);
  std::vector<double> cat(static_cast<std::size_t>(2 * d));
  for (int t = 0; t < targets.rows; ++t) {
    const double inv = degree[t] > 0 ? 1.0 / degree[t] : 0.0;
    for (int k = 0; k < d; ++k) {
      cat[k] = targets.at(t, k);
      cat[d + k] = msg_sum.at(t, k) * inv;
    }
    for (int c = 0; c < d; ++c) {
      double acc = layer.b_upd[c];
      for (int k = 0; k < 2 * d; ++k) acc += cat[k] * layer.w_upd.at(k, c);
      out.at(t, c) = std::max(0.0, acc);
    }
  }
  return out;
}

std::vector<double> pna_aggregate(const Mat& data) {
  if (data.rows < 1) throw MilpError("pna aggregation needs at least one row");
  const int d = data.cols;
  std::vector<double> out(static_cast<std::size_t>(4 * d));
  for (int c = 0; c < d; ++c) {
    double mx = data.at(0, c), mn = data.at(0, c), sum = 0.0;
    for (int r = 0; r < data.rows; ++r) {
      const double v = data.at(r, c);
      mx = std::max(mx, v);
      mn = std::min(mn, v);
      sum += v;
    }
    const double mean = sum / data.rows;
    double var = 0.0;
    for (int r = 0; r < data.rows; ++r) {
      const double dev = data.at(r, c) - mean;
      var += dev * dev;
    }
    out[c] = mx;
    out[d + c] = mn;
    out[2 * d + c] = mean;
    out[3 * d + c] = std::sqrt(var / data.rows);  // population std, defined at q=1
  }
  return out;
}

int action_from_ratio(double ratio, int action_space) {
  if (action_space < 1) throw MilpError("action space must be >= 1");
  if (!(ratio > 0.0) || !(ratio < 1.0))
    throw MilpError("ratio must lie strictly inside (0, 1)");
  const int a = static_cast<int>(std::floor(ratio * action_space));
  return std::min(a, action_space - 1);
}

RatioOutput hygro_forward(const BipartiteState& state, const HygroParams& params,
                          bool is_root) {
  const Slices s = slice_params(params);
  const EmbeddedState es = embed_state(state, params);
  ensure_finite(es.cons.data, "embedding");
  ensure_finite(es.vars.data, "embedding");
  ensure_finite(es.edges.data, "embedding");
  ensure_finite(es.statics, "embedding");

  const Mat cons2 =
      graph_conv(es.vars, es.cons, state.edge_var, state.edge_cons, es.edges, s.conv_cons);
  ensure_finite(cons2.data, "constraint convolution");
  const Mat vars2 =
      graph_conv(cons2, es.vars, state.edge_cons, state.edge_var, es.edges, s.conv_vars);
  ensure_finite(vars2.data, "variable convolution");

  const std::vector<double> ca = pna_aggregate(cons2);
  const std::vector<double> va = pna_aggregate(vars2);

  Mat h(1, static_cast<int>(va.size() + ca.size() + es.statics.size()));
  std::size_t pos = 0;
  for (double v : va) h.data[pos++] = v;
  for (double v : ca) h.data[pos++] = v;
  for (double v : es.statics) h.data[pos++] = v;

  for (std::size_t l = 0; l < s.mlp_w.size(); ++l) {
    h = affine(h, s.mlp_w[l], s.mlp_b[l]);
    if (l + 1 < s.mlp_w.size())
      for (double& v : h.data) v = std::max(0.0, v);
    if (!std::isfinite(h.data[0]))
      throw MilpError("non-finite value in mlp layer " + std::to_string(l));
  }

  double ratio = 0.5 * std::tanh(h.data[0]) + 0.5;
  ratio = std::clamp(ratio, kRatioClamp, 1.0 - kRatioClamp);
  RatioOutput out;
  out.is_root = is_root;
  if (!is_root) ratio *= params.config.gamma;
  out.ratio = ratio;
  out.action = action_from_ratio(ratio, params.config.action_space);
  return out;
}

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(buf, bits);
}

class Reader {
 public:
  Reader(const std::string& buf) : buf_(buf) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
    return v;
  }

  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  std::size_t pos() const { return pos_; }

 private:
  unsigned char byte() { return static_cast<unsigned char>(buf_[pos_++]); }
  void need(std::size_t n) {
    if (pos_ + n > buf_.size()) throw MilpError("checkpoint file truncated");
  }

  const std::string& buf_;
  std::size_t pos_ = 0;
};

std::uint64_t fnv64(const char* data, std::size_t len) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

void save_checkpoint(const HygroParams& params, const std::string& path) {
  if (params.theta.size() != param_count(params.config))
    throw MilpError("refusing to save: parameter vector does not match metadata");
  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  put_u32(buf, kVersion);
  const HygroConfig& c = params.config;
  put_u32(buf, static_cast<std::uint32_t>(c.cons_features));
  put_u32(buf, static_cast<std::uint32_t>(c.var_features));
  put_u32(buf, static_cast<std::uint32_t>(c.static_features));
  put_u32(buf, static_cast<std::uint32_t>(c.embed_dim));
  put_u32(buf, static_cast<std::uint32_t>(c.hidden.size()));
  for (int h : c.hidden) put_u32(buf, static_cast<std::uint32_t>(h));
  put_f64(buf, c.gamma);
  put_u32(buf, static_cast<std::uint32_t>(c.action_space));
  put_u64(buf, params.theta.size());
  for (double v : params.theta) put_f64(buf, v);
  put_u64(buf, fnv64(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw MilpError("cannot write checkpoint " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

HygroParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MilpError("cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  if (buf.size() < sizeof(kMagic) + 12 + 8)
    throw MilpError("checkpoint file truncated");
  // trailing 8 bytes hold the checksum of everything before them
  const std::uint64_t expect = fnv64(buf.data(), buf.size() - 8);
  std::uint64_t file_sum = 0;
  for (int i = 0; i < 8; ++i)
    file_sum |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[buf.size() - 8 + i]))
                << (8 * i);
  if (file_sum != expect) throw MilpError("checkpoint checksum mismatch");

  if (std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    throw MilpError("not a checkpoint file");
  Reader r(buf);
  r.u64();  // skip magic
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw MilpError("unsupported checkpoint version " + std::to_string(version));

  HygroConfig c;
  c.cons_features = static_cast<int>(r.u32());
  c.var_features = static_cast<int>(r.u32());
  c.static_features = static_cast<int>(r.u32());
  c.embed_dim = static_cast<int>(r.u32());
  const std::uint32_t hidden_count = r.u32();
  if (hidden_count > 64) throw MilpError("implausible hidden layer count");
  c.hidden.clear();
  for (std::uint32_t i = 0; i < hidden_count; ++i) c.hidden.push_back(static_cast<int>(r.u32()));
  c.gamma = r.f64();
  c.action_space = static_cast<int>(r.u32());

  const std::uint64_t count = r.u64();
  if (count != param_count(c))
    throw MilpError("checkpoint length field does not match its metadata");
  if (buf.size() != r.pos() + count * 8 + 8)
    throw MilpError("checkpoint payload size mismatch");

  HygroParams params;
  params.config = c;
  params.theta.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) params.theta[i] = r.f64();
  return params;
}

}  // namespace cutstop
