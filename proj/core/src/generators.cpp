#include "cutstop/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "cutstop/rng.hpp"

namespace cutstop {

Family family_from_string(const std::string& name) {
  if (name == "set_cover" || name == "setcover") return Family::SetCover;
  if (name == "multi_knapsack" || name == "knapsack") return Family::MultiKnapsack;
  if (name == "mis") return Family::Mis;
  throw MilpError("unknown instance family '" + name + "'");
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::SetCover: return "set_cover";
    case Family::MultiKnapsack: return "multi_knapsack";
    case Family::Mis: return "mis";
  }
  return "unknown";
}

MilpInstance gen_set_cover(int n_rows, int n_cols, double density, std::uint64_t seed) {
  if (n_rows < 1 || n_cols < 2) throw MilpError("set cover needs >= 1 row and >= 2 columns");
  if (!(density > 0.0) || density > 1.0) throw MilpError("density must be in (0, 1]");
  Rng rng(seed);

  std::vector<double> objective(n_cols);
  for (double& c : objective) c = static_cast<double>(rng.uniform_int(1, 100));

  std::vector<SparseRow> rows(n_rows);
  std::vector<RowSense> senses(n_rows, RowSense::GreaterEqual);
  for (int i = 0; i < n_rows; ++i) {
    std::set<int> cover;
    for (int j = 0; j < n_cols; ++j)
      if (rng.uniform() < density) cover.insert(j);
    while (cover.size() < 2)  // guarantee every element is coverable twice
      cover.insert(static_cast<int>(rng.uniform_int(0, n_cols - 1)));
    for (int j : cover) {
      rows[i].index.push_back(j);
      rows[i].value.push_back(1.0);
    }
    rows[i].rhs = 1.0;
  }

  std::vector<int> integers(n_cols);
  std::iota(integers.begin(), integers.end(), 0);
  std::vector<std::pair<double, double>> bounds(n_cols, {0.0, 1.0});
  return build_instance(std::move(objective), std::move(rows), std::move(senses),
                        std::move(integers), std::move(bounds), false,
                        "set_cover_" + std::to_string(seed));
}

MilpInstance gen_multi_knapsack(int n_items, int n_knapsacks, std::uint64_t seed) {
  if (n_knapsacks < 1 || n_items < n_knapsacks)
    throw MilpError("knapsack generator needs items >= knapsacks >= 1");
  Rng rng(seed);

  std::vector<double> weight(n_items), profit(n_items);
  double total_weight = 0.0;
  for (int i = 0; i < n_items; ++i) {
    weight[i] = static_cast<double>(rng.uniform_int(1, 100));
    profit[i] = static_cast<double>(rng.uniform_int(1, 100));
    total_weight += weight[i];
  }
  const double capacity = std::ceil(total_weight / (2.0 * n_knapsacks));

  const int n_vars = n_items * n_knapsacks;  // x[i,k] = item i into sack k
  const auto var = [&](int item, int sack) { return item * n_knapsacks + sack; };

  std::vector<double> objective(n_vars);
  for (int i = 0; i < n_items; ++i)
    for (int k = 0; k < n_knapsacks; ++k) objective[var(i, k)] = profit[i];

  std::vector<SparseRow> rows;
  for (int k = 0; k < n_knapsacks; ++k) {
    SparseRow cap;
    for (int i = 0; i < n_items; ++i) {
      cap.index.push_back(var(i, k));
      cap.value.push_back(weight[i]);
    }
    cap.rhs = capacity;
    rows.push_back(std::move(cap));
  }
  for (int i = 0; i < n_items; ++i) {  // each item placed at most once
    SparseRow once;
    for (int k = 0; k < n_knapsacks; ++k) {
      once.index.push_back(var(i, k));
      once.value.push_back(1.0);
    }
    once.rhs = 1.0;
    rows.push_back(std::move(once));
  }

  std::vector<int> integers(n_vars);
  std::iota(integers.begin(), integers.end(), 0);
  std::vector<std::pair<double, double>> bounds(n_vars, {0.0, 1.0});
  return build_instance(std::move(objective), std::move(rows), {},
                        std::move(integers), std::move(bounds), /*maximize=*/true,
                        "multi_knapsack_" + std::to_string(seed));
}

MilpInstance gen_mis(int n_nodes, int affinity, std::uint64_t seed) {
  if (n_nodes < 2) throw MilpError("mis generator needs >= 2 nodes");
  if (affinity < 1) throw MilpError("affinity must be >= 1");
  Rng rng(seed);

  // Barabasi-Albert style preferential attachment: new nodes connect to
  // `affinity` distinct earlier nodes, degree-weighted.
  const int core = std::min(n_nodes, affinity + 1);
  std::set<std::pair<int, int>> edges;
  std::vector<int> degree(n_nodes, 0);
  std::vector<int> endpoints;  // degree-weighted sampling pool
  for (int u = 0; u < core; ++u)
    for (int v = u + 1; v < core; ++v) {
      edges.emplace(u, v);
      ++degree[u];
      ++degree[v];
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  for (int u = core; u < n_nodes; ++u) {
    std::set<int> targets;
    int guard = 0;
    while (static_cast<int>(targets.size()) < std::min(affinity, u) && guard++ < 50 * affinity) {
      int v;
      if (!endpoints.empty() && rng.uniform() < 0.9)
        v = endpoints[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(endpoints.size()) - 1))];
      else
        v = static_cast<int>(rng.uniform_int(0, u - 1));
      if (v != u) targets.insert(v);
    }
    for (int v : targets) {
      edges.emplace(std::min(u, v), std::max(u, v));
      ++degree[u];
      ++degree[v];
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }

  std::vector<double> objective(n_nodes, 1.0);
  std::vector<SparseRow> rows;
  rows.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    SparseRow row;
    row.index = {u, v};
    row.value = {1.0, 1.0};
    row.rhs = 1.0;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw MilpError("mis generator produced no edges");

  std::vector<int> integers(n_nodes);
  std::iota(integers.begin(), integers.end(), 0);
  std::vector<std::pair<double, double>> bounds(n_nodes, {0.0, 1.0});
  return build_instance(std::move(objective), std::move(rows), {},
                        std::move(integers), std::move(bounds), /*maximize=*/true,
                        "mis_" + std::to_string(seed));
}

MilpInstance generate(const GeneratorConfig& config, int index) {
  const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(index);
  switch (config.family) {
    case Family::SetCover:
      return gen_set_cover(config.rows, config.cols, config.density, seed);
    case Family::MultiKnapsack:
      return gen_multi_knapsack(config.items, config.knapsacks, seed);
    case Family::Mis:
      return gen_mis(config.nodes, config.affinity, seed);
  }
  throw MilpError("unknown family");
}

}  // namespace cutstop
