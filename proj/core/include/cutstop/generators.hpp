#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cutstop/milp.hpp"

namespace cutstop {

enum class Family { SetCover, MultiKnapsack, Mis };

Family family_from_string(const std::string& name);
std::string_view to_string(Family family);

struct GeneratorConfig {
  Family family = Family::SetCover;
  int rows = 20;      // set cover: coverage constraints
  int cols = 40;      // set cover: columns
  double density = 0.2;
  int items = 20;     // knapsack: items
  int knapsacks = 2;  // knapsack: sacks
  int nodes = 25;     // mis: graph nodes
  int affinity = 4;   // mis: attachments per new node
  int count = 1;
  std::uint64_t seed = 0;
};

// Set covering: minimize sum c_j x_j with c_j uniform in [1,100], every
// element covered by >= 2 columns, x binary. Feasible by construction.
MilpInstance gen_set_cover(int n_rows, int n_cols, double density, std::uint64_t seed);

// Multiple knapsack: binary assignment variables, one capacity row per
// knapsack with capacities ceil(total_weight / (2 * sacks)), one
// at-most-one row per item, profit maximization (ingested as minimize).
MilpInstance gen_multi_knapsack(int n_items, int n_knapsacks, std::uint64_t seed);

// Maximum independent set on a Barabasi-Albert style random graph: one
// x_u + x_v <= 1 row per edge, cardinality maximization.
MilpInstance gen_mis(int n_nodes, int affinity, std::uint64_t seed);

// Dispatch on config.family; `index` offsets the seed for batch generation.
MilpInstance generate(const GeneratorConfig& config, int index = 0);

}  // namespace cutstop
