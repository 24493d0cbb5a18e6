#pragma once

#include <iosfwd>
#include <string>

#include "cutstop/milp.hpp"

namespace cutstop {

// JSON instance schema:
//   {name, sense: "min"|"max", objective: [..],
//    rows: [{coeffs: {"col": val, ...}, rhs, sense?: "<="|">="|"="}],
//    integer_set: [..], bounds: [[lo, hi], ...]}
// Bounds accept numbers or the strings "inf"/"-inf".
MilpInstance parse_instance_json(const std::string& text);
std::string instance_to_json(const MilpInstance& inst);

MilpInstance read_instance_json(const std::string& path);
void write_instance_json(const MilpInstance& inst, const std::string& path);

// Minimal MPS subset: NAME, OBJSENSE, ROWS, COLUMNS (with INTORG/INTEND
// markers), RHS, BOUNDS, ENDATA; token-based so both fixed-field and
// free-form files parse. RANGES is rejected.
MilpInstance parse_instance_mps(std::istream& in, const std::string& name_hint = {});
MilpInstance read_instance_mps(const std::string& path);

// Dispatches on the file extension (.json or .mps/.mps.txt).
MilpInstance read_instance(const std::string& path);

}  // namespace cutstop
