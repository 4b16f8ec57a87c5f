#pragma once

// Problem ingestion and writing: the sparse semidefinite exchange format
// (.dat-s) and a JSON mixed-cone format that can also carry test points and
// multiplier candidates. Writers produce a normalized form that parses back
// to the identical system.

#include <string>
#include <vector>

#include "conereg/auxcert.hpp"
#include "conereg/cones.hpp"

namespace conereg {

enum class ProblemFormat { SdpaSparse, ConeJson };
const char* to_string(ProblemFormat f);

struct ParsedProblem {
  ConicSystem system;
  ProblemFormat format = ProblemFormat::ConeJson;
  Vector objective;                // flattened objective block data; zero if absent
  std::vector<Point> points;       // optional test points
  std::vector<Vector> candidates;  // optional multipliers for certificate search
};

// Sparse format: comment lines start with " or *; then the number of
// equalities, the number of blocks, the block sizes (negative size k means a
// diagonal block, read as Orthant(k)), the right-hand-side line, and entry
// lines "matno blkno i j value". Entries with matno 0 belong to the
// objective block data, kept as metadata only. Symmetric entries are
// mirrored; conflicting duplicates and off-diagonal entries in diagonal
// blocks are errors. Constraints without entries yield zero rows (the
// system is then flagged non-surjective).
ParsedProblem parse_sdpa(const std::string& text, const std::string& name = "");

// JSON object: {"cones": [{"type": "orthant"|"psd"|"soc"|"exp", "n": int}],
// "A": dense rows or {"rows", "cols", "entries": [[i,j,v]...]} (0-based),
// "b": [...], optional "name", "objective", "points", "candidates"}.
// Semidefinite segments of rows/points may be given either in flattened
// scaled coordinates (length n(n+1)/2) or as raw row-major n*n matrices,
// detected by total length; raw matrices are symmetrized.
ParsedProblem parse_cone_json(const std::string& text, const std::string& name = "");

// Dispatch by extension: ".dat-s" sparse, ".json" JSON.
ParsedProblem load_problem(const std::string& path);

std::string write_sdpa(const ParsedProblem& p);
std::string write_cone_json(const ParsedProblem& p);

// Parses a JSON array of points (same coordinate conventions as "points").
std::vector<Point> parse_points_json(const std::string& text, const ConeSpec& spec);

}  // namespace conereg
