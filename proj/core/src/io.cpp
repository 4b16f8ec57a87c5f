#include "conereg/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

namespace conereg {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Raw (unflattened) width of one block: semidefinite blocks count n*n
// row-major entries, everything else its vector length.
int raw_dim(const ConeBlock& blk) {
  return blk.kind == ConeClass::Psd ? blk.n * blk.n : blk.n;
}

int raw_dim(const ConeSpec& spec) {
  int d = 0;
  for (const ConeBlock& blk : spec.blocks) d += raw_dim(blk);
  return d;
}

// Accepts a coordinate list in either flattened-scaled or raw row-major
// convention and returns flattened coordinates.
Vector to_flat(const ConeSpec& spec, const std::vector<double>& vals, const char* what) {
  const int flat = spec.ambient_dim();
  const int raw = raw_dim(spec);
  if (static_cast<int>(vals.size()) == flat) {
    Vector v(flat);
    for (int i = 0; i < flat; ++i) v(i) = vals[i];
    return v;
  }
  if (static_cast<int>(vals.size()) == raw) {
    Vector v(flat);
    int rpos = 0;
    int fpos = 0;
    for (const ConeBlock& blk : spec.blocks) {
      if (blk.kind == ConeClass::Psd) {
        Matrix s(blk.n, blk.n);
        for (int i = 0; i < blk.n; ++i)
          for (int j = 0; j < blk.n; ++j) s(i, j) = vals[rpos + i * blk.n + j];
        v.segment(fpos, blk.ambient_dim()) = svec(Matrix(0.5 * (s + s.transpose())));
      } else {
        for (int i = 0; i < blk.n; ++i) v(fpos + i) = vals[rpos + i];
      }
      rpos += raw_dim(blk);
      fpos += blk.ambient_dim();
    }
    return v;
  }
  std::ostringstream msg;
  msg << what << ": coordinate list has length " << vals.size() << "; expected " << flat
      << " (flattened) or " << raw << " (raw row-major)";
  throw std::invalid_argument(msg.str());
}

std::vector<double> json_number_list(const json& arr, const char* what) {
  if (!arr.is_array()) throw std::invalid_argument(std::string(what) + ": expected an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const json& v : arr) {
    if (!v.is_number()) throw std::invalid_argument(std::string(what) + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

const char* to_string(ProblemFormat f) {
  switch (f) {
    case ProblemFormat::SdpaSparse: return "sdpa_sparse";
    case ProblemFormat::ConeJson: return "cone_json";
  }
  return "cone_json";
}

// --- sparse format -------------------------------------------------------------

ParsedProblem parse_sdpa(const std::string& text, const std::string& name) {
  // Tokenize: comment lines start with " or *; separators include commas,
  // braces, and parentheses on the structural lines.
  std::vector<std::string> tokens;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const char c = line[first];
    if (c == '"' || c == '*' || c == '\'') continue;
    for (char& ch : line)
      if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }

  size_t pos = 0;
  auto next_int = [&](const char* what) {
    if (pos >= tokens.size())
      throw std::invalid_argument(std::string("parse_sdpa: missing ") + what);
    try {
      size_t used = 0;
      const long v = std::stol(tokens[pos], &used);
      if (used != tokens[pos].size()) throw std::invalid_argument("");
      ++pos;
      return static_cast<int>(v);
    } catch (...) {
      throw std::invalid_argument(std::string("parse_sdpa: malformed ") + what + " '" +
                                  tokens[pos] + "'");
    }
  };
  auto next_double = [&](const char* what) {
    if (pos >= tokens.size())
      throw std::invalid_argument(std::string("parse_sdpa: missing ") + what);
    try {
      size_t used = 0;
      const double v = std::stod(tokens[pos], &used);
      if (used != tokens[pos].size()) throw std::invalid_argument("");
      ++pos;
      return v;
    } catch (...) {
      throw std::invalid_argument(std::string("parse_sdpa: malformed ") + what + " '" +
                                  tokens[pos] + "'");
    }
  };

  const int m = next_int("equality count");
  if (m < 1) throw std::invalid_argument("parse_sdpa: equality count must be >= 1");
  const int nblocks = next_int("block count");
  if (nblocks < 1) throw std::invalid_argument("parse_sdpa: block count must be >= 1");

  ConeSpec spec;
  for (int b = 0; b < nblocks; ++b) {
    const int sz = next_int("block size");
    if (sz == 0) throw std::invalid_argument("parse_sdpa: block size must be nonzero");
    if (sz < 0)
      spec.blocks.push_back({ConeClass::Orthant, -sz});
    else
      spec.blocks.push_back({ConeClass::Psd, sz});
  }
  spec.validate();

  Vector b(m);
  for (int i = 0; i < m; ++i) b(i) = next_double("right-hand-side value");

  const int ad = spec.ambient_dim();
  Matrix A = Matrix::Zero(m, ad);
  Vector objective = Vector::Zero(ad);
  std::map<std::tuple<int, int, int, int>, double> seen;

  if ((tokens.size() - pos) % 5 != 0)
    throw std::invalid_argument("parse_sdpa: trailing tokens do not form entry 5-tuples");
  while (pos < tokens.size()) {
    const int matno = next_int("entry matrix number");
    const int blkno = next_int("entry block number");
    int i = next_int("entry row index");
    int j = next_int("entry column index");
    const double v = next_double("entry value");
    if (matno < 0 || matno > m)
      throw std::invalid_argument("parse_sdpa: matrix number " + std::to_string(matno) +
                                  " out of range [0, " + std::to_string(m) + "]");
    if (blkno < 1 || blkno > nblocks)
      throw std::invalid_argument("parse_sdpa: block number " + std::to_string(blkno) +
                                  " out of range");
    const ConeBlock& blk = spec.blocks[blkno - 1];
    if (i < 1 || i > blk.n || j < 1 || j > blk.n)
      throw std::invalid_argument("parse_sdpa: entry index (" + std::to_string(i) + "," +
                                  std::to_string(j) + ") outside block of size " +
                                  std::to_string(blk.n));
    if (blk.kind == ConeClass::Orthant && i != j)
      throw std::invalid_argument(
          "parse_sdpa: off-diagonal entry in a diagonal block (block " +
          std::to_string(blkno) + ", entry " + std::to_string(i) + "," +
          std::to_string(j) + ")");
    if (i > j) std::swap(i, j);

    const auto key = std::make_tuple(matno, blkno, i, j);
    const auto it = seen.find(key);
    if (it != seen.end()) {
      if (it->second != v)
        throw std::invalid_argument("parse_sdpa: conflicting duplicate entry for matrix " +
                                    std::to_string(matno) + ", block " +
                                    std::to_string(blkno) + ", position " +
                                    std::to_string(i) + "," + std::to_string(j) + ": " +
                                    fmt_double(it->second) + " vs " + fmt_double(v));
      continue;  // exact duplicate (e.g. an explicitly mirrored entry)
    }
    seen.emplace(key, v);

    const int off = spec.block_offset(blkno - 1);
    int flat;
    double coeff;
    if (blk.kind == ConeClass::Orthant) {
      flat = off + (i - 1);
      coeff = v;
    } else {
      // Flattened scaled coordinates: the off-diagonal carries sqrt(2) so
      // the Euclidean pairing equals the trace pairing of the matrices.
      const int ii = i - 1, jj = j - 1;
      flat = off + jj * (jj + 1) / 2 + ii;
      coeff = ii == jj ? v : v * std::sqrt(2.0);
    }
    if (matno == 0)
      objective(flat) = coeff;
    else
      A(matno - 1, flat) = coeff;
  }

  ParsedProblem out;
  out.system = make_system(spec, std::move(A), std::move(b), name);
  out.format = ProblemFormat::SdpaSparse;
  out.objective = std::move(objective);
  return out;
}

// --- JSON format ----------------------------------------------------------------

ParsedProblem parse_cone_json(const std::string& text, const std::string& name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("parse_cone_json: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("parse_cone_json: expected a JSON object");

  ConeSpec spec;
  if (!j.contains("cones") || !j["cones"].is_array() || j["cones"].empty())
    throw std::invalid_argument("parse_cone_json: missing or empty 'cones' array");
  for (const json& c : j["cones"]) {
    if (!c.is_object() || !c.contains("type"))
      throw std::invalid_argument("parse_cone_json: each cone needs a 'type'");
    const std::string type = c["type"].get<std::string>();
    int n = c.value("n", type == "exp" ? 3 : 0);
    if (type == "orthant")
      spec.blocks.push_back({ConeClass::Orthant, n});
    else if (type == "psd")
      spec.blocks.push_back({ConeClass::Psd, n});
    else if (type == "soc")
      spec.blocks.push_back({ConeClass::SecondOrder, n});
    else if (type == "exp") {
      if (n != 3)
        throw std::invalid_argument("parse_cone_json: exponential blocks have n = 3");
      spec.blocks.push_back({ConeClass::Exponential, 3});
    } else
      throw std::invalid_argument("parse_cone_json: unknown cone type '" + type + "'");
  }
  spec.validate();
  const int ad = spec.ambient_dim();

  if (!j.contains("b")) throw std::invalid_argument("parse_cone_json: missing 'b'");
  const std::vector<double> bvals = json_number_list(j["b"], "parse_cone_json: b");
  const int m = static_cast<int>(bvals.size());
  Vector b(m);
  for (int i = 0; i < m; ++i) b(i) = bvals[i];

  if (!j.contains("A")) throw std::invalid_argument("parse_cone_json: missing 'A'");
  Matrix A;
  if (j["A"].is_array()) {
    if (static_cast<int>(j["A"].size()) != m)
      throw std::invalid_argument("parse_cone_json: 'A' row count does not match 'b'");
    A.resize(m, ad);
    for (int i = 0; i < m; ++i)
      A.row(i) = to_flat(spec, json_number_list(j["A"][i], "parse_cone_json: A row"),
                         "parse_cone_json: A row")
                     .transpose();
  } else if (j["A"].is_object()) {
    const json& t = j["A"];
    if (!t.contains("rows") || !t.contains("cols") || !t.contains("entries"))
      throw std::invalid_argument(
          "parse_cone_json: triplet 'A' needs 'rows', 'cols', 'entries'");
    const int rows = t["rows"].get<int>();
    const int cols = t["cols"].get<int>();
    if (rows != m)
      throw std::invalid_argument("parse_cone_json: 'A' row count does not match 'b'");
    if (cols != ad && cols != raw_dim(spec))
      throw std::invalid_argument("parse_cone_json: 'A' column count matches neither the "
                                  "flattened nor the raw dimension");
    Matrix raw = Matrix::Zero(rows, cols);
    for (const json& e : t["entries"]) {
      if (!e.is_array() || e.size() != 3)
        throw std::invalid_argument("parse_cone_json: entries are [row, col, value]");
      const int r = e[0].get<int>();
      const int c = e[1].get<int>();
      if (r < 0 || r >= rows || c < 0 || c >= cols)
        throw std::invalid_argument("parse_cone_json: entry index out of range");
      raw(r, c) = e[2].get<double>();
    }
    A.resize(m, ad);
    for (int i = 0; i < m; ++i) {
      std::vector<double> vals(cols);
      for (int c = 0; c < cols; ++c) vals[c] = raw(i, c);
      A.row(i) = to_flat(spec, vals, "parse_cone_json: A row").transpose();
    }
  } else {
    throw std::invalid_argument("parse_cone_json: 'A' must be an array or a triplet object");
  }

  ParsedProblem out;
  const std::string sysname = j.value("name", name);
  out.system = make_system(spec, std::move(A), std::move(b), sysname);
  out.format = ProblemFormat::ConeJson;
  out.objective = Vector::Zero(ad);
  if (j.contains("objective"))
    out.objective = to_flat(spec, json_number_list(j["objective"], "parse_cone_json: objective"),
                            "parse_cone_json: objective");

  if (j.contains("points")) {
    for (const json& p : j["points"])
      out.points.push_back(point_from_ambient(
          out.system.cone,
          to_flat(out.system.cone, json_number_list(p, "parse_cone_json: point"),
                  "parse_cone_json: point")));
  }
  if (j.contains("candidates")) {
    for (const json& c : j["candidates"]) {
      const std::vector<double> vals = json_number_list(c, "parse_cone_json: candidate");
      if (static_cast<int>(vals.size()) != m)
        throw std::invalid_argument(
            "parse_cone_json: candidate length does not match the equality count");
      Vector y(m);
      for (int i = 0; i < m; ++i) y(i) = vals[i];
      out.candidates.push_back(std::move(y));
    }
  }
  return out;
}

ParsedProblem load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("load_problem: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string base = path;
  const size_t slash = base.find_last_of("/\\");
  if (slash != std::string::npos) base = base.substr(slash + 1);
  if (path.size() >= 6 && path.substr(path.size() - 6) == ".dat-s")
    return parse_sdpa(buf.str(), base);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
    return parse_cone_json(buf.str(), base);
  throw std::invalid_argument("load_problem: unrecognized extension on '" + path +
                              "' (expected .dat-s or .json)");
}

// --- writers ---------------------------------------------------------------------

std::string write_sdpa(const ParsedProblem& p) {
  const ConicSystem& sys = p.system;
  for (const ConeBlock& blk : sys.cone.blocks)
    if (blk.kind != ConeClass::Orthant && blk.kind != ConeClass::Psd)
      throw std::invalid_argument(
          "write_sdpa: only orthant and semidefinite blocks are representable");
  std::ostringstream out;
  out << sys.m() << "\n" << sys.cone.blocks.size() << "\n";
  for (size_t bi = 0; bi < sys.cone.blocks.size(); ++bi) {
    const ConeBlock& blk = sys.cone.blocks[bi];
    out << (bi ? " " : "") << (blk.kind == ConeClass::Orthant ? -blk.n : blk.n);
  }
  out << "\n";
  for (int i = 0; i < sys.m(); ++i) out << (i ? " " : "") << fmt_double(sys.b(i));
  out << "\n";

  auto emit_matrix = [&](int matno, const Vector& flat) {
    for (size_t bi = 0; bi < sys.cone.blocks.size(); ++bi) {
      const ConeBlock& blk = sys.cone.blocks[bi];
      const int off = sys.cone.block_offset(static_cast<int>(bi));
      if (blk.kind == ConeClass::Orthant) {
        for (int i = 0; i < blk.n; ++i) {
          const double v = flat(off + i);
          if (v != 0.0)
            out << matno << " " << bi + 1 << " " << i + 1 << " " << i + 1 << " "
                << fmt_double(v) << "\n";
        }
      } else {
        for (int jj = 0; jj < blk.n; ++jj)
          for (int ii = 0; ii <= jj; ++ii) {
            double v = flat(off + jj * (jj + 1) / 2 + ii);
            if (ii != jj) v /= std::sqrt(2.0);
            if (v != 0.0)
              out << matno << " " << bi + 1 << " " << ii + 1 << " " << jj + 1 << " "
                  << fmt_double(v) << "\n";
          }
      }
    }
  };
  if (p.objective.size() == sys.dim()) emit_matrix(0, p.objective);
  for (int i = 0; i < sys.m(); ++i) emit_matrix(i + 1, Vector(sys.A.row(i).transpose()));
  return out.str();
}

std::string write_cone_json(const ParsedProblem& p) {
  const ConicSystem& sys = p.system;
  ordered_json j;
  if (!sys.name.empty()) j["name"] = sys.name;
  j["cones"] = ordered_json::array();
  for (const ConeBlock& blk : sys.cone.blocks) {
    ordered_json c;
    switch (blk.kind) {
      case ConeClass::Orthant: c["type"] = "orthant"; break;
      case ConeClass::Psd: c["type"] = "psd"; break;
      case ConeClass::SecondOrder: c["type"] = "soc"; break;
      case ConeClass::Exponential: c["type"] = "exp"; break;
    }
    c["n"] = blk.n;
    j["cones"].push_back(c);
  }
  auto row_to_json = [&](const Vector& v) {
    ordered_json a = ordered_json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
  };
  j["A"] = ordered_json::array();
  for (int i = 0; i < sys.m(); ++i)
    j["A"].push_back(row_to_json(Vector(sys.A.row(i).transpose())));
  j["b"] = row_to_json(sys.b);
  if (p.objective.size() == sys.dim() && p.objective.norm() > 0.0)
    j["objective"] = row_to_json(p.objective);
  if (!p.points.empty()) {
    j["points"] = ordered_json::array();
    for (const Point& pt : p.points)
      j["points"].push_back(row_to_json(point_to_ambient(sys.cone, pt)));
  }
  if (!p.candidates.empty()) {
    j["candidates"] = ordered_json::array();
    for (const Vector& c : p.candidates) j["candidates"].push_back(row_to_json(c));
  }
  return j.dump(2) + "\n";
}

std::vector<Point> parse_points_json(const std::string& text, const ConeSpec& spec) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("parse_points_json: ") + e.what());
  }
  const json* arr = &j;
  if (j.is_object() && j.contains("points")) arr = &j["points"];
  if (!arr->is_array())
    throw std::invalid_argument("parse_points_json: expected an array of points");
  std::vector<Point> pts;
  for (const json& p : *arr)
    pts.push_back(point_from_ambient(
        spec, to_flat(spec, json_number_list(p, "parse_points_json: point"),
                      "parse_points_json: point")));
  return pts;
}

}  // namespace conereg
