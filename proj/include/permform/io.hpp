#pragma once

// Instance parsers/writers (DIMACS graph, DIMACS CNF, TSPLIB subset, QAPLIB),
// canonical instance digests, and certificate JSON.

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "permform/core.hpp"
#include "permform/formulations.hpp"
#include "permform/problem.hpp"
#include "permform/sat.hpp"

namespace permform {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what, const std::string& file = {})
      : std::runtime_error((file.empty() ? "" : file + ": ") +
                           (line ? "line " + std::to_string(line) + ": " + what : what)),
        line_(line),
        detail_(what) {}

  /// 1-based source line, 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

enum class ParseMode { strict, lenient };

/// Warnings collected in lenient mode (each prefixed with its line).
using Diagnostics = std::vector<std::string>;

namespace detail {

struct Line {
  std::size_t number;
  std::string_view text;
};

inline std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t no = 1;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back({no++, line});
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

inline std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::int64_t parse_int(std::string_view tok, std::size_t line, const char* what) {
  std::int64_t v = 0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && tok.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec == std::errc::result_out_of_range)
    throw ParseError(line, std::string(what) + " '" + std::string(tok) + "' out of range");
  if (ec != std::errc() || ptr != last || first == last)
    throw ParseError(line, std::string("expected integer ") + what + ", got '" + std::string(tok) + "'");
  return v;
}

inline double parse_real(std::string_view tok, std::size_t line, const char* what) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && tok.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last || !std::isfinite(v))
    throw ParseError(line, std::string("expected number ") + what + ", got '" + std::string(tok) + "'");
  return v;
}

inline void mismatch(ParseMode mode, Diagnostics* diag, std::size_t line, const std::string& msg) {
  if (mode == ParseMode::strict) throw ParseError(line, msg);
  if (diag) diag->push_back("line " + std::to_string(line) + ": " + msg);
}

inline std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

constexpr std::int64_t kMaxVertices = 1 << 20;

}  // namespace detail

// ---------------------------------------------------------------------------
// DIMACS graphs

inline Graph parse_dimacs_graph(std::string_view text, ParseMode mode = ParseMode::strict,
                                Diagnostics* diag = nullptr) {
  std::optional<std::size_t> n;
  std::size_t declared_m = 0, header_line = 0, e_lines = 0;
  IntMatrix adj;
  for (const auto& [no, line] : detail::split_lines(text)) {
    const auto tok = detail::tokens(line);
    if (tok.empty() || tok[0] == "c") continue;
    if (tok[0] == "p") {
      if (n) throw ParseError(no, "duplicate problem line (first on line " + std::to_string(header_line) + ")");
      if (tok.size() != 4 || (tok[1] != "edge" && tok[1] != "col"))
        throw ParseError(no, "expected 'p edge <n> <m>'");
      const auto nv = detail::parse_int(tok[2], no, "vertex count");
      const auto mv = detail::parse_int(tok[3], no, "edge count");
      if (nv < 1 || nv > detail::kMaxVertices) throw ParseError(no, "vertex count must lie in 1.." + std::to_string(detail::kMaxVertices));
      if (mv < 0) throw ParseError(no, "edge count must be nonnegative");
      n = static_cast<std::size_t>(nv);
      declared_m = static_cast<std::size_t>(mv);
      header_line = no;
      adj = IntMatrix(*n, *n);
      continue;
    }
    if (tok[0] == "e") {
      if (!n) throw ParseError(no, "edge line before the problem line");
      if (tok.size() != 3) throw ParseError(no, "expected 'e <u> <v>'");
      const auto u = detail::parse_int(tok[1], no, "vertex");
      const auto v = detail::parse_int(tok[2], no, "vertex");
      for (auto x : {u, v})
        if (x < 1 || static_cast<std::size_t>(x) > *n)
          throw ParseError(no, "vertex " + std::to_string(x) + " outside 1.." + std::to_string(*n));
      if (u == v) throw ParseError(no, "self-loop on vertex " + std::to_string(u));
      adj(static_cast<std::size_t>(u - 1), static_cast<std::size_t>(v - 1)) = 1;
      adj(static_cast<std::size_t>(v - 1), static_cast<std::size_t>(u - 1)) = 1;
      ++e_lines;
      continue;
    }
    throw ParseError(no, "unrecognized line type '" + std::string(tok[0]) + "'");
  }
  if (!n) throw ParseError(0, "missing 'p edge' problem line");
  if (e_lines != declared_m)
    detail::mismatch(mode, diag, header_line,
                     "header declares " + std::to_string(declared_m) + " edges, found " +
                         std::to_string(e_lines));
  return Graph(std::move(adj));
}

/// Canonical form: header plus the sorted edge list, u < v.
inline std::string write_dimacs_graph(const Graph& g) {
  std::ostringstream out;
  const auto edges = g.edges();
  out << "p edge " << g.size() << ' ' << edges.size() << '\n';
  for (const auto& [u, v] : edges) out << "e " << u << ' ' << v << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// DIMACS CNF

inline SatInstance parse_dimacs_cnf(std::string_view text, ParseMode mode = ParseMode::strict,
                                    Diagnostics* diag = nullptr) {
  std::optional<std::size_t> n;
  std::size_t declared_m = 0, header_line = 0, clause_line = 0;
  SatInstance inst;
  std::vector<int> clause;
  const auto close_clause = [&](std::size_t no) {
    if (clause.empty()) throw ParseError(no, "empty clause");
    for (std::size_t i = 0; i < clause.size(); ++i)
      for (std::size_t j = i + 1; j < clause.size(); ++j)
        if (clause[i] == -clause[j])
          throw ParseError(no, "tautological clause contains " + std::to_string(std::abs(clause[i])) +
                                   " and its negation");
    inst.clauses.push_back(std::move(clause));
    clause.clear();
  };
  std::size_t last_line = 0;
  for (const auto& [no, line] : detail::split_lines(text)) {
    last_line = no;
    const auto tok = detail::tokens(line);
    if (tok.empty() || tok[0] == "c") continue;
    if (tok[0] == "%") break;  // SATLIB trailer
    if (tok[0] == "p") {
      if (n) throw ParseError(no, "duplicate problem line (first on line " + std::to_string(header_line) + ")");
      if (tok.size() != 4 || tok[1] != "cnf") throw ParseError(no, "expected 'p cnf <vars> <clauses>'");
      const auto nv = detail::parse_int(tok[2], no, "variable count");
      const auto mv = detail::parse_int(tok[3], no, "clause count");
      if (nv < 0 || nv > detail::kMaxVertices) throw ParseError(no, "variable count out of range");
      if (mv < 0) throw ParseError(no, "clause count must be nonnegative");
      n = static_cast<std::size_t>(nv);
      declared_m = static_cast<std::size_t>(mv);
      header_line = no;
      inst.num_vars = *n;
      continue;
    }
    if (!n) throw ParseError(no, "clause data before the problem line");
    for (auto t : tok) {
      const auto lit = detail::parse_int(t, no, "literal");
      if (lit == 0) {
        close_clause(no);
        continue;
      }
      if (static_cast<std::size_t>(std::llabs(lit)) > *n)
        throw ParseError(no, "literal " + std::to_string(lit) + " outside +-1.." + std::to_string(*n));
      if (clause.empty()) clause_line = no;
      clause.push_back(static_cast<int>(lit));
    }
  }
  if (!n) throw ParseError(0, "missing 'p cnf' problem line");
  if (!clause.empty()) {
    detail::mismatch(mode, diag, clause_line, "last clause is not terminated by 0");
    close_clause(last_line);
  }
  if (inst.clauses.size() != declared_m)
    detail::mismatch(mode, diag, header_line,
                     "header declares " + std::to_string(declared_m) + " clauses, found " +
                         std::to_string(inst.clauses.size()));
  return inst;
}

/// Canonical form: header plus clauses as written.
inline std::string write_dimacs_cnf(const SatInstance& inst) {
  std::ostringstream out;
  out << "p cnf " << inst.num_vars << ' ' << inst.clauses.size() << '\n';
  for (const auto& c : inst.clauses) {
    for (int lit : c) out << lit << ' ';
    out << "0\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// TSPLIB (EUC_2D with NODE_COORD_SECTION, or EXPLICIT FULL_MATRIX)

inline TspInstance parse_tsplib(std::string_view text, ParseMode mode = ParseMode::strict,
                                Diagnostics* diag = nullptr) {
  const auto lines = detail::split_lines(text);
  std::map<std::string, std::string> spec;
  std::optional<std::size_t> n;
  std::string weight_type, weight_format;
  std::size_t i = 0;

  const auto upper = [](std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
  };
  const auto trim = [](std::string_view s) {
    while (!s.empty() && detail::is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && detail::is_space(s.back())) s.remove_suffix(1);
    return std::string(s);
  };
  // Consumes numeric tokens from following lines until `count` are read.
  const auto read_numbers = [&](std::size_t count, std::size_t header_no) {
    std::vector<std::pair<double, std::size_t>> out;
    while (out.size() < count && i < lines.size()) {
      const auto& [no, line] = lines[i];
      const auto tok = detail::tokens(line);
      if (!tok.empty() && (upper(std::string(tok[0])) == "EOF" || std::isalpha(static_cast<unsigned char>(tok[0][0]))))
        break;
      for (auto t : tok) out.emplace_back(detail::parse_real(t, no, "in data section"), no);
      ++i;
    }
    if (out.size() < count)
      throw ParseError(header_no, "section ends after " + std::to_string(out.size()) + " of " +
                                      std::to_string(count) + " values");
    if (out.size() > count) throw ParseError(out[count].second, "too many values in section");
    return out;
  };

  std::optional<RealMatrix> cost;
  while (i < lines.size()) {
    const auto& [no, line] = lines[i];
    const std::string trimmed = trim(line);
    ++i;
    if (trimmed.empty()) continue;
    const std::string key_upper = upper(trimmed);
    if (key_upper == "EOF") break;
    if (key_upper == "NODE_COORD_SECTION") {
      if (!n) throw ParseError(no, "NODE_COORD_SECTION before DIMENSION");
      if (weight_type != "EUC_2D") throw ParseError(no, "NODE_COORD_SECTION requires EDGE_WEIGHT_TYPE EUC_2D");
      const auto vals = read_numbers(3 * *n, no);
      std::vector<double> x(*n), y(*n);
      std::vector<bool> seen(*n, false);
      for (std::size_t r = 0; r < *n; ++r) {
        const double id = vals[3 * r].first;
        const std::size_t ln = vals[3 * r].second;
        if (id != std::floor(id) || id < 1 || id > static_cast<double>(*n))
          throw ParseError(ln, "node id must be an integer in 1.." + std::to_string(*n));
        const auto k = static_cast<std::size_t>(id) - 1;
        if (seen[k]) throw ParseError(ln, "duplicate node id " + std::to_string(k + 1));
        seen[k] = true;
        x[k] = vals[3 * r + 1].first;
        y[k] = vals[3 * r + 2].first;
      }
      RealMatrix c(*n, *n);
      for (std::size_t a = 0; a < *n; ++a)
        for (std::size_t b = 0; b < *n; ++b)
          if (a != b) c(a, b) = std::floor(std::hypot(x[a] - x[b], y[a] - y[b]) + 0.5);
      cost = std::move(c);
      continue;
    }
    if (key_upper == "EDGE_WEIGHT_SECTION") {
      if (!n) throw ParseError(no, "EDGE_WEIGHT_SECTION before DIMENSION");
      if (weight_type != "EXPLICIT" || weight_format != "FULL_MATRIX")
        throw ParseError(no, "EDGE_WEIGHT_SECTION supported only for EXPLICIT FULL_MATRIX");
      const auto vals = read_numbers(*n * *n, no);
      RealMatrix c(*n, *n);
      for (std::size_t a = 0; a < *n; ++a)
        for (std::size_t b = 0; b < *n; ++b) {
          const auto& [v, ln] = vals[a * *n + b];
          if (a == b) {
            if (v != 0.0)
              detail::mismatch(mode, diag, ln, "nonzero diagonal entry " + detail::format_real(v) + " treated as 0");
            continue;
          }
          if (v < 0.0) throw ParseError(ln, "negative edge weight");
          c(a, b) = v;
        }
      cost = std::move(c);
      continue;
    }
    if (key_upper.ends_with("_SECTION"))
      throw ParseError(no, "unsupported section '" + trimmed + "'");
    const std::size_t colon = trimmed.find(':');
    if (colon == std::string::npos) throw ParseError(no, "expected 'KEY : VALUE', got '" + trimmed + "'");
    const std::string key = upper(trim(std::string_view(trimmed).substr(0, colon)));
    const std::string value = trim(std::string_view(trimmed).substr(colon + 1));
    if (spec.count(key)) throw ParseError(no, "duplicate key " + key);
    spec[key] = value;
    if (key == "TYPE") {
      const auto t = upper(value);
      if (t != "TSP" && t != "ATSP") throw ParseError(no, "unsupported TYPE '" + value + "'");
    } else if (key == "DIMENSION") {
      const auto d = detail::parse_int(value, no, "DIMENSION");
      if (d < 2 || d > 100000) throw ParseError(no, "DIMENSION must lie in 2..100000");
      n = static_cast<std::size_t>(d);
    } else if (key == "EDGE_WEIGHT_TYPE") {
      weight_type = upper(value);
      if (weight_type != "EUC_2D" && weight_type != "EXPLICIT")
        throw ParseError(no, "unsupported EDGE_WEIGHT_TYPE '" + value + "'");
    } else if (key == "EDGE_WEIGHT_FORMAT") {
      weight_format = upper(value);
      if (weight_format != "FULL_MATRIX")
        throw ParseError(no, "unsupported EDGE_WEIGHT_FORMAT '" + value + "'");
    }
  }
  if (!n) throw ParseError(0, "missing DIMENSION");
  if (weight_type.empty()) throw ParseError(0, "missing EDGE_WEIGHT_TYPE");
  if (!cost) throw ParseError(0, "missing data section");
  return TspInstance{std::move(*cost)};
}

/// Canonical form: EXPLICIT FULL_MATRIX with shortest round-trip numbers.
inline std::string write_tsplib(const TspInstance& inst) {
  std::ostringstream out;
  const std::size_t n = inst.size();
  out << "TYPE: " << (inst.cost.is_symmetric() ? "TSP" : "ATSP") << '\n'
      << "DIMENSION: " << n << '\n'
      << "EDGE_WEIGHT_TYPE: EXPLICIT\n"
      << "EDGE_WEIGHT_FORMAT: FULL_MATRIX\n"
      << "EDGE_WEIGHT_SECTION\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out << (j ? " " : "") << detail::format_real(inst.cost(i, j));
    out << '\n';
  }
  out << "EOF\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// QAPLIB: n, then the n x n flow matrix, then the n x n distance matrix.

inline QapInstance parse_qaplib(std::string_view text) {
  std::vector<std::pair<std::string_view, std::size_t>> toks;
  for (const auto& [no, line] : detail::split_lines(text))
    for (auto t : detail::tokens(line)) toks.emplace_back(t, no);
  if (toks.empty()) throw ParseError(0, "empty QAPLIB input");
  const auto nv = detail::parse_int(toks[0].first, toks[0].second, "size");
  if (nv < 1 || nv > 10000) throw ParseError(toks[0].second, "size must lie in 1..10000");
  const auto n = static_cast<std::size_t>(nv);
  if (toks.size() != 1 + 2 * n * n)
    throw ParseError(toks.back().second, "expected " + std::to_string(2 * n * n) +
                                             " matrix entries, found " + std::to_string(toks.size() - 1));
  QapInstance q{RealMatrix(n, n), RealMatrix(n, n)};
  for (std::size_t k = 0; k < n * n; ++k) {
    q.flow.data()[k] = detail::parse_real(toks[1 + k].first, toks[1 + k].second, "flow entry");
    q.dist.data()[k] = detail::parse_real(toks[1 + n * n + k].first, toks[1 + n * n + k].second, "distance entry");
  }
  return q;
}

inline std::string write_qaplib(const QapInstance& q) {
  std::ostringstream out;
  const std::size_t n = q.size();
  out << n << "\n\n";
  for (const RealMatrix* m : {&q.flow, &q.dist}) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out << (j ? " " : "") << detail::format_real((*m)(i, j));
      out << '\n';
    }
    if (m == &q.flow) out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Canonical bytes and digests

inline std::string canonical_text(const Instance& inst) {
  struct {
    std::string operator()(const Graph& g) const { return write_dimacs_graph(g); }
    std::string operator()(const GraphPair& p) const {
      return write_dimacs_graph(p.first) + write_dimacs_graph(p.second);
    }
    std::string operator()(const TspInstance& t) const { return write_tsplib(t); }
    std::string operator()(const QapInstance& q) const { return write_qaplib(q); }
    std::string operator()(const SatInstance& s) const { return write_dimacs_cnf(s); }
  } visitor;
  return std::visit(visitor, inst);
}

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

inline std::string instance_digest(const Instance& inst) { return sha256_hex(canonical_text(inst)); }

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

/// Loads the instance a problem expects: DIMACS graph (GI: two of them),
/// TSPLIB, QAPLIB or DIMACS CNF. Parse errors name the file.
inline Instance load_instance(Problem p, const std::string& path,
                              const std::optional<std::string>& second = std::nullopt,
                              ParseMode mode = ParseMode::strict, Diagnostics* diag = nullptr) {
  const auto wrap = [&](const std::string& file, auto&& parse) {
    const std::string text = read_file(file);
    try {
      return parse(text);
    } catch (const ParseError& e) {
      throw ParseError(e.line(), e.detail(), file);
    }
  };
  switch (p) {
    case Problem::tsp:
      return wrap(path, [&](const std::string& t) { return parse_tsplib(t, mode, diag); });
    case Problem::qap: return wrap(path, [](const std::string& t) { return parse_qaplib(t); });
    case Problem::sat:
      return wrap(path, [&](const std::string& t) { return parse_dimacs_cnf(t, mode, diag); });
    case Problem::gi: {
      if (!second) throw std::invalid_argument("gi needs a second graph");
      auto g1 = wrap(path, [&](const std::string& t) { return parse_dimacs_graph(t, mode, diag); });
      auto g2 = wrap(*second, [&](const std::string& t) { return parse_dimacs_graph(t, mode, diag); });
      if (g1.size() != g2.size()) throw ParseError(0, "GI graphs have different vertex counts");
      return GraphPair{std::move(g1), std::move(g2)};
    }
    default:
      return wrap(path, [&](const std::string& t) { return parse_dimacs_graph(t, mode, diag); });
  }
}

// ---------------------------------------------------------------------------
// Certificates

class CertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Certificate {
  Problem problem = Problem::mis;
  std::string instance_digest;
  std::vector<std::int64_t> pi;  // 1-based
  std::optional<std::size_t> k;
  std::optional<std::vector<std::size_t>> blocks;
  double objective = 0.0;
  bool feasible = false;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

inline Certificate make_certificate(const Instance& inst, const CandidateSolution& c,
                                    const Evaluation& e) {
  Certificate cert;
  cert.problem = c.problem;
  cert.instance_digest = instance_digest(inst);
  for (int v : c.pi.one_based()) cert.pi.push_back(v);
  cert.k = c.k;
  cert.blocks = c.blocks;
  cert.objective = e.objective;
  cert.feasible = e.feasible;
  return cert;
}

/// Throws CertificateError if pi is not a permutation of 1..n.
inline CandidateSolution candidate_of(const Certificate& cert) {
  std::vector<std::size_t> img;
  for (auto v : cert.pi) {
    if (v < 1 || static_cast<std::size_t>(v) > cert.pi.size())
      throw CertificateError("pi entry " + std::to_string(v) + " outside 1.." + std::to_string(cert.pi.size()));
    img.push_back(static_cast<std::size_t>(v - 1));
  }
  CandidateSolution c;
  c.problem = cert.problem;
  try {
    c.pi = Permutation::from_zero_based(std::move(img));
  } catch (const InvalidPermutation& e) {
    throw CertificateError(std::string("pi is not a bijection: ") + e.what());
  }
  c.k = cert.k;
  c.blocks = cert.blocks;
  return c;
}

inline nlohmann::ordered_json certificate_json(const Certificate& cert) {
  nlohmann::ordered_json j;
  j["problem"] = to_string(cert.problem);
  j["instance_digest"] = cert.instance_digest;
  j["pi"] = cert.pi;
  if (cert.k) j["k"] = *cert.k;
  if (cert.blocks) j["blocks"] = *cert.blocks;
  // Integral objectives print as integers so reports and certificates agree.
  const double o = cert.objective;
  if (std::isfinite(o) && o == std::floor(o) && std::abs(o) < 9e15)
    j["objective"] = static_cast<std::int64_t>(o);
  else
    j["objective"] = o;
  j["feasible"] = cert.feasible;
  return j;
}

inline std::string write_certificate(const Certificate& cert) { return certificate_json(cert).dump(2) + "\n"; }

inline Certificate certificate_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw CertificateError("certificate must be a JSON object");
  static const std::vector<std::string> known = {"problem", "instance_digest", "pi", "k", "blocks", "objective", "feasible"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw CertificateError("unknown certificate field '" + key + "'");
  const auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw CertificateError(std::string("certificate lacks '") + key + "'");
    return j.at(key);
  };
  Certificate c;
  const auto& prob = need("problem");
  if (!prob.is_string()) throw CertificateError("'problem' must be a string");
  const auto parsed = problem_from_string(prob.get<std::string>());
  if (!parsed) throw CertificateError("unknown problem '" + prob.get<std::string>() + "'");
  c.problem = *parsed;
  const auto& dig = need("instance_digest");
  if (!dig.is_string()) throw CertificateError("'instance_digest' must be a string");
  c.instance_digest = dig.get<std::string>();
  if (c.instance_digest.size() != 64 ||
      c.instance_digest.find_first_not_of("0123456789abcdef") != std::string::npos)
    throw CertificateError("'instance_digest' must be 64 lowercase hex digits");
  const auto& pi = need("pi");
  if (!pi.is_array() || pi.empty()) throw CertificateError("'pi' must be a nonempty integer array");
  for (const auto& v : pi) {
    if (!v.is_number_integer()) throw CertificateError("'pi' entries must be integers");
    c.pi.push_back(v.get<std::int64_t>());
  }
  const auto count = [](const nlohmann::json& v, const char* what) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw CertificateError(std::string(what) + " must be a nonnegative integer");
    return v.get<std::size_t>();
  };
  if (j.contains("k")) c.k = count(j.at("k"), "'k'");
  if (j.contains("blocks")) {
    const auto& b = j.at("blocks");
    if (!b.is_array()) throw CertificateError("'blocks' must be an array");
    std::vector<std::size_t> blocks;
    for (const auto& v : b) blocks.push_back(count(v, "'blocks' entries"));
    c.blocks = std::move(blocks);
  }
  const auto& obj = need("objective");
  if (!obj.is_number()) throw CertificateError("'objective' must be a number");
  c.objective = obj.get<double>();
  const auto& feas = need("feasible");
  if (!feas.is_boolean()) throw CertificateError("'feasible' must be a boolean");
  c.feasible = feas.get<bool>();
  (void)candidate_of(c);  // bijection check
  return c;
}

inline Certificate read_certificate(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw CertificateError(std::string("certificate is not valid JSON: ") + e.what());
  }
  return certificate_from_json(j);
}

}  // namespace permform
