#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qmb/error.hpp"
#include "qmb/sdp.hpp"

namespace qmb {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix(std::ostringstream& os, int matno, const SparseSymMatrix& a) {
  for (const auto& e : a.entries()) {
    os << matno << ' ' << e.block + 1 << ' ' << e.row + 1 << ' ' << e.col + 1 << ' '
       << num(e.value) << '\n';
  }
}

struct Token {
  std::string text;
  int line;
  int column;
};

// Splits a data line into tokens, treating SDPA punctuation as blanks.
std::vector<Token> tokenize(const std::string& line, int line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto blank = [](char ch) {
    return std::isspace(static_cast<unsigned char>(ch)) || ch == ',' || ch == '{' || ch == '}' ||
           ch == '(' || ch == ')';
  };
  while (i < line.size()) {
    while (i < line.size() && blank(line[i])) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !blank(line[j])) ++j;
    out.push_back({line.substr(i, j - i), line_no, static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

double to_double(const Token& t) {
  double v = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw ParseError("expected a number, got '" + t.text + "'", t.line, t.column);
  }
  return v;
}

long to_long(const Token& t) {
  long v = 0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    // Accept integral values written as decimals, e.g. "3.0".
    const double d = to_double(t);
    if (d != std::floor(d)) {
      throw ParseError("expected an integer, got '" + t.text + "'", t.line, t.column);
    }
    return static_cast<long>(d);
  }
  return v;
}

}  // namespace

std::string write_sdpa(const SdpProblem& problem) {
  std::ostringstream os;
  os << "*scale=" << num(problem.scale()) << '\n';
  os << problem.num_constraints() << '\n';
  os << problem.block_dims().size() << '\n';
  for (std::size_t k = 0; k < problem.block_dims().size(); ++k) {
    os << (k ? " " : "") << problem.block_dims()[k];
  }
  os << '\n';
  for (int i = 0; i < problem.num_constraints(); ++i) {
    os << (i ? " " : "") << num(problem.constraints()[i].b);
  }
  os << '\n';
  write_matrix(os, 0, problem.objective());
  for (int i = 0; i < problem.num_constraints(); ++i) {
    write_matrix(os, i + 1, problem.constraints()[i].a);
  }
  return os.str();
}

SdpProblem read_sdpa(std::string_view text) {
  double scale = 1.0;
  std::vector<Token> tokens;
  int last_line = 0;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && (line[0] == '*' || line[0] == '"')) {
        if (line.rfind("*scale=", 0) == 0) {
          const Token t{line.substr(7), line_no, 8};
          scale = to_double(t);
        }
        continue;
      }
      auto lt = tokenize(line, line_no);
      tokens.insert(tokens.end(), lt.begin(), lt.end());
    }
    last_line = line_no;
  }

  std::size_t pos = 0;
  auto next = [&](const char* what) -> const Token& {
    if (pos >= tokens.size()) {
      throw ParseError(std::string("unexpected end of input, expected ") + what, last_line + 1, 1);
    }
    return tokens[pos++];
  };

  const Token& tm = next("constraint count");
  const long m = to_long(tm);
  if (m < 0) throw ParseError("constraint count must be nonnegative", tm.line, tm.column);
  const Token& tn = next("block count");
  const long nblocks = to_long(tn);
  if (nblocks < 1) throw ParseError("block count must be positive", tn.line, tn.column);
  std::vector<int> dims;
  std::vector<bool> diagonal;
  for (long k = 0; k < nblocks; ++k) {
    const Token& t = next("block dimension");
    const long d = to_long(t);
    if (d == 0) throw ParseError("block dimension must be nonzero", t.line, t.column);
    dims.push_back(static_cast<int>(std::labs(d)));
    diagonal.push_back(d < 0);
  }
  std::vector<SdpConstraint> cons(m);
  for (long i = 0; i < m; ++i) cons[i].b = to_double(next("right-hand side entry"));
  SparseSymMatrix objective;
  while (pos < tokens.size()) {
    const Token& t0 = next("matrix number");
    const long matno = to_long(t0);
    const Token& t1 = next("block number");
    const long blk = to_long(t1);
    const Token& t2 = next("row index");
    const long i = to_long(t2);
    const Token& t3 = next("column index");
    const long j = to_long(t3);
    const double v = to_double(next("entry value"));
    if (matno < 0 || matno > m) {
      throw ParseError("matrix number " + std::to_string(matno) + " out of range", t0.line,
                       t0.column);
    }
    if (blk < 1 || blk > nblocks) {
      throw ParseError("block number " + std::to_string(blk) + " out of range", t1.line, t1.column);
    }
    const int d = dims[blk - 1];
    if (i < 1 || i > d) {
      throw ParseError("row index " + std::to_string(i) + " exceeds block dimension " +
                       std::to_string(d), t2.line, t2.column);
    }
    if (j < 1 || j > d) {
      throw ParseError("column index " + std::to_string(j) + " exceeds block dimension " +
                       std::to_string(d), t3.line, t3.column);
    }
    if (diagonal[blk - 1] && i != j) {
      throw ParseError("off-diagonal entry in a diagonal block", t2.line, t2.column);
    }
    if (i > j) {
      throw ParseError("entry below the diagonal; only the upper triangle is stored", t2.line,
                       t2.column);
    }
    SparseSymMatrix& target = matno == 0 ? objective : cons[matno - 1].a;
    target.add(static_cast<int>(blk - 1), static_cast<int>(i - 1), static_cast<int>(j - 1), v);
  }
  return SdpProblem(std::move(dims), std::move(objective), std::move(cons), scale);
}

}  // namespace qmb
