#pragma once

// Textual LP interchange (the CPLEX "lp" dialect subset emitted below):
// objective, one constraint per line, explicit bounds for every column.
// write_lp emits it, read_lp parses the same subset back, so export can be
// verified by round trip and the files load into common external solvers.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coflow/lp_problem.hpp"

namespace coflow {

namespace detail {

inline std::string lp_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void check_lp_name(const std::string& name) {
  if (name.empty()) throw std::invalid_argument("lp export: empty name");
  if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_')
    throw std::invalid_argument("lp export: name must start with a letter: " + name);
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.')
      throw std::invalid_argument("lp export: unsupported character in name: " + name);
}

inline void append_terms(std::ostream& os, const std::vector<std::pair<int, double>>& terms,
                         const LpProblem& p) {
  bool first = true;
  for (auto [col, a] : terms) {
    if (a == 0.0) continue;
    if (first) {
      os << (a < 0.0 ? "- " : "");
    } else {
      os << (a < 0.0 ? " - " : " + ");
    }
    os << lp_num(std::abs(a)) << ' ' << p.var(col).name;
    first = false;
  }
  if (first) throw std::invalid_argument("lp export: row without nonzero terms");
}

}  // namespace detail

inline void write_lp(const LpProblem& p, std::ostream& os) {
  if (p.var_count() == 0) throw std::invalid_argument("lp export: empty problem");
  for (int j = 0; j < p.var_count(); ++j) detail::check_lp_name(p.var(j).name);

  os << (p.maximize ? "Maximize\n" : "Minimize\n");
  std::vector<std::pair<int, double>> obj;
  for (int j = 0; j < p.var_count(); ++j)
    if (p.var(j).obj != 0.0) obj.push_back({j, p.var(j).obj});
  os << " obj: ";
  if (obj.empty())
    os << "0 " << p.var(0).name;
  else
    detail::append_terms(os, obj, p);
  os << "\nSubject To\n";
  for (int r = 0; r < p.row_count(); ++r) {
    const LpRow& row = p.row(r);
    const std::string name = row.name.empty() ? "c" + std::to_string(r) : row.name;
    detail::check_lp_name(name);
    os << ' ' << name << ": ";
    detail::append_terms(os, row.coeffs, p);
    switch (row.rel) {
      case Rel::le: os << " <= "; break;
      case Rel::ge: os << " >= "; break;
      case Rel::eq: os << " = "; break;
    }
    os << detail::lp_num(row.rhs) << '\n';
  }
  os << "Bounds\n";
  for (int j = 0; j < p.var_count(); ++j) {
    const LpVar& v = p.var(j);
    os << ' ';
    if (!std::isfinite(v.lo) && !std::isfinite(v.hi))
      os << v.name << " free";
    else if (v.lo == v.hi)
      os << v.name << " = " << detail::lp_num(v.lo);
    else if (!std::isfinite(v.hi))
      os << v.name << " >= " << detail::lp_num(v.lo);
    else if (!std::isfinite(v.lo))
      os << "-inf <= " << v.name << " <= " << detail::lp_num(v.hi);
    else
      os << detail::lp_num(v.lo) << " <= " << v.name << " <= " << detail::lp_num(v.hi);
    os << '\n';
  }
  os << "End\n";
}

inline void export_lp(const LpProblem& p, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("lp export: cannot open " + path);
  write_lp(p, f);
  if (!f.good()) throw std::runtime_error("lp export: write failed for " + path);
}

namespace detail {

struct LpReadState {
  LpProblem p;
  std::map<std::string, int> cols;
  std::map<std::string, double> obj;
  bool bounds_seen = false;

  int col(const std::string& name) {
    auto it = cols.find(name);
    if (it != cols.end()) return it->second;
    const int c = p.add_var(name, 0.0, kInf, 0.0);
    cols.emplace(name, c);
    return c;
  }
};

inline bool lp_is_number(const std::string& t) {
  char* end = nullptr;
  std::strtod(t.c_str(), &end);
  return end && *end == '\0' && end != t.c_str();
}

// true for a token like "1.5e" or "-3E": a number waiting for its exponent
inline bool lp_dangling_exponent(const std::string& t) {
  if (t.size() < 2 || (t.back() != 'e' && t.back() != 'E')) return false;
  bool digit = false;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const char c = t[i];
    if (std::isdigit(static_cast<unsigned char>(c))) digit = true;
    else if (c != '.' && !(i == 0 && c == '-'))
      return false;
  }
  return digit;
}

// splits "a<=b" style glued tokens apart, keeps numbers/names whole
inline std::vector<std::string> lp_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == '<' || c == '>' || c == '=') {
      flush();
      std::string op(1, c);
      if ((c == '<' || c == '>') && i + 1 < line.size() && line[i + 1] == '=') {
        op += '=';
        ++i;
      }
      out.push_back(op);
    } else if (c == '+' || c == '-' || c == ':') {
      // a sign stays glued to the number it starts ("-3") or to a pending
      // exponent ("1e-9"); anything else is a separator token
      const bool starts_number = c == '-' && cur.empty() && i + 1 < line.size() &&
                                 (std::isdigit(static_cast<unsigned char>(line[i + 1])) ||
                                  line[i + 1] == '.');
      if (starts_number || (c != ':' && lp_dangling_exponent(cur))) {
        cur += c;
      } else {
        flush();
        out.push_back(std::string(1, c));
      }
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

// parses "±a x ± b y ..." starting at `i`; stops at a relation token
inline std::map<std::string, double> lp_linear(const std::vector<std::string>& toks,
                                               std::size_t& i) {
  std::map<std::string, double> terms;
  double sign = 1.0;
  bool have_coeff = false;
  double coeff = 1.0;
  for (; i < toks.size(); ++i) {
    const std::string& t = toks[i];
    if (t == "<=" || t == ">=" || t == "=") break;
    if (t == "+") {
      sign = 1.0;
      continue;
    }
    if (t == "-") {
      sign = -1.0;
      continue;
    }
    if (lp_is_number(t)) {
      coeff = std::stod(t);
      have_coeff = true;
      continue;
    }
    terms[t] += sign * (have_coeff ? coeff : 1.0);
    sign = 1.0;
    coeff = 1.0;
    have_coeff = false;
  }
  return terms;
}

}  // namespace detail

// Parses the subset written by write_lp: sections Minimize/Maximize, Subject
// To (one constraint per line), Bounds (one bound per line), End. Variables
// are created on first mention with default bounds [0, inf).
inline LpProblem read_lp(std::istream& is) {
  enum class Section { none, objective, rows, bounds, done };
  detail::LpReadState st;
  Section sec = Section::none;
  std::vector<std::string> obj_toks;
  std::string line;
  auto lower = [](std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  while (std::getline(is, line)) {
    if (auto cut = line.find('\\'); cut != std::string::npos) line.resize(cut);
    std::string key = lower(line);
    key.erase(0, key.find_first_not_of(" \t\r"));
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
    if (key.empty()) continue;
    if (key == "minimize" || key == "min") {
      st.p.maximize = false;
      sec = Section::objective;
      continue;
    }
    if (key == "maximize" || key == "max") {
      st.p.maximize = true;
      sec = Section::objective;
      continue;
    }
    if (key == "subject to" || key == "st" || key == "s.t.") {
      sec = Section::rows;
      continue;
    }
    if (key == "bounds") {
      sec = Section::bounds;
      continue;
    }
    if (key == "end") {
      sec = Section::done;
      break;
    }

    auto toks = detail::lp_tokens(line);
    if (toks.empty()) continue;
    switch (sec) {
      case Section::objective:
        for (auto& t : toks) obj_toks.push_back(t);
        break;
      case Section::rows: {
        std::string name;
        std::size_t i = 0;
        if (toks.size() >= 2 && toks[1] == ":") {
          name = toks[0];
          i = 2;
        }
        auto terms = detail::lp_linear(toks, i);
        if (i + 1 >= toks.size()) throw std::invalid_argument("lp read: malformed row: " + line);
        const std::string& rel = toks[i];
        const double rhs = std::stod(toks[i + 1]);
        std::vector<std::pair<int, double>> coeffs;
        for (auto& [n, a] : terms) coeffs.push_back({st.col(n), a});
        st.p.add_row(name, rel == "<=" ? Rel::le : rel == ">=" ? Rel::ge : Rel::eq, rhs, coeffs);
        break;
      }
      case Section::bounds: {
        // forms: "x free", "x = v", "x >= lo", "x <= hi", "lo <= x <= hi";
        // fold a standalone "-" into the following token first so "-inf"
        // comes through whole
        std::vector<std::string> bt;
        for (auto& t : toks) {
          if (!bt.empty() && bt.back() == "-")
            bt.back() += t;
          else
            bt.push_back(t);
        }
        auto as_lo = [&](const std::string& t) {
          const std::string l = lower(t);
          return l == "-inf" || l == "-infinity" ? -kInf : std::stod(t);
        };
        if (bt.size() == 2 && lower(bt[1]) == "free") {
          st.p.set_bounds(st.col(bt[0]), -kInf, kInf);
        } else if (bt.size() == 3 && !detail::lp_is_number(bt[0])) {
          const int c = st.col(bt[0]);
          const double v = std::stod(bt[2]);
          if (bt[1] == "=")
            st.p.set_bounds(c, v, v);
          else if (bt[1] == ">=")
            st.p.set_bounds(c, v, st.p.var(c).hi);
          else if (bt[1] == "<=")
            st.p.set_bounds(c, st.p.var(c).lo, v);
          else
            throw std::invalid_argument("lp read: malformed bound: " + line);
        } else if (bt.size() == 5 && bt[1] == "<=" && bt[3] == "<=") {
          st.p.set_bounds(st.col(bt[2]), as_lo(bt[0]), std::stod(bt[4]));
        } else {
          throw std::invalid_argument("lp read: malformed bound: " + line);
        }
        break;
      }
      default:
        throw std::invalid_argument("lp read: content outside any section: " + line);
    }
  }
  if (sec != Section::done) throw std::invalid_argument("lp read: missing End");

  std::size_t i = 0;
  if (obj_toks.size() >= 2 && obj_toks[1] == ":") i = 2;
  auto terms = detail::lp_linear(obj_toks, i);
  for (auto& [n, a] : terms) st.p.set_objective(st.col(n), a);
  return st.p;
}

inline LpProblem import_lp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("lp read: cannot open " + path);
  return read_lp(f);
}

}  // namespace coflow
