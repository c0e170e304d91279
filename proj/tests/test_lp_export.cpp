#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <sstream>
#include <string>

#include "coflow/lp_export.hpp"
#include "coflow/lp_problem.hpp"
#include "coflow/rng.hpp"
#include "coflow/simplex.hpp"

using namespace coflow;

namespace {

std::string to_text(const LpProblem& p) {
  std::ostringstream os;
  write_lp(p, os);
  return os.str();
}

LpProblem from_text(const std::string& s) {
  std::istringstream is(s);
  return read_lp(is);
}

// structural equality up to column order: bounds and objective per name,
// rows in order with coefficients keyed by name
void check_same_problem(const LpProblem& a, const LpProblem& b) {
  REQUIRE(a.var_count() == b.var_count());
  REQUIRE(a.row_count() == b.row_count());
  CHECK(a.maximize == b.maximize);
  std::map<std::string, int> bcols;
  for (int j = 0; j < b.var_count(); ++j) bcols[b.var(j).name] = j;
  for (int j = 0; j < a.var_count(); ++j) {
    const LpVar& va = a.var(j);
    REQUIRE(bcols.count(va.name) == 1);
    const LpVar& vb = b.var(bcols[va.name]);
    CHECK(va.lo == vb.lo);
    CHECK(va.hi == vb.hi);
    CHECK(va.obj == vb.obj);
  }
  for (int r = 0; r < a.row_count(); ++r) {
    const LpRow& ra = a.row(r);
    const LpRow& rb = b.row(r);
    CHECK(ra.rel == rb.rel);
    CHECK(ra.rhs == rb.rhs);
    std::map<std::string, double> ta, tb;
    for (auto [col, v] : ra.coeffs) ta[a.var(col).name] += v;
    for (auto [col, v] : rb.coeffs) tb[b.var(col).name] += v;
    CHECK(ta == tb);
  }
}

}  // namespace

TEST_CASE("one-variable toy survives the round trip") {
  LpProblem p;
  p.maximize = true;
  int x = p.add_var("x", 0.0, kInf, 1.0);
  p.add_row("cap", Rel::le, 3.0, {{x, 1.0}});
  LpProblem q = from_text(to_text(p));
  check_same_problem(p, q);
  CHECK(solve(q).objective == Catch::Approx(3.0));
}

TEST_CASE("awkward numbers and bounds survive the round trip") {
  LpProblem p;
  int a = p.add_var("alpha", -kInf, kInf, -0.75);       // free
  int b = p.add_var("beta", 2.5, 2.5, 0.0);             // fixed
  int c = p.add_var("gamma_2", -kInf, 4.0, 1e-9);       // one-sided
  int d = p.add_var("delta.x", 0.25, kInf, 150.0);      // lower only
  int e = p.add_var("eps", 0.0, 1.0, -3.25e-4);         // boxed
  p.add_row("r1", Rel::le, 1e6, {{a, 1.0}, {c, -2.5e-3}});
  p.add_row("r2", Rel::ge, -7.125, {{b, -1.0}, {d, 3.0}, {e, 1.0}});
  p.add_row("r3", Rel::eq, 0.0, {{a, 1.0}, {e, -1.0}});
  LpProblem q = from_text(to_text(p));
  check_same_problem(p, q);
}

TEST_CASE("round trip preserves the optimum of random programs") {
  Rng rng(424242);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(2, 4));
    LpProblem p;
    p.maximize = rng.uniform() < 0.5;
    for (int j = 0; j < n; ++j)
      p.add_var("v" + std::to_string(j), 0.0, rng.uniform(1.0, 5.0),
                static_cast<double>(rng.uniform_int(-3, 3)));
    const int m = static_cast<int>(rng.uniform_int(1, 4));
    for (int r = 0; r < m; ++r) {
      std::vector<std::pair<int, double>> coeffs;
      for (int j = 0; j < n; ++j) {
        const double v = static_cast<double>(rng.uniform_int(-2, 3));
        if (v != 0.0) coeffs.push_back({j, v});
      }
      if (coeffs.empty()) coeffs.push_back({0, 1.0});
      p.add_row("", rng.uniform() < 0.8 ? Rel::le : Rel::ge,
                static_cast<double>(rng.uniform_int(0, 6)), coeffs);
    }
    LpProblem q = from_text(to_text(p));
    LpSolution sp = solve(p);
    LpSolution sq = solve(q);
    REQUIRE(sp.status == sq.status);
    if (sp.status == LpStatus::optimal)
      CHECK(sp.objective == Catch::Approx(sq.objective).margin(1e-9));
  }
}

TEST_CASE("export rejects unusable input") {
  LpProblem empty;
  std::ostringstream os;
  CHECK_THROWS(write_lp(empty, os));

  LpProblem bad_name;
  bad_name.add_var("2x", 0.0, 1.0, 1.0);  // names cannot start with a digit
  CHECK_THROWS(write_lp(bad_name, os));

  LpProblem spacey;
  spacey.add_var("a b", 0.0, 1.0, 1.0);
  CHECK_THROWS(write_lp(spacey, os));

  LpProblem zero_row;
  int x = zero_row.add_var("x", 0.0, 1.0, 1.0);
  zero_row.add_row("z", Rel::le, 1.0, {{x, 0.0}});
  CHECK_THROWS(write_lp(zero_row, os));

  LpProblem fine;
  fine.add_var("x", 0.0, 1.0, 1.0);
  CHECK_THROWS(export_lp(fine, "/nonexistent-dir/out.lp"));
}

TEST_CASE("reader rejects malformed text") {
  CHECK_THROWS(from_text("Minimize\n obj: x\nSubject To\n r: x <= 1\nBounds\n"));  // no End
  CHECK_THROWS(from_text("Minimize\n obj: x\nSubject To\n r: x\nEnd\n"));          // no relation
  CHECK_THROWS(from_text("stray text\nEnd\n"));  // content before any section
  CHECK_THROWS(from_text("Minimize\n obj: x\nBounds\n what <= \nEnd\n"));
}

TEST_CASE("comments and blank lines are ignored") {
  const std::string text =
      "\\ a comment line\n"
      "Minimize\n"
      "\n"
      " obj: 2 x + 3 y \\ trailing comment\n"
      "Subject To\n"
      " c0: x + y >= 1\n"
      "Bounds\n"
      " x >= 0\n"
      " y >= 0\n"
      "End\n";
  LpProblem p = from_text(text);
  CHECK(p.var_count() == 2);
  CHECK(p.row_count() == 1);
  LpSolution s = solve(p);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.objective == Catch::Approx(2.0));
}
