#include <gtest/gtest.h>

#include <random>

#include "corpus.hpp"
#include "discalg/expr.hpp"
#include "discalg/grid.hpp"

using namespace discalg;
using discalg::testing::corpus;
using discalg::testing::rel_err;

namespace {

cplx at(const std::string& s, cplx z) { return eval(parse(s), z); }

} // namespace

TEST(Parse, ProductOfVariableAndConjugate) {
  const Expr e = parse("z*conj(z)");
  ASSERT_EQ(e.kind(), Kind::mul);
  EXPECT_EQ(e.arg(0).kind(), Kind::var);
  ASSERT_EQ(e.arg(1).kind(), Kind::conj);
  EXPECT_EQ(e.arg(1).arg().kind(), Kind::var);
}

TEST(Parse, Precedence) {
  // power > unary minus > mul/div > add/sub
  const Expr e = parse("-z^2*3+1");
  ASSERT_EQ(e.kind(), Kind::add);
  const Expr& m = e.arg(0);
  ASSERT_EQ(m.kind(), Kind::mul);
  ASSERT_EQ(m.arg(0).kind(), Kind::neg);
  EXPECT_EQ(m.arg(0).arg().kind(), Kind::pow);
}

TEST(Parse, LeftAssociative) {
  const Expr e = parse("z-1-2");
  ASSERT_EQ(e.kind(), Kind::sub);
  EXPECT_EQ(e.arg(0).kind(), Kind::sub);
  EXPECT_EQ(at("8/4/2", 0.0), cplx(1.0));
  EXPECT_EQ(at("z^2^3", 2.0), cplx(64.0));
}

TEST(Parse, ImaginaryUnitAndExponentLiterals) {
  EXPECT_EQ(at("i*i", 0.0), cplx(-1.0));
  EXPECT_EQ(at("1e-2*z", 3.0), cplx(0.03));
  EXPECT_EQ(at("2.5E+1", 0.0), cplx(25.0));
}

TEST(Parse, ReOfPowerAtPoint) { EXPECT_EQ(at("re(z)^2", {1.0, 2.0}), cplx(1.0)); }

TEST(Parse, IncompleteExpressionReportsOffset) {
  try {
    parse("z*");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 2u);
    EXPECT_EQ(e.expected(), "operand");
    EXPECT_EQ(e.found(), "end of input");
  }
}

TEST(Parse, Errors) {
  auto offset = [](const char* s) -> long {
    try {
      parse(s);
    } catch (const ParseError& e) {
      return static_cast<long>(e.offset());
    }
    return -1;
  };
  EXPECT_EQ(offset("z^2.5"), 2);
  EXPECT_EQ(offset("z^-1"), 2);
  EXPECT_EQ(offset("z^z"), 2);
  EXPECT_EQ(offset("conj z"), 5);
  EXPECT_EQ(offset("(z"), 2);
  EXPECT_EQ(offset("z)"), 1);
  EXPECT_EQ(offset("sin(z)"), 0);
  EXPECT_EQ(offset("z # 1"), 2);
  EXPECT_EQ(offset(""), 0);
  EXPECT_EQ(offset("2 z"), 2);
  EXPECT_EQ(offset("h*conj("), 0);
  for (const char* s : {"z*", "conj(", "((z)", "re()", "."}) {
    try {
      parse(s);
    } catch (const ParseError& e) {
      EXPECT_LE(e.offset(), std::string(s).size());
    }
  }
}

TEST(Parse, RoundTripOverGrammarCorpus) {
  std::vector<std::string> strings = corpus();
  for (const char* extra : {"-z", "--z", "-(z+1)", "z-(1-z)", "z/(2/z)", "(-z)^2", "-z^2", "2^3^2", "z*-z",
                            "i", "1e-07*z", "(z*z)*z", "z*(z*z)", "conj(-z)+re(z-i)", "0.1+0.2"})
    strings.push_back(extra);
  ASSERT_GE(strings.size(), 30u);
  for (const auto& s : strings) {
    const Expr a = parse(s);
    const std::string printed = to_string(a);
    const Expr b = parse(printed);
    EXPECT_TRUE(structurally_equal(a, b)) << s << " printed as " << printed;
  }
}

TEST(Eval, Basics) {
  EXPECT_EQ(at("conj(z)", {0.3, 0.4}), cplx(0.3, -0.4));
  EXPECT_NEAR(std::abs(at("z*conj(z)", {0.6, 0.8}) - 1.0), 0.0, 1e-15);
  EXPECT_EQ(at("exp(z)", 0.0), cplx(1.0));
  EXPECT_EQ(at("abs2(z)", {3.0, 4.0}), cplx(25.0));
  EXPECT_EQ(at("im(z)", {3.0, 4.0}), cplx(4.0));
}

TEST(Eval, DivisionByZeroNamesTheSubexpression) {
  try {
    at("1/(z-1)", 1.0);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(to_string(e.culprit()), "1/(z-1)");
  }
  EXPECT_THROW(Program(parse("1/(z-1)"))(1.0), DomainError);
}

TEST(Eval, ProgramMatchesTreeWalk) {
  std::mt19937_64 rng(7);
  for (const auto& s : corpus()) {
    const Expr e = parse(s);
    const Program p(e);
    for (int k = 0; k < 10; ++k) {
      const cplx z = discalg::testing::random_in_disc(rng, 1.0);
      EXPECT_EQ(p(z), eval(e, z)) << s;
    }
  }
}

TEST(Wirtinger, ConjugateExamples) {
  const Expr dzb = wirtinger_dzbar(parse("conj(z)"));
  EXPECT_TRUE(dzb.is_constant(1.0));
  EXPECT_TRUE(wirtinger_dz(parse("conj(z)")).is_constant(0.0));
  const Expr prod = wirtinger_dzbar(parse("z*conj(z)"));
  EXPECT_EQ(prod.kind(), Kind::var);
}

TEST(Wirtinger, LaplacianExamples) {
  EXPECT_TRUE(laplacian(parse("z*conj(z)")).is_constant(4.0));
  EXPECT_TRUE(laplacian(parse("re(z)")).is_constant(0.0));
  EXPECT_TRUE(laplacian(parse("z^7")).is_constant(0.0));
}

// Oracle: five-point finite-difference Laplacian at random points.
TEST(Wirtinger, ScaledModulusLaplacianAgainstFiniteDifferences) {
  const Expr e = parse("0.05*z*conj(z)");
  const Expr lap = laplacian(e);
  std::mt19937_64 rng(11);
  const double h = 1e-3;
  for (int k = 0; k < 10; ++k) {
    const cplx z = discalg::testing::random_in_disc(rng, 0.9);
    const cplx fd = (eval(e, z + h) + eval(e, z - h) + eval(e, z + cplx(0, h)) + eval(e, z - cplx(0, h)) -
                     4.0 * eval(e, z)) / (h * h);
    EXPECT_NEAR(std::abs(fd - 0.2), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(eval(lap, z) - 0.2), 0.0, 1e-15);
  }
}

TEST(Wirtinger, ChainRuleThroughExp) {
  // d/dz exp(z conj z) = conj(z) exp(|z|^2)
  const Expr d = wirtinger_dz(parse("exp(z*conj(z))"));
  const cplx z{0.2, -0.5};
  EXPECT_LT(rel_err(eval(d, z), std::conj(z) * std::exp(std::norm(z))), 1e-15);
}

TEST(Wirtinger, QuotientRule) {
  // d/dz 1/(2-z) = 1/(2-z)^2
  const Expr d = wirtinger_dz(parse("1/(2-z)"));
  const cplx z{0.3, 0.1};
  EXPECT_LT(rel_err(eval(d, z), 1.0 / ((2.0 - z) * (2.0 - z))), 1e-15);
  EXPECT_TRUE(wirtinger_dzbar(parse("1/(2-z)")).is_constant(0.0));
}

TEST(Wirtinger, ConjugationRuleAndMixedPartials) {
  std::mt19937_64 rng(3);
  for (const auto& s : corpus()) {
    const Expr u = parse(s);
    const Program conj_rule(wirtinger_dz(conj(u)));
    const Program dzbar_u(wirtinger_dzbar(u));
    const Program mixed_a(wirtinger_dz(wirtinger_dzbar(u)));
    const Program mixed_b(wirtinger_dzbar(wirtinger_dz(u)));
    for (int k = 0; k < 100; ++k) {
      const cplx z = discalg::testing::random_in_disc(rng, 1.0);
      EXPECT_LE(rel_err(conj_rule(z), std::conj(dzbar_u(z))), 1e-12) << s;
      EXPECT_LE(rel_err(mixed_a(z), mixed_b(z)), 1e-10) << s;
    }
  }
}

TEST(Wirtinger, SymbolicAgreesWithFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (const auto& s : corpus()) {
    const Expr u = parse(s);
    const Program p(u);
    const Program dz(wirtinger_dz(u));
    const Program dzbar(wirtinger_dzbar(u));
    for (int k = 0; k < 100; ++k) {
      const cplx z = discalg::testing::random_in_disc(rng, 0.95);
      const auto fd = fd_wirtinger(p, z);
      EXPECT_LE(rel_err(fd.dz, dz(z)), 1e-6) << s << " at " << z;
      EXPECT_LE(rel_err(fd.dzbar, dzbar(z)), 1e-6) << s << " at " << z;
    }
  }
}

TEST(Wirtinger, DesugaredFormsAgree) {
  std::mt19937_64 rng(9);
  const std::pair<const char*, const char*> pairs[] = {
      {"re(z^2)", "(z^2+conj(z^2))/2"}, {"im(z^2)", "(z^2-conj(z^2))/(2*i)"}, {"abs2(z^2)", "z^2*conj(z^2)"}};
  for (const auto& [a, b] : pairs) {
    const Program da(wirtinger_dzbar(parse(a))), db(wirtinger_dzbar(parse(b)));
    for (int k = 0; k < 20; ++k) {
      const cplx z = discalg::testing::random_in_disc(rng, 1.0);
      EXPECT_LE(rel_err(da(z), db(z)), 1e-14) << a;
    }
  }
}

TEST(Folding, ConstantsCollapse) {
  EXPECT_TRUE((Expr(2.0) * Expr(3.0) + Expr(1.0)).is_constant(7.0));
  EXPECT_TRUE(pow(Expr(2.0), 3).is_constant(8.0));
  EXPECT_TRUE(conj(Expr(cplx{1.0, 2.0})).is_constant(cplx{1.0, -2.0}));
  EXPECT_EQ(to_string(-Expr(3.0)), "(-3)");
  // printed folded constants re-evaluate to the same value
  for (cplx c : {cplx{-1.5, 0.0}, cplx{0.0, 2.0}, cplx{1.0, -2.0}, cplx{-0.5, 0.25}, cplx{0.0, 1.0}}) {
    EXPECT_EQ(eval(parse(to_string(Expr(c))), 0.0), c) << to_string(Expr(c));
  }
}

TEST(Folding, DerivativeTreesStaySmallForPolynomials) {
  const Expr d = wirtinger_dzbar(parse("z^2*conj(z)"));
  EXPECT_LT(node_count(d), 10u) << to_string(d);
}
