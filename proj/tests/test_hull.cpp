#include <gtest/gtest.h>

#include "discalg/hull.hpp"

using namespace discalg;

namespace {

const DiscGrid& grid() {
  static const DiscGrid g = make_grid(32, 128);
  return g;
}

ContinuityModulus modulus(const DiscFunction& d) { return continuity_modulus(d.f_p, grid(), {0.1}); }

} // namespace

TEST(Probe, HandCheckedConjugatePoint) {
  const DiscFunction d = build("conj(z)", "0", 0.5, grid());
  const HullProbeResult p = probe(d, modulus(d), 0.0, 0.5, grid());
  EXPECT_DOUBLE_EQ(p.psi1, 0.25);
  EXPECT_DOUBLE_EQ(p.eps, 0.5);
  // delta(eps/3): largest 2^-k below 0.9 * 0.5/3 = 0.15
  EXPECT_DOUBLE_EQ(p.r, 1.0 - 0.125);
  EXPECT_DOUBLE_EQ(p.lhs, 0.25);
  EXPECT_NEAR(p.rhs_sup, 0.125 * 0.125, 1e-15);
  EXPECT_GT(p.lhs, 4.0 * p.psi1 / 9.0);
  EXPECT_LT(p.rhs_sup, p.psi1 / 9.0);
  EXPECT_EQ(p.verdict, Verdict::excluded);
}

TEST(Probe, OnGraph) {
  const DiscFunction d = build("conj(z)", "0", 0.5, grid());
  const HullProbeResult p = probe(d, modulus(d), 0.5, 0.5, grid());
  EXPECT_EQ(p.psi1, 0.0);
  EXPECT_EQ(p.verdict, Verdict::on_graph);
}

TEST(Probe, FarFromGraphInW) {
  const DiscFunction d = build("conj(z)", "0.05*z*conj(z)", 0.25, grid());
  const HullProbeResult p = probe(d, modulus(d), 0.0, d.M() + d.delta0, grid());
  EXPECT_FALSE(p.outside_box);
  EXPECT_GE(p.eps, d.delta0);
  EXPECT_GT(p.lhs, 4.0 * p.psi1 / 9.0);
  EXPECT_LT(p.rhs_sup, p.psi1 / 9.0);
  EXPECT_EQ(p.verdict, Verdict::excluded);
}

TEST(Probe, OutsideTheBoxIsImmediate) {
  const DiscFunction d = build("conj(z)", "0", 0.5, grid());
  const HullProbeResult p = probe(d, modulus(d), 0.0, d.rho() + 0.1, grid());
  EXPECT_TRUE(p.outside_box);
  EXPECT_EQ(p.verdict, Verdict::excluded);
  EXPECT_TRUE(probe(d, modulus(d), 1.5, 0.0, grid()).outside_box);
}

TEST(Probe, ThinMarginIsInconclusive) {
  // 0.9 eps/3 below every tabulated deviation 100 * 2^-k of f = 100 z
  const DiscFunction d = build("100*z", "0", 0.5, grid());
  const HullProbeResult p = probe(d, modulus(d), 0.5, cplx(50.0, 2e-5), grid());
  EXPECT_GT(p.psi1, graph_tolerance);
  EXPECT_EQ(p.verdict, Verdict::inconclusive);
  EXPECT_TRUE(p.modulus_failed);
}

TEST(Probe, DefinitionOfEpsilon) {
  const DiscFunction d = build("conj(z)", "0.05*z*conj(z)", 0.25, grid());
  const ContinuityModulus m = modulus(d);
  for (cplx z0 : {cplx(0.1, 0.2), cplx(-0.7, 0.1), cplx(0.0, -0.9)}) {
    for (cplx w0 : {cplx(1.0, 0.0), cplx(-2.0, 3.0), cplx(0.2, -0.1)}) {
      const HullProbeResult p = probe(d, m, z0, w0, grid());
      const cplx fz = std::conj(z0) + 0.05 * z0 * std::conj(z0);
      EXPECT_NEAR(p.psi1, std::norm(w0 - fz), 1e-12 * std::norm(w0 - fz));
    }
  }
}

// Spot values: f = conj(z), all quantities closed form.
TEST(Probe, SpotChecksForConjugate) {
  const DiscFunction d = build("conj(z)", "0", 0.5, grid());
  const ContinuityModulus m = modulus(d);
  for (auto [z0, w0] : {std::pair{cplx(0.5, 0.0), cplx(-0.5, 0.0)}, {cplx(0.0, 0.6), cplx(0.0, 0.0)},
                        {cplx(0.3, 0.3), cplx(2.0, 1.0)}, {cplx(-0.9, 0.0), cplx(-0.8, 0.1)},
                        {cplx(0.0, 0.0), cplx(0.0, 2.9)}}) {
    const HullProbeResult p = probe(d, m, z0, w0, grid());
    const double eps = std::abs(w0 - std::conj(z0));
    double delta = 0.5;
    while (delta >= 0.9 * eps / 3.0) delta /= 2;
    EXPECT_NEAR(p.eps, eps, 1e-14);
    EXPECT_DOUBLE_EQ(p.r, 1.0 - delta);
    EXPECT_NEAR(p.rhs_sup, delta * delta, 1e-14);
    EXPECT_NEAR(p.lhs, std::norm(w0 - (1 - delta) * std::conj(z0)), 1e-14);
    EXPECT_EQ(p.verdict, Verdict::excluded);
  }
}

TEST(Sweep, ConjugateDefaultLattice) {
  const DiscFunction d = build("conj(z)", "0", 0.5, grid());
  const auto queries = default_lattice(d);
  const SweepSummary s = sweep(d, modulus(d), queries, grid(), SweepOptions{LeviGridParams{8, 32, 4, 16}});
  EXPECT_EQ(s.queries, queries.size());
  EXPECT_GT(s.queries, 10000u);
  EXPECT_EQ(s.on_graph, 0u);
  EXPECT_EQ(s.excluded, s.queries);
  EXPECT_DOUBLE_EQ(s.excluded_fraction(), 1.0);
  EXPECT_EQ(s.certificates.size(), s.radii.size());
}

TEST(Sweep, EmptyQueries) {
  const DiscFunction d = build("conj(z)", "0", 0.5, grid());
  const SweepSummary s = sweep(d, modulus(d), {}, grid());
  EXPECT_EQ(s.queries, 0u);
  EXPECT_EQ(s.excluded, 0u);
  EXPECT_TRUE(s.radii.empty());
}

TEST(Sweep, LatticeAvoidsGraphTube) {
  const DiscFunction d = build("conj(z)", "0.05*z*conj(z)", 0.25, grid());
  for (const auto& q : default_lattice(d)) {
    EXPECT_GE(std::abs(q.w0 - d.f_p(q.z0)), 0.05);
    EXPECT_LE(std::abs(q.z0), 1.0);
    EXPECT_LE(std::abs(q.w0), d.rho() * (1 + 1e-15));
  }
}

// Holomorphic f: graph separation still runs; reported, no threshold.
TEST(Sweep, HolomorphicNegativeControlRuns) {
  const DiscFunction d = build("z", "0", 0.5, grid());
  const SweepSummary s = sweep(d, modulus(d), default_lattice(d), grid());
  EXPECT_EQ(s.excluded + s.inconclusive + s.on_graph, s.queries);
}

TEST(Sweep, RefinementNeverContradicts) {
  const DiscFunction d = build("conj(z)", "0.05*z*conj(z)", 0.25, grid());
  const DiscGrid coarse = make_grid(8, 32);
  const DiscGrid finer = refine(refine(coarse));
  const ContinuityModulus mc = continuity_modulus(d.f_p, coarse, {0.1});
  const ContinuityModulus mf = continuity_modulus(d.f_p, finer, {0.1});
  for (const auto& q : default_lattice(d, {6, 4, 8, 0.05})) {
    const HullProbeResult a = probe(d, mc, q.z0, q.w0, coarse);
    const HullProbeResult b = probe(d, mf, q.z0, q.w0, finer);
    if (a.verdict == Verdict::excluded) EXPECT_NE(b.verdict, Verdict::on_graph);
    if (a.verdict != Verdict::on_graph) EXPECT_NE(b.verdict, Verdict::on_graph);
  }
}

TEST(Sweep, ExclusionSoundOnCertifiedInputs) {
  const DiscFunction d = build("conj(z)", "0.05*z*conj(z)", 0.25, grid());
  const ContinuityModulus m = modulus(d);
  for (const auto& q : default_lattice(d, {6, 4, 8, 0.05})) {
    const HullProbeResult p = probe(d, m, q.z0, q.w0, grid());
    if (p.outside_box || p.verdict == Verdict::on_graph || p.modulus_failed) continue;
    const bool margins = p.lhs > 4 * p.psi1 / 9 + 1e-9 && p.rhs_sup < p.psi1 / 9 - 1e-9;
    if (margins && certify_psh(PsiFunction(d, p.r), {8, 32, 4, 16}).pass) {
      EXPECT_EQ(p.verdict, Verdict::excluded);
    }
  }
}
