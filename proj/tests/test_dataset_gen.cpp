#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "test_util.hpp"
#include "wdist/data/generate.hpp"
#include "wdist/data/io.hpp"
#include "wdist/data/split.hpp"

using namespace wdist;
using wdist::testing::TempDir;

namespace {

GenerationSpec make_spec(PairKind kind, int n, std::size_t samples, int bins, std::uint64_t seed) {
  GenerationSpec s;
  s.kind = kind;
  s.n_qubits = n;
  s.n_samples = samples;
  s.uniform_bins = bins;
  s.seed = seed;
  return s;
}

std::map<int, std::size_t> bin_counts_by_label(const LabeledDataset& ds, int bins) {
  std::map<int, std::size_t> counts;
  for (const auto& r : ds.rows) counts[std::min(bins - 1, static_cast<int>(r.label * bins))]++;
  return counts;
}

LabeledDataset synthetic(std::size_t n, int bins) {
  LabeledDataset ds;
  ds.layout = layout_for(1);
  for (std::size_t i = 0; i < n; ++i) {
    DatasetRow r;
    r.features.assign(ds.layout.total_length, static_cast<double>(i));
    r.label = static_cast<double>(i) / static_cast<double>(n);
    // skewed strata: bin b holds roughly proportional to b + 1
    r.bin = bins == 0 ? -1 : static_cast<int>(std::sqrt(static_cast<double>(i) / static_cast<double>(n)) * bins);
    r.provenance = "random_pure";
    ds.rows.push_back(r);
  }
  return ds;
}

}  // namespace

TEST(GeneratePair, LabelRangeAndKinds) {
  SeededRandomSource rng(1);
  const auto spec = make_spec(PairKind::random_pure, 2, 1, 0, 0);
  for (int t = 0; t < 20; ++t) {
    const auto p = generate_pair(spec, rng);
    EXPECT_GE(p.label, 0.0);
    EXPECT_LE(p.label, 1.0);
    EXPECT_EQ(p.label, trace_distance(p.rho, p.sigma));
  }
  const auto gate = generate_pair(make_spec(PairKind::gate_choi, 1, 1, 0, 0), rng);
  EXPECT_EQ(gate.rho.n_qubits(), 2);
  EXPECT_EQ(gate.provenance, "gate_choi");
  const auto mixed = generate_pair(make_spec(PairKind::random_mixed, 2, 1, 0, 0), rng);
  EXPECT_LE(purity(mixed.rho), 1.0 + 1e-12);
}

TEST(GeneratePair, GateWithItselfHasZeroLabel) {
  SeededRandomSource rng(2);
  const auto u = random_unitary(2, rng);
  EXPECT_EQ(trace_distance(choi_state(u), choi_state(u)), 0.0);
}

TEST(GeneratePair, MixedConfigHasBothProvenances) {
  const auto ds = generate_dataset(make_spec(PairKind::mixed_config, 1, 1000, 0, 3));
  std::set<std::string> tags;
  for (const auto& r : ds.rows) tags.insert(r.provenance);
  EXPECT_TRUE(tags.count("gate_choi"));
  EXPECT_TRUE(tags.count("random_pure"));
  EXPECT_EQ(ds.layout.n_qubits, 2);
}

TEST(GeneratePair, DimensionCap) {
  const int saved = max_qubits();
  set_max_qubits(3);
  SeededRandomSource rng(1);
  EXPECT_THROW(generate_pair(make_spec(PairKind::gate_choi, 2, 1, 0, 0), rng), DimensionError);
  set_max_qubits(saved);
}

TEST(SolveAlpha, Endpoints) {
  SeededRandomSource rng(4);
  const auto a = random_pure_state(2, rng), b = random_pure_state(2, rng);
  const double full = trace_distance(a, b);
  EXPECT_EQ(*solve_alpha(a, b, 0.0), 0.0);
  EXPECT_NEAR(*solve_alpha(a, b, full), 1.0, 1e-9);
  const double half = *solve_alpha(a, b, full / 2);
  EXPECT_NEAR(half, 0.5, 1e-9);
  // re-evaluate the distance at the returned α
  EXPECT_NEAR(trace_distance(a, convex_mix(a, b, half)), full / 2, 1e-9);
  EXPECT_FALSE(solve_alpha(a, b, full + 1e-3).has_value());
  EXPECT_THROW(solve_alpha(a, b, -0.1), ParameterError);
}

TEST(SolveAlpha, HitsRandomTargets) {
  SeededRandomSource rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_mixed_state(2, 2, rng), b = random_pure_state(2, rng);
    const double target = rng.uniform() * trace_distance(a, b);
    const auto alpha = solve_alpha(a, b, target);
    ASSERT_TRUE(alpha.has_value());
    EXPECT_NEAR(trace_distance(a, convex_mix(a, b, *alpha)), target, 1e-9);
  }
}

TEST(BinOfSample, ContiguousAndBalanced) {
  std::map<int, int> counts;
  int last = 0;
  for (std::size_t id = 0; id < 1003; ++id) {
    const int b = bin_of_sample(id, 1003, 10);
    EXPECT_GE(b, last);
    last = b;
    counts[b]++;
  }
  EXPECT_EQ(counts.size(), 10u);
  for (auto [b, c] : counts) EXPECT_EQ(c, b < 3 ? 101 : 100);
}

TEST(UniformDataset, BinCounts) {
  const auto ds = generate_uniform_dataset(make_spec(PairKind::random_pure, 2, 1000, 10, 6));
  ASSERT_EQ(ds.size(), 1000u);
  const auto counts = bin_counts_by_label(ds, 10);
  for (int b = 0; b < 10; ++b) {
    EXPECT_GE(counts.at(b), 90u);
    EXPECT_LE(counts.at(b), 110u);
  }
  for (const auto& r : ds.rows) EXPECT_EQ(std::min(9, static_cast<int>(r.label * 10)), r.bin);
}

TEST(UniformDataset, GateBinsAndSingleBin) {
  const auto gates = generate_uniform_dataset(make_spec(PairKind::gate_choi, 1, 200, 10, 7));
  const auto counts = bin_counts_by_label(gates, 10);
  for (int b = 0; b < 10; ++b) EXPECT_EQ(counts.at(b), 20u);

  const auto one = generate_uniform_dataset(make_spec(PairKind::random_pure, 2, 100, 1, 8));
  for (const auto& r : one.rows) {
    EXPECT_GE(r.label, 0.0);
    EXPECT_LE(r.label, 1.0);
    EXPECT_EQ(r.bin, 0);
  }
  EXPECT_THROW(generate_uniform_dataset(make_spec(PairKind::random_pure, 2, 100, 0, 8)), ParameterError);
}

TEST(UniformDataset, WorkerCountDoesNotChangeOutput) {
  const auto spec = make_spec(PairKind::mixed_config, 1, 300, 10, 9);
  const auto a = generate_dataset(spec, 1);
  const auto b = generate_dataset(spec, 8);
  EXPECT_EQ(a.rows, b.rows);
}

TEST(UniformDataset, RetryCapNamesTheBin) {
  // one-qubit pure pairs reach T > t with probability 1 - t^2 per draw, so
  // with one sample per bin the top bins exhaust the retry cap
  const auto spec = make_spec(PairKind::random_pure, 1, 1000, 1000, 10);
  try {
    generate_dataset(spec);
    FAIL() << "expected a generation error";
  } catch (const GenerationError& e) {
    EXPECT_GE(e.bin(), 900);
    EXPECT_NE(std::string(e.what()).find("bin " + std::to_string(e.bin())), std::string::npos) << e.what();
  }
}

TEST(Split, DefaultFractionSizes) {
  const auto ds = synthetic(14000, 10);
  const auto parts = split_dataset(ds, {}, 1);
  EXPECT_EQ(parts[0].size(), 10000u);
  EXPECT_EQ(parts[1].size(), 2000u);
  EXPECT_EQ(parts[2].size(), 2000u);
  EXPECT_EQ(parts[0].split, Split::train);
  EXPECT_EQ(parts[2].split, Split::test);
}

TEST(Split, UnionIsOriginalMultiset) {
  const auto ds = synthetic(537, 10);
  const auto parts = split_dataset(ds, {0.6, 0.3, 0.1}, 2);
  std::multiset<double> original, merged;
  for (const auto& r : ds.rows) original.insert(r.features[0]);
  for (const auto& p : parts)
    for (const auto& r : p.rows) merged.insert(r.features[0]);
  EXPECT_EQ(original, merged);
  EXPECT_EQ(std::set<double>(merged.begin(), merged.end()).size(), merged.size());
}

TEST(Split, StratifiedWithinTwoRows) {
  for (std::size_t n : {140u, 997u, 14000u}) {
    const auto ds = synthetic(n, 10);
    const SplitFractions f;
    const auto parts = split_dataset(ds, f, 3);
    std::map<int, double> global;
    for (const auto& r : ds.rows) global[r.bin] += 1.0;
    const double frac[3] = {f.train, f.val, f.test};
    for (int k = 0; k < 3; ++k) {
      std::map<int, double> local;
      for (const auto& r : parts[static_cast<std::size_t>(k)].rows) local[r.bin] += 1.0;
      for (auto [b, c] : global) EXPECT_LE(std::abs(local[b] - frac[k] * c), 2.0) << "n=" << n << " bin " << b;
    }
  }
}

TEST(Split, ExhaustiveSmallCases) {
  // oracle: for every size and bin pattern up to 12 rows, totals are the
  // rounded targets and each stratum is within two rows of its share
  for (std::size_t n = 3; n <= 12; ++n)
    for (int bins = 1; bins <= 3; ++bins) {
      LabeledDataset ds;
      ds.layout = layout_for(1);
      for (std::size_t i = 0; i < n; ++i) ds.rows.push_back({{}, 0.0, static_cast<int>(i % bins), "x"});
      const SplitFractions f{0.5, 0.25, 0.25};
      const auto parts = split_dataset(ds, f, n * 10 + bins);
      const std::size_t tr = static_cast<std::size_t>(std::llround(n * 0.5));
      const std::size_t va = static_cast<std::size_t>(std::llround(n * 0.25));
      EXPECT_EQ(parts[0].size(), tr);
      EXPECT_EQ(parts[1].size(), va);
      EXPECT_EQ(parts[2].size(), n - tr - va);
    }
}

TEST(Split, DeterministicAndValidated) {
  const auto ds = synthetic(200, 5);
  const auto a = split_dataset(ds, {}, 11), b = split_dataset(ds, {}, 11);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(a[static_cast<std::size_t>(k)].rows, b[static_cast<std::size_t>(k)].rows);
  EXPECT_THROW(split_dataset(ds, {0.5, 0.5, 0.0}, 1), ParameterError);
  EXPECT_THROW(split_dataset(ds, {0.5, 0.3, 0.3}, 1), ParameterError);
}

TEST(DatasetIo, RoundTripIsBitwise) {
  TempDir dir;
  auto ds = generate_dataset(make_spec(PairKind::random_mixed, 2, 50, 5, 12));
  ds.split = Split::val;
  write_dataset(ds, dir.file("d.csv"));
  const auto back = read_dataset(dir.file("d.csv"));
  EXPECT_EQ(back.rows, ds.rows);
  EXPECT_EQ(back.layout, ds.layout);
  EXPECT_EQ(back.split, Split::val);
  ASSERT_TRUE(back.spec.has_value());
  EXPECT_EQ(back.spec->seed, 12u);
  const auto side = read_json_file(sidecar_path(dir.file("d.csv")));
  EXPECT_EQ(side["layout_hash"], hex64(layout_hash(ds.layout)));
}

TEST(DatasetIo, WrongColumnCountReportsLine) {
  TempDir dir;
  const auto ds = generate_dataset(make_spec(PairKind::random_pure, 1, 5, 0, 13));
  write_dataset(ds, dir.file("d.csv"));
  std::string text = read_text_file(dir.file("d.csv"));
  // drop the last cell of the third data row (file line 4)
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) pos = text.find('\n', pos) + 1;
  const std::size_t comma = text.rfind(',', pos - 2);
  text.erase(comma, pos - 1 - comma);
  write_text_file(dir.file("d.csv"), text);
  try {
    read_dataset(dir.file("d.csv"));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    EXPECT_EQ(e.line(), 4);
  }
}

TEST(DatasetIo, LayoutMismatchIsCompatibilityError) {
  TempDir dir;
  const auto ds = generate_dataset(make_spec(PairKind::random_pure, 1, 5, 0, 14));
  write_dataset(ds, dir.file("d.csv"));
  auto side = read_json_file(sidecar_path(dir.file("d.csv")));
  side["layout"] = to_json(layout_for(2));
  write_json_file(sidecar_path(dir.file("d.csv")), side);
  EXPECT_THROW(read_dataset(dir.file("d.csv")), CompatibilityError);
}

TEST(DatasetIo, MissingFileAndBadNumbers) {
  TempDir dir;
  EXPECT_THROW(read_dataset(dir.file("absent.csv")), IoError);
  const auto ds = generate_dataset(make_spec(PairKind::random_pure, 1, 3, 0, 15));
  write_dataset(ds, dir.file("d.csv"));
  std::string text = read_text_file(dir.file("d.csv"));
  const std::size_t second_line = text.find('\n') + 1;
  text.replace(second_line, 1, "x");
  write_text_file(dir.file("d.csv"), text);
  EXPECT_THROW(read_dataset(dir.file("d.csv")), ParseError);
}

// ---------------------------------------------------------------- properties

TEST(Properties, StoredLabelsMatchRegeneratedStates) {
  const auto spec = make_spec(PairKind::mixed_config, 1, 100, 10, 16);
  const auto rows = generate_rows(spec);
  for (std::size_t id = 0; id < rows.size(); ++id) {
    const auto s = generate_sample(spec, id);
    EXPECT_NEAR(trace_distance(s.pair.rho, s.pair.sigma), rows[id].label, 1e-12);
  }
}

TEST(Properties, UniformityChiSquare) {
  const auto ds = generate_uniform_dataset(make_spec(PairKind::random_pure, 2, 2000, 10, 17));
  const auto counts = bin_counts_by_label(ds, 10);
  double chi2 = 0.0;
  for (int b = 0; b < 10; ++b) {
    const double c = static_cast<double>(counts.count(b) ? counts.at(b) : 0);
    chi2 += (c - 200.0) * (c - 200.0) / 200.0;
  }
  EXPECT_LT(chi2, 27.877);  // 0.999 quantile of chi-square with 9 dof
}

TEST(Properties, NaturalPureLabelsConcentrateHigh) {
  const auto ds = generate_dataset(make_spec(PairKind::random_pure, 3, 1000, 0, 18));
  const auto high = std::count_if(ds.rows.begin(), ds.rows.end(), [](const DatasetRow& r) { return r.label > 0.8; });
  EXPECT_GE(static_cast<double>(high) / 1000.0, 0.8);
  for (const auto& r : ds.rows) EXPECT_EQ(r.bin, -1);
}
