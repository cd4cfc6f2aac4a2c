#include <gtest/gtest.h>

#include <cstring>

#include "thinobs/config.hpp"
#include "thinobs/snapshot.hpp"

using namespace thinobs;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const RunConfig c;
  EXPECT_EQ(parse_config(c.to_ini()).to_ini(), c.to_ini());
  EXPECT_EQ(parse_config(c.to_ini()).hash(), c.hash());
}

TEST(Config, NonTrivialValuesRoundTripExactly) {
  RunConfig c;
  c.dimension = 3;
  c.resolution = 65;
  c.kind = DataKind::perturbed_profile;
  c.epsilon = 0.1 / 3.0;
  c.tau = std::nextafter(1.0, 2.0);
  c.spine_angle = 0.7;
  c.requests = {"frequency", "decay", "holder"};
  c.centers = {{}, {0.25, -0.125, 0.0}};
  c.mus = {7.0 / 6.0};
  c.gammas = {2.0, 4.0};
  c.criteria = {4, 11};
  c.seed = 12345678901234ull;
  c.output_dir = "runs/a b";
  const auto d = parse_config(c.to_ini());
  EXPECT_EQ(d.to_ini(), c.to_ini());
  EXPECT_EQ(d.epsilon, c.epsilon);
  EXPECT_EQ(d.tau, c.tau);
  EXPECT_EQ(d.centers, c.centers);
  EXPECT_EQ(d.seed, c.seed);
  EXPECT_EQ(d.output_dir, "runs/a b");
}

TEST(Config, HashTracksEveryField) {
  RunConfig a, b;
  b.verify_allowance = 0.0;
  EXPECT_NE(a.hash(), b.hash());
  b = a;
  b.tau = std::nextafter(1.0, 2.0);
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, Fnv1aReference) {
  // FNV-1a 64 of the canonical text, recomputed here byte by byte
  const RunConfig c;
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : c.to_ini()) h = (h ^ ch) * 0x100000001b3ull;
  EXPECT_EQ(c.hash(), h);
  EXPECT_EQ(hash_hex(0x1f), "000000000000001f");
}

TEST(Config, PartialFilesKeepDefaults) {
  const auto c = parse_config("[data]\nlambda = 7/2\n[analysis]\nrequests = frequency\ncenters = 0,0; -0.25,0\n");
  EXPECT_EQ(c.lambda, Homogeneity::halves(7));
  EXPECT_EQ(c.resolution, 257);
  ASSERT_EQ(c.centers.size(), 2u);
  EXPECT_EQ(c.centers[1], (std::vector<double>{-0.25, 0.0}));
  EXPECT_EQ(parse_config("[data]\nlambda = 1.5\n").lambda, Homogeneity::halves(3));
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(field_of("[grid]\nresolution = 256\n"), "grid.resolution");
  EXPECT_EQ(field_of("[grid]\ndimension = 4\n"), "grid.dimension");
  EXPECT_EQ(field_of("[grid]\nhalf_width = -1\n"), "grid.half_width");
  EXPECT_EQ(field_of("[grid]\nresolution = abc\n"), "grid.resolution");
  EXPECT_EQ(field_of("[grid]\nsize = 3\n"), "grid.size");
  EXPECT_EQ(field_of("[data]\nlambda = 5/2\n"), "data.lambda");
  EXPECT_EQ(field_of("[data]\nkind = nonsense\n"), "data.kind");
  EXPECT_EQ(field_of("[data]\nkind = perturbed\nlambda2 = 3/2\n"), "data.lambda2");
  EXPECT_EQ(field_of("[solver]\nomega = 2.5\n"), "solver.omega");
  EXPECT_EQ(field_of("[solver]\nthin = maybe\n"), "solver.thin");
  EXPECT_EQ(field_of("[analysis]\nrequests = frequency spectra\n"), "analysis.requests");
  EXPECT_EQ(field_of("[analysis]\nr_min = 0.001\n"), "analysis.r_min");
  EXPECT_EQ(field_of("[analysis]\ncenters = 0,0,0\n"), "analysis.centers");
  EXPECT_EQ(field_of("[analysis]\ncenters = 0,0.5\n"), "analysis.centers");
  EXPECT_EQ(field_of("[verify]\ncriteria = 15\n"), "verify.criteria");
  EXPECT_EQ(field_of("[verify]\nresolution_2d = 100\n"), "verify.resolution_2d");
  EXPECT_EQ(field_of("[run]\nseed = -1\n"), "run.seed");
  EXPECT_EQ(field_of("[extra]\nx = 1\n"), "extra");
}

TEST(Snapshot, RoundTripIsBitExact) {
  const auto g = build_grid<2>(33);
  auto s = solve<2>(g, make_boundary_data<2>(DataKind::profile, DataParams{}));
  const auto bytes = encode_snapshot(s, 0xabcdefull);
  ASSERT_EQ(bytes.size(), 80u + 8u * g.size());
  const auto head = decode_snapshot_header(bytes);
  EXPECT_EQ(head.dimension, 2u);
  EXPECT_EQ(head.resolution, 33u);
  EXPECT_TRUE(head.converged());
  EXPECT_FALSE(head.slit());
  EXPECT_EQ(head.config_hash, 0xabcdefull);
  const auto t = decode_snapshot<2>(bytes);
  EXPECT_EQ(t.u.values(), s.u.values());
  EXPECT_EQ(t.iterations, s.iterations);
  EXPECT_EQ(t.residual, s.residual);
  EXPECT_EQ(encode_snapshot(t, 0xabcdefull), bytes);
}

TEST(Snapshot, LayoutOffsets) {
  const auto g = build_grid<3>(17, 1.0);
  SolverOptions o;
  o.max_iter = 1;
  const auto s = solve<3>(g, make_boundary_data<3>(DataKind::profile, DataParams{}), o);
  const auto bytes = encode_snapshot(s, 7);
  EXPECT_EQ(std::memcmp(bytes.data(), "THINOBS1", 8), 0);
  std::uint32_t u32;
  std::memcpy(&u32, bytes.data() + 12, 4);
  EXPECT_EQ(u32, 3u);
  std::memcpy(&u32, bytes.data() + 20, 4);
  EXPECT_EQ(u32 & 1u, 0u);  // not converged
  double f64;
  std::memcpy(&f64, bytes.data() + 40, 8);
  EXPECT_EQ(f64, g.spacing());
  std::memcpy(&f64, bytes.data() + 80 + 8 * 5, 8);
  EXPECT_EQ(f64, s.u[5]);
}

TEST(Snapshot, RejectsCorruptInput) {
  const auto g = build_grid<2>(17);
  const auto s = solve<2>(g, make_boundary_data<2>(DataKind::profile, DataParams{}));
  auto bytes = encode_snapshot(s);
  EXPECT_THROW(decode_snapshot<3>(bytes), Error);
  EXPECT_THROW(decode_snapshot_header(bytes.substr(0, bytes.size() - 1)), Error);
  bytes[0] = 'X';
  EXPECT_THROW(decode_snapshot_header(bytes), Error);
  EXPECT_THROW(decode_snapshot_header("short"), Error);
}
