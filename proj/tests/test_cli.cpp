#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "eq2pc/cli.hpp"
#include "eq2pc/database.hpp"
#include "eq2pc/io.hpp"
#include "fixtures.hpp"

using namespace eq2pc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "eq2pc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("eq2pc_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const Structure& s) {
    const auto p = dir_ / name;
    save_structure(p, s);
    return p.string();
  }
  std::string write_json(const std::string& name, const Json& j) {
    const auto p = dir_ / name;
    write_text_file(p, j.dump());
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST(StructureFile, CanonicalRoundTrip) {
  const std::string text = R"({"dims":[4,3],"phases":2,"cells":[1,2,2,2,2,1,2,1,1,2,2,1],"meta":{"name":"root","z":[2,3]}})";
  const auto doc = parse_structure(text);
  EXPECT_EQ(doc.structure, fixtures::root2d_a());
  EXPECT_EQ(serialize_structure(doc.structure, doc.meta), text);
  const std::string bare = serialize_structure(fixtures::root1d_a());
  EXPECT_EQ(bare, R"({"dims":[12],"phases":2,"cells":[1,1,1,2,1,2,2,1,2,2,2,2]})");
  EXPECT_EQ(parse_structure(bare).structure, fixtures::root1d_a());
  EXPECT_TRUE(parse_structure(bare).meta.is_null());
}

TEST(StructureFile, RejectsMalformedInput) {
  EXPECT_THROW(parse_structure("{"), FormatError);
  EXPECT_THROW(parse_structure(R"({"dims":[2],"phases":2,"cells":[1]})"), FormatError);
  EXPECT_THROW(parse_structure(R"({"dims":[2],"phases":2,"cells":[1,3]})"), FormatError);
  EXPECT_THROW(parse_structure(R"({"dims":[2],"phases":2,"cells":[1,2],"extra":1})"), FormatError);
  EXPECT_THROW(parse_structure(R"({"dims":[0],"phases":2,"cells":[]})"), FormatError);
  EXPECT_THROW(parse_structure(R"({"phases":2,"cells":[1]})"), FormatError);
}

TEST(StructureFile, KernelAndPlanDocuments) {
  const auto k = fixtures::kernels2d();
  EXPECT_EQ(kernels_to_json(k).dump(), R"({"dims":[2,3],"kernels":[[1,1,1,0,1,0],[1,0,0,1,1,0]]})");
  EXPECT_EQ(kernels_from_json(kernels_to_json(k)).kernels(), k.kernels());
  EXPECT_EQ(plan_from_json(Json::parse(R"({"mapping":[1,1,2]})")).mapping(), (std::vector<int>{1, 1, 2}));
  EXPECT_THROW(plan_from_json(Json::parse(R"({"mapping":[1,3]})")), FormatError);
  EXPECT_THROW(kernels_from_json(Json::parse(R"({"dims":[2],"kernels":[[0,0]]})")), FormatError);
}

TEST_F(CliTest, LargeStructuresUseRawDump) {
  const Structure big = upsample(fixtures::root2d_a(), Factors({300, 300}));
  ASSERT_GT(big.size(), kRawCellThreshold);
  const auto p = dir_ / "big.json";
  save_structure(p, big, Json{{"note", "raw"}});
  EXPECT_TRUE(fs::exists(dir_ / "big.u8"));
  EXPECT_EQ(fs::file_size(dir_ / "big.u8"), big.size());
  const auto doc = load_structure(p);
  EXPECT_EQ(doc.structure, big);
  EXPECT_EQ(doc.meta["note"], "raw");
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
  EXPECT_EQ(run_cli({"homog", path("missing.json"), "10", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"derive", "phase_extend", write("a.json", fixtures::root1d_a()), "--out", path("db")}).code,
            cli::kExitUsage);
}

TEST_F(CliTest, SearchWritesClasses) {
  const auto none = run_cli({"search", "2", "--phases", "2"});
  EXPECT_EQ(none.code, 0);
  EXPECT_NE(none.out.find("no classes found"), std::string::npos);

  const auto r = run_cli({"search", "4", "3", "--phases", "2", "--out", path("classes")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("classes: 2"), std::string::npos);
  const Json manifest = read_json_file(dir_ / "classes" / "class_000" / "manifest.json");
  ASSERT_EQ(manifest["members"].size(), 2u);
  const auto a = load_structure(dir_ / "classes" / "class_000" / manifest["members"][0].get<std::string>());
  const auto b = load_structure(dir_ / "classes" / "class_000" / manifest["members"][1].get<std::string>());
  EXPECT_TRUE(equivalent(a.structure, b.structure));
  EXPECT_EQ(manifest["fingerprint"], independent_set(a.structure).fingerprint());
}

TEST_F(CliTest, BudgetFromEnvironment) {
  setenv("EQ2PC_BUDGET", "100", 1);
  const auto r = run_cli({"search", "4", "3"});
  unsetenv("EQ2PC_BUDGET");
  EXPECT_EQ(r.code, cli::kExitComputation);
  EXPECT_NE(r.err.find("budget"), std::string::npos);
}

TEST_F(CliTest, DeriveChainAndReplay) {
  const std::string a = write("a.json", fixtures::root2d_a()), b = write("b.json", fixtures::root2d_b());
  const std::string kernels = write_json("k.json", kernels_to_json(fixtures::kernels2d()));
  const std::string plan = write_json("plan.json", Json::parse(R"({"mapping":[1,1,2]})"));
  const std::string db = path("db");

  auto r = run_cli({"derive", "kernel_extend", a, b, "--kernels", kernels, "--out", db});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("inherited 2PC-equivalence: verified"), std::string::npos);

  const std::string ea = (fs::path(db) / "structures" / (structure_id(kernel_extend(fixtures::root2d_a(), fixtures::kernels2d())) + ".json")).string();
  const std::string eb = (fs::path(db) / "structures" / (structure_id(kernel_extend(fixtures::root2d_b(), fixtures::kernels2d())) + ".json")).string();
  ASSERT_TRUE(fs::exists(ea));
  r = run_cli({"derive", "coalesce", ea, eb, "--plan", plan, "--out", db});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run_cli({"derive", "upsample", ea, "--factor", "2", "--out", db});
  ASSERT_EQ(r.code, 0) << r.err;

  const Json index = read_json_file(fs::path(db) / "derivations.json");
  EXPECT_EQ(index["records"].size(), 5u);

  r = run_cli({"db-replay", db});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("records: 5"), std::string::npos);
  EXPECT_NE(r.out.find("all children reproduced"), std::string::npos);

  // Tampering with a stored child breaks the replay.
  const Structure child = coalesce(kernel_extend(fixtures::root2d_a(), fixtures::kernels2d()), CoalescencePlan({1, 1, 2}));
  const auto child_path = fs::path(db) / "structures" / (structure_id(child) + ".json");
  ASSERT_TRUE(fs::exists(child_path));
  save_structure(child_path, fixtures::root2d_a());
  r = run_cli({"db-replay", db});
  EXPECT_EQ(r.code, cli::kExitComputation);
  EXPECT_NE(r.out.find("mismatch"), std::string::npos);
}

TEST_F(CliTest, DeriveRefusesOverlapAndLockedDatabase) {
  const std::string a = write("a.json", Structure({2}, 2, {1, 2}));
  const std::string kernels = write_json("k.json", Json::parse(R"({"dims":[3],"kernels":[[1,1,1],[1,1,1]]})"));
  auto r = run_cli({"derive", "kernel_extend", a, "--kernels", kernels, "--z", "2", "--out", path("db")});
  EXPECT_EQ(r.code, cli::kExitComputation);
  EXPECT_FALSE(fs::exists(fs::path(path("db")) / "derivations.json"));

  fs::create_directories(path("locked"));
  write_text_file(fs::path(path("locked")) / ".lock", "");
  r = run_cli({"derive", "phase_extend", a, "--z", "2", "--out", path("locked")});
  EXPECT_EQ(r.code, cli::kExitComputation);
  EXPECT_NE(r.err.find("locked"), std::string::npos);
}

TEST_F(CliTest, DeriveWarnsForUnrelatedInputs) {
  const auto r = run_cli({"derive", "phase_extend", write("a.json", fixtures::root2d_a()),
                          write("f.json", fixtures::flipped_root()), "--z", "2,3", "--out", path("db")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("not 2PC-equivalent"), std::string::npos);
}

TEST_F(CliTest, Compare) {
  const std::string a = write("a.json", fixtures::root2d_a()), b = write("b.json", fixtures::root2d_b());
  auto r = run_cli({"compare", a, b, "--mpc", "3", "--refine", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("2PC-equivalent: yes"), std::string::npos);
  EXPECT_NE(r.out.find("3-point deviation (refinement 2): 31.876"), std::string::npos);
  r = run_cli({"compare", a, a, "--mpc", "3"});
  EXPECT_NE(r.out.find("3-point deviation (refinement 1): 0%"), std::string::npos);
  r = run_cli({"compare", a, write("c.json", fixtures::root1d_a())});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("not comparable"), std::string::npos);
  r = run_cli({"compare", a, write("f.json", fixtures::flipped_root())});
  EXPECT_NE(r.out.find("2PC-equivalent: no"), std::string::npos);
}

TEST_F(CliTest, HomogAndBounds) {
  const std::string a = write("a.json", fixtures::root2d_a()), b = write("b.json", fixtures::root2d_b());
  auto r = run_cli({"homog", a, "10", "1", "--refine", "2", "--against", b});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("3.14551 0\n  0 2.26866"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("relative deviation: 22.04"), std::string::npos) << r.out;
  r = run_cli({"homog", a, "10", "1", "--csv"});
  EXPECT_EQ(r.out.substr(0, 26), "refinement,k11,k12,k21,k22");
  EXPECT_EQ(run_cli({"homog", write("c.json", fixtures::root1d_a()), "10", "1"}).code, cli::kExitUsage);

  r = run_cli({"bounds", "10", "1", "--samples", "3"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "v1,voigt,reuss,hs_upper,hs_lower\n0,1,1,1,1\n0.5,5.5,1.81818,4.19355,2.38462\n1,10,10,10,10\n");
}

TEST_F(CliTest, Niezgoda) {
  const std::string s = write("s.json", fixtures::ambiguity1d());
  auto r = run_cli({"niezgoda", s, "--gamma", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("undetermined frequencies: 2, 4\n"), std::string::npos);
  EXPECT_NE(r.out.find("properties: all hold"), std::string::npos);
  r = run_cli({"niezgoda", s, "--gamma", "1", "--symmetry", "--inverse-sum"});
  EXPECT_NE(r.out.find("unknown entries: 0"), std::string::npos);
  r = run_cli({"niezgoda", write("t.json", fixtures::vanishing_a())});
  EXPECT_NE(r.out.find("undetermined frequencies: (2,0), (2,1), (2,2)"), std::string::npos) << r.out;
}

TEST_F(CliTest, RenderPpm) {
  const std::string s = write("s.json", fixtures::root2d_a());
  const auto r = run_cli({"render", s, "--out", path("s.ppm"), "--block", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string img = slurp(path("s.ppm"));
  const std::string header = "P6\n12 16\n255\n";
  ASSERT_EQ(img.size(), header.size() + 12 * 16 * 3);
  EXPECT_EQ(img.substr(0, header.size()), header);
  // cell (0,0) is phase 1, cell (0,1) is phase 2 = white
  const auto pixel = [&](std::size_t x, std::size_t y) { return img.substr(header.size() + (y * 12 + x) * 3, 3); };
  const auto c1 = palette_color(1, 2);
  EXPECT_EQ(pixel(0, 0), std::string(c1.begin(), c1.end()));
  EXPECT_EQ(pixel(5, 1), std::string(3, static_cast<char>(255)));
}
