#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rimming/cli/commands.hpp"

using namespace rimming;
using namespace rimming::cli;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("rimming_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

const char* kEvolve = R"(
[params]
a0 = 1
a1 = 16
a2 = -8
[grid]
n = 32
length = 2pi
[initial]
constant = 0.3
cos = 0.02, 0.01
[evolve]
t_end = 0.05
dt_max = 0.01
snapshot_every = 0.025
interface_mobility = entropy
)";

}  // namespace

TEST(ParseConfig, EvolveExample) {
    const RunConfig c = parse_config(kEvolve);
    EXPECT_EQ(c.mode, Mode::Evolve);
    ASSERT_TRUE(c.params);
    EXPECT_DOUBLE_EQ(c.params->a1, 16.0);
    EXPECT_DOUBLE_EQ(c.params->a2, -8.0);
    EXPECT_EQ(c.grid.n(), 32);
    EXPECT_DOUBLE_EQ(c.grid.length(), two_pi);
    ASSERT_TRUE(c.initial);
    EXPECT_EQ(c.initial->cos_coeffs, (std::vector<double>{0.02, 0.01}));
    EXPECT_DOUBLE_EQ(c.evolve.t_end, 0.05);
    EXPECT_EQ(c.evolve.interface_mobility, InterfaceMobility::Entropy);
    EXPECT_EQ(c.output_dir, "out");
    EXPECT_EQ(c.seed, 1ul);
}

TEST(ParseConfig, PhysicalBlockBuildsDirectCoefficients) {
    const RunConfig c = parse_config("[physical]\nchi = 3\nmu = 6\n[initial]\nconstant = 1\n[evolve]\nt_end = 1\n");
    const Params p = c.params->build(c.grid);
    EXPECT_DOUBLE_EQ(p.a0, 1.0);
    EXPECT_DOUBLE_EQ(p.a1, 1.0);
    EXPECT_DOUBLE_EQ(p.a2, -2.0);
    EXPECT_DOUBLE_EQ(p.a3, 1.0);
}

TEST(ParseConfig, ErrorsNameTheKey) {
    EXPECT_NE(error_of("[params]\na0 = 1\nbogus = 2\n[evolve]\nt_end = 1\n").find("params.bogus"), std::string::npos);
    EXPECT_NE(error_of("[params]\na0 = 0\n[initial]\n[evolve]\nt_end = 1\n").find("params.a0"), std::string::npos);
    EXPECT_NE(error_of("[params]\na0 = 1\na0 = 2\n[evolve]\nt_end = 1\n").find("duplicate"), std::string::npos);
    EXPECT_NE(error_of("[params]\na0 = x\n[evolve]\nt_end = 1\n").find("params.a0"), std::string::npos);
    EXPECT_NE(error_of("[params]\na0 = 1\n[initial]\nconstant = 1\n[evolve]\n").find("evolve.t_end"),
              std::string::npos);
    EXPECT_NE(error_of("[params]\na0 = 1\n[initial]\nconstant = 1\n[evolve]\nt_end = 1\n"
                       "interface_mobility = harmonic\n")
                  .find("interface_mobility"),
              std::string::npos);
}

TEST(ParseConfig, StructuralErrors) {
    EXPECT_FALSE(error_of("[grid]\nn = 32\n").empty());
    EXPECT_FALSE(error_of("[params]\na0 = 1\n[initial]\nconstant = 1\n[evolve]\nt_end = 1\n[check]\n").empty());
    EXPECT_FALSE(error_of("[params]\na0 = 1\n[physical]\nchi = 1\nmu = 1\n[initial]\n[evolve]\nt_end = 1\n").empty());
    EXPECT_FALSE(error_of("[params]\na0 = 1\n[grid]\nn = 31\n[initial]\n[evolve]\nt_end = 1\n").empty());
    EXPECT_FALSE(error_of("[params]\na0 = 1\n[initial]\nconstant = 0.01\ncos = 0.5\n[evolve]\nt_end = 1\n").empty());
    EXPECT_FALSE(error_of("[params]\na0 = 1\n[evolve]\nt_end = 1\n").empty());
}

TEST(ParseConfig, SteadyAndSweep) {
    const RunConfig s = parse_config("[steady]\nmu = 1\nchi = 1\nstart = 0.1\nstop = 0.5\nstep = 0.1\n");
    EXPECT_EQ(s.mode, Mode::Steady);
    EXPECT_DOUBLE_EQ(s.steady.stop, 0.5);
    EXPECT_EQ(s.steady.mode, ContinuationMode::FixedFlux);
    EXPECT_FALSE(error_of("[steady]\nmu = 1\nchi = 1\nstart = 0.1\nmode = mass\n").empty());

    const RunConfig w = parse_config(
        "[params]\na0 = 1\na1 = 1\n[initial]\nconstant = 0.3\n[sweep]\nparameter = a3\nvalues = 1, 3, 10\nt_end = 1\n");
    EXPECT_EQ(w.sweep.values, (std::vector<double>{1.0, 3.0, 10.0}));
    EXPECT_FALSE(error_of("[params]\na0 = 1\n[initial]\nconstant = 0.3\n[sweep]\nparameter = chi\nvalues = 1\n"
                          "t_end = 1\n")
                     .empty());
}

TEST(Reference, ListsEveryKey) {
    std::ostringstream os;
    write_reference(os);
    const std::string s = os.str();
    for (const KeySpec& k : key_table()) EXPECT_NE(s.find(k.key), std::string::npos) << k.section << "." << k.key;
    EXPECT_NE(s.find("[steady]"), std::string::npos);
}

TEST(Checks, RandomTrigIsNonnegative) {
    std::mt19937_64 rng(1);
    const Grid g(64);
    for (int t = 0; t < 100; ++t) EXPECT_GE(random_nonnegative_trig(g, rng).min(), 0.0);
}

TEST(Checks, SuitesPass) {
    const Grid g(64);
    EXPECT_TRUE(interpolation_suite(g, 200, 3).passed);
    EXPECT_TRUE(interpolation_sharpness_suite(g).passed);
    EXPECT_TRUE(entropy_identity_suite().passed);
    EXPECT_TRUE(mobility_suite(3).passed);
    EXPECT_TRUE(constant_preservation_suite(g).passed);
    EXPECT_TRUE(constants_determinism_suite(g).passed);
}

TEST(Commands, EvolveWritesArtifacts) {
    const fs::path dir = scratch("evolve");
    ASSERT_EQ(dispatch(parse_config(kEvolve), dir), kOk);
    EXPECT_TRUE(fs::exists(dir / "diagnostics.csv"));
    EXPECT_TRUE(fs::exists(dir / "bounds.json"));
    EXPECT_TRUE(fs::exists(dir / "snapshots" / "snapshot_0000.csv"));
    const nlohmann::json m = read_json(dir / "manifest.json");
    EXPECT_EQ(m["termination"], "completed");
    std::ifstream in(dir / "snapshots" / "snapshot_0000.csv");
    const PeriodicField h0 = read_field_csv(in, Grid(32));
    EXPECT_NEAR(h0[0], 0.33 + std::pow(1e-8, 0.3), 1e-12);
    fs::remove_all(dir);
}

TEST(Commands, SteadyCubicWritesRoots) {
    const fs::path dir = scratch("steady");
    const RunConfig c = parse_config("[steady]\nmu = 1\nchi = 0\nstart = 0.5\n[grid]\nn = 64\n");
    ASSERT_EQ(dispatch(c, dir), kOk);
    EXPECT_TRUE(fs::exists(dir / "moffatt_roots.csv"));
    EXPECT_TRUE(fs::exists(dir / "branch.csv"));
    const nlohmann::json m = read_json(dir / "manifest.json");
    EXPECT_NEAR(m["critical_flux"].get<double>(), 2.0 / 3.0, 1e-15);
    fs::remove_all(dir);
}

TEST(Commands, CheckWithoutRun) {
    const fs::path dir = scratch("check");
    const RunConfig c = parse_config("[check]\ntrials = 50\n[grid]\nn = 64\n");
    testing::internal::CaptureStdout();
    const int code = dispatch(c, dir);
    const std::string out = testing::internal::GetCapturedStdout();
    EXPECT_EQ(code, kOk);
    EXPECT_EQ(out.find("FAIL"), std::string::npos);
    EXPECT_TRUE(read_json(dir / "check.json")["passed"].get<bool>());
    fs::remove_all(dir);
}

TEST(Commands, BadInitialFileIsInputError) {
    const fs::path dir = scratch("badfile");
    const RunConfig c =
        parse_config("[params]\na0 = 1\n[initial]\nfile = /nonexistent/h0.csv\n[evolve]\nt_end = 1\n");
    testing::internal::CaptureStderr();
    EXPECT_EQ(dispatch(c, dir), kBadInput);
    testing::internal::GetCapturedStderr();
    EXPECT_EQ(read_json(dir / "error.json")["error"], "InputError");
    fs::remove_all(dir);
}
