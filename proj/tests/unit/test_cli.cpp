#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "edgeweyl/error.hpp"
#include "edgeweyl/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace edgeweyl;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::size_t data_rows(const fs::path& csv) {
    std::ifstream in(csv);
    std::string line;
    std::size_t rows = 0;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    return rows;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("edgeweyl_cli_" + std::string(info->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    /// Writes the S^3 spectrum to s3.csv and returns its path.
    std::string make_s3(const std::string& lambda_max = "1e4") {
        const Result r = run_cli({"spectrum", "--geometry", "s3", "--lambda-max", lambda_max, "--out", path("s3.csv")});
        EXPECT_EQ(r.code, 0) << r.err;
        return path("s3.csv");
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SphereSpectrumHasHundredRows) {
    const std::string csv = make_s3();
    EXPECT_EQ(data_rows(csv), 100u);
    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "lambda,weight");
    const json meta = io::read_json(path("s3.meta.json"));
    EXPECT_EQ(meta.at("dimension"), 3);
    EXPECT_EQ(meta.at("lambda_max"), 1e4);
    const json manifest = io::read_json(path("s3.run.json"));
    EXPECT_EQ(manifest.at("command"), "spectrum");
    for (const auto& f : manifest.at("output_files")) EXPECT_TRUE(fs::exists(f.get<std::string>())) << f;
    EXPECT_EQ(manifest.at("tool_version"), cli::tool_version());
}

TEST_F(CliTest, TorusFirstShell) {
    const Result r = run_cli({"spectrum", "--geometry", "torus2", "--lambda-max", "1", "--out", path("t.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const SpectralMeasure sm = io::read_spectrum_csv(path("t.csv"));
    ASSERT_EQ(sm.atoms.size(), 2u);
    EXPECT_EQ(sm.atoms[0].lambda, 0.0);
    EXPECT_EQ(sm.atoms[0].weight, 1.0);
    EXPECT_EQ(sm.atoms[1].lambda, 1.0);
    EXPECT_EQ(sm.atoms[1].weight, 4.0);
}

TEST_F(CliTest, LensRejectsNonCoprimeParameters) {
    const Result r = run_cli({"spectrum", "--geometry", "lens", "--p", "2", "--q", "2", "--lambda-max", "10",
                              "--out", path("l.csv")});
    EXPECT_EQ(r.code, cli::kValidation);
    EXPECT_NE(r.err.find("p,q not coprime"), std::string::npos);
}

TEST_F(CliTest, TorusFromGramFile) {
    std::ofstream(path("gram.txt")) << "1 0\n0 4\n";
    const Result r = run_cli({"spectrum", "--geometry", "torusd", "--gram", path("gram.txt"), "--lambda-max", "4",
                              "--out", path("g.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const SpectralMeasure sm = io::read_spectrum_csv(path("g.csv"));
    // k1^2 + 4 k2^2 <= 4: values 0 (1), 1 (2), 4 (4).
    ASSERT_EQ(sm.atoms.size(), 3u);
    EXPECT_EQ(sm.atoms[2].weight, 4.0);
}

TEST_F(CliTest, PipelineRecoversDimension) {
    const std::string csv = make_s3();
    const Result r = run_cli({"pipeline", "--in", csv, "--epsilon", "1", "--window", "1e3:1e4", "--out", path("p")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json est = io::read_json(path("p.estimate.json"));
    EXPECT_GE(est.at("d_hat").get<double>(), 2.98);
    EXPECT_LE(est.at("d_hat").get<double>(), 3.02);
    for (const char* key : {"alpha_hat", "gamma_hat", "window", "r_squared", "epsilon", "rule"}) {
        EXPECT_TRUE(est.contains(key)) << key;
    }
    EXPECT_EQ(data_rows(path("p.counting.csv")), 64u);
    EXPECT_TRUE(fs::exists(path("p.run.json")));
}

TEST_F(CliTest, PipelinePolynomialRuleReportsK) {
    const std::string csv = make_s3("2e4");
    const Result r = run_cli({"pipeline", "--in", csv, "--rule", "poly", "--k", "2", "--out", path("p")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json est = io::read_json(path("p.estimate.json"));
    ASSERT_TRUE(est.contains("k_hat"));
    EXPECT_NEAR(est.at("k_hat").get<double>(), 2.0, 0.05);
}

TEST_F(CliTest, PipelinePerturbedRuleReportsEnvelope) {
    const std::string csv = make_s3("1e5");
    const Result r = run_cli({"pipeline", "--in", csv, "--rule", "perturbed", "--family", "boundedoffset", "--c", "2",
                              "--out", path("p")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json est = io::read_json(path("p.estimate.json"));
    EXPECT_TRUE(est.contains("envelope_K"));
    EXPECT_EQ(est.at("rule").at("params").at("family"), "boundedoffset");
}

TEST_F(CliTest, PipelineRejectsNonMonotoneRule) {
    const std::string csv = make_s3();
    const Result r = run_cli({"pipeline", "--in", csv, "--rule", "poly", "--k", "1", "--out", path("p")});
    ASSERT_EQ(r.code, 0) << r.err;
    // A bad window is a usage problem.
    EXPECT_EQ(run_cli({"pipeline", "--in", csv, "--window", "abc", "--out", path("p")}).code, cli::kUsage);
}

TEST_F(CliTest, VerifyPassesOnTheSphere) {
    const std::string csv = make_s3();
    const Result r = run_cli({"verify", "--in", csv, "--krein", "--n-keep", "6", "--out", path("v.json")});
    ASSERT_EQ(r.code, 0) << r.err << r.out;
    const json report = io::read_json(path("v.json"));
    EXPECT_TRUE(report.at("passed").get<bool>());
    bool saw_match = false;
    for (const auto& c : report.at("checks")) {
        EXPECT_TRUE(c.at("passed").get<bool>()) << c.dump();
        EXPECT_LE(c.at("residual").get<double>(), 1e-12 + (c.at("name") == "krein_match" ? 1e-8 : 0.0));
        if (c.at("name") == "krein_match") saw_match = true;
    }
    EXPECT_TRUE(saw_match);
    EXPECT_TRUE(fs::exists(path("v.run.json")));
}

TEST_F(CliTest, CorruptedWeightIsRejectedOnLoad) {
    const std::string csv = make_s3();
    std::string text = slurp(csv);
    const auto pos = text.find(",9\n");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 3, ",-9\n");
    std::ofstream(csv, std::ios::binary | std::ios::trunc) << text;
    EXPECT_EQ(run_cli({"verify", "--in", csv}).code, cli::kValidation);
    EXPECT_THROW(io::read_spectrum_csv(csv), ValidationError);
}

TEST_F(CliTest, MalformedCsvIsAValidationError) {
    std::ofstream(path("bad.csv")) << "lambda,weight\n1,abc\n";
    EXPECT_EQ(run_cli({"verify", "--in", path("bad.csv")}).code, cli::kValidation);
    std::ofstream(path("nohead.csv")) << "1,2\n";
    EXPECT_EQ(run_cli({"verify", "--in", path("nohead.csv")}).code, cli::kValidation);
}

TEST_F(CliTest, MissingInputIsAUsageError) {
    const Result r = run_cli({"pipeline", "--in", path("absent.csv")});
    EXPECT_EQ(r.code, cli::kUsage);
}

TEST_F(CliTest, BadFlagsAreUsageErrors) {
    EXPECT_EQ(run_cli({"spectrum", "--geometry", "s3"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"spectrum", "--geometry", "klein", "--lambda-max", "1", "--out", path("x.csv")}).code,
              cli::kUsage);
    EXPECT_EQ(run_cli({"spectrum", "--bogus"}).code, cli::kUsage);
    EXPECT_EQ(run_cli({}).code, cli::kUsage);
    EXPECT_EQ(run_cli({"--replay", path("none.json")}).code, cli::kUsage);
}

TEST_F(CliTest, HelpAndVersionSucceed) {
    EXPECT_EQ(run_cli({"--help"}).code, 0);
    const Result v = run_cli({"--version"});
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find(cli::tool_version()), std::string::npos);
}

TEST_F(CliTest, IdenticalFlagsGiveIdenticalBytes) {
    const std::vector<std::string> args{"spectrum", "--geometry", "synthetic", "--d", "2", "--gamma", "1",
                                        "--remainder", "jitter", "--amplitude", "0.2", "--seed", "9",
                                        "--lambda-max", "500", "--out", path("a.csv")};
    ASSERT_EQ(run_cli(args).code, 0);
    const std::string first = slurp(path("a.csv"));
    const std::string first_meta = slurp(path("a.meta.json"));
    ASSERT_EQ(run_cli(args).code, 0);
    EXPECT_EQ(slurp(path("a.csv")), first);
    EXPECT_EQ(slurp(path("a.meta.json")), first_meta);
}

TEST_F(CliTest, ReplayReproducesOutputs) {
    const std::string csv = make_s3();
    const std::string spectrum_bytes = slurp(csv);
    fs::remove(csv);
    ASSERT_EQ(run_cli({"--replay", path("s3.run.json")}).code, 0);
    EXPECT_EQ(slurp(csv), spectrum_bytes);

    ASSERT_EQ(run_cli({"pipeline", "--in", csv, "--window", "1e3:5e3", "--out", path("p")}).code, 0);
    const std::string counting = slurp(path("p.counting.csv"));
    const std::string estimate = slurp(path("p.estimate.json"));
    fs::remove(path("p.counting.csv"));
    fs::remove(path("p.estimate.json"));
    ASSERT_EQ(run_cli({"--replay", path("p.run.json")}).code, 0);
    EXPECT_EQ(slurp(path("p.counting.csv")), counting);
    EXPECT_EQ(slurp(path("p.estimate.json")), estimate);
}

// ---------------------------------------------------------------------------

TEST(Io, FormatDoubleRoundTrips) {
    for (double x : {0.0, 1.0, 0.1, 1.0 / 3.0, 9.869604401089358, 1e-300, 123456789.123456789}) {
        EXPECT_EQ(std::stod(io::format_double(x)), x);
    }
}

TEST(Io, SpectrumCsvRoundTrip) {
    const fs::path file = fs::temp_directory_path() / "edgeweyl_io_roundtrip.csv";
    const SpectralMeasure sm = ball3_spectrum(500.0);
    io::write_spectrum_csv(file, sm);
    SpectralMeasure back = io::read_spectrum_csv(file);
    ASSERT_EQ(back.atoms.size(), sm.atoms.size());
    for (std::size_t i = 0; i < sm.atoms.size(); ++i) {
        EXPECT_EQ(back.atoms[i].lambda, sm.atoms[i].lambda);
        EXPECT_EQ(back.atoms[i].weight, sm.atoms[i].weight);
    }
    io::apply_meta(back, io::spectrum_meta(sm, "ball3", json::object(), 0));
    EXPECT_EQ(back.dimension, sm.dimension);
    EXPECT_EQ(back.lambda_max, sm.lambda_max);
    fs::remove(file);
}

TEST(Io, MissingJsonIsAUsageError) {
    EXPECT_THROW(io::read_json("/nonexistent/edgeweyl.json"), UsageError);
}
