#include <gtest/gtest.h>

#ifdef WLOGIT_HAVE_CLI

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "wlogit/error.hpp"
#include "wlogit/model_io.hpp"
#include "wlogit_cli/commands.hpp"
#include "wlogit_cli/config.hpp"
#include "wlogit_cli/csv.hpp"

using namespace wlogit;
using namespace wlogit::cli;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code;
    std::string out;
    std::string err;
};

CmdResult run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_command(args, out, err);
    return {code, out.str(), err.str()};
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// Separable toy data: label = 1 when g0 - g1 > 0.
std::string toy_csv(std::uint64_t seed, int n = 60, int p = 6) {
    Rng rng(seed);
    std::ostringstream os;
    for (int j = 0; j < p; ++j) os << "g" << j << ",";
    os << "status\n";
    for (int i = 0; i < n; ++i) {
        std::vector<double> x(static_cast<std::size_t>(p));
        for (auto& v : x) v = rng.normal();
        for (double v : x) os << format_double(v) << ",";
        os << (x[0] - x[1] > 0 ? 1 : 0) << "\n";
    }
    return os.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override { dir = wlogit::testing::scratch_dir("cli"); }
    void TearDown() override { fs::remove_all(dir); }
    fs::path dir;
};

}  // namespace

TEST_F(CliTest, CsvWellFormed) {
    write(dir / "a.csv", "x,y\n1.5,1\n-2,0\n3e-1,1\n");
    const CsvDataset d = read_csv_dataset(dir / "a.csv", "y");
    EXPECT_EQ(d.data.n(), 3);
    EXPECT_EQ(d.data.p(), 1);
    EXPECT_EQ(d.feature_names, std::vector<std::string>{"x"});
    EXPECT_DOUBLE_EQ(d.data.X(2, 0), 0.3);
}

TEST_F(CliTest, CsvQuotedHeaderAndBlankLines) {
    write(dir / "a.csv", "\"gene, A\",\"y\"\n\n1,1\n2,0\n");
    const CsvDataset d = read_csv_dataset(dir / "a.csv", "y");
    EXPECT_EQ(d.feature_names[0], "gene, A");
    EXPECT_EQ(d.data.n(), 2);
}

TEST_F(CliTest, CsvNonBinaryLabelNamesRowAndColumn) {
    write(dir / "a.csv", "x,y\n1,1\n2,2\n3,0\n");
    try {
        read_csv_dataset(dir / "a.csv", "y");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
        EXPECT_NE(msg.find("'y'"), std::string::npos) << msg;
    }
}

TEST_F(CliTest, CsvRejectsBadCells) {
    write(dir / "missing.csv", "x,z,y\n1,,1\n2,3,0\n");
    write(dir / "text.csv", "x,y\n1,1\nabc,0\n");
    write(dir / "short.csv", "x,z,y\n1,2,1\n2,0\n");
    write(dir / "inf.csv", "x,y\ninf,1\n2,0\n");
    write(dir / "one.csv", "x,y\n1,1\n");
    write(dir / "dup.csv", "x,x,y\n1,1,1\n2,2,0\n");
    for (const char* f : {"missing.csv", "text.csv", "short.csv", "inf.csv", "one.csv", "dup.csv"}) {
        EXPECT_THROW(read_csv_dataset(dir / f, "y"), DataError) << f;
    }
    try {
        read_csv_dataset(dir / "text.csv", "y");
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3, column 1 ('x')"), std::string::npos) << e.what();
    }
    EXPECT_THROW(read_csv_dataset(dir / "text.csv", "label"), DataError);
    EXPECT_THROW(read_csv_dataset(dir / "nope.csv", "y"), DataError);
}

TEST_F(CliTest, CsvWideExpressionMatrix) {
    std::ostringstream os;
    for (int j = 0; j < 2648; ++j) os << "probe" << j << ",";
    os << "class\n";
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 2648; ++j) os << (i * j % 7) * 0.5 << ",";
        os << i % 2 << "\n";
    }
    write(dir / "wide.csv", os.str());
    EXPECT_EQ(read_csv_dataset(dir / "wide.csv", "class").data.p(), 2648);
}

TEST_F(CliTest, VersionAndUsage) {
    const CmdResult v = run({"version"});
    EXPECT_EQ(v.code, 0);
    EXPECT_EQ(v.out, "0.3.0\n");
    EXPECT_EQ(run({}).code, exit_usage);
    EXPECT_EQ(run({"frobnicate"}).code, exit_usage);
    const CmdResult missing = run({"fit", "--data", "x.csv"});
    EXPECT_EQ(missing.code, exit_usage);
    EXPECT_EQ(missing.err.rfind("error: usage: ", 0), 0u) << missing.err;
    EXPECT_EQ(std::count(missing.err.begin(), missing.err.end(), '\n'), 1);
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"fit", "--help"}).code, 0);
}

TEST_F(CliTest, ExitCodesByFailureKind) {
    write(dir / "bad.csv", "x,y\n1,1\n2,7\n");
    const CmdResult data = run({"fit", "--data", (dir / "bad.csv").string(), "--label", "y"});
    EXPECT_EQ(data.code, exit_data);
    EXPECT_EQ(data.err.rfind("error: data: ", 0), 0u);
    const CmdResult gamma = run({"fit", "--data", (dir / "bad.csv").string(), "--label", "y", "--gamma", "3"});
    EXPECT_EQ(gamma.code, exit_usage);
}

TEST_F(CliTest, FitWritesModelAndReportsSupport) {
    write(dir / "toy.csv", toy_csv(1));
    const CmdResult r = run({"fit", "--data", (dir / "toy.csv").string(), "--label", "status", "--out",
                       (dir / "model.json").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(dir / "model.json"));
    EXPECT_NE(r.out.find("lambda_hat="), std::string::npos);
    EXPECT_NE(r.out.find("k_hat="), std::string::npos);
    EXPECT_NE(r.out.find("m_hat="), std::string::npos);
    EXPECT_EQ(r.out.find("support_size=0"), std::string::npos);
    EXPECT_NE(r.out.find("support_names=g0"), std::string::npos) << r.out;
    EXPECT_EQ(load_model(dir / "model.json").feature_names.size(), 6u);
}

TEST_F(CliTest, PredictFromFileMatchesInMemoryFit) {
    write(dir / "toy.csv", toy_csv(2));
    ASSERT_EQ(run({"fit", "--data", (dir / "toy.csv").string(), "--label", "status", "--out",
                   (dir / "m.json").string()})
                  .code,
              0);
    const CmdResult p = run({"predict", "--model", (dir / "m.json").string(), "--data", (dir / "toy.csv").string(),
                       "--label", "status", "--out", (dir / "pred.csv").string()});
    ASSERT_EQ(p.code, 0) << p.err;

    const CsvDataset d = read_csv_dataset(dir / "toy.csv", "status");
    const Prediction mem = predict(fit(d.data), d.data.X);
    std::istringstream in(slurp(dir / "pred.csv"));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "probability,label");
    for (Eigen::Index i = 0; i < d.data.n(); ++i) {
        ASSERT_TRUE(std::getline(in, line));
        const auto comma = line.find(',');
        EXPECT_EQ(std::stod(line.substr(0, comma)), mem.probabilities(i)) << i;
        EXPECT_EQ(std::stoi(line.substr(comma + 1)), mem.labels(i));
    }
}

TEST_F(CliTest, PredictChecksFeatureColumns) {
    write(dir / "toy.csv", toy_csv(3));
    ASSERT_EQ(run({"fit", "--data", (dir / "toy.csv").string(), "--label", "status", "--out",
                   (dir / "m.json").string()})
                  .code,
              0);
    write(dir / "other.csv", "a,b\n1,2\n3,4\n");
    const CmdResult r = run({"predict", "--model", (dir / "m.json").string(), "--data", (dir / "other.csv").string(),
                       "--out", (dir / "pred.csv").string()});
    EXPECT_EQ(r.code, exit_data);
    EXPECT_FALSE(fs::exists(dir / "pred.csv"));
}

TEST_F(CliTest, IcCheckReportsBothSides) {
    write(dir / "toy.csv", toy_csv(4));
    write(dir / "truth.txt", "g0\ng1\n");
    const CmdResult a = run({"ic-check", "--data", (dir / "toy.csv").string(), "--label", "status", "--support", "0,1"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_NE(a.out.find("before.violation_fraction="), std::string::npos);
    EXPECT_NE(a.out.find("after.max_row_sum="), std::string::npos);
    const CmdResult b = run({"ic-check", "--data", (dir / "toy.csv").string(), "--label", "status", "--truth",
                       (dir / "truth.txt").string()});
    EXPECT_EQ(b.out, a.out);
    EXPECT_EQ(run({"ic-check", "--data", (dir / "toy.csv").string(), "--label", "status"}).code, exit_usage);
    EXPECT_EQ(run({"ic-check", "--data", (dir / "toy.csv").string(), "--label", "status", "--support", "g9"}).code,
              exit_data);
}

TEST_F(CliTest, CvPrintsFoldsAndWritesRoc) {
    write(dir / "toy.csv", toy_csv(5, 80));
    const std::vector<std::string> args{"cv",     "--data", (dir / "toy.csv").string(), "--label", "status", "--k",
                                        "5",      "--seed", "3",  "--out", (dir / "roc.csv").string()};
    const CmdResult r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("fold=5 auc="), std::string::npos);
    EXPECT_NE(r.out.find("pooled_auc="), std::string::npos);
    EXPECT_EQ(slurp(dir / "roc.csv").rfind("fpr,tpr\n0,0\n", 0), 0u);
    EXPECT_EQ(run(args).out, r.out);
    auto lasso = args;
    lasso.insert(lasso.end(), {"--method", "lasso"});
    EXPECT_EQ(run(lasso).code, 0);
}

TEST_F(CliTest, SimulateIsDeterministicAndAtomic) {
    write(dir / "cfg.toml", R"(
[[scenario]]
name = "tiny"
p = 20
d = 3
n_train = 40
n_test = 20
sigma = "blockwise"
replications = 3
seed = 5
[scenario.wlogit]
n_lambda = 6
[scenario.lasso]
folds = 3
n_lambda = 6
)");
    const std::string cfg = (dir / "cfg.toml").string();
    ASSERT_EQ(run({"simulate", "--config", cfg, "--out", (dir / "a").string(), "--threads", "2"}).code, 0);
    ASSERT_EQ(run({"simulate", "--config", cfg, "--out", (dir / "b").string(), "--threads", "1"}).code, 0);
    for (const char* f : {"results.csv", "aggregate.csv", "errors.csv"}) {
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
    EXPECT_EQ(std::count_if(std::istreambuf_iterator<char>(std::ifstream(dir / "a" / "results.csv").rdbuf()), {},
                            [](char c) { return c == '\n'; }),
              7);

    ASSERT_EQ(run({"simulate", "--config", cfg, "--out", (dir / "c").string(), "--seed", "9"}).code, 0);
    EXPECT_NE(slurp(dir / "c" / "results.csv"), slurp(dir / "a" / "results.csv"));

    write(dir / "bad.toml", "[[scenario]]\nname = \"x\"\np = 5\nd = 9\n");
    const CmdResult bad = run({"simulate", "--config", (dir / "bad.toml").string(), "--out", (dir / "d").string()});
    EXPECT_EQ(bad.code, exit_data);
    EXPECT_FALSE(fs::exists(dir / "d" / "results.csv"));
}

TEST_F(CliTest, ShippedDeskConfigShape) {
    const auto scenarios = load_simulation_config(WLOGIT_DESK_CONFIG);
    ASSERT_EQ(scenarios.size(), 1u);
    EXPECT_EQ(scenarios[0].replications, 20);
    const CmdResult r = run({"simulate", "--config", WLOGIT_DESK_CONFIG, "--out", (dir / "desk").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(slurp(dir / "desk" / "results.csv"));
    std::string line;
    int rows = 0, wlogit_rows = 0;
    std::getline(in, line);
    while (std::getline(in, line)) {
        ++rows;
        if (line.rfind("wlogit,", 0) == 0) ++wlogit_rows;
    }
    EXPECT_EQ(rows, 40);
    EXPECT_EQ(wlogit_rows, 20);
}

TEST(SimulationConfig, ShippedConfigsParse) {
    int seen = 0;
    for (const auto& e : fs::directory_iterator(WLOGIT_CONFIG_DIR)) {
        if (e.path().extension() != ".toml") continue;
        EXPECT_NO_THROW(load_simulation_config(e.path())) << e.path();
        ++seen;
    }
    EXPECT_GE(seen, 2);
    EXPECT_EQ(load_simulation_config(fs::path(WLOGIT_CONFIG_DIR) / "full_study.toml").size(), 7u);
}

TEST(SimulationConfig, ParsesAndRejectsUnknownKeys) {
    const auto s = parse_simulation_config(R"(
[[scenario]]
name = "imb"
p = 50
d = 5
n_train = 100
n_test = 50
sigma = "blockwise"
alpha = [0.2, 0.4, 0.6]
balance = "imbalanced"
n_pos = 20
replications = 2
seed = 3
[scenario.wlogit]
gamma = 0.9
h_convention = "literal"
covariance = "shrinkage"
)");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].sigma.alpha2, 0.4);
    EXPECT_EQ(s[0].balance.kind, Balance::Kind::imbalanced);
    EXPECT_EQ(s[0].balance.n_pos, 20);
    EXPECT_EQ(s[0].wlogit.cutoff.gamma_k, 0.9);
    EXPECT_EQ(s[0].wlogit.cutoff.gamma_m, 0.9);
    EXPECT_EQ(s[0].wlogit.whitening.h_convention, HConvention::literal);
    EXPECT_EQ(s[0].wlogit.whitening.covariance, CovarianceMethod::shrinkage);

    EXPECT_THROW(parse_simulation_config("[[scenario]]\nname = \"a\"\nbogus = 1\n"), DataError);
    EXPECT_THROW(parse_simulation_config("[[scenario]]\n[scenario.wlogit]\ngama = 1\n"), DataError);
    EXPECT_THROW(parse_simulation_config("[[scenario]]\np = \"big\"\n"), DataError);
    EXPECT_THROW(parse_simulation_config("[[scenario]]\nsigma = \"diag\"\n"), DataError);
    EXPECT_THROW(parse_simulation_config("x = 1\n"), DataError);
    EXPECT_THROW(parse_simulation_config("[[scenario\n"), DataError);
    EXPECT_THROW(parse_simulation_config("[[scenario]]\n[[scenario]]\n"), DataError);  // duplicate names
}

TEST(Threads, FlagBeatsEnvironmentBeatsHardware) {
    ::setenv("WLOGIT_THREADS", "3", 1);
    EXPECT_EQ(resolve_threads(5), 5u);
    EXPECT_EQ(resolve_threads(0), 3u);
    ::unsetenv("WLOGIT_THREADS");
    EXPECT_GE(resolve_threads(0), 1u);
}

#endif
