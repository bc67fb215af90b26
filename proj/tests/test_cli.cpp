// Drives the built CLI binary end to end through its exit codes and outputs.

#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

class CliRunner : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("edgesketch_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    // Returns the process exit code; stdout/stderr captured into files.
    int run(const std::string& args) {
        const std::string cmd = std::string(EDGESKETCH_CLI_PATH) + " " + args + " >" +
                                path("stdout.txt") + " 2>" + path("stderr.txt");
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string slurp(const std::string& file) const {
        std::ifstream in(path(file));
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    }

    std::string write_file(const std::string& name, const std::string& content) const {
        const std::string p = path(name);
        std::ofstream out(p);
        out << content;
        return p;
    }

    fs::path dir_;
};

} // namespace

TEST_F(CliRunner, SynthThenRunHappyPath) {
    ASSERT_EQ(run("synth --out " + path("e.csv") + " --n_nodes 100 --n_edges 20000 --n_bins 50"
                  " --burst_count 3 --burst_size 200 --burst_fanout 4 --seed 7"),
              0);
    EXPECT_TRUE(fs::exists(path("e.csv")));
    EXPECT_TRUE(fs::exists(path("e.csv.labels")));
    EXPECT_TRUE(fs::exists(path("e.csv.meta")));

    ASSERT_EQ(run("run --edges " + path("e.csv") + " --labels " + path("e.csv.labels") + " --out " +
                  path("s.csv")),
              0);
    const std::string report = slurp("stdout.txt");
    EXPECT_NE(report.find("auc="), std::string::npos);
    EXPECT_EQ(report.find("auc=n/a"), std::string::npos);
    EXPECT_NE(report.find("rows=4"), std::string::npos);

    std::ifstream scores(path("s.csv"));
    std::string header;
    std::getline(scores, header);
    EXPECT_EQ(header, "u,v,t,a_hat,s_hat,raw,posterior,z,tau,flag");
    std::size_t rows = 0;
    for (std::string line; std::getline(scores, line);) ++rows;
    EXPECT_EQ(rows, 20000u);
}

TEST_F(CliRunner, InvalidGammaNamesKeyAndExitsOne) {
    write_file("e.csv", "1,2,1\n");
    EXPECT_EQ(run("run --edges " + path("e.csv") + " --gamma 1.5"), 1);
    EXPECT_NE(slurp("stderr.txt").find("gamma"), std::string::npos);
}

TEST_F(CliRunner, UnknownFlagExitsOne) {
    EXPECT_EQ(run("run --edges nowhere.csv --turbo 9"), 1);
}

TEST_F(CliRunner, MissingFileExitsTwo) {
    EXPECT_EQ(run("run --edges " + path("missing.csv")), 2);
}

TEST_F(CliRunner, MalformedDataExitsTwo) {
    write_file("bad.csv", "1,2,notatime\n");
    EXPECT_EQ(run("run --edges " + path("bad.csv")), 2);
    EXPECT_NE(slurp("stderr.txt").find(":1:"), std::string::npos);
}

TEST_F(CliRunner, LabelLengthMismatchExitsTwo) {
    write_file("e.csv", "1,2,1\n3,4,2\n");
    write_file("l.txt", "0\n");
    EXPECT_EQ(run("run --edges " + path("e.csv") + " --labels " + path("l.txt")), 2);
}

TEST_F(CliRunner, ConfigFileWithFlagOverride) {
    write_file("e.csv", "1,2,1\n1,2,2\n1,2,3\n");
    write_file("run.conf", "# pipeline defaults\nrows=6\ngamma=0.9\n");
    ASSERT_EQ(run("run --edges " + path("e.csv") + " --config " + path("run.conf") +
                  " --gamma 0.99 --out " + path("s.csv")),
              0);
    const std::string report = slurp("stdout.txt");
    EXPECT_NE(report.find("rows=6"), std::string::npos);      // from config
    EXPECT_NE(report.find("gamma=0.99"), std::string::npos);  // flag wins
}

TEST_F(CliRunner, DeterministicScoreFiles) {
    ASSERT_EQ(run("synth --out " + path("e.csv") + " --n_nodes 100 --n_edges 20000 --n_bins 50"
                  " --burst_count 2 --burst_size 150 --seed 3"),
              0);
    ASSERT_EQ(run("run --edges " + path("e.csv") + " --out " + path("a.csv") + " --seed 42"), 0);
    ASSERT_EQ(run("run --edges " + path("e.csv") + " --out " + path("b.csv") + " --seed 42"), 0);
    EXPECT_EQ(slurp("a.csv"), slurp("b.csv"));
    ASSERT_EQ(run("run --edges " + path("e.csv") + " --out " + path("c.csv") + " --seed 43"), 0);
    EXPECT_NE(slurp("a.csv"), slurp("c.csv"));
}

TEST_F(CliRunner, BenchEmitsScalingTable) {
    ASSERT_EQ(run("synth --out " + path("e.csv") + " --n_nodes 50 --n_edges 5000 --n_bins 20"
                  " --burst_count 0 --seed 5"),
              0);
    ASSERT_EQ(run("bench --edges " + path("e.csv")), 0);
    const std::string table = slurp("stdout.txt");
    EXPECT_NE(table.find("avg_time_per_edge"), std::string::npos);
    EXPECT_NE(table.find("\n          10 "), std::string::npos);
    EXPECT_NE(table.find("\n        1000 "), std::string::npos);
    EXPECT_NE(table.find("\n        5000 "), std::string::npos); // clamped tail
}

TEST_F(CliRunner, SweepGridReport) {
    ASSERT_EQ(run("synth --out " + path("e.csv") + " --n_nodes 80 --n_edges 10000 --n_bins 40"
                  " --burst_count 2 --burst_size 150 --burst_fanout 3 --seed 11"),
              0);
    write_file("grid.conf", "rows=2,4\nlambda=0.8\n");
    ASSERT_EQ(run("sweep --grid " + path("grid.conf") + " --edges " + path("e.csv") + " --labels " +
                  path("e.csv.labels") + " --repeats 2 --out " + path("sweep.csv")),
              0);
    std::ifstream in(path("sweep.csv"));
    std::string header;
    std::getline(in, header);
    EXPECT_NE(header.find("auc_mean,auc_std,runtime_mean_s,avg_time_per_edge_s"), std::string::npos);
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    EXPECT_EQ(rows, 2u); // 2 cells
}

TEST_F(CliRunner, SynthBurstMathValidated) {
    EXPECT_EQ(run("synth --out " + path("e.csv") + " --n_edges 100 --burst_count 10"
                  " --burst_size 50"),
              1); // infeasible: 500 > 100
}
