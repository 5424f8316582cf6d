#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "support/oracles.hpp"

using namespace tinycore;
using namespace tinycore::testing;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args, const std::string& input = "") {
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = cli::run(args, in, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("tinycore_cli_" + name)).string();
}

std::string to_csv(const PointSet& p) {
    std::ostringstream s;
    write_points_csv(s, p, false);
    return s.str();
}

std::string write_csv(const std::string& name, const PointSet& p) {
    const std::string path = temp_path(name);
    std::ofstream(path) << to_csv(p);
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, cli::kExitUsage);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"coreset", "subspace", "-", "--j", "1"}).code, cli::kExitUsage);            // no epsilon
    EXPECT_EQ(run({"coreset", "subspace", "-", "--j", "1", "--epsilon", "2"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"coreset", "kmeans", "-", "--k", "2", "--epsilon", "0.5"}, "1,2\n").code, cli::kExitUsage);
    EXPECT_EQ(run({"coreset", "subspace", "-", "--epsilon", "0.5"}, "1,2\n").code, cli::kExitUsage);
    EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST(Cli, DataErrorsExitOne) {
    const Result bad = run({"coreset", "subspace", "-", "--j", "1", "--epsilon", "0.5"}, "1,2\n3,oops\n");
    EXPECT_EQ(bad.code, cli::kExitData);
    EXPECT_NE(bad.err.find("line 2:"), std::string::npos);
    EXPECT_EQ(run({"coreset", "subspace", "-", "--j", "1", "--epsilon", "0.5"}, "").code, cli::kExitData);
    EXPECT_EQ(run({"stream", "-", "--j", "1", "--epsilon", "0.5"}, "# only comments\n").code, cli::kExitData);
    EXPECT_EQ(run({"coreset", "subspace", temp_path("does_not_exist.csv"), "--j", "1", "--epsilon", "0.5"}).code,
              cli::kExitData);
}

TEST(Cli, CoresetThenEvalPasses) {
    const std::string data = write_csv("sub.csv", anisotropic_points(300, 12, 1));
    const std::string out = temp_path("sub.tcs");
    const Result c = run({"coreset", "subspace", data, "--j", "2", "--epsilon", "0.25", "-o", out});
    ASSERT_EQ(c.code, cli::kExitOk) << c.err;
    EXPECT_NE(c.out.find("construction=subspace"), std::string::npos);
    const Result e = run({"eval", out, data, "--j", "2", "--queries", "50", "--seed", "3"});
    EXPECT_EQ(e.code, cli::kExitOk) << e.out;
    EXPECT_NE(e.out.find("result=pass"), std::string::npos);
}

TEST(Cli, RerunsAreByteIdentical) {
    const std::string data = write_csv("km.csv", blobs(500, 4, 3, 2));
    const std::string a = temp_path("km_a.tcs"), b = temp_path("km_b.tcs");
    const std::vector<std::string> base = {"coreset", "kmeans", data, "--k", "3", "--epsilon", "0.5", "--seed", "11",
                                           "--c-vc", "0.0003"};
    auto with_output = [&](const std::string& o) {
        auto v = base;
        v.insert(v.end(), {"-o", o});
        return v;
    };
    const Result ra = run(with_output(a)), rb = run(with_output(b));
    ASSERT_EQ(ra.code, cli::kExitOk) << ra.err;
    ASSERT_EQ(rb.code, cli::kExitOk);
    EXPECT_EQ(ra.out, rb.out);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_FALSE(slurp(a).empty());
}

TEST(Cli, BinaryAndCsvOutputsAgree) {
    const std::string data = write_csv("fmt.csv", gaussian_points(100, 6, 4));
    const std::string bin = temp_path("fmt.tcs"), csv = temp_path("fmt.txt");
    ASSERT_EQ(run({"coreset", "affine", data, "--j", "1", "--epsilon", "0.5", "-o", bin}).code, cli::kExitOk);
    ASSERT_EQ(run({"coreset", "affine", data, "--j", "1", "--epsilon", "0.5", "-o", csv, "--format", "csv"}).code,
              cli::kExitOk);
    EXPECT_EQ(slurp(bin).substr(0, 4), "TCS1");
    const CoresetFile x = read_coreset(bin), y = read_coreset(csv);
    EXPECT_EQ(x.coreset.points, y.coreset.points);
    EXPECT_EQ(x.coreset.weights, y.coreset.weights);
    EXPECT_EQ(x.coreset.delta, y.coreset.delta);
    EXPECT_EQ(x.header.kind, "affine");
}

TEST(Cli, EvalCatchesCorruptedOffset) {
    const std::string data = write_csv("neg.csv", gaussian_points(300, 80, 5));
    const std::string good = temp_path("neg.tcs"), bad = temp_path("neg_bad.tcs");
    ASSERT_EQ(run({"coreset", "subspace", data, "--j", "1", "--epsilon", "0.05", "-o", good}).code, cli::kExitOk);
    CoresetFile f = read_coreset(good);
    ASSERT_GT(f.coreset.delta, 0.0);
    EXPECT_EQ(run({"eval", good, data, "--j", "1", "--seed", "6"}).code, cli::kExitOk);
    f.coreset.delta *= 1.1;
    write_coreset(bad, f, true);
    const Result e = run({"eval", bad, data, "--j", "1", "--seed", "6"});
    EXPECT_EQ(e.code, cli::kExitData);
    EXPECT_NE(e.out.find("result=fail"), std::string::npos);
}

TEST(Cli, EvalDimensionMismatch) {
    const std::string data = write_csv("dim.csv", gaussian_points(50, 5, 7));
    const std::string other = write_csv("dim2.csv", gaussian_points(50, 6, 8));
    const std::string out = temp_path("dim.tcs");
    ASSERT_EQ(run({"coreset", "subspace", data, "--j", "1", "--epsilon", "0.5", "-o", out}).code, cli::kExitOk);
    const Result e = run({"eval", out, other, "--seed", "1"});
    EXPECT_EQ(e.code, cli::kExitData);
    EXPECT_NE(e.err.find("dimension mismatch"), std::string::npos);
    EXPECT_EQ(run({"eval", out, data}).code, cli::kExitUsage);
}

TEST(Cli, StreamFromStdinWithCheckpoints) {
    const std::string out = temp_path("stream.tcs");
    const PointSet a = anisotropic_points(2048, 8, 9);
    const Result s = run({"stream", "-", "--kind", "affine", "--j", "1", "--epsilon", "0.5", "--checkpoint", "1024",
                          "-o", out},
                         to_csv(a));
    ASSERT_EQ(s.code, cli::kExitOk) << s.err;
    EXPECT_NE(s.out.find("checkpoint n=1024"), std::string::npos);
    EXPECT_NE(s.out.find("checkpoint n=2048"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(out + ".ckpt-1024"));
    const CoresetFile f = read_coreset(out);
    EXPECT_EQ(f.header.construction, "stream-affine");
    EXPECT_EQ(f.header.n, 2048u);
    const std::string data = write_csv("stream.csv", a);
    const Result e = run({"eval", out, data, "--j", "1", "--seed", "2"});
    EXPECT_EQ(e.code, cli::kExitOk) << e.out.substr(e.out.rfind("max_ratio"));
    EXPECT_NE(e.out.find("tolerance=1.5"), std::string::npos);
}

TEST(Cli, StreamSkipsOrAbortsOnMalformedLines) {
    const std::string text = "1,2\n3,4\nbad\n5,6,7\n7,8\n";
    const Result skip = run({"stream", "-", "--j", "1", "--epsilon", "0.5", "--on-error", "skip"}, text);
    EXPECT_EQ(skip.code, cli::kExitOk);
    EXPECT_NE(skip.out.find("skipped=2"), std::string::npos);
    EXPECT_NE(skip.out.find("n=3"), std::string::npos);
    const Result abort = run({"stream", "-", "--j", "1", "--epsilon", "0.5"}, text);
    EXPECT_EQ(abort.code, cli::kExitData);
    EXPECT_NE(abort.err.find("line 3:"), std::string::npos);
}

TEST(Cli, KmeansStreamNeedsSeed) {
    EXPECT_EQ(run({"stream", "-", "--kind", "kmeans", "--k", "2", "--epsilon", "0.5"}, "1,2\n").code, cli::kExitUsage);
    const Result r = run({"stream", "-", "--kind", "kmeans", "--k", "2", "--epsilon", "0.5", "--seed", "1"},
                         to_csv(blobs(200, 2, 2, 10)));
    EXPECT_EQ(r.code, cli::kExitOk) << r.err;
}

TEST(Cli, SolveWritesCenters) {
    const std::string data = write_csv("solve.csv", blobs(120, 3, 2, 12, 20.0));
    const Result r = run({"solve", data, "--k", "2", "--seed", "1"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_NE(r.out.find("problem=kmeans n=120 d=3"), std::string::npos);
    const Result flat = run({"solve", data, "--problem", "affine", "--k", "1", "--j", "1", "--seed", "1"});
    EXPECT_EQ(flat.code, cli::kExitOk) << flat.err;
    EXPECT_NE(flat.out.find("# flat 0 directions"), std::string::npos);
    EXPECT_EQ(run({"solve", data, "--k", "2"}).code, cli::kExitUsage);
}
