#include "multivar/csv.hpp"
#include "multivar/error.hpp"
#include "multivar/metrics.hpp"
#include "multivar_cli/bundle.hpp"
#include "multivar_cli/commands.hpp"
#include "multivar_cli/report.hpp"
#include "multivar_cli/svg.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace multivar::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("multivar_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "multivar");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, kExitValidation);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitValidation);
  EXPECT_EQ(run_cli({"simulate", "--condition", "no"}).code, kExitValidation);  // --t missing
  EXPECT_EQ(run_cli({"simulate", "--condition", "mid", "--t", "30", "--out", "x"}).code, kExitValidation);
  const auto dir = scratch_dir("usage");
  // 0.3 * 100 paths is fine but 0.5 * 15 subjects is not an integer
  const auto bad = run_cli({"simulate", "--pi-p", "0.3", "--pi-i", "0.5", "--t", "30", "--out", (dir / "b").string()});
  EXPECT_EQ(bad.code, kExitValidation);
  EXPECT_NE(bad.err.find("pi_i"), std::string::npos) << bad.err;
  EXPECT_EQ(run_cli({"fit", "--data", (dir / "nope").string(), "--out", (dir / "o").string()}).code, kExitValidation);
  EXPECT_EQ(run_cli({"benchmark", "--conditions", "--t", "30", "--out", (dir / "o").string()}).code, kExitValidation);
  EXPECT_EQ(run_cli({"benchmark", "--d", "0", "--out", (dir / "o").string()}).code, kExitValidation);
  EXPECT_EQ(run_cli({"fit", "--data", (dir / "nope").string(), "--method", "magic", "--out", "o"}).code,
            kExitValidation);
}

TEST(Cli, SimulateBundleShape) {
  const auto dir = scratch_dir("sim");
  const auto r = run_cli({"simulate", "--condition", "high", "--t", "100", "--seed", "7", "--out", (dir / "b").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  int csvs = 0;
  for (const auto& e : fs::directory_iterator(dir / "b")) {
    if (e.path().extension() != ".csv") continue;
    ++csvs;
    const auto t = read_csv(e.path());
    EXPECT_EQ(t.header.size(), 10u);
    EXPECT_EQ(t.rows.size(), 100u);
  }
  EXPECT_EQ(csvs, 15);
  const auto manifest = read_json(dir / "b" / "manifest.json");
  EXPECT_EQ(manifest["K"], 15);
  EXPECT_EQ(manifest["d"], 10);
  const auto bundle = read_bundle(dir / "b");
  EXPECT_EQ(bundle.series.num_subjects(), 15);
  ASSERT_TRUE(bundle.truth.has_value());
  EXPECT_EQ(truth_matrices(*bundle.truth).size(), 15u);
}

TEST(Cli, SimulateIsDeterministic) {
  const auto dir = scratch_dir("det");
  for (const char* name : {"a", "b"}) {
    ASSERT_EQ(run_cli({"simulate", "--condition", "no", "--t", "30", "--seed", "5", "--out", (dir / name).string()}).code,
              kExitOk);
  }
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << e.path();
  }
}

TEST(Cli, SimulateCommonUniqueLayout) {
  const auto dir = scratch_dir("cu");
  ASSERT_EQ(run_cli({"simulate", "--common", "0.05", "--unique", "0.05", "--k", "3", "--d", "10", "--t", "100", "--out",
                     (dir / "b").string()})
                .code,
            kExitOk);
  const auto truth = read_json(dir / "b" / "truth.json");
  const auto mats = truth_matrices(truth);
  ASSERT_EQ(mats.size(), 3u);
  auto nz = [](const Matrix& m) { return (m.array() != 0.0).cast<int>(); };
  const Eigen::ArrayXXi shared = nz(mats[0]) * nz(mats[1]) * nz(mats[2]);
  EXPECT_EQ(shared.sum(), 5);
  for (const auto& m : mats) EXPECT_EQ(nz(m).sum(), 10);
}

TEST(Cli, BundleValidation) {
  const auto dir = scratch_dir("bundle");
  ASSERT_EQ(run_cli({"simulate", "--condition", "no", "--t", "30", "--d", "4", "--k", "3", "--out", (dir / "b").string()}).code,
            kExitOk);
  // drop the last data row of one subject: manifest T no longer matches
  const auto file = dir / "b" / "subject_2.csv";
  std::string text = slurp(file);
  text.erase(text.find_last_of('\n', text.size() - 2) + 1);
  std::ofstream(file, std::ios::binary) << text;
  try {
    read_bundle(dir / "b");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("subject_2.csv"), std::string::npos) << e.what();
  }
  const auto r = run_cli({"fit", "--data", (dir / "b").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("subject_2.csv"), std::string::npos);
}

TEST(Cli, BundleRoundTrip) {
  const auto dir = scratch_dir("roundtrip");
  Matrix a(2, 5), b(2, 4);
  a << 1, 2, 3, 4, 5, 0.1, 0.2, 0.3, 0.4, 1e-17;
  b << -1, 0, 1, 2, 3.25, 4, 5, 6;
  const MultiSubjectSeries series(std::vector<SubjectSeries>{{a, "x"}, {b, "y"}});
  write_bundle(dir, series, {"u", "v"});
  const auto back = read_bundle(dir);
  EXPECT_EQ(back.variables, (std::vector<std::string>{"u", "v"}));
  EXPECT_EQ(back.series[0].data, a);
  EXPECT_EQ(back.series[1].data, b);
  EXPECT_EQ(back.series[1].subject_id, "y");
}

TEST(Cli, FitOutputsAndBitIdenticalRefit) {
  const auto dir = scratch_dir("fit");
  ASSERT_EQ(run_cli({"simulate", "--condition", "low", "--t", "40", "--d", "10", "--k", "3", "--seed", "2", "--out",
                     (dir / "b").string()})
                .code,
            kExitOk);
  const auto fit = run_cli({"fit", "--data", (dir / "b").string(), "--method", "multivar-adaptive-lasso", "--folds", "4",
                            "--grid-n1", "4", "--grid-n2", "4", "--heatmaps", "--out", (dir / "f").string()});
  ASSERT_EQ(fit.code, kExitOk) << fit.err;
  EXPECT_TRUE(fs::exists(dir / "f" / "common.csv"));
  EXPECT_TRUE(fs::exists(dir / "f" / "cv_table.csv"));
  EXPECT_TRUE(fs::exists(dir / "f" / "heatmaps" / "common.svg"));
  for (int k = 1; k <= 3; ++k) {
    EXPECT_TRUE(fs::exists(dir / "f" / ("total_subject_" + std::to_string(k) + ".csv")));
  }
  const auto summary = read_json(dir / "f" / "summary.json");
  EXPECT_TRUE(summary.contains("metrics"));
  EXPECT_TRUE(summary.contains("effective_config"));
  EXPECT_EQ(read_csv(dir / "f" / "cv_table.csv").rows.size(), 16u);

  const auto refit = run_cli({"fit", "--data", (dir / "b").string(), "--method", "multivar-adaptive-lasso", "--folds", "4", "--lambda1",
                              format_double(summary["lambda1"].get<double>()), "--lambda2",
                              format_double(summary["lambda2_fraction"].get<double>()), "--out", (dir / "r").string()});
  ASSERT_EQ(refit.code, kExitOk) << refit.err;
  EXPECT_FALSE(fs::exists(dir / "r" / "cv_table.csv"));
  EXPECT_EQ(slurp(dir / "f" / "common.csv"), slurp(dir / "r" / "common.csv"));
  for (int k = 1; k <= 3; ++k) {
    const std::string name = "total_subject_" + std::to_string(k) + ".csv";
    EXPECT_EQ(slurp(dir / "f" / name), slurp(dir / "r" / name));
  }
}

TEST(Cli, K1MethodHasNoCommonMatrix) {
  const auto dir = scratch_dir("k1");
  ASSERT_EQ(run_cli({"simulate", "--condition", "no", "--t", "60", "--d", "4", "--k", "2", "--out", (dir / "b").string()}).code,
            kExitOk);
  const auto r = run_cli({"fit", "--data", (dir / "b").string(), "--method", "k1-ml-thresh", "--out", (dir / "f").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_FALSE(fs::exists(dir / "f" / "common.csv"));
  EXPECT_TRUE(fs::exists(dir / "f" / "total_subject_1.csv"));
  EXPECT_TRUE(fs::exists(dir / "f" / "total_subject_2.csv"));
}

TEST(Cli, ConfigFileAndPrecedence) {
  const auto dir = scratch_dir("config");
  std::ofstream(dir / "run.toml") << "[simulate]\ncondition = \"no\"\nt = 30\nd = 4\nk = 3\nseed = 9\n";
  const auto a = run_cli({"--config", (dir / "run.toml").string(), "simulate", "--out", (dir / "a").string()});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(read_json(dir / "a" / "manifest.json")["d"], 4);
  const auto b = run_cli({"--config", (dir / "run.toml").string(), "simulate", "--d", "8", "--out", (dir / "b").string()});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  EXPECT_EQ(read_json(dir / "b" / "manifest.json")["d"], 8);  // flag beats file
}

TEST(Cli, BenchmarkAndReport) {
  const auto dir = scratch_dir("bench");
  const auto r = run_cli({"--workers", "2", "benchmark", "--conditions", "no", "--t", "30,40", "--methods",
                          "k1-ml-thresh,multivar-standard", "--reps", "2", "--d", "4", "--k", "3", "--folds", "3",
                          "--grid-n1", "3", "--grid-n2", "3", "--out", (dir / "a").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto long_csv = read_csv(dir / "a" / "metrics.csv");
  EXPECT_EQ(long_csv.rows.size(), 2u * 2u * 2u);
  EXPECT_EQ(long_csv.header,
            (std::vector<std::string>{"condition", "T", "method", "replication", "mcc", "sensitivity", "specificity",
                                      "bias", "rmse"}));
  EXPECT_EQ(read_csv(dir / "a" / "summary.csv").rows.size(), 4u);

  // single worker gives the same bytes
  ASSERT_EQ(run_cli({"--workers", "1", "benchmark", "--conditions", "no", "--t", "30,40", "--methods",
                     "k1-ml-thresh,multivar-standard", "--reps", "2", "--d", "4", "--k", "3", "--folds", "3",
                     "--grid-n1", "3", "--grid-n2", "3", "--out", (dir / "b").string()})
                .code,
            kExitOk);
  EXPECT_EQ(slurp(dir / "a" / "metrics.csv"), slurp(dir / "b" / "metrics.csv"));

  const auto rep = run_cli({"report", "--in", (dir / "a" / "metrics.csv").string(), "--plots", "--out",
                            (dir / "rep").string()});
  ASSERT_EQ(rep.code, kExitOk) << rep.err;
  const auto table = read_csv(dir / "rep" / "report.csv");
  EXPECT_EQ(table.rows.size(), 2u * 2u * 5u);  // (T x method) grid per metric
  EXPECT_TRUE(fs::exists(dir / "rep" / "plots" / "mcc.svg"));
}

TEST(Report, SingleRowMeanAndSchema) {
  const auto dir = scratch_dir("report");
  std::ofstream(dir / "one.csv") << kMetricsCsvHeader << "\nlow,50,multivar-standard,1,0.5,0.6,0.7,0.01,0.02\n";
  const auto rows = aggregate_metrics({dir / "one.csv"});
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].metric, "mcc");
  EXPECT_EQ(rows[0].mean, 0.5);
  EXPECT_EQ(rows[0].median, 0.5);
  EXPECT_EQ(rows[0].n, 1);
  std::ofstream(dir / "bad.csv") << "a,b\n1,2\n";
  EXPECT_THROW(aggregate_metrics({dir / "bad.csv"}), ValidationError);
  EXPECT_EQ(run_cli({"report", "--in", (dir / "bad.csv").string(), "--out", (dir / "o").string()}).code, kExitValidation);
}

TEST(Report, QuantileType7) {
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile({7}, 0.95), 7.0);
}

TEST(Svg, HeatmapSymmetricScale) {
  Matrix m(2, 2);
  m << 0.5, -0.25, 0.0, 0.1;
  const auto svg = heatmap_svg(m, "t", {"a", "b"}, {"a", "b"});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("0.5"), std::string::npos);
}

}  // namespace
}  // namespace multivar::cli
